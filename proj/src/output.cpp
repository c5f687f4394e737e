#include "ccqed/output.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "ccqed/error.hpp"

namespace ccqed {

OutputFormat parse_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw Error(ErrorCode::Validation, "unknown output format '" + std::string(text) + "' (csv|json)");
}

std::string extension(OutputFormat format) { return format == OutputFormat::Csv ? ".csv" : ".json"; }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Io, "sha256 digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "rename to " + path.string() + " failed: " + ec.message());
}

std::string density_document(const DensitySeries& densities, OutputFormat format, std::size_t stride) {
  const int n = densities.half_length;
  if (stride == 0) stride = 1;
  if (format == OutputFormat::Json) {
    nlohmann::json doc;
    doc["half_length_N"] = n;
    doc["times"] = nlohmann::json::array();
    doc["density"] = nlohmann::json::array();
    doc["atom"] = nlohmann::json::array();
    for (std::size_t i = 0; i < densities.rows.size(); i += stride) {
      const auto& row = densities.rows[i];
      doc["times"].push_back(densities.times[i]);
      doc["density"].push_back(std::vector<double>(row.data(), row.data() + 2 * n + 1));
      doc["atom"].push_back(row(2 * n + 1));
    }
    return doc.dump() + "\n";
  }
  std::string out = "t,l,value\n";
  for (std::size_t i = 0; i < densities.rows.size(); i += stride) {
    const auto& row = densities.rows[i];
    const std::string t = format_number(densities.times[i]);
    for (int l = -n; l <= n; ++l) out += t + ',' + std::to_string(l) + ',' + format_number(row(l + n)) + '\n';
    out += t + ",e," + format_number(row(2 * n + 1)) + '\n';
  }
  return out;
}

std::string series_document(const std::vector<ObservableSeries>& series, OutputFormat format) {
  if (series.empty()) return format == OutputFormat::Csv ? "t\n" : "{}\n";
  const auto& times = series.front().times;
  for (const auto& s : series)
    if (s.times.size() != times.size() || s.values.size() != times.size())
      throw Error(ErrorCode::Validation, "series '" + s.name + "' does not share the time axis");
  if (format == OutputFormat::Json) {
    nlohmann::json doc;
    doc["t"] = times;
    for (const auto& s : series) doc[s.name] = s.values;
    return doc.dump() + "\n";
  }
  std::string out = "t";
  for (const auto& s : series) out += ',' + s.name;
  out += '\n';
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += format_number(times[i]);
    for (const auto& s : series) out += ',' + format_number(s.values[i]);
    out += '\n';
  }
  return out;
}

std::string table_document(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                           OutputFormat format) {
  if (format == OutputFormat::Json) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json item;
      for (std::size_t c = 0; c < header.size() && c < row.size(); ++c) item[header[c]] = row[c];
      doc.push_back(item);
    }
    return doc.dump() + "\n";
  }
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_number(row[c]);
    out += '\n';
  }
  return out;
}

OutputSink::OutputSink(std::filesystem::path dir, OutputFormat format) : dir_(std::move(dir)), format_(format) {}

void OutputSink::write(const std::string& stem, const std::string& content) { write_raw(stem + extension(format_), content); }

void OutputSink::write_raw(const std::string& name, const std::string& content) {
  write_atomic(dir_ / name, content);
  records_.push_back({name, sha256_hex(content), content.size()});
}

}  // namespace ccqed
