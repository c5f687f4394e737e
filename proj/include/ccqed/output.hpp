#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ccqed/observables.hpp"

namespace ccqed {

enum class OutputFormat { Csv, Json };

OutputFormat parse_format(std::string_view text);
std::string extension(OutputFormat format);

std::string sha256_hex(std::string_view data);

/// Shortest round-trip decimal representation.
std::string format_number(double value);

/// Writes via a temporary sibling file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

struct OutputRecord {
  std::string path;  ///< relative to the run directory
  std::string sha256;
  std::size_t bytes = 0;
};

/// Long-format density table: one (t, l, value) row per site plus l = "e".
std::string density_document(const DensitySeries& densities, OutputFormat format, std::size_t stride = 1);
/// Time series sharing one time axis: columns t, name1, name2, ...
std::string series_document(const std::vector<ObservableSeries>& series, OutputFormat format);
/// Generic table with a header row.
std::string table_document(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                           OutputFormat format);

/// Collects files for one run directory and records their checksums.
class OutputSink {
 public:
  OutputSink(std::filesystem::path dir, OutputFormat format);

  OutputFormat format() const { return format_; }
  const std::filesystem::path& dir() const { return dir_; }
  /// `stem` gets the format extension appended.
  void write(const std::string& stem, const std::string& content);
  void write_raw(const std::string& name, const std::string& content);
  const std::vector<OutputRecord>& records() const { return records_; }

 private:
  std::filesystem::path dir_;
  OutputFormat format_;
  std::vector<OutputRecord> records_;
};

}  // namespace ccqed
