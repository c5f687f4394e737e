#include "ccqed/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "ccqed/error.hpp"

namespace ccqed {

void ModelParams::validate() const {
  if (half_length_N < 1) throw Error(ErrorCode::InvalidParams, "half_length_N must be >= 1");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw Error(ErrorCode::InvalidParams, "kappa must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::InvalidParams, "lambda must be >= 0");
  if (hubbard_U && !std::isfinite(*hubbard_U)) throw Error(ErrorCode::InvalidParams, "hubbard_U must be finite or INFINITE");
}

std::string to_string(Sector sector) {
  return sector == Sector::OneExcitation ? "ONE_EXC" : "TWO_EXC";
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Spin ? "SPIN" : "HUBBARD"; }

Basis::Basis(int half_length, Sector sector, ModelKind kind)
    : half_length_(half_length), sector_(sector), kind_(kind) {
  if (half_length < 1) throw Error(ErrorCode::InvalidParams, "half_length_N must be >= 1");
  const int m = sites();
  if (sector == Sector::OneExcitation) {
    states_.reserve(static_cast<std::size_t>(m + 1));
    for (int a = 0; a <= m; ++a) states_.push_back({a, Configuration::kNoMode});
    return;
  }
  states_.reserve(static_cast<std::size_t>(m * (m + 1) / 2 + m + 1));
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) states_.push_back({a, b});
  for (int a = 0; a < m; ++a) states_.push_back({a, m});
  if (kind == ModelKind::Hubbard) states_.push_back({m, m});
}

std::optional<int> Basis::index_of(Configuration config) const {
  const int m = sites();
  if (sector_ == Sector::OneExcitation) {
    if (config.second != Configuration::kNoMode || config.first < 0 || config.first > m) return std::nullopt;
    return config.first;
  }
  int a = config.first;
  int b = config.second;
  if (a > b) std::swap(a, b);
  if (a < 0 || b > m) return std::nullopt;
  if (b < m) return a * m - a * (a - 1) / 2 + (b - a);
  const int photon_pairs = m * (m + 1) / 2;
  if (a < m) return photon_pairs + a;
  if (kind_ == ModelKind::Hubbard) return photon_pairs + m;
  return std::nullopt;
}

bool Basis::same_space(const Basis& other) const {
  return half_length_ == other.half_length_ && sector_ == other.sector_ && kind_ == other.kind_;
}

std::string Basis::describe() const {
  std::ostringstream out;
  out << to_string(sector_) << '/' << to_string(kind_) << "/N=" << half_length_ << "/dim=" << dim();
  return out.str();
}

BasisPtr enumerate_basis(const ModelParams& params, Sector sector, ModelKind kind) {
  params.validate();
  return std::make_shared<const Basis>(params.half_length_N, sector, kind);
}

State make_state(BasisPtr basis, Amplitudes amplitudes) {
  if (!basis || amplitudes.size() != basis->dim())
    throw Error(ErrorCode::BasisMismatch, "amplitude vector does not match basis dimension");
  return State{std::move(basis), std::move(amplitudes)};
}

State basis_state(BasisPtr basis, Configuration config) {
  const auto index = basis->index_of(config);
  if (!index) throw Error(ErrorCode::BasisMismatch, "configuration not in basis " + basis->describe());
  Amplitudes amps = Amplitudes::Zero(basis->dim());
  amps(*index) = 1.0;
  return State{std::move(basis), std::move(amps)};
}

Complex inner(const State& bra, const State& ket) {
  if (!bra.basis->same_space(*ket.basis)) throw Error(ErrorCode::BasisMismatch, "inner product across bases");
  return bra.amplitudes.dot(ket.amplitudes);
}

// --- SparseOperator -------------------------------------------------------

SparseOperator::SparseOperator(BasisPtr basis, std::vector<Entry> entries) : basis_(std::move(basis)) {
  const int n = basis_->dim();
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  row_start_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t i = 0; i < entries.size();) {
    const Entry& e = entries[i];
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
      throw Error(ErrorCode::BasisMismatch, "operator entry outside basis");
    Complex sum = 0.0;
    std::size_t j = i;
    for (; j < entries.size() && entries[j].row == e.row && entries[j].col == e.col; ++j) sum += entries[j].value;
    if (sum != Complex(0.0)) {
      cols_.push_back(e.col);
      values_.push_back(sum);
      ++row_start_[static_cast<std::size_t>(e.row) + 1];
    }
    i = j;
  }
  for (int r = 0; r < n; ++r) row_start_[r + 1] += row_start_[r];
}

void SparseOperator::apply(const Complex* x, Complex* y) const {
  const int n = dim();
  for (int r = 0; r < n; ++r) {
    Complex acc = 0.0;
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) acc += values_[k] * x[cols_[k]];
    y[r] = acc;
  }
}

Amplitudes SparseOperator::operator*(const Amplitudes& x) const {
  if (x.size() != dim()) throw Error(ErrorCode::BasisMismatch, "matrix-vector size mismatch");
  Amplitudes y(dim());
  apply(x.data(), y.data());
  return y;
}

Complex SparseOperator::expectation(const Amplitudes& x) const { return x.dot((*this) * x); }

Complex SparseOperator::element(int row, int col) const {
  const auto begin = cols_.begin() + row_start_.at(static_cast<std::size_t>(row));
  const auto end = cols_.begin() + row_start_.at(static_cast<std::size_t>(row) + 1);
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

std::vector<SparseOperator::Entry> SparseOperator::entries() const {
  std::vector<Entry> out;
  out.reserve(values_.size());
  for (int r = 0; r < dim(); ++r)
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) out.push_back({r, cols_[k], values_[k]});
  return out;
}

double SparseOperator::hermitian_defect() const {
  double worst = 0.0;
  for (int r = 0; r < dim(); ++r)
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k)
      worst = std::max(worst, std::abs(values_[k] - std::conj(element(cols_[k], r))));
  return worst;
}

bool SparseOperator::is_real() const {
  return std::all_of(values_.begin(), values_.end(), [](Complex v) { return v.imag() == 0.0; });
}

double SparseOperator::norm_bound() const {
  double worst = 0.0;
  for (int r = 0; r < dim(); ++r) {
    double row = 0.0;
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) row += std::abs(values_[k]);
    worst = std::max(worst, row);
  }
  return worst;
}

double SparseOperator::frobenius_norm() const {
  double sum = 0.0;
  for (const Complex& v : values_) sum += std::norm(v);
  return std::sqrt(sum);
}

Eigen::MatrixXcd SparseOperator::to_dense() const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim(), dim());
  for (int r = 0; r < dim(); ++r)
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) out(r, cols_[k]) = values_[k];
  return out;
}

SparseOperator SparseOperator::plus_diagonal(int index, Complex value) const {
  auto list = entries();
  list.push_back({index, index, value});
  return SparseOperator(basis_, std::move(list));
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  if (!a.basis_->same_space(*b.basis_)) throw Error(ErrorCode::BasisMismatch, "operator product across bases");
  std::vector<SparseOperator::Entry> out;
  std::map<int, Complex> row;
  for (int r = 0; r < a.dim(); ++r) {
    row.clear();
    for (int k = a.row_start_[r]; k < a.row_start_[r + 1]; ++k) {
      const int mid = a.cols_[k];
      for (int q = b.row_start_[mid]; q < b.row_start_[mid + 1]; ++q) row[b.cols_[q]] += a.values_[k] * b.values_[q];
    }
    for (const auto& [c, v] : row) out.push_back({r, c, v});
  }
  return SparseOperator(a.basis_, std::move(out));
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
  if (!a.basis_->same_space(*b.basis_)) throw Error(ErrorCode::BasisMismatch, "operator difference across bases");
  auto list = a.entries();
  for (auto e : b.entries()) {
    e.value = -e.value;
    list.push_back(e);
  }
  return SparseOperator(a.basis_, std::move(list));
}

double commutator_norm(const SparseOperator& a, const SparseOperator& b) {
  return (a * b - b * a).frobenius_norm();
}

// --- Hamiltonians ---------------------------------------------------------

void PulseSpec::validate() const {
  if (!(width_w > 0.0) || !std::isfinite(width_w)) throw Error(ErrorCode::InvalidPulse, "pulse width must be > 0");
  if (!std::isfinite(U0) || !(tau >= 0.0) || !std::isfinite(tau))
    throw Error(ErrorCode::InvalidPulse, "pulse strength and onset must be finite, onset >= 0");
}

double KickedHamiltonian::potential(double t) const {
  return (t > pulse.tau && t < pulse.end()) ? pulse.amplitude() : 0.0;
}

namespace {

struct Link {
  int from;
  int to;
  double amplitude;
};

// Chain hopping -kappa between neighbouring sites plus the lambda link between
// site 0 and e. Each link is used in both directions.
std::vector<Link> links(const ModelParams& params, const Basis& basis) {
  std::vector<Link> out;
  for (int a = 0; a + 1 < basis.sites(); ++a) out.push_back({a, a + 1, -params.kappa});
  if (params.lambda != 0.0) out.push_back({basis.center_mode(), basis.atom_mode(), params.lambda});
  return out;
}

// Moves one boson from `src` to `dst`; returns the target configuration and
// the factor sqrt(n_src) * sqrt(n_dst + 1).
std::optional<std::pair<Configuration, double>> hop(const Configuration& c, int src, int dst) {
  const int n_src = c.count(src);
  if (n_src == 0) return std::nullopt;
  const int n_dst = c.count(dst);
  Configuration next = c;
  if (next.first == src)
    next.first = dst;
  else
    next.second = dst;
  if (next.second != Configuration::kNoMode && next.first > next.second) std::swap(next.first, next.second);
  return std::make_pair(next, std::sqrt(static_cast<double>(n_src) * static_cast<double>(n_dst + 1)));
}

void check_basis(const ModelParams& params, const BasisPtr& basis, ModelKind kind) {
  params.validate();
  if (!basis) throw Error(ErrorCode::BasisMismatch, "null basis");
  if (basis->kind() != kind)
    throw Error(ErrorCode::BasisMismatch, "expected " + to_string(kind) + " basis, got " + basis->describe());
  if (basis->half_length() != params.half_length_N)
    throw Error(ErrorCode::BasisMismatch, "basis chain length differs from params");
}

SparseOperator assemble(const ModelParams& params, const BasisPtr& basis, std::optional<double> u_term) {
  std::vector<SparseOperator::Entry> entries;
  const auto hops = links(params, *basis);
  const int atom = basis->atom_mode();
  for (int i = 0; i < basis->dim(); ++i) {
    const Configuration& c = basis->state(i);
    for (const Link& link : hops) {
      for (const auto& [src, dst] : {std::pair{link.from, link.to}, std::pair{link.to, link.from}}) {
        const auto moved = hop(c, src, dst);
        if (!moved) continue;
        // States outside the basis (doubly excited atom in the spin model) are dropped.
        const auto j = basis->index_of(moved->first);
        if (!j) continue;
        entries.push_back({*j, i, link.amplitude * moved->second});
      }
    }
    if (u_term) {
      const double n_e = c.count(atom);
      const double diag = 0.5 * *u_term * n_e * (1.0 - n_e);
      if (diag != 0.0) entries.push_back({i, i, diag});
    }
  }
  return SparseOperator(basis, std::move(entries));
}

}  // namespace

SparseOperator build_spin_hamiltonian(const ModelParams& params, const BasisPtr& basis) {
  check_basis(params, basis, ModelKind::Spin);
  return assemble(params, basis, std::nullopt);
}

SparseOperator build_hubbard_hamiltonian(const ModelParams& params, const BasisPtr& basis) {
  check_basis(params, basis, ModelKind::Hubbard);
  if (!params.hubbard_U) throw Error(ErrorCode::InvalidParams, "Hubbard Hamiltonian needs a finite U");
  return assemble(params, basis, params.hubbard_U);
}

SparseOperator build_hamiltonian(const ModelParams& params, const BasisPtr& basis) {
  return basis->kind() == ModelKind::Spin ? build_spin_hamiltonian(params, basis)
                                          : build_hubbard_hamiltonian(params, basis);
}

KickedHamiltonian build_kicked_hamiltonian(const ModelParams& params, const PulseSpec& pulse,
                                           const BasisPtr& basis) {
  pulse.validate();
  params.validate();
  if (!basis || basis->sector() != Sector::OneExcitation)
    throw Error(ErrorCode::BasisMismatch, "kicked model lives in the one-excitation sector");
  if (basis->half_length() != params.half_length_N)
    throw Error(ErrorCode::BasisMismatch, "basis chain length differs from params");
  // A single particle never feels U, so H0 is the same for either kind.
  auto h0 = assemble(params, basis, std::nullopt);
  return KickedHamiltonian{std::move(h0), pulse, *basis->index_of({basis->atom_mode(), Configuration::kNoMode})};
}

SparseOperator parity_operator(const BasisPtr& basis) {
  const int atom = basis->atom_mode();
  const int last = basis->sites() - 1;
  auto reflect = [&](int mode) { return (mode == atom || mode == Configuration::kNoMode) ? mode : last - mode; };
  std::vector<SparseOperator::Entry> entries;
  entries.reserve(static_cast<std::size_t>(basis->dim()));
  for (int i = 0; i < basis->dim(); ++i) {
    const Configuration& c = basis->state(i);
    const auto j = basis->index_of({reflect(c.first), reflect(c.second)});
    entries.push_back({*j, i, 1.0});
  }
  return SparseOperator(basis, std::move(entries));
}

SparseOperator total_excitation_operator(const BasisPtr& basis) {
  std::vector<SparseOperator::Entry> entries;
  for (int i = 0; i < basis->dim(); ++i) {
    const Configuration& c = basis->state(i);
    const int n = (c.first != Configuration::kNoMode ? 1 : 0) + (c.second != Configuration::kNoMode ? 1 : 0);
    entries.push_back({i, i, static_cast<double>(n)});
  }
  return SparseOperator(basis, std::move(entries));
}

}  // namespace ccqed
