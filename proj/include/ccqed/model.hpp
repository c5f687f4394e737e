#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ccqed {

using Complex = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;

/// Physical parameters of the cavity array. Sites run over l = -N..N with
/// open boundaries; the atom (or auxiliary Hubbard site e) hangs off l = 0.
struct ModelParams {
  int half_length_N = 1;
  double kappa = 1.0;
  double lambda = 0.0;
  /// nullopt selects the hardcore limit (U = infinity), i.e. the spin model.
  std::optional<double> hubbard_U;

  int sites() const { return 2 * half_length_N + 1; }
  bool infinite_U() const { return !hubbard_U.has_value(); }
  void validate() const;
};

enum class Sector { OneExcitation = 1, TwoExcitation = 2 };
enum class ModelKind { Spin, Hubbard };

std::string to_string(Sector sector);
std::string to_string(ModelKind kind);

/// One basis configuration: up to two occupied modes, sorted (first <= second).
/// Modes 0..M-1 are the cavity sites l = -N..N, mode M is the atom / site e.
/// In the one-excitation sector `second` is kNoMode.
struct Configuration {
  static constexpr int kNoMode = -1;
  int first = kNoMode;
  int second = kNoMode;

  int count(int mode) const { return (first == mode ? 1 : 0) + (second == mode ? 1 : 0); }
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Ordered enumeration of a fixed-excitation sector.
///
/// Ordering (fixed so that trajectories are comparable bit-for-bit):
///  - one excitation: photon at l = -N..N, then the atom-excited state;
///  - two excitations: photon pairs (a <= b) in lexicographic order, then
///    photon-plus-atom states (a, e) with a ascending, then (e, e) for the
///    Hubbard kind only.
class Basis {
 public:
  Basis(int half_length, Sector sector, ModelKind kind);

  int half_length() const { return half_length_; }
  int sites() const { return 2 * half_length_ + 1; }
  int atom_mode() const { return sites(); }
  int center_mode() const { return half_length_; }
  int mode_of_site(int l) const { return l + half_length_; }
  int site_of_mode(int mode) const { return mode - half_length_; }
  bool is_atom(int mode) const { return mode == atom_mode(); }

  Sector sector() const { return sector_; }
  ModelKind kind() const { return kind_; }
  int excitations() const { return static_cast<int>(sector_); }

  int dim() const { return static_cast<int>(states_.size()); }
  const Configuration& state(int index) const { return states_.at(static_cast<std::size_t>(index)); }
  const std::vector<Configuration>& states() const { return states_; }

  /// Ordinal of a configuration, or nullopt if it is not part of this basis
  /// (e.g. the doubly excited atom in the spin model). Accepts unsorted pairs.
  std::optional<int> index_of(Configuration config) const;

  /// Same sector, kind and chain length.
  bool same_space(const Basis& other) const;
  std::string describe() const;

 private:
  int half_length_;
  Sector sector_;
  ModelKind kind_;
  std::vector<Configuration> states_;
};

using BasisPtr = std::shared_ptr<const Basis>;

BasisPtr enumerate_basis(const ModelParams& params, Sector sector, ModelKind kind);

/// Amplitude vector tied to the basis it is expressed in.
struct State {
  BasisPtr basis;
  Amplitudes amplitudes;

  double norm() const { return amplitudes.norm(); }
  Complex operator[](int index) const { return amplitudes(index); }
};

State make_state(BasisPtr basis, Amplitudes amplitudes);
State basis_state(BasisPtr basis, Configuration config);
Complex inner(const State& bra, const State& ket);

/// Hermitian sparse matrix in compressed-row form over a fixed basis.
/// Duplicate entries are summed on construction; rows are column-sorted.
class SparseOperator {
 public:
  struct Entry {
    int row;
    int col;
    Complex value;
  };

  SparseOperator(BasisPtr basis, std::vector<Entry> entries);

  int dim() const { return static_cast<int>(row_start_.size()) - 1; }
  const Basis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  std::size_t nonzeros() const { return values_.size(); }

  /// y = A x. Rows are reduced sequentially in column order.
  void apply(const Complex* x, Complex* y) const;
  Amplitudes operator*(const Amplitudes& x) const;
  Complex expectation(const Amplitudes& x) const;

  Complex element(int row, int col) const;
  std::vector<Entry> entries() const;

  /// Largest |A_ij - conj(A_ji)| over all stored entries.
  double hermitian_defect() const;
  bool is_hermitian(double tol = 0.0) const { return hermitian_defect() <= tol; }
  bool is_real() const;
  /// Max absolute row sum; an upper bound on the spectral radius.
  double norm_bound() const;
  double frobenius_norm() const;

  Eigen::MatrixXcd to_dense() const;
  SparseOperator plus_diagonal(int index, Complex value) const;

  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);

 private:
  BasisPtr basis_;
  std::vector<int> row_start_;
  std::vector<int> cols_;
  std::vector<Complex> values_;
};

/// Frobenius norm of [A, B].
double commutator_norm(const SparseOperator& a, const SparseOperator& b);

/// Rectangular pulse (U0 / w) |e><e| switched on for tau < t < tau + w.
struct PulseSpec {
  double U0 = 0.0;
  double tau = 0.0;
  double width_w = 1.0;

  double amplitude() const { return U0 / width_w; }
  double end() const { return tau + width_w; }
  void validate() const;
};

/// Single-particle kicked model: static part H0 plus the pulsed potential on e.
struct KickedHamiltonian {
  SparseOperator h0;
  PulseSpec pulse;
  int e_index;

  double potential(double t) const;
  SparseOperator during_pulse() const { return h0.plus_diagonal(e_index, pulse.amplitude()); }
};

SparseOperator build_spin_hamiltonian(const ModelParams& params, const BasisPtr& basis);
SparseOperator build_hubbard_hamiltonian(const ModelParams& params, const BasisPtr& basis);
/// Spin model for infinite U, Hubbard model otherwise.
SparseOperator build_hamiltonian(const ModelParams& params, const BasisPtr& basis);
KickedHamiltonian build_kicked_hamiltonian(const ModelParams& params, const PulseSpec& pulse,
                                           const BasisPtr& basis);

/// Site reflection l -> -l with e fixed.
SparseOperator parity_operator(const BasisPtr& basis);
/// Photon number plus atom excitation (Hubbard: plus n_e).
SparseOperator total_excitation_operator(const BasisPtr& basis);

}  // namespace ccqed
