#include "ccqed/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "ccqed/analytic.hpp"
#include "ccqed/error.hpp"

namespace ccqed {

namespace {

void require_sector(const Basis& basis, Sector sector, const char* what) {
  if (basis.sector() != sector) throw Error(ErrorCode::BasisMismatch, std::string(what) + ": wrong sector " + basis.describe());
}

// Symmetric first-quantized amplitude Phi(x, y) over modes 0..M (M = e), with
// sum |Phi|^2 equal to the occupation-basis norm.
Eigen::MatrixXcd to_pair_matrix(const Basis& basis, const Amplitudes& amps) {
  const int s = basis.sites() + 1;
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(s, s);
  for (int i = 0; i < basis.dim(); ++i) {
    const Configuration& c = basis.state(i);
    if (c.first == c.second) {
      phi(c.first, c.first) = amps(i);
    } else {
      const Complex v = amps(i) / std::numbers::sqrt2;
      phi(c.first, c.second) = v;
      phi(c.second, c.first) = v;
    }
  }
  return phi;
}

}  // namespace

double PacketSpec::half_width() const { return 2.0 * std::sqrt(std::log(2.0)) / width_alpha; }

PacketResult gaussian_packet(const PacketSpec& spec, const BasisPtr& basis) {
  require_sector(*basis, Sector::OneExcitation, "gaussian_packet");
  if (!(spec.width_alpha > 0.0)) throw Error(ErrorCode::InvalidParams, "packet width alpha must be > 0");
  if (!(std::abs(spec.momentum_k0) < std::numbers::pi)) throw Error(ErrorCode::InvalidParams, "k0 must lie in (-pi, pi)");
  const int n = basis->half_length();
  const double a2 = spec.width_alpha * spec.width_alpha;
  Amplitudes amps = Amplitudes::Zero(basis->dim());
  for (int l = -n; l <= n; ++l) {
    const double d = l - spec.center_NA;
    amps(basis->mode_of_site(l)) = std::exp(-0.5 * a2 * d * d) * std::exp(Complex(0.0, spec.momentum_k0 * l));
  }
  amps /= amps.norm();
  PacketResult out{State{basis, std::move(amps)}};
  out.edge_amplitude = std::max(std::abs(out.state.amplitudes(basis->mode_of_site(-n))),
                                std::abs(out.state.amplitudes(basis->mode_of_site(n))));
  out.edge_clipping = out.edge_amplitude > 1e-8;
  out.poorly_separated = 3.0 * spec.half_width() >= std::abs(spec.center_NA);
  return out;
}

ComposeResult compose_two_excitation(const State& u, const State& v, const BasisPtr& basis) {
  require_sector(*u.basis, Sector::OneExcitation, "compose_two_excitation");
  require_sector(*v.basis, Sector::OneExcitation, "compose_two_excitation");
  require_sector(*basis, Sector::TwoExcitation, "compose_two_excitation");
  if (u.basis->half_length() != basis->half_length() || v.basis->half_length() != basis->half_length())
    throw Error(ErrorCode::BasisMismatch, "compose_two_excitation: chain lengths differ");
  const int atom = basis->atom_mode();
  Amplitudes amps(basis->dim());
  for (int i = 0; i < basis->dim(); ++i) {
    const Configuration& c = basis->state(i);
    const Complex ua = u.amplitudes(c.first), ub = u.amplitudes(c.second);
    const Complex va = v.amplitudes(c.first), vb = v.amplitudes(c.second);
    amps(i) = c.first == c.second ? std::numbers::sqrt2 * ua * va : ua * vb + ub * va;
  }
  double dropped = 0.0;
  if (!basis->index_of({atom, atom})) dropped = 2.0 * std::norm(u.amplitudes(atom) * v.amplitudes(atom));
  const double kept = amps.squaredNorm();
  if (kept == 0.0) throw Error(ErrorCode::InvalidParams, "compose_two_excitation: product vanishes in this basis");
  amps /= std::sqrt(kept);
  ComposeResult out{State{basis, std::move(amps)}};
  out.dropped_weight = dropped / (kept + dropped);
  out.lossy = out.dropped_weight > 1e-6;
  return out;
}

Eigen::VectorXd photon_density(const Basis& basis, const Amplitudes& amps) {
  if (amps.size() != basis.dim()) throw Error(ErrorCode::BasisMismatch, "photon_density: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.sites() + 1);
  for (int i = 0; i < basis.dim(); ++i) {
    const Configuration& c = basis.state(i);
    const double w = std::norm(amps(i));
    out(c.first) += w;
    if (c.second != Configuration::kNoMode) out(c.second) += w;
  }
  return out;
}

DensitySeries density_series(const Trajectory& trajectory) {
  if (trajectory.states.size() != trajectory.times.size())
    throw Error(ErrorCode::Validation, "trajectory has no stored states");
  DensitySeries out;
  out.half_length = trajectory.basis->half_length();
  out.times = trajectory.times;
  for (const auto& s : trajectory.states) out.rows.push_back(photon_density(*trajectory.basis, s));
  return out;
}

double p_res(const Eigen::VectorXd& density, int half_length, int l0) {
  if (l0 < 0) throw Error(ErrorCode::InvalidParams, "l0 must be >= 0");
  const int reach = std::min(l0, half_length);
  double sum = density(2 * half_length + 1);
  for (int l = -reach; l <= reach; ++l) sum += density(l + half_length);
  return sum;
}

ObservableSeries p_res(const DensitySeries& densities, int l0) {
  ObservableSeries out{"p_res", densities.times, {}};
  out.values.reserve(densities.rows.size());
  for (const auto& row : densities.rows) out.values.push_back(p_res(row, densities.half_length, l0));
  return out;
}

ObservableSeries p_res(const Trajectory& trajectory, int l0) { return p_res(density_series(trajectory), l0); }

double boundary_return_time(int half_length, std::span<const PacketSpec> packets, int l0, double kappa) {
  const double n = half_length;
  double shortest = 2.0 * (n - l0);
  for (const auto& p : packets) {
    const double to_wall = n - (std::abs(static_cast<double>(p.center_NA)) + 3.0 * p.half_width());
    shortest = std::min(shortest, std::max(to_wall, 0.0) + (n - l0));
  }
  return shortest / (2.0 * kappa);
}

double gamma_emission(const ObservableSeries& series, double window_end, double boundary_return) {
  if (window_end > boundary_return * (1.0 + 1e-12))
    throw Error(ErrorCode::WindowTooLong, "observation window " + std::to_string(window_end) +
                                              " passes the boundary-return time " + std::to_string(boundary_return));
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < series.times.size(); ++i)
    if (series.times[i] <= window_end * (1.0 + 1e-12)) lowest = std::min(lowest, series.values[i]);
  if (!std::isfinite(lowest)) throw Error(ErrorCode::Validation, "no samples inside the observation window");
  return 1.0 - lowest;
}

TransmissionSplit transmission_reflection(const Eigen::VectorXd& density, int half_length, int l0) {
  TransmissionSplit out;
  for (int l = -half_length; l <= half_length; ++l) {
    const double v = density(l + half_length);
    if (l > l0)
      out.right += v;
    else if (l < -l0)
      out.left += v;
    else
      out.center += v;
  }
  return out;
}

SingleParticleModes single_particle_modes(const ModelParams& params) {
  SingleParticleModes out;
  out.params = params;
  out.basis = enumerate_basis(params, Sector::OneExcitation, ModelKind::Spin);
  const auto h = build_spin_hamiltonian(params, out.basis);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.to_dense().real());
  out.energies = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  const double edge = 2.0 * params.kappa;
  const int s = static_cast<int>(out.energies.size());
  for (int i = 0; i < s; ++i) {
    const double e = out.energies(i);
    // Fix the sign so the first sizeable amplitude (site 0 when nonzero) is positive.
    int pivot = out.basis->center_mode();
    for (int r = 0; r < s && std::abs(out.vectors(pivot, i)) < 1e-8; ++r) pivot = r;
    if (out.vectors(pivot, i) < 0.0) out.vectors.col(i) *= -1.0;
    if (params.lambda > 0.0 && e < -edge * (1.0 + 1e-12)) {
      out.minus = i;
      out.momentum.push_back(std::numeric_limits<double>::quiet_NaN());
    } else if (params.lambda > 0.0 && e > edge * (1.0 + 1e-12)) {
      out.plus = i;
      out.momentum.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      out.scattering.push_back(i);
      out.momentum.push_back(std::acos(std::clamp(-e / edge, -1.0, 1.0)));
    }
  }
  return out;
}

namespace {

struct ProductSet {
  std::vector<std::pair<int, int>> pairs;  // mode indices (a, b)
  std::size_t polariton_count = 0;         // first entries are polariton x photon
};

ProductSet select_products(const SingleParticleModes& modes, const ChannelOptions& options) {
  std::vector<int> kept = modes.scattering;
  if (options.max_modes > 0 && static_cast<int>(kept.size()) > options.max_modes) {
    std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) {
      return std::abs(modes.energies(a) - options.energy_center) < std::abs(modes.energies(b) - options.energy_center);
    });
    kept.resize(static_cast<std::size_t>(options.max_modes));
    std::sort(kept.begin(), kept.end());
  }
  ProductSet set;
  for (int bound : {modes.minus, modes.plus}) {
    if (bound < 0) continue;
    for (int k : kept) set.pairs.emplace_back(bound, k);
  }
  set.polariton_count = set.pairs.size();
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = i; j < kept.size(); ++j) set.pairs.emplace_back(kept[i], kept[j]);
  return set;
}

void check_modes(const State& state, const SingleParticleModes& modes) {
  require_sector(*state.basis, Sector::TwoExcitation, "channel_decomposition");
  if (state.basis->half_length() != modes.basis->half_length())
    throw Error(ErrorCode::BasisMismatch, "channel_decomposition: modes and state chain lengths differ");
}

}  // namespace

ChannelDecomposition channel_decomposition(const State& state, const SingleParticleModes& modes,
                                           const ChannelOptions& options) {
  check_modes(state, modes);
  const Eigen::MatrixXcd phi = to_pair_matrix(*state.basis, state.amplitudes);
  const Eigen::MatrixXd& u = modes.vectors;
  const Eigen::MatrixXcd overlaps = u.transpose().cast<Complex>() * phi * u.cast<Complex>();
  const bool projected = state.basis->kind() == ModelKind::Spin;
  const int atom = state.basis->atom_mode();

  const ProductSet set = select_products(modes, options);
  const std::size_t count = set.pairs.size();
  Eigen::VectorXcd b(static_cast<Eigen::Index>(count));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const auto [p, q] = set.pairs[i];
    const double factor = p == q ? 1.0 : std::numbers::sqrt2;
    b(static_cast<Eigen::Index>(i)) = factor * overlaps(p, q);
    if (projected) w(static_cast<Eigen::Index>(i)) = factor * u(atom, p) * u(atom, q);
  }

  // Gram matrix of the projected products is (1 + r) I - w w^T; invert it
  // with the Sherman-Morrison formula.
  const double shift = 1.0 + options.regularization;
  const double w2 = w.squaredNorm();
  ChannelDecomposition out;
  out.gram_condition = shift / (shift - w2);
  if (!(out.gram_condition <= options.max_condition))
    throw Error(ErrorCode::IllConditioned, "Gram condition number " + std::to_string(out.gram_condition));
  const Complex wb = w.cast<Complex>().dot(b);
  const Eigen::VectorXcd c = b / shift + w.cast<Complex>() * (wb / (shift * (shift - w2)));

  for (std::size_t i = 0; i < count; ++i) {
    const auto [p, q] = set.pairs[i];
    const Complex ci = c(static_cast<Eigen::Index>(i));
    if (i < set.polariton_count) {
      out.c1.push_back({p, q, modes.momentum[static_cast<std::size_t>(q)], ci});
      out.c1_weight += std::norm(ci);
    } else {
      out.c2.push_back({p, q, modes.momentum[static_cast<std::size_t>(p)], modes.momentum[static_cast<std::size_t>(q)], ci});
      out.c2_weight += std::norm(ci);
    }
  }
  const double wc = std::norm(w.cast<Complex>().dot(c));
  out.cross_weight = -wc;
  const double fitted = c.squaredNorm() - wc;
  out.residual_weight = state.amplitudes.squaredNorm() - 2.0 * c.dot(b).real() + fitted;
  return out;
}

double channel_reconstruction_error(const State& state, const SingleParticleModes& modes,
                                    const ChannelDecomposition& d) {
  check_modes(state, modes);
  const int s = state.basis->sites() + 1;
  Eigen::MatrixXcd coeff = Eigen::MatrixXcd::Zero(s, s);
  auto put = [&](int p, int q, Complex c) {
    if (p == q) {
      coeff(p, p) += c;
    } else {
      coeff(p, q) += c / std::numbers::sqrt2;
      coeff(q, p) += c / std::numbers::sqrt2;
    }
  };
  for (const auto& e : d.c1) put(e.bound_mode, e.scattering_mode, e.coefficient);
  for (const auto& e : d.c2) put(e.mode_a, e.mode_b, e.coefficient);
  const Eigen::MatrixXcd u = modes.vectors.cast<Complex>();
  Eigen::MatrixXcd fit = u * coeff * u.transpose();
  const int atom = state.basis->atom_mode();
  if (state.basis->kind() == ModelKind::Spin) fit(atom, atom) = 0.0;
  return (to_pair_matrix(*state.basis, state.amplitudes) - fit).squaredNorm();
}

WitnessSeries polariton_witness(const DensitySeries& densities, double trailing_window) {
  WitnessSeries out;
  out.excitation.name = "atom_excitation";
  out.trailing.name = "atom_excitation_trailing";
  out.excitation.times = densities.times;
  out.trailing.times = densities.times;
  const int e = 2 * densities.half_length + 1;
  for (const auto& row : densities.rows) out.excitation.values.push_back(row(e));
  std::size_t start = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < densities.times.size(); ++i) {
    sum += out.excitation.values[i];
    while (densities.times[start] < densities.times[i] - trailing_window) sum -= out.excitation.values[start++];
    out.trailing.values.push_back(sum / static_cast<double>(i - start + 1));
  }
  return out;
}

WitnessSeries polariton_witness(const Trajectory& trajectory, double trailing_window) {
  return polariton_witness(density_series(trajectory), trailing_window);
}

double energy_mismatch(double k, double k_prime, const ModelParams& params) {
  const double kappa = params.kappa;
  const double two_photon = -2.0 * kappa * (std::cos(k) + std::cos(k_prime));
  const auto [plus, minus] = bound_energies(params);
  double gap = std::numeric_limits<double>::infinity();
  for (double eps : {plus, minus}) {
    const double lo = eps - 2.0 * kappa;
    const double hi = eps + 2.0 * kappa;
    const double d = two_photon < lo ? lo - two_photon : (two_photon > hi ? two_photon - hi : 0.0);
    gap = std::min(gap, d);
  }
  return gap;
}

}  // namespace ccqed
