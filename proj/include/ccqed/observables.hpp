#pragma once

#include <span>
#include <string>
#include <vector>

#include "ccqed/model.hpp"
#include "ccqed/propagator.hpp"

namespace ccqed {

/// Gaussian photon packet centred on site N_A with carrier momentum k0.
struct PacketSpec {
  int center_NA = 0;
  double momentum_k0 = 0.0;
  double width_alpha = 0.3;

  /// 2 sqrt(ln 2) / alpha, in sites.
  double half_width() const;
};

struct PacketResult {
  State state;
  /// Normalized amplitude on an edge site exceeds 1e-8.
  bool edge_clipping = false;
  /// Three half-widths reach past the centre (packet not well separated from e).
  bool poorly_separated = false;
  double edge_amplitude = 0.0;
};

PacketResult gaussian_packet(const PacketSpec& spec, const BasisPtr& one_excitation_basis);

struct ComposeResult {
  State state;
  /// Fraction of the unnormalized product weight removed with the doubly excited atom.
  double dropped_weight = 0.0;
  bool lossy = false;
};

/// Bosonic product a_u^dag a_v^dag |0> of two one-excitation states, renormalized.
ComposeResult compose_two_excitation(const State& u, const State& v, const BasisPtr& two_excitation_basis);

/// Expected photon number per site (l = -N..N) followed by the e entry
/// (atom excitation, or n_e for the Hubbard kind).
Eigen::VectorXd photon_density(const Basis& basis, const Amplitudes& amplitudes);
inline Eigen::VectorXd photon_density(const State& state) { return photon_density(*state.basis, state.amplitudes); }

struct ObservableSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> values;
};

/// Densities sampled along a trajectory; row i belongs to times[i].
struct DensitySeries {
  int half_length = 0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> rows;
};

DensitySeries density_series(const Trajectory& trajectory);

/// Sum of the density over e and sites |l| <= l0.
double p_res(const Eigen::VectorXd& density, int half_length, int l0);
ObservableSeries p_res(const DensitySeries& densities, int l0);
ObservableSeries p_res(const Trajectory& trajectory, int l0);

/// Earliest time at which anything launched from the packets (three
/// half-widths around each centre) or from the region |l| <= l0 can reach a
/// chain end and come back into the region, moving at the maximal group
/// velocity 2 kappa.
double boundary_return_time(int half_length, std::span<const PacketSpec> packets, int l0, double kappa);

/// 1 - min P_res(t) over t <= window_end. Throws WindowTooLong when the
/// window reaches past `boundary_return`.
double gamma_emission(const ObservableSeries& p_res_series, double window_end, double boundary_return);

struct TransmissionSplit {
  double right = 0.0;   ///< photon weight on l > l0
  double left = 0.0;    ///< photon weight on l < -l0
  double center = 0.0;  ///< photon weight on |l| <= l0 (e excluded)
};

TransmissionSplit transmission_reflection(const Eigen::VectorXd& density, int half_length, int l0);

/// Eigenmodes of the one-excitation Hamiltonian on the finite chain.
struct SingleParticleModes {
  ModelParams params;
  BasisPtr basis;
  Eigen::VectorXd energies;  ///< ascending
  Eigen::MatrixXd vectors;   ///< columns are modes
  int minus = -1;            ///< bound mode below the band, -1 if none
  int plus = -1;             ///< bound mode above the band, -1 if none
  std::vector<int> scattering;
  /// Band momentum arccos(-E / 2 kappa) per mode (NaN for bound modes).
  std::vector<double> momentum;
};

SingleParticleModes single_particle_modes(const ModelParams& params);

struct ChannelOptions {
  /// Keep only this many scattering modes closest to `energy_center` (0 keeps all).
  int max_modes = 0;
  double energy_center = 0.0;
  double regularization = 1e-10;
  double max_condition = 1e8;
};

struct PolaritonChannel {
  int bound_mode;
  int scattering_mode;
  double k;
  Complex coefficient;
};

struct PhotonPairChannel {
  int mode_a;
  int mode_b;
  double k_a;
  double k_b;
  Complex coefficient;
};

/// Least-squares expansion of a two-excitation state over symmetrized products
/// polariton x photon (C1) and photon x photon (C2) of single-particle modes.
struct ChannelDecomposition {
  std::vector<PolaritonChannel> c1;
  std::vector<PhotonPairChannel> c2;
  double c1_weight = 0.0;
  double c2_weight = 0.0;
  /// c^dag G c - |c|^2 for the Gram matrix G of the (non-orthogonal) products.
  double cross_weight = 0.0;
  /// || psi - sum c_i v_i ||^2, holds the two-excitation bound weight.
  double residual_weight = 0.0;
  double gram_condition = 1.0;
};

ChannelDecomposition channel_decomposition(const State& two_excitation_state, const SingleParticleModes& modes,
                                           const ChannelOptions& options = {});

/// Direct reconstruction of || psi - sum c_i v_i ||^2 from the coefficients.
double channel_reconstruction_error(const State& two_excitation_state, const SingleParticleModes& modes,
                                    const ChannelDecomposition& decomposition);

struct WitnessSeries {
  ObservableSeries excitation;  ///< P(e, t)
  ObservableSeries trailing;    ///< mean of P(e) over [t - window, t]
};

WitnessSeries polariton_witness(const DensitySeries& densities, double trailing_window);
WitnessSeries polariton_witness(const Trajectory& trajectory, double trailing_window);

/// Distance between the two-photon energy -2k(cos k + cos k') and the nearest
/// photon-plus-polariton band [eps_sigma - 2 kappa, eps_sigma + 2 kappa].
double energy_mismatch(double k, double k_prime, const ModelParams& params);

}  // namespace ccqed
