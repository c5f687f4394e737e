#include "ccqed/analytic.hpp"

#include <cmath>
#include <numbers>

#include "ccqed/error.hpp"

namespace ccqed {

namespace {

void check_one_excitation(const BasisPtr& basis) {
  if (!basis || basis->sector() != Sector::OneExcitation)
    throw Error(ErrorCode::BasisMismatch, "analytic states live in the one-excitation sector");
}

}  // namespace

double solve_beta(double lambda, double kappa) {
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidParams, "kappa must be > 0");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidParams, "lambda must be >= 0");
  const double x = lambda / (std::numbers::sqrt2 * kappa);
  const double x2 = x * x;
  return 0.5 * std::log(std::sqrt(x2 * x2 + 1.0) + x2);
}

double coupling_squared_from_beta(double beta, double kappa) {
  return kappa * kappa * (std::exp(2.0 * beta) - std::exp(-2.0 * beta));
}

BoundStateParams bound_state_params(const ModelParams& params) {
  params.validate();
  BoundStateParams out;
  out.beta = solve_beta(params.lambda, params.kappa);
  const double sh = std::sinh(out.beta);
  out.omega_norm = params.lambda > 0.0
                       ? std::pow(2.0 * params.kappa / params.lambda, 2) * sh * sh + 1.0 / std::tanh(out.beta)
                       : std::numeric_limits<double>::infinity();
  out.energy_plus = 2.0 * params.kappa * std::cosh(out.beta);
  out.energy_minus = -out.energy_plus;
  return out;
}

std::pair<double, double> bound_energies(const ModelParams& params) {
  const auto b = bound_state_params(params);
  return {b.energy_plus, b.energy_minus};
}

State bound_state(const ModelParams& params, Branch branch, const BasisPtr& basis, double boundary_tol) {
  check_one_excitation(basis);
  if (basis->half_length() != params.half_length_N)
    throw Error(ErrorCode::BasisMismatch, "basis chain length differs from params");
  const auto b = bound_state_params(params);
  const int n = params.half_length_N;
  if (!(std::exp(-b.beta * n) < boundary_tol))
    throw Error(ErrorCode::TruncationTooCoarse,
                "exp(-beta N) = " + std::to_string(std::exp(-b.beta * n)) + " is not below the boundary tolerance");

  const double sign = branch == Branch::Plus ? 1.0 : -1.0;
  const double root = std::sqrt(b.omega_norm);
  Amplitudes amps(basis->dim());
  for (int l = -n; l <= n; ++l) {
    const int d = std::abs(l);
    // (-+1)^{|l|}: alternating for phi+, uniform for phi-.
    const double alternation = (branch == Branch::Plus && d % 2 == 1) ? -1.0 : 1.0;
    amps(basis->mode_of_site(l)) = alternation * std::exp(-b.beta * d) / root;
  }
  amps(basis->atom_mode()) = sign * 2.0 * params.kappa * std::sinh(b.beta) / (params.lambda * root);
  return State{basis, std::move(amps)};
}

ScatteringStateParams scattering_coefficients(double k, const ModelParams& params, ScatteringConvention convention) {
  params.validate();
  if (params.lambda == 0.0) throw Error(ErrorCode::InvalidParams, "scattering coefficients need lambda > 0");
  const double s = std::sin(k);
  if (!(k > 0.0 && k < std::numbers::pi) || std::abs(s) < 1e-12)
    throw Error(ErrorCode::SingularK, "k must lie strictly inside (0, pi)");

  const double kappa = params.kappa;
  const double lambda = params.lambda;
  const Complex i(0.0, 1.0);
  ScatteringStateParams out;
  out.k = k;
  out.epsilon_k = -2.0 * kappa * std::cos(k);
  const double eps = out.epsilon_k;
  const double detuning = lambda * lambda - eps * eps;
  const Complex denom = 4.0 * i * kappa * lambda * s;
  out.g_k = 1.0;
  out.f_k = eps / lambda;
  if (convention == ScatteringConvention::SiteEquations) {
    out.A_k = -(2.0 * kappa * eps * std::exp(-i * k) - detuning) / denom;
    out.B_k = (2.0 * kappa * eps * std::exp(i * k) - detuning) / denom;
  } else {
    const Complex plus = detuning * 2.0 * kappa * eps * std::exp(-i * k) - detuning;
    const Complex minus = -(detuning * 2.0 * kappa * eps * std::exp(i * k) + detuning);
    out.A_k = plus / denom;
    out.B_k = minus / denom;
  }
  return out;
}

State scattering_state(double k, const ModelParams& params, const BasisPtr& basis, ScatteringConvention convention) {
  check_one_excitation(basis);
  auto c = scattering_coefficients(k, params, convention);
  const int n = basis->half_length();
  const Complex i(0.0, 1.0);
  Amplitudes amps(basis->dim());
  amps(basis->atom_mode()) = c.g_k;
  amps(basis->center_mode()) = c.f_k;
  for (int l = 1; l <= n; ++l) {
    const Complex value = c.A_k * std::exp(i * (k * l)) + c.B_k * std::exp(-i * (k * l));
    amps(basis->mode_of_site(l)) = value;
    amps(basis->mode_of_site(-l)) = value;
  }
  c.lambda_norm = amps.squaredNorm();
  amps /= std::sqrt(c.lambda_norm);
  return State{basis, std::move(amps)};
}

State odd_parity_state(double k, const BasisPtr& basis) {
  check_one_excitation(basis);
  const int n = basis->half_length();
  Amplitudes amps = Amplitudes::Zero(basis->dim());
  for (int l = -n; l <= n; ++l) amps(basis->mode_of_site(l)) = std::sin(k * l);
  const double norm = amps.norm();
  if (norm == 0.0) throw Error(ErrorCode::SingularK, "sin(k l) vanishes on every site");
  amps /= norm;
  return State{basis, std::move(amps)};
}

double overlap_p(const ModelParams& params, Branch mu, Branch nu) {
  if (params.lambda == 0.0) return 0.0;
  const auto b = bound_state_params(params);
  const double sh = std::sinh(b.beta);
  const double magnitude = 4.0 * params.kappa * params.kappa / (params.lambda * params.lambda * b.omega_norm) * sh * sh;
  return mu == nu ? magnitude : -magnitude;
}

TransitionProbabilities perturbative_transitions(double U0, double p) {
  TransitionProbabilities out;
  const double u2 = U0 * U0;
  out.t_plus_minus = u2 * p * p * (1.0 + u2);
  out.t_diag = std::pow(1.0 - u2 * p, 2) + std::pow(U0 * p, 2);
  out.escape = 2.0 * u2 * p * (1.0 - p - u2 * p);
  out.outside_validity = out.escape < 0.0;
  return out;
}

double delta_kick_escape(double U0, double p) { return 2.0 * p * (1.0 - std::cos(U0)) * (1.0 - 2.0 * p); }

double eigen_residual(const SparseOperator& h, const State& psi, Complex energy, const std::vector<int>& rows) {
  if (!h.basis().same_space(*psi.basis)) throw Error(ErrorCode::BasisMismatch, "residual across bases");
  const Amplitudes r = h * psi.amplitudes - energy * psi.amplitudes;
  if (rows.empty()) return r.norm();
  double sum = 0.0;
  for (int row : rows) sum += std::norm(r(row));
  return std::sqrt(sum);
}

}  // namespace ccqed
