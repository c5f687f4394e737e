#pragma once

#include <utility>

#include "ccqed/model.hpp"

namespace ccqed {

/// Localization exponent and normalization of the two single-excitation
/// polaritons |phi+->, with energies +-2 kappa cosh(beta).
struct BoundStateParams {
  double beta = 0.0;
  double omega_norm = 0.0;
  double energy_plus = 0.0;
  double energy_minus = 0.0;
};

enum class Branch { Plus, Minus };

/// beta = 1/2 ln( sqrt((lambda/(sqrt2 kappa))^4 + 1) + (lambda/(sqrt2 kappa))^2 ).
double solve_beta(double lambda, double kappa);
/// kappa^2 (e^{2 beta} - e^{-2 beta}); equals lambda^2 for beta = solve_beta(lambda, kappa).
double coupling_squared_from_beta(double beta, double kappa);

BoundStateParams bound_state_params(const ModelParams& params);
std::pair<double, double> bound_energies(const ModelParams& params);

/// Analytic polariton on a one-excitation basis. The infinite-chain profile is
/// truncated at |l| = N; throws TruncationTooCoarse when exp(-beta N) >= boundary_tol.
State bound_state(const ModelParams& params, Branch branch, const BasisPtr& basis, double boundary_tol = 1e-10);

/// Coefficient convention for the even scattering states. `SiteEquations` solves the
/// site equations directly; `Compact` is the compact varsigma form, which
/// carries an extra (lambda^2 - eps^2) on one term and is kept for comparison.
enum class ScatteringConvention { SiteEquations, Compact };

struct ScatteringStateParams {
  double k = 0.0;
  double epsilon_k = 0.0;
  Complex g_k, f_k, A_k, B_k;
  /// Squared norm of the unnormalized vector on the finite chain.
  double lambda_norm = 0.0;
};

/// Coefficients with g_k = 1 (before normalization).
ScatteringStateParams scattering_coefficients(double k, const ModelParams& params,
                                              ScatteringConvention convention = ScatteringConvention::SiteEquations);
State scattering_state(double k, const ModelParams& params, const BasisPtr& basis,
                       ScatteringConvention convention = ScatteringConvention::SiteEquations);
/// Normalized sin(k l) profile; an exact eigenstate when k = n pi / (N + 1).
State odd_parity_state(double k, const BasisPtr& basis);

/// <phi^mu|e><e|phi^nu> = (-1)^{1+delta} (4 kappa^2 / (lambda^2 Omega)) sinh^2 beta.
double overlap_p(const ModelParams& params, Branch mu, Branch nu);

struct TransitionProbabilities {
  double t_plus_minus = 0.0;
  double t_diag = 0.0;
  double escape = 0.0;
  /// Set when escape < 0, i.e. the second-order expansion is out of range.
  bool outside_validity = false;
};

/// Second-order kicked-potential transition probabilities as closed forms in U0 and p.
TransitionProbabilities perturbative_transitions(double U0, double p);

/// Exact bound-to-continuum probability after an instantaneous kick
/// exp(-i U0 |e><e|) applied to a polariton with atom weight p:
/// 2 p (1 - cos U0) (1 - 2 p).
double delta_kick_escape(double U0, double p);

/// || H psi - E psi || over the given rows (all rows when `rows` is empty).
double eigen_residual(const SparseOperator& h, const State& psi, Complex energy,
                      const std::vector<int>& rows = {});

}  // namespace ccqed
