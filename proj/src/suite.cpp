#include "ccqed/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>

#include "ccqed/analytic.hpp"
#include "ccqed/error.hpp"
#include "ccqed/model.hpp"
#include "ccqed/observables.hpp"
#include "ccqed/propagator.hpp"
#include "ccqed/scenario.hpp"

namespace ccqed {

namespace {

constexpr double kPi = std::numbers::pi;

ModelParams params_of(int n, double lambda, std::optional<double> u = std::nullopt) {
  ModelParams p;
  p.half_length_N = n;
  p.lambda = lambda;
  p.hubbard_U = u;
  return p;
}

/// Smallest N >= floor with exp(-beta N) below the truncation tolerance.
int converged_length(double lambda, int floor) {
  const double beta = solve_beta(lambda, 1.0);
  return std::max(floor, static_cast<int>(std::ceil(std::log(1e10) / beta)) + 1);
}

/// Deterministic dense test vector.
Amplitudes pattern(int dim) {
  Amplitudes v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(std::sin(1.3 * i + 0.2), std::cos(0.7 * i * i + 0.5));
  return v.normalized();
}

Eigen::VectorXd dense_spectrum(const SparseOperator& h) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h.to_dense().real()).eigenvalues();
}

class Runner {
 public:
  explicit Runner(const SuiteOptions& options) : options_(options) {}

  bool enabled(const std::string& module) const {
    return options_.modules.empty() ||
           std::find(options_.modules.begin(), options_.modules.end(), module) != options_.modules.end();
  }

  void upper(const std::string& module, const std::string& name, double threshold, const std::function<double()>& f) {
    run(module, name, threshold, true, f);
  }
  void lower(const std::string& module, const std::string& name, double threshold, const std::function<double()>& f) {
    run(module, name, threshold, false, f);
  }

  SuiteReport& report() { return report_; }

 private:
  void run(const std::string& module, const std::string& name, double threshold, bool upper_bound,
           const std::function<double()>& f) {
    if (!enabled(module)) return;
    SuiteCheck c{module, name, 0.0, threshold, upper_bound, false, {}};
    try {
      c.value = f();
      c.pass = std::isfinite(c.value) && (upper_bound ? c.value <= threshold : c.value >= threshold);
    } catch (const std::exception& e) {
      c.error = e.what();
      c.value = std::nan("");
    }
    report_.checks.push_back(std::move(c));
  }

  const SuiteOptions& options_;
  SuiteReport report_;
};

void model_checks(Runner& r) {
  r.upper("model-core", "basis_dimensions", 0.0, [] {
    const auto p = params_of(3, 1.0, 10.0);
    const int m = p.sites();
    double bad = 0.0;
    bad += enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin)->dim() != m + 1;
    bad += enumerate_basis(p, Sector::TwoExcitation, ModelKind::Spin)->dim() != m * (m + 1) / 2 + m;
    bad += enumerate_basis(p, Sector::TwoExcitation, ModelKind::Hubbard)->dim() != (m + 1) * (m + 2) / 2;
    return bad;
  });
  r.upper("model-core", "basis_index_roundtrip", 0.0, [] {
    const auto b = enumerate_basis(params_of(5, 1.0, 1.0), Sector::TwoExcitation, ModelKind::Hubbard);
    double bad = 0.0;
    for (int i = 0; i < b->dim(); ++i) bad += b->index_of(b->state(i)) != std::optional<int>(i);
    return bad;
  });
  r.upper("model-core", "hamiltonian_hermitian", 0.0, [] {
    double defect = 0.0;
    for (auto u : {std::optional<double>(), std::optional<double>(10.0)}) {
      const auto p = params_of(4, 2.0, u);
      const auto kind = u ? ModelKind::Hubbard : ModelKind::Spin;
      for (auto sector : {Sector::OneExcitation, Sector::TwoExcitation}) {
        const auto b = enumerate_basis(p, sector, sector == Sector::OneExcitation ? ModelKind::Spin : kind);
        defect = std::max(defect, build_hamiltonian(p, b).hermitian_defect());
      }
    }
    return defect;
  });
  r.upper("model-core", "spin_equals_constrained_hubbard", 1e-14, [] {
    const auto spin_p = params_of(4, 2.0);
    const auto hub_p = params_of(4, 2.0, 7.0);
    const auto sb = enumerate_basis(spin_p, Sector::TwoExcitation, ModelKind::Spin);
    const auto hb = enumerate_basis(hub_p, Sector::TwoExcitation, ModelKind::Hubbard);
    const SparseOperator hs = build_hamiltonian(spin_p, sb);
    const SparseOperator hh = build_hamiltonian(hub_p, hb);
    double diff = 0.0;
    for (int i = 0; i < sb->dim(); ++i)
      for (int j = 0; j < sb->dim(); ++j) {
        const int hi = *hb->index_of(sb->state(i));
        const int hj = *hb->index_of(sb->state(j));
        diff = std::max(diff, std::abs(hs.element(i, j) - hh.element(hi, hj)));
      }
    return diff;
  });
  r.upper("model-core", "parity_and_excitation_commute", 1e-12, [] {
    double worst = 0.0;
    for (auto u : {std::optional<double>(), std::optional<double>(3.0)}) {
      const auto p = params_of(4, 2.0, u);
      const auto b = enumerate_basis(p, Sector::TwoExcitation, u ? ModelKind::Hubbard : ModelKind::Spin);
      const SparseOperator h = build_hamiltonian(p, b);
      worst = std::max({worst, commutator_norm(h, parity_operator(b)), commutator_norm(h, total_excitation_operator(b))});
    }
    return worst;
  });
  r.upper("model-core", "out_of_band_eigenvalues", 1e-8, [] {
    const auto p = params_of(40, 2.0);
    const Eigen::VectorXd e = dense_spectrum(build_hamiltonian(p, enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin)));
    int outside = 0;
    for (int i = 0; i < e.size(); ++i) outside += std::abs(e(i)) > 2.0 * p.kappa;
    if (outside != 2) return 1.0;
    const auto [plus, minus] = bound_energies(p);
    return std::max(std::abs(e(0) - minus), std::abs(e(e.size() - 1) - plus));
  });
}

void analytic_checks(Runner& r) {
  for (double lambda : {0.5, 0.8, 2.0, 4.0}) {
    const std::string tag = "lambda=" + format_number(lambda);
    const auto p = params_of(converged_length(lambda, 40), lambda);
    r.upper("analytic-states", "bound_state_residual[" + tag + "]", 1e-8, [p] {
      const auto b = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
      const SparseOperator h = build_hamiltonian(p, b);
      const auto [plus, minus] = bound_energies(p);
      return std::max(eigen_residual(h, bound_state(p, Branch::Plus, b), plus),
                      eigen_residual(h, bound_state(p, Branch::Minus, b), minus));
    });
    r.upper("analytic-states", "bound_energy_vs_dense[" + tag + "]", 1e-8, [p] {
      const Eigen::VectorXd e =
          dense_spectrum(build_hamiltonian(p, enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin)));
      const auto [plus, minus] = bound_energies(p);
      return std::max(std::abs(e(0) - minus), std::abs(e(e.size() - 1) - plus));
    });
    r.upper("analytic-states", "beta_identities[" + tag + "]", 1e-12, [lambda] {
      const double beta = solve_beta(lambda, 1.0);
      const double x = lambda * lambda / 2.0;
      const double closed = 0.5 * std::log(std::sqrt(x * x + 1.0) + x);
      return std::max(std::abs(beta - closed), std::abs(coupling_squared_from_beta(beta, 1.0) - lambda * lambda) /
                                                   (lambda * lambda));
    });
  }
  r.upper("analytic-states", "scattering_interior_residual", 1e-10, [] {
    const auto p = params_of(40, 2.0);
    const auto b = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
    const SparseOperator h = build_hamiltonian(p, b);
    std::vector<int> rows;
    for (int i = 1; i < b->dim(); ++i)
      if (i != b->mode_of_site(p.half_length_N)) rows.push_back(i);
    double worst = 0.0;
    for (int j = 1; j <= 20; ++j) {
      const double k = kPi * j / 21.0;
      const State s = scattering_state(k, p, b);
      worst = std::max(worst, eigen_residual(h, s, -2.0 * p.kappa * std::cos(k), rows));
    }
    return worst;
  });
  r.upper("analytic-states", "bound_states_orthogonal", 1e-10, [] {
    const auto p = params_of(40, 2.0);
    const auto b = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
    return std::abs(inner(bound_state(p, Branch::Plus, b), bound_state(p, Branch::Minus, b)));
  });
  r.lower("analytic-states", "mutation_smoke_lambda_sign", 1e-3, [] {
    // Flipping the sign of the atom coupling must be caught by the residual check.
    const auto p = params_of(40, 2.0);
    const auto b = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
    std::vector<SparseOperator::Entry> entries = build_hamiltonian(p, b).entries();
    for (auto& e : entries)
      if (e.row == b->atom_mode() || e.col == b->atom_mode()) e.value = -e.value;
    const SparseOperator mutated(b, std::move(entries));
    return eigen_residual(mutated, bound_state(p, Branch::Minus, b), bound_energies(p).second);
  });
}

void propagator_checks(Runner& r) {
  r.upper("propagator", "krylov_vs_dense_two_excitation", 1e-9, [] {
    const auto p = params_of(12, 2.0);
    const auto b = enumerate_basis(p, Sector::TwoExcitation, ModelKind::Spin);
    const SparseOperator h = build_hamiltonian(p, b);
    const State psi0 = make_state(b, pattern(b->dim()));
    const auto grid = uniform_grid(0.0, 10.0, 1.0);
    const Trajectory a = evolve(h, psi0, grid);
    const Trajectory d = full_diag_reference(h, psi0, grid);
    double diff = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) diff = std::max(diff, (a.states[i] - d.states[i]).norm());
    return diff;
  });
  r.upper("propagator", "free_chain_bessel", 1e-9, [] {
    const auto p = params_of(60, 0.0);
    const auto b = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
    const SparseOperator h = build_hamiltonian(p, b);
    const double t = 10.0;
    const Amplitudes psi = propagate(h, basis_state(b, {b->mode_of_site(0)}).amplitudes, t);
    double diff = 0.0;
    for (int l = -p.half_length_N; l <= p.half_length_N; ++l) {
      const int n = std::abs(l);
      const Complex phase = std::pow(Complex(0.0, 1.0), n);
      diff = std::max(diff, std::abs(psi(b->mode_of_site(l)) - phase * std::cyl_bessel_j(double(n), 2.0 * t)));
    }
    return diff;
  });
  r.upper("propagator", "conservation_laws", 1e-9, [] {
    const auto p = params_of(10, 2.0, 5.0);
    const auto b = enumerate_basis(p, Sector::TwoExcitation, ModelKind::Hubbard);
    const SparseOperator h = build_hamiltonian(p, b);
    const SparseOperator parity = parity_operator(b);
    const State psi0 = make_state(b, pattern(b->dim()));
    const Complex e0 = h.expectation(psi0.amplitudes);
    const Complex p0 = parity.expectation(psi0.amplitudes);
    double worst = 0.0;
    evolve(h, psi0, uniform_grid(0.0, 20.0, 0.5), {}, [&](std::size_t, double, const Amplitudes& psi) {
      worst = std::max({worst, std::abs(psi.norm() - 1.0), std::abs(h.expectation(psi) - e0),
                        std::abs(parity.expectation(psi) - p0)});
    });
    return worst;
  });
  r.upper("propagator", "time_reversibility", 1e-9, [] {
    const auto p = params_of(10, 2.0);
    const auto b = enumerate_basis(p, Sector::TwoExcitation, ModelKind::Spin);
    const SparseOperator h = build_hamiltonian(p, b);
    const Amplitudes psi0 = pattern(b->dim());
    return (propagate(h, propagate(h, psi0, 7.5), -7.5) - psi0).norm();
  });
}

void observable_checks(Runner& r) {
  r.upper("observables", "density_sums", 1e-10, [] {
    double worst = 0.0;
    for (auto u : {std::optional<double>(), std::optional<double>(2.0)}) {
      const auto p = params_of(6, 1.0, u);
      for (auto sector : {Sector::OneExcitation, Sector::TwoExcitation}) {
        const auto b = enumerate_basis(p, sector, u && sector == Sector::TwoExcitation ? ModelKind::Hubbard : ModelKind::Spin);
        worst = std::max(worst, std::abs(photon_density(*b, pattern(b->dim())).sum() - b->excitations()));
      }
    }
    return worst;
  });
  r.upper("observables", "gamma_unperturbed_polariton", 1e-6, [] {
    const auto p = params_of(40, 2.0);
    const auto b = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
    const Trajectory t = evolve(build_hamiltonian(p, b), bound_state(p, Branch::Minus, b), uniform_grid(0.0, 30.0, 0.1));
    const double t_return = boundary_return_time(p.half_length_N, {}, 9, p.kappa);
    return std::abs(gamma_emission(p_res(t, 9), t.times.back(), t_return));
  });
  r.upper("observables", "compose_disjoint_marginals", 1e-10, [] {
    const auto p = params_of(8, 1.0);
    const auto one = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
    const auto two = enumerate_basis(p, Sector::TwoExcitation, ModelKind::Spin);
    Amplitudes u = Amplitudes::Zero(one->dim()), v = Amplitudes::Zero(one->dim());
    for (int l = 1; l <= 8; ++l) {
      u(one->mode_of_site(-l)) = Complex(std::cos(l), std::sin(2.0 * l));
      v(one->mode_of_site(l)) = Complex(1.0 / l, 0.3 * l);
    }
    u.normalize();
    v.normalize();
    const ComposeResult c = compose_two_excitation(make_state(one, u), make_state(one, v), two);
    const Eigen::VectorXd expected = u.cwiseAbs2() + v.cwiseAbs2();
    return (photon_density(c.state) - expected).cwiseAbs().maxCoeff();
  });
  r.upper("observables", "channel_reconstruction_matches_residual", 1e-8, [] {
    const auto p = params_of(10, 2.0);
    const auto b = enumerate_basis(p, Sector::TwoExcitation, ModelKind::Spin);
    const SingleParticleModes modes = single_particle_modes(p);
    const State s = make_state(b, pattern(b->dim()));
    const ChannelDecomposition d = channel_decomposition(s, modes);
    return std::abs(channel_reconstruction_error(s, modes, d) - d.residual_weight);
  });
  r.upper("observables", "energy_mismatch_band_gap", 1e-12, [] {
    const auto p = params_of(40, 2.0);
    const double beta = solve_beta(p.lambda, p.kappa);
    return std::abs(energy_mismatch(kPi / 2, kPi / 2, p) - (2.0 * std::cosh(beta) - 2.0));
  });
}

void scenario_checks(Runner& r, const SuiteOptions& options) {
  r.upper("scenarios-cli", "rerun_checksums_identical", 0.0, [&] {
    const Json cfg = {{"time", {{"t_max", 5.0}}}};
    RunOptions a{options.work_dir / "repro_a", std::nullopt, 1, false};
    RunOptions b{options.work_dir / "repro_b", std::nullopt, 1, false};
    const RunManifest ma = run_scenario("kicked_fig4", cfg, a);
    const RunManifest mb = run_scenario("kicked_fig4", cfg, b);
    double mismatches = ma.outputs.size() == mb.outputs.size() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < std::min(ma.outputs.size(), mb.outputs.size()); ++i)
      mismatches += ma.outputs[i].sha256 != mb.outputs[i].sha256;
    return mismatches;
  });
  r.upper("scenarios-cli", "worker_count_independence", 0.0, [&] {
    const Json cfg = {{"model", {{"half_length_N", 36}}},
                      {"packets", Json::array({{{"center_NA", -18}, {"momentum_k0", "pi/2"}, {"width_alpha", 0.5}}})},
                      {"k0_scan", {"0.5pi", "0.7pi", "0.9pi"}}};
    const RunManifest m1 = run_scenario("gamma_scan_fig6", cfg, {options.work_dir / "workers_1", std::nullopt, 1, false});
    const RunManifest m3 = run_scenario("gamma_scan_fig6", cfg, {options.work_dir / "workers_3", std::nullopt, 3, false});
    double mismatches = m1.outputs.size() == m3.outputs.size() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < std::min(m1.outputs.size(), m3.outputs.size()); ++i)
      mismatches += m1.outputs[i].sha256 != m3.outputs[i].sha256;
    return mismatches;
  });
  if (!options.include_slow) return;
  const auto train = std::make_shared<Json>();
  r.upper("observables", "witness_unidirectional_train", 1e-4, [&, train] {
    *train = run_scenario("photon_train", nullptr, {options.work_dir / "photon_train", std::nullopt, 1, false}).summary;
    return (*train)["variants"]["unidirectional"]["witness_trailing"].get<double>();
  });
  r.lower("observables", "witness_counter_propagating", 0.01, [train] {
    if (train->is_null()) throw Error(ErrorCode::Validation, "photon_train run unavailable");
    return (*train)["variants"]["counter"]["witness_trailing"].get<double>();
  });
}

}  // namespace

bool SuiteReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.pass; });
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j = {{"module", c.module},
                        {"name", c.name},
                        {"value", c.value},
                        {"threshold", c.threshold},
                        {"comparison", c.upper_bound ? "<=" : ">="},
                        {"pass", c.pass}};
    if (!c.error.empty()) j["error"] = c.error;
    items.push_back(j);
  }
  return {{"checks", items}, {"all_pass", all_pass()}, {"wall_time_s", wall_time_s}};
}

SuiteReport run_invariant_suite(const SuiteOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Runner r(options);
  model_checks(r);
  analytic_checks(r);
  propagator_checks(r);
  observable_checks(r);
  scenario_checks(r, options);
  SuiteReport report = std::move(r.report());
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace ccqed
