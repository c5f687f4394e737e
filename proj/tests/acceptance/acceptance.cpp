// Acceptance runner: one criterion per invocation, one final PASS/FAIL line.
//   acceptance <criterion> [out_dir]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "ccqed/analytic.hpp"
#include "ccqed/error.hpp"
#include "ccqed/model.hpp"
#include "ccqed/propagator.hpp"
#include "ccqed/scenario.hpp"

using namespace ccqed;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

class Criterion {
 public:
  explicit Criterion(std::string name) : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

  bool below(const std::string& what, double value, double bound) { return record(what, value, "<", bound, value < bound); }
  bool above(const std::string& what, double value, double bound) { return record(what, value, ">", bound, value > bound); }
  bool within(const std::string& what, double value, double target, double tol) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g +- %.3g", target, tol);
    return record(what, value, "in", buf, std::abs(value - target) <= tol);
  }
  void note(const std::string& text) { std::printf("  note  %s\n", text.c_str()); }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  int finish(double runtime_limit_s) {
    below("runtime_s", elapsed(), runtime_limit_s);
    std::printf("%s %s\n", ok_ ? "PASS" : "FAIL", name_.c_str());
    return ok_ ? 0 : 1;
  }

 private:
  bool record(const std::string& what, double value, const char* rel, const std::string& bound, bool pass) {
    std::printf("  %-4s  %-48s %.6g %s %s\n", pass ? "ok" : "FAIL", what.c_str(), value, rel, bound.c_str());
    ok_ = ok_ && pass;
    return pass;
  }
  bool record(const std::string& what, double value, const char* rel, double bound, bool pass) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", bound);
    return record(what, value, rel, buf, pass);
  }

  std::string name_;
  std::chrono::steady_clock::time_point start_;
  bool ok_ = true;
};

ModelParams params_of(int n, double lambda, std::optional<double> u = std::nullopt) {
  ModelParams p;
  p.half_length_N = n;
  p.lambda = lambda;
  p.hubbard_U = u;
  return p;
}

void conservation(Criterion& c, const RunManifest& m, const std::string& tag = "") {
  bool all = true;
  for (const auto& inv : m.invariants) all = all && inv.pass;
  c.above("conservation_invariants_green" + tag, all ? 1.0 : 0.0, 0.5);
}

RunManifest run(const std::string& id, const Json& overrides, const fs::path& dir, int threads = 1) {
  RunOptions opt;
  opt.out_dir = dir;
  opt.threads = threads;
  return run_scenario(id, overrides, opt);
}

int analytic(const fs::path&) {
  Criterion c("analytic_eigenstates");
  for (double lambda : {0.5, 0.8, 2.0, 4.0}) {
    const std::string tag = "[lambda=" + std::to_string(lambda).substr(0, 3) + "]";
    const ModelParams p = params_of(40, lambda);
    const auto b = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
    const SparseOperator h = build_hamiltonian(p, b);
    const auto [plus, minus] = bound_energies(p);
    // The edge tolerance is opened so the truncated profile is measured rather than rejected.
    const double residual = std::max(eigen_residual(h, bound_state(p, Branch::Plus, b, 1.0), plus),
                                     eigen_residual(h, bound_state(p, Branch::Minus, b, 1.0), minus));
    c.below("bound_state_residual" + tag, residual, 1e-8);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(h.to_dense().real(), Eigen::EigenvaluesOnly);
    const auto& e = dense.eigenvalues();
    c.below("energy_vs_dense" + tag, std::max(std::abs(e(0) - minus), std::abs(e(e.size() - 1) - plus)), 1e-8);

    const double beta = solve_beta(lambda, 1.0);
    const double x2 = lambda * lambda / 2.0;
    const double closed = 0.5 * std::log(std::sqrt(x2 * x2 + 1.0) + x2);
    c.below("beta_closed_form" + tag, std::abs(beta - closed), 1e-12);
    c.below("beta_lambda_squared_identity" + tag,
            std::abs(2.0 * std::sinh(2.0 * beta) - lambda * lambda) / (lambda * lambda), 1e-12);
  }
  return c.finish(10.0);
}

int perturbation(const fs::path& out) {
  Criterion c("perturbation_fig4");
  const RunManifest weak = run("kicked_fig4", Json::parse(R"({"pulse": {"U0": 0.1}})"), out / "kicked_u01");
  const Json& w = weak.summary;
  c.note("escape numeric " + std::to_string(w.at("escape_numeric").get<double>()) + ", formula " +
         std::to_string(w.at("escape_perturbative").get<double>()) + ", delta kick " +
         std::to_string(w.at("escape_delta_kick").get<double>()));
  c.below("escape_vs_formula_relative_error[U0=0.1]", w.at("escape_relative_error").get<double>(), 0.10);
  c.below("escape_vs_delta_kick_relative_error[U0=0.1]",
          std::abs(w.at("escape_numeric").get<double>() - w.at("escape_delta_kick").get<double>()) /
              w.at("escape_delta_kick").get<double>(),
          0.01);
  conservation(c, weak, "[U0=0.1]");

  const RunManifest strong = run("kicked_fig4", Json::object(), out / "kicked_u2");
  const Json& s = strong.summary;
  const double left = s.at("front_weight_left"), right = s.at("front_weight_right");
  c.above("front_weight_left[U0=2]", left, 0.01);
  c.above("front_weight_right[U0=2]", right, 0.01);
  c.below("front_asymmetry_max[U0=2]", s.at("front_asymmetry_max").get<double>(), 1e-10);
  c.above("central_shape_similarity[U0=2]", s.at("central_shape_similarity").get<double>(), 0.99);
  c.below("central_weight_ratio_reduced[U0=2]", s.at("central_weight_ratio").get<double>(), 1.0);
  c.above("central_weight_ratio_nonvanishing[U0=2]", s.at("central_weight_ratio").get<double>(), 0.5);
  conservation(c, strong, "[U0=2]");
  return c.finish(60.0);
}

int fig5(const fs::path& out) {
  Criterion c("collision_fig5");
  const RunManifest m = run("collision_fig5", Json::object(), out / "collision_fig5");
  const Json& v = m.summary.at("variants");
  c.below("gamma[U=0]", v.at("U0").at("gamma").get<double>(), 0.02);
  c.below("transmission_right[U=0]", v.at("U0").at("transmission_right").get<double>(), 0.02);
  c.below("max_density_difference[U=10 vs spin]", m.summary.at("max_density_difference").at("U10_vs_spin").get<double>(),
          0.05);
  c.above("gamma[spin]", v.at("spin").at("gamma").get<double>(), 0.1);
  conservation(c, m);
  return c.finish(300.0);
}

int fig6(const fs::path& out) {
  Criterion c("gamma_scan_fig6");
  const RunManifest m = run("gamma_scan_fig6", Json::object(), out / "gamma_scan_fig6", 4);
  const Json& s = m.summary;
  c.above("points", s.at("points").get<double>(), 19.5);
  c.within("gamma_max", s.at("gamma_max").get<double>(), 0.40, 0.05);
  c.within("k0_at_max_over_pi", s.at("k0_at_max_over_pi").get<double>(), 0.73, 0.05);
  conservation(c, m);
  return c.finish(1800.0);
}

int fig7(const fs::path& out) {
  Criterion c("longtime_fig7");
  const RunManifest m = run("longtime_fig7", Json::object(), out / "longtime_fig7", 2);
  for (const auto& r : m.summary.at("runs")) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "[k0=%.3gpi]", r.at("k0_over_pi").get<double>());
    c.below(std::string("initial_emission") + tag, std::abs(r.at("initial_emission").get<double>()), 1e-3);
    c.above(std::string("max_emission") + tag, r.at("max_emission").get<double>(), 0.05);
    c.above(std::string("trailing_mean") + tag, r.at("trailing_mean").get<double>(), 0.05);
    c.below(std::string("relative_drift") + tag, r.at("relative_drift").get<double>(), 0.10);
  }
  conservation(c, m);
  return c.finish(1800.0);
}

int fig8(const fs::path& out) {
  Criterion c("raman_fig8");
  const RunManifest m = run("raman_fig8", Json::object(), out / "raman_fig8");
  const Json& s = m.summary;
  c.above("witness_final", s.at("witness_final").get<double>(), 0.01);
  c.above("photons_outside_deficit", s.at("photons_outside_deficit").get<double>(), 0.01);
  c.below("c1_weight_initial", s.at("c1_weight_initial").get<double>(), 1e-6);
  c.above("c1_weight_final", s.at("c1_weight_final").get<double>(), 0.005);
  conservation(c, m);

  const RunManifest t = run("photon_train", Json::object(), out / "photon_train", 2);
  c.below("control_witness[unidirectional]",
          t.summary.at("variants").at("unidirectional").at("witness_trailing").get<double>(), 1e-4);
  c.above("witness[counter]", t.summary.at("variants").at("counter").at("witness_trailing").get<double>(), 0.01);
  conservation(c, t, "[train]");
  return c.finish(1800.0);
}

int propagator(const fs::path& out) {
  Criterion c("propagator_certification");
  {
    const auto p = params_of(12, 2.0);
    const auto b = enumerate_basis(p, Sector::TwoExcitation, ModelKind::Spin);
    const SparseOperator h = build_hamiltonian(p, b);
    Amplitudes v(b->dim());
    for (int i = 0; i < b->dim(); ++i) v(i) = Complex(std::cos(0.37 * i * i), std::sin(1.3 * i + 0.2));
    v.normalize();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> dense(h.to_dense());
    const Eigen::VectorXcd coeff = dense.eigenvectors().adjoint() * v;
    const auto grid = uniform_grid(0.0, 20.0, 0.5);
    const Trajectory t = evolve(h, make_state(b, v), grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Eigen::VectorXcd phase =
          (dense.eigenvalues().cast<Complex>() * Complex(0.0, -grid[i])).array().exp().matrix();
      const Eigen::VectorXcd ref = dense.eigenvectors() * phase.cwiseProduct(coeff).eval();
      worst = std::max(worst, (t.states[i] - ref).norm());
    }
    c.below("krylov_vs_dense[N=12 two excitations]", worst, 1e-9);
  }
  {
    const auto p = params_of(80, 0.0);
    const auto b = enumerate_basis(p, Sector::OneExcitation, ModelKind::Spin);
    const SparseOperator h = build_hamiltonian(p, b);
    double worst = 0.0;
    for (double t : {5.0, 15.0, 30.0}) {
      const Amplitudes psi = propagate(h, basis_state(b, {b->mode_of_site(0)}).amplitudes, t);
      for (int l = -80; l <= 80; ++l) {
        const int n = std::abs(l);
        worst = std::max(worst, std::abs(psi(b->mode_of_site(l)) -
                                         std::pow(Complex(0.0, 1.0), n) * std::cyl_bessel_j(double(n), 2.0 * t)));
      }
    }
    c.below("free_chain_bessel", worst, 1e-6);
  }
  // Conservation across the other acceptance runs (manifests under out).
  int manifests = 0, failed = 0;
  if (fs::exists(out))
    for (const auto& entry : fs::recursive_directory_iterator(out)) {
      if (entry.path().filename() != "manifest.json") continue;
      std::ifstream in(entry.path());
      const Json j = Json::parse(in);
      ++manifests;
      for (const auto& inv : j.at("invariants"))
        if (!inv.at("pass").get<bool>()) {
          ++failed;
          c.note("invariant failed: " + entry.path().string() + " " + inv.at("name").get<std::string>());
        }
    }
  if (manifests == 0) {
    c.note("no acceptance manifests found; running a short kicked scenario instead");
    const RunManifest m = run("kicked_fig4", Json::parse(R"({"time": {"t_max": 10.0}})"), out / "propagator_kicked");
    for (const auto& inv : m.invariants) failed += !inv.pass;
    manifests = 1;
  }
  c.note("manifests inspected: " + std::to_string(manifests));
  c.below("failed_invariants_over_acceptance_runs", failed, 0.5);
  return c.finish(120.0);
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<int(const fs::path&)>> criteria{
      {"analytic", analytic}, {"perturbation", perturbation}, {"fig5", fig5},           {"fig6", fig6},
      {"fig7", fig7},         {"fig8", fig8},                 {"propagator", propagator}};
  if (argc < 2 || !criteria.contains(argv[1])) {
    std::fprintf(stderr, "usage: acceptance <analytic|perturbation|fig5|fig6|fig7|fig8|propagator> [out_dir]\n");
    return 2;
  }
  const fs::path out = argc > 2 ? fs::path(argv[2]) : fs::path("acceptance_out");
  try {
    return criteria.at(argv[1])(out);
  } catch (const Error& e) {
    std::printf("  error %s: %s\nFAIL %s\n", std::string(to_string(e.code())).c_str(), e.what(), argv[1]);
  } catch (const std::exception& e) {
    std::printf("  error %s\nFAIL %s\n", e.what(), argv[1]);
  }
  return 1;
}
