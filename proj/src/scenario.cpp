#include "ccqed/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "ccqed/analytic.hpp"
#include "ccqed/error.hpp"
#include "ccqed/propagator.hpp"

#ifndef CCQED_VERSION
#define CCQED_VERSION "0.0.0"
#endif

namespace ccqed {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::Validation, what); }

Json packet_json(int center, const char* k0, double alpha = 0.3) {
  return {{"center_NA", center}, {"momentum_k0", k0}, {"width_alpha", alpha}};
}

Json base_config(const std::string& id) {
  return {
      {"scenario_id", id},
      {"model", {{"half_length_N", 100}, {"kappa", 1.0}, {"lambda", 2.0}, {"hubbard_U", "INFINITE"}}},
      {"initial_polariton", "minus"},
      {"packets", Json::array({packet_json(-40, "pi/2")})},
      {"time", {{"t_max", "auto"}, {"sample_dt", 0.5}, {"series_dt", 0.1}}},
      {"l0", 9},
      {"accuracy_tol", 1e-9},
      {"output", {{"format", "csv"}}},
  };
}

Json merge_checked(const Json& defaults, const Json& user, const std::string& path) {
  if (!user.is_object()) invalid((path.empty() ? std::string("config") : path) + " must be a JSON object");
  Json out = defaults;
  for (const auto& [key, value] : user.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!defaults.contains(key)) invalid("unknown key '" + where + "'");
    const Json& fallback = defaults.at(key);
    out[key] = fallback.is_object() && !fallback.empty() ? merge_checked(fallback, value, where) : value;
  }
  return out;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) invalid(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(where + " must be finite");
  return v;
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) invalid(where + " must be an integer");
  return j.get<int>();
}

double positive(const Json& j, const std::string& where) {
  const double v = number(j, where);
  if (!(v > 0.0)) invalid(where + " must be positive");
  return v;
}

std::optional<double> hubbard_value(const Json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "INFINITE") return std::nullopt;
    invalid(where + " must be a number or \"INFINITE\"");
  }
  return number(j, where);
}

void check_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) invalid(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) invalid("unknown key '" + where + "." + key + "'");
}

PacketSpec parse_packet(const Json& j, const std::string& where) {
  check_keys(j, {"center_NA", "momentum_k0", "width_alpha"}, where);
  if (!j.contains("center_NA") || !j.contains("momentum_k0")) invalid(where + " needs center_NA and momentum_k0");
  PacketSpec p;
  p.center_NA = integer(j.at("center_NA"), where + ".center_NA");
  p.momentum_k0 = parse_angle(j.at("momentum_k0"));
  if (!(std::abs(p.momentum_k0) < kPi)) invalid(where + ".momentum_k0 must lie in (-pi, pi)");
  if (j.contains("width_alpha")) p.width_alpha = positive(j.at("width_alpha"), where + ".width_alpha");
  return p;
}

std::vector<PacketSpec> parse_packets(const Json& j, const std::string& where) {
  if (!j.is_array()) invalid(where + " must be an array");
  std::vector<PacketSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_packet(j[i], where + "." + std::to_string(i)));
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_real(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    invalid("cannot parse number '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) invalid("cannot parse number '" + text + "'");
  return v;
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string k_label(double k) {
  std::ostringstream out;
  out << std::round(k / kPi * 1e4) / 1e4 << "pi";
  return out.str();
}

// ---------------------------------------------------------------------------

struct Initial {
  State state;
  std::vector<std::string> warnings;
};

Branch branch_of(InitialPolariton p) { return p == InitialPolariton::Plus ? Branch::Plus : Branch::Minus; }

Initial build_initial(const ModelParams& params, InitialPolariton polariton, const std::vector<PacketSpec>& packets) {
  Initial out;
  const BasisPtr one = enumerate_basis(params, Sector::OneExcitation, ModelKind::Spin);
  std::vector<State> parts;
  for (const auto& spec : packets) {
    PacketResult packet = gaussian_packet(spec, one);
    if (packet.edge_clipping)
      out.warnings.push_back("EDGE_CLIPPING: packet at N_A=" + std::to_string(spec.center_NA) +
                             " has edge amplitude " + format_number(packet.edge_amplitude));
    if (packet.poorly_separated)
      out.warnings.push_back("packet at N_A=" + std::to_string(spec.center_NA) + " is not well separated from e");
    parts.push_back(std::move(packet.state));
  }
  if (polariton != InitialPolariton::None) parts.push_back(bound_state(params, branch_of(polariton), one));
  if (parts.size() == 1) {
    out.state = std::move(parts.front());
    return out;
  }
  if (parts.size() != 2) invalid("the initial state needs one or two excitations, got " + std::to_string(parts.size()));
  const BasisPtr two =
      enumerate_basis(params, Sector::TwoExcitation, params.infinite_U() ? ModelKind::Spin : ModelKind::Hubbard);
  ComposeResult composed = compose_two_excitation(parts[0], parts[1], two);
  if (composed.lossy) out.warnings.push_back("LOSSY_COMPOSE: dropped weight " + format_number(composed.dropped_weight));
  out.state = std::move(composed.state);
  return out;
}

/// Everything recorded along one static evolution.
struct Sampled {
  DensitySeries density;
  std::vector<double> energy;
  double norm_deviation = 0.0;
  double excitation_deviation = 0.0;
  double energy_scale = 1.0;
  ObservableSeries c1{"c1_weight", {}, {}};
  ObservableSeries c2{"c2_weight", {}, {}};
  ObservableSeries residual{"residual_weight", {}, {}};
  ObservableSeries cross{"cross_weight", {}, {}};
  std::vector<Amplitudes> states;
  long matvecs = 0;
};

std::size_t stride_of(double coarse, double fine) {
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(coarse / fine)));
}

void record_sample(Sampled& s, const SparseOperator& h, const Basis& basis, double norm0, double t,
                   const Amplitudes& psi) {
  Eigen::VectorXd density = photon_density(basis, psi);
  const double n2 = psi.squaredNorm();
  s.norm_deviation = std::max(s.norm_deviation, std::abs(std::sqrt(n2) - norm0));
  s.excitation_deviation = std::max(s.excitation_deviation, std::abs(density.sum() - basis.excitations() * n2));
  s.energy.push_back(h.expectation(psi).real());
  s.density.times.push_back(t);
  s.density.rows.push_back(std::move(density));
}

Sampled sample_evolution(const SparseOperator& h, const State& psi0, const std::vector<double>& grid,
                         const ScenarioConfig& cfg, const SingleParticleModes* modes, bool keep_states = false) {
  Sampled s;
  s.density.half_length = psi0.basis->half_length();
  s.energy_scale = std::max(1.0, h.norm_bound());
  const double norm0 = psi0.norm();
  const std::size_t channel_stride = cfg.channel_dt > 0.0 ? stride_of(cfg.channel_dt, cfg.series_dt) : 0;
  EvolveOptions opts;
  opts.accuracy_tol = cfg.accuracy_tol;
  opts.store_states = false;
  const Basis& basis = *psi0.basis;
  Trajectory traj = evolve(h, psi0, grid, opts, [&](std::size_t i, double t, const Amplitudes& psi) {
    record_sample(s, h, basis, norm0, t, psi);
    if (keep_states) s.states.push_back(psi);
    if (modes && channel_stride && i % channel_stride == 0) {
      const ChannelDecomposition d = channel_decomposition(make_state(psi0.basis, psi), *modes);
      for (auto* series : {&s.c1, &s.c2, &s.residual, &s.cross}) series->times.push_back(t);
      s.c1.values.push_back(d.c1_weight);
      s.c2.values.push_back(d.c2_weight);
      s.residual.values.push_back(d.residual_weight);
      s.cross.values.push_back(d.cross_weight);
    }
  });
  s.norm_deviation = std::max(s.norm_deviation, traj.max_norm_deviation);
  s.matvecs = traj.matvecs;
  return s;
}

constexpr double kNormTol = 1e-8;
constexpr double kExcitationTol = 1e-10;
constexpr double kEnergyTol = 1e-8;

double energy_drift(const std::vector<double>& energy, std::size_t from, std::size_t to) {
  double drift = 0.0;
  for (std::size_t i = from; i < to && i < energy.size(); ++i) drift = std::max(drift, std::abs(energy[i] - energy[from]));
  return drift;
}

void add_check(RunManifest& m, const std::string& name, double value, double threshold) {
  m.invariants.push_back({name, value, threshold, value <= threshold});
}

/// `pulse` holds the sample range [first, second) affected by a pulse; energy
/// is compared separately before and after it.
void conservation_checks(RunManifest& m, const std::string& label, const Sampled& s,
                         std::optional<std::pair<std::size_t, std::size_t>> pulse = std::nullopt) {
  const std::string prefix = label.empty() ? "" : label + ".";
  add_check(m, prefix + "norm_conservation", s.norm_deviation, kNormTol);
  add_check(m, prefix + "excitation_conservation", s.excitation_deviation, kExcitationTol);
  double drift = 0.0;
  if (pulse) {
    drift = std::max(energy_drift(s.energy, 0, pulse->first), energy_drift(s.energy, pulse->second, s.energy.size()));
  } else {
    drift = energy_drift(s.energy, 0, s.energy.size());
  }
  add_check(m, prefix + "energy_conservation", drift / s.energy_scale, kEnergyTol);
}

void enforce_invariants(const RunManifest& m) {
  for (const auto& c : m.invariants)
    if (!c.pass)
      throw Error(ErrorCode::InvariantViolation,
                  c.name + " = " + format_number(c.value) + " exceeds " + format_number(c.threshold));
}

ObservableSeries column(const std::string& name, const DensitySeries& d, int index) {
  ObservableSeries out{name, d.times, {}};
  for (const auto& row : d.rows) out.values.push_back(row(index));
  return out;
}

ObservableSeries renamed(ObservableSeries s, std::string name) {
  s.name = std::move(name);
  return s;
}

double mean_over(const ObservableSeries& s, double from, double to) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < s.times.size(); ++i)
    if (s.times[i] >= from - 1e-12 && s.times[i] <= to + 1e-12) {
      sum += s.values[i];
      ++count;
    }
  return count ? sum / count : 0.0;
}

double max_value(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

double outside_weight(const Eigen::VectorXd& density, int half_length, int radius) {
  double w = 0.0;
  for (int l = -half_length; l <= half_length; ++l)
    if (std::abs(l) > radius) w += density(l + half_length);
  return w;
}

struct Context {
  const ScenarioConfig& cfg;
  const RunOptions& options;
  OutputSink& sink;
  RunManifest& manifest;
};

std::vector<double> time_grid(const ScenarioConfig& cfg, double t_max) { return uniform_grid(0.0, t_max, cfg.series_dt); }

double auto_t_max(const ScenarioConfig& cfg, const std::vector<PacketSpec>& packets) {
  return cfg.t_max.value_or(boundary_return_time(cfg.model.half_length_N, packets, cfg.l0, cfg.model.kappa));
}

// --- kicked_fig4 ------------------------------------------------------------

void run_kicked(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const ModelParams& params = cfg.model;
  const BasisPtr one = enumerate_basis(params, Sector::OneExcitation, ModelKind::Spin);
  const Branch branch = branch_of(cfg.polariton);
  const State psi0 = bound_state(params, branch, one);
  const State phi_minus = bound_state(params, Branch::Minus, one);
  const State phi_plus = bound_state(params, Branch::Plus, one);
  const KickedHamiltonian kicked = build_kicked_hamiltonian(params, *cfg.pulse, one);
  const auto grid = time_grid(cfg, *cfg.t_max);
  if (grid.back() <= cfg.pulse->end()) invalid("time.t_max must extend past the pulse");

  EvolveOptions opts;
  opts.accuracy_tol = cfg.accuracy_tol;
  PulseConvergence conv = converge_pulse_width(kicked, psi0, grid, opts, cfg.w_conv_tol);
  if (!conv.converged)
    throw Error(ErrorCode::ConvergenceFailure, "pulse width did not converge down to w = " + format_number(conv.width_w));

  Sampled s;
  s.density.half_length = params.half_length_N;
  s.energy_scale = std::max(1.0, kicked.h0.norm_bound());
  ObservableSeries survival{"bound_survival", {}, {}};
  std::size_t pulse_begin = 0, pulse_end = 0;
  for (std::size_t i = 0; i < conv.trajectory.times.size(); ++i) {
    const double t = conv.trajectory.times[i];
    const Amplitudes& psi = conv.trajectory.states[i];
    record_sample(s, kicked.h0, *one, psi0.norm(), t, psi);
    survival.times.push_back(t);
    survival.values.push_back(std::norm(phi_minus.amplitudes.dot(psi)) + std::norm(phi_plus.amplitudes.dot(psi)));
    if (t <= cfg.pulse->tau) pulse_begin = i + 1;
    if (t < cfg.pulse->end()) pulse_end = i + 1;
  }
  s.norm_deviation = conv.trajectory.max_norm_deviation;
  conservation_checks(ctx.manifest, "", s, std::pair{pulse_begin, pulse_end});

  const int n = params.half_length_N;
  const Eigen::VectorXd& first = s.density.rows.front();
  const Eigen::VectorXd& last = s.density.rows.back();
  double asymmetry = 0.0;
  for (int l = 1; l <= n; ++l) asymmetry = std::max(asymmetry, std::abs(last(n + l) - last(n - l)));
  const int front_radius = static_cast<int>(params.kappa * (grid.back() - cfg.pulse->end()));
  double front_left = 0.0, front_right = 0.0;
  for (int l = front_radius + 1; l <= n; ++l) {
    front_right += last(n + l) - first(n + l);
    front_left += last(n - l) - first(n - l);
  }
  // Central profile comparison in magnitude (sqrt P) over |l| <= l0 and e.
  Eigen::VectorXd a(2 * cfg.l0 + 2), b(2 * cfg.l0 + 2);
  for (int l = -cfg.l0; l <= cfg.l0; ++l) {
    a(l + cfg.l0) = std::sqrt(first(n + l));
    b(l + cfg.l0) = std::sqrt(last(n + l));
  }
  a(2 * cfg.l0 + 1) = std::sqrt(first(2 * n + 1));
  b(2 * cfg.l0 + 1) = std::sqrt(last(2 * n + 1));

  const double p = std::abs(overlap_p(params, branch, branch));
  const double escape = 1.0 - survival.values.back();
  const TransitionProbabilities pert = perturbative_transitions(cfg.pulse->U0, p);
  auto& sum = ctx.manifest.summary;
  sum["converged_width_w"] = conv.width_w;
  sum["convergence_widths"] = conv.widths;
  sum["convergence_max_density_change"] = conv.max_density_change;
  sum["atom_weight_p"] = p;
  sum["bound_survival"] = survival.values.back();
  sum["escape_numeric"] = escape;
  sum["escape_perturbative"] = pert.escape;
  sum["perturbative_outside_validity"] = pert.outside_validity;
  sum["escape_relative_error"] = pert.escape != 0.0 ? std::abs(escape - pert.escape) / std::abs(pert.escape) : 0.0;
  sum["escape_delta_kick"] = delta_kick_escape(cfg.pulse->U0, p);
  sum["t_plus_minus_perturbative"] = pert.t_plus_minus;
  sum["t_diag_perturbative"] = pert.t_diag;
  sum["front_radius"] = front_radius;
  sum["front_weight_left"] = front_left;
  sum["front_weight_right"] = front_right;
  sum["front_asymmetry_max"] = asymmetry;
  sum["central_shape_similarity"] = a.dot(b) / (a.norm() * b.norm());
  sum["central_weight_ratio"] = b.squaredNorm() / a.squaredNorm();
  sum["atom_ratio"] = last(2 * n + 1) / first(2 * n + 1);

  if (cfg.wants("density"))
    ctx.sink.write("density", density_document(s.density, cfg.format, stride_of(cfg.sample_dt, cfg.series_dt)));
  if (cfg.wants("series"))
    ctx.sink.write("series", series_document({column("atom", s.density, 2 * n + 1),
                                              renamed(p_res(s.density, cfg.l0), "p_res"), survival},
                                             cfg.format));
  if (cfg.wants("convergence")) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < conv.widths.size(); ++i) rows.push_back({conv.widths[i], conv.max_density_change[i]});
    ctx.sink.write("convergence", table_document({"width_w", "max_density_change"}, rows, cfg.format));
  }
}

// --- collision_fig5 ---------------------------------------------------------

struct VariantRun {
  std::string label;
  ModelParams params;
  Sampled sampled;
  std::vector<std::string> warnings;
};

ModelParams variant_params(const ScenarioConfig& cfg, const Variant& v) {
  ModelParams params = cfg.model;
  if (v.override_U) params.hubbard_U = v.hubbard_U;
  params.validate();
  return params;
}

void summarize_emission(Json& out, const ScenarioConfig& cfg, const Sampled& s, double t_window, double t_return) {
  const int n = s.density.half_length;
  const ObservableSeries pres = p_res(s.density, cfg.l0);
  const TransmissionSplit split = transmission_reflection(s.density.rows.back(), n, cfg.l0);
  out["gamma"] = gamma_emission(pres, t_window, t_return);
  out["t_window"] = t_window;
  out["t_boundary_return"] = t_return;
  out["p_res_initial"] = pres.values.front();
  out["transmission_right"] = split.right;
  out["reflection_left"] = split.left;
  out["photon_center"] = split.center;
  out["atom_final"] = s.density.rows.back()(2 * n + 1);
}

void run_collision(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double t_return = boundary_return_time(cfg.model.half_length_N, cfg.packets, cfg.l0, cfg.model.kappa);
  const auto grid = time_grid(cfg, auto_t_max(cfg, cfg.packets));
  std::vector<VariantRun> runs(cfg.variants.size());
  parallel_for(runs.size(), ctx.options.threads, [&](std::size_t i) {
    VariantRun& run = runs[i];
    run.label = cfg.variants[i].label;
    run.params = variant_params(cfg, cfg.variants[i]);
    Initial init = build_initial(run.params, cfg.polariton, cfg.packets);
    run.warnings = std::move(init.warnings);
    const SparseOperator h = build_hamiltonian(run.params, init.state.basis);
    const bool channels = cfg.wants("channels") && cfg.channel_dt > 0.0 && run.params.infinite_U() &&
                          init.state.basis->sector() == Sector::TwoExcitation;
    std::optional<SingleParticleModes> modes;
    if (channels) modes = single_particle_modes(run.params);
    run.sampled = sample_evolution(h, init.state, grid, cfg, modes ? &*modes : nullptr);
  });

  Json variants = Json::object();
  for (const auto& run : runs) {
    conservation_checks(ctx.manifest, run.label, run.sampled);
    for (const auto& w : run.warnings) ctx.manifest.warnings.push_back(run.label + ": " + w);
    Json item;
    item["hubbard_U"] = run.params.hubbard_U ? Json(*run.params.hubbard_U) : Json("INFINITE");
    summarize_emission(item, cfg, run.sampled, grid.back(), t_return);
    if (!run.sampled.c2.values.empty()) {
      item["c2_weight_initial"] = run.sampled.c2.values.front();
      item["c2_weight_max"] = max_value(run.sampled.c2.values);
      item["c2_weight_final"] = run.sampled.c2.values.back();
      item["c1_weight_initial"] = run.sampled.c1.values.front();
    }
    variants[run.label] = item;

    const int n = run.sampled.density.half_length;
    if (cfg.wants("density"))
      ctx.sink.write("density_" + run.label,
                     density_document(run.sampled.density, cfg.format, stride_of(cfg.sample_dt, cfg.series_dt)));
    if (cfg.wants("series"))
      ctx.sink.write("series_" + run.label,
                     series_document({renamed(p_res(run.sampled.density, cfg.l0), "p_res"),
                                      column("atom", run.sampled.density, 2 * n + 1)},
                                     cfg.format));
    if (cfg.wants("channels") && !run.sampled.c1.values.empty())
      ctx.sink.write("channels_" + run.label, series_document({run.sampled.c1, run.sampled.c2, run.sampled.residual,
                                                                run.sampled.cross},
                                                               cfg.format));
  }
  ctx.manifest.summary["variants"] = variants;
  Json diffs = Json::object();
  for (std::size_t a = 0; a < runs.size(); ++a)
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      double diff = 0.0;
      const auto& ra = runs[a].sampled.density.rows;
      const auto& rb = runs[b].sampled.density.rows;
      for (std::size_t i = 0; i < ra.size(); ++i) diff = std::max(diff, (ra[i] - rb[i]).cwiseAbs().maxCoeff());
      diffs[runs[a].label + "_vs_" + runs[b].label] = diff;
    }
  ctx.manifest.summary["max_density_difference"] = diffs;
}

// --- gamma_scan_fig6 --------------------------------------------------------

void run_gamma_scan(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double t_return = boundary_return_time(cfg.model.half_length_N, cfg.packets, cfg.l0, cfg.model.kappa);
  const auto grid = time_grid(cfg, auto_t_max(cfg, cfg.packets));
  struct Point {
    Json summary;
    Sampled sampled;
    std::vector<std::string> warnings;
  };
  std::vector<Point> points(cfg.k0_scan.size());
  parallel_for(points.size(), ctx.options.threads, [&](std::size_t i) {
    std::vector<PacketSpec> packets = cfg.packets;
    packets.front().momentum_k0 = cfg.k0_scan[i];
    Initial init = build_initial(cfg.model, cfg.polariton, packets);
    points[i].warnings = std::move(init.warnings);
    const SparseOperator h = build_hamiltonian(cfg.model, init.state.basis);
    points[i].sampled = sample_evolution(h, init.state, grid, cfg, nullptr);
    summarize_emission(points[i].summary, cfg, points[i].sampled, grid.back(), t_return);
  });

  std::vector<std::vector<double>> rows;
  std::vector<ObservableSeries> series;
  double best = -1.0, best_k = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double k0 = cfg.k0_scan[i];
    const std::string label = "k0=" + k_label(k0);
    conservation_checks(ctx.manifest, label, points[i].sampled);
    for (const auto& w : points[i].warnings) ctx.manifest.warnings.push_back(label + ": " + w);
    const double gamma = points[i].summary["gamma"];
    rows.push_back({k0 / kPi, k0, gamma, points[i].summary["transmission_right"], grid.back()});
    series.push_back(renamed(p_res(points[i].sampled.density, cfg.l0), "p_res_" + std::to_string(i)));
    if (gamma > best) {
      best = gamma;
      best_k = k0;
    }
  }
  auto& sum = ctx.manifest.summary;
  sum["points"] = points.size();
  sum["t_window"] = grid.back();
  sum["t_boundary_return"] = t_return;
  if (!points.empty()) {
    sum["gamma_max"] = best;
    sum["k0_at_max"] = best_k;
    sum["k0_at_max_over_pi"] = best_k / kPi;
  }
  if (cfg.wants("table"))
    ctx.sink.write("gamma_table",
                   table_document({"k0_over_pi", "k0", "gamma", "transmission_right", "t_window"}, rows, cfg.format));
  if (cfg.wants("series") && !series.empty()) ctx.sink.write("p_res_series", series_document(series, cfg.format));
}

// --- longtime_fig7 ----------------------------------------------------------

void run_longtime(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto grid = time_grid(cfg, *cfg.t_max);
  std::vector<Sampled> runs(cfg.k0_scan.size());
  std::vector<std::vector<std::string>> warnings(runs.size());
  parallel_for(runs.size(), ctx.options.threads, [&](std::size_t i) {
    std::vector<PacketSpec> packets = cfg.packets;
    packets.front().momentum_k0 = cfg.k0_scan[i];
    Initial init = build_initial(cfg.model, cfg.polariton, packets);
    warnings[i] = std::move(init.warnings);
    const SparseOperator h = build_hamiltonian(cfg.model, init.state.basis);
    runs[i] = sample_evolution(h, init.state, grid, cfg, nullptr);
  });

  Json items = Json::array();
  std::vector<ObservableSeries> series;
  const double t_end = grid.back();
  const double t_start = t_end * (1.0 - cfg.trailing_fraction);
  const double t_mid = 0.5 * (t_start + t_end);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string label = "k0=" + k_label(cfg.k0_scan[i]);
    conservation_checks(ctx.manifest, label, runs[i]);
    for (const auto& w : warnings[i]) ctx.manifest.warnings.push_back(label + ": " + w);
    ObservableSeries emission = p_res(runs[i].density, cfg.l0);
    for (double& v : emission.values) v = 1.0 - v;
    emission.name = "one_minus_p_res_" + std::to_string(i);
    const double mean = mean_over(emission, t_start, t_end);
    const double first_half = mean_over(emission, t_start, t_mid);
    const double second_half = mean_over(emission, t_mid, t_end);
    Json item;
    item["k0"] = cfg.k0_scan[i];
    item["k0_over_pi"] = cfg.k0_scan[i] / kPi;
    item["initial_emission"] = emission.values.front();
    item["max_emission"] = max_value(emission.values);
    item["trailing_mean"] = mean;
    item["trailing_first_half"] = first_half;
    item["trailing_second_half"] = second_half;
    item["relative_drift"] = mean != 0.0 ? std::abs(second_half - first_half) / std::abs(mean) : 0.0;
    items.push_back(item);
    series.push_back(std::move(emission));
    if (cfg.wants("density"))
      ctx.sink.write("density_" + std::to_string(i),
                     density_document(runs[i].density, cfg.format, stride_of(cfg.sample_dt, cfg.series_dt)));
  }
  ctx.manifest.summary["runs"] = items;
  ctx.manifest.summary["trailing_window"] = {t_start, t_end};
  if (cfg.wants("series") && !series.empty()) ctx.sink.write("emission_series", series_document(series, cfg.format));
  ctx.manifest.notes.push_back("chain length: half_length_N = " + std::to_string(cfg.model.half_length_N) + " (" +
                               std::to_string(cfg.model.sites()) +
                               " sites); set half_length_N = 120 for the half-length reading of L = 120");
}

// --- raman_fig8 and photon_train --------------------------------------------

void run_raman(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto grid = time_grid(cfg, auto_t_max(cfg, cfg.packets));
  Initial init = build_initial(cfg.model, cfg.polariton, cfg.packets);
  for (const auto& w : init.warnings) ctx.manifest.warnings.push_back(w);
  const SparseOperator h = build_hamiltonian(cfg.model, init.state.basis);
  std::optional<SingleParticleModes> modes;
  const bool channels = cfg.wants("channels") && cfg.channel_dt > 0.0 && cfg.model.infinite_U() &&
                        init.state.basis->sector() == Sector::TwoExcitation;
  if (channels) modes = single_particle_modes(cfg.model);
  const Sampled s = sample_evolution(h, init.state, grid, cfg, modes ? &*modes : nullptr);
  conservation_checks(ctx.manifest, "", s);

  const int n = s.density.half_length;
  const WitnessSeries witness = polariton_witness(s.density, cfg.trailing_window);
  const double photons_out0 = outside_weight(s.density.rows.front(), n, cfg.l0);
  const double photons_out1 = outside_weight(s.density.rows.back(), n, cfg.l0);
  auto& sum = ctx.manifest.summary;
  sum["t_final"] = grid.back();
  sum["witness_final"] = witness.trailing.values.back();
  sum["atom_final"] = witness.excitation.values.back();
  sum["atom_max"] = max_value(witness.excitation.values);
  sum["photons_outside_initial"] = photons_out0;
  sum["photons_outside_final"] = photons_out1;
  sum["photons_outside_deficit"] = photons_out0 - photons_out1;
  if (!s.c1.values.empty()) {
    sum["c1_weight_initial"] = s.c1.values.front();
    sum["c1_weight_max"] = max_value(s.c1.values);
    sum["c1_weight_final"] = s.c1.values.back();
    sum["c2_weight_initial"] = s.c2.values.front();
    sum["c2_weight_final"] = s.c2.values.back();
  }
  if (cfg.wants("density"))
    ctx.sink.write("density", density_document(s.density, cfg.format, stride_of(cfg.sample_dt, cfg.series_dt)));
  if (cfg.wants("series"))
    ctx.sink.write("series", series_document({renamed(witness.excitation, "atom"), renamed(witness.trailing, "witness"),
                                              renamed(p_res(s.density, cfg.l0), "p_res")},
                                             cfg.format));
  if (cfg.wants("channels") && !s.c1.values.empty())
    ctx.sink.write("channels", series_document({s.c1, s.c2, s.residual, s.cross}, cfg.format));
  ctx.manifest.notes.push_back("polariton witness = atom excitation probability P(e, t) and its trailing average");
}

void run_train(Context& ctx) {
  const auto& cfg = ctx.cfg;
  double t_max = std::numeric_limits<double>::infinity();
  for (const auto& v : cfg.variants) t_max = std::min(t_max, auto_t_max(cfg, v.packets));
  const auto grid = time_grid(cfg, t_max);
  std::vector<VariantRun> runs(cfg.variants.size());
  parallel_for(runs.size(), ctx.options.threads, [&](std::size_t i) {
    runs[i].label = cfg.variants[i].label;
    runs[i].params = variant_params(cfg, cfg.variants[i]);
    Initial init = build_initial(runs[i].params, cfg.polariton, cfg.variants[i].packets);
    runs[i].warnings = std::move(init.warnings);
    const SparseOperator h = build_hamiltonian(runs[i].params, init.state.basis);
    runs[i].sampled = sample_evolution(h, init.state, grid, cfg, nullptr);
  });
  const double t_end = grid.back();
  const double t_start = t_end * (1.0 - cfg.trailing_fraction);
  Json items = Json::object();
  std::vector<ObservableSeries> series;
  for (const auto& run : runs) {
    conservation_checks(ctx.manifest, run.label, run.sampled);
    for (const auto& w : run.warnings) ctx.manifest.warnings.push_back(run.label + ": " + w);
    const int n = run.sampled.density.half_length;
    ObservableSeries atom = column("atom_" + run.label, run.sampled.density, 2 * n + 1);
    Json item;
    item["witness_trailing"] = mean_over(atom, t_start, t_end);
    item["atom_max"] = max_value(atom.values);
    item["atom_final"] = atom.values.back();
    items[run.label] = item;
    series.push_back(std::move(atom));
    if (cfg.wants("density"))
      ctx.sink.write("density_" + run.label,
                     density_document(run.sampled.density, cfg.format, stride_of(cfg.sample_dt, cfg.series_dt)));
  }
  auto& sum = ctx.manifest.summary;
  sum["variants"] = items;
  sum["t_final"] = t_end;
  sum["trailing_window"] = {t_start, t_end};
  if (cfg.wants("series") && !series.empty()) ctx.sink.write("witness_series", series_document(series, cfg.format));
  ctx.manifest.notes.push_back("polariton witness = mean atom excitation over the trailing window");
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Json* locate(Json& doc, const std::string& axis) {
  Json* node = &doc;
  std::stringstream parts(axis);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        invalid("sweep axis '" + axis + "': '" + part + "' is not an array index");
      }
      if (idx >= node->size()) invalid("sweep axis '" + axis + "': index out of range");
      node = &(*node)[idx];
    } else if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else {
      invalid("sweep axis '" + axis + "' does not name a config field");
    }
  }
  return node;
}

void flatten_numbers(const Json& j, const std::string& prefix, std::map<std::string, double>& out) {
  if (j.is_number()) {
    out[prefix] = j.get<double>();
  } else if (j.is_object()) {
    for (const auto& [key, value] : j.items()) flatten_numbers(value, prefix.empty() ? key : prefix + "." + key, out);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

bool ScenarioConfig::wants(const std::string& observable) const {
  return std::find(observables.begin(), observables.end(), observable) != observables.end();
}

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids = {"kicked_fig4",   "collision_fig5", "gamma_scan_fig6",
                                               "longtime_fig7", "raman_fig8",     "photon_train"};
  return ids;
}

Json default_config(const std::string& id) {
  Json c = base_config(id);
  if (id == "kicked_fig4") {
    c["model"]["half_length_N"] = 160;
    c["model"]["lambda"] = 0.8;
    c["packets"] = Json::array();
    c["pulse"] = {{"U0", 2.0}, {"tau", 1.0}, {"width_w", 2e-5}};
    c["time"]["t_max"] = 40.0;
    c["w_conv_tol"] = 1e-6;
    c["observables"] = {"density", "series", "convergence"};
  } else if (id == "collision_fig5") {
    c["variants"] = Json::array({{{"label", "U0"}, {"hubbard_U", 0.0}},
                                 {{"label", "U10"}, {"hubbard_U", 10.0}},
                                 {{"label", "spin"}, {"hubbard_U", "INFINITE"}}});
    c["channel_dt"] = 2.0;
    c["observables"] = {"density", "series", "channels"};
  } else if (id == "gamma_scan_fig6") {
    Json scan = Json::array();
    for (int i = 0; i <= 26; ++i) scan.push_back((0.3 + 0.025 * i) * kPi);
    c["k0_scan"] = scan;
    c["observables"] = {"table", "series"};
  } else if (id == "longtime_fig7") {
    c["model"]["half_length_N"] = 60;
    c["packets"] = Json::array({packet_json(-30, "3pi/4")});
    c["k0_scan"] = {"pi/2", "3pi/4"};
    c["time"] = {{"t_max", 1000.0}, {"sample_dt", 5.0}, {"series_dt", 0.5}};
    c["trailing_fraction"] = 0.2;
    c["observables"] = {"density", "series"};
  } else if (id == "raman_fig8") {
    c["initial_polariton"] = "none";
    c["packets"] = Json::array({packet_json(-40, "pi/3"), packet_json(40, "-pi/3")});
    c["channel_dt"] = 2.0;
    c["trailing_window"] = 10.0;
    c["observables"] = {"density", "series", "channels"};
  } else if (id == "photon_train") {
    c["model"]["half_length_N"] = 200;
    c["initial_polariton"] = "none";
    c.erase("packets");
    c["time"]["sample_dt"] = 0.5;
    c["time"]["series_dt"] = 0.5;
    c["variants"] = Json::array(
        {{{"label", "unidirectional"}, {"packets", {packet_json(-40, "pi/3"), packet_json(-100, "pi/3")}}},
         {{"label", "counter"}, {"packets", {packet_json(-40, "pi/3"), packet_json(40, "-pi/3")}}}});
    c["trailing_fraction"] = 0.2;
    c["observables"] = {"density", "series"};
  } else {
    invalid("unknown scenario_id '" + id + "'");
  }
  return c;
}

Json resolve_config(const std::string& id, const Json& user) {
  const Json defaults = default_config(id);
  if (user.is_null()) return defaults;
  if (user.contains("scenario_id") && user.at("scenario_id") != id)
    invalid("config scenario_id " + user.at("scenario_id").dump() + " does not match '" + id + "'");
  Json resolved = merge_checked(defaults, user, "");
  parse_config(resolved);
  return resolved;
}

ScenarioConfig parse_config(const Json& doc) {
  ScenarioConfig c;
  if (!doc.contains("scenario_id") || !doc.at("scenario_id").is_string()) invalid("scenario_id missing");
  c.scenario_id = doc.at("scenario_id").get<std::string>();
  const Json defaults = default_config(c.scenario_id);
  for (const auto& [key, value] : doc.items())
    if (!defaults.contains(key)) invalid("unknown key '" + key + "'");
  for (const auto& [key, value] : defaults.items())
    if (!doc.contains(key)) invalid("missing key '" + key + "'");

  const Json& m = doc.at("model");
  check_keys(m, {"half_length_N", "kappa", "lambda", "hubbard_U"}, "model");
  c.model.half_length_N = integer(m.at("half_length_N"), "model.half_length_N");
  c.model.kappa = number(m.at("kappa"), "model.kappa");
  c.model.lambda = number(m.at("lambda"), "model.lambda");
  c.model.hubbard_U = hubbard_value(m.at("hubbard_U"), "model.hubbard_U");
  try {
    c.model.validate();
  } catch (const Error& e) {
    invalid(e.what());
  }

  const std::string pol = doc.at("initial_polariton").is_string() ? doc.at("initial_polariton").get<std::string>() : "";
  if (pol == "minus") c.polariton = InitialPolariton::Minus;
  else if (pol == "plus") c.polariton = InitialPolariton::Plus;
  else if (pol == "none") c.polariton = InitialPolariton::None;
  else invalid("initial_polariton must be one of minus|plus|none");

  if (doc.contains("packets")) c.packets = parse_packets(doc.at("packets"), "packets");
  for (const auto& p : c.packets)
    if (std::abs(p.center_NA) > c.model.half_length_N) invalid("packet center outside the chain");

  if (doc.contains("pulse")) {
    const Json& p = doc.at("pulse");
    check_keys(p, {"U0", "tau", "width_w"}, "pulse");
    PulseSpec pulse{number(p.at("U0"), "pulse.U0"), number(p.at("tau"), "pulse.tau"),
                    number(p.at("width_w"), "pulse.width_w")};
    try {
      pulse.validate();
    } catch (const Error& e) {
      invalid(e.what());
    }
    c.pulse = pulse;
  }

  const Json& t = doc.at("time");
  check_keys(t, {"t_max", "sample_dt", "series_dt"}, "time");
  if (t.at("t_max").is_string()) {
    if (t.at("t_max") != "auto") invalid("time.t_max must be a number or \"auto\"");
  } else {
    c.t_max = positive(t.at("t_max"), "time.t_max");
  }
  c.sample_dt = positive(t.at("sample_dt"), "time.sample_dt");
  c.series_dt = positive(t.at("series_dt"), "time.series_dt");
  const double ratio = c.sample_dt / c.series_dt;
  if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    invalid("time.sample_dt must be an integer multiple of time.series_dt");

  c.l0 = integer(doc.at("l0"), "l0");
  if (c.l0 < 0 || c.l0 >= c.model.half_length_N) invalid("l0 must lie in [0, N)");
  c.accuracy_tol = positive(doc.at("accuracy_tol"), "accuracy_tol");
  if (doc.contains("w_conv_tol")) c.w_conv_tol = positive(doc.at("w_conv_tol"), "w_conv_tol");
  if (doc.contains("channel_dt")) {
    c.channel_dt = number(doc.at("channel_dt"), "channel_dt");
    if (c.channel_dt < 0.0) invalid("channel_dt must be >= 0");
  }
  if (doc.contains("trailing_fraction")) {
    c.trailing_fraction = positive(doc.at("trailing_fraction"), "trailing_fraction");
    if (c.trailing_fraction > 1.0) invalid("trailing_fraction must be <= 1");
  }
  if (doc.contains("trailing_window")) c.trailing_window = positive(doc.at("trailing_window"), "trailing_window");
  if (doc.contains("k0_scan")) {
    if (!doc.at("k0_scan").is_array()) invalid("k0_scan must be an array");
    for (const auto& k : doc.at("k0_scan")) {
      const double v = parse_angle(k);
      if (!(std::abs(v) < kPi)) invalid("k0_scan entries must lie in (-pi, pi)");
      c.k0_scan.push_back(v);
    }
  }
  if (doc.contains("variants")) {
    const Json& vs = doc.at("variants");
    if (!vs.is_array()) invalid("variants must be an array");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string where = "variants." + std::to_string(i);
      check_keys(vs[i], {"label", "hubbard_U", "packets"}, where);
      Variant v;
      if (!vs[i].contains("label") || !vs[i].at("label").is_string()) invalid(where + ".label must be a string");
      v.label = vs[i].at("label").get<std::string>();
      if (v.label.empty() || v.label.find_first_of("/\\ .") != std::string::npos)
        invalid(where + ".label must be a plain file-name fragment");
      for (const auto& other : c.variants)
        if (other.label == v.label) invalid("duplicate variant label '" + v.label + "'");
      if (vs[i].contains("hubbard_U")) {
        v.override_U = true;
        v.hubbard_U = hubbard_value(vs[i].at("hubbard_U"), where + ".hubbard_U");
      }
      if (vs[i].contains("packets")) v.packets = parse_packets(vs[i].at("packets"), where + ".packets");
      c.variants.push_back(std::move(v));
    }
  }
  if (!doc.at("observables").is_array()) invalid("observables must be an array");
  for (const auto& o : doc.at("observables")) {
    if (!o.is_string()) invalid("observables entries must be strings");
    const auto name = o.get<std::string>();
    const auto& allowed = defaults.at("observables");
    if (std::find(allowed.begin(), allowed.end(), Json(name)) == allowed.end()) invalid("observable '" + name + "' is not produced by " + c.scenario_id);
    c.observables.push_back(name);
  }
  const Json& out = doc.at("output");
  check_keys(out, {"format"}, "output");
  if (!out.at("format").is_string()) invalid("output.format must be a string");
  c.format = parse_format(out.at("format").get<std::string>());

  // Scenario-specific requirements.
  const std::string& id = c.scenario_id;
  const auto return_time = [&](const std::vector<PacketSpec>& packets) {
    return boundary_return_time(c.model.half_length_N, packets, c.l0, c.model.kappa);
  };
  if (id == "kicked_fig4") {
    if (!c.t_max) invalid("kicked_fig4 needs an explicit time.t_max");
    if (c.polariton == InitialPolariton::None) invalid("kicked_fig4 starts from a polariton");
  } else if (id == "collision_fig5" || id == "gamma_scan_fig6") {
    if (c.packets.size() != 1) invalid(id + " needs exactly one packet");
    if (c.t_max && *c.t_max > return_time(c.packets) + 1e-12)
      invalid("time.t_max = " + format_number(*c.t_max) + " violates the emission window rule (boundary return at " +
              format_number(return_time(c.packets)) + ")");
    if (id == "collision_fig5" && c.variants.empty()) invalid("collision_fig5 needs at least one variant");
  } else if (id == "longtime_fig7") {
    if (c.packets.size() != 1) invalid(id + " needs exactly one packet");
    if (!c.t_max) invalid("longtime_fig7 needs an explicit time.t_max");
  } else if (id == "raman_fig8") {
    if (c.packets.empty()) invalid("raman_fig8 needs packets");
  } else if (id == "photon_train") {
    if (c.variants.empty()) invalid("photon_train needs at least one variant");
    for (const auto& v : c.variants)
      if (v.packets.empty()) invalid("photon_train variant '" + v.label + "' has no packets");
  }
  return c;
}

Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Validation, "cannot read config " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Validation, "config " + path.string() + " is not valid JSON: " + e.what());
  }
}

double parse_angle(const Json& value) {
  if (value.is_number()) {
    const double v = value.get<double>();
    if (!std::isfinite(v)) invalid("angle must be finite");
    return v;
  }
  if (!value.is_string()) invalid("angle must be a number or a string such as \"3pi/4\"");
  std::string text = trim(value.get<std::string>());
  const auto pos = text.find("pi");
  if (pos == std::string::npos) return parse_real(text);
  std::string coef = trim(text.substr(0, pos));
  std::string rest = trim(text.substr(pos + 2));
  if (!coef.empty() && coef.back() == '*') coef = trim(coef.substr(0, coef.size() - 1));
  double factor = coef.empty() ? 1.0 : coef == "-" ? -1.0 : parse_real(coef);
  if (!rest.empty()) {
    if (rest.front() != '/') invalid("cannot parse angle '" + text + "'");
    factor /= parse_real(trim(rest.substr(1)));
  }
  if (!std::isfinite(factor)) invalid("cannot parse angle '" + text + "'");
  return factor * kPi;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) invalid("empty entry in value list '" + text + "'");
    out.push_back(parse_angle(Json(item)));
  }
  return out;
}

Json RunManifest::to_json() const {
  Json j;
  j["scenario_id"] = scenario_id;
  j["code_version"] = code_version;
  j["config"] = config;
  j["wall_time_s"] = wall_time_s;
  j["deterministic"] = deterministic;
  Json checks = Json::array();
  bool all = true;
  for (const auto& c : invariants) {
    checks.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
    all = all && c.pass;
  }
  j["invariants"] = checks;
  j["all_invariants_pass"] = all;
  j["summary"] = summary;
  Json files = Json::array();
  for (const auto& o : outputs) files.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  j["outputs"] = files;
  j["notes"] = notes;
  j["warnings"] = warnings;
  return j;
}

std::string code_version() { return CCQED_VERSION; }

RunManifest run_scenario(const std::string& scenario_id, const Json& user_config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Json resolved = resolve_config(scenario_id, user_config);
  if (options.format) resolved["output"]["format"] = *options.format == OutputFormat::Csv ? "csv" : "json";
  const ScenarioConfig cfg = parse_config(resolved);

  RunManifest manifest;
  manifest.scenario_id = scenario_id;
  manifest.config = resolved;
  manifest.code_version = code_version();
  OutputSink sink(options.out_dir, cfg.format);
  Context ctx{cfg, options, sink, manifest};
  if (scenario_id == "kicked_fig4") run_kicked(ctx);
  else if (scenario_id == "collision_fig5") run_collision(ctx);
  else if (scenario_id == "gamma_scan_fig6") run_gamma_scan(ctx);
  else if (scenario_id == "longtime_fig7") run_longtime(ctx);
  else if (scenario_id == "raman_fig8") run_raman(ctx);
  else if (scenario_id == "photon_train") run_train(ctx);
  enforce_invariants(manifest);
  manifest.outputs = sink.records();
  manifest.wall_time_s = elapsed_since(start);
  if (options.write_manifest) write_atomic(options.out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

SweepResult sweep(const Json& config_template, const std::string& axis, const std::vector<double>& values,
                  const RunOptions& options) {
  if (!config_template.contains("scenario_id") || !config_template.at("scenario_id").is_string())
    invalid("sweep config needs a scenario_id");
  const std::string id = config_template.at("scenario_id").get<std::string>();
  const Json base = resolve_config(id, config_template);
  SweepResult result;
  result.axis = axis;
  result.values = values;
  {
    Json probe = base;
    locate(probe, axis);
  }

  std::vector<Json> configs;
  for (double v : values) {
    Json point = base;
    Json* target = locate(point, axis);
    *target = target->is_array() ? Json::array({v}) : Json(v);
    resolve_config(id, point);
    configs.push_back(std::move(point));
  }
  result.runs.resize(values.size());
  parallel_for(values.size(), options.threads, [&](std::size_t i) {
    RunOptions point_options = options;
    point_options.threads = 1;
    std::ostringstream dir;
    dir << "point_" << std::setw(3) << std::setfill('0') << i;
    point_options.out_dir = options.out_dir / dir.str();
    result.runs[i] = run_scenario(id, configs[i], point_options);
  });

  std::vector<std::map<std::string, double>> flat(values.size());
  std::set<std::string> keys;
  for (std::size_t i = 0; i < values.size(); ++i) {
    flatten_numbers(result.runs[i].summary, "", flat[i]);
    for (const auto& [k, v] : flat[i]) keys.insert(k);
  }
  result.columns = {axis};
  result.columns.insert(result.columns.end(), keys.begin(), keys.end());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::vector<double> row{values[i]};
    for (const auto& k : keys) row.push_back(flat[i].count(k) ? flat[i][k] : std::nan(""));
    result.table.push_back(std::move(row));
  }
  const OutputFormat format = options.format.value_or(parse_format(base.at("output").at("format").get<std::string>()));
  write_atomic(options.out_dir / ("sweep" + extension(format)), table_document(result.columns, result.table, format));
  Json manifests = Json::array();
  for (const auto& run : result.runs) manifests.push_back(run.to_json());
  write_atomic(options.out_dir / "sweep_manifest.json",
               Json{{"axis", axis}, {"values", values}, {"runs", manifests}}.dump(2) + "\n");
  return result;
}

}  // namespace ccqed
