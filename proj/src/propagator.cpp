#include "ccqed/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ccqed/error.hpp"

namespace ccqed {

namespace {

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw Error(ErrorCode::Validation, "empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!std::isfinite(t_grid[i])) throw Error(ErrorCode::Validation, "non-finite time in grid");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw Error(ErrorCode::Validation, "time grid must be strictly increasing");
  }
}

void check_hermitian(const SparseOperator& h) {
  const double defect = h.hermitian_defect();
  if (defect > 1e-12 * std::max(1.0, h.norm_bound()))
    throw Error(ErrorCode::NotHermitian, "Hermiticity defect " + std::to_string(defect));
}

// Short-iterative Lanczos propagator. One Krylov space is built per step and
// reused for every output time that falls inside the accepted step.
class LanczosStepper {
 public:
  LanczosStepper(const SparseOperator& h, const EvolveOptions& options)
      : h_(h), options_(options), n_(h.dim()) {
    basis_.resize(n_, std::min(options.max_krylov, n_) + 1);
    guess_ = std::max(1e-3, (options.max_krylov / 4.0) / std::max(h.norm_bound(), 1e-12));
  }

  long substeps() const { return substeps_; }
  long matvecs() const { return matvecs_; }

  // Advances psi from t0 to t1 (t1 may be < t0), emitting each requested
  // output time in (t0, t1] (or [t1, t0) backwards) in order.
  template <typename Emit>
  void run(Amplitudes& psi, double t0, double t1, std::span<const double> outputs, Emit&& emit) {
    const double direction = t1 >= t0 ? 1.0 : -1.0;
    double t = t0;
    std::size_t next = 0;
    while (direction * (t1 - t) > 0.0) {
      if (++substeps_ > options_.max_substeps)
        throw Error(ErrorCode::ConvergenceFailure, "exceeded the Krylov sub-step cap");
      const double remaining = std::abs(t1 - t);
      double target = std::min(guess_, remaining);
      // Land exactly on t1 instead of leaving a sliver.
      if (remaining - target < 1e-9 * remaining) target = remaining;

      const double accepted = build(psi, target);
      const bool last = accepted == remaining;
      const double t_new = last ? t1 : t + direction * accepted;

      while (next < outputs.size() && direction * (outputs[next] - t_new) <= 0.0) {
        emit(next, outputs[next], evaluate(direction * (outputs[next] - t)));
        ++next;
      }
      psi = evaluate(direction * accepted);
      t = t_new;
      guess_ = (accepted == target && converged_early_) ? 2.0 * accepted : accepted;
      guess_ = std::max(guess_, 1e-12);
    }
  }

 private:
  // Builds the Krylov space of psi and returns the largest step <= target
  // whose a posteriori error estimate is below tolerance.
  double build(const Amplitudes& psi, double target) {
    size_ = 0;
    norm_ = psi.norm();
    converged_early_ = false;
    if (norm_ == 0.0) {
      alpha_.resize(0);
      return target;
    }
    basis_.col(0) = psi / norm_;
    size_ = 1;
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[j] couples q_j and q_{j+1}
    Amplitudes w(n_);
    Eigen::VectorXcd overlap;
    const int cap = std::min(options_.max_krylov, n_);
    for (int j = 0; j < cap; ++j) {
      h_.apply(basis_.col(j).data(), w.data());
      ++matvecs_;
      const double a = basis_.col(j).dot(w).real();
      alpha.push_back(a);
      w -= a * basis_.col(j);
      if (j > 0) w -= beta[j - 1] * basis_.col(j - 1);
      // Full reorthogonalization (classical Gram-Schmidt), repeated once when
      // the first pass cancels most of the vector.
      const auto q = basis_.leftCols(j + 1);
      for (int pass = 0; pass < 2; ++pass) {
        const double before = w.norm();
        overlap.noalias() = q.adjoint() * w;
        w.noalias() -= q * overlap;
        if (w.norm() > 0.7 * before) break;
      }
      const double b = w.norm();
      const int m = j + 1;
      const bool breakdown = b <= 1e-13 * std::max(1.0, std::abs(a));
      if (breakdown || m == cap || m >= 4) {
        set_tridiagonal(alpha, beta, m);
        if (breakdown) {
          converged_early_ = true;
          return target;
        }
        if (error_estimate(b, target) <= options_.accuracy_tol) {
          converged_early_ = m < cap;
          return target;
        }
        if (m == cap) {
          if (m == n_) return target;  // the Krylov space is the full space
          double step = target;
          for (int halving = 0; halving < 60; ++halving) {
            step *= 0.5;
            if (error_estimate(b, step) <= options_.accuracy_tol) return step;
          }
          throw Error(ErrorCode::ConvergenceFailure, "Krylov step could not reach the tolerance");
        }
      }
      beta.push_back(b);
      basis_.col(m) = w / b;
      size_ = m + 1;
    }
    return target;
  }

  void set_tridiagonal(const std::vector<double>& alpha, const std::vector<double>& beta, int m) {
    Eigen::VectorXd diag(m);
    Eigen::VectorXd sub(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) diag(i) = alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    theta_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
    alpha_ = diag;
  }

  // Coefficients of exp(-i T s) e_1 in the Krylov basis.
  Eigen::VectorXcd coefficients(double s) const {
    const int m = static_cast<int>(theta_.size());
    Eigen::VectorXcd c(m);
    for (int k = 0; k < m; ++k) c(k) = std::exp(Complex(0.0, -theta_(k) * s)) * vectors_(0, k);
    return vectors_.cast<Complex>() * c;
  }

  double error_estimate(double beta_next, double s) const {
    const auto c = coefficients(s);
    return norm_ * beta_next * std::abs(c(c.size() - 1));
  }

  Amplitudes evaluate(double s) const {
    if (size_ == 0) return Amplitudes::Zero(n_);
    const Eigen::VectorXcd c = norm_ * coefficients(s);
    return basis_.leftCols(c.size()) * c;
  }

  const SparseOperator& h_;
  EvolveOptions options_;
  int n_;
  Eigen::MatrixXcd basis_;  // Krylov vectors as columns
  int size_ = 0;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd theta_;
  Eigen::MatrixXd vectors_;
  double norm_ = 0.0;
  double guess_;
  bool converged_early_ = false;
  long substeps_ = 0;
  long matvecs_ = 0;
};

struct Recorder {
  Trajectory& traj;
  const EvolveOptions& options;
  const SampleObserver& observer;
  double initial_norm;

  void operator()(std::size_t index, double t, const Amplitudes& psi) {
    traj.times.push_back(t);
    traj.max_norm_deviation = std::max(traj.max_norm_deviation, std::abs(psi.norm() - initial_norm));
    if (options.store_states) traj.states.push_back(psi);
    if (observer) observer(index, t, psi);
  }
};

}  // namespace

std::vector<double> uniform_grid(double t0, double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= t0)) throw Error(ErrorCode::Validation, "invalid uniform grid");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((t_end - t0) / dt * (1.0 + 1e-12) + 1e-9));
  out.reserve(static_cast<std::size_t>(count) + 1);
  for (long i = 0; i <= count; ++i) out.push_back(t0 + static_cast<double>(i) * dt);
  return out;
}

Trajectory evolve_piecewise(std::span<const Segment> segments, const State& psi0, std::span<const double> t_grid,
                            const EvolveOptions& options, const SampleObserver& observer) {
  check_grid(t_grid);
  if (segments.empty()) throw Error(ErrorCode::Validation, "no Hamiltonian segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!segments[i].h || !segments[i].h->basis().same_space(*psi0.basis))
      throw Error(ErrorCode::BasisMismatch, "Hamiltonian and state live in different bases");
    if (i > 0 && !(segments[i].start > segments[i - 1].start))
      throw Error(ErrorCode::Validation, "segments must start at increasing times");
    check_hermitian(*segments[i].h);
  }

  Trajectory traj;
  traj.basis = psi0.basis;
  Recorder record{traj, options, observer, psi0.norm()};
  Amplitudes psi = psi0.amplitudes;
  record(0, t_grid[0], psi);

  double t = t_grid[0];
  std::size_t next = 1;
  const double t_final = t_grid.back();
  while (t < t_final) {
    // Active segment at time t (the first one applies before its start too).
    std::size_t s = 0;
    while (s + 1 < segments.size() && segments[s + 1].start <= t) ++s;
    const double seg_end = s + 1 < segments.size() ? std::min(segments[s + 1].start, t_final) : t_final;
    std::size_t last = next;
    while (last < t_grid.size() && t_grid[last] <= seg_end) ++last;
    LanczosStepper stepper(*segments[s].h, options);
    stepper.run(psi, t, seg_end, t_grid.subspan(next, last - next),
                [&](std::size_t i, double time, const Amplitudes& v) { record(next + i, time, v); });
    traj.substeps += stepper.substeps();
    traj.matvecs += stepper.matvecs();
    next = last;
    t = seg_end;
  }
  return traj;
}

Trajectory evolve(const SparseOperator& h, const State& psi0, std::span<const double> t_grid,
                  const EvolveOptions& options, const SampleObserver& observer) {
  const Segment only{-std::numeric_limits<double>::infinity(), &h};
  return evolve_piecewise(std::span<const Segment>(&only, 1), psi0, t_grid, options, observer);
}

Trajectory evolve_pulsed(const KickedHamiltonian& kicked, const State& psi0, std::span<const double> t_grid,
                         const EvolveOptions& options, const SampleObserver& observer) {
  kicked.pulse.validate();
  check_grid(t_grid);
  if (kicked.pulse.tau < t_grid.front() || kicked.pulse.end() > t_grid.back())
    throw Error(ErrorCode::Validation, "pulse window must lie inside the time grid");
  if (kicked.pulse.U0 == 0.0) return evolve(kicked.h0, psi0, t_grid, options, observer);
  const SparseOperator kicked_h = kicked.during_pulse();
  const Segment segments[] = {
      {-std::numeric_limits<double>::infinity(), &kicked.h0},
      {kicked.pulse.tau, &kicked_h},
      {kicked.pulse.end(), &kicked.h0},
  };
  return evolve_piecewise(segments, psi0, t_grid, options, observer);
}

Amplitudes propagate(const SparseOperator& h, const Amplitudes& psi, double dt, const EvolveOptions& options) {
  if (psi.size() != h.dim()) throw Error(ErrorCode::BasisMismatch, "state size differs from operator");
  check_hermitian(h);
  Amplitudes out = psi;
  LanczosStepper stepper(h, options);
  stepper.run(out, 0.0, dt, {}, [](std::size_t, double, const Amplitudes&) {});
  return out;
}

PulseConvergence converge_pulse_width(const KickedHamiltonian& kicked, const State& psi0,
                                      std::span<const double> t_grid, const EvolveOptions& options,
                                      double w_conv_tol, int max_halvings) {
  PulseConvergence out;
  KickedHamiltonian current = kicked;
  Eigen::VectorXd previous;
  EvolveOptions opts = options;
  for (int i = 0; i <= max_halvings; ++i) {
    Amplitudes last;
    Trajectory traj = evolve_pulsed(current, psi0, t_grid, opts,
                                    [&](std::size_t, double, const Amplitudes& psi) { last = psi; });
    Eigen::VectorXd density = last.cwiseAbs2();
    const double change = previous.size() ? (density - previous).cwiseAbs().maxCoeff() : 0.0;
    out.widths.push_back(current.pulse.width_w);
    out.max_density_change.push_back(change);
    out.width_w = current.pulse.width_w;
    out.trajectory = std::move(traj);
    if (previous.size() && change < w_conv_tol) {
      out.converged = true;
      break;
    }
    previous = std::move(density);
    current.pulse.width_w *= 0.5;
  }
  return out;
}

Trajectory full_diag_reference(const SparseOperator& h, const State& psi0, std::span<const double> t_grid,
                               int dense_cap) {
  check_grid(t_grid);
  if (h.dim() > dense_cap)
    throw Error(ErrorCode::DimTooLarge, "dimension " + std::to_string(h.dim()) + " exceeds dense cap");
  if (!h.basis().same_space(*psi0.basis)) throw Error(ErrorCode::BasisMismatch, "state and operator bases differ");
  check_hermitian(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.to_dense());
  const Eigen::VectorXd& energies = solver.eigenvalues();
  const Eigen::MatrixXcd& vectors = solver.eigenvectors();
  const Eigen::VectorXcd weights = vectors.adjoint() * psi0.amplitudes;

  Trajectory traj;
  traj.basis = psi0.basis;
  for (double t : t_grid) {
    Eigen::VectorXcd phased(weights.size());
    for (int k = 0; k < weights.size(); ++k)
      phased(k) = std::exp(Complex(0.0, -energies(k) * (t - t_grid[0]))) * weights(k);
    Amplitudes psi = vectors * phased;
    traj.max_norm_deviation = std::max(traj.max_norm_deviation, std::abs(psi.norm() - psi0.norm()));
    traj.times.push_back(t);
    traj.states.push_back(std::move(psi));
  }
  return traj;
}

}  // namespace ccqed
