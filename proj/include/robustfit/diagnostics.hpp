#pragma once

// Read-only checks of solver traces against the convergence theory, plus
// brute-force oracles for tiny problems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "robustfit/baselines.hpp"
#include "robustfit/error.hpp"
#include "robustfit/linalg.hpp"
#include "robustfit/random.hpp"
#include "robustfit/sarm.hpp"
#include "robustfit/simgen.hpp"
#include "robustfit/tssarm.hpp"

namespace robustfit {

inline constexpr double kDescentSlack = 1e-10;
inline constexpr double kZStepSlack = 1e-9;

struct TheoryReport {
  std::size_t fits_checked = 0;
  std::size_t descent_violations = 0;
  std::size_t zstep_bound_violations = 0;
  double max_fd_gradient_error = 0.0;
  double tail_convergence_ratio = 0.0;  // mean over fits long enough to measure
  double prox_oracle_max_gap = 0.0;     // max of H(prox) - H(oracle minimizer)
  double prox_argmin_max_gap = 0.0;     // max |prox - oracle argmin|
  double subgradient_constant = 0.0;  // max ||grad^{k+1}|| / ||[dw; dz]|| seen
};

inline void to_json(nlohmann::json& j, const TheoryReport& r) {
  j = nlohmann::json{{"fits_checked", r.fits_checked},
                     {"descent_violations", r.descent_violations},
                     {"zstep_bound_violations", r.zstep_bound_violations},
                     {"max_fd_gradient_error", r.max_fd_gradient_error},
                     {"tail_convergence_ratio", r.tail_convergence_ratio},
                     {"prox_oracle_max_gap", r.prox_oracle_max_gap},
                     {"prox_argmin_max_gap", r.prox_argmin_max_gap},
                     {"subgradient_constant", r.subgradient_constant}};
}

/// Steps with H^{k+1} > H^k + 1e-10, the first step measured from the initial objective.
inline std::size_t check_descent(const SolveTrace& trace) {
  std::size_t violations = 0;
  double prev = trace.initial_objective;
  for (double h : trace.objective_values) {
    if (h > prev + kDescentSlack) ++violations;
    prev = h;
  }
  return violations;
}

/// Steps k >= 1 with ||dz|| > 2 ||dw|| + 1e-9 (unit-norm preconditioned design).
/// Step 0 leaves the initialization, which need not be a prox image.
inline std::size_t check_zstep_bound(const SolveTrace& trace) {
  std::size_t violations = 0;
  for (std::size_t k = 1; k < trace.z_step_norms.size(); ++k)
    if (trace.z_step_norms[k] > 2.0 * trace.w_step_norms[k] + kZStepSlack) ++violations;
  return violations;
}

/// Same bound over explicit iterate histories, every consecutive pair checked.
inline std::size_t check_zstep_bound(std::span<const Vector> w_iterates, std::span<const Vector> z_iterates,
                                     double design_norm = 1.0) {
  if (w_iterates.size() != z_iterates.size())
    throw Error(ErrorCode::ShapeMismatch, "check_zstep_bound: iterate histories differ in length");
  std::size_t violations = 0;
  for (std::size_t k = 0; k + 1 < w_iterates.size(); ++k) {
    const double dw = distance2(w_iterates[k + 1].span(), w_iterates[k].span());
    const double dz = distance2(z_iterates[k + 1].span(), z_iterates[k].span());
    if (dz > 2.0 * design_norm * dw + kZStepSlack) ++violations;
  }
  return violations;
}

/// Linear-rate estimate: geometric mean of successive decrement ratios
/// (H^{k+1} - H^{k+2}) / (H^k - H^{k+1}) over the final third of the trace.
/// Returns 0 when the window holds a non-positive decrement.
inline double tail_ratio(const SolveTrace& trace) {
  if (trace.size() < 20) throw Error(ErrorCode::TooShort, "tail_ratio needs at least 20 iterations");
  std::vector<double> h;
  h.reserve(trace.size() + 1);
  h.push_back(trace.initial_objective);
  h.insert(h.end(), trace.objective_values.begin(), trace.objective_values.end());
  const std::size_t count = h.size() - 1;  // decrements
  const std::size_t first = count - count / 3;
  const std::size_t last = count - 1;
  const double d_first = h[first] - h[first + 1];
  const double d_last = h[last] - h[last + 1];
  if (!(d_first > 0.0) || !(d_last > 0.0) || last == first) return 0.0;
  return std::pow(d_last / d_first, 1.0 / static_cast<double>(last - first));
}

/// Largest ||grad_w H(w^{k+1}, z^{k+1})|| / ||[w^{k+1} - w^k; z^{k+1} - z^k]|| in a trace.
inline double subgradient_ratio(const SolveTrace& trace) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const double step = std::hypot(trace.w_step_norms[k], trace.z_step_norms[k]);
    if (step > 0.0) worst = std::max(worst, trace.grad_norms[k + 1] / step);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Oracles

/// Numerical minimizer of g(z) = 1/2 (r - z)^2 + delta |z| / S(r): a grid scan
/// over [-3|r| - 1, 3|r| + 1] followed by golden-section refinement around the
/// best grid point (g is convex in z).
struct ScalarMin {
  double argmin = 0.0;
  double value = 0.0;
  double grid_value = 0.0;  // best value on the raw grid
};

inline ScalarMin prox_oracle(double r, double delta, std::size_t grid_points = 10000) {
  const double weight = delta / smooth_s(r, delta);
  auto g = [&](double z) { return 0.5 * (r - z) * (r - z) + weight * std::abs(z); };
  const double half = 3.0 * std::abs(r) + 1.0;
  const double step = 2.0 * half / static_cast<double>(grid_points - 1);
  double best_z = -half;
  double best = g(best_z);
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double z = -half + step * static_cast<double>(i);
    const double v = g(z);
    if (v < best) {
      best = v;
      best_z = z;
    }
  }
  // Zero is a kink of g and a frequent minimizer; include it exactly.
  if (g(0.0) <= best) {
    best = g(0.0);
    best_z = 0.0;
  }
  ScalarMin out{best_z, best, best};
  double lo = best_z - step;
  double hi = best_z + step;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo);
  double b = lo + phi * (hi - lo);
  double ga = g(a), gb = g(b);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(best_z)); ++it) {
    if (ga < gb) {
      hi = b;
      b = a;
      gb = ga;
      a = hi - phi * (hi - lo);
      ga = g(a);
    } else {
      lo = a;
      a = b;
      ga = gb;
      b = lo + phi * (hi - lo);
      gb = g(b);
    }
  }
  const double refined = 0.5 * (lo + hi);
  if (g(refined) < out.value) {
    out.argmin = refined;
    out.value = g(refined);
  }
  return out;
}

/// max_j |g_fd_j - g_j| / max(||g||_inf, 1) with central differences of step h.
inline double fd_gradient_error(const Matrix& Xp, const Vector& y, const Vector& w, const Vector& z, double delta,
                                double h = 1e-6) {
  const Vector g = grad_w(Xp, y, w, z, delta);
  double worst = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    Vector plus = w, minus = w;
    plus[j] += h;
    minus[j] -= h;
    const double fd = (objective(Xp, y, plus, z, delta) - objective(Xp, y, minus, z, delta)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[j]));
  }
  return worst / std::max(max_abs(g.span()), 1.0);
}

struct SmallFit {
  Vector w;
  Vector z;
  double objective = 0.0;
};

/// Exhaustive grid over w in [-R, R]^n, R = 5 ||OLS||_inf (at least 1), with z
/// set to its exact minimizer for each w. Only for n <= 2, m <= 8.
inline SmallFit brute_force_small_fit(const Matrix& X, const Vector& y, double delta, std::size_t grid_points) {
  const std::size_t n = X.cols();
  const std::size_t m = X.rows();
  if (n == 0 || n > 2 || m > 8) throw Error(ErrorCode::InvalidConfig, "brute_force_small_fit: needs n <= 2, m <= 8");
  if (grid_points < 2) throw Error(ErrorCode::InvalidConfig, "brute_force_small_fit: grid_points < 2");
  const double radius = std::max(5.0 * max_abs(fit_ols(X, y).span()), 1.0);
  const double step = 2.0 * radius / static_cast<double>(grid_points - 1);

  SmallFit best{Vector(n), Vector(m), std::numeric_limits<double>::infinity()};
  Vector w(n), z(m);
  const std::size_t outer = n == 2 ? grid_points : 1;
  for (std::size_t a = 0; a < grid_points; ++a) {
    for (std::size_t b = 0; b < outer; ++b) {
      w[0] = -radius + step * static_cast<double>(a);
      if (n == 2) w[1] = -radius + step * static_cast<double>(b);
      double h = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double fitted = 0.0;
        for (std::size_t j = 0; j < n; ++j) fitted += X(i, j) * w[j];
        const double r = y[i] - fitted;
        const double zi = prox_oracle(r, delta, 64).argmin;
        z[i] = zi;
        h += 0.5 * (r - zi) * (r - zi) + delta * std::abs(zi) / smooth_s(r, delta);
      }
      if (h < best.objective) best = {w, z, h};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Sweep

struct VerifyOptions {
  SimType type = SimType::T1;
  std::size_t n = 64;
  double p = 0.3;
  std::size_t seeds = 50;
  std::uint64_t base_seed = 0;
  double delta_factor = 6.0;
  std::size_t prox_samples = 10000;
  std::size_t fd_instances = 100;
};

/// SARM and TSSARM fits over `seeds` simulated instances plus randomized prox
/// and gradient checks, folded into one report.
inline TheoryReport verify_sweep(const VerifyOptions& opt) {
  TheoryReport report;
  double tail_sum = 0.0;
  std::size_t tail_count = 0;
  for (std::size_t s = 0; s < opt.seeds; ++s) {
    SimSpec spec;
    spec.type = opt.type;
    spec.m = default_rows(opt.type);
    spec.n = opt.n;
    spec.p = opt.p;
    if (opt.type == SimType::T5) spec.kappa = 16.0;
    spec.seed = opt.base_seed + s;
    const SimInstance inst = generate(spec);
    SarmConfig cfg;
    cfg.delta = opt.delta_factor * inst.sigma * inst.sigma;
    cfg.record_trace = true;
    const RegressionFit fits[2] = {sarm_fit(inst.X, inst.y, cfg),
                                   tssarm_fit(inst.X, inst.y, TssarmConfig::with_defaults(cfg))};
    for (const auto& fit : fits) {
      const SolveTrace& trace = *fit.trace;
      ++report.fits_checked;
      report.descent_violations += check_descent(trace);
      report.zstep_bound_violations += check_zstep_bound(trace);
      report.subgradient_constant = std::max(report.subgradient_constant, subgradient_ratio(trace));
      if (trace.size() >= 20) {
        tail_sum += tail_ratio(trace);
        ++tail_count;
      }
    }
  }
  report.tail_convergence_ratio = tail_count ? tail_sum / static_cast<double>(tail_count) : 0.0;

  Rng rng(opt.base_seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < opt.prox_samples; ++i) {
    const double delta = rng.uniform(0.01, 10.0);
    const double r = rng.normal(0.0, 3.0 * std::sqrt(delta));
    const ScalarMin best = prox_oracle(r, delta);
    const double z = prox_z(r, delta);
    const double value = 0.5 * (r - z) * (r - z) + delta * std::abs(z) / smooth_s(r, delta);
    report.prox_oracle_max_gap = std::max(report.prox_oracle_max_gap, value - best.value);
    report.prox_argmin_max_gap = std::max(report.prox_argmin_max_gap, std::abs(z - best.argmin));
  }

  for (std::size_t i = 0; i < opt.fd_instances; ++i) {
    const std::size_t n = 1 + rng.below(8);
    const std::size_t m = n + 1 + rng.below(50 - n);
    std::vector<double> xs(m * n);
    for (auto& x : xs) x = rng.normal();
    const Matrix X(m, n, std::move(xs));
    Vector y(m), w(n), z(m);
    for (std::size_t k = 0; k < m; ++k) y[k] = 3.0 * rng.normal();
    for (std::size_t k = 0; k < n; ++k) w[k] = rng.normal();
    for (std::size_t k = 0; k < m; ++k) z[k] = rng.uniform() < 0.5 ? 0.0 : 2.0 * rng.normal();
    const double delta = rng.uniform(0.1, 5.0);
    report.max_fd_gradient_error = std::max(report.max_fd_gradient_error, fd_gradient_error(X, y, w, z, delta));
  }
  return report;
}

}  // namespace robustfit
