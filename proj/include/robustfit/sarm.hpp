#pragma once

// Self-scaled approximate l0 regression (SARM).
//
// Minimizes  H(w, z) = 1/2 ||y - Xw - z||^2 + delta * sum_i |z_i| / S(y_i - x_i^T w)
// by alternating one gradient step in w with an exact proximal step in z, on a
// design preconditioned to orthonormal columns.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robustfit/error.hpp"
#include "robustfit/linalg.hpp"

namespace robustfit {

struct SarmConfig {
  double delta = 1.0;
  double alpha = 1.0;
  double tol = 1e-6;
  std::size_t max_iter = 10000;
  bool record_trace = false;

  void validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw Error(ErrorCode::InvalidConfig, "delta must be > 0");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0, 2]");
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "tol must be > 0");
    if (max_iter < 1) throw Error(ErrorCode::InvalidConfig, "max_iter must be >= 1");
  }
};

/// Per-iteration diagnostics. Entry k describes the step from iterate k to k+1;
/// grad_norms[k] is ||grad_w H|| at iterate k (the gradient that drove the step).
struct SolveTrace {
  double initial_objective = 0.0;
  std::vector<double> objective_values;
  std::vector<double> w_step_norms;
  std::vector<double> z_step_norms;
  std::vector<double> grad_norms;

  std::size_t size() const noexcept { return objective_values.size(); }
};

struct TwoStageInfo {
  std::size_t rank = 0;  // q
  std::size_t stage1_iterations = 0;
  bool stage1_converged = false;
};

struct RegressionFit {
  Vector w_hat;
  Vector z_hat;
  std::size_t iterations = 0;
  bool converged = false;
  std::optional<SolveTrace> trace;
  double wall_time = 0.0;  // seconds, whole fit
  double loop_time = 0.0;  // seconds spent in the iteration loop(s)
  std::optional<TwoStageInfo> two_stage;
};

// ---------------------------------------------------------------------------
// Scalar functions

/// Quadratic-capped |x|: x^2/(2 sqrt(delta)) + sqrt(delta)/2 inside (-sqrt(delta), sqrt(delta)).
inline double smooth_s(double x, double delta) {
  const double root = std::sqrt(delta);
  const double ax = std::abs(x);
  return ax < root ? x * x / (2.0 * root) + 0.5 * root : ax;
}

inline double smooth_s_derivative(double x, double delta) {
  const double root = std::sqrt(delta);
  if (std::abs(x) < root) return x / root;
  return x > 0 ? 1.0 : -1.0;
}

/// argmin_z 1/2 (r - z)^2 + delta |z| / S(r).
inline double prox_z(double r, double delta) {
  if (std::abs(r) <= std::sqrt(delta)) return 0.0;
  return r - delta / r;
}

/// The map residual -> z used by the z-step; 2-Lipschitz and |T/S| <= 1.
inline double t_fn(double x, double delta) {
  if (std::abs(x) <= std::sqrt(delta)) return 0.0;
  return x - delta / x;
}

/// S'(x) / S(x)^2
inline double gamma_fn(double x, double delta) {
  const double root = std::sqrt(delta);
  if (std::abs(x) < root) {
    const double q = x * x + delta;
    return 4.0 * root * x / (q * q);
  }
  return (x > 0 ? 1.0 : -1.0) / (x * x);
}

/// S'(x) / S(x)
inline double kappa_fn(double x, double delta) {
  if (std::abs(x) < std::sqrt(delta)) return 2.0 * x / (x * x + delta);
  return 1.0 / x;
}

// ---------------------------------------------------------------------------
// Preconditioning and the objective

struct Preconditioned {
  Matrix design;  // X L^{-1}, orthonormal columns
  Matrix factor;  // L, upper triangular, L^T L = X^T X
};

inline Preconditioned precondition(const Matrix& X) {
  if (X.rows() < X.cols())
    throw Error(ErrorCode::NotPositiveDefinite, "precondition: fewer rows than columns");
  Matrix L = cholesky_upper(gram(X));
  Matrix Xp = right_solve_upper(X, L);
  return {std::move(Xp), std::move(L)};
}

namespace detail {

inline void residual_into(const Matrix& X, const Vector& y, std::span<const double> w, std::span<double> r) {
  const std::size_t n = X.cols();
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double* a = X.data() + i * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a[j] * w[j];
    r[i] = y[i] - s;
  }
}

inline double objective_from_residual(std::span<const double> r, std::span<const double> z, double delta) {
  double fit = 0.0;
  double reg = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - z[i];
    fit += d * d;
    if (z[i] != 0.0) reg += std::abs(z[i]) / smooth_s(r[i], delta);
  }
  return 0.5 * fit + delta * reg;
}

inline void check_shapes(const Matrix& X, const Vector& y, const Vector& w, const Vector& z) {
  if (y.size() != X.rows() || z.size() != X.rows() || w.size() != X.cols())
    throw Error(ErrorCode::ShapeMismatch, "design/response/coefficient shapes do not conform");
}

}  // namespace detail

inline double objective(const Matrix& Xp, const Vector& y, const Vector& w, const Vector& z, double delta) {
  detail::check_shapes(Xp, y, w, z);
  std::vector<double> r(Xp.rows());
  detail::residual_into(Xp, y, w.span(), r);
  return detail::objective_from_residual(r, z.span(), delta);
}

/// grad_w H = X^T (X w - y + z) + delta X^T [ |z_i| S'(r_i) / S(r_i)^2 ],  r = y - X w.
inline Vector grad_w(const Matrix& Xp, const Vector& y, const Vector& w, const Vector& z, double delta) {
  detail::check_shapes(Xp, y, w, z);
  std::vector<double> r(Xp.rows());
  detail::residual_into(Xp, y, w.span(), r);
  Vector v(Xp.rows());
  for (std::size_t i = 0; i < r.size(); ++i)
    v[i] = z[i] - r[i] + delta * std::abs(z[i]) * gamma_fn(r[i], delta);
  return transpose_matvec(Xp, v);
}

// ---------------------------------------------------------------------------
// Solver

namespace detail {

struct LoopOutcome {
  Vector w;
  Vector z;
  std::size_t iterations = 0;
  bool converged = false;
  SolveTrace trace;
};

/// The alternating loop on a preconditioned design. The w-step is a gradient
/// step on H built with `delta_w`; the z-step is the prox with `delta_z`. Plain
/// SARM uses the same value for both.
inline LoopOutcome run_sarm_loop(const Matrix& design, const Vector& y, Vector w, Vector z, double delta_w,
                                 double delta_z, const SarmConfig& config) {
  check_shapes(design, y, w, z);
  const std::size_t m = design.rows();
  const std::size_t n = design.cols();
  const double alpha = config.alpha;

  std::vector<double> r(m), r_next(m), v(m), z_next(m), w_next(n), g(n);
  residual_into(design, y, w.span(), r);
  double H = objective_from_residual(r, z.span(), delta_w);

  LoopOutcome out;
  if (config.record_trace) {
    out.trace.initial_objective = H;
    out.trace.objective_values.reserve(std::min<std::size_t>(config.max_iter, 4096));
  }

  for (std::size_t k = 0; k < config.max_iter; ++k) {
    for (std::size_t i = 0; i < m; ++i)
      v[i] = z[i] - r[i] + (z[i] != 0.0 ? delta_w * std::abs(z[i]) * gamma_fn(r[i], delta_w) : 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double vi = v[i];
      if (vi == 0.0) continue;
      const double* a = design.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) g[j] += a[j] * vi;
    }
    for (std::size_t j = 0; j < n; ++j) w_next[j] = w[j] - alpha * g[j];

    residual_into(design, y, w_next, r_next);
    for (std::size_t i = 0; i < m; ++i) z_next[i] = prox_z(r_next[i], delta_z);
    const double H_next = objective_from_residual(r_next, z_next, delta_w);

    if (config.record_trace) {
      out.trace.objective_values.push_back(H_next);
      out.trace.w_step_norms.push_back(distance2(w_next, w.span()));
      out.trace.z_step_norms.push_back(distance2(z_next, z.span()));
      out.trace.grad_norms.push_back(norm2(g));
    }

    std::copy(w_next.begin(), w_next.end(), w.begin());
    std::copy(z_next.begin(), z_next.end(), z.begin());
    std::swap(r, r_next);
    out.iterations = k + 1;
    const double decrement = H - H_next;
    H = H_next;
    if (std::abs(decrement) <= config.tol) {
      out.converged = true;
      break;
    }
  }
  out.w = std::move(w);
  out.z = std::move(z);
  return out;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Fits SARM from w = 0, z = 0. The returned w_hat is in the original feature
/// space; non-convergence within max_iter is reported through `converged`.
inline RegressionFit sarm_fit(const Matrix& X, const Vector& y, const SarmConfig& config) {
  config.validate();
  if (y.size() != X.rows()) throw Error(ErrorCode::ShapeMismatch, "sarm_fit: y length != rows of X");
  const auto start = std::chrono::steady_clock::now();

  const Preconditioned pre = precondition(X);
  const auto loop_start = std::chrono::steady_clock::now();
  auto loop = detail::run_sarm_loop(pre.design, y, Vector(X.cols()), Vector(X.rows()), config.delta, config.delta,
                                    config);
  const double loop_time = detail::seconds_since(loop_start);

  RegressionFit fit;
  fit.w_hat = solve_upper_triangular(pre.factor, loop.w);
  fit.z_hat = std::move(loop.z);
  fit.iterations = loop.iterations;
  fit.converged = loop.converged;
  if (config.record_trace) fit.trace = std::move(loop.trace);
  fit.loop_time = loop_time;
  fit.wall_time = detail::seconds_since(start);
  return fit;
}

}  // namespace robustfit
