#pragma once

// Comparison estimators: Ideal, Oracle, OLS, bisquare IRLS, LAD, TLRM, AROSI,
// IPOD and GARD.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "robustfit/error.hpp"
#include "robustfit/linalg.hpp"

namespace robustfit {

struct BaselineConfig {
  double sigma = 1.0;           // inlier noise std, assumed known
  double tol = 1e-6;            // coefficient-change threshold
  std::size_t max_iter = 500;
  double bisquare_c = 4.685;
  double threshold_factor = 5.0;  // outlier cut at threshold_factor * sigma
  double lad_tol = 1e-8;
  std::size_t lad_max_iter = 1000;
  std::optional<Vector> initial_w;  // IPOD start; LAD when empty

  double threshold() const { return threshold_factor * sigma; }
};

struct BaselineFit {
  Vector w;
  Vector z;
  std::size_t iterations = 0;
  bool converged = true;
};

// ---------------------------------------------------------------------------
// Helpers

inline double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidSpec, "median of empty sequence");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

/// Median absolute deviation about the median (unscaled).
inline double mad(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  const double med = median(v);
  for (auto& x : v) x = std::abs(x - med);
  return median(std::move(v));
}

inline Vector residual(const Matrix& X, const Vector& y, const Vector& w) {
  Vector r = matvec(X, w);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
  return r;
}

namespace detail {

/// Solves min sum_i weight_i (y_i - x_i^T w)^2; a null weight span means all ones.
inline Vector weighted_ols(const Matrix& X, const Vector& y, std::span<const double> weights) {
  const std::size_t n = X.cols();
  Matrix G(n, n);
  Vector b(n);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double wi = weights.empty() ? 1.0 : weights[i];
    if (wi == 0.0) continue;
    auto a = X.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double aj = wi * a[j];
      b[j] += aj * y[i];
      for (std::size_t k = j; k < n; ++k) G(j, k) += aj * a[k];
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) G(k, j) = G(j, k);
  return cholesky_solve(cholesky_upper(G), b);
}

inline Vector mask_to_weights(const std::vector<bool>& keep) {
  Vector w(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) w[i] = keep[i] ? 1.0 : 0.0;
  return w;
}

inline bool converged_step(const Vector& prev, const Vector& next, double tol) {
  return distance2(prev.span(), next.span()) <= tol * (1.0 + norm2(next.span()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Least-squares family

inline Vector fit_ols(const Matrix& X, const Vector& y) {
  if (y.size() != X.rows()) throw Error(ErrorCode::ShapeMismatch, "fit_ols: y length != rows of X");
  return detail::weighted_ols(X, y, {});
}

/// OLS on (X, y - z_true).
inline Vector fit_ideal(const Matrix& X, const Vector& y, const Vector& z_true) {
  return fit_ols(X, y - z_true);
}

/// OLS on the rows outside `support`.
inline Vector fit_oracle(const Matrix& X, const Vector& y, std::span<const std::size_t> support) {
  if (y.size() != X.rows()) throw Error(ErrorCode::ShapeMismatch, "fit_oracle: y length != rows of X");
  std::vector<bool> keep(X.rows(), true);
  for (std::size_t i : support) {
    if (i >= X.rows()) throw Error(ErrorCode::ShapeMismatch, "fit_oracle: support index out of range");
    keep[i] = false;
  }
  const Vector w = detail::mask_to_weights(keep);
  return detail::weighted_ols(X, y, w.span());
}

inline double bisquare_weight(double u, double c) {
  if (std::abs(u) >= c) return 0.0;
  const double t = u / c;
  const double s = 1.0 - t * t;
  return s * s;
}

/// Bisquare M-estimator by IRLS from the OLS start, scale MAD/0.6745 per step.
inline BaselineFit fit_irls_bisquare(const Matrix& X, const Vector& y, const BaselineConfig& config) {
  BaselineFit out{fit_ols(X, y), Vector(X.rows()), 0, false};
  Vector weights(X.rows());
  for (std::size_t it = 0; it < config.max_iter; ++it) {
    const Vector r = residual(X, y, out.w);
    const double scale = mad(r.span()) / 0.6745;
    out.iterations = it + 1;
    if (scale == 0.0) {
      out.converged = true;
      break;
    }
    bool any = false;
    for (std::size_t i = 0; i < r.size(); ++i) {
      weights[i] = bisquare_weight(r[i] / scale, config.bisquare_c);
      any = any || weights[i] > 0.0;
    }
    if (!any) throw Error(ErrorCode::AllZeroWeights, "fit_irls_bisquare: every weight vanished");
    Vector next = detail::weighted_ols(X, y, weights.span());
    const bool done = detail::converged_step(out.w, next, config.tol);
    out.w = std::move(next);
    if (done) {
      out.converged = true;
      break;
    }
  }
  const Vector r = residual(X, y, out.w);
  for (std::size_t i = 0; i < r.size(); ++i) out.z[i] = weights[i] == 0.0 ? r[i] : 0.0;
  return out;
}

namespace detail {

/// LAD restricted to rows with keep[i] (all rows when keep is empty), by IRLS
/// with weights 1 / max(|r_i|, eps).
inline BaselineFit lad_irls(const Matrix& X, const Vector& y, const std::vector<bool>& keep, const Vector* start,
                            const BaselineConfig& config) {
  const std::size_t m = X.rows();
  double scale = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!keep.empty() && !keep[i]) continue;
    scale += std::abs(y[i]);
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::EmptyInlierSet, "LAD on an empty row set");
  scale /= static_cast<double>(count);
  const double eps = 1e-6 * (scale > 0.0 ? scale : 1.0);

  Vector weights(m);
  for (std::size_t i = 0; i < m; ++i) weights[i] = keep.empty() || keep[i] ? 1.0 : 0.0;
  BaselineFit out{start ? *start : weighted_ols(X, y, weights.span()), Vector(m), 0, false};

  for (std::size_t it = 0; it < config.lad_max_iter; ++it) {
    const Vector r = residual(X, y, out.w);
    for (std::size_t i = 0; i < m; ++i)
      weights[i] = keep.empty() || keep[i] ? 1.0 / std::max(std::abs(r[i]), eps) : 0.0;
    Vector next = weighted_ols(X, y, weights.span());
    out.iterations = it + 1;
    const bool done = converged_step(out.w, next, config.lad_tol);
    out.w = std::move(next);
    if (done) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Least absolute deviations (smoothed IRLS approximation of the LP optimum).
inline BaselineFit fit_lad(const Matrix& X, const Vector& y, const BaselineConfig& config) {
  if (y.size() != X.rows()) throw Error(ErrorCode::ShapeMismatch, "fit_lad: y length != rows of X");
  return detail::lad_irls(X, y, {}, nullptr, config);
}

// ---------------------------------------------------------------------------
// Outlier-support iterations

namespace detail {

enum class InlierLoss { Squared, Absolute };

inline double subset_loss(const Vector& r, const std::vector<bool>& keep, InlierLoss loss) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (keep[i]) s += loss == InlierLoss::Squared ? r[i] * r[i] : std::abs(r[i]);
  return s;
}

/// Generalized support iteration: fit on S, hard-threshold residuals, repeat
/// until S stops changing.
inline BaselineFit support_iteration(const Matrix& X, const Vector& y, const BaselineConfig& config,
                                     InlierLoss loss) {
  if (y.size() != X.rows()) throw Error(ErrorCode::ShapeMismatch, "y length != rows of X");
  const std::size_t m = X.rows();
  const double threshold = config.threshold();
  std::vector<bool> inliers(m, true);
  BaselineFit out{Vector(X.cols()), Vector(m), 0, false};
  bool have_prev = false;

  for (std::size_t it = 0; it < config.max_iter; ++it) {
    Vector w;
    if (loss == InlierLoss::Squared) {
      const Vector mask = mask_to_weights(inliers);
      w = weighted_ols(X, y, mask.span());
    } else {
      w = lad_irls(X, y, inliers, have_prev ? &out.w : nullptr, config).w;
    }
    if (have_prev) {
      const double before = subset_loss(residual(X, y, out.w), inliers, loss);
      const double after = subset_loss(residual(X, y, w), inliers, loss);
      if (std::abs(before - after) <= 1e-12 * std::max(1.0, before)) w = out.w;
    }
    out.w = std::move(w);
    have_prev = true;
    out.iterations = it + 1;

    const Vector r = residual(X, y, out.w);
    std::vector<bool> next(m);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < m; ++i) {
      next[i] = std::abs(r[i]) <= threshold;
      out.z[i] = next[i] ? 0.0 : r[i];
      kept += next[i] ? 1 : 0;
    }
    if (kept == 0) throw Error(ErrorCode::EmptyInlierSet, "every residual exceeds the outlier threshold");
    if (next == inliers) {
      out.converged = true;
      break;
    }
    inliers = std::move(next);
  }
  return out;
}

}  // namespace detail

/// Truncated-loss regression: squared loss on the current inlier set.
inline BaselineFit fit_trlm(const Matrix& X, const Vector& y, const BaselineConfig& config) {
  return detail::support_iteration(X, y, config, detail::InlierLoss::Squared);
}

/// AROSI: absolute loss on the current inlier set.
inline BaselineFit fit_arosi(const Matrix& X, const Vector& y, const BaselineConfig& config) {
  return detail::support_iteration(X, y, config, detail::InlierLoss::Absolute);
}

/// Theta-IPOD with hard thresholding, started from LAD unless initial_w is set.
inline BaselineFit fit_ipod(const Matrix& X, const Vector& y, const BaselineConfig& config) {
  if (y.size() != X.rows()) throw Error(ErrorCode::ShapeMismatch, "fit_ipod: y length != rows of X");
  const std::size_t m = X.rows();
  const double threshold = config.threshold();
  const Matrix U = cholesky_upper(gram(X));

  BaselineFit out{config.initial_w ? *config.initial_w : fit_lad(X, y, config).w, Vector(m), 0, false};
  if (out.w.size() != X.cols()) throw Error(ErrorCode::ShapeMismatch, "fit_ipod: initial_w length != cols");
  Vector adjusted(m);
  for (std::size_t it = 0; it < config.max_iter; ++it) {
    const Vector r = residual(X, y, out.w);
    for (std::size_t i = 0; i < m; ++i) {
      out.z[i] = std::abs(r[i]) > threshold ? r[i] : 0.0;
      adjusted[i] = y[i] - out.z[i];
    }
    Vector next = cholesky_solve(U, transpose_matvec(X, adjusted));
    out.iterations = it + 1;
    const bool done = detail::converged_step(out.w, next, config.tol);
    out.w = std::move(next);
    if (done) {
      out.converged = true;
      break;
    }
  }
  const Vector r = residual(X, y, out.w);
  for (std::size_t i = 0; i < m; ++i) out.z[i] = std::abs(r[i]) > threshold ? r[i] : 0.0;
  return out;
}

/// GARD: OMP over [X, I] starting from all columns of X. Least squares on
/// [X, I_S] equals OLS on the rows outside S (each identity atom absorbs its
/// row), so each atom downdates the Gram matrix and refactors it.
/// `converged` is false when m - n atoms were added without meeting the bound.
inline BaselineFit fit_gard(const Matrix& X, const Vector& y, const BaselineConfig& config) {
  if (y.size() != X.rows()) throw Error(ErrorCode::ShapeMismatch, "fit_gard: y length != rows of X");
  const std::size_t m = X.rows();
  const std::size_t n = X.cols();
  const double bound = std::sqrt(static_cast<double>(m)) * config.sigma;

  Matrix G = gram(X);
  Vector b = transpose_matvec(X, y);
  std::vector<bool> selected(m, false);
  BaselineFit out{Vector(n), Vector(m), 0, false};

  for (std::size_t atoms = 0;; ++atoms) {
    out.w = cholesky_solve(cholesky_upper(G), b);
    const Vector r = residual(X, y, out.w);
    double res2 = 0.0;
    std::size_t pick = m;
    double best = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (selected[i]) continue;
      res2 += r[i] * r[i];
      if (std::abs(r[i]) > best) {
        best = std::abs(r[i]);
        pick = i;
      }
    }
    out.iterations = atoms;
    if (std::sqrt(res2) <= bound) {
      out.converged = true;
      break;
    }
    if (atoms == m - n || pick == m) break;
    selected[pick] = true;
    auto a = X.row(pick);
    for (std::size_t j = 0; j < n; ++j) {
      b[j] -= a[j] * y[pick];
      for (std::size_t k = 0; k < n; ++k) G(j, k) -= a[j] * a[k];
    }
  }
  const Vector r = residual(X, y, out.w);
  for (std::size_t i = 0; i < m; ++i) out.z[i] = selected[i] ? r[i] : 0.0;
  return out;
}

}  // namespace robustfit
