#pragma once

// Two-stage SARM: a robust pre-estimate on the leading singular directions of
// X, then a full-dimension SARM pass warm-started from it.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <utility>

#include "robustfit/linalg.hpp"
#include "robustfit/sarm.hpp"

namespace robustfit {

struct TssarmConfig {
  SarmConfig base;
  double eta = 0.005;
  double delta_pre = 2.0;
  /// Stage 1 thresholds z on delta by default; set to threshold on delta_pre.
  bool stage1_z_uses_delta_pre = false;

  /// delta_pre defaults to twice the base delta.
  static TssarmConfig with_defaults(const SarmConfig& base) {
    TssarmConfig c;
    c.base = base;
    c.delta_pre = 2.0 * base.delta;
    return c;
  }

  void validate() const {
    base.validate();
    if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorCode::InvalidConfig, "eta must lie in [0, 1]");
    if (!(delta_pre >= base.delta)) throw Error(ErrorCode::InvalidConfig, "delta_pre must be >= delta");
  }
};

struct SpectralSplit {
  std::size_t q = 0;
  Vector eigvals;  // of X^T X, descending
  Matrix eigvecs;  // V
};

/// Smallest q with s[q] < eta * s[0] (0-based s[q] is the (q+1)-th value);
/// returns s.size() when no tail value is small enough.
inline std::size_t select_rank(const Vector& singular_values, double eta) {
  if (singular_values.empty()) throw Error(ErrorCode::EmptySpectrum, "select_rank: no singular values");
  const double cutoff = eta * singular_values[0];
  for (std::size_t j = 1; j < singular_values.size(); ++j)
    if (singular_values[j] < cutoff) return j;
  return singular_values.size();
}

inline SpectralSplit spectral_split(const Matrix& X, double eta) {
  if (X.rows() < X.cols())
    throw Error(ErrorCode::NotPositiveDefinite, "spectral_split: fewer rows than columns");
  auto eig = sym_eig(gram(X));
  const std::size_t n = eig.values.size();
  if (n == 0) throw Error(ErrorCode::EmptySpectrum, "spectral_split: X has no columns");
  double trace = 0.0;
  for (double v : eig.values) trace += v;
  if (!(eig.values[n - 1] > kPivotTolerance * trace / static_cast<double>(n)))
    throw Error(ErrorCode::NotPositiveDefinite, "spectral_split: X is rank deficient");
  Vector s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sqrt(eig.values[i]);
  return {select_rank(s, eta), std::move(eig.values), std::move(eig.vectors)};
}

/// V diag(1/s): maps whitened coordinates back to the original features.
inline Matrix whitening_map(const SpectralSplit& split) {
  const std::size_t n = split.eigvals.size();
  Matrix W(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double inv = 1.0 / std::sqrt(split.eigvals[j]);
    for (std::size_t i = 0; i < n; ++i) W(i, j) = split.eigvecs(i, j) * inv;
  }
  return W;
}

/// First `q` columns of `A`.
inline Matrix leading_columns(const Matrix& A, std::size_t q) {
  Matrix out(A.rows(), q);
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < q; ++j) out(i, j) = A(i, j);
  return out;
}

inline RegressionFit tssarm_fit(const Matrix& X, const Vector& y, const TssarmConfig& config) {
  config.validate();
  if (y.size() != X.rows()) throw Error(ErrorCode::ShapeMismatch, "tssarm_fit: y length != rows of X");
  const auto start = std::chrono::steady_clock::now();

  const SpectralSplit split = spectral_split(X, config.eta);
  const std::size_t n = X.cols();
  if (split.q == n) {
    RegressionFit fit = sarm_fit(X, y, config.base);
    fit.two_stage = TwoStageInfo{n, 0, false};
    fit.wall_time = detail::seconds_since(start);
    return fit;
  }

  const Matrix map = whitening_map(split);
  const Matrix design = matmul(X, map);
  const Matrix design_q = leading_columns(design, split.q);

  const auto loop_start = std::chrono::steady_clock::now();
  SarmConfig stage1_cfg = config.base;
  stage1_cfg.record_trace = false;
  const double stage1_z_delta = config.stage1_z_uses_delta_pre ? config.delta_pre : config.base.delta;
  auto stage1 = detail::run_sarm_loop(design_q, y, Vector(split.q), Vector(X.rows()), config.delta_pre,
                                      stage1_z_delta, stage1_cfg);

  Vector w0(n);
  for (std::size_t j = 0; j < split.q; ++j) w0[j] = stage1.w[j];
  auto stage2 = detail::run_sarm_loop(design, y, std::move(w0), std::move(stage1.z), config.base.delta,
                                      config.base.delta, config.base);
  const double loop_time = detail::seconds_since(loop_start);

  RegressionFit fit;
  fit.w_hat = matvec(map, stage2.w);
  fit.z_hat = std::move(stage2.z);
  fit.iterations = stage2.iterations;
  fit.converged = stage2.converged;
  if (config.base.record_trace) fit.trace = std::move(stage2.trace);
  fit.two_stage = TwoStageInfo{split.q, stage1.iterations, stage1.converged};
  fit.loop_time = loop_time;
  fit.wall_time = detail::seconds_since(start);
  return fit;
}

}  // namespace robustfit
