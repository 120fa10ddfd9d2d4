#pragma once

// Synthetic corruption scenarios (Types 1-6) and the relative l2 error metric.
//
// Draw order for every type, from one Rng seeded with spec.seed:
//   X (row-major), w_true, noise e, outlier positions, outlier values.
// Type 6 draws D in place of X.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "robustfit/baselines.hpp"
#include "robustfit/error.hpp"
#include "robustfit/linalg.hpp"
#include "robustfit/random.hpp"

namespace robustfit {

enum class SimType { T1 = 1, T2, T3, T4, T5, T6 };

inline std::string to_string(SimType t) { return "T" + std::to_string(static_cast<int>(t)); }

inline SimType parse_sim_type(std::string_view s) {
  if (!s.empty() && (s.front() == 'T' || s.front() == 't')) s.remove_prefix(1);
  if (s.size() == 1 && s[0] >= '1' && s[0] <= '6') return static_cast<SimType>(s[0] - '0');
  throw Error(ErrorCode::InvalidSpec, "unknown simulation type '" + std::string(s) + "'");
}

/// Default sample count for a type: 600 for the uniform-design types, else 512.
inline std::size_t default_rows(SimType t) { return (t == SimType::T2 || t == SimType::T4) ? 600 : 512; }

struct SimSpec {
  SimType type = SimType::T1;
  std::size_t m = 512;
  std::size_t n = 16;
  double p = 0.0;
  std::optional<double> kappa;
  std::uint64_t seed = 0;

  std::size_t outlier_count() const { return static_cast<std::size_t>(std::llround(p * static_cast<double>(m))); }

  void validate() const {
    if (m == 0 || n == 0) throw Error(ErrorCode::InvalidSpec, "m and n must be positive");
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidSpec, "p must lie in [0, 1]");
    if (outlier_count() > m) throw Error(ErrorCode::InvalidSpec, "round(p*m) exceeds m");
    if ((type == SimType::T5) != kappa.has_value())
      throw Error(ErrorCode::InvalidSpec, "kappa is required for T5 and only for T5");
    if (kappa && !(*kappa > 0.0)) throw Error(ErrorCode::InvalidSpec, "kappa must be > 0");
    if (type == SimType::T6 && n < 2) throw Error(ErrorCode::InvalidSpec, "T6 needs n >= 2");
  }
};

struct SimInstance {
  Matrix X;
  Vector y;
  Vector w_true;
  Vector z_true;
  Vector e;
  double sigma = 0.0;

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < z_true.size(); ++i)
      if (z_true[i] != 0.0) s.push_back(i);
    return s;
  }
};

/// Type 6 mixing matrix: diagonal d_j, off-diagonal (1 - d_j)/(n - 1) in column j,
/// with d = exp(linspace(-0.1, log(1.1/n), n)).
inline Matrix type6_mixing(std::size_t n) {
  Matrix B(n, n);
  const double lo = -0.1;
  const double hi = std::log(1.1 / static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const double t = n == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n - 1);
    const double d = std::exp(lo + (hi - lo) * t);
    for (std::size_t i = 0; i < n; ++i) B(i, j) = i == j ? d : (1.0 - d) / static_cast<double>(n - 1);
  }
  return B;
}

inline SimInstance generate(const SimSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t m = spec.m;
  const std::size_t n = spec.n;
  const bool uniform_design = spec.type == SimType::T2 || spec.type == SimType::T4;

  std::vector<double> xs(m * n);
  for (auto& x : xs) x = uniform_design ? rng.uniform() : rng.normal();
  Matrix X(m, n, std::move(xs));
  if (spec.type == SimType::T6) X = matmul(X, type6_mixing(n));

  const double sigma_w = uniform_design ? 5.0 : 1.0;
  Vector w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = sigma_w * rng.normal();
  const Vector clean = matvec(X, w);

  double sigma = 1.0;
  if (!uniform_design) {
    std::vector<double> mags(m);
    for (std::size_t i = 0; i < m; ++i) mags[i] = std::abs(clean[i]);
    sigma = median(std::move(mags)) / 16.0;
  }

  Vector e(m);
  for (std::size_t i = 0; i < m; ++i) e[i] = sigma * rng.normal();

  const auto positions = rng.sample_without_replacement(m, spec.outlier_count());
  Vector z(m);
  for (std::size_t i : positions) {
    double v = 0.0;
    switch (spec.type) {
      case SimType::T1:
      case SimType::T6: {
        const double centre = rng.uniform() < 0.5 ? 12.0 * sigma : -12.0 * sigma;
        v = rng.normal(centre, 4.0 * sigma);
        break;
      }
      case SimType::T2: v = rng.uniform() < 0.5 ? 25.0 : -25.0; break;
      case SimType::T3: v = rng.normal(12.0 * sigma, 4.0 * sigma); break;
      case SimType::T4: v = 25.0; break;
      case SimType::T5: v = rng.normal(0.0, *spec.kappa * sigma); break;
    }
    z[i] = v;
  }

  Vector y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = clean[i] + e[i] + z[i];
  return {std::move(X), std::move(y), std::move(w), std::move(z), std::move(e), sigma};
}

inline double relative_l2_error(const Vector& w_hat, const Vector& w_true) {
  if (w_hat.size() != w_true.size()) throw Error(ErrorCode::ShapeMismatch, "relative_l2_error: lengths differ");
  const double denom = norm2(w_true.span());
  if (denom == 0.0) throw Error(ErrorCode::ZeroTruth, "relative_l2_error: ||w_true|| = 0");
  return distance2(w_hat.span(), w_true.span()) / denom;
}

// ---------------------------------------------------------------------------
// Serialization: JSON and a plain key=value block.

inline void to_json(nlohmann::json& j, const SimSpec& s) {
  j = nlohmann::json{{"type", to_string(s.type)}, {"m", s.m}, {"n", s.n}, {"p", s.p}, {"seed", s.seed}};
  j["kappa"] = s.kappa ? nlohmann::json(*s.kappa) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, SimSpec& s) {
  s.type = parse_sim_type(j.at("type").get<std::string>());
  s.m = j.contains("m") ? j.at("m").get<std::size_t>() : default_rows(s.type);
  s.n = j.at("n").get<std::size_t>();
  s.p = j.value("p", 0.0);
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("kappa") && !j.at("kappa").is_null())
    s.kappa = j.at("kappa").get<double>();
  else
    s.kappa.reset();
}

inline std::string to_key_value(const SimSpec& s) {
  std::ostringstream os;
  os.precision(17);
  os << "type=" << to_string(s.type) << "\nm=" << s.m << "\nn=" << s.n << "\np=" << s.p << "\n";
  if (s.kappa) os << "kappa=" << *s.kappa << "\n";
  os << "seed=" << s.seed << "\n";
  return os.str();
}

inline SimSpec from_key_value(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidSpec, "expected key=value, got '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::InvalidSpec, std::string("missing key ") + key);
    return it->second;
  };
  SimSpec s;
  try {
    s.type = parse_sim_type(need("type"));
    s.m = kv.count("m") ? std::stoull(kv["m"]) : default_rows(s.type);
    s.n = std::stoull(need("n"));
    s.p = kv.count("p") ? std::stod(kv["p"]) : 0.0;
    s.seed = kv.count("seed") ? std::stoull(kv["seed"]) : 0;
    if (kv.count("kappa")) s.kappa = std::stod(kv["kappa"]);
  } catch (const std::logic_error& ex) {
    throw Error(ErrorCode::InvalidSpec, std::string("bad number: ") + ex.what());
  }
  return s;
}

}  // namespace robustfit
