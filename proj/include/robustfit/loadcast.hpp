#pragma once

// Hourly load forecasting: CSV ingestion, Tao's vanilla benchmark features,
// training-data integrity attacks and MAPE evaluation.
//
// CSV format: header `timestamp,load,temperature` (any column order, extra
// columns ignored), ISO-8601 hour timestamps such as 2014-03-09T02:00:00,
// decimal point, one record per line.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
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
#include "robustfit/sarm.hpp"
#include "robustfit/tssarm.hpp"

namespace robustfit {

// ---------------------------------------------------------------------------
// Time stamps

struct HourStamp {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;
  unsigned hour = 0;  // 0..23

  std::chrono::sys_days date() const {
    return std::chrono::sys_days{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}};
  }
  /// Hours since 1970-01-01T00.
  std::int64_t ordinal() const { return static_cast<std::int64_t>(date().time_since_epoch().count()) * 24 + hour; }
  /// 0 = Monday .. 6 = Sunday.
  unsigned weekday() const { return std::chrono::weekday{date()}.iso_encoding() - 1; }

  static HourStamp from_ordinal(std::int64_t hours) {
    const auto days = static_cast<int>(hours >= 0 ? hours / 24 : (hours - 23) / 24);
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
            static_cast<unsigned>(hours - static_cast<std::int64_t>(days) * 24)};
  }

  std::string iso() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:00:00", year, month, day, hour);
    return buf;
  }

  friend bool operator==(const HourStamp&, const HourStamp&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

inline bool parse_uint(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Accepts YYYY-MM-DD[T| ]HH[:MM[:SS]] with an optional trailing Z; minutes and
/// seconds must be zero.
inline std::optional<HourStamp> parse_hour_stamp(std::string_view s) {
  s = detail::trim(s);
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  if (s.size() < 13 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ')) return std::nullopt;
  unsigned y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!detail::parse_uint(s.substr(0, 4), y) || !detail::parse_uint(s.substr(5, 2), mo) ||
      !detail::parse_uint(s.substr(8, 2), d) || !detail::parse_uint(s.substr(11, 2), h))
    return std::nullopt;
  std::string_view rest = s.substr(13);
  if (!rest.empty()) {
    if (rest.size() < 3 || rest[0] != ':' || !detail::parse_uint(rest.substr(1, 2), mi)) return std::nullopt;
    rest.remove_prefix(3);
    if (!rest.empty()) {
      if (rest.size() != 3 || rest[0] != ':' || !detail::parse_uint(rest.substr(1, 2), sec)) return std::nullopt;
    }
  }
  if (h > 23 || mi != 0 || sec != 0) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)}, std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return HourStamp{static_cast<int>(y), mo, d, h};
}

// ---------------------------------------------------------------------------
// Tables

struct LoadRecord {
  HourStamp timestamp;
  double load = 0.0;  // MW
  double temperature = 0.0;
};

/// A run of missing hours: `missing` hours absent right after record `after`.
struct Gap {
  std::size_t after = 0;
  std::int64_t missing = 0;
};

struct LoadTable {
  std::vector<LoadRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }

  std::vector<Gap> gaps() const {
    std::vector<Gap> out;
    for (std::size_t i = 1; i < records.size(); ++i) {
      const std::int64_t step = records[i].timestamp.ordinal() - records[i - 1].timestamp.ordinal();
      if (step > 1) out.push_back({i - 1, step - 1});
    }
    return out;
  }

  Vector loads() const {
    Vector y(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) y[i] = records[i].load;
    return y;
  }

  /// Records [begin, end).
  LoadTable slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > records.size()) throw Error(ErrorCode::ShapeMismatch, "LoadTable::slice out of range");
    return {std::vector<LoadRecord>(records.begin() + static_cast<std::ptrdiff_t>(begin),
                                    records.begin() + static_cast<std::ptrdiff_t>(end))};
  }

  /// Records whose year lies in [first_year, last_year].
  LoadTable years(int first_year, int last_year) const {
    LoadTable out;
    for (const auto& r : records)
      if (r.timestamp.year >= first_year && r.timestamp.year <= last_year) out.records.push_back(r);
    return out;
  }
};

inline LoadTable parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MissingColumn, "empty input: no header row");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  int ts_col = -1, load_col = -1, temp_col = -1, ncols = 0;
  {
    std::string_view header(line);
    for (std::size_t pos = 0;; ++ncols) {
      const std::size_t comma = header.find(',', pos);
      const auto name = detail::trim(header.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
      if (name == "timestamp") ts_col = ncols;
      if (name == "load") load_col = ncols;
      if (name == "temperature") temp_col = ncols;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    ++ncols;
  }
  if (ts_col < 0) throw Error(ErrorCode::MissingColumn, "header lacks column 'timestamp'");
  if (load_col < 0) throw Error(ErrorCode::MissingColumn, "header lacks column 'load'");
  if (temp_col < 0) throw Error(ErrorCode::MissingColumn, "header lacks column 'temperature'");

  LoadTable table;
  std::vector<std::string_view> fields;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    fields.clear();
    std::string_view view(line);
    for (std::size_t pos = 0;;) {
      const std::size_t comma = view.find(',', pos);
      fields.push_back(view.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (static_cast<int>(fields.size()) != ncols)
      throw Error(ErrorCode::ParseError, where + ": expected " + std::to_string(ncols) + " fields");
    LoadRecord rec;
    const auto stamp = parse_hour_stamp(fields[static_cast<std::size_t>(ts_col)]);
    if (!stamp) throw Error(ErrorCode::ParseError, where + ": bad timestamp");
    rec.timestamp = *stamp;
    if (!detail::parse_double(fields[static_cast<std::size_t>(load_col)], rec.load))
      throw Error(ErrorCode::ParseError, where + ": bad load value");
    if (!(rec.load > 0.0)) throw Error(ErrorCode::ParseError, where + ": load must be positive");
    if (!detail::parse_double(fields[static_cast<std::size_t>(temp_col)], rec.temperature))
      throw Error(ErrorCode::ParseError, where + ": bad temperature value");
    if (!table.records.empty() && rec.timestamp.ordinal() <= table.records.back().timestamp.ordinal())
      throw Error(ErrorCode::NonMonotoneTimestamps, where + ": timestamp " + rec.timestamp.iso() +
                                                         " does not follow " + table.records.back().timestamp.iso());
    table.records.push_back(rec);
  }
  return table;
}

inline LoadTable ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return parse_csv(in);
}

inline void write_csv(std::ostream& out, const LoadTable& table) {
  out << "timestamp,load,temperature\n";
  char buf[96];
  for (const auto& r : table.records) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", r.timestamp.iso().c_str(), r.load, r.temperature);
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// Features

/// Column layout, reference levels dropped (hour 0, Monday, January):
///   intercept, trend, Hour(23), Weekday(6), Month(11), Hour x Weekday(138),
///   T, T^2, T^3, T^k x Hour (3 x 23), T^k x Month (3 x 11)   = 285 columns.
/// Trend and temperature are min-max scaled with training-split bounds.
struct FeatureSchema {
  std::vector<std::string> columns;
  std::int64_t trend_min = 0;
  std::int64_t trend_max = 1;
  double temp_min = 0.0;
  double temp_max = 1.0;

  std::size_t size() const noexcept { return columns.size(); }
};

inline void to_json(nlohmann::json& j, const FeatureSchema& s) {
  j = nlohmann::json{{"columns", s.columns}, {"trend_min", s.trend_min}, {"trend_max", s.trend_max},
                     {"temp_min", s.temp_min}, {"temp_max", s.temp_max}};
}

struct FeatureSet {
  Matrix X;
  Vector y;
  FeatureSchema schema;
};

namespace detail {

inline std::vector<std::string> tao_column_names() {
  std::vector<std::string> c{"intercept", "trend"};
  for (int h = 1; h < 24; ++h) c.push_back("hour" + std::to_string(h));
  for (int d = 1; d < 7; ++d) c.push_back("weekday" + std::to_string(d));
  for (int mo = 2; mo <= 12; ++mo) c.push_back("month" + std::to_string(mo));
  for (int h = 1; h < 24; ++h)
    for (int d = 1; d < 7; ++d) c.push_back("hour" + std::to_string(h) + "_x_weekday" + std::to_string(d));
  for (int k = 1; k <= 3; ++k) c.push_back("T" + std::to_string(k));
  for (int k = 1; k <= 3; ++k)
    for (int h = 1; h < 24; ++h) c.push_back("T" + std::to_string(k) + "_x_hour" + std::to_string(h));
  for (int k = 1; k <= 3; ++k)
    for (int mo = 2; mo <= 12; ++mo) c.push_back("T" + std::to_string(k) + "_x_month" + std::to_string(mo));
  return c;
}

inline void fill_tao_row(const LoadRecord& rec, const FeatureSchema& s, std::span<double> row) {
  std::fill(row.begin(), row.end(), 0.0);
  const unsigned h = rec.timestamp.hour;
  const unsigned d = rec.timestamp.weekday();
  const unsigned mo = rec.timestamp.month;
  const double trend = static_cast<double>(rec.timestamp.ordinal() - s.trend_min) /
                       static_cast<double>(s.trend_max - s.trend_min);
  const double t1 = (rec.temperature - s.temp_min) / (s.temp_max - s.temp_min);
  const double tk[3] = {t1, t1 * t1, t1 * t1 * t1};

  std::size_t c = 0;
  row[c++] = 1.0;
  row[c++] = trend;
  if (h > 0) row[c + h - 1] = 1.0;
  c += 23;
  if (d > 0) row[c + d - 1] = 1.0;
  c += 6;
  if (mo > 1) row[c + mo - 2] = 1.0;
  c += 11;
  if (h > 0 && d > 0) row[c + (h - 1) * 6 + (d - 1)] = 1.0;
  c += 138;
  for (double v : tk) row[c++] = v;
  for (double v : tk) {
    if (h > 0) row[c + h - 1] = v;
    c += 23;
  }
  for (double v : tk) {
    if (mo > 1) row[c + mo - 2] = v;
    c += 11;
  }
}

}  // namespace detail

/// Features for `table` under an existing (training) schema.
inline FeatureSet build_features(const LoadTable& table, const FeatureSchema& schema) {
  const std::size_t p = schema.size();
  Matrix X(table.size(), p);
  for (std::size_t i = 0; i < table.size(); ++i)
    detail::fill_tao_row(table.records[i], schema, X.row(i));
  return {std::move(X), table.loads(), schema};
}

/// Fits the schema on `table` (the training split) and builds its features.
inline FeatureSet build_features(const LoadTable& table) {
  if (table.size() < 2) throw Error(ErrorCode::InsufficientCoverage, "need at least two records");
  std::vector<bool> hour(24), weekday(7), month(13), cell(24 * 7);
  FeatureSchema schema;
  schema.columns = detail::tao_column_names();
  schema.temp_min = schema.temp_max = table.records.front().temperature;
  for (const auto& r : table.records) {
    hour[r.timestamp.hour] = true;
    weekday[r.timestamp.weekday()] = true;
    month[r.timestamp.month] = true;
    cell[r.timestamp.hour * 7 + r.timestamp.weekday()] = true;
    schema.temp_min = std::min(schema.temp_min, r.temperature);
    schema.temp_max = std::max(schema.temp_max, r.temperature);
  }
  for (int h = 0; h < 24; ++h)
    if (!hour[h]) throw Error(ErrorCode::InsufficientCoverage, "hour " + std::to_string(h) + " never observed");
  for (int d = 0; d < 7; ++d)
    if (!weekday[d]) throw Error(ErrorCode::InsufficientCoverage, "weekday " + std::to_string(d) + " never observed");
  for (int mo = 1; mo <= 12; ++mo)
    if (!month[mo]) throw Error(ErrorCode::InsufficientCoverage, "month " + std::to_string(mo) + " never observed");
  for (std::size_t k = 0; k < cell.size(); ++k)
    if (!cell[k])
      throw Error(ErrorCode::InsufficientCoverage,
                  "hour " + std::to_string(k / 7) + " x weekday " + std::to_string(k % 7) + " never observed");
  if (!(schema.temp_max > schema.temp_min))
    throw Error(ErrorCode::InsufficientCoverage, "temperature is constant; polynomial terms are collinear");
  schema.trend_min = table.records.front().timestamp.ordinal();
  schema.trend_max = table.records.back().timestamp.ordinal();
  return build_features(table, schema);
}

// ---------------------------------------------------------------------------
// Attacks

enum class AttackKind { PosUniform, PosGaussian, NegUniform };
enum class Split { Train, Test };

inline std::string to_string(AttackKind k) {
  switch (k) {
    case AttackKind::PosUniform: return "PosUniform";
    case AttackKind::PosGaussian: return "PosGaussian";
    case AttackKind::NegUniform: return "NegUniform";
  }
  return "?";
}

inline AttackKind parse_attack_kind(std::string_view s) {
  if (s == "PosUniform") return AttackKind::PosUniform;
  if (s == "PosGaussian") return AttackKind::PosGaussian;
  if (s == "NegUniform") return AttackKind::NegUniform;
  throw Error(ErrorCode::InvalidSpec, "unknown attack kind '" + std::string(s) + "'");
}

/// Smallest multiplicative factor an attack may apply, keeping loads positive.
inline constexpr double kMinAttackFactor = 0.01;

struct AttackSpec {
  AttackKind kind = AttackKind::PosUniform;
  double fraction_k = 0.0;  // percent of rows
  double a = 20.0;          // uniform lower bound, or Gaussian mean (percent)
  double b = 50.0;          // uniform upper bound, or Gaussian std (percent)
  std::uint64_t seed = 0;
  Split target = Split::Train;

  static AttackSpec gaussian(double fraction_k, double mean = 30.0, double sd = 10.0, std::uint64_t seed = 0) {
    return {AttackKind::PosGaussian, fraction_k, mean, sd, seed, Split::Train};
  }

  void validate() const {
    if (!(fraction_k >= 0.0 && fraction_k <= 100.0))
      throw Error(ErrorCode::InvalidSpec, "fraction_k must lie in [0, 100]");
    if (!std::isfinite(a) || !std::isfinite(b)) throw Error(ErrorCode::InvalidSpec, "attack parameters not finite");
    if (kind == AttackKind::PosGaussian) {
      if (b < 0.0) throw Error(ErrorCode::InvalidSpec, "Gaussian attack std must be >= 0");
    } else if (a > b) {
      throw Error(ErrorCode::InvalidSpec, "uniform attack needs a <= b");
    }
    if (target != Split::Train) throw Error(ErrorCode::InvalidSpec, "attacks apply to the training split only");
  }
};

inline void to_json(nlohmann::json& j, const AttackSpec& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}, {"fraction_k", s.fraction_k}, {"a", s.a}, {"b", s.b},
                     {"seed", s.seed}, {"target", s.target == Split::Train ? "train" : "test"}};
}

inline void from_json(const nlohmann::json& j, AttackSpec& s) {
  s.kind = parse_attack_kind(j.at("kind").get<std::string>());
  s.fraction_k = j.value("fraction_k", 0.0);
  const bool gauss = s.kind == AttackKind::PosGaussian;
  s.a = j.value("a", gauss ? 30.0 : 20.0);
  s.b = j.value("b", gauss ? 10.0 : 50.0);
  s.seed = j.value("seed", std::uint64_t{0});
  const std::string target = j.value("target", std::string("train"));
  if (target != "train" && target != "test") throw Error(ErrorCode::InvalidSpec, "target must be train or test");
  s.target = target == "train" ? Split::Train : Split::Test;
}

struct AttackResult {
  LoadTable attacked;
  std::vector<std::size_t> mask;  // ascending row indices
  std::vector<double> factors;    // multiplicative factor per masked row
};

/// Scales round(k% * rows) loads chosen without replacement. Positions are drawn
/// first, then one magnitude per position in ascending row order.
inline AttackResult apply_attack(const LoadTable& table, const AttackSpec& spec) {
  spec.validate();
  const std::size_t rows = table.size();
  const auto count = static_cast<std::size_t>(std::llround(spec.fraction_k / 100.0 * static_cast<double>(rows)));
  Rng rng(spec.seed);
  AttackResult out{table, rng.sample_without_replacement(rows, count), {}};
  std::sort(out.mask.begin(), out.mask.end());
  out.factors.reserve(count);
  for (std::size_t i : out.mask) {
    double factor = 1.0;
    switch (spec.kind) {
      case AttackKind::PosUniform: factor = 1.0 + rng.uniform(spec.a, spec.b) / 100.0; break;
      case AttackKind::PosGaussian: factor = 1.0 + rng.normal(spec.a, spec.b) / 100.0; break;
      case AttackKind::NegUniform: factor = 1.0 - rng.uniform(spec.a, spec.b) / 100.0; break;
    }
    factor = std::max(factor, kMinAttackFactor);
    out.attacked.records[i].load *= factor;
    out.factors.push_back(factor);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

/// Mean absolute percentage error, in percent.
inline double mape(const Vector& y_true, const Vector& y_pred) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorCode::ShapeMismatch, "mape: lengths differ");
  if (y_true.empty()) throw Error(ErrorCode::ShapeMismatch, "mape: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 0.0) throw Error(ErrorCode::ZeroActual, "mape: actual value is zero at index " + std::to_string(i));
    sum += std::abs(y_true[i] - y_pred[i]) / std::abs(y_true[i]);
  }
  return 100.0 * sum / static_cast<double>(y_true.size());
}

enum class ForecastMethod { MLR, SARM, TSSARM };

inline std::string to_string(ForecastMethod m) {
  switch (m) {
    case ForecastMethod::MLR: return "MLR";
    case ForecastMethod::SARM: return "SARM";
    case ForecastMethod::TSSARM: return "TSSARM";
  }
  return "?";
}

inline ForecastMethod parse_forecast_method(std::string_view s) {
  if (s == "MLR" || s == "OLS") return ForecastMethod::MLR;
  if (s == "SARM") return ForecastMethod::SARM;
  if (s == "TSSARM") return ForecastMethod::TSSARM;
  throw Error(ErrorCode::InvalidSpec, "unknown forecast method '" + std::string(s) + "'");
}

struct ForecastOptions {
  double delta_factor = 6.0;  // delta = factor * sigma^2
  double tol = 1e-6;
  std::size_t max_iter = 10000;
  double eta = 0.005;
};

struct ForecastReport {
  std::string zone = "synthetic";
  ForecastMethod method = ForecastMethod::MLR;
  std::optional<AttackSpec> attack;
  double mape = 0.0;
  double sigma = 0.0;  // plug-in noise scale, robust methods only
  double delta = 0.0;
  std::size_t attacked_rows = 0;
  std::size_t iterations = 0;
  bool converged = true;
  std::size_t features = 0;
};

inline void to_json(nlohmann::json& j, const ForecastReport& r) {
  j = nlohmann::json{{"zone", r.zone},           {"method", to_string(r.method)}, {"mape", r.mape},
                     {"sigma", r.sigma},         {"delta", r.delta},              {"attacked_rows", r.attacked_rows},
                     {"iterations", r.iterations}, {"converged", r.converged},    {"features", r.features}};
  j["attack"] = r.attack ? nlohmann::json(*r.attack) : nlohmann::json(nullptr);
}

/// Plug-in inlier scale: 1.4826 * MAD of the least-squares residuals.
inline double plugin_sigma(const Matrix& X, const Vector& y) {
  const Vector r = residual(X, y, fit_ols(X, y));
  return 1.4826 * mad(r.span());
}

inline ForecastReport run_forecast_experiment(const LoadTable& train, const LoadTable& test,
                                              const std::optional<AttackSpec>& attack, ForecastMethod method,
                                              const ForecastOptions& options = {}) {
  ForecastReport report;
  report.method = method;
  report.attack = attack;

  LoadTable training = train;
  if (attack) {
    auto res = apply_attack(train, *attack);
    training = std::move(res.attacked);
    report.attacked_rows = res.mask.size();
  }
  const FeatureSet fit_set = build_features(training);
  const FeatureSet eval_set = build_features(test, fit_set.schema);
  report.features = fit_set.schema.size();

  Vector w;
  if (method == ForecastMethod::MLR) {
    w = fit_ols(fit_set.X, fit_set.y);
    report.iterations = 1;
  } else {
    report.sigma = plugin_sigma(fit_set.X, fit_set.y);
    if (!(report.sigma > 0.0)) throw Error(ErrorCode::InvalidConfig, "plug-in sigma is zero (perfect fit)");
    SarmConfig cfg;
    cfg.delta = options.delta_factor * report.sigma * report.sigma;
    cfg.tol = options.tol;
    cfg.max_iter = options.max_iter;
    report.delta = cfg.delta;
    RegressionFit fit;
    if (method == ForecastMethod::SARM) {
      fit = sarm_fit(fit_set.X, fit_set.y, cfg);
    } else {
      TssarmConfig ts = TssarmConfig::with_defaults(cfg);
      ts.eta = options.eta;
      fit = tssarm_fit(fit_set.X, fit_set.y, ts);
    }
    w = std::move(fit.w_hat);
    report.iterations = fit.iterations;
    report.converged = fit.converged;
  }
  report.mape = mape(eval_set.y, matvec(eval_set.X, w));
  return report;
}

// ---------------------------------------------------------------------------
// Synthetic data with a known benchmark-form ground truth

struct SyntheticLoadSpec {
  int first_year = 2013;
  int years = 3;
  double noise_sd = 250.0;  // MW, Gaussian
  std::uint64_t seed = 0;
};

/// Hourly temperature (degrees F) with seasonal and daily cycles plus AR(1)
/// weather noise; load is an exact function of the benchmark terms (trend,
/// hour x weekday profile, month offsets, cubic temperature response modulated
/// by hour and month) in raw units, plus Gaussian noise.
inline LoadTable synthetic_load_table(const SyntheticLoadSpec& spec) {
  if (spec.years < 1) throw Error(ErrorCode::InvalidSpec, "years must be >= 1");
  if (!(spec.noise_sd >= 0.0)) throw Error(ErrorCode::InvalidSpec, "noise_sd must be >= 0");
  Rng rng(spec.seed);
  const std::int64_t begin = HourStamp{spec.first_year, 1, 1, 0}.ordinal();
  const std::int64_t end = HourStamp{spec.first_year + spec.years, 1, 1, 0}.ordinal();
  constexpr double two_pi = 2.0 * std::numbers::pi;

  LoadTable table;
  table.records.reserve(static_cast<std::size_t>(end - begin));
  double weather = 0.0;
  for (std::int64_t t = begin; t < end; ++t) {
    const HourStamp ts = HourStamp::from_ordinal(t);
    const double day_of_year = static_cast<double>((t - begin) / 24 % 365);
    const double h = ts.hour;
    weather = 0.95 * weather + rng.normal(0.0, 1.2);
    const double temp = 52.0 - 22.0 * std::cos(two_pi * (day_of_year - 15.0) / 365.0) +
                        7.0 * std::sin(two_pi * (h - 9.0) / 24.0) + weather;

    const bool weekend = ts.weekday() >= 5;
    const double daytime = 0.5 - 0.5 * std::cos(two_pi * (h - 3.0) / 24.0);  // 0 at 3am, 1 at 3pm
    const double profile = 2600.0 * daytime + 500.0 * std::exp(-0.5 * (h - 19.0) * (h - 19.0) / 4.0);
    const double weekday_effect = weekend ? -900.0 * daytime - 300.0 : 0.0;
    const double month_effect = 250.0 * std::cos(two_pi * (ts.month - 1) / 12.0);
    const double dt = temp - 60.0;
    const double gain = 1.0 + 0.35 * daytime + (ts.month >= 6 && ts.month <= 8 ? 0.15 : 0.0);
    const double thermal = gain * (2.4 * dt * dt + 0.012 * dt * dt * dt);
    const double trend = 0.01 * static_cast<double>(t - begin);
    const double load = 11000.0 + trend + profile + weekday_effect + month_effect + thermal +
                        rng.normal(0.0, spec.noise_sd);
    table.records.push_back({ts, std::max(load, 1.0), temp});
  }
  return table;
}

}  // namespace robustfit
