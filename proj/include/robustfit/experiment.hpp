#pragma once

// Monte Carlo experiment plans: scenario grids x methods x repetitions, run on
// a worker pool, with per-trial and aggregated CSV/JSON output.
//
// Trial t of every cell uses seed base_seed + t, so all methods in a cell see
// the same instance and results do not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "robustfit/baselines.hpp"
#include "robustfit/diagnostics.hpp"
#include "robustfit/error.hpp"
#include "robustfit/loadcast.hpp"
#include "robustfit/sarm.hpp"
#include "robustfit/simgen.hpp"
#include "robustfit/tssarm.hpp"

namespace robustfit {

// ---------------------------------------------------------------------------
// Methods

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> names{"Ideal", "Oracle", "MLR",  "IRLS", "L1",    "TLRM",
                                              "AROSI", "IPOD",   "GARD", "SARM", "TSSARM"};
  return names;
}

/// Canonical method name; accepts OLS for MLR and LAD for L1.
inline std::string canonical_method(const std::string& name) {
  if (name == "OLS") return "MLR";
  if (name == "LAD") return "L1";
  for (const auto& m : known_methods())
    if (m == name) return m;
  throw Error(ErrorCode::InvalidConfig, "unknown method '" + name + "'");
}

struct MethodOutcome {
  Vector w;
  std::size_t iterations = 1;
  bool converged = true;
  std::optional<SolveTrace> trace;
};

/// Runs one method on a simulated instance. SARM variants use delta = delta_factor * sigma^2.
inline MethodOutcome run_method(const std::string& method, const SimInstance& inst, double delta_factor,
                                bool record_trace = false) {
  const std::string name = canonical_method(method);
  BaselineConfig bc;
  bc.sigma = inst.sigma;
  auto from_baseline = [](BaselineFit f) { return MethodOutcome{std::move(f.w), f.iterations, f.converged, {}}; };
  auto closed_form = [](Vector w) { return MethodOutcome{std::move(w), 1, true, {}}; };

  if (name == "Ideal") return closed_form(fit_ideal(inst.X, inst.y, inst.z_true));
  if (name == "Oracle") return closed_form(fit_oracle(inst.X, inst.y, inst.support()));
  if (name == "MLR") return closed_form(fit_ols(inst.X, inst.y));
  if (name == "IRLS") return from_baseline(fit_irls_bisquare(inst.X, inst.y, bc));
  if (name == "L1") return from_baseline(fit_lad(inst.X, inst.y, bc));
  if (name == "TLRM") return from_baseline(fit_trlm(inst.X, inst.y, bc));
  if (name == "AROSI") return from_baseline(fit_arosi(inst.X, inst.y, bc));
  if (name == "IPOD") return from_baseline(fit_ipod(inst.X, inst.y, bc));
  if (name == "GARD") return from_baseline(fit_gard(inst.X, inst.y, bc));

  SarmConfig cfg;
  cfg.delta = delta_factor * inst.sigma * inst.sigma;
  cfg.record_trace = record_trace;
  RegressionFit fit = name == "SARM" ? sarm_fit(inst.X, inst.y, cfg)
                                     : tssarm_fit(inst.X, inst.y, TssarmConfig::with_defaults(cfg));
  return {std::move(fit.w_hat), fit.iterations, fit.converged, std::move(fit.trace)};
}

// ---------------------------------------------------------------------------
// Plans

enum class PlanKind { Simulate, Forecast };

struct AttackGrid {
  AttackKind kind = AttackKind::PosUniform;
  std::vector<double> fractions{0.0};
  double a = 20.0;
  double b = 50.0;
};

struct ForecastData {
  std::optional<SyntheticLoadSpec> synthetic = SyntheticLoadSpec{};
  std::string train_csv;
  std::string test_csv;
  std::string zone = "synthetic";
  int train_first_year = 2013;
  int train_last_year = 2014;
  int test_year = 2015;
};

struct ExperimentPlan {
  PlanKind kind = PlanKind::Simulate;
  std::vector<SimSpec> scenarios;  // p and seed are filled per cell
  std::vector<double> p_grid{0.0};
  ForecastData forecast;
  std::vector<AttackGrid> attacks;
  std::vector<std::string> methods{"MLR", "SARM"};
  std::size_t repetitions = 200;
  std::uint64_t base_seed = 0;
  double delta_factor = 6.0;
  bool check_theory = true;  // record SARM/TSSARM traces and count descent/step-bound violations
  std::size_t parallel = 1;
  std::string out_dir;

  void validate() const {
    if (repetitions < 1) throw Error(ErrorCode::InvalidConfig, "repetitions must be >= 1");
    if (methods.empty()) throw Error(ErrorCode::InvalidConfig, "no methods selected");
    for (const auto& m : methods) (void)canonical_method(m);
    if (!(delta_factor > 0.0)) throw Error(ErrorCode::InvalidConfig, "delta_factor must be > 0");
    if (kind == PlanKind::Simulate) {
      if (scenarios.empty()) throw Error(ErrorCode::InvalidConfig, "no scenarios");
      if (p_grid.empty()) throw Error(ErrorCode::InvalidConfig, "empty corruption grid");
      for (SimSpec s : scenarios)
        for (double p : p_grid) {
          s.p = p;
          s.validate();
        }
    } else {
      for (const auto& m : methods) {
        const auto c = canonical_method(m);
        if (c != "MLR" && c != "SARM" && c != "TSSARM")
          throw Error(ErrorCode::InvalidConfig, "forecast plans support MLR, SARM and TSSARM only");
      }
      if (!forecast.synthetic && (forecast.train_csv.empty() || forecast.test_csv.empty()))
        throw Error(ErrorCode::InvalidConfig, "forecast plan needs synthetic data or train_csv and test_csv");
    }
  }
};

inline void from_json(const nlohmann::json& j, AttackGrid& g) {
  g.kind = parse_attack_kind(j.at("kind").get<std::string>());
  g.fractions = j.value("fractions", std::vector<double>{0.0});
  const bool gauss = g.kind == AttackKind::PosGaussian;
  g.a = j.value("a", gauss ? 30.0 : 20.0);
  g.b = j.value("b", gauss ? 10.0 : 50.0);
}

inline void from_json(const nlohmann::json& j, ExperimentPlan& plan) {
  const std::string kind = j.value("kind", std::string("simulate"));
  if (kind != "simulate" && kind != "forecast") throw Error(ErrorCode::InvalidConfig, "kind must be simulate or forecast");
  plan.kind = kind == "simulate" ? PlanKind::Simulate : PlanKind::Forecast;
  if (j.contains("scenarios")) plan.scenarios = j.at("scenarios").get<std::vector<SimSpec>>();
  plan.p_grid = j.value("p_grid", plan.p_grid);
  plan.methods = j.value("methods", plan.methods);
  plan.repetitions = j.value("repetitions", plan.repetitions);
  plan.base_seed = j.value("base_seed", plan.base_seed);
  plan.delta_factor = j.value("delta_factor", plan.delta_factor);
  plan.check_theory = j.value("check_theory", plan.check_theory);
  plan.parallel = j.value("parallel", plan.parallel);
  plan.out_dir = j.value("out_dir", plan.out_dir);
  if (j.contains("attacks")) plan.attacks = j.at("attacks").get<std::vector<AttackGrid>>();
  if (j.contains("data")) {
    const auto& d = j.at("data");
    auto& f = plan.forecast;
    f.zone = d.value("zone", f.zone);
    f.train_first_year = d.value("train_first_year", f.train_first_year);
    f.train_last_year = d.value("train_last_year", f.train_last_year);
    f.test_year = d.value("test_year", f.test_year);
    if (d.contains("train_csv") || d.contains("test_csv")) {
      f.synthetic.reset();
      f.train_csv = d.value("train_csv", std::string());
      f.test_csv = d.value("test_csv", std::string());
    }
    if (d.contains("synthetic")) {
      const auto& s = d.at("synthetic");
      SyntheticLoadSpec spec;
      spec.first_year = s.value("first_year", spec.first_year);
      spec.years = s.value("years", spec.years);
      spec.noise_sd = s.value("noise_sd", spec.noise_sd);
      spec.seed = s.value("seed", spec.seed);
      f.synthetic = spec;
    }
  }
}

inline ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  try {
    return nlohmann::json::parse(in).get<ExperimentPlan>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, "config " + path + ": " + ex.what());
  }
}

// ---------------------------------------------------------------------------
// Results

struct TrialResult {
  std::string cell;  // scenario label, e.g. "T1,512,16,0.3," or "synthetic,PosUniform,40,20,50"
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string method;
  double error = std::numeric_limits<double>::quiet_NaN();  // relative l2 error, or MAPE for forecasts
  std::size_t iterations = 0;
  bool converged = false;
  double wall_time = 0.0;
  std::string status = "ok";
  std::size_t descent_violations = 0;
  std::size_t zstep_violations = 0;

  bool ok() const { return status == "ok"; }
};

struct AggregateRow {
  std::string cell;
  std::string method;
  std::size_t reps = 0;
  std::size_t ok = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double mean_iterations = 0.0;
  double converged_fraction = 0.0;
  double mean_wall_time = 0.0;
};

struct PlanResult {
  PlanKind kind = PlanKind::Simulate;
  std::vector<TrialResult> trials;  // cell-major, then trial, then method in plan order
  std::vector<AggregateRow> aggregate;

  /// Mean error of `method` in the cell whose label is `cell`.
  double mean_error(const std::string& cell, const std::string& method) const {
    for (const auto& a : aggregate)
      if (a.cell == cell && a.method == method) return a.mean_error;
    throw Error(ErrorCode::InvalidConfig, "no aggregate row for " + cell + " / " + method);
  }
  std::size_t total_descent_violations() const {
    std::size_t n = 0;
    for (const auto& t : trials) n += t.descent_violations;
    return n;
  }
  std::size_t total_zstep_violations() const {
    std::size_t n = 0;
    for (const auto& t : trials) n += t.zstep_violations;
    return n;
  }
};

namespace detail {

/// Shortest decimal that round-trips to `v`.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string sim_cell_label(const SimSpec& s) {
  return to_string(s.type) + "," + std::to_string(s.m) + "," + std::to_string(s.n) + "," + fmt(s.p) + "," +
         (s.kappa ? fmt(*s.kappa) : std::string());
}

inline std::string forecast_cell_label(const std::string& zone, const AttackGrid& g, double fraction) {
  return zone + "," + to_string(g.kind) + "," + fmt(fraction) + "," + fmt(g.a) + "," + fmt(g.b);
}

inline const char* cell_header(PlanKind kind) {
  return kind == PlanKind::Simulate ? "type,m,n,p,kappa" : "zone,attack,fraction_k,a,b";
}

/// Runs `task(i)` for i in [0, count) on `workers` threads.
template <class Task>
void parallel_for(std::size_t count, std::size_t workers, Task&& task) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  for (auto& t : pool) t.join();
}

inline std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials) {
  std::vector<AggregateRow> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::vector<const TrialResult*>> groups;
  for (const auto& t : trials) {
    const auto key = std::make_pair(t.cell, t.method);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      rows.push_back({t.cell, t.method});
      groups.emplace_back();
    }
    groups[it->second].push_back(&t);
  }
  for (std::size_t g = 0; g < rows.size(); ++g) {
    auto& row = rows[g];
    // Trial order, not completion order, so sums are reproducible.
    auto members = groups[g];
    std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->trial < b->trial; });
    row.reps = members.size();
    double sum = 0.0, sum_it = 0.0, sum_time = 0.0;
    std::size_t conv = 0;
    for (const auto* t : members) {
      sum_time += t->wall_time;
      if (!t->ok()) continue;
      ++row.ok;
      sum += t->error;
      sum_it += static_cast<double>(t->iterations);
      conv += t->converged ? 1 : 0;
    }
    const double k = static_cast<double>(row.ok);
    row.mean_error = row.ok ? sum / k : std::numeric_limits<double>::quiet_NaN();
    double ss = 0.0;
    for (const auto* t : members)
      if (t->ok()) ss += (t->error - row.mean_error) * (t->error - row.mean_error);
    row.std_error = row.ok > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
    row.mean_iterations = row.ok ? sum_it / k : 0.0;
    row.converged_fraction = row.ok ? static_cast<double>(conv) / k : 0.0;
    row.mean_wall_time = row.reps ? sum_time / static_cast<double>(row.reps) : 0.0;
  }
  return rows;
}

}  // namespace detail

/// Per-trial CSV. Wall times are left out so that reruns are byte-identical.
inline std::string trials_csv(const PlanResult& result) {
  std::ostringstream os;
  os << detail::cell_header(result.kind)
     << ",trial,seed,method,error,iterations,converged,status,descent_violations,zstep_violations\n";
  for (const auto& t : result.trials)
    os << t.cell << ',' << t.trial << ',' << t.seed << ',' << t.method << ',' << detail::fmt(t.error) << ','
       << t.iterations << ',' << (t.converged ? 1 : 0) << ',' << detail::csv_field(t.status) << ','
       << t.descent_violations << ',' << t.zstep_violations << '\n';
  return os.str();
}

inline std::string timings_csv(const PlanResult& result) {
  std::ostringstream os;
  os << detail::cell_header(result.kind) << ",trial,method,wall_time\n";
  for (const auto& t : result.trials)
    os << t.cell << ',' << t.trial << ',' << t.method << ',' << detail::fmt(t.wall_time) << '\n';
  return os.str();
}

inline std::string aggregate_csv(const PlanResult& result) {
  std::ostringstream os;
  os << detail::cell_header(result.kind)
     << ",method,reps,ok,mean_error,std_error,mean_iterations,converged_fraction,mean_wall_time\n";
  for (const auto& a : result.aggregate)
    os << a.cell << ',' << a.method << ',' << a.reps << ',' << a.ok << ',' << detail::fmt(a.mean_error) << ','
       << detail::fmt(a.std_error) << ',' << detail::fmt(a.mean_iterations) << ','
       << detail::fmt(a.converged_fraction) << ',' << detail::fmt(a.mean_wall_time) << '\n';
  return os.str();
}

inline nlohmann::json aggregate_json(const PlanResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& a : result.aggregate)
    rows.push_back({{"cell", a.cell},
                    {"method", a.method},
                    {"reps", a.reps},
                    {"ok", a.ok},
                    {"mean_error", a.ok ? nlohmann::json(a.mean_error) : nlohmann::json(nullptr)},
                    {"std_error", a.std_error},
                    {"mean_iterations", a.mean_iterations},
                    {"converged_fraction", a.converged_fraction},
                    {"mean_wall_time", a.mean_wall_time}});
  return {{"kind", result.kind == PlanKind::Simulate ? "simulate" : "forecast"},
          {"cell_columns", detail::cell_header(result.kind)},
          {"rows", rows}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

/// Writes trials.csv, timings.csv, aggregate.csv and aggregate.json into `dir`.
inline void write_outputs(const PlanResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_text(base / "trials.csv", trials_csv(result));
  write_text(base / "timings.csv", timings_csv(result));
  write_text(base / "aggregate.csv", aggregate_csv(result));
  write_text(base / "aggregate.json", aggregate_json(result).dump(2) + "\n");
}

namespace detail {

inline PlanResult run_simulation_plan(const ExperimentPlan& plan) {
  struct Cell {
    SimSpec spec;
    std::string label;
  };
  std::vector<Cell> cells;
  for (const auto& base : plan.scenarios)
    for (double p : plan.p_grid) {
      SimSpec s = base;
      s.p = p;
      cells.push_back({s, sim_cell_label(s)});
    }
  std::vector<std::string> methods;
  for (const auto& m : plan.methods) methods.push_back(canonical_method(m));

  const std::size_t reps = plan.repetitions;
  PlanResult result;
  result.kind = PlanKind::Simulate;
  result.trials.resize(cells.size() * reps * methods.size());

  parallel_for(cells.size() * reps, plan.parallel, [&](std::size_t task) {
    const Cell& cell = cells[task / reps];
    const std::size_t trial = task % reps;
    SimSpec spec = cell.spec;
    spec.seed = plan.base_seed + trial;
    TrialResult* slot = &result.trials[task * methods.size()];

    std::optional<SimInstance> inst;
    std::string gen_error;
    try {
      inst = generate(spec);
    } catch (const std::exception& ex) {
      gen_error = std::string("generate: ") + ex.what();
    }
    for (std::size_t k = 0; k < methods.size(); ++k) {
      TrialResult& t = slot[k];
      t.cell = cell.label;
      t.trial = trial;
      t.seed = spec.seed;
      t.method = methods[k];
      if (!inst) {
        t.status = gen_error;
        continue;
      }
      const auto start = std::chrono::steady_clock::now();
      try {
        const bool solver = methods[k] == "SARM" || methods[k] == "TSSARM";
        MethodOutcome out = run_method(methods[k], *inst, plan.delta_factor, plan.check_theory && solver);
        t.error = relative_l2_error(out.w, inst->w_true);
        t.iterations = out.iterations;
        t.converged = out.converged;
        if (out.trace) {
          t.descent_violations = check_descent(*out.trace);
          t.zstep_violations = check_zstep_bound(*out.trace);
        }
      } catch (const Error& ex) {
        t.status = std::string(to_string(ex.code())) + ": " + ex.what();
      } catch (const std::exception& ex) {
        t.status = ex.what();
      }
      t.wall_time = detail::seconds_since(start);
    }
  });
  result.aggregate = aggregate(result.trials);
  return result;
}

inline PlanResult run_forecast_plan(const ExperimentPlan& plan) {
  const auto& data = plan.forecast;
  LoadTable train, test;
  if (data.synthetic) {
    const LoadTable all = synthetic_load_table(*data.synthetic);
    train = all.years(data.train_first_year, data.train_last_year);
    test = all.years(data.test_year, data.test_year);
  } else {
    train = ingest_csv(data.train_csv);
    test = ingest_csv(data.test_csv);
  }
  std::vector<AttackGrid> grids = plan.attacks;
  if (grids.empty()) grids.push_back(AttackGrid{});

  struct Cell {
    AttackSpec attack;
    std::string label;
  };
  std::vector<Cell> cells;
  for (const auto& g : grids)
    for (double f : g.fractions) cells.push_back({AttackSpec{g.kind, f, g.a, g.b}, forecast_cell_label(data.zone, g, f)});
  std::vector<ForecastMethod> methods;
  std::vector<std::string> names;
  for (const auto& m : plan.methods) {
    names.push_back(canonical_method(m));
    methods.push_back(parse_forecast_method(names.back()));
  }

  const std::size_t reps = plan.repetitions;
  PlanResult result;
  result.kind = PlanKind::Forecast;
  result.trials.resize(cells.size() * reps * methods.size());
  ForecastOptions options;
  options.delta_factor = plan.delta_factor;

  parallel_for(cells.size() * reps * methods.size(), plan.parallel, [&](std::size_t task) {
    const std::size_t k = task % methods.size();
    const std::size_t trial = task / methods.size() % reps;
    const Cell& cell = cells[task / methods.size() / reps];
    TrialResult& t = result.trials[task];
    t.cell = cell.label;
    t.trial = trial;
    t.seed = plan.base_seed + trial;
    t.method = names[k];
    AttackSpec attack = cell.attack;
    attack.seed = t.seed;
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto report = run_forecast_experiment(
          train, test, attack.fraction_k > 0.0 ? std::optional<AttackSpec>(attack) : std::nullopt, methods[k], options);
      t.error = report.mape;
      t.iterations = report.iterations;
      t.converged = report.converged;
    } catch (const Error& ex) {
      t.status = std::string(to_string(ex.code())) + ": " + ex.what();
    } catch (const std::exception& ex) {
      t.status = ex.what();
    }
    t.wall_time = detail::seconds_since(start);
  });
  result.aggregate = aggregate(result.trials);
  return result;
}

}  // namespace detail

/// Executes every (cell x trial x method). Individual trial failures are
/// recorded in TrialResult::status; plan-level problems throw.
inline PlanResult run_plan(const ExperimentPlan& plan) {
  plan.validate();
  PlanResult result =
      plan.kind == PlanKind::Simulate ? detail::run_simulation_plan(plan) : detail::run_forecast_plan(plan);
  if (!plan.out_dir.empty()) write_outputs(result, plan.out_dir);
  return result;
}

// ---------------------------------------------------------------------------
// Traces

inline std::string trace_csv(const SolveTrace& trace) {
  std::ostringstream os;
  os << "k,H,H_decrement,w_step,z_step,grad_norm\n";
  double prev = trace.initial_objective;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double h = trace.objective_values[k];
    os << k + 1 << ',' << detail::fmt(h) << ',' << detail::fmt(prev - h) << ',' << detail::fmt(trace.w_step_norms[k])
       << ',' << detail::fmt(trace.z_step_norms[k]) << ',' << detail::fmt(trace.grad_norms[k]) << '\n';
    prev = h;
  }
  return os.str();
}

inline void export_trace(const RegressionFit& fit, const std::string& path) {
  if (!fit.trace) throw Error(ErrorCode::NoTrace, "fit was run without record_trace");
  write_text(path, trace_csv(*fit.trace));
}

// ---------------------------------------------------------------------------
// Timing

struct TimingRow {
  double scale = 1.0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t iterations = 0;
  double loop_time = 0.0;
  double per_iteration = 0.0;  // seconds, min over repeats
  std::optional<double> ratio;  // per_iteration / previous row's
  std::string status = "ok";
};

struct TimingOptions {
  std::size_t repeats = 3;
  double delta_factor = 6.0;
  std::size_t memory_budget_bytes = std::size_t{2} << 30;
};

/// Bytes held by sarm_fit for an m x n problem: X, the preconditioned copy,
/// the Gram matrix, its factor and a handful of length-m work vectors.
inline std::size_t sarm_memory_estimate(std::size_t m, std::size_t n) {
  const double doubles = 2.0 * static_cast<double>(m) * static_cast<double>(n) +
                         2.0 * static_cast<double>(n) * static_cast<double>(n) + 10.0 * static_cast<double>(m);
  const double bytes = 8.0 * doubles;
  return bytes >= static_cast<double>(std::numeric_limits<std::size_t>::max())
             ? std::numeric_limits<std::size_t>::max()
             : static_cast<std::size_t>(bytes);
}

/// SARM at m = round(scale * base.m) for each scale, n fixed. Instances too
/// large for the memory budget yield an error row instead of running.
inline std::vector<TimingRow> time_scaling_run(const SimSpec& base, const std::vector<double>& scales,
                                               const TimingOptions& options = {}) {
  std::vector<TimingRow> rows;
  double prev = std::numeric_limits<double>::quiet_NaN();  // previous ok row
  for (double scale : scales) {
    TimingRow row;
    row.scale = scale;
    row.n = base.n;
    if (!(scale >= 1.0) || !std::isfinite(scale)) {
      row.status = "invalid scale (must be >= 1)";
      rows.push_back(row);
      prev = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double m_real = std::round(scale * static_cast<double>(base.m));
    row.m = m_real >= 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(m_real);
    if (m_real >= 1e18 || sarm_memory_estimate(row.m, row.n) > options.memory_budget_bytes) {
      row.status = "memory budget exceeded";
      rows.push_back(row);
      prev = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    try {
      SimSpec spec = base;
      spec.m = row.m;
      const SimInstance inst = generate(spec);
      SarmConfig cfg;
      cfg.delta = options.delta_factor * inst.sigma * inst.sigma;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < std::max<std::size_t>(1, options.repeats); ++r) {
        const RegressionFit fit = sarm_fit(inst.X, inst.y, cfg);
        const double per = fit.loop_time / static_cast<double>(std::max<std::size_t>(1, fit.iterations));
        if (per < best) {
          best = per;
          row.iterations = fit.iterations;
          row.loop_time = fit.loop_time;
        }
      }
      row.per_iteration = best;
      if (!std::isnan(prev)) row.ratio = best / prev;
      prev = best;
    } catch (const std::exception& ex) {
      row.status = ex.what();
      prev = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

inline std::string timing_csv(const std::vector<TimingRow>& rows) {
  std::ostringstream os;
  os << "scale,m,n,iterations,loop_time,per_iteration,ratio,status\n";
  for (const auto& r : rows)
    os << detail::fmt(r.scale) << ',' << r.m << ',' << r.n << ',' << r.iterations << ',' << detail::fmt(r.loop_time)
       << ',' << detail::fmt(r.per_iteration) << ',' << (r.ratio ? detail::fmt(*r.ratio) : std::string()) << ','
       << detail::csv_field(r.status) << '\n';
  return os.str();
}

}  // namespace robustfit
