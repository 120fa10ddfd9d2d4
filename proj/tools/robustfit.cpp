// robustfit: command-line experiment runner.
//
//   robustfit simulate --config plan.json --reps 20 --out results/
//   robustfit forecast --attack PosUniform --fractions 0,10,20,40
//   robustfit trace    --type T1 --n 64 --p 0.3 --out trace.csv
//   robustfit timing   --n 64 --m 5120 --scales 1,2
//   robustfit verify   --seeds 50

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "robustfit/robustfit.hpp"

namespace {

using namespace robustfit;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::vector<std::string> methods;
  std::string out;
  std::optional<std::size_t> parallel;
  std::optional<double> delta_factor;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment plan")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "base seed; trial t uses seed + t");
  cmd->add_option("--reps", f.reps, "repetitions per cell")->check(CLI::PositiveNumber);
  cmd->add_option("--methods", f.methods, "comma-separated method list")->delimiter(',');
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--parallel", f.parallel, "worker threads (default: $ROBUSTFIT_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--delta-factor", f.delta_factor, "delta = factor * sigma^2");
}

std::size_t thread_count(const std::optional<std::size_t>& flag, std::size_t from_config) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ROBUSTFIT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring ROBUSTFIT_THREADS=" << env << "\n";
  }
  return from_config;
}

void apply_common(const CommonFlags& f, ExperimentPlan& plan) {
  if (f.seed) plan.base_seed = *f.seed;
  if (f.reps) plan.repetitions = *f.reps;
  if (!f.methods.empty()) plan.methods = f.methods;
  if (!f.out.empty()) plan.out_dir = f.out;
  if (f.delta_factor) plan.delta_factor = *f.delta_factor;
  plan.parallel = thread_count(f.parallel, plan.parallel);
}

int finish_plan(const ExperimentPlan& plan) {
  const PlanResult result = run_plan(plan);
  std::cout << aggregate_csv(result);
  std::size_t failed = 0;
  for (const auto& t : result.trials) failed += t.ok() ? 0 : 1;
  if (failed) std::cerr << failed << " trial(s) failed; see status column in trials.csv\n";
  if (!plan.out_dir.empty())
    std::cerr << "wrote " << plan.out_dir << "/{trials,timings,aggregate}.csv and aggregate.json\n";
  return 0;
}

SimSpec sim_from_flags(const std::string& type, std::size_t n, std::optional<std::size_t> m, double p,
                       std::optional<double> kappa, std::uint64_t seed) {
  SimSpec s;
  s.type = parse_sim_type(type);
  s.n = n;
  s.m = m ? *m : default_rows(s.type);
  s.p = p;
  s.kappa = kappa;
  if (s.type == SimType::T5 && !s.kappa) s.kappa = 16.0;
  s.seed = seed;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust linear regression under gross response corruption"};
  app.require_subcommand(1);

  // simulate
  CommonFlags sim_flags;
  std::string sim_type = "T1";
  std::size_t sim_n = 16;
  std::optional<std::size_t> sim_m;
  std::vector<double> sim_p;
  std::optional<double> sim_kappa;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo comparison on synthetic corruption scenarios");
  add_common(simulate, sim_flags);
  simulate->add_option("--type", sim_type, "scenario type T1..T6 (when no --config)");
  simulate->add_option("--n", sim_n, "feature count");
  simulate->add_option("--m", sim_m, "sample count (default per type)");
  simulate->add_option("--p", sim_p, "corruption fractions, comma-separated")->delimiter(',');
  simulate->add_option("--kappa", sim_kappa, "T5 outlier scale");

  // forecast
  CommonFlags fc_flags;
  std::string fc_train, fc_test, fc_zone = "synthetic", fc_attack = "PosUniform";
  std::vector<double> fc_fractions;
  std::optional<double> fc_a, fc_b;
  auto* forecast = app.add_subcommand("forecast", "Load forecasting under training-data attacks");
  add_common(forecast, fc_flags);
  forecast->add_option("--train", fc_train, "training CSV (timestamp,load,temperature)");
  forecast->add_option("--test", fc_test, "test CSV");
  forecast->add_option("--zone", fc_zone, "zone label for reports");
  forecast->add_option("--attack", fc_attack, "PosUniform, PosGaussian or NegUniform");
  forecast->add_option("--fractions", fc_fractions, "attacked percentages, comma-separated")->delimiter(',');
  forecast->add_option("--a", fc_a, "uniform lower bound or Gaussian mean (percent)");
  forecast->add_option("--b", fc_b, "uniform upper bound or Gaussian std (percent)");

  // trace
  std::string tr_type = "T1", tr_method = "SARM", tr_out;
  std::size_t tr_n = 64;
  double tr_p = 0.3, tr_delta_factor = 6.0;
  std::uint64_t tr_seed = 0;
  auto* trace = app.add_subcommand("trace", "Single fit with convergence diagnostics");
  trace->add_option("--type", tr_type, "scenario type");
  trace->add_option("--n", tr_n, "feature count");
  trace->add_option("--p", tr_p, "corruption fraction");
  trace->add_option("--seed", tr_seed, "instance seed");
  trace->add_option("--method", tr_method, "SARM or TSSARM");
  trace->add_option("--delta-factor", tr_delta_factor, "delta = factor * sigma^2");
  trace->add_option("--out", tr_out, "trace CSV path");

  // timing
  std::string tm_type = "T1", tm_out;
  std::size_t tm_n = 64, tm_repeats = 3;
  std::optional<std::size_t> tm_m;
  std::vector<double> tm_scales{1.0, 2.0};
  double tm_p = 0.25;
  std::uint64_t tm_seed = 0;
  auto* timing = app.add_subcommand("timing", "Per-iteration time as the sample count grows");
  timing->add_option("--type", tm_type, "scenario type");
  timing->add_option("--n", tm_n, "feature count");
  timing->add_option("--m", tm_m, "base sample count");
  timing->add_option("--p", tm_p, "corruption fraction");
  timing->add_option("--scales", tm_scales, "sample-count multipliers, comma-separated")->delimiter(',');
  timing->add_option("--repeats", tm_repeats, "fits per scale (minimum time kept)");
  timing->add_option("--seed", tm_seed, "instance seed");
  timing->add_option("--out", tm_out, "timing CSV path");

  // verify
  VerifyOptions vf;
  std::string vf_type = "T1", vf_out;
  auto* verify = app.add_subcommand("verify", "Descent, step-bound, gradient and prox checks over a seed sweep");
  verify->add_option("--type", vf_type, "scenario type");
  verify->add_option("--n", vf.n, "feature count");
  verify->add_option("--p", vf.p, "corruption fraction");
  verify->add_option("--seeds", vf.seeds, "number of simulated instances");
  verify->add_option("--seed", vf.base_seed, "base seed");
  verify->add_option("--out", vf_out, "report JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      ExperimentPlan plan;
      if (!sim_flags.config.empty()) {
        plan = load_plan(sim_flags.config);
        if (plan.kind != PlanKind::Simulate) throw Error(ErrorCode::InvalidConfig, "config is not a simulate plan");
      } else {
        plan.scenarios = {sim_from_flags(sim_type, sim_n, sim_m, 0.0, sim_kappa, 0)};
      }
      if (!sim_p.empty()) plan.p_grid = sim_p;
      apply_common(sim_flags, plan);
      return finish_plan(plan);
    }

    if (forecast->parsed()) {
      ExperimentPlan plan;
      plan.kind = PlanKind::Forecast;
      plan.repetitions = 1;
      plan.methods = {"MLR", "SARM", "TSSARM"};
      if (!fc_flags.config.empty()) {
        plan = load_plan(fc_flags.config);
        if (plan.kind != PlanKind::Forecast) throw Error(ErrorCode::InvalidConfig, "config is not a forecast plan");
      }
      if (!fc_train.empty() || !fc_test.empty()) {
        plan.forecast.synthetic.reset();
        plan.forecast.train_csv = fc_train;
        plan.forecast.test_csv = fc_test;
      }
      plan.forecast.zone = fc_zone;
      if (!fc_fractions.empty() || plan.attacks.empty()) {
        AttackGrid grid;
        grid.kind = parse_attack_kind(fc_attack);
        if (grid.kind == AttackKind::PosGaussian) {
          grid.a = 30.0;
          grid.b = 10.0;
        }
        if (fc_a) grid.a = *fc_a;
        if (fc_b) grid.b = *fc_b;
        grid.fractions = fc_fractions.empty() ? std::vector<double>{0.0, 10.0, 20.0, 40.0} : fc_fractions;
        plan.attacks = {grid};
      }
      apply_common(fc_flags, plan);
      return finish_plan(plan);
    }

    if (trace->parsed()) {
      const SimInstance inst = generate(sim_from_flags(tr_type, tr_n, std::nullopt, tr_p, std::nullopt, tr_seed));
      SarmConfig cfg;
      cfg.delta = tr_delta_factor * inst.sigma * inst.sigma;
      cfg.record_trace = true;
      const std::string method = canonical_method(tr_method);
      RegressionFit fit;
      if (method == "SARM")
        fit = sarm_fit(inst.X, inst.y, cfg);
      else if (method == "TSSARM")
        fit = tssarm_fit(inst.X, inst.y, TssarmConfig::with_defaults(cfg));
      else
        throw Error(ErrorCode::InvalidConfig, "trace supports SARM and TSSARM");
      if (!tr_out.empty()) export_trace(fit, tr_out);
      nlohmann::json summary{{"method", method},
                             {"iterations", fit.iterations},
                             {"converged", fit.converged},
                             {"relative_error", relative_l2_error(fit.w_hat, inst.w_true)},
                             {"descent_violations", check_descent(*fit.trace)},
                             {"zstep_bound_violations", check_zstep_bound(*fit.trace)},
                             {"subgradient_constant", subgradient_ratio(*fit.trace)}};
      summary["tail_ratio"] = fit.trace->size() >= 20 ? nlohmann::json(tail_ratio(*fit.trace)) : nlohmann::json(nullptr);
      if (fit.two_stage) summary["rank"] = fit.two_stage->rank;
      std::cout << summary.dump(2) << "\n";
      if (tr_out.empty()) std::cout << trace_csv(*fit.trace);
      return 0;
    }

    if (timing->parsed()) {
      SimSpec base = sim_from_flags(tm_type, tm_n, tm_m, tm_p, std::nullopt, tm_seed);
      if (!tm_m) base.m = 10 * tm_n;
      TimingOptions opts;
      opts.repeats = tm_repeats;
      const std::string csv = timing_csv(time_scaling_run(base, tm_scales, opts));
      if (!tm_out.empty()) write_text(tm_out, csv);
      std::cout << csv;
      return 0;
    }

    if (verify->parsed()) {
      vf.type = parse_sim_type(vf_type);
      const TheoryReport report = verify_sweep(vf);
      const std::string text = nlohmann::json(report).dump(2) + "\n";
      if (!vf_out.empty()) write_text(vf_out, text);
      std::cout << text;
      return report.descent_violations == 0 && report.zstep_bound_violations == 0 ? 0 : 1;
    }
  } catch (const Error& ex) {
    std::cerr << "error [" << to_string(ex.code()) << "]: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
