// Command-line runner for the error-estimation experiments.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ee/experiments.hpp"
#include "ee/table.hpp"

namespace {

struct Common {
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = 7;
  unsigned jobs = 0;
  bool smoke = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app->add_option("--out", c.out, "Output file (default: standard output)");
  app->add_option("--seed", c.seed, "Base seed")->capture_default_str();
  app->add_option("--jobs", c.jobs, "Worker threads, 0 for all cores")->capture_default_str();
  app->add_flag("--smoke", c.smoke, "Tiny parameters that still run the full code path");
}

void emit(const Common& c, const ee::io::Table& t) {
  std::ostringstream buf;
  if (c.format == "json") ee::io::write_json(buf, t);
  else ee::io::write_csv(buf, t);
  if (c.out.empty()) {
    std::cout << buf.str();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + c.out + "' for writing");
  f << buf.str();
  f.close();
  if (!f) throw std::runtime_error("write to '" + c.out + "' failed");
}

// One line on stderr: command, rows, then mean of each listed column.
void report(const std::string& cmd, const ee::io::Table& t, std::vector<std::string> cols,
            std::vector<std::string> by = {}) {
  const auto s = ee::io::summarize(t, by, cols);
  std::cerr << cmd << ": " << t.rows.size() << " rows";
  const std::size_t mean_col = s.column_index("mean");
  for (const auto& row : s.rows) {
    std::cerr << ";";
    for (std::size_t i = 0; i < by.size() + 1; ++i) std::cerr << ' ' << ee::io::format_cell(row[i]);
    std::cerr << " mean=" << ee::io::format_cell(row[mean_col]);
  }
  std::cerr << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ee;
  CLI::App app{"Data-driven error estimation experiments"};
  app.require_subcommand(1);

  // finite-sim
  Common fs_c;
  std::vector<double> fs_alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t fs_tasks = 500, fs_reps = 100;
  double fs_delta = 0.1;
  bool fs_coverage = false;
  auto* fs = app.add_subcommand("finite-sim", "Maximum of correlated Gaussian errors");
  add_common(fs, fs_c);
  fs->add_option("--alphas", fs_alphas, "Correlation grid")->delimiter(',')->capture_default_str();
  fs->add_option("--tasks", fs_tasks)->capture_default_str();
  fs->add_option("--reps", fs_reps)->capture_default_str();
  fs->add_option("--delta", fs_delta)->capture_default_str();
  fs->add_flag("--coverage", fs_coverage,
               "Coverage of the bound over an equicorrelated class with known targets");

  // means-ci
  Common mc_c;
  double mc_alpha = 0.5, mc_delta = 0.05;
  std::size_t mc_tasks = 100, mc_n = 200, mc_reps = 200;
  auto* mc = app.add_subcommand("means-ci", "Joint coverage of simultaneous intervals for means");
  add_common(mc, mc_c);
  mc->add_option("--alpha", mc_alpha)->capture_default_str();
  mc->add_option("--tasks", mc_tasks)->capture_default_str();
  mc->add_option("--n", mc_n, "Samples per split")->capture_default_str();
  mc->add_option("--reps", mc_reps)->capture_default_str();
  mc->add_option("--delta", mc_delta)->capture_default_str();

  // excess-risk
  Common er_c;
  excess::Fig2aConfig er_cfg;
  std::vector<std::size_t> er_ns{100, 400, 1000};
  std::size_t er_reps = 200;
  double er_delta = 0.05;
  auto* er = app.add_subcommand("excess-risk", "Excess-risk bound against the VC baseline");
  add_common(er, er_c);
  er->add_option("--d", er_cfg.d)->capture_default_str();
  er->add_option("--ns", er_ns, "Dataset sizes before splitting")->delimiter(',')->capture_default_str();
  er->add_option("--reps", er_reps)->capture_default_str();
  er->add_option("--delta", er_delta)->capture_default_str();

  // multitest
  Common mt_c;
  std::string mt_weights = "both";
  std::size_t mt_tasks = 200, mt_n = 100, mt_reps = 1000;
  double mt_delta = 0.05;
  auto* mt = app.add_subcommand("multitest", "Family-wise error under the global null");
  add_common(mt, mt_c);
  mt->add_option("--weights", mt_weights)
      ->check(CLI::IsMember({"unit", "screened", "both"}))
      ->capture_default_str();
  mt->add_option("--tasks", mt_tasks)->capture_default_str();
  mt->add_option("--n", mt_n, "Samples per split")->capture_default_str();
  mt->add_option("--reps", mt_reps)->capture_default_str();
  mt->add_option("--delta", mt_delta)->capture_default_str();

  // crossfit
  Common cf_c;
  double cf_alpha = 0.5, cf_delta = 0.1;
  std::size_t cf_tasks = 500, cf_reps = 500;
  auto* cf = app.add_subcommand("crossfit", "Bound from both split directions");
  add_common(cf, cf_c);
  cf->add_option("--alpha", cf_alpha)->capture_default_str();
  cf->add_option("--tasks", cf_tasks)->capture_default_str();
  cf->add_option("--reps", cf_reps)->capture_default_str();
  cf->add_option("--delta", cf_delta)->capture_default_str();

  // falcon
  Common fa_c;
  bandit::FalconConfig fa_cfg;
  std::size_t fa_d = 10, fa_K = 5, fa_trials = 10;
  double fa_noise = 0.1;
  auto* fa = app.add_subcommand("falcon", "Paired regret of the two exploration schedules");
  add_common(fa, fa_c);
  fa->add_option("--d", fa_d)->capture_default_str();
  fa->add_option("--K", fa_K)->capture_default_str();
  fa->add_option("--T", fa_cfg.T)->capture_default_str();
  fa->add_option("--trials", fa_trials)->capture_default_str();
  fa->add_option("--delta", fa_cfg.delta)->capture_default_str();
  fa->add_option("--C", fa_cfg.C)->capture_default_str();
  fa->add_option("--c", fa_cfg.c)->capture_default_str();
  fa->add_option("--noise-sd", fa_noise)->capture_default_str();

  // pipeline
  Common pl_c;
  bandit::PipelineEnvConfig pl_env;
  bandit::PipelineConfig pl_cfg;
  std::size_t pl_trials = 500;
  auto* pl = app.add_subcommand("pipeline", "Modular exploration pipeline, per-epoch diagnostics");
  add_common(pl, pl_c);
  pl->add_option("--d", pl_env.d)->capture_default_str();
  pl->add_option("--K", pl_env.K)->capture_default_str();
  pl->add_option("--policies", pl_env.policies)->capture_default_str();
  pl->add_option("--pool", pl_env.pool, "Number of distinct contexts")->capture_default_str();
  pl->add_option("--T", pl_cfg.T)->capture_default_str();
  pl->add_option("--trials", pl_trials)->capture_default_str();
  pl->add_option("--delta", pl_cfg.delta)->capture_default_str();
  pl->add_option("--lambda", pl_cfg.lambda, "Error share of each split")->capture_default_str();
  pl->add_option("--beta-max", pl_cfg.beta_max)->capture_default_str();

  // rademacher-check
  Common rc_c;
  experiments::RademacherCheckConfig rc_cfg;
  std::size_t rc_reps = 500;
  auto* rc = app.add_subcommand("rademacher-check",
                                "Split discrepancy against twice the Rademacher complexity");
  add_common(rc, rc_c);
  rc->add_option("--reps", rc_reps)->capture_default_str();
  rc->add_option("--functions", rc_cfg.max_functions, "Largest class size")->capture_default_str();
  rc->add_option("--n", rc_cfg.n, "Samples per split")->capture_default_str();
  rc->add_option("--support", rc_cfg.support)->capture_default_str();
  rc->add_option("--deviation", rc_cfg.deviation)->capture_default_str();

  // summarize
  Common sm_c;
  std::string sm_in;
  std::vector<std::string> sm_by, sm_values;
  auto* sm = app.add_subcommand("summarize", "Mean, SE and 95% band per group");
  sm->add_option("input", sm_in, "CSV written by another command")->required();
  sm->add_option("--by", sm_by, "Grouping columns")->delimiter(',');
  sm->add_option("--values", sm_values, "Columns to aggregate (default: all numeric)")
      ->delimiter(',');
  sm->add_option("--format", sm_c.format)->check(CLI::IsMember({"csv", "json"}));
  sm->add_option("--out", sm_c.out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fs->parsed()) {
      if (fs_c.smoke) fs_tasks = 50, fs_reps = 5;
      const ConfidenceLevel delta(fs_delta);
      if (fs_coverage) {
        std::vector<inference::FiniteCoverageRow> rows;
        for (double a : fs_alphas) {
          auto r = inference::finite_coverage_experiment(a, fs_tasks, fs_reps, delta, fs_c.seed,
                                                         fs_c.jobs);
          rows.insert(rows.end(), r.begin(), r.end());
        }
        const auto t = experiments::to_table(std::span<const inference::FiniteCoverageRow>(rows));
        emit(fs_c, t);
        report("finite-sim --coverage", t, {"covered"}, {"alpha"});
      } else {
        const auto rows =
            means::fig1_experiment(fs_alphas, fs_tasks, fs_reps, delta, fs_c.seed, fs_c.jobs);
        const auto t = experiments::to_table(std::span<const means::Fig1Row>(rows));
        emit(fs_c, t);
        report("finite-sim", t, {"ee_bound"}, {"alpha"});
      }
    } else if (mc->parsed()) {
      if (mc_c.smoke) mc_tasks = 10, mc_n = 20, mc_reps = 5;
      const auto rows = means::means_coverage_experiment(mc_alpha, mc_tasks, mc_n, mc_reps,
                                                         ConfidenceLevel(mc_delta), mc_c.seed,
                                                         mc_c.jobs);
      const auto t = experiments::to_table(std::span<const means::CoverageRow>(rows));
      emit(mc_c, t);
      report("means-ci", t, {"covered", "xi"});
    } else if (er->parsed()) {
      if (er_c.smoke) {
        er_ns = {40, 80};
        er_reps = 2;
        er_cfg.d = 3;
      }
      const auto rows = excess::fig2a_experiment(er_ns, er_reps, ConfidenceLevel(er_delta),
                                                 er_c.seed, er_cfg, er_c.jobs);
      const auto t = experiments::to_table(std::span<const excess::Fig2aRow>(rows));
      emit(er_c, t);
      report("excess-risk", t, {"ee_bound", "vc_bound"}, {"n"});
    } else if (mt->parsed()) {
      if (mt_c.smoke) mt_tasks = 20, mt_n = 20, mt_reps = 10;
      std::vector<inference::MultitestRow> rows;
      for (auto w : {inference::WeightChoice::unit, inference::WeightChoice::screened}) {
        if (mt_weights != "both" && mt_weights != inference::to_string(w)) continue;
        auto r = inference::multitest_experiment(w, mt_tasks, mt_n, mt_reps,
                                                 ConfidenceLevel(mt_delta), mt_c.seed, mt_c.jobs);
        rows.insert(rows.end(), r.begin(), r.end());
      }
      const auto t = experiments::to_table(std::span<const inference::MultitestRow>(rows));
      emit(mt_c, t);
      report("multitest", t, {"fwer"}, {"weights"});
    } else if (cf->parsed()) {
      if (cf_c.smoke) cf_tasks = 50, cf_reps = 5;
      const auto rows = inference::crossfit_experiment(cf_alpha, cf_tasks, cf_reps,
                                                       ConfidenceLevel(cf_delta), cf_c.seed,
                                                       cf_c.jobs);
      const auto t = experiments::to_table(std::span<const inference::CrossfitRow>(rows));
      emit(cf_c, t);
      report("crossfit", t, {"xi_min", "xi_single", "covered"});
    } else if (fa->parsed()) {
      if (fa_c.smoke) {
        fa_d = 3;
        fa_K = 3;
        fa_cfg.T = 64;
        fa_trials = 2;
      }
      const auto rows =
          bandit::falcon_experiment(fa_d, fa_K, fa_noise, fa_trials, fa_cfg, fa_c.seed, fa_c.jobs);
      const auto t = experiments::to_table(std::span<const bandit::FalconRow>(rows));
      emit(fa_c, t);
      io::Table last(t.columns);
      for (const auto& r : rows)
        if (r.t == fa_cfg.T) last.add_row(t.rows[&r - rows.data()]);
      report("falcon", last, {"cum_regret"}, {"variant"});
    } else if (pl->parsed()) {
      if (pl_c.smoke) {
        pl_cfg.T = 128;
        pl_trials = 3;
      }
      const auto rows = bandit::pipeline_experiment(pl_env, pl_trials, pl_cfg, pl_c.seed, pl_c.jobs);
      const auto t = experiments::to_table(std::span<const bandit::PipelineEpochRow>(rows));
      emit(pl_c, t);
      report("pipeline", t, {"alpha_next", "realized_cover", "pi_star_in_g"});
    } else if (rc->parsed()) {
      if (rc_c.smoke) rc_reps = 20;
      const auto rows = experiments::rademacher_check_experiment(rc_reps, rc_cfg, rc_c.seed, rc_c.jobs);
      const auto t = experiments::to_table(std::span<const experiments::RademacherRow>(rows));
      emit(rc_c, t);
      report("rademacher-check", t, {"holds", "level"});
    } else if (sm->parsed()) {
      std::ifstream f(sm_in, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open '" + sm_in + "'");
      const auto in = io::read_csv(f);
      const auto t = io::summarize(in, sm_by, sm_values);
      emit(sm_c, t);
      std::cerr << "summarize: " << in.rows.size() << " rows in, " << t.rows.size()
                << " rows out\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
