#include "ee/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ee/oracles.hpp"
#include "ee/parallel.hpp"
#include "ee/random.hpp"

namespace ee::experiments {

std::vector<RademacherRow> rademacher_check_experiment(std::size_t reps,
                                                       const RademacherCheckConfig& cfg,
                                                       std::uint64_t seed, unsigned jobs) {
  if (reps < 1) throw std::invalid_argument("rademacher check needs reps >= 1");
  if (cfg.max_functions < 1 || cfg.support < 1 || cfg.n < 1)
    throw std::invalid_argument("rademacher check needs positive sizes");
  if (!(cfg.bound > 0.0) || !(cfg.deviation > 0.0))
    throw std::invalid_argument("bound and deviation must be positive");
  const double level =
      1.0 - std::exp(-cfg.deviation * cfg.deviation * static_cast<double>(cfg.n) /
                     (4.0 * cfg.bound * cfg.bound));
  auto one = [&](std::size_t rep) {
    Sampler s(make_rng(seed, rep, 0x7a));
    const std::size_t nf = 1 + s.index(cfg.max_functions);
    oracles::FunctionTable domain;
    domain.bound = cfg.bound;
    for (std::size_t f = 0; f < nf; ++f) {
      std::vector<double> row(cfg.support);
      for (auto& v : row) v = s.uniform(-cfg.bound, cfg.bound);
      domain.values.push_back(std::move(row));
    }
    std::vector<double> probs(cfg.support);
    std::exponential_distribution<double> expo(1.0);
    double total = 0.0;
    for (auto& p : probs) total += (p = expo(s.engine()));
    for (auto& p : probs) p /= total;

    std::discrete_distribution<std::size_t> law(probs.begin(), probs.end());
    std::vector<double> mean_def(nf, 0.0), mean_err(nf, 0.0);
    for (auto* means : {&mean_def, &mean_err})
      for (std::size_t i = 0; i < cfg.n; ++i) {
        const std::size_t j = law(s.engine());
        for (std::size_t f = 0; f < nf; ++f) (*means)[f] += domain.values[f][j];
      }
    double disc = 0.0;
    for (std::size_t f = 0; f < nf; ++f)
      disc = std::max(disc, std::abs(mean_def[f] - mean_err[f]) / static_cast<double>(cfg.n));
    const double rad = oracles::population_rademacher(domain, probs, cfg.n);
    return RademacherRow{rep,  nf,
                         cfg.n, disc,
                         rad,  cfg.deviation,
                         disc + cfg.deviation <= 2.0 * rad + 2.0 * cfg.deviation, level};
  };
  return map_replicates(reps, jobs, one);
}

namespace {

using io::Cell;
Cell I(std::size_t v) { return static_cast<std::int64_t>(v); }

}  // namespace

io::Table to_table(std::span<const means::Fig1Row> rows) {
  io::Table t({"alpha", "rep", "true_max", "ee_bound", "union_bound"});
  for (const auto& r : rows) t.add_row({r.alpha, I(r.rep), r.true_max, r.ee_bound, r.union_bound});
  return t;
}

io::Table to_table(std::span<const means::CoverageRow> rows) {
  io::Table t({"alpha", "rep", "xi", "max_error", "covered", "union_bound"});
  for (const auto& r : rows)
    t.add_row({r.alpha, I(r.rep), r.xi, r.max_error, r.covered, r.union_bound});
  return t;
}

io::Table to_table(std::span<const inference::FiniteCoverageRow> rows) {
  io::Table t({"alpha", "rep", "xi", "true_max", "covered"});
  for (const auto& r : rows) t.add_row({r.alpha, I(r.rep), r.xi, r.true_max, r.covered});
  return t;
}

io::Table to_table(std::span<const excess::Fig2aRow> rows) {
  io::Table t({"n", "n_def", "rep", "true_excess", "ee_bound", "ee_bound_max_theta", "vc_bound",
               "iterations", "covered", "truth_retained", "xi_non_increasing"});
  for (const auto& r : rows)
    t.add_row({I(r.n), I(r.n_def), I(r.rep), r.true_excess, r.ee_bound, r.ee_bound_max_theta,
               r.vc_bound, I(r.k_iterations), r.covered, r.truth_retained, r.xi_non_increasing});
  return t;
}

io::Table to_table(std::span<const inference::MultitestRow> rows) {
  io::Table t({"weights", "rep", "fwer", "n_rejected", "n_screened", "xi_w", "rescale_invariant"});
  for (const auto& r : rows)
    t.add_row({inference::to_string(r.weights), I(r.rep), r.fwer, I(r.n_rejected),
               I(r.n_screened), std::isnan(r.xi_w) ? Cell{} : Cell{r.xi_w}, r.rescale_invariant});
  return t;
}

io::Table to_table(std::span<const inference::CrossfitRow> rows) {
  io::Table t({"alpha", "rep", "xi_12", "xi_21", "xi_min", "xi_single", "true_max", "covered"});
  for (const auto& r : rows)
    t.add_row({r.alpha, I(r.rep), r.xi_12, r.xi_21, r.xi_min, r.xi_single, r.true_max, r.covered});
  return t;
}

io::Table to_table(std::span<const bandit::FalconRow> rows) {
  io::Table t({"trial", "t", "variant", "epsilon", "gamma", "cum_regret", "fallback"});
  for (const auto& r : rows)
    t.add_row({I(r.trial), I(r.t), bandit::to_string(r.variant), r.epsilon, r.gamma, r.cum_regret,
               r.fallback});
  return t;
}

io::Table to_table(std::span<const bandit::PipelineEpochRow> rows) {
  io::Table t({"trial", "epoch", "tau", "bootstrap", "pi_tilde_size", "U_elim", "U_con", "eta",
               "M_next", "alpha_next", "realized_cover", "realized_max_inverse", "pi_star_in_g",
               "elim_premise", "con_premise", "cum_regret", "error"});
  for (const auto& r : rows)
    t.add_row({I(r.trial), I(r.epoch), I(r.tau), r.bootstrap, I(r.pi_tilde_size), r.U_elim,
               r.U_con, r.eta, r.M_next, r.alpha_next, r.realized_cover, r.realized_max_inverse,
               r.pi_star_in_g, r.elim_premise, r.con_premise, r.cum_regret,
               r.error.empty() ? Cell{} : Cell{r.error}});
  return t;
}

io::Table to_table(std::span<const RademacherRow> rows) {
  io::Table t({"rep", "n_functions", "n", "discrepancy", "rademacher", "deviation", "holds",
               "level"});
  for (const auto& r : rows)
    t.add_row({I(r.rep), I(r.n_functions), I(r.n), r.discrepancy, r.rademacher, r.deviation,
               r.holds, r.level});
  return t;
}

}  // namespace ee::experiments
