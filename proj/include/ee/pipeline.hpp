#pragma once
// Modular exploration pipeline: policy-based and reward-model-based error
// estimates, arm elimination, conformal arm sets, the next exploration kernel
// and its cover bounds.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ee/bandit_core.hpp"
#include "ee/concentration.hpp"
#include "ee/core.hpp"

namespace ee::bandit {

// A bound whose formula divides by zero (e.g. a zero reward-model error).
struct UndefinedBoundError : std::domain_error {
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------- split

struct PipelineSplit {
  std::vector<InteractionRecord> def;
  std::vector<InteractionRecord> err_elim;
  std::vector<InteractionRecord> err_con;
  std::vector<InteractionRecord> err_B;
  std::size_t err_epoch = 0;  // the single epoch whose kernel logged the error part
  double alpha_err = 1.0;
  double M_err = 1.0;

  bool any_empty() const { return err_elim.empty() || err_con.empty() || err_B.empty(); }
};

// Defining part: the first floor((1 - lambda) tau) rounds. The rest is cut into
// three consecutive parts of floor(|err| / 3), the remainder going to the last.
// Throws when the error part mixes epochs.
PipelineSplit pipeline_split(std::span<const InteractionRecord> log, double lambda);

// ---------------------------------------------------------------- oracles

struct PipelineOracles {
  std::vector<double> R_elim;  // policy value estimate per policy of the class
  std::size_t pi_elim = 0;
  std::function<double(std::span<const double>, std::size_t)> f_hat;  // in [0, 1]
  std::size_t pi_con = 0;
  std::function<double(std::span<const double>, std::size_t)> ci_mean;
  std::function<double(std::span<const double>, std::size_t)> ci_width;
};

// Average of r 1{pi(x) = a} / p_of_a.
double ips_value(std::span<const std::size_t> pi_actions, std::span<const InteractionRecord> log);

// ---------------------------------------------------------------- error estimates

struct PolicyErrorEstimate {
  double U = 0.0;
  double width = 0.0;       // per-policy width (constant over the class)
  double cover_hat = 0.0;   // estimated cover of the reference policy
  std::vector<std::size_t> members;  // class = pi_tilde plus the reference policy
  LocalizationTrace trace;
};

// u(pi) = width + ips(pi - pi_elim on S_err_elim) - (R_elim(pi) - R_elim(pi_elim)),
// width = freedman(delta, n, V(p_err, pi_elim), alpha_err); localized with c = 0.
PolicyErrorEstimate cb_elim_error(const PolicyClass& cls, std::span<const std::size_t> pi_tilde,
                                  std::span<const InteractionRecord> err_elim,
                                  const PipelineOracles& oracles, const Kernel& p_err,
                                  double alpha_err, ConfidenceLevel delta);

// Same localization with the reward-model gap averaged over the S_err_con
// contexts as the defining estimate, run at delta / 2, then U = xi +
// sqrt(2 ln(2 / delta) / n).
PolicyErrorEstimate cb_con_error(const PolicyClass& cls, std::span<const std::size_t> pi_tilde,
                                 std::span<const InteractionRecord> err_con,
                                 const PipelineOracles& oracles, const Kernel& p_err,
                                 double alpha_err, ConfidenceLevel delta);

// ---------------------------------------------------------------- arm elimination

// g(x) = {a : mean(x, a) + gamma width(x, a) >= max_b (mean(x, b) - gamma width(x, b))},
// or every arm once `all_arms` is set.
struct ArmSets {
  std::function<double(std::span<const double>, std::size_t)> mean;
  std::function<double(std::span<const double>, std::size_t)> width;
  std::size_t K = 0;
  double gamma = 1.0;
  bool all_arms = false;

  std::vector<std::uint8_t> at(std::span<const double> x) const;
};

// Doubles gamma from 1 until every policy pi of pi_tilde with
// R_elim(pi_elim) - R_elim(pi) <= U_elim plays inside g on all check contexts.
// Past gamma_cap the sets become all arms.
ArmSets arm_eliminator(const PolicyClass& cls, std::span<const std::size_t> pi_tilde,
                       const PipelineOracles& oracles, double U_elim,
                       std::span<const Context> check_contexts, double gamma_cap = 1099511627776.0);

// ---------------------------------------------------------------- conformal sets and kernel

// What the kernel needs at one context.
struct ContextArms {
  std::vector<std::uint8_t> g_hat;  // membership mask over arms
  std::vector<double> f_hat;        // reward model, in [0, 1]
  std::size_t pi_con = 0;           // arm played by pi_con here
};

struct ConformalArmSet {
  std::function<ContextArms(std::span<const double>)> at;
  double U_con = 0.0;
};

// {a in g(x) : f(x, pi_con(x)) - f(x, a) <= U_con / zeta}.
std::vector<std::uint8_t> conformal_set(const ContextArms& c, double U_con, double zeta);

// (1 - beta_max) Unif(C(x, beta_max / eta)) + integral over beta in [0, beta_max]
// of Unif(C(x, beta / eta)), summed exactly over the breakpoints
// beta_a = eta U_con / gap_a. An empty conformal set contributes Unif(g(x)).
std::vector<double> exploration_kernel(const ContextArms& c, double U_con, double eta,
                                       double beta_max);

struct CoverBounds {
  double M = 0.0;
  double alpha = 0.0;
  double alpha_sets = 0.0;      // average over S_err_B of |C| / (1 - b + b |C| / |g|)
  double alpha_tail = 0.0;      // max |g| / eta
  double alpha_deviation = 0.0; // sqrt(max |g| ln(3 / delta) / (b |S_err_B|))
  std::size_t max_g = 0;
};

// M = max |g| / min(1, eta U_con); alpha = sum of the three parts. err_B holds
// the states of the S_err_B contexts; the max of |g| also runs over `others`.
CoverBounds cover_and_M_bounds(std::span<const ContextArms> err_B,
                               std::span<const ContextArms> others, double U_con, double eta,
                               double beta_max, ConfidenceLevel delta);

// ---------------------------------------------------------------- end to end

struct PipelineConfig {
  std::size_t T = 512;
  double delta = 0.05;
  double lambda = 0.5;
  double beta_max = 0.5;
  double epoch_base = 2.0;
  double ridge = 1.0;
  std::optional<double> fixed_eta;  // otherwise grid search over 1..K
};

struct PipelineEpochRow {
  std::size_t trial = 0;
  std::size_t epoch = 0;        // epoch whose kernel this row defines
  std::size_t tau = 0;          // rounds observed
  bool bootstrap = false;       // kept the uniform kernel
  std::size_t pi_tilde_size = 0;
  double U_elim = 0.0;
  double U_con = 0.0;
  double eta = 0.0;
  double M_next = 0.0;
  double alpha_next = 0.0;
  double realized_cover = 0.0;       // exact V(p_next, pi*) over the context pool
  double realized_max_inverse = 0.0; // exact max_x 1 / p_next(pi*(x) | x)
  bool pi_star_in_g = true;          // on every pool context
  bool elim_premise = true;          // R_elim(pi_elim) - R_elim(pi*) <= U_elim
  bool con_premise = true;           // exact R_f(pi_con) - R_f(pi*) <= U_con
  double cum_regret = 0.0;           // sum of best mean minus mean of the played arm
  std::string error;                 // nonempty when the step failed
};

// Runs the epoch loop on an environment with a context pool; every epoch end,
// including T, produces a row. pi* is the best policy of `cls` on the pool.
std::vector<PipelineEpochRow> run_pipeline_epochs(const LinearBanditEnv& env,
                                                  const PolicyClass& cls,
                                                  const PipelineConfig& cfg, std::uint64_t seed);

struct PipelineEnvConfig {
  std::size_t d = 3;
  std::size_t K = 3;
  std::size_t policies = 32;
  std::size_t pool = 64;
  double reward_offset = 0.5;
  double reward_scale = 0.2;
  double noise_sd = 0.05;  // uniform noise, so rewards stay inside [0, 1]
};

std::vector<PipelineEpochRow> pipeline_experiment(const PipelineEnvConfig& env_cfg,
                                                  std::size_t trials, const PipelineConfig& cfg,
                                                  std::uint64_t seed, unsigned jobs = 0);

}  // namespace ee::bandit
