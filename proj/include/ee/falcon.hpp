#pragma once
// Inverse-gap-weighting bandit with epoch-wise exploration driven either by a
// complexity-based excess-risk term or by a data-driven excess-risk bound.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ee/bandit_core.hpp"
#include "ee/concentration.hpp"
#include "ee/excess_risk.hpp"

namespace ee::bandit {

enum class FalconVariant { theoretical, error_estimated };
std::string to_string(FalconVariant v);

// c sqrt(K / max(eps, floor)); eps = +inf gives 0 (pure exploration).
double falcon_gamma(std::size_t K, double epsilon, double c, double floor);

// p(a) = 1 / (K + gamma (f(best) - f(a))) off the greedy arm (lowest index on
// ties); the greedy arm takes the remaining mass.
std::vector<double> igw_action_kernel(std::span<const double> f_hat, double gamma);

// C (d K + ln(1/delta)) / n.
double theoretical_epsilon(std::size_t d, std::size_t K, std::size_t n_total,
                           ConfidenceLevel delta, double C);

struct FalconConfig {
  std::size_t T = 2000;
  double delta = 0.05;
  double C = 2.0;          // constant of the complexity term
  double c = 1.0;          // exploration constant
  double eps_floor = 1e-4;
  double ridge = 1.0;
  double epoch_base = 2.0;
  // Loss of the data-driven bound: predictions clipped to +-pred_clip, labels
  // clipped to +-label_bound, per-arm coefficients in [-coef_bound, coef_bound].
  double pred_clip = 2.0;
  double label_bound = 2.4;
  double coef_bound = 2.0;
  std::size_t retries = 2;
  excess::ExcessRiskConfig bound;

  FalconConfig();
};

enum class EpsilonSource { bound, no_prior_data, solver_failure };
std::string to_string(EpsilonSource s);

struct FalconEpsilon {
  double epsilon;
  EpsilonSource source;
  bool fallback() const { return source != EpsilonSource::bound; }
};

// Bound on the excess risk of the per-arm ridge fit on def_log, estimated on
// err_log. Falls back to theoretical_epsilon(n = |def| + |err|) when def_log is
// empty or the solver fails on every attempt.
FalconEpsilon falcon_ee_epsilon(std::span<const InteractionRecord> def_log,
                                std::span<const InteractionRecord> err_log, std::size_t d,
                                std::size_t K, const FalconConfig& cfg, std::uint64_t seed);

struct FalconRound {
  std::size_t t;        // 1-based round
  double epsilon;
  double gamma;
  double cum_regret;    // sum of best mean minus realized reward
  bool fallback;
};

struct FalconTrajectory {
  FalconVariant variant;
  std::vector<FalconRound> rounds;
  std::vector<InteractionRecord> log;
  std::vector<double> noise;  // per-round reward noise
};

// Contexts, reward noise and the action uniforms depend on `seed` only, so two
// variants run with one seed see identical streams.
FalconTrajectory run_falcon_trial(const LinearBanditEnv& env, FalconVariant variant,
                                  const FalconConfig& cfg, std::uint64_t seed);

struct FalconRow {
  std::size_t trial;
  std::size_t t;
  FalconVariant variant;
  double epsilon;
  double gamma;
  double cum_regret;
  bool fallback;
};

// Paired trials: trial i draws its environment and streams from (seed, i).
std::vector<FalconRow> falcon_experiment(std::size_t d, std::size_t K, double noise_sd,
                                         std::size_t trials, const FalconConfig& cfg,
                                         std::uint64_t seed, unsigned jobs = 0);

}  // namespace ee::bandit
