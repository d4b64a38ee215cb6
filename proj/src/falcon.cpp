#include "ee/falcon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ee/core.hpp"
#include "ee/parallel.hpp"
#include "ee/random.hpp"
#include "ee/solver.hpp"

namespace ee::bandit {

std::string to_string(FalconVariant v) {
  return v == FalconVariant::theoretical ? "theoretical" : "error_estimated";
}

std::string to_string(EpsilonSource s) {
  switch (s) {
    case EpsilonSource::bound: return "bound";
    case EpsilonSource::no_prior_data: return "no_prior_data";
    case EpsilonSource::solver_failure: return "solver_failure";
  }
  return "unknown";
}

double falcon_gamma(std::size_t K, double epsilon, double c, double floor) {
  if (K < 2) throw std::invalid_argument("falcon_gamma needs K >= 2");
  if (!(floor > 0.0)) throw std::invalid_argument("epsilon floor must be positive");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  return c * std::sqrt(static_cast<double>(K) / std::max(epsilon, floor));
}

std::vector<double> igw_action_kernel(std::span<const double> f_hat, double gamma) {
  if (f_hat.empty()) throw std::invalid_argument("igw kernel needs at least one arm");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  const std::size_t K = f_hat.size();
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(f_hat.begin(), f_hat.end()) - f_hat.begin());
  std::vector<double> p(K, 0.0);
  double rest = 0.0;
  for (std::size_t a = 0; a < K; ++a) {
    if (a == best) continue;
    p[a] = 1.0 / (static_cast<double>(K) + gamma * (f_hat[best] - f_hat[a]));
    rest += p[a];
  }
  p[best] = 1.0 - rest;
  return p;
}

double theoretical_epsilon(std::size_t d, std::size_t K, std::size_t n_total,
                           ConfidenceLevel delta, double C) {
  if (n_total < 1) throw std::invalid_argument("theoretical_epsilon needs n >= 1");
  return C * (static_cast<double>(d * K) + std::log(1.0 / delta.value())) /
         static_cast<double>(n_total);
}

FalconConfig::FalconConfig() {
  bound.solver.max_iterations = 200;
  bound.compute_max_theta = false;
}

namespace {

std::vector<excess::LabeledSample> to_samples(std::span<const InteractionRecord> log,
                                              double label_bound) {
  std::vector<excess::LabeledSample> out;
  out.reserve(log.size());
  for (const auto& r : log)
    out.push_back({r.x, std::clamp(r.r, -label_bound, label_bound), r.a});
  return out;
}

}  // namespace

FalconEpsilon falcon_ee_epsilon(std::span<const InteractionRecord> def_log,
                                std::span<const InteractionRecord> err_log, std::size_t d,
                                std::size_t K, const FalconConfig& cfg, std::uint64_t seed) {
  const ConfidenceLevel delta(cfg.delta);
  const std::size_t n_total = def_log.size() + err_log.size();
  const auto theory = [&] {
    return theoretical_epsilon(d, K, std::max<std::size_t>(n_total, 1), delta, cfg.C);
  };
  if (def_log.empty() || err_log.empty()) return {theory(), EpsilonSource::no_prior_data};

  // The bound needs equal parts: keep the most recent defining rounds and the
  // earliest error rounds.
  const std::size_t n = std::min(def_log.size(), err_log.size());
  def_log = def_log.subspan(def_log.size() - n);
  err_log = err_log.first(n);

  const ArmRidgeModel fit(def_log, d, K, cfg.ridge, false);
  std::vector<double> g_def;
  g_def.reserve(d * K);
  for (std::size_t a = 0; a < K; ++a) {
    const auto s = fit.slope(a);
    g_def.insert(g_def.end(), s.begin(), s.end());
  }
  const auto def_samples = to_samples(def_log, cfg.label_bound);
  const auto err_samples = to_samples(err_log, cfg.label_bound);
  const excess::Dataset def(def_samples, d, K), err(err_samples, d, K);
  const excess::ClippedLinearClass cls{d, K, cfg.coef_bound, cfg.pred_clip, cfg.label_bound};

  for (std::size_t attempt = 0; attempt <= cfg.retries; ++attempt) {
    excess::ExcessRiskConfig bc = cfg.bound;
    bc.solver.seed = derive_seed(seed, attempt, 0xfa1c);
    try {
      const auto rep = excess::excess_risk_bound(cls, g_def, def, err, delta, bc);
      return {std::max(0.0, rep.bound_localized), EpsilonSource::bound};
    } catch (const SolverTimeoutError&) {
    } catch (const SolverInfeasibleError&) {
    } catch (const EmptyLocalizedClassError&) {
    }
  }
  return {theory(), EpsilonSource::solver_failure};
}

FalconTrajectory run_falcon_trial(const LinearBanditEnv& env, FalconVariant variant,
                                  const FalconConfig& cfg, std::uint64_t seed) {
  env.validate();
  if (cfg.T < 2) throw std::invalid_argument("run_falcon_trial needs T >= 2");
  const std::size_t K = env.K, d = env.d;
  const auto schedule = epoch_schedule(cfg.T, cfg.epoch_base);
  Sampler ctx(make_rng(seed, 0, 0xc0)), noise(make_rng(seed, 0, 0x40)),
      act(make_rng(seed, 0, 0xac));

  FalconTrajectory out;
  out.variant = variant;
  out.rounds.reserve(cfg.T);
  out.log.reserve(cfg.T);
  out.noise.reserve(cfg.T);

  ArmRidgeModel model({}, d, K, cfg.ridge, false);
  double epsilon = std::numeric_limits<double>::infinity();
  double gamma = 0.0;
  bool fallback = false;
  std::size_t epoch = 1, epoch_start = 0, next_boundary = 0;
  double regret = 0.0;
  std::vector<double> f(K);

  for (std::size_t t = 1; t <= cfg.T; ++t) {
    std::size_t id = kNoContextId;
    Context x = env.draw_context(ctx, &id);
    const double eps_t = noise.normal() * env.noise_sd;
    const double u = act.uniform();
    for (std::size_t a = 0; a < K; ++a) f[a] = model.predict(x, a);
    const std::vector<double> p = K == 1 ? std::vector<double>{1.0} : igw_action_kernel(f, gamma);
    std::size_t a = 0;
    double acc = p[0];
    while (a + 1 < K && u >= acc) acc += p[++a];
    const double r = env.mean_reward(x, a) + eps_t;
    regret += env.best_mean(x) - r;
    out.log.push_back({std::move(x), a, r, p[a], epoch, 1.0, 1.0, id});
    out.noise.push_back(eps_t);
    out.rounds.push_back({t, epsilon, gamma, regret, fallback});

    if (t == schedule[next_boundary] && t < cfg.T) {
      model = ArmRidgeModel(out.log, d, K, cfg.ridge, false);
      if (variant == FalconVariant::theoretical) {
        epsilon = theoretical_epsilon(d, K, t, ConfidenceLevel(cfg.delta), cfg.C);
        fallback = false;
      } else {
        const std::span<const InteractionRecord> all(out.log);
        const FalconEpsilon e = falcon_ee_epsilon(all.first(epoch_start),
                                                  all.subspan(epoch_start), d, K, cfg,
                                                  derive_seed(seed, epoch, 0xee));
        epsilon = e.epsilon;
        fallback = e.fallback();
      }
      gamma = K >= 2 ? falcon_gamma(K, epsilon, cfg.c, cfg.eps_floor) : 0.0;
      epoch_start = t;
      ++epoch;
      ++next_boundary;
    }
  }
  return out;
}

std::vector<FalconRow> falcon_experiment(std::size_t d, std::size_t K, double noise_sd,
                                         std::size_t trials, const FalconConfig& cfg,
                                         std::uint64_t seed, unsigned jobs) {
  if (trials < 1) throw std::invalid_argument("falcon_experiment needs trials >= 1");
  auto per_trial = [&](std::size_t i) {
    const LinearBanditEnv env = LinearBanditEnv::random(d, K, noise_sd, derive_seed(seed, i, 1));
    const std::uint64_t stream = derive_seed(seed, i, 2);
    std::vector<FalconRow> rows;
    for (FalconVariant v : {FalconVariant::theoretical, FalconVariant::error_estimated}) {
      const FalconTrajectory tr = run_falcon_trial(env, v, cfg, stream);
      for (const auto& r : tr.rounds)
        rows.push_back({i, r.t, v, r.epsilon, r.gamma, r.cum_regret, r.fallback});
    }
    return rows;
  };
  std::vector<FalconRow> out;
  for (auto& block : map_replicates(trials, jobs, per_trial))
    out.insert(out.end(), block.begin(), block.end());
  return out;
}

}  // namespace ee::bandit
