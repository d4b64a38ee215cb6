#include "ee/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "ee/parallel.hpp"
#include "ee/random.hpp"

namespace ee::bandit {

PipelineSplit pipeline_split(std::span<const InteractionRecord> log, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
  const std::size_t tau = log.size();
  const auto n_def =
      static_cast<std::size_t>(std::floor((1.0 - lambda) * static_cast<double>(tau) + 1e-9));
  if (n_def >= tau) throw std::invalid_argument("error part of the pipeline split is empty");
  const std::size_t n_err = tau - n_def;
  const std::size_t part = n_err / 3;
  PipelineSplit s;
  s.def.assign(log.begin(), log.begin() + static_cast<std::ptrdiff_t>(n_def));
  const auto e0 = log.begin() + static_cast<std::ptrdiff_t>(n_def);
  s.err_elim.assign(e0, e0 + static_cast<std::ptrdiff_t>(part));
  s.err_con.assign(e0 + static_cast<std::ptrdiff_t>(part), e0 + static_cast<std::ptrdiff_t>(2 * part));
  s.err_B.assign(e0 + static_cast<std::ptrdiff_t>(2 * part), log.end());
  s.err_epoch = e0->epoch_id;
  s.alpha_err = e0->alpha_t;
  s.M_err = e0->M_t;
  for (auto it = e0; it != log.end(); ++it)
    if (it->epoch_id != s.err_epoch)
      throw std::invalid_argument("the error part spans more than one exploration kernel");
  return s;
}

double ips_value(std::span<const std::size_t> pi_actions, std::span<const InteractionRecord> log) {
  if (log.empty()) throw std::invalid_argument("ips_value needs a nonempty log");
  if (pi_actions.size() != log.size()) throw std::invalid_argument("one action per record");
  double total = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    if (!(r.p_of_a > 0.0)) throw ZeroPropensityError("zero logging propensity");
    if (pi_actions[i] == r.a) total += r.r / r.p_of_a;
  }
  return total / static_cast<double>(log.size());
}

namespace {

std::vector<std::size_t> with_reference(std::span<const std::size_t> pi_tilde, std::size_t ref) {
  if (pi_tilde.empty()) throw EmptyClassError("the filtered policy class is empty");
  std::vector<std::size_t> m(pi_tilde.begin(), pi_tilde.end());
  m.push_back(ref);
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end()), m.end());
  return m;
}

std::vector<std::size_t> actions_on(const PolicyClass& cls, std::size_t i,
                                    std::span<const InteractionRecord> log) {
  std::vector<std::size_t> a(log.size());
  for (std::size_t k = 0; k < log.size(); ++k) a[k] = cls.action(i, log[k].x);
  return a;
}

std::vector<Context> contexts_of(std::span<const InteractionRecord> log) {
  std::vector<Context> xs;
  xs.reserve(log.size());
  for (const auto& r : log) xs.push_back(r.x);
  return xs;
}

PolicyErrorEstimate localize_policies(std::vector<std::size_t> members,
                                      std::vector<double> theta_def, std::vector<double> theta_err,
                                      double width, double cover_hat, ConfidenceLevel delta) {
  FinitePointwiseBound pb;
  pb.theta_def = std::move(theta_def);
  pb.theta_err = std::move(theta_err);
  pb.width = FinitePointwiseBound::constant_width(width);
  pb.orientation = ErrorOrientation::target_minus_estimate;
  FiniteLocalization loc = localize(pb, 0.0, delta);
  PolicyErrorEstimate out;
  out.U = loc.trace.xi();
  out.width = width;
  out.cover_hat = cover_hat;
  out.members = std::move(members);
  out.trace = std::move(loc.trace);
  return out;
}

}  // namespace

PolicyErrorEstimate cb_elim_error(const PolicyClass& cls, std::span<const std::size_t> pi_tilde,
                                  std::span<const InteractionRecord> err_elim,
                                  const PipelineOracles& oracles, const Kernel& p_err,
                                  double alpha_err, ConfidenceLevel delta) {
  if (err_elim.empty()) throw std::invalid_argument("cb_elim_error needs a nonempty error part");
  if (oracles.R_elim.size() != cls.size())
    throw std::invalid_argument("one policy value per policy of the class");
  auto members = with_reference(pi_tilde, oracles.pi_elim);
  const auto xs = contexts_of(err_elim);
  const double v = cover(p_err, cls.policy(oracles.pi_elim), xs);
  const double width = freedman_ips_width(delta, err_elim.size(), v, alpha_err).value;
  const auto ref = actions_on(cls, oracles.pi_elim, err_elim);
  std::vector<double> td, te;
  for (std::size_t m : members) {
    td.push_back(oracles.R_elim[m] - oracles.R_elim[oracles.pi_elim]);
    te.push_back(ips_policy_diff(actions_on(cls, m, err_elim), ref, err_elim));
  }
  return localize_policies(std::move(members), std::move(td), std::move(te), width, v, delta);
}

PolicyErrorEstimate cb_con_error(const PolicyClass& cls, std::span<const std::size_t> pi_tilde,
                                 std::span<const InteractionRecord> err_con,
                                 const PipelineOracles& oracles, const Kernel& p_err,
                                 double alpha_err, ConfidenceLevel delta) {
  if (err_con.empty()) throw std::invalid_argument("cb_con_error needs a nonempty error part");
  if (!oracles.f_hat) throw std::invalid_argument("cb_con_error needs a reward model");
  auto members = with_reference(pi_tilde, oracles.pi_con);
  const ConfidenceLevel half = delta.scaled(0.5);
  const double n = static_cast<double>(err_con.size());
  const auto xs = contexts_of(err_con);
  const double v = cover(p_err, cls.policy(oracles.pi_con), xs);
  const double width = freedman_ips_width(half, err_con.size(), v, alpha_err).value;
  const auto ref = actions_on(cls, oracles.pi_con, err_con);
  std::vector<double> td, te;
  for (std::size_t m : members) {
    const auto act = actions_on(cls, m, err_con);
    double gap = 0.0;
    for (std::size_t k = 0; k < err_con.size(); ++k)
      gap += oracles.f_hat(xs[k], act[k]) - oracles.f_hat(xs[k], ref[k]);
    td.push_back(gap / n);
    te.push_back(ips_policy_diff(act, ref, err_con));
  }
  PolicyErrorEstimate out =
      localize_policies(std::move(members), std::move(td), std::move(te), width, v, half);
  out.U += std::sqrt(2.0 * std::log(2.0 / delta.value()) / n);
  return out;
}

std::vector<std::uint8_t> ArmSets::at(std::span<const double> x) const {
  std::vector<std::uint8_t> g(K, 1);
  if (all_arms) return g;
  std::vector<double> m(K), w(K);
  double lo = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < K; ++a) {
    m[a] = mean(x, a);
    w[a] = width(x, a);
    lo = std::max(lo, m[a] - gamma * w[a]);
  }
  for (std::size_t a = 0; a < K; ++a) g[a] = m[a] + gamma * w[a] >= lo ? 1 : 0;
  return g;
}

ArmSets arm_eliminator(const PolicyClass& cls, std::span<const std::size_t> pi_tilde,
                       const PipelineOracles& oracles, double U_elim,
                       std::span<const Context> check_contexts, double gamma_cap) {
  if (!oracles.ci_mean || !oracles.ci_width)
    throw std::invalid_argument("arm_eliminator needs a confidence-interval estimator");
  const std::size_t K = cls.arms();
  ArmSets sets{oracles.ci_mean, oracles.ci_width, K, 1.0, false};

  std::vector<std::size_t> good;
  for (std::size_t i : pi_tilde)
    if (oracles.R_elim.at(oracles.pi_elim) - oracles.R_elim.at(i) <= U_elim) good.push_back(i);

  // Per-context means and widths once; policies' actions once.
  const std::size_t nx = check_contexts.size();
  std::vector<double> m(nx * K), w(nx * K);
  for (std::size_t j = 0; j < nx; ++j)
    for (std::size_t a = 0; a < K; ++a) {
      m[j * K + a] = oracles.ci_mean(check_contexts[j], a);
      w[j * K + a] = oracles.ci_width(check_contexts[j], a);
    }
  std::vector<std::vector<std::size_t>> acts;
  for (std::size_t i : good) {
    std::vector<std::size_t> a(nx);
    for (std::size_t j = 0; j < nx; ++j) a[j] = cls.action(i, check_contexts[j]);
    acts.push_back(std::move(a));
  }

  for (double gamma = 1.0; gamma <= gamma_cap; gamma *= 2.0) {
    bool valid = true;
    for (std::size_t j = 0; j < nx && valid; ++j) {
      double lo = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < K; ++a) lo = std::max(lo, m[j * K + a] - gamma * w[j * K + a]);
      for (const auto& a : acts) {
        const std::size_t arm = a[j];
        if (!(m[j * K + arm] + gamma * w[j * K + arm] >= lo)) {
          valid = false;
          break;
        }
      }
    }
    if (valid) {
      sets.gamma = gamma;
      return sets;
    }
  }
  sets.gamma = gamma_cap;
  sets.all_arms = true;
  return sets;
}

std::vector<std::uint8_t> conformal_set(const ContextArms& c, double U_con, double zeta) {
  if (!(zeta > 0.0 && zeta <= 1.0)) throw std::invalid_argument("zeta must lie in (0, 1]");
  const std::size_t K = c.g_hat.size();
  if (c.f_hat.size() != K || c.pi_con >= K) throw std::invalid_argument("inconsistent arm state");
  const double threshold = U_con / zeta;
  std::vector<std::uint8_t> out(K, 0);
  for (std::size_t a = 0; a < K; ++a)
    out[a] = c.g_hat[a] && c.f_hat[c.pi_con] - c.f_hat[a] <= threshold ? 1 : 0;
  return out;
}

namespace {

std::size_t count(const std::vector<std::uint8_t>& m) {
  std::size_t n = 0;
  for (auto v : m) n += v;
  return n;
}

// Adds weight * Unif(set) to p, using Unif(g) when the set is empty.
void add_uniform(std::vector<double>& p, const std::vector<std::uint8_t>& set,
                 const std::vector<std::uint8_t>& g, double weight) {
  const auto& s = count(set) > 0 ? set : g;
  const double each = weight / static_cast<double>(count(s));
  for (std::size_t a = 0; a < p.size(); ++a)
    if (s[a]) p[a] += each;
}

}  // namespace

std::vector<double> exploration_kernel(const ContextArms& c, double U_con, double eta,
                                       double beta_max) {
  const std::size_t K = c.g_hat.size();
  if (!(beta_max > 0.0 && beta_max < 1.0)) throw std::invalid_argument("beta_max must lie in (0, 1)");
  if (!(eta >= 1.0 && eta <= static_cast<double>(K)))
    throw std::invalid_argument("eta must lie in [1, K]");
  if (!(U_con >= 0.0)) throw std::invalid_argument("U_con must be nonnegative");
  if (count(c.g_hat) == 0) throw std::invalid_argument("arm set g(x) is empty");

  std::vector<double> p(K, 0.0);
  add_uniform(p, conformal_set(c, U_con, beta_max / eta), c.g_hat, 1.0 - beta_max);

  // a is in C(x, beta / eta) iff beta <= beta_a.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> beta_a(K, inf);
  std::vector<double> cuts;
  for (std::size_t a = 0; a < K; ++a) {
    if (!c.g_hat[a]) continue;
    const double gap = c.f_hat[c.pi_con] - c.f_hat[a];
    if (gap > 0.0) beta_a[a] = eta * U_con / gap;
    if (beta_a[a] > 0.0 && beta_a[a] < beta_max) cuts.push_back(beta_a[a]);
  }
  cuts.push_back(beta_max);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double prev = 0.0;
  std::vector<std::uint8_t> set(K);
  for (double b : cuts) {
    for (std::size_t a = 0; a < K; ++a) set[a] = c.g_hat[a] && beta_a[a] >= b ? 1 : 0;
    add_uniform(p, set, c.g_hat, b - prev);
    prev = b;
  }
  return p;
}

CoverBounds cover_and_M_bounds(std::span<const ContextArms> err_B,
                               std::span<const ContextArms> others, double U_con, double eta,
                               double beta_max, ConfidenceLevel delta) {
  if (err_B.empty()) throw std::invalid_argument("cover bounds need a nonempty S_err_B");
  if (!(U_con > 0.0)) throw UndefinedBoundError("M is undefined for U_con <= 0");
  if (!(beta_max > 0.0 && beta_max < 1.0)) throw std::invalid_argument("beta_max must lie in (0, 1)");
  if (!(eta >= 1.0)) throw std::invalid_argument("eta must be at least 1");
  CoverBounds b;
  for (const auto& s : err_B) b.max_g = std::max(b.max_g, count(s.g_hat));
  for (const auto& s : others) b.max_g = std::max(b.max_g, count(s.g_hat));
  const double G = static_cast<double>(b.max_g);
  b.M = G / std::min(1.0, eta * U_con);
  double sum = 0.0;
  for (const auto& s : err_B) {
    const double c = static_cast<double>(count(conformal_set(s, U_con, beta_max / eta)));
    const double g = static_cast<double>(count(s.g_hat));
    sum += c / (1.0 - beta_max + beta_max * c / g);
  }
  const double n = static_cast<double>(err_B.size());
  b.alpha_sets = sum / n;
  b.alpha_tail = G / eta;
  b.alpha_deviation = std::sqrt(G * std::log(3.0 / delta.value()) / (beta_max * n));
  b.alpha = b.alpha_sets + b.alpha_tail + b.alpha_deviation;
  return b;
}

// ---------------------------------------------------------------- end to end

namespace {

struct Step {
  bool bootstrap = true;
  std::vector<std::vector<double>> table;  // [pool context][arm]
  double alpha = 1.0, M = 1.0;
  PipelineEpochRow row;
};

std::vector<std::vector<double>> uniform_table(std::size_t n, std::size_t K) {
  return std::vector<std::vector<double>>(n, std::vector<double>(K, 1.0 / static_cast<double>(K)));
}

}  // namespace

std::vector<PipelineEpochRow> run_pipeline_epochs(const LinearBanditEnv& env,
                                                  const PolicyClass& cls,
                                                  const PipelineConfig& cfg, std::uint64_t seed) {
  env.validate();
  if (env.pool.empty()) throw std::invalid_argument("the pipeline needs a finite context pool");
  if (cls.arms() != env.K || cls.dim() != env.d)
    throw std::invalid_argument("policy class does not match the environment");
  if (cfg.T < 4) throw std::invalid_argument("run_pipeline_epochs needs T >= 4");
  const std::size_t K = env.K, P = env.pool.size();
  const ConfidenceLevel delta(cfg.delta);
  const ConfidenceLevel third = delta.scaled(1.0 / 3.0);

  std::map<Context, std::size_t> index;
  for (std::size_t j = 0; j < P; ++j) index.emplace(env.pool[j], j);
  auto id_of = [&](std::span<const double> x) {
    const auto it = index.find(Context(x.begin(), x.end()));
    if (it == index.end()) throw std::invalid_argument("context outside the pool");
    return it->second;
  };

  const auto acts = cls.action_table(env.pool);  // [policy][pool context]
  std::vector<double> value(cls.size(), 0.0);
  for (std::size_t i = 0; i < cls.size(); ++i)
    for (std::size_t j = 0; j < P; ++j) value[i] += env.mean_reward(env.pool[j], acts[i][j]);
  const std::size_t pi_star =
      static_cast<std::size_t>(std::max_element(value.begin(), value.end()) - value.begin());

  using Table = std::vector<std::vector<double>>;
  std::vector<std::shared_ptr<const Table>> tables{
      std::make_shared<const Table>(uniform_table(P, K))};  // by epoch - 1
  std::map<std::size_t, Kernel> kernels;
  std::map<std::size_t, double> Ms;
  auto kernel_of = [&](std::size_t epoch) -> Kernel {
    const auto t = tables[epoch - 1];
    return [t, &id_of](std::span<const double> x, std::size_t a) { return (*t)[id_of(x)][a]; };
  };
  kernels[1] = kernel_of(1);
  Ms[1] = static_cast<double>(K);
  std::vector<double> alphas{static_cast<double>(K)};

  const auto schedule = epoch_schedule(cfg.T, cfg.epoch_base);
  Sampler ctx(make_rng(seed, 0, 0xc0)), noise(make_rng(seed, 0, 0x40)),
      act(make_rng(seed, 0, 0xac));
  std::vector<InteractionRecord> log;
  log.reserve(cfg.T);
  std::vector<PipelineEpochRow> rows;
  std::size_t epoch = 1, next = 0;
  double regret = 0.0;

  auto step = [&](std::size_t tau) -> Step {
    Step s;
    s.row.epoch = epoch + 1;
    s.row.tau = tau;
    const PipelineSplit split = pipeline_split(log, cfg.lambda);
    if (split.any_empty() || K == 1) {
      s.table = uniform_table(P, K);
      s.alpha = s.M = static_cast<double>(K);
      s.row.bootstrap = true;
      return s;
    }
    s.bootstrap = false;
    const Kernel& p_err = kernels.at(split.err_epoch);
    const double alpha_err = split.alpha_err;

    // The pool holds every logged context, so checking it covers both sets.
    const auto pi_tilde = filter_pi_tilde(cls, {}, Ms, kernels, env.pool);
    s.row.pi_tilde_size = pi_tilde.size();
    if (pi_tilde.empty()) throw EmptyClassError("the filtered policy class is empty");

    PipelineOracles o;
    o.R_elim.resize(cls.size());
    for (std::size_t i = 0; i < cls.size(); ++i) {
      std::vector<std::size_t> a(split.def.size());
      for (std::size_t k = 0; k < a.size(); ++k) a[k] = acts[i][split.def[k].context_id];
      o.R_elim[i] = ips_value(a, split.def);
    }
    o.pi_elim = pi_tilde.front();
    for (std::size_t i : pi_tilde)
      if (o.R_elim[i] > o.R_elim[o.pi_elim]) o.pi_elim = i;
    const PolicyErrorEstimate elim =
        cb_elim_error(cls, pi_tilde, split.err_elim, o, p_err, alpha_err, third);

    const auto ci = std::make_shared<ArmRidgeModel>(log, env.d, K, cfg.ridge, true);
    o.ci_mean = [ci](std::span<const double> x, std::size_t a) { return ci->predict(x, a); };
    o.ci_width = [ci](std::span<const double> x, std::size_t a) { return ci->width(x, a); };
    const ArmSets g = arm_eliminator(cls, pi_tilde, o, elim.U, env.pool);

    std::vector<InteractionRecord> reg_data(split.def);
    reg_data.insert(reg_data.end(), split.err_elim.begin(), split.err_elim.end());
    const auto reg = std::make_shared<ArmRidgeModel>(reg_data, env.d, K, cfg.ridge, true);
    o.f_hat = [reg](std::span<const double> x, std::size_t a) {
      return std::clamp(reg->predict(x, a), 0.0, 1.0);
    };
    // f values on the pool, used for pi_con and the arm states.
    std::vector<std::vector<double>> f(P, std::vector<double>(K));
    for (std::size_t j = 0; j < P; ++j)
      for (std::size_t a = 0; a < K; ++a) f[j][a] = o.f_hat(env.pool[j], a);
    o.pi_con = pi_tilde.front();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i : pi_tilde) {
      double v = 0.0;
      for (const auto& r : reg_data) v += f[r.context_id][acts[i][r.context_id]];
      if (v > best) {
        best = v;
        o.pi_con = i;
      }
    }
    const PolicyErrorEstimate con =
        cb_con_error(cls, pi_tilde, split.err_con, o, p_err, alpha_err, third);

    std::vector<ContextArms> states(P);
    for (std::size_t j = 0; j < P; ++j) states[j] = {g.at(env.pool[j]), f[j], acts[o.pi_con][j]};
    std::vector<ContextArms> err_B;
    for (const auto& r : split.err_B) err_B.push_back(states[r.context_id]);

    double eta = 1.0;
    CoverBounds cb;
    if (cfg.fixed_eta) {
      eta = *cfg.fixed_eta;
      cb = cover_and_M_bounds(err_B, states, con.U, eta, cfg.beta_max, delta);
    } else {
      for (std::size_t e = 1; e <= K; ++e) {
        const CoverBounds c =
            cover_and_M_bounds(err_B, states, con.U, static_cast<double>(e), cfg.beta_max, delta);
        if (e == 1 || c.alpha < cb.alpha) {
          cb = c;
          eta = static_cast<double>(e);
        }
      }
    }
    s.table.resize(P);
    for (std::size_t j = 0; j < P; ++j)
      s.table[j] = exploration_kernel(states[j], con.U, eta, cfg.beta_max);
    // Both quantities bound something at least 1.
    s.alpha = std::max(1.0, cb.alpha);
    s.M = std::max(1.0, cb.M);

    s.row.U_elim = elim.U;
    s.row.U_con = con.U;
    s.row.eta = eta;
    s.row.pi_star_in_g = true;
    double rf_con = 0.0, rf_star = 0.0;
    for (std::size_t j = 0; j < P; ++j) {
      if (!states[j].g_hat[acts[pi_star][j]]) s.row.pi_star_in_g = false;
      rf_con += f[j][acts[o.pi_con][j]];
      rf_star += f[j][acts[pi_star][j]];
    }
    s.row.con_premise = (rf_con - rf_star) / static_cast<double>(P) <= con.U;
    s.row.elim_premise = o.R_elim[o.pi_elim] - o.R_elim[pi_star] <= elim.U;
    return s;
  };

  for (std::size_t t = 1; t <= cfg.T; ++t) {
    const std::size_t j = ctx.index(P);
    const double eps = env.draw_noise(noise);
    const double u = act.uniform();
    const auto& p = (*tables[epoch - 1])[j];
    std::size_t a = 0;
    double acc = p[0];
    while (a + 1 < K && (u >= acc || p[a] == 0.0)) acc += p[++a];
    const double mean = env.mean_reward(env.pool[j], a);
    regret += env.best_mean(env.pool[j]) - mean;
    log.push_back({env.pool[j], a, mean + eps, p[a], epoch, alphas[epoch - 1], Ms[epoch], j});

    if (t != schedule[next]) continue;
    ++next;
    Step s;
    try {
      s = step(t);
    } catch (const std::exception& e) {
      PipelineEpochRow r;
      r.epoch = epoch + 1;
      r.tau = t;
      r.cum_regret = regret;
      r.error = e.what();
      r.pi_star_in_g = false;
      rows.push_back(r);
      break;
    }
    double v = 0.0, worst = 0.0;
    for (std::size_t c = 0; c < P; ++c) {
      const double q = s.table[c][acts[pi_star][c]];
      const double inv = q > 0.0 ? 1.0 / q : std::numeric_limits<double>::infinity();
      v += inv;
      worst = std::max(worst, inv);
    }
    s.row.realized_cover = v / static_cast<double>(P);
    s.row.realized_max_inverse = worst;
    s.row.M_next = s.M;
    s.row.alpha_next = s.alpha;
    s.row.cum_regret = regret;
    rows.push_back(s.row);
    if (t == cfg.T) break;
    ++epoch;
    tables.push_back(std::make_shared<const Table>(std::move(s.table)));
    kernels[epoch] = kernel_of(epoch);
    Ms[epoch] = s.M;
    alphas.push_back(s.alpha);
  }
  return rows;
}

std::vector<PipelineEpochRow> pipeline_experiment(const PipelineEnvConfig& ec, std::size_t trials,
                                                  const PipelineConfig& cfg, std::uint64_t seed,
                                                  unsigned jobs) {
  if (trials < 1) throw std::invalid_argument("pipeline_experiment needs trials >= 1");
  auto per_trial = [&](std::size_t i) {
    LinearBanditEnv env = LinearBanditEnv::random(ec.d, ec.K, ec.noise_sd, derive_seed(seed, i, 1));
    env.noise = NoiseKind::uniform;
    env.reward_offset = ec.reward_offset;
    env.reward_scale = ec.reward_scale;
    env.make_pool(ec.pool, derive_seed(seed, i, 3));
    const PolicyClass cls = PolicyClass::random_linear(ec.d, ec.K, ec.policies, derive_seed(seed, i, 4));
    auto rows = run_pipeline_epochs(env, cls, cfg, derive_seed(seed, i, 2));
    for (auto& r : rows) r.trial = i;
    return rows;
  };
  std::vector<PipelineEpochRow> out;
  for (auto& block : map_replicates(trials, jobs, per_trial))
    out.insert(out.end(), block.begin(), block.end());
  return out;
}

}  // namespace ee::bandit
