#include "ee/bandit_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ee::bandit {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

LinearBanditEnv LinearBanditEnv::random(std::size_t d, std::size_t K, double noise_sd,
                                        std::uint64_t seed) {
  LinearBanditEnv env;
  env.d = d;
  env.K = K;
  env.noise_sd = noise_sd;
  Sampler s(make_rng(seed, 0, 0x7e7a));
  for (std::size_t a = 0; a < K; ++a) {
    auto v = s.unit_sphere(d);
    const double norm = s.uniform(0.5, 2.0);
    for (auto& x : v) x *= norm;
    env.theta.push_back(std::move(v));
  }
  env.validate();
  return env;
}

void LinearBanditEnv::make_pool(std::size_t size, std::uint64_t seed) {
  if (size == 0) throw std::invalid_argument("context pool must be nonempty");
  Sampler s(make_rng(seed, 0, 0x9001));
  pool.clear();
  for (std::size_t i = 0; i < size; ++i) pool.push_back(s.unit_sphere(d));
}

void LinearBanditEnv::validate() const {
  if (d == 0 || K == 0) throw std::invalid_argument("environment needs d >= 1 and K >= 1");
  if (theta.size() != K) throw std::invalid_argument("one coefficient vector per arm");
  for (const auto& t : theta)
    if (t.size() != d) throw std::invalid_argument("coefficient vector has wrong length");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be nonnegative");
  for (const auto& x : pool)
    if (x.size() != d) throw std::invalid_argument("pool context has wrong length");
}

Context LinearBanditEnv::draw_context(Sampler& s, std::size_t* id) const {
  if (pool.empty()) {
    if (id) *id = kNoContextId;
    return s.unit_sphere(d);
  }
  const std::size_t j = s.index(pool.size());
  if (id) *id = j;
  return pool[j];
}

double LinearBanditEnv::draw_noise(Sampler& s) const {
  if (noise == NoiseKind::gaussian) return noise_sd * s.normal();
  const double half = noise_sd * std::sqrt(3.0);
  return s.uniform(-half, half);
}

double LinearBanditEnv::mean_reward(std::span<const double> x, std::size_t a) const {
  return reward_offset + reward_scale * dot(x, theta[a]);
}

std::size_t LinearBanditEnv::best_arm(std::span<const double> x) const {
  std::size_t best = 0;
  double v = mean_reward(x, 0);
  for (std::size_t a = 1; a < K; ++a) {
    const double m = mean_reward(x, a);
    if (m > v) {
      v = m;
      best = a;
    }
  }
  return best;
}

double LinearBanditEnv::best_mean(std::span<const double> x) const {
  return mean_reward(x, best_arm(x));
}

void validate_record(const InteractionRecord& r) {
  if (!(r.p_of_a > 0.0 && r.p_of_a <= 1.0))
    throw ZeroPropensityError("record propensity must lie in (0, 1]");
  if (!(r.alpha_t >= 1.0) || !(r.M_t >= 1.0))
    throw std::invalid_argument("record cover bounds must be at least 1");
}

PolicyClass::PolicyClass(std::size_t d, std::size_t K, std::vector<std::vector<double>> scorers)
    : d_(d), K_(K), scorers_(std::move(scorers)) {
  if (scorers_.empty()) throw std::invalid_argument("policy class must be nonempty");
  for (const auto& w : scorers_)
    if (w.size() != d * K) throw std::invalid_argument("scorer has wrong size");
}

PolicyClass PolicyClass::random_linear(std::size_t d, std::size_t K, std::size_t count,
                                       std::uint64_t seed) {
  Sampler s(make_rng(seed, 0, 0x9011c7));
  std::vector<std::vector<double>> scorers;
  for (std::size_t i = 0; i < count; ++i) scorers.push_back(s.normal_vector(d * K));
  return PolicyClass(d, K, std::move(scorers));
}

std::size_t PolicyClass::action(std::size_t i, std::span<const double> x) const {
  if (x.size() != d_) throw std::invalid_argument("context has wrong length");
  const auto& w = scorers_.at(i);
  std::size_t best = 0;
  double v = dot(x, std::span<const double>(w.data(), d_));
  for (std::size_t a = 1; a < K_; ++a) {
    const double s = dot(x, std::span<const double>(w.data() + a * d_, d_));
    if (s > v) {
      v = s;
      best = a;
    }
  }
  return best;
}

Policy PolicyClass::policy(std::size_t i) const {
  return [this, i](std::span<const double> x) { return action(i, x); };
}

std::vector<std::vector<std::size_t>> PolicyClass::action_table(
    std::span<const Context> contexts) const {
  std::vector<std::vector<std::size_t>> t(size(), std::vector<std::size_t>(contexts.size()));
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < contexts.size(); ++j) t[i][j] = action(i, contexts[j]);
  return t;
}

ArmRidgeModel::ArmRidgeModel(std::span<const InteractionRecord> data, std::size_t d,
                             std::size_t K, double ridge, bool intercept)
    : d_(d), intercept_(intercept) {
  if (!(ridge > 0.0)) throw std::invalid_argument("ridge weight must be positive");
  const Eigen::Index p = static_cast<Eigen::Index>(d + (intercept ? 1 : 0));
  std::vector<Eigen::MatrixXd> gram(K, Eigen::MatrixXd::Zero(p, p));
  std::vector<Eigen::VectorXd> zty(K, Eigen::VectorXd::Zero(p));
  std::vector<std::size_t> count(K, 0);
  for (const auto& r : data) {
    if (r.a >= K) throw std::invalid_argument("record arm out of range");
    const Eigen::VectorXd z = features(r.x);
    gram[r.a].selfadjointView<Eigen::Lower>().rankUpdate(z);
    zty[r.a] += r.r * z;
    ++count[r.a];
  }
  for (std::size_t a = 0; a < K; ++a) {
    Eigen::MatrixXd g = gram[a].selfadjointView<Eigen::Lower>();
    g.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    inverse_.push_back(llt.solve(Eigen::MatrixXd::Identity(p, p)));
    coef_.push_back(llt.solve(zty[a]));
  }
  std::vector<double> rss(K, 0.0);
  for (const auto& r : data) {
    const double e = r.r - predict(r.x, r.a);
    rss[r.a] += e * e;
  }
  for (std::size_t a = 0; a < K; ++a)
    resid_sd_.push_back(count[a] >= 2 ? std::sqrt(rss[a] / static_cast<double>(count[a] - 1)) : 1.0);
}

Eigen::VectorXd ArmRidgeModel::features(std::span<const double> x) const {
  if (x.size() != d_) throw std::invalid_argument("context has wrong length");
  Eigen::VectorXd z(static_cast<Eigen::Index>(d_ + (intercept_ ? 1 : 0)));
  Eigen::Index k = 0;
  if (intercept_) z[k++] = 1.0;
  for (double v : x) z[k++] = v;
  return z;
}

double ArmRidgeModel::predict(std::span<const double> x, std::size_t a) const {
  return coef_.at(a).dot(features(x));
}

double ArmRidgeModel::width(std::span<const double> x, std::size_t a) const {
  const Eigen::VectorXd z = features(x);
  return std::sqrt(std::max(0.0, z.dot(inverse_.at(a) * z))) * resid_sd_[a];
}

std::vector<double> ArmRidgeModel::slope(std::size_t a) const {
  const auto& c = coef_.at(a);
  const Eigen::Index off = intercept_ ? 1 : 0;
  return {c.data() + off, c.data() + c.size()};
}

std::vector<std::size_t> epoch_schedule(std::size_t T, double base) {
  if (T < 2) throw std::invalid_argument("epoch_schedule needs T >= 2");
  if (!(base > 1.0)) throw std::invalid_argument("epoch base must exceed 1");
  std::vector<std::size_t> out;
  for (double v = base; v <= static_cast<double>(T); v *= base) {
    // Guard against 2^k landing a hair above an integer.
    const auto b = static_cast<std::size_t>(std::ceil(v * (1.0 - 1e-14)));
    if (b > T) break;
    if (out.empty() || out.back() != b) out.push_back(b);
  }
  if (out.empty() || out.back() != T) out.push_back(T);
  return out;
}

double ips_policy_diff(std::span<const std::size_t> pi_actions,
                       std::span<const std::size_t> ref_actions,
                       std::span<const InteractionRecord> log) {
  if (log.empty()) throw std::invalid_argument("ips_policy_diff needs a nonempty log");
  if (pi_actions.size() != log.size() || ref_actions.size() != log.size())
    throw std::invalid_argument("one action per record");
  double total = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    if (!(r.p_of_a > 0.0)) throw ZeroPropensityError("zero logging propensity");
    const double ind = (pi_actions[i] == r.a ? 1.0 : 0.0) - (ref_actions[i] == r.a ? 1.0 : 0.0);
    if (ind != 0.0) total += r.r * ind / r.p_of_a;
  }
  return total / static_cast<double>(log.size());
}

double ips_policy_diff(const Policy& pi, const Policy& pi_ref,
                       std::span<const InteractionRecord> log) {
  std::vector<std::size_t> a(log.size()), b(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    a[i] = pi(log[i].x);
    b[i] = pi_ref(log[i].x);
  }
  return ips_policy_diff(a, b, log);
}

double cover(const Kernel& p, const Policy& pi, std::span<const Context> contexts) {
  if (contexts.empty()) throw std::invalid_argument("cover needs at least one context");
  double total = 0.0;
  for (const auto& x : contexts) {
    const double q = p(x, pi(x));
    if (!(q > 0.0))
      throw ZeroPropensityError("policy action has zero probability under the kernel");
    total += 1.0 / q;
  }
  return total / static_cast<double>(contexts.size());
}

std::vector<std::size_t> filter_pi_tilde(const PolicyClass& policies,
                                         std::span<const InteractionRecord> log,
                                         const std::map<std::size_t, double>& per_epoch_M,
                                         const std::map<std::size_t, Kernel>& per_epoch_kernel,
                                         std::span<const Context> probe) {
  std::vector<const Context*> xs;
  xs.reserve(log.size() + probe.size());
  for (const auto& r : log) xs.push_back(&r.x);
  for (const auto& x : probe) xs.push_back(&x);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    bool ok = true;
    for (const auto& [epoch, kernel] : per_epoch_kernel) {
      const auto m = per_epoch_M.find(epoch);
      if (m == per_epoch_M.end())
        throw std::invalid_argument("no M bound for epoch " + std::to_string(epoch));
      const double min_prob = 1.0 / m->second;
      for (const Context* x : xs) {
        if (kernel(*x, policies.action(i, *x)) < min_prob) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) keep.push_back(i);
  }
  return keep;
}

}  // namespace ee::bandit
