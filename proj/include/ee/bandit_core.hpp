#pragma once
// Contextual bandit substrate: linear environments, interaction logs, finite
// policy classes, importance-weighted estimates, covers and the epoch schedule.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "ee/random.hpp"

namespace ee::bandit {

using Context = std::vector<double>;
inline constexpr std::size_t kNoContextId = std::numeric_limits<std::size_t>::max();

// A logged or probed context had zero probability of the queried arm.
struct ZeroPropensityError : std::domain_error {
  using std::domain_error::domain_error;
};

enum class NoiseKind { gaussian, uniform };

// Mean reward of arm a at x: offset + scale * x.theta_a. Contexts are N(0, I)
// normalized to unit length, or drawn uniformly from a fixed pool when one is
// set. Noise has mean 0 and standard deviation noise_sd.
struct LinearBanditEnv {
  std::size_t d = 1;
  std::size_t K = 1;
  std::vector<std::vector<double>> theta;  // K rows of length d
  double noise_sd = 0.0;
  NoiseKind noise = NoiseKind::gaussian;
  double reward_offset = 0.0;
  double reward_scale = 1.0;
  std::vector<Context> pool;

  // theta_a ~ N(0, I) rescaled to a norm drawn uniformly from [0.5, 2].
  static LinearBanditEnv random(std::size_t d, std::size_t K, double noise_sd, std::uint64_t seed);
  // Replaces continuous contexts by `size` fixed draws.
  void make_pool(std::size_t size, std::uint64_t seed);

  void validate() const;
  // Returns the context and sets *id to its pool index (kNoContextId without a pool).
  Context draw_context(Sampler& s, std::size_t* id = nullptr) const;
  double draw_noise(Sampler& s) const;
  double mean_reward(std::span<const double> x, std::size_t a) const;
  std::size_t best_arm(std::span<const double> x) const;
  double best_mean(std::span<const double> x) const;
};

struct InteractionRecord {
  Context x;
  std::size_t a = 0;
  double r = 0.0;
  double p_of_a = 1.0;  // probability of a under the kernel that chose it
  std::size_t epoch_id = 0;
  double alpha_t = 1.0;  // bound on the optimal cover of that kernel
  double M_t = 1.0;      // bound on the inverse probability of the optimal arm
  std::size_t context_id = kNoContextId;
};

void validate_record(const InteractionRecord& r);

using Policy = std::function<std::size_t(std::span<const double>)>;
// p(a | x) of a randomized policy.
using Kernel = std::function<double(std::span<const double>, std::size_t)>;

// Finite class of argmax-of-linear-scorer policies, lowest arm on ties.
class PolicyClass {
 public:
  PolicyClass() = default;
  PolicyClass(std::size_t d, std::size_t K, std::vector<std::vector<double>> scorers);
  // `count` scorers with N(0, 1) entries.
  static PolicyClass random_linear(std::size_t d, std::size_t K, std::size_t count,
                                   std::uint64_t seed);

  std::size_t size() const { return scorers_.size(); }
  std::size_t arms() const { return K_; }
  std::size_t dim() const { return d_; }
  std::size_t action(std::size_t i, std::span<const double> x) const;
  Policy policy(std::size_t i) const;
  // table[i][j] = action of policy i at contexts[j].
  std::vector<std::vector<std::size_t>> action_table(std::span<const Context> contexts) const;

 private:
  std::size_t d_ = 0, K_ = 0;
  std::vector<std::vector<double>> scorers_;  // K * d per policy, row-major by arm
};

// Per-arm ridge regression of rewards on x (with a leading 1 when
// `intercept`). width() is the leverage sqrt(z' (Z'Z + ridge I)^-1 z) times the
// arm's residual standard deviation (1 when the arm has fewer than two rows).
class ArmRidgeModel {
 public:
  ArmRidgeModel(std::span<const InteractionRecord> data, std::size_t d, std::size_t K,
                double ridge, bool intercept);

  std::size_t arms() const { return coef_.size(); }
  double predict(std::span<const double> x, std::size_t a) const;
  double width(std::span<const double> x, std::size_t a) const;
  // Coefficients of arm a over x only (intercept excluded).
  std::vector<double> slope(std::size_t a) const;

 private:
  Eigen::VectorXd features(std::span<const double> x) const;
  std::size_t d_;
  bool intercept_;
  std::vector<Eigen::VectorXd> coef_;
  std::vector<Eigen::MatrixXd> inverse_;  // (Z'Z + ridge I)^-1
  std::vector<double> resid_sd_;
};

// Epoch ends {ceil(base^k) : k >= 1} within [1, T], deduplicated, closed by T.
std::vector<std::size_t> epoch_schedule(std::size_t T, double base);

// Average of r (1{pi(x) = a} - 1{pi_ref(x) = a}) / p_of_a over the log.
double ips_policy_diff(const Policy& pi, const Policy& pi_ref,
                       std::span<const InteractionRecord> log);
// Same with the actions of both policies given per record.
double ips_policy_diff(std::span<const std::size_t> pi_actions,
                       std::span<const std::size_t> ref_actions,
                       std::span<const InteractionRecord> log);

// Empirical E_x[1 / p(pi(x) | x)].
double cover(const Kernel& p, const Policy& pi, std::span<const Context> contexts);

// Indices of policies with p_t(pi(x) | x) >= 1 / M_t for every epoch t in the
// maps and every logged or probe context.
std::vector<std::size_t> filter_pi_tilde(const PolicyClass& policies,
                                         std::span<const InteractionRecord> log,
                                         const std::map<std::size_t, double>& per_epoch_M,
                                         const std::map<std::size_t, Kernel>& per_epoch_kernel,
                                         std::span<const Context> probe = {});

}  // namespace ee::bandit
