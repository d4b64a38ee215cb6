#pragma once
// Random pipeline states shared by the unit and acceptance suites: a probe set
// of contexts with arm masks, reward-model values, a finite table-valued policy
// class, the best reward-model policy and a target policy kept inside the masks.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ee/pipeline.hpp"
#include "ee/random.hpp"

namespace ee::testing {

struct PipelineState {
  std::size_t K = 0;
  double U = 0.0, eta = 1.0, beta_max = 0.5;
  std::vector<bandit::ContextArms> contexts;  // pi_con filled in
  std::vector<std::size_t> target;             // arm of the target policy per context
};

inline PipelineState random_state(Sampler& s, std::size_t n_contexts = 32,
                                  std::size_t n_policies = 8) {
  PipelineState st;
  st.K = 2 + s.index(5);
  st.U = s.uniform(1e-3, 0.5);
  st.eta = s.uniform(1.0, static_cast<double>(st.K));
  st.beta_max = s.uniform(0.05, 0.95);
  std::vector<std::vector<std::size_t>> policies(n_policies, std::vector<std::size_t>(n_contexts));
  for (auto& p : policies)
    for (auto& a : p) a = s.index(st.K);
  st.target = policies[s.index(n_policies)];
  st.contexts.resize(n_contexts);
  for (std::size_t j = 0; j < n_contexts; ++j) {
    auto& c = st.contexts[j];
    c.g_hat.assign(st.K, 0);
    c.f_hat.resize(st.K);
    for (std::size_t a = 0; a < st.K; ++a) {
      c.g_hat[a] = s.uniform() < 0.6 ? 1 : 0;
      // Coarse values create exact ties and exact boundary gaps.
      c.f_hat[a] = s.uniform() < 0.3 ? static_cast<double>(s.index(5)) / 4.0 : s.uniform();
    }
    c.g_hat[st.target[j]] = 1;
  }
  // pi_con maximizes the average reward-model value over the class.
  double best = -1.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n_policies; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < n_contexts; ++j) v += st.contexts[j].f_hat[policies[i][j]];
    if (v > best) best = v, arg = i;
  }
  for (std::size_t j = 0; j < n_contexts; ++j) st.contexts[j].pi_con = policies[arg][j];
  return st;
}

// Average reward-model gap between pi_con and the target policy.
inline double model_gap(const PipelineState& st) {
  double g = 0.0;
  for (std::size_t j = 0; j < st.contexts.size(); ++j) {
    const auto& c = st.contexts[j];
    g += c.f_hat[c.pi_con] - c.f_hat[st.target[j]];
  }
  return g / static_cast<double>(st.contexts.size());
}

inline std::size_t count(const std::vector<std::uint8_t>& m) {
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

}  // namespace ee::testing
