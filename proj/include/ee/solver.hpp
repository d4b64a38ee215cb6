#pragma once
// Heuristic maximization over a box with a feasibility predicate: a probe
// scan (grid or random) followed by multi-restart projected gradient ascent
// with central finite differences and a backtracking line search.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ee {

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  Box() = default;
  Box(std::vector<double> lo, std::vector<double> hi);
  static Box cube(std::size_t dim, double lo, double hi);
  std::size_t dim() const { return lower.size(); }
  bool contains(std::span<const double> x) const;
  void clamp(std::span<double> x) const;
};

struct SolverInfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverTimeoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  std::size_t restarts = 10;
  std::size_t max_iterations = 200;
  std::size_t grid_budget = 4096;   // full grid used when it fits and has >= 3 points per axis
  std::size_t random_probes = 2048; // otherwise this many uniform probes
  double fd_scale = 1e-5;           // step = fd_scale * (1 + |coordinate|)
  double min_step = 1e-9;           // line search gives up below this length
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> seeds;  // extra starting points, tried first
  std::chrono::milliseconds time_budget{60000};  // 0 = unlimited
  std::size_t max_evaluations = 0;               // 0 = unlimited
};

struct RestartEndpoint {
  std::vector<double> start;
  std::vector<double> point;
  double value;
  std::size_t iterations;
};

struct SolverDiagnostics {
  std::size_t evaluations = 0;
  std::size_t probes = 0;
  std::size_t feasible_probes = 0;
  bool grid_scan = false;
  std::vector<RestartEndpoint> restarts;
};

struct SolverResult {
  double value;
  std::vector<double> point;
  SolverDiagnostics diagnostics;
};

// Fused evaluation: objective value and feasibility at one point.
struct Evaluation {
  double value;
  bool feasible;
};
using FusedObjective = std::function<Evaluation(std::span<const double>)>;

SolverResult sup_parametric(const FusedObjective& f, const Box& domain, const SolverConfig& cfg);

// Separate objective and constraint (empty constraint = whole box).
SolverResult sup_parametric(const std::function<double(std::span<const double>)>& objective,
                            const Box& domain,
                            const std::function<bool(std::span<const double>)>& constraint,
                            const SolverConfig& cfg);

}  // namespace ee
