#pragma once
// Remaining experiment drivers and the conversion of every experiment's rows
// into output tables.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ee/excess_risk.hpp"
#include "ee/falcon.hpp"
#include "ee/inference.hpp"
#include "ee/means.hpp"
#include "ee/pipeline.hpp"
#include "ee/table.hpp"

namespace ee::experiments {

// Random finite classes on a discrete law: each rep draws |F| uniform in
// 1..max_functions, entries uniform in [-bound, bound] on `support` points with
// Dirichlet(1) probabilities, then two independent samples of size n. The
// discrepancy sup_f |mean_def f - mean_err f| is compared to
// 2 R_n + deviation with R_n the exact expected Rademacher complexity.
struct RademacherCheckConfig {
  std::size_t max_functions = 8;
  std::size_t n = 10;
  std::size_t support = 3;
  double bound = 1.0;
  double deviation = 1.0;
};

struct RademacherRow {
  std::size_t rep;
  std::size_t n_functions;
  std::size_t n;
  double discrepancy;
  double rademacher;
  double deviation;
  bool holds;          // discrepancy + deviation <= 2 rademacher + 2 deviation
  double level;        // 1 - exp(-deviation^2 n / (4 bound^2))
};

std::vector<RademacherRow> rademacher_check_experiment(std::size_t reps,
                                                       const RademacherCheckConfig& cfg,
                                                       std::uint64_t seed, unsigned jobs = 0);

io::Table to_table(std::span<const means::Fig1Row> rows);
io::Table to_table(std::span<const means::CoverageRow> rows);
io::Table to_table(std::span<const inference::FiniteCoverageRow> rows);
io::Table to_table(std::span<const excess::Fig2aRow> rows);
io::Table to_table(std::span<const inference::MultitestRow> rows);
io::Table to_table(std::span<const inference::CrossfitRow> rows);
io::Table to_table(std::span<const bandit::FalconRow> rows);
io::Table to_table(std::span<const bandit::PipelineEpochRow> rows);
io::Table to_table(std::span<const RademacherRow> rows);

}  // namespace ee::experiments
