#pragma once
// Excess-risk bounds for supervised learning by data splitting and
// localization, plus the linear-regression experiment on the unit sphere.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ee/concentration.hpp"
#include "ee/core.hpp"
#include "ee/kernels.hpp"

namespace ee::excess {

struct LabeledSample {
  std::vector<double> features;
  double label = 0.0;
  std::size_t arm = 0;  // which per-arm model scores this sample (0 for plain regression)
};

// Samples grouped by arm in column-major blocks, with per-arm Gram matrices
// for the exact no-clipping shortcut.
class Dataset {
 public:
  Dataset(std::span<const LabeledSample> samples, std::size_t dim, std::size_t arms = 1);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  std::size_t arms() const { return blocks_.size(); }

  struct Block {
    std::vector<double> x;  // column-major, rows = samples of this arm
    std::vector<double> y;
    Eigen::MatrixXd gram;   // X^T X
    Eigen::VectorXd xty;    // X^T y
    double yty = 0.0;
    double max_row_norm = 0.0;
    kernels::ColumnMajorView view(std::size_t dim) const {
      return {x.data(), y.size(), dim};
    }
  };
  const Block& block(std::size_t a) const { return blocks_[a]; }

 private:
  std::size_t n_ = 0, dim_ = 0;
  std::vector<Block> blocks_;
};

// g_w(x, a) = clamp(x . w_a, -clip, clip), squared loss against labels in
// [-label_bound, label_bound]; parameters are the stacked per-arm vectors
// inside the box [-coef_bound, coef_bound]^(arms * dim).
struct ClippedLinearClass {
  std::size_t dim = 1;
  std::size_t arms = 1;
  double coef_bound = 1.0;
  double clip = 1.0;
  double label_bound = 1.0;

  std::size_t param_dim() const { return dim * arms; }
  // Per-sample loss lies in [0, M] with M = (clip + label_bound)^2.
  double loss_range() const { return (clip + label_bound) * (clip + label_bound); }
  Box box() const { return Box::cube(param_dim(), -coef_bound, coef_bound); }
  double mean_loss(const Dataset& data, std::span<const double> w) const;
  double sample_loss(const LabeledSample& s, std::span<const double> w) const;
};

// (theta_def, theta_err): average loss of g_def minus average loss of g on
// the defining and error parts respectively.
struct ThetaHats {
  double theta_def;
  double theta_err;
};
ThetaHats theta_hats(const ClippedLinearClass& cls, std::span<const double> g,
                     std::span<const double> g_def, const Dataset& def, const Dataset& err);
ThetaHats theta_hats(const ClippedLinearClass& cls, std::span<const double> g,
                     std::span<const double> g_def, const SplitData<LabeledSample>& split);

// theta_err - theta_def + 2 M sqrt(ln(1/delta) / (2 n)); needs |def| = |err| = n.
double u_excess(const ClippedLinearClass& cls, std::span<const double> g,
                std::span<const double> g_def, const Dataset& def, const Dataset& err,
                ConfidenceLevel delta);

struct ExcessRiskConfig {
  LocalizationConfig localization;
  SolverConfig solver;
  double localized_tolerance = 1e-9;
  bool compute_max_theta = true;  // extra solver pass for max theta_def over the final class
};

struct ExcessRiskReport {
  std::vector<double> g_def;
  LocalizationTrace trace;
  std::vector<std::vector<double>> argmax;
  std::vector<SolverDiagnostics> diagnostics;
  double width = 0.0;           // Hoeffding term
  double max_theta_final = 0.0; // max of theta_def over the final localized class
  double bound_max_theta = 0.0; // max_theta_final + final xi
  double bound_localized = 0.0; // min over the trace
  double vc_baseline = 0.0;
  bool localized_valid = false;  // every theta_def in the final class <= tolerance
};

ExcessRiskReport excess_risk_bound(const ClippedLinearClass& cls, std::span<const double> g_def,
                                   const Dataset& def, const Dataset& err, ConfidenceLevel delta,
                                   const ExcessRiskConfig& cfg = {});

// Finite class described by per-sample losses (rows = models).
struct FiniteModelLosses {
  Eigen::MatrixXd def_losses;
  Eigen::MatrixXd err_losses;
  std::size_t g_def = 0;
  double loss_range = 1.0;
};

struct FiniteExcessReport {
  FiniteLocalization localization;
  std::vector<double> theta_def;
  double width = 0.0;
  double bound_max_theta = 0.0;
  double bound_localized = 0.0;
  bool localized_valid = false;
};

FiniteExcessReport excess_risk_bound(const FiniteModelLosses& losses, ConfidenceLevel delta,
                                     const LocalizationConfig& cfg = {});

// 2 (d + ln(1/delta)) / n_def.
double vc_baseline(std::size_t d, std::size_t n_def, ConfidenceLevel delta);

// argmin sum (y - x.beta)^2 + ridge |beta|^2. Throws on singular normal
// equations when ridge = 0.
std::vector<double> fit_erm_linear(std::span<const LabeledSample> samples, double ridge);

// R(g) - R(g*) for x uniform on the unit sphere in R^d (d >= 3), labels
// x.beta + zero-mean noise independent of x, predictions clamp(x.beta_hat).
// Closed form |beta_hat - beta|^2 / d when neither model clips; otherwise a
// deterministic quadrature over the two-dimensional projection of x.
double true_excess_risk_sphere(std::span<const double> beta_hat, std::span<const double> beta,
                               double clip);

// ------------------------------------------------------------ experiment

struct Fig2aConfig {
  std::size_t d = 10;
  double beta_norm = 0.5;
  double noise_half_width = 0.5;
  ExcessRiskConfig bound;
};

struct Fig2aRow {
  std::size_t n;      // dataset size before the even split
  std::size_t n_def;
  std::size_t rep;
  double true_excess;
  double ee_bound;
  double ee_bound_max_theta;
  double vc_bound;
  std::size_t k_iterations;
  bool covered;          // bound_localized >= true excess
  bool truth_retained;   // the true coefficients stay in the final localized class
  bool xi_non_increasing;  // reported bound sequence never rises
};

std::vector<Fig2aRow> fig2a_experiment(std::span<const std::size_t> ns, std::size_t reps,
                                       ConfidenceLevel delta, std::uint64_t seed,
                                       const Fig2aConfig& cfg = {}, unsigned jobs = 0);

}  // namespace ee::excess
