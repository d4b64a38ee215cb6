#include "ee/excess_risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ee/parallel.hpp"
#include "ee/random.hpp"

namespace ee::excess {

Dataset::Dataset(std::span<const LabeledSample> samples, std::size_t dim, std::size_t arms)
    : n_(samples.size()), dim_(dim), blocks_(arms) {
  if (arms == 0 || dim == 0) throw std::invalid_argument("dataset needs dim >= 1 and arms >= 1");
  std::vector<std::vector<const LabeledSample*>> by_arm(arms);
  for (const auto& s : samples) {
    if (s.features.size() != dim) throw std::invalid_argument("feature vector has wrong length");
    if (s.arm >= arms) throw std::invalid_argument("sample arm out of range");
    by_arm[s.arm].push_back(&s);
  }
  for (std::size_t a = 0; a < arms; ++a) {
    Block& b = blocks_[a];
    const std::size_t m = by_arm[a].size();
    b.x.assign(m * dim, 0.0);
    b.y.resize(m);
    b.gram = Eigen::MatrixXd::Zero(dim, dim);
    b.xty = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < m; ++i) {
      const LabeledSample& s = *by_arm[a][i];
      Eigen::Map<const Eigen::VectorXd> x(s.features.data(), dim);
      for (std::size_t j = 0; j < dim; ++j) b.x[j * m + i] = s.features[j];
      b.y[i] = s.label;
      b.gram.noalias() += x * x.transpose();
      b.xty += s.label * x;
      b.yty += s.label * s.label;
      b.max_row_norm = std::max(b.max_row_norm, x.norm());
    }
  }
}

double ClippedLinearClass::mean_loss(const Dataset& data, std::span<const double> w) const {
  if (w.size() != param_dim() || data.dim() != dim || data.arms() != arms)
    throw std::invalid_argument("parameter or dataset shape does not match the model class");
  if (data.size() == 0) throw std::invalid_argument("empty dataset");
  double total = 0.0;
  for (std::size_t a = 0; a < arms; ++a) {
    const Dataset::Block& b = data.block(a);
    if (b.y.empty()) continue;
    std::span<const double> wa = w.subspan(a * dim, dim);
    Eigen::Map<const Eigen::VectorXd> v(wa.data(), dim);
    if (v.norm() * b.max_row_norm <= clip) {
      // No prediction can reach the clip: the loss sum is an exact quadratic.
      total += std::max(0.0, v.dot(b.gram * v) - 2.0 * v.dot(b.xty) + b.yty);
    } else {
      total += kernels::clipped_sq_loss_sum(b.view(dim), b.y, wa, clip);
    }
  }
  return total / static_cast<double>(data.size());
}

double ClippedLinearClass::sample_loss(const LabeledSample& s, std::span<const double> w) const {
  double p = 0.0;
  for (std::size_t j = 0; j < dim; ++j) p += s.features[j] * w[s.arm * dim + j];
  p = std::clamp(p, -clip, clip);
  return (p - s.label) * (p - s.label);
}

ThetaHats theta_hats(const ClippedLinearClass& cls, std::span<const double> g,
                     std::span<const double> g_def, const Dataset& def, const Dataset& err) {
  if (def.size() == 0 || err.size() == 0) throw std::invalid_argument("empty split part");
  return {cls.mean_loss(def, g_def) - cls.mean_loss(def, g),
          cls.mean_loss(err, g_def) - cls.mean_loss(err, g)};
}

ThetaHats theta_hats(const ClippedLinearClass& cls, std::span<const double> g,
                     std::span<const double> g_def, const SplitData<LabeledSample>& split) {
  if (split.def_part.empty() || split.err_part.empty())
    throw std::invalid_argument("empty split part");
  return theta_hats(cls, g, g_def, Dataset(split.def_part, cls.dim, cls.arms),
                    Dataset(split.err_part, cls.dim, cls.arms));
}

namespace {

void check_equal_split(std::size_t n_def, std::size_t n_err) {
  if (n_def != n_err || n_err == 0)
    throw std::invalid_argument("excess-risk bound needs equal nonempty split sizes");
}

void check_labels(const ClippedLinearClass& cls, const Dataset& d) {
  for (std::size_t a = 0; a < d.arms(); ++a)
    for (double y : d.block(a).y)
      if (!(std::abs(y) <= cls.label_bound))
        throw std::domain_error("label outside the declared label range; loss range unverified");
}

}  // namespace

double u_excess(const ClippedLinearClass& cls, std::span<const double> g,
                std::span<const double> g_def, const Dataset& def, const Dataset& err,
                ConfidenceLevel delta) {
  check_equal_split(def.size(), err.size());
  const ThetaHats t = theta_hats(cls, g, g_def, def, err);
  return combine_u(ErrorOrientation::target_minus_estimate,
                   hoeffding_excess_width(cls.loss_range(), err.size(), delta).value, t.theta_def,
                   t.theta_err);
}

ExcessRiskReport excess_risk_bound(const ClippedLinearClass& cls, std::span<const double> g_def,
                                   const Dataset& def, const Dataset& err, ConfidenceLevel delta,
                                   const ExcessRiskConfig& cfg) {
  check_equal_split(def.size(), err.size());
  check_labels(cls, def);
  check_labels(cls, err);
  const double width = hoeffding_excess_width(cls.loss_range(), err.size(), delta).value;
  const double base_def = cls.mean_loss(def, g_def);
  const double base_err = cls.mean_loss(err, g_def);

  ParametricPointwiseBound pb;
  pb.theta_def = [&](std::span<const double> w) { return base_def - cls.mean_loss(def, w); };
  pb.theta_err = [&](std::span<const double> w) { return base_err - cls.mean_loss(err, w); };
  pb.width = [width](std::span<const double>, ConfidenceLevel) { return width; };
  pb.orientation = ErrorOrientation::target_minus_estimate;

  const Box box = cls.box();
  std::vector<double> gdef_seed(g_def.begin(), g_def.end());
  box.clamp(gdef_seed);
  SolverConfig scfg = cfg.solver;
  scfg.seeds.insert(scfg.seeds.begin(), gdef_seed);

  ParametricLocalization loc = localize(box, pb, 0.0, delta, cfg.localization, scfg);

  ExcessRiskReport rep;
  rep.g_def.assign(g_def.begin(), g_def.end());
  rep.width = width;
  rep.bound_localized = loc.trace.xi();
  rep.vc_baseline = vc_baseline(cls.param_dim(), def.size(), delta);

  if (!cfg.compute_max_theta) {
    rep.max_theta_final = std::numeric_limits<double>::quiet_NaN();
    rep.bound_max_theta = std::numeric_limits<double>::quiet_NaN();
    rep.trace = std::move(loc.trace);
    rep.argmax = std::move(loc.argmax);
    rep.diagnostics = std::move(loc.diagnostics);
    return rep;
  }
  // Largest defining estimate over the final localized class.
  const double t_final = loc.trace.thresholds.back();
  SolverConfig mcfg = scfg;
  mcfg.seeds.insert(mcfg.seeds.end(), loc.argmax.begin(), loc.argmax.end());
  mcfg.seed = derive_seed(cfg.solver.seed, 0xfeed);
  FusedObjective theta_obj = [&](std::span<const double> w) -> Evaluation {
    const double td = pb.theta_def(w);
    return {td, -td <= t_final};
  };
  SolverResult mt = sup_parametric(theta_obj, box, mcfg);
  rep.max_theta_final = mt.value;
  rep.bound_max_theta = mt.value + loc.trace.xi();
  rep.localized_valid = mt.value <= cfg.localized_tolerance;
  rep.trace = std::move(loc.trace);
  rep.argmax = std::move(loc.argmax);
  rep.diagnostics = std::move(loc.diagnostics);
  return rep;
}

FiniteExcessReport excess_risk_bound(const FiniteModelLosses& losses, ConfidenceLevel delta,
                                     const LocalizationConfig& cfg) {
  const auto models = static_cast<std::size_t>(losses.def_losses.rows());
  if (models == 0) throw EmptyClassError("model class is empty");
  if (static_cast<std::size_t>(losses.err_losses.rows()) != models || losses.g_def >= models)
    throw std::invalid_argument("inconsistent finite model losses");
  check_equal_split(static_cast<std::size_t>(losses.def_losses.cols()),
                    static_cast<std::size_t>(losses.err_losses.cols()));
  if (losses.def_losses.minCoeff() < 0.0 || losses.err_losses.minCoeff() < 0.0 ||
      losses.def_losses.maxCoeff() > losses.loss_range ||
      losses.err_losses.maxCoeff() > losses.loss_range)
    throw std::domain_error("loss outside [0, M]");
  const auto n = static_cast<std::size_t>(losses.err_losses.cols());
  const double width = hoeffding_excess_width(losses.loss_range, n, delta).value;
  FinitePointwiseBound pb;
  pb.orientation = ErrorOrientation::target_minus_estimate;
  pb.width = FinitePointwiseBound::constant_width(width);
  const Eigen::VectorXd mdef = losses.def_losses.rowwise().mean();
  const Eigen::VectorXd merr = losses.err_losses.rowwise().mean();
  for (std::size_t g = 0; g < models; ++g) {
    pb.theta_def.push_back(mdef(losses.g_def) - mdef(g));
    pb.theta_err.push_back(merr(losses.g_def) - merr(g));
  }
  FiniteExcessReport rep;
  rep.localization = localize(pb, 0.0, delta, cfg);
  rep.theta_def = pb.theta_def;
  rep.width = width;
  rep.bound_localized = rep.localization.trace.xi();
  double mt = -std::numeric_limits<double>::infinity();
  const auto& last = rep.localization.members.back();
  for (std::size_t g = 0; g < models; ++g)
    if (last[g]) mt = std::max(mt, pb.theta_def[g]);
  rep.bound_max_theta = mt + rep.bound_localized;
  rep.localized_valid = mt <= 0.0;
  return rep;
}

double vc_baseline(std::size_t d, std::size_t n_def, ConfidenceLevel delta) {
  if (n_def < 1) throw std::invalid_argument("vc_baseline needs n_def >= 1");
  return 2.0 * (static_cast<double>(d) + std::log(1.0 / delta.value())) /
         static_cast<double>(n_def);
}

std::vector<double> fit_erm_linear(std::span<const LabeledSample> samples, double ridge) {
  if (samples.empty()) throw std::invalid_argument("no samples to fit");
  if (ridge < 0.0) throw std::invalid_argument("ridge weight must be nonnegative");
  const std::size_t d = samples.front().features.size();
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(d));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    if (s.features.size() != d) throw std::invalid_argument("ragged features");
    for (std::size_t j = 0; j < d; ++j) x(i, static_cast<Eigen::Index>(j)) = s.features[j];
    y(i) = s.label;
  }
  Eigen::VectorXd beta;
  if (ridge == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < static_cast<Eigen::Index>(d))
      throw std::domain_error("singular normal equations: design has rank " +
                              std::to_string(qr.rank()) + " < " + std::to_string(d));
    beta = qr.solve(y);
  } else {
    Eigen::MatrixXd a = x.transpose() * x;
    a.diagonal().array() += ridge;
    beta = a.llt().solve(x.transpose() * y);
  }
  return {beta.data(), beta.data() + beta.size()};
}

double true_excess_risk_sphere(std::span<const double> beta_hat, std::span<const double> beta,
                               double clip) {
  const std::size_t d = beta.size();
  if (beta_hat.size() != d || d < 3) throw std::invalid_argument("need matching dimension >= 3");
  Eigen::Map<const Eigen::VectorXd> bh(beta_hat.data(), d), b(beta.data(), d);
  if (bh.norm() <= clip && b.norm() <= clip) return (bh - b).squaredNorm() / static_cast<double>(d);

  // Coordinates of both vectors in an orthonormal basis of their span.
  Eigen::VectorXd e1 = bh.norm() > 0 ? Eigen::VectorXd(bh / bh.norm()) : Eigen::VectorXd(b / b.norm());
  Eigen::VectorXd r = b - b.dot(e1) * e1;
  Eigen::VectorXd e2;
  if (r.norm() > 1e-12 * (1.0 + b.norm())) {
    e2 = r / r.norm();
  } else {
    Eigen::Index k;
    e1.cwiseAbs().minCoeff(&k);
    e2 = Eigen::VectorXd::Unit(static_cast<Eigen::Index>(d), k);
    e2 -= e2.dot(e1) * e1;
    e2.normalize();
  }
  const double h1 = bh.dot(e1), h2 = bh.dot(e2), t1 = b.dot(e1), t2 = b.dot(e2);
  // The projection of a uniform point on the sphere onto a plane has radial
  // CDF 1 - (1 - r^2)^((d-2)/2) and uniform angle; integrate on a midpoint grid
  // in (CDF value, angle).
  constexpr int grid = 1024;
  const double expo = 2.0 / static_cast<double>(d - 2);
  long double acc = 0.0L;
  for (int i = 0; i < grid; ++i) {
    const double u = (i + 0.5) / grid;
    const double rad = std::sqrt(1.0 - std::pow(1.0 - u, expo));
    for (int j = 0; j < grid; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5) / grid;
      const double p1 = rad * std::cos(phi), p2 = rad * std::sin(phi);
      const double mean = t1 * p1 + t2 * p2;
      const double pred = std::clamp(h1 * p1 + h2 * p2, -clip, clip);
      const double best = std::clamp(mean, -clip, clip);
      acc += (pred - mean) * (pred - mean) - (best - mean) * (best - mean);
    }
  }
  return static_cast<double>(acc / (static_cast<long double>(grid) * grid));
}

std::vector<Fig2aRow> fig2a_experiment(std::span<const std::size_t> ns, std::size_t reps,
                                       ConfidenceLevel delta, std::uint64_t seed,
                                       const Fig2aConfig& cfg, unsigned jobs) {
  if (reps < 1) throw std::invalid_argument("fig2a_experiment needs reps >= 1");
  const std::size_t d = cfg.d;
  Sampler truth(make_rng(seed, 0, 0xbe7a));
  std::vector<double> beta = truth.normal_vector(d);
  {
    double s = 0.0;
    for (double v : beta) s += v * v;
    for (double& v : beta) v *= cfg.beta_norm / std::sqrt(s);
  }
  ClippedLinearClass cls;
  cls.dim = d;
  cls.coef_bound = 1.0;
  cls.clip = 1.0;
  cls.label_bound = cfg.beta_norm + cfg.noise_half_width;
  if (cls.label_bound > cls.clip)
    throw std::invalid_argument("labels must stay within the prediction clip for M = 4");
  cls.label_bound = cls.clip;

  std::vector<Fig2aRow> out;
  for (std::size_t n : ns) {
    if (n < 2 * d) throw std::invalid_argument("dataset size too small for least squares");
    auto per_rep = [&](std::size_t rep) {
      Sampler s(make_rng(seed, rep, 0x2a00 + n));
      std::vector<LabeledSample> data(n);
      for (auto& smp : data) {
        smp.features = s.unit_sphere(d);
        double m = 0.0;
        for (std::size_t j = 0; j < d; ++j) m += smp.features[j] * beta[j];
        smp.label = m + s.uniform(-cfg.noise_half_width, cfg.noise_half_width);
      }
      const auto split =
          split_sample<LabeledSample>(data, SplitSpec{0.5, SplitOrdering::sequential, 0});
      const std::vector<double> g_def = fit_erm_linear(split.def_part, 0.0);
      const Dataset def(split.def_part, d), err(split.err_part, d);
      ExcessRiskConfig bcfg = cfg.bound;
      bcfg.solver.seed = derive_seed(seed, rep, n);
      const ExcessRiskReport r = excess_risk_bound(cls, g_def, def, err, delta, bcfg);
      const double truth_excess = true_excess_risk_sphere(g_def, beta, cls.clip);
      const double theta_truth = cls.mean_loss(def, g_def) - cls.mean_loss(def, beta);
      const bool retained = r.trace.contains(r.trace.thresholds.size() - 1, theta_truth);
      const auto& xs = r.trace.xi_sequence;
      const bool monotone = std::is_sorted(xs.rbegin(), xs.rend());
      return Fig2aRow{n,
                      split.def_part.size(),
                      rep,
                      truth_excess,
                      r.bound_localized,
                      r.bound_max_theta,
                      r.vc_baseline,
                      r.trace.iterations(),
                      r.bound_localized >= truth_excess,
                      retained,
                      monotone};
    };
    auto rows = map_replicates(reps, jobs, per_rep);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

}  // namespace ee::excess
