#include "ee/core.hpp"

#include "ee/kernels.hpp"

namespace ee {

std::vector<double> FinitePointwiseBound::widths(ConfidenceLevel delta) const {
  std::vector<double> w(size());
  for (std::size_t h = 0; h < w.size(); ++h) {
    w[h] = width(h, delta);
    if (!(w[h] >= 0.0)) throw std::domain_error("width must be nonnegative");
  }
  return w;
}

std::function<double(std::size_t, ConfidenceLevel)> FinitePointwiseBound::constant_width(double b) {
  return [b](std::size_t, ConfidenceLevel) { return b; };
}

double pointwise_u(const FinitePointwiseBound& pb, std::size_t h, ConfidenceLevel delta) {
  if (h >= pb.size() || pb.theta_err.size() != pb.size())
    throw std::out_of_range("task handle outside the class");
  return combine_u(pb.orientation, pb.width(h, delta), pb.theta_def[h], pb.theta_err[h]);
}

double pointwise_u(const ParametricPointwiseBound& pb, const Box& domain,
                   std::span<const double> h, ConfidenceLevel delta) {
  if (!domain.contains(h)) throw std::out_of_range("parameter point outside the class domain");
  return combine_u(pb.orientation, pb.width(h, delta), pb.theta_def(h), pb.theta_err(h));
}

namespace {

void check_finite(const FinitePointwiseBound& pb) {
  if (pb.size() == 0) throw EmptyClassError("task class is empty");
  if (pb.theta_err.size() != pb.size())
    throw std::invalid_argument("defining and error estimates differ in length");
}

// Max of u over the handles selected by mask (empty = all).
kernels::ArgMax finite_max(const FinitePointwiseBound& pb, const std::vector<double>& w,
                           std::span<const std::uint8_t> mask) {
  const bool emt = pb.orientation == ErrorOrientation::estimate_minus_target;
  const auto& plus = emt ? pb.theta_def : pb.theta_err;
  const auto& minus = emt ? pb.theta_err : pb.theta_def;
  return kernels::masked_max_affine(w, plus, minus, mask);
}

}  // namespace

FiniteMax max_error_bound(const FinitePointwiseBound& pb, ConfidenceLevel delta) {
  check_finite(pb);
  const auto w = pb.widths(delta);
  const auto best = finite_max(pb, w, {});
  if (best.index == kernels::npos) throw std::domain_error("no finite pointwise bound in the class");
  return {best.value, best.index};
}

ParametricMax max_error_bound(const Box& domain, const ParametricPointwiseBound& pb,
                              ConfidenceLevel delta, const SolverConfig& cfg) {
  FusedObjective f = [&](std::span<const double> x) -> Evaluation {
    return {combine_u(pb.orientation, pb.width(x, delta), pb.theta_def(x), pb.theta_err(x)), true};
  };
  SolverResult r = sup_parametric(f, domain, cfg);
  return {r.value, std::move(r.point), std::move(r.diagnostics)};
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::non_decreasing: return "non_decreasing";
    case StopReason::tolerance: return "tolerance";
    case StopReason::max_iterations: return "max_iterations";
  }
  return "unknown";
}

bool LocalizationTrace::contains(std::size_t k, double theta_def) const {
  if (k >= thresholds.size()) throw std::out_of_range("localization step out of range");
  // Thresholds are non-increasing, so the last one implies all earlier ones.
  return k == 0 || -theta_def <= thresholds[k];
}

namespace {

// Shared stepping logic. step(k, threshold) returns the raw maximum over H_k.
// Returns false when iteration should stop.
bool advance(LocalizationTrace& t, double raw, const LocalizationConfig& cfg) {
  const double prev = t.xi_sequence.back();
  t.raw_xi.push_back(raw);
  t.xi_sequence.push_back(std::min(raw, prev));
  if (raw >= prev) {
    t.stop_reason = StopReason::non_decreasing;
    return false;
  }
  if (prev - raw < cfg.tolerance) {
    t.stop_reason = StopReason::tolerance;
    return false;
  }
  return true;
}

}  // namespace

FiniteLocalization localize(const FinitePointwiseBound& pb, double c, ConfidenceLevel delta,
                            const LocalizationConfig& cfg) {
  check_finite(pb);
  const auto w = pb.widths(delta);
  FiniteLocalization out;
  LocalizationTrace& t = out.trace;
  t.lower_bound_c = c;
  const std::size_t n = pb.size();

  std::vector<std::uint8_t> mask(n, 1);
  auto best = finite_max(pb, w, mask);
  t.xi_sequence.push_back(best.value);
  t.raw_xi.push_back(best.value);
  t.thresholds.push_back(std::numeric_limits<double>::infinity());
  out.members.push_back(mask);
  out.argmax.push_back(best.index);

  t.stop_reason = StopReason::max_iterations;
  for (std::size_t k = 1; k <= cfg.max_iterations; ++k) {
    const double threshold = t.xi_sequence.back() - c;
    std::size_t alive = 0;
    for (std::size_t h = 0; h < n; ++h) {
      if (mask[h] && !(-pb.theta_def[h] <= threshold)) mask[h] = 0;
      alive += mask[h];
    }
    if (alive == 0)
      throw EmptyLocalizedClassError("localized class became empty at step " + std::to_string(k));
    best = finite_max(pb, w, mask);
    t.thresholds.push_back(threshold);
    out.members.push_back(mask);
    out.argmax.push_back(best.index);
    if (!advance(t, best.value, cfg)) return out;
  }
  t.stop_reason = StopReason::max_iterations;
  return out;
}

ParametricLocalization localize(const Box& domain, const ParametricPointwiseBound& pb, double c,
                                ConfidenceLevel delta, const LocalizationConfig& cfg,
                                const SolverConfig& solver) {
  ParametricLocalization out;
  LocalizationTrace& t = out.trace;
  t.lower_bound_c = c;
  SolverConfig scfg = solver;

  auto run = [&](double threshold, std::size_t k) {
    FusedObjective f = [&](std::span<const double> x) -> Evaluation {
      const double td = pb.theta_def(x);
      if (!(-td <= threshold)) return {0.0, false};
      return {combine_u(pb.orientation, pb.width(x, delta), td, pb.theta_err(x)), true};
    };
    scfg.seed = derive_seed(solver.seed, k, 0x10c);
    try {
      return sup_parametric(f, domain, scfg);
    } catch (const SolverInfeasibleError&) {
      throw EmptyLocalizedClassError("no probe point satisfies the localized constraint at step " +
                                     std::to_string(k));
    }
  };

  SolverResult r = run(std::numeric_limits<double>::infinity(), 0);
  t.xi_sequence.push_back(r.value);
  t.raw_xi.push_back(r.value);
  t.thresholds.push_back(std::numeric_limits<double>::infinity());
  out.argmax.push_back(r.point);
  out.diagnostics.push_back(std::move(r.diagnostics));
  scfg.seeds.push_back(r.point);

  t.stop_reason = StopReason::max_iterations;
  for (std::size_t k = 1; k <= cfg.max_iterations; ++k) {
    const double threshold = t.xi_sequence.back() - c;
    r = run(threshold, k);
    t.thresholds.push_back(threshold);
    out.argmax.push_back(r.point);
    out.diagnostics.push_back(std::move(r.diagnostics));
    scfg.seeds.push_back(r.point);
    if (!advance(t, r.value, cfg)) return out;
  }
  return out;
}

}  // namespace ee
