#include "ee/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ee/random.hpp"

namespace ee {

Box::Box(std::vector<double> lo, std::vector<double> hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.empty())
    throw std::invalid_argument("box bounds must be nonempty and of equal length");
  for (std::size_t j = 0; j < lower.size(); ++j)
    if (!(lower[j] < upper[j])) throw std::invalid_argument("box needs lower < upper per coordinate");
}

Box Box::cube(std::size_t dim, double lo, double hi) {
  return Box(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (!(x[j] >= lower[j] && x[j] <= upper[j])) return false;
  return true;
}

void Box::clamp(std::span<double> x) const {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], lower[j], upper[j]);
}

namespace {

class Counter {
 public:
  Counter(const FusedObjective& f, const SolverConfig& cfg, SolverDiagnostics& diag)
      : f_(f), cfg_(cfg), diag_(diag), start_(std::chrono::steady_clock::now()) {}

  Evaluation operator()(std::span<const double> x) {
    ++diag_.evaluations;
    if (cfg_.max_evaluations > 0 && diag_.evaluations > cfg_.max_evaluations)
      throw SolverTimeoutError("solver evaluation budget exhausted");
    if (cfg_.time_budget.count() > 0 && (diag_.evaluations & 63u) == 1u &&
        std::chrono::steady_clock::now() - start_ > cfg_.time_budget)
      throw SolverTimeoutError("solver time budget exhausted");
    Evaluation e = f_(x);
    if (!std::isfinite(e.value)) e.feasible = false;
    return e;
  }

 private:
  const FusedObjective& f_;
  const SolverConfig& cfg_;
  SolverDiagnostics& diag_;
  std::chrono::steady_clock::time_point start_;
};

struct Probe {
  std::vector<double> x;
  double value;
  bool seeded;
};

std::size_t grid_points_per_axis(std::size_t budget, std::size_t dim) {
  std::size_t g = 1;
  for (;;) {
    double total = std::pow(static_cast<double>(g + 1), static_cast<double>(dim));
    if (total > static_cast<double>(budget)) break;
    ++g;
  }
  return g;
}

RestartEndpoint ascend(Counter& eval, const Box& box, std::vector<double> x, double fx,
                       const SolverConfig& cfg) {
  const std::size_t d = box.dim();
  double max_width = 0.0;
  for (std::size_t j = 0; j < d; ++j) max_width = std::max(max_width, box.upper[j] - box.lower[j]);
  double t = 0.25 * max_width;
  RestartEndpoint out{x, x, fx, 0};
  std::vector<double> g(d), probe(d), y(d);
  std::size_t it = 0;
  for (; it < cfg.max_iterations; ++it) {
    for (std::size_t j = 0; j < d; ++j) {
      const double h = cfg.fd_scale * (1.0 + std::abs(x[j]));
      probe = x;
      const double xp = std::min(x[j] + h, box.upper[j]);
      const double xm = std::max(x[j] - h, box.lower[j]);
      probe[j] = xp;
      const Evaluation ep = eval(probe);
      probe[j] = xm;
      const Evaluation em = eval(probe);
      double gj = 0.0;
      if (ep.feasible && em.feasible && xp > xm)
        gj = (ep.value - em.value) / (xp - xm);
      else if (ep.feasible && xp > x[j])
        gj = (ep.value - fx) / (xp - x[j]);
      else if (em.feasible && xm < x[j])
        gj = (fx - em.value) / (x[j] - xm);
      if ((x[j] >= box.upper[j] && gj > 0.0) || (x[j] <= box.lower[j] && gj < 0.0)) gj = 0.0;
      g[j] = gj;
    }
    const double norm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
    if (!(norm > 0.0)) break;
    bool accepted = false;
    while (t >= cfg.min_step) {
      for (std::size_t j = 0; j < d; ++j) y[j] = x[j] + t * g[j] / norm;
      box.clamp(y);
      if (y == x) {
        t *= 0.5;
        continue;
      }
      const Evaluation ey = eval(y);
      if (ey.feasible && ey.value > fx) {
        x = y;
        fx = ey.value;
        t = std::min(2.0 * t, max_width);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  out.point = x;
  out.value = fx;
  out.iterations = it;
  return out;
}

}  // namespace

SolverResult sup_parametric(const FusedObjective& f, const Box& domain, const SolverConfig& cfg) {
  const std::size_t d = domain.dim();
  if (d == 0) throw std::invalid_argument("solver domain is empty");
  SolverResult result{};
  SolverDiagnostics& diag = result.diagnostics;
  Counter eval(f, cfg, diag);

  std::vector<Probe> feasible;
  auto consider = [&](std::vector<double> x, bool seeded) {
    ++diag.probes;
    const Evaluation e = eval(x);
    if (e.feasible) {
      ++diag.feasible_probes;
      feasible.push_back({std::move(x), e.value, seeded});
    }
  };

  for (const auto& s : cfg.seeds) {
    if (s.size() != d) throw std::invalid_argument("solver seed has wrong dimension");
    std::vector<double> x = s;
    domain.clamp(x);
    consider(std::move(x), true);
  }
  const std::size_t g = grid_points_per_axis(cfg.grid_budget, d);
  if (g >= 3) {
    diag.grid_scan = true;
    std::vector<std::size_t> idx(d, 0);
    for (;;) {
      std::vector<double> x(d);
      for (std::size_t j = 0; j < d; ++j)
        x[j] = domain.lower[j] + (domain.upper[j] - domain.lower[j]) * static_cast<double>(idx[j]) /
                                     static_cast<double>(g - 1);
      consider(std::move(x), false);
      std::size_t j = 0;
      while (j < d && ++idx[j] == g) idx[j++] = 0;
      if (j == d) break;
    }
  } else {
    Sampler s(make_rng(cfg.seed, 0, 0x9e0b));
    std::vector<double> center(d);
    for (std::size_t j = 0; j < d; ++j) center[j] = 0.5 * (domain.lower[j] + domain.upper[j]);
    consider(center, false);
    for (std::size_t p = 0; p < cfg.random_probes; ++p) {
      std::vector<double> x(d);
      for (std::size_t j = 0; j < d; ++j) x[j] = s.uniform(domain.lower[j], domain.upper[j]);
      consider(std::move(x), false);
    }
  }
  if (feasible.empty())
    throw SolverInfeasibleError("constraint infeasible at every probe point (" +
                                std::to_string(diag.probes) + " probes)");

  // Seeds first, then probes by decreasing value; duplicates skipped.
  std::stable_sort(feasible.begin(), feasible.end(), [](const Probe& a, const Probe& b) {
    if (a.seeded != b.seeded) return a.seeded;
    return a.value > b.value;
  });
  std::vector<const Probe*> starts;
  for (const auto& p : feasible) {
    if (starts.size() >= std::max<std::size_t>(cfg.restarts, 1)) break;
    bool dup = false;
    for (const Probe* q : starts) dup = dup || q->x == p.x;
    if (!dup) starts.push_back(&p);
  }

  result.value = -std::numeric_limits<double>::infinity();
  for (const Probe& p : feasible)
    if (p.value > result.value) {
      result.value = p.value;
      result.point = p.x;
    }
  for (const Probe* p : starts) {
    RestartEndpoint r = ascend(eval, domain, p->x, p->value, cfg);
    if (r.value > result.value) {
      result.value = r.value;
      result.point = r.point;
    }
    diag.restarts.push_back(std::move(r));
  }
  return result;
}

SolverResult sup_parametric(const std::function<double(std::span<const double>)>& objective,
                            const Box& domain,
                            const std::function<bool(std::span<const double>)>& constraint,
                            const SolverConfig& cfg) {
  FusedObjective f = [&](std::span<const double> x) -> Evaluation {
    if (constraint && !constraint(x)) return {0.0, false};
    return {objective(x), true};
  };
  return sup_parametric(f, domain, cfg);
}

}  // namespace ee
