#include "rightsizing/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rightsizing/error.hpp"

namespace rightsizing {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

OffsetConstants compute_ks_kc(const HorizonBounds& b, std::span<const double> beta, double eps) {
  if (!(b.min_price > 0.0)) throw DomainError("branch constants need a positive minimum price");
  if (!(b.d_min > 0.0)) throw DomainError("branch constants need a positive minimum demand");
  if (!(eps > 0.0)) throw DomainError("eps must be positive");

  const double beta_max = beta.empty() ? 0.0 : *std::max_element(beta.begin(), beta.end());
  const double beta_sum = std::accumulate(beta.begin(), beta.end(), 0.0);

  OffsetConstants k;
  if (b.min_offset > 0.0) {
    const double frac =
        2.0 * (1.0 + eps / b.d_min) * b.d_max * beta_max / (b.min_offset * b.min_price);
    k.kc = std::max(frac, 1.0);
  } else {
    k.kc = kInf;
  }
  const double den = 1.0 - beta_sum * b.max_offset / (b.min_price * b.d_min);
  k.ks = den == 0.0 ? kInf : 1.0 / den;
  k.branch = (1.0 <= k.ks && k.ks <= k.kc) ? OffsetCase::Case1 : OffsetCase::Case2;
  return k;
}

OffsetConstants compute_ks_kc(const Instance& instance, double eps) {
  return compute_ks_kc(horizon_bounds(instance), instance.beta(), eps);
}

double compute_lambda(double ks, double kc) { return (1.0 <= ks && ks <= kc) ? ks : kc; }

double compute_C(const Instance& instance, const RunTrace& trace) {
  if (trace.schedule.slots() != instance.slots() || trace.schedule.dcs() != instance.dcs()) {
    throw DimensionError("trace does not match instance");
  }
  const double total_demand =
      std::accumulate(instance.demand().begin(), instance.demand().end(), 0.0);
  if (!(total_demand > 0.0)) throw DomainError("C is undefined for zero total demand");
  if (!std::isfinite(trace.eta)) return 0.0;

  const double shift = trace.eps / static_cast<double>(instance.dcs());
  double acc = 0.0;
  for (std::size_t t = 0; t < instance.slots(); ++t) {
    for (std::size_t i = 0; i < instance.dcs(); ++i) {
      const double s = trace.schedule(t, i);
      const double prev = t == 0 ? 0.0 : trace.schedule(t - 1, i);
      if (s == 0.0) continue;
      acc += instance.beta(i) / trace.eta * std::log((s + shift) / (prev + shift)) * s;
    }
  }
  return acc / total_demand;
}

double bound_greedy(double e0, double beta_max) {
  if (beta_max == 0.0) return 1.0;
  return e0 > 0.0 ? 1.0 + beta_max / e0 : kInf;
}

double bound_reg_convex(double e0, double c, double beta_max) {
  if (beta_max == 0.0) return 1.0;
  const double den = e0 + c;
  return den > 0.0 ? 1.0 + beta_max / den : kInf;
}

double bound_reg_offset(double lambda, std::size_t dcs, double d_max, double d_min) {
  if (d_max == 0.0) return lambda;
  return lambda * (1.0 + 2.0 * std::log1p(static_cast<double>(dcs) * d_max / d_min));
}

double empirical_ratio(double online_total, double offline_total) {
  if (offline_total == 0.0) return online_total == 0.0 ? 1.0 : kInf;
  return online_total / offline_total;
}

double empirical_ratio(const CostBreakdown& online, const OfflineSolution& offline) {
  return empirical_ratio(online.total, offline.objective);
}

std::vector<LambdaPoint> bound_sweep(const Instance& instance, std::span<const double> r_values) {
  HorizonBounds b = horizon_bounds(instance);
  std::vector<LambdaPoint> out;
  out.reserve(r_values.size());
  for (double r : r_values) {
    if (!(r >= 0.0)) throw DomainError("offset values must be nonnegative");
    b.min_offset = r;
    b.max_offset = r;
    const auto k = compute_ks_kc(b, instance.beta(), b.d_min);
    out.push_back({r, k.ks, k.kc, compute_lambda(k.ks, k.kc), k.branch});
  }
  return out;
}

TheoryReport theory_report(const Instance& instance, const RunTrace* reg_trace,
                           const CostBreakdown* online, const OfflineSolution* offline) {
  TheoryReport rep;
  const auto lb = e0(instance);
  rep.e0 = lb.e0;
  rep.e0_vacuous = lb.vacuous;
  rep.beta_max = instance.beta_max();
  rep.bound_greedy = bound_greedy(rep.e0, rep.beta_max);

  const double d_min = instance.d_min();
  if (d_min > 0.0) {
    const auto b = horizon_bounds(instance, true);
    if (b.min_price > 0.0) {
      const auto k = compute_ks_kc(b, instance.beta(), d_min);
      rep.ks = k.ks;
      rep.kc = k.kc;
      rep.branch = k.branch;
    } else {
      rep.ks = 1.0;
      rep.kc = kInf;
      rep.branch = OffsetCase::Case1;
    }
  } else {
    rep.kc = kInf;
  }
  rep.lambda = compute_lambda(rep.ks, rep.kc);
  rep.bound_reg_offset =
      d_min > 0.0 ? bound_reg_offset(rep.lambda, instance.dcs(), instance.d_max(), d_min)
                  : rep.lambda;

  if (reg_trace != nullptr && d_min > 0.0) {
    rep.c = compute_C(instance, *reg_trace);
    rep.bound_reg_convex = bound_reg_convex(rep.e0, *rep.c, rep.beta_max);
  }
  if (online != nullptr && offline != nullptr) {
    rep.empirical_ratio = empirical_ratio(*online, *offline);
  }
  return rep;
}

}  // namespace rightsizing
