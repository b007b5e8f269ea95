#include "rightsizing/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rightsizing/error.hpp"
#include "rightsizing/theory.hpp"

namespace rightsizing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<OperationalCost> slot_costs(const Instance& inst, std::size_t t) {
  const auto row = inst.costs().row(t);
  return {row.begin(), row.end()};
}

std::vector<double> slot_offsets(const Instance& inst, std::size_t t) {
  const auto row = inst.offset().row(t);
  return {row.begin(), row.end()};
}

// Demand-independent slot bounds: capacity folded with the cost domain.
std::optional<std::vector<double>> slot_upper(const Instance& inst, std::size_t t) {
  bool finite = false;
  std::vector<double> up(inst.dcs());
  for (std::size_t i = 0; i < inst.dcs(); ++i) {
    up[i] = inst.upper_bound(t, i);
    finite = finite || std::isfinite(up[i]);
  }
  if (!finite) return std::nullopt;
  return up;
}

void record(RunTrace& trace, std::size_t t, const StepResult& step) {
  for (std::size_t i = 0; i < step.s.size(); ++i) {
    trace.schedule(t, i) = step.s[i];
    trace.l(t, i) = step.l[i];
  }
  trace.lambda[t] = step.lambda;
  trace.kkt_residuals[t] = std::max(step.kkt_residual, step.slackness);
}

RunTrace empty_trace(const Instance& inst, PolicyKind kind) {
  RunTrace trace;
  trace.policy = kind;
  trace.schedule = Schedule(inst.slots(), inst.dcs());
  trace.lambda.assign(inst.slots(), 0.0);
  trace.l = Matrix(inst.slots(), inst.dcs(), 0.0);
  trace.kkt_residuals.assign(inst.slots(), 0.0);
  return trace;
}

double resolve_eps(const PolicyConfig& policy, const HorizonBounds& b, bool& fallback) {
  fallback = false;
  if (policy.eps) {
    if (!(*policy.eps > 0.0)) throw DomainError("eps must be positive");
    return *policy.eps;
  }
  if (b.d_min > 0.0) return b.d_min;
  fallback = true;
  return 1.0;
}

// ln(1 + N D_max / eps); +inf (regularizer off) for an all-zero horizon.
double base_eta(std::size_t n, double d_max, double eps) {
  const double eta = std::log1p(static_cast<double>(n) * d_max / eps);
  return eta > 0.0 ? eta : kInf;
}

// Runs the regularized recursion; `offset_form` selects z = max(s - r, prev).
void run_regularized(const Instance& inst, RunTrace& trace, bool offset_form,
                     const SolverConfig& cfg) {
  const std::size_t n = inst.dcs();
  std::vector<double> prev(n, 0.0);
  for (std::size_t t = 0; t < inst.slots(); ++t) {
    SubproblemSpec spec;
    spec.prev = prev;
    spec.demand = inst.demand(t);
    spec.eps = trace.eps;
    spec.eta = trace.eta;
    spec.beta = inst.beta();
    spec.costs = slot_costs(inst, t);
    if (offset_form) spec.offset = slot_offsets(inst, t);
    spec.capacity = slot_upper(inst, t);
    const auto step = solve_step(spec, cfg);
    record(trace, t, step);
    prev = step.s;
  }
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Greedy:
      return "greedy";
    case PolicyKind::RegConvex:
      return "reg";
    case PolicyKind::RegOffset:
      return "reg-offset";
  }
  return "?";
}

std::string_view to_string(OffsetCase c) { return c == OffsetCase::Case1 ? "Case1" : "Case2"; }

HorizonBounds horizon_bounds(const Instance& instance, bool allow_nonlinear) {
  HorizonBounds b;
  b.d_max = instance.d_max();
  b.d_min = instance.d_min();
  b.min_price = kInf;
  b.min_offset = kInf;
  b.max_offset = 0.0;
  for (std::size_t t = 0; t < instance.slots(); ++t) {
    for (std::size_t i = 0; i < instance.dcs(); ++i) {
      const auto& f = instance.cost(t, i);
      double price;
      if (f.is_linear()) {
        price = f.unit_price();
      } else if (allow_nonlinear) {
        price = f.slope_lower_bound();
      } else {
        throw DomainError("offset-aware policy requires linear operational costs");
      }
      b.min_price = std::min(b.min_price, price);
      b.min_offset = std::min(b.min_offset, instance.offset(t, i));
      b.max_offset = std::max(b.max_offset, instance.offset(t, i));
    }
  }
  if (instance.slots() == 0) {
    b.min_price = 0.0;
    b.min_offset = 0.0;
  }
  return b;
}

RunTrace run_greedy(const Instance& instance, const SolverConfig& cfg) {
  RunTrace trace = empty_trace(instance, PolicyKind::Greedy);
  std::vector<double> prev(instance.dcs(), 0.0);
  for (std::size_t t = 0; t < instance.slots(); ++t) {
    GreedySpec spec;
    spec.prev = prev;
    spec.demand = instance.demand(t);
    spec.beta = instance.beta();
    spec.costs = slot_costs(instance, t);
    spec.offset = slot_offsets(instance, t);
    spec.capacity = slot_upper(instance, t);
    const auto step = solve_greedy_step(spec, cfg);
    record(trace, t, step);
    prev = step.s;
  }
  return trace;
}

RunTrace run_reg_convex(const Instance& instance, const PolicyConfig& policy,
                        const SolverConfig& cfg) {
  RunTrace trace = empty_trace(instance, PolicyKind::RegConvex);
  HorizonBounds b;
  if (policy.bounds) {
    b = *policy.bounds;
  } else {
    b.d_max = instance.d_max();
    b.d_min = instance.d_min();
  }
  trace.eps = resolve_eps(policy, b, trace.eps_fallback);
  trace.eta = base_eta(instance.dcs(), b.d_max, trace.eps);
  run_regularized(instance, trace, false, cfg);
  return trace;
}

RunTrace run_reg_offset(const Instance& instance, const PolicyConfig& policy,
                        const SolverConfig& cfg) {
  if (!instance.all_linear() && !policy.allow_nonlinear) {
    throw DomainError("offset-aware policy requires linear operational costs");
  }
  RunTrace trace = empty_trace(instance, PolicyKind::RegOffset);
  const HorizonBounds b =
      policy.bounds ? *policy.bounds : horizon_bounds(instance, policy.allow_nonlinear);
  trace.eps = resolve_eps(policy, b, trace.eps_fallback);
  const double eta = base_eta(instance.dcs(), b.d_max, trace.eps);

  OffsetConstants k;
  if (b.d_min > 0.0) {
    k = compute_ks_kc(b, instance.beta(), trace.eps);
  } else {
    k = OffsetConstants{1.0, kInf, OffsetCase::Case1};
  }
  trace.ks = k.ks;
  trace.kc = k.kc;
  trace.branch = k.branch;
  trace.eta = k.branch == OffsetCase::Case1 ? eta : k.kc * eta;
  run_regularized(instance, trace, k.branch == OffsetCase::Case2, cfg);
  return trace;
}

RunTrace run_policy(const Instance& instance, const PolicyConfig& policy,
                    const SolverConfig& cfg) {
  switch (policy.kind) {
    case PolicyKind::Greedy:
      return run_greedy(instance, cfg);
    case PolicyKind::RegConvex:
      return run_reg_convex(instance, policy, cfg);
    case PolicyKind::RegOffset:
      return run_reg_offset(instance, policy, cfg);
  }
  throw DomainError("unknown policy");
}

}  // namespace rightsizing
