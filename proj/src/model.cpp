#include "rightsizing/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rightsizing/error.hpp"

namespace rightsizing {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

Instance::Instance(std::vector<double> demand, std::vector<double> beta, Matrix offset,
                   SlotGrid<OperationalCost> costs, std::optional<std::vector<double>> capacity)
    : demand_(std::move(demand)),
      beta_(std::move(beta)),
      offset_(std::move(offset)),
      costs_(std::move(costs)),
      capacity_(std::move(capacity)) {
  const std::size_t n = beta_.size();
  const std::size_t t_count = demand_.size();
  if (n == 0) throw DimensionError("instance needs at least one data center");
  if (offset_.slots() != t_count || offset_.dcs() != n) {
    throw DimensionError("offset matrix must be T x N");
  }
  if (costs_.slots() != t_count || costs_.dcs() != n) {
    throw DimensionError("cost grid must be T x N");
  }
  if (capacity_ && capacity_->size() != n) throw DimensionError("capacity must have N entries");

  for (std::size_t t = 0; t < t_count; ++t) {
    if (!finite_nonneg(demand_[t])) {
      throw DomainError("demand in slot " + std::to_string(t + 1) + " must be finite and >= 0");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!finite_nonneg(beta_[i])) throw DomainError("switching weights must be >= 0");
    beta_max_ = std::max(beta_max_, beta_[i]);
    if (capacity_ && !((*capacity_)[i] > 0.0)) throw DomainError("capacities must be positive");
  }
  for (double r : offset_.data()) {
    if (!finite_nonneg(r)) throw DomainError("offsets must be finite and >= 0");
    if (r > 0.0) has_offset_ = true;
  }
  for (const auto& f : costs_.data()) all_linear_ = all_linear_ && f.is_linear();

  d_max_ = 0.0;
  d_min_ = std::numeric_limits<double>::infinity();
  for (double d : demand_) {
    d_max_ = std::max(d_max_, d);
    if (d > 0.0) d_min_ = std::min(d_min_, d);
  }
  if (!std::isfinite(d_min_)) d_min_ = 0.0;

  for (std::size_t t = 0; t < t_count; ++t) {
    double room = 0.0;
    bool open = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double dom = costs_(t, i).domain_max();
      const double cap = capacity_ ? (*capacity_)[i] : std::numeric_limits<double>::infinity();
      room += std::min(dom, cap);
      open = open || dom <= cap;
    }
    const bool ok = open ? room > demand_[t] || std::isinf(room) : room >= demand_[t];
    if (!ok) {
      throw InfeasibleError("capacity cannot cover demand in slot " + std::to_string(t + 1), t + 1);
    }
  }
}

double Instance::upper_bound(std::size_t t, std::size_t i) const {
  const double dom = costs_(t, i).domain_max();
  return capacity_ ? std::min(dom, (*capacity_)[i]) : dom;
}

Instance Instance::prefix(std::size_t t) const {
  t = std::min(t, slots());
  const std::size_t n = dcs();
  Matrix off(t, n);
  SlotGrid<OperationalCost> c(t, n);
  for (std::size_t k = 0; k < t; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      off(k, i) = offset_(k, i);
      c(k, i) = costs_(k, i);
    }
  }
  return Instance({demand_.begin(), demand_.begin() + static_cast<std::ptrdiff_t>(t)}, beta_,
                  std::move(off), std::move(c), capacity_);
}

Instance Instance::without_offset() const {
  return Instance(demand_, beta_, Matrix(slots(), dcs(), 0.0), costs_, capacity_);
}

Instance Instance::with_beta(std::vector<double> beta) const {
  return Instance(demand_, std::move(beta), offset_, costs_, capacity_);
}

void check_schedule(const Instance& instance, const Schedule& schedule, double feas_tol) {
  if (schedule.slots() != instance.slots() || schedule.dcs() != instance.dcs()) {
    throw DimensionError("schedule is " + std::to_string(schedule.slots()) + "x" +
                         std::to_string(schedule.dcs()) + ", instance is " +
                         std::to_string(instance.slots()) + "x" + std::to_string(instance.dcs()));
  }
  const auto& cap = instance.capacity();
  for (std::size_t t = 0; t < instance.slots(); ++t) {
    double total = 0.0;
    for (std::size_t i = 0; i < instance.dcs(); ++i) {
      const double s = schedule(t, i);
      if (!std::isfinite(s) || s < -feas_tol) {
        throw InfeasibleError("negative or non-finite load in slot " + std::to_string(t + 1), t + 1);
      }
      if (cap && s > (*cap)[i] + feas_tol) {
        throw InfeasibleError("capacity exceeded in slot " + std::to_string(t + 1), t + 1);
      }
      total += s;
    }
    if (total < instance.demand(t) - feas_tol) {
      throw InfeasibleError("demand not met in slot " + std::to_string(t + 1), t + 1);
    }
  }
}

CostBreakdown evaluate_cost(const Instance& instance, const Schedule& schedule, double feas_tol) {
  check_schedule(instance, schedule, feas_tol);
  CostBreakdown out;
  out.per_slot.resize(instance.slots());
  for (std::size_t t = 0; t < instance.slots(); ++t) {
    SlotCost& slot = out.per_slot[t];
    for (std::size_t i = 0; i < instance.dcs(); ++i) {
      const double s = std::max(0.0, schedule(t, i));
      const double prev = t == 0 ? 0.0 : std::max(0.0, schedule(t - 1, i));
      slot.operational += instance.cost(t, i).value(s);
      slot.switching += instance.beta(i) * std::max(0.0, s - prev - instance.offset(t, i));
    }
    out.operational += slot.operational;
    out.switching += slot.switching;
  }
  out.total = out.operational + out.switching;
  return out;
}

LinearLowerBound e0(const Instance& instance) {
  LinearLowerBound out;
  out.per_dc.assign(instance.dcs(), std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < instance.slots(); ++t) {
    for (std::size_t i = 0; i < instance.dcs(); ++i) {
      out.per_dc[i] = std::min(out.per_dc[i], instance.cost(t, i).slope_lower_bound());
    }
  }
  out.e0 = instance.slots() == 0 ? 0.0 : *std::min_element(out.per_dc.begin(), out.per_dc.end());
  if (!std::isfinite(out.e0)) out.e0 = 0.0;
  out.vacuous = out.e0 <= 0.0;
  return out;
}

}  // namespace rightsizing
