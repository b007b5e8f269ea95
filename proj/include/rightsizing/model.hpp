#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rightsizing/operational_cost.hpp"

namespace rightsizing {

// Dense row-major slots x data-centers array. Row t holds slot t+1.
template <class T>
class SlotGrid {
 public:
  SlotGrid() = default;
  SlotGrid(std::size_t slots, std::size_t dcs, const T& fill = T{})
      : slots_(slots), dcs_(dcs), data_(slots * dcs, fill) {}

  std::size_t slots() const noexcept { return slots_; }
  std::size_t dcs() const noexcept { return dcs_; }

  T& operator()(std::size_t t, std::size_t i) { return data_[t * dcs_ + i]; }
  const T& operator()(std::size_t t, std::size_t i) const { return data_[t * dcs_ + i]; }

  std::span<T> row(std::size_t t) { return {data_.data() + t * dcs_, dcs_}; }
  std::span<const T> row(std::size_t t) const { return {data_.data() + t * dcs_, dcs_}; }

  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const SlotGrid&, const SlotGrid&) = default;

 private:
  std::size_t slots_ = 0;
  std::size_t dcs_ = 0;
  std::vector<T> data_;
};

using Matrix = SlotGrid<double>;

// A complete right-sizing problem. Immutable once constructed; the
// constructor validates every invariant and throws on violation.
class Instance {
 public:
  Instance(std::vector<double> demand, std::vector<double> beta, Matrix offset,
           SlotGrid<OperationalCost> costs,
           std::optional<std::vector<double>> capacity = std::nullopt);

  std::size_t dcs() const noexcept { return beta_.size(); }
  std::size_t slots() const noexcept { return demand_.size(); }

  const std::vector<double>& demand() const noexcept { return demand_; }
  double demand(std::size_t t) const { return demand_[t]; }
  const std::vector<double>& beta() const noexcept { return beta_; }
  double beta(std::size_t i) const { return beta_[i]; }
  double beta_max() const noexcept { return beta_max_; }
  const Matrix& offset() const noexcept { return offset_; }
  double offset(std::size_t t, std::size_t i) const { return offset_(t, i); }
  const SlotGrid<OperationalCost>& costs() const noexcept { return costs_; }
  const OperationalCost& cost(std::size_t t, std::size_t i) const { return costs_(t, i); }
  const std::optional<std::vector<double>>& capacity() const noexcept { return capacity_; }

  // Effective bound on s(t, i): min(capacity_i, domain of f_{i,t}).
  double upper_bound(std::size_t t, std::size_t i) const;

  double d_max() const noexcept { return d_max_; }
  // Smallest strictly positive demand; 0 when all demands are zero.
  double d_min() const noexcept { return d_min_; }

  bool all_linear() const noexcept { return all_linear_; }
  bool has_offset() const noexcept { return has_offset_; }

  // First `t` slots of this instance.
  Instance prefix(std::size_t t) const;
  // Same instance with every offset replaced by zero.
  Instance without_offset() const;
  // Same instance with switching weights replaced.
  Instance with_beta(std::vector<double> beta) const;

 private:
  std::vector<double> demand_;
  std::vector<double> beta_;
  Matrix offset_;
  SlotGrid<OperationalCost> costs_;
  std::optional<std::vector<double>> capacity_;
  double beta_max_ = 0.0;
  double d_max_ = 0.0;
  double d_min_ = 0.0;
  bool all_linear_ = true;
  bool has_offset_ = false;
};

// T x N assignment; s(t, i) is the load of DC i+1 in slot t+1. The virtual
// row s(0) = 0 is implicit.
struct Schedule {
  Matrix s;

  Schedule() = default;
  explicit Schedule(Matrix m) : s(std::move(m)) {}
  Schedule(std::size_t slots, std::size_t dcs) : s(slots, dcs, 0.0) {}

  std::size_t slots() const noexcept { return s.slots(); }
  std::size_t dcs() const noexcept { return s.dcs(); }
  double operator()(std::size_t t, std::size_t i) const { return s(t, i); }
  double& operator()(std::size_t t, std::size_t i) { return s(t, i); }
};

struct SlotCost {
  double operational = 0.0;
  double switching = 0.0;
};

struct CostBreakdown {
  double operational = 0.0;
  double switching = 0.0;
  double total = 0.0;
  std::vector<SlotCost> per_slot;
};

// Throws DimensionError on shape mismatch and InfeasibleError (with the
// first violating slot) when demand or capacity is violated by more than
// feas_tol.
void check_schedule(const Instance& instance, const Schedule& schedule, double feas_tol = 1e-9);

// Operational plus one-sided switching cost of a feasible schedule.
CostBreakdown evaluate_cost(const Instance& instance, const Schedule& schedule,
                            double feas_tol = 1e-9);

struct LinearLowerBound {
  std::vector<double> per_dc;  // e_{0,i}
  double e0 = 0.0;             // min_i e_{0,i}
  bool vacuous = false;        // e0 == 0, so 1 + beta / e0 is unbounded
};

// Largest slopes e_{0,i} with f_{i,t}(x) >= e_{0,i} x for all t and x > 0.
LinearLowerBound e0(const Instance& instance);

}  // namespace rightsizing
