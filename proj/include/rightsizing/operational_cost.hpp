#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

namespace rightsizing {

// f(x) = price * x
struct LinearCost {
  double price = 0.0;
};

// f(x) = (p + M) * x, where M is a tenfold surcharge on p in the slots where
// (slot mod period) >= dc. dc and slot are 1-based.
struct CyclicPenaltyCost {
  double base_price = 0.0;
  std::size_t dc = 1;
  std::size_t slot = 1;
  std::size_t period = 1;
};

// f(x) = p * (x - renewable)^+ + delay_weight * x * (delay_ms + 1000 / (service_rate - x))
//
// service_rate is in jobs per ms, so x must stay strictly below it. With
// smoothing > 0 the hinge is replaced by a softplus of that width, shifted so
// that f(0) = 0.
struct EnergyDelayCost {
  double price = 0.0;
  double renewable = 0.0;
  double delay_ms = 0.0;
  double service_rate = 0.1;
  double delay_weight = 1.0;
  double smoothing = 0.0;
};

// f(x) = a * x^2
struct QuadraticCost {
  double a = 0.0;
};

// Unit price after the cyclic surcharge for data center `dc` in `slot`
// (both 1-based) with `period` data centers.
double cyclic_penalty_price(double base_price, std::size_t dc, std::size_t slot,
                            std::size_t period);

// Energy plus delay cost of workload x. Throws DomainError when x is outside
// [0, service_rate).
double energy_delay_cost(double x, const EnergyDelayCost& params);

// A hinge term slope * (x - knot)^+ split out of a cost function.
struct Hinge {
  double slope = 0.0;
  double knot = 0.0;
};

// Convex, nondecreasing per-(dc, slot) operational cost.
//
// Every kind is represented as smooth(x) + hinge(x), which is the form the
// offline interior-point solver consumes. value(), derivative() and friends
// operate on the full function.
class OperationalCost {
 public:
  using Kind = std::variant<LinearCost, CyclicPenaltyCost, EnergyDelayCost, QuadraticCost>;

  OperationalCost() : kind_(LinearCost{}) {}
  explicit OperationalCost(Kind kind);

  static OperationalCost linear(double price) { return OperationalCost(LinearCost{price}); }
  static OperationalCost quadratic(double a) { return OperationalCost(QuadraticCost{a}); }

  const Kind& kind() const noexcept { return kind_; }

  // Linear and cyclic-penalty kinds.
  bool is_linear() const noexcept;
  // Per-unit price; only meaningful when is_linear().
  double unit_price() const;

  // Upper end of the open domain [0, domain_max); +inf except for energy-delay.
  double domain_max() const noexcept;

  double value(double x) const;
  // Right derivative; equals the derivative wherever f is differentiable.
  double derivative(double x) const;
  double left_derivative(double x) const;
  // Second derivative of the smooth part (hinges contribute nothing).
  double second_derivative(double x) const;

  // inf over x > 0 of f(x) / x, i.e. the largest e with f(x) >= e * x.
  double slope_lower_bound() const;

  // Non-smooth part, if any.
  std::optional<Hinge> hinge() const;
  double smooth_value(double x) const;
  double smooth_derivative(double x) const;

  // Whether f is affine on [a, b].
  bool linear_on(double a, double b) const;
  // Points where the derivative jumps.
  std::vector<double> kinks() const;

 private:
  Kind kind_;
  double price_ = 0.0;  // effective unit price for the linear kinds
};

}  // namespace rightsizing
