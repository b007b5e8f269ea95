#include "rightsizing/operational_cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rightsizing/error.hpp"

namespace rightsizing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }
double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// Delay part: w * x * (delay + 1000 / (mu - x)).
double delay_value(const EnergyDelayCost& p, double x) {
  return p.delay_weight * x * (p.delay_ms + 1000.0 / (p.service_rate - x));
}
double delay_derivative(const EnergyDelayCost& p, double x) {
  const double gap = p.service_rate - x;
  return p.delay_weight * (p.delay_ms + 1000.0 * p.service_rate / (gap * gap));
}
double delay_second(const EnergyDelayCost& p, double x) {
  const double gap = p.service_rate - x;
  return p.delay_weight * 2000.0 * p.service_rate / (gap * gap * gap);
}

double energy_smoothed(const EnergyDelayCost& p, double x) {
  const double w = p.smoothing;
  return p.price * w * (softplus((x - p.renewable) / w) - softplus(-p.renewable / w));
}

void check_params(const EnergyDelayCost& p) {
  if (!(p.price >= 0.0) || !(p.renewable >= 0.0) || !(p.delay_ms >= 0.0) ||
      !(p.service_rate > 0.0) || !(p.delay_weight >= 0.0) || !(p.smoothing >= 0.0)) {
    throw DomainError("energy-delay parameters must be nonnegative with positive service rate");
  }
}

}  // namespace

double cyclic_penalty_price(double base_price, std::size_t dc, std::size_t slot,
                            std::size_t period) {
  if (period == 0 || dc == 0 || dc > period || slot == 0) {
    throw DomainError("cyclic penalty needs 1 <= dc <= period and slot >= 1");
  }
  return (slot % period) >= dc ? base_price + 10.0 * base_price : base_price;
}

double energy_delay_cost(double x, const EnergyDelayCost& params) {
  check_params(params);
  if (!(x >= 0.0) || !(x < params.service_rate)) {
    throw DomainError("energy-delay workload " + std::to_string(x) +
                      " outside [0, " + std::to_string(params.service_rate) + ")");
  }
  const double energy = params.smoothing > 0.0
                            ? energy_smoothed(params, x)
                            : params.price * std::max(0.0, x - params.renewable);
  return energy + delay_value(params, x);
}

OperationalCost::OperationalCost(Kind kind) : kind_(std::move(kind)) {
  std::visit(Overloaded{
                 [&](const LinearCost& c) {
                   if (!(c.price >= 0.0)) throw DomainError("linear price must be nonnegative");
                   price_ = c.price;
                 },
                 [&](const CyclicPenaltyCost& c) {
                   if (!(c.base_price >= 0.0)) throw DomainError("base price must be nonnegative");
                   price_ = cyclic_penalty_price(c.base_price, c.dc, c.slot, c.period);
                 },
                 [&](const EnergyDelayCost& c) { check_params(c); },
                 [&](const QuadraticCost& c) {
                   if (!(c.a >= 0.0)) throw DomainError("quadratic coefficient must be nonnegative");
                 },
             },
             kind_);
}

bool OperationalCost::is_linear() const noexcept {
  return std::holds_alternative<LinearCost>(kind_) ||
         std::holds_alternative<CyclicPenaltyCost>(kind_);
}

double OperationalCost::unit_price() const {
  if (!is_linear()) throw DomainError("unit price requested for a non-linear cost");
  return price_;
}

double OperationalCost::domain_max() const noexcept {
  if (const auto* ed = std::get_if<EnergyDelayCost>(&kind_)) return ed->service_rate;
  return kInf;
}

double OperationalCost::value(double x) const {
  if (!(x >= 0.0) || !(x < domain_max())) {
    throw DomainError("operational cost evaluated outside its domain at x = " + std::to_string(x));
  }
  return smooth_value(x) + (hinge() ? hinge()->slope * std::max(0.0, x - hinge()->knot) : 0.0);
}

std::optional<Hinge> OperationalCost::hinge() const {
  if (const auto* ed = std::get_if<EnergyDelayCost>(&kind_)) {
    if (ed->smoothing == 0.0 && ed->price > 0.0) return Hinge{ed->price, ed->renewable};
  }
  return std::nullopt;
}

double OperationalCost::smooth_value(double x) const {
  return std::visit(Overloaded{
                        [&](const LinearCost&) { return price_ * x; },
                        [&](const CyclicPenaltyCost&) { return price_ * x; },
                        [&](const EnergyDelayCost& c) {
                          if (!(x < c.service_rate)) return kInf;
                          return (c.smoothing > 0.0 ? energy_smoothed(c, x) : 0.0) +
                                 delay_value(c, x);
                        },
                        [&](const QuadraticCost& c) { return c.a * x * x; },
                    },
                    kind_);
}

double OperationalCost::smooth_derivative(double x) const {
  return std::visit(Overloaded{
                        [&](const LinearCost&) { return price_; },
                        [&](const CyclicPenaltyCost&) { return price_; },
                        [&](const EnergyDelayCost& c) {
                          if (!(x < c.service_rate)) return kInf;
                          const double energy =
                              c.smoothing > 0.0
                                  ? c.price * sigmoid((x - c.renewable) / c.smoothing)
                                  : 0.0;
                          return energy + delay_derivative(c, x);
                        },
                        [&](const QuadraticCost& c) { return 2.0 * c.a * x; },
                    },
                    kind_);
}

double OperationalCost::derivative(double x) const {
  const auto h = hinge();
  return smooth_derivative(x) + (h && x >= h->knot ? h->slope : 0.0);
}

double OperationalCost::left_derivative(double x) const {
  const auto h = hinge();
  return smooth_derivative(x) + (h && x > h->knot ? h->slope : 0.0);
}

double OperationalCost::second_derivative(double x) const {
  return std::visit(Overloaded{
                        [&](const LinearCost&) { return 0.0; },
                        [&](const CyclicPenaltyCost&) { return 0.0; },
                        [&](const EnergyDelayCost& c) {
                          if (!(x < c.service_rate)) return kInf;
                          double energy = 0.0;
                          if (c.smoothing > 0.0) {
                            const double s = sigmoid((x - c.renewable) / c.smoothing);
                            energy = c.price * s * (1.0 - s) / c.smoothing;
                          }
                          return energy + delay_second(c, x);
                        },
                        [&](const QuadraticCost& c) { return 2.0 * c.a; },
                    },
                    kind_);
}

// Every kind is convex with f(0) = 0, so f(x)/x is nondecreasing and the
// infimum is the right derivative at zero.
double OperationalCost::slope_lower_bound() const { return derivative(0.0); }

bool OperationalCost::linear_on(double a, double b) const {
  return std::visit(Overloaded{
                        [&](const LinearCost&) { return true; },
                        [&](const CyclicPenaltyCost&) { return true; },
                        [&](const EnergyDelayCost& c) {
                          if (c.delay_weight > 0.0 || c.smoothing > 0.0) return false;
                          return b <= c.renewable || a >= c.renewable;
                        },
                        [&](const QuadraticCost& c) { return c.a == 0.0; },
                    },
                    kind_);
}

std::vector<double> OperationalCost::kinks() const {
  if (const auto h = hinge(); h && h->knot > 0.0) return {h->knot};
  return {};
}

}  // namespace rightsizing
