#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "rightsizing/operational_cost.hpp"

namespace rightsizing {

struct SolverConfig {
  double lambda_tol = 1e-10;  // relative width of the final dual bracket
  double kkt_tol = 1e-8;      // bound on stationarity / slackness residuals
  double feas_tol = 1e-9;     // allowed constraint violation
  int max_bisections = 200;
  int max_newton = 100;
};

// (z + eps/N) ln((z + eps/N) / (prev + eps/N)) - z
double entropic_term(double z, double prev, double eps_over_n);

// One slot of the regularized online problem:
//
//   min  sum_i f_i(s_i) + (1/eta) sum_i beta_i [entropic_term(z_i, prev_i, eps/N)]
//   s.t. sum_i s_i >= demand, 0 <= s_i <= capacity_i
//
// with z_i = s_i, or z_i = max(s_i - r_i, prev_i) when `offset` is present.
// eta = +inf switches the regularizer off.
struct SubproblemSpec {
  std::vector<double> prev;
  double demand = 0.0;
  double eps = 1.0;
  double eta = 1.0;
  std::vector<double> beta;
  std::vector<OperationalCost> costs;
  std::optional<std::vector<double>> offset;
  std::optional<std::vector<double>> capacity;
};

struct StepResult {
  std::vector<double> s;
  double lambda = 0.0;           // dual of the demand constraint
  std::vector<double> l;         // duals of s_i >= 0
  std::vector<double> u;         // duals of s_i <= capacity_i
  double kkt_residual = 0.0;     // max_i |d/ds_i objective - lambda - l_i + u_i|
  double slackness = 0.0;        // max(max_i s_i l_i, lambda (sum s - demand))
};

StepResult solve_step(const SubproblemSpec& spec, const SolverConfig& cfg = {});

// Objective of a SubproblemSpec at `s` (used by tests and oracles).
double step_objective(const SubproblemSpec& spec, std::span<const double> s);

// One slot of the greedy policy:
//
//   min  sum_i f_i(s_i) + beta_i (s_i - prev_i - r_i)^+
//   s.t. sum_i s_i >= demand, 0 <= s_i <= capacity_i
struct GreedySpec {
  std::vector<double> prev;
  double demand = 0.0;
  std::vector<double> beta;
  std::vector<OperationalCost> costs;
  std::vector<double> offset;  // empty means zero
  std::optional<std::vector<double>> capacity;
};

StepResult solve_greedy_step(const GreedySpec& spec, const SolverConfig& cfg = {});

double greedy_objective(const GreedySpec& spec, std::span<const double> s);

namespace detail {

// Penalty added to f_i in a single coordinate.
struct EntropicPenalty {
  double prev = 0.0;
  double shift = 0.0;   // eps / N
  double weight = 0.0;  // beta_i / eta
};
struct EntropicOffsetPenalty {
  double prev = 0.0;
  double offset = 0.0;
  double shift = 0.0;
  double weight = 0.0;
};
struct HingePenalty {
  double knot = 0.0;  // prev + r
  double weight = 0.0;
};
using Penalty = std::variant<EntropicPenalty, EntropicOffsetPenalty, HingePenalty>;

// g(s) = f(s) + penalty(s) on [0, upper].
class Coordinate {
 public:
  Coordinate(const OperationalCost& f, Penalty penalty, double upper);

  double upper() const noexcept { return upper_; }
  double value(double s) const;
  double right_derivative(double s) const;
  double left_derivative(double s) const;
  double second_derivative(double s) const;

  // Smallest / largest minimizer of g(s) - lambda s over [0, upper]; either
  // may be +inf when g is affine with slope <= lambda on an unbounded tail.
  double lowest_response(double lambda, const SolverConfig& cfg) const;
  double highest_response(double lambda, const SolverConfig& cfg) const;

  // Slopes of the segments on which g is affine.
  std::vector<double> flat_slopes() const;
  // Endpoints of the pieces between kinks, sorted.
  std::vector<double> segment_points() const;

 private:
  double penalty_value(double s) const;
  double penalty_derivative(double s, bool left) const;
  double penalty_second(double s) const;
  bool penalty_linear_on(double a, double b) const;
  double response(double lambda, bool highest, const SolverConfig& cfg) const;

  const OperationalCost* f_;
  Penalty penalty_;
  double upper_;
};

// Minimizes sum_i g_i(s_i) subject to sum_i s_i >= demand.
StepResult solve_separable(std::span<const Coordinate> coords, double demand,
                           const SolverConfig& cfg);

}  // namespace detail

}  // namespace rightsizing
