#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "rightsizing/algorithms.hpp"
#include "rightsizing/model.hpp"
#include "rightsizing/subproblem.hpp"

namespace rightsizing {

enum class OfflineMethod { ContinuousSolver, GridDP };

std::string_view to_string(OfflineMethod m);

struct OfflineSolution {
  Schedule schedule;
  double objective = 0.0;  // evaluate_cost(instance, schedule).total
  OfflineMethod method = OfflineMethod::ContinuousSolver;
  std::optional<double> certified_gap;
  int iterations = 0;
};

struct OfflineOptions {
  double rel_gap = 1e-9;  // stop once the barrier gap is below rel_gap * objective
  double barrier_growth = 10.0;
  int max_centering_steps = 200;
  int max_outer = 60;
};

// Whole-horizon optimum by a primal log-barrier method on the epigraph form
//   min sum f_{i,t}(s) + beta_i x_{i,t}
//   s.t. x_{i,t} >= s_i(t) - s_i(t-1) - r_i(t), x >= 0, s >= 0, sum_i s_i(t) >= D(t)
// with hinge parts of f lifted into extra epigraph variables.
OfflineSolution solve_offline(const Instance& instance, const SolverConfig& cfg = {},
                              const OfflineOptions& opts = {});

// Exact optimum over the grid {0, h, 2h, ...}^N by dynamic programming, with
// demands rounded up to the grid. Throws DomainError when the state space
// exceeds `max_cells` (slots x states per slot).
OfflineSolution solve_offline_dp(const Instance& instance, double grid_step,
                                 std::size_t max_cells = 12'000'000);

// Weak-duality lower bound on the offline optimum from a RegConvex trace on
// an offset-free, capacity-free instance:
//   sum_t sum_i f_{i,t}(s_i(t)) + (beta_i / eta) ln((s_i(t) + eps/N) / (s_i(t-1) + eps/N)) s_i(t)
double dual_lower_bound(const Instance& instance, const RunTrace& trace);

}  // namespace rightsizing
