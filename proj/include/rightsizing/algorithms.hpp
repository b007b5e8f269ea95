#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "rightsizing/model.hpp"
#include "rightsizing/subproblem.hpp"

namespace rightsizing {

enum class PolicyKind { Greedy, RegConvex, RegOffset };

std::string_view to_string(PolicyKind kind);

// Which regularized problem Algorithm 2 solves: the plain entropic step
// (Case1, 1 <= Ks <= Kc) or the offset-aware step with a stretched eta.
enum class OffsetCase { Case1, Case2 };

std::string_view to_string(OffsetCase c);

// Horizon-wide quantities the regularized policies are allowed to know in
// advance. Computed from the instance when not supplied, which is what the
// batch experiments do; pass them explicitly to run a policy on a prefix of
// a longer horizon.
struct HorizonBounds {
  double d_max = 0.0;
  double d_min = 0.0;       // smallest positive demand
  double min_price = 0.0;   // min over i, t of c_i(t)
  double min_offset = 0.0;  // min over i, t of r_i(t)
  double max_offset = 0.0;  // max over i, t of r_i(t)
};

// `allow_nonlinear` substitutes the linear lower-bound slope of each cost
// for c_i(t); otherwise non-linear costs are rejected.
HorizonBounds horizon_bounds(const Instance& instance, bool allow_nonlinear = false);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::Greedy;
  // Regularizer shift. Defaults to D_min, or 1 when every demand is zero.
  std::optional<double> eps;
  std::optional<HorizonBounds> bounds;
  // RegOffset only: accept non-linear costs (used for the energy-delay
  // experiments); the branch constants then use slope lower bounds.
  bool allow_nonlinear = false;
};

struct RunTrace {
  PolicyKind policy = PolicyKind::Greedy;
  Schedule schedule;
  std::vector<double> lambda;  // demand duals per slot
  Matrix l;                    // nonnegativity duals per slot and DC
  double eta = 0.0;            // 0 for greedy; +inf when the regularizer is off
  double eps = 0.0;
  bool eps_fallback = false;   // eps defaulted to 1 because D_min = 0
  std::optional<OffsetCase> branch;
  std::optional<double> ks;
  std::optional<double> kc;
  std::vector<double> kkt_residuals;  // worst residual per slot
};

RunTrace run_greedy(const Instance& instance, const SolverConfig& cfg = {});
RunTrace run_reg_convex(const Instance& instance, const PolicyConfig& policy,
                        const SolverConfig& cfg = {});
RunTrace run_reg_offset(const Instance& instance, const PolicyConfig& policy,
                        const SolverConfig& cfg = {});

// Dispatches on policy.kind.
RunTrace run_policy(const Instance& instance, const PolicyConfig& policy,
                    const SolverConfig& cfg = {});

}  // namespace rightsizing
