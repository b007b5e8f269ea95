#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rightsizing/algorithms.hpp"
#include "rightsizing/model.hpp"
#include "rightsizing/offline.hpp"

namespace rightsizing {

struct OffsetConstants {
  double ks = 1.0;  // may be negative or infinite
  double kc = 1.0;  // +inf when the smallest offset is zero
  OffsetCase branch = OffsetCase::Case1;
};

// Branch constants of the offset-aware policy for shift `eps`.
OffsetConstants compute_ks_kc(const HorizonBounds& bounds, std::span<const double> beta,
                              double eps);
OffsetConstants compute_ks_kc(const Instance& instance, double eps);

// Ks when 1 <= Ks <= Kc, Kc otherwise.
double compute_lambda(double ks, double kc);

// Trajectory constant of a RegConvex trace:
//   sum_t sum_i (beta_i / eta) ln((s_i(t) + eps/N) / (s_i(t-1) + eps/N)) s_i(t) / sum_t D(t)
double compute_C(const Instance& instance, const RunTrace& trace);

double bound_greedy(double e0, double beta_max);
double bound_reg_convex(double e0, double c, double beta_max);
// Lambda (1 + 2 ln(1 + N D_max / D_min)).
double bound_reg_offset(double lambda, std::size_t dcs, double d_max, double d_min);

// online / offline; +inf when the offline cost is zero and the online cost
// is not, 1 when both are zero.
double empirical_ratio(const CostBreakdown& online, const OfflineSolution& offline);
double empirical_ratio(double online_total, double offline_total);

struct LambdaPoint {
  double r = 0.0;
  double ks = 1.0;
  double kc = 1.0;
  double lambda = 1.0;
  OffsetCase branch = OffsetCase::Case1;
};

// Lambda as a function of a uniform offset r on `instance` (its own offsets
// are ignored), with eps = D_min.
std::vector<LambdaPoint> bound_sweep(const Instance& instance, std::span<const double> r_values);

struct TheoryReport {
  double e0 = 0.0;
  bool e0_vacuous = false;
  double beta_max = 0.0;
  std::optional<double> c;
  double ks = 1.0;
  double kc = 1.0;
  double lambda = 1.0;
  OffsetCase branch = OffsetCase::Case1;
  double bound_greedy = 0.0;
  std::optional<double> bound_reg_convex;
  double bound_reg_offset = 0.0;
  std::optional<double> empirical_ratio;
};

// Constants and bounds for `instance`; `reg_trace` (a RegConvex run) adds C
// and the Algorithm-1 bound, `online`/`offline` add the empirical ratio.
TheoryReport theory_report(const Instance& instance, const RunTrace* reg_trace = nullptr,
                           const CostBreakdown* online = nullptr,
                           const OfflineSolution* offline = nullptr);

}  // namespace rightsizing
