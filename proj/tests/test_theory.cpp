#include <doctest.h>

#include <cmath>
#include <limits>

#include "rightsizing/error.hpp"
#include "rightsizing/offline.hpp"
#include "rightsizing/theory.hpp"
#include "support.hpp"

using namespace rightsizing;
using testing_support::Gen;
using testing_support::linear_instance;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PolicyConfig reg(std::optional<double> eps = std::nullopt) {
  PolicyConfig p;
  p.kind = PolicyKind::RegConvex;
  p.eps = eps;
  return p;
}

// C straight from its definition, with the schedule, eta and eps given.
double c_by_hand(const Instance& inst, const Schedule& s, double eta, double eps) {
  const double shift = eps / static_cast<double>(inst.dcs());
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < inst.slots(); ++t) {
    den += inst.demand(t);
    for (std::size_t i = 0; i < inst.dcs(); ++i) {
      const double prev = t == 0 ? 0.0 : s(t - 1, i);
      num += inst.beta(i) / eta * std::log((s(t, i) + shift) / (prev + shift)) * s(t, i);
    }
  }
  return num / den;
}

}  // namespace

TEST_CASE("lambda picks Ks only inside [1, Kc]") {
  CHECK(compute_lambda(1.0, 5.0) == 1.0);
  CHECK(compute_lambda(-3.0, 2.0) == 2.0);
  CHECK(compute_lambda(10.0, 4.0) == 4.0);
  CHECK(compute_lambda(1.0, kInf) == 1.0);
}

TEST_CASE("closed-form bounds") {
  CHECK(bound_greedy(2.0, 4.0) == doctest::Approx(3.0));
  CHECK(std::isinf(bound_greedy(0.0, 4.0)));
  CHECK(bound_greedy(0.0, 0.0) == 1.0);
  CHECK(bound_reg_convex(2.0, 2.0, 4.0) == doctest::Approx(2.0));
  CHECK(bound_reg_offset(2.0, 2, 4.0, 1.0) == doctest::Approx(2.0 * (1.0 + 2.0 * std::log(9.0))));
}

TEST_CASE("empirical ratio edge cases") {
  CHECK(empirical_ratio(12.0, 12.0) == 1.0);
  CHECK(empirical_ratio(0.0, 0.0) == 1.0);
  CHECK(std::isinf(empirical_ratio(1.0, 0.0)));
}

TEST_CASE("C equals beta for a single forced slot") {
  const double d = 2.5, beta = 3.0;
  const auto inst = linear_instance({{4.0}}, {d}, {beta});
  const auto trace = run_reg_convex(inst, reg());
  // eps = D_min = d, so eta = ln 2 and ln((d + eps) / eps) = ln 2.
  CHECK(trace.eta == doctest::Approx(std::log(2.0)));
  CHECK(compute_C(inst, trace) == doctest::Approx(beta));
}

TEST_CASE("C of a constant schedule comes from the first ramp only") {
  const auto inst = linear_instance({{1.0}, {1.0}, {1.0}}, {1.0, 1.0, 1.0}, {2.0});
  const auto trace = run_reg_convex(inst, reg(1.0));
  for (std::size_t t = 0; t < 3; ++t) REQUIRE(trace.schedule(t, 0) == doctest::Approx(1.0));
  const double first = 2.0 / trace.eta * std::log(2.0) * 1.0;
  CHECK(compute_C(inst, trace) == doctest::Approx(first / 3.0));
  CHECK(compute_C(inst, trace) == doctest::Approx(c_by_hand(inst, trace.schedule, trace.eta, 1.0)));
}

TEST_CASE("C needs demand and a matching trace") {
  const auto idle = linear_instance({{1.0}}, {0.0}, {1.0});
  CHECK_THROWS_AS(compute_C(idle, run_reg_convex(idle, reg())), DomainError);
  const auto a = linear_instance({{1.0}}, {1.0}, {1.0});
  const auto b = linear_instance({{1.0, 1.0}}, {1.0}, {1.0, 1.0});
  CHECK_THROWS_AS(compute_C(a, run_reg_convex(b, reg())), DimensionError);
}

TEST_CASE("branch constants") {
  HorizonBounds b;
  b.d_max = 4.0;
  b.d_min = 1.0;
  b.min_price = 2.0;
  const std::vector<double> beta{1.0, 3.0};

  auto k = compute_ks_kc(b, beta, 1.0);
  CHECK(k.ks == 1.0);
  CHECK(std::isinf(k.kc));
  CHECK(k.branch == OffsetCase::Case1);

  // sum(beta) max r = 4 * 0.5 = 2 = min c * D_min: the Ks denominator vanishes.
  b.min_offset = b.max_offset = 0.5;
  k = compute_ks_kc(b, beta, 1.0);
  CHECK(k.branch == OffsetCase::Case2);
  CHECK(k.kc == doctest::Approx(2.0 * 2.0 * 4.0 * 3.0 / (0.5 * 2.0)));

  // Kc = 1 once r >= 2 (1 + eps / D_min) D_max beta / min c = 24.
  b.min_offset = b.max_offset = 24.0;
  k = compute_ks_kc(b, beta, 1.0);
  CHECK(k.kc == 1.0);
  CHECK(k.ks < 0.0);
  CHECK(compute_lambda(k.ks, k.kc) == 1.0);

  b.min_price = 0.0;
  CHECK_THROWS_AS(compute_ks_kc(b, beta, 1.0), DomainError);
}

TEST_CASE("property: branch constants match their formulas") {
  Gen g(404);
  for (int trial = 0; trial < 500; ++trial) {
    HorizonBounds b;
    b.d_min = g.uniform(0.1, 2.0);
    b.d_max = b.d_min + g.uniform(0.0, 5.0);
    b.min_price = g.uniform(0.5, 10.0);
    b.min_offset = g.coin(0.2) ? 0.0 : g.uniform(0.0, 3.0);
    b.max_offset = b.min_offset + g.uniform(0.0, 3.0);
    std::vector<double> beta(g.index(1, 4));
    double sum = 0.0, top = 0.0;
    for (auto& x : beta) {
      x = g.uniform(0.0, 20.0);
      sum += x;
      top = std::max(top, x);
    }
    const double eps = g.uniform(0.05, 3.0);
    const auto k = compute_ks_kc(b, beta, eps);
    const double denom = 1.0 - sum * b.max_offset / (b.min_price * b.d_min);
    const double ks = 1.0 / denom;
    const double kc = b.min_offset == 0.0
                          ? kInf
                          : std::max(2.0 * (1.0 + eps / b.d_min) * b.d_max * top / (b.min_offset * b.min_price), 1.0);
    CAPTURE(trial);
    if (denom != 0.0) CHECK(k.ks == doctest::Approx(ks));
    if (std::isfinite(kc)) CHECK(k.kc == doctest::Approx(kc));
    else CHECK(std::isinf(k.kc));
    const bool case1 = k.ks >= 1.0 && k.ks <= k.kc;
    CHECK((k.branch == OffsetCase::Case1) == case1);
  }
}

TEST_CASE("Lambda curve rises from 1 and returns to 1") {
  const auto inst = linear_instance({{2, 3}, {4, 2}, {3, 3}}, {1, 2, 1.5}, {6, 6});
  // Pole of Ks at r = min c D_min / sum(beta) = 2 * 1 / 12; Kc = 1 at
  // r = 4 D_max beta / min c = 24.
  const std::vector<double> r{0.0, 0.05, 0.1, 0.2, 1.0, 10.0, 24.0, 100.0};
  const auto pts = bound_sweep(inst, r);
  REQUIRE(pts.size() == r.size());
  CHECK(pts[0].lambda == 1.0);
  CHECK(pts[0].branch == OffsetCase::Case1);
  CHECK(pts[1].branch == OffsetCase::Case1);
  CHECK(pts[2].lambda > pts[1].lambda);
  CHECK(pts[2].lambda == doctest::Approx(pts[2].ks));
  CHECK(pts[3].branch == OffsetCase::Case2);
  CHECK(pts[3].lambda == doctest::Approx(pts[3].kc));
  CHECK(pts[4].lambda < pts[3].lambda);
  CHECK(pts[6].lambda == doctest::Approx(1.0));
  CHECK(pts[7].lambda == 1.0);
}

TEST_CASE("property: the theorem bounds hold on small linear instances") {
  Gen g(2024);
  for (int trial = 0; trial < 80; ++trial) {
    testing_support::RandomLinear shape;
    shape.max_dcs = 2;
    shape.max_slots = 4;
    const auto inst = testing_support::random_linear(g, shape);
    CAPTURE(trial);
    const double opt = std::min(solve_offline(inst).objective, solve_offline_dp(inst, 0.01).objective);

    const auto trace = run_reg_convex(inst, reg());
    const double c = compute_C(inst, trace);
    CHECK(c >= -1e-9);
    CHECK(c <= inst.beta_max() + 1e-9);
    CHECK(c == doctest::Approx(c_by_hand(inst, trace.schedule, trace.eta, trace.eps)));

    const auto rep = theory_report(inst, &trace);
    REQUIRE(rep.bound_reg_convex.has_value());
    CHECK(*rep.bound_reg_convex <= rep.bound_greedy + 1e-12);

    const double greedy = evaluate_cost(inst, run_greedy(inst).schedule).total;
    const double alg1 = evaluate_cost(inst, trace.schedule).total;
    CHECK(greedy / opt <= rep.bound_greedy + 1e-6);
    CHECK(alg1 / opt <= *rep.bound_reg_convex + 1e-6);
    CHECK(dual_lower_bound(inst, trace) <= opt + 1e-6);
  }
}
