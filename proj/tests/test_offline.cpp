#include <doctest.h>

#include <cmath>

#include "rightsizing/error.hpp"
#include "rightsizing/offline.hpp"
#include "support.hpp"

using namespace rightsizing;
using testing_support::Gen;
using testing_support::linear_instance;

namespace {

Instance instance_a() { return linear_instance({{1, 2}, {1, 2}}, {1, 1}, {10, 10}); }

double max_price(const Instance& inst) {
  double m = 0.0;
  for (std::size_t t = 0; t < inst.slots(); ++t)
    for (std::size_t i = 0; i < inst.dcs(); ++i) m = std::max(m, inst.cost(t, i).unit_price());
  return m;
}

}  // namespace

TEST_CASE("two-DC instance: both solvers find 12") {
  const auto inst = instance_a();
  const auto cont = solve_offline(inst);
  CHECK(cont.objective == doctest::Approx(12.0).epsilon(1e-7));
  CHECK(cont.schedule(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  const auto dp = solve_offline_dp(inst, 0.01);
  CHECK(dp.method == OfflineMethod::GridDP);
  CHECK(dp.objective == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("no switching cost decomposes per slot") {
  const auto inst = linear_instance({{3, 1}, {1, 4}, {2, 2}}, {1, 2, 3}, {0, 0});
  const double expected = 1 * 1 + 2 * 1 + 3 * 2;
  CHECK(solve_offline(inst).objective == doctest::Approx(expected).epsilon(1e-7));
  CHECK(solve_offline_dp(inst, 0.05).objective == doctest::Approx(expected));
}

TEST_CASE("single DC with falling demand tracks demand") {
  SlotGrid<OperationalCost> costs(4, 1, OperationalCost::quadratic(1.0));
  const Instance inst({3.0, 2.0, 2.0, 0.5}, {4.0}, Matrix(4, 1, 0.0), costs);
  const auto sol = solve_offline(inst);
  const double d[] = {3.0, 2.0, 2.0, 0.5};
  for (std::size_t t = 0; t < 4; ++t) CHECK(sol.schedule(t, 0) == doctest::Approx(d[t]).epsilon(1e-6));
}

TEST_CASE("offsets make switching free in the offline problem") {
  const auto inst = linear_instance({{1, 2}, {3, 1}}, {1, 1}, {10, 10}, Matrix(2, 2, 1.0));
  CHECK(solve_offline(inst).objective == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(solve_offline_dp(inst, 0.01).objective == doctest::Approx(2.0));
}

TEST_CASE("single slot DP equals a direct grid search") {
  SlotGrid<OperationalCost> costs(1, 2);
  costs(0, 0) = OperationalCost::quadratic(1.0);
  costs(0, 1) = OperationalCost::linear(1.5);
  const Instance inst({2.0}, {1.0, 0.5}, Matrix(1, 2, 0.0), costs);
  const double h = 0.01;
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= 200; ++a) {
    const double s1 = a * h;
    const double s2 = std::max(0.0, 2.0 - s1);
    best = std::min(best, s1 * s1 + 1.0 * s1 + 1.5 * s2 + 0.5 * s2);
  }
  CHECK(solve_offline_dp(inst, h).objective == doctest::Approx(best).epsilon(1e-12));
  CHECK(solve_offline(inst).objective == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("DP guards its state space") {
  const auto inst = linear_instance({{1, 1, 1, 1}}, {1}, {1, 1, 1, 1});
  CHECK_THROWS_AS(solve_offline_dp(inst, 0.1), DomainError);
  CHECK_THROWS_AS(solve_offline_dp(instance_a(), 1e-6, 1000), DomainError);
}

TEST_CASE("energy-delay costs stay inside the service-rate domain") {
  SlotGrid<OperationalCost> costs(3, 2);
  for (std::size_t t = 0; t < 3; ++t) {
    costs(t, 0) = OperationalCost(EnergyDelayCost{10.0, 0.01, 30.0, 0.1, 0.01});
    costs(t, 1) = OperationalCost(EnergyDelayCost{5.0, 0.0, 120.0, 0.1, 0.01});
  }
  const Instance inst({0.05, 0.15, 0.08}, {20.0, 20.0}, Matrix(3, 2, 0.0), costs);
  const auto sol = solve_offline(inst);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 2; ++i) CHECK(sol.schedule(t, i) < 0.1);
  const auto dp = solve_offline_dp(inst, 0.001);
  CHECK(sol.objective <= dp.objective + 1e-9);
  CHECK(sol.objective == doctest::Approx(dp.objective).epsilon(0.01));
}

TEST_CASE("dual lower bound of a single forced slot equals c d + beta d") {
  const double d = 2.0, c = 3.0, beta = 5.0, eps = 0.7;
  const auto inst = linear_instance({{c}}, {d}, {beta});
  PolicyConfig p;
  p.kind = PolicyKind::RegConvex;
  p.eps = eps;
  const auto trace = run_reg_convex(inst, p);
  CHECK(dual_lower_bound(inst, trace) == doctest::Approx(c * d + beta * d));
}

TEST_CASE("dual lower bound needs an offset-free convex trace") {
  const auto inst = linear_instance({{1}}, {1}, {1}, Matrix(1, 1, 0.5));
  PolicyConfig p;
  p.kind = PolicyKind::RegConvex;
  CHECK_THROWS_AS(dual_lower_bound(inst, run_reg_convex(inst, p)), DomainError);
  CHECK_THROWS_AS(dual_lower_bound(inst.without_offset(), run_greedy(inst)), DomainError);
}

TEST_CASE("property: continuous solver agrees with the DP oracle and bounds every policy") {
  Gen g(31337);
  for (int trial = 0; trial < 60; ++trial) {
    testing_support::RandomLinear shape;
    shape.max_dcs = 2;
    shape.offset_scale = g.coin(0.3) ? 1.0 : 0.0;
    const auto inst = testing_support::random_linear(g, shape);
    CAPTURE(trial);
    const auto cont = solve_offline(inst);
    const auto dp = solve_offline_dp(inst, 0.01);
    CHECK_NOTHROW(check_schedule(inst, cont.schedule));
    CHECK(cont.objective == doctest::Approx(evaluate_cost(inst, cont.schedule).total));
    const double slack = 2.0 * 0.01 * static_cast<double>(inst.slots()) * (max_price(inst) + inst.beta_max());
    CHECK(cont.objective <= dp.objective + 1e-7 * dp.objective);
    CHECK(dp.objective - cont.objective <= slack);

    for (auto kind : {PolicyKind::Greedy, PolicyKind::RegConvex, PolicyKind::RegOffset}) {
      PolicyConfig p;
      p.kind = kind;
      const auto online = evaluate_cost(inst, run_policy(inst, p).schedule).total;
      CHECK(cont.objective <= online * (1.0 + 1e-7));
    }
    if (!inst.has_offset()) {
      PolicyConfig p;
      p.kind = PolicyKind::RegConvex;
      CHECK(dual_lower_bound(inst, run_reg_convex(inst, p)) <= cont.objective + 1e-6);
    }
  }
}
