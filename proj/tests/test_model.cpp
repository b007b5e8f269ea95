#include <doctest.h>

#include <cmath>

#include "rightsizing/error.hpp"
#include "rightsizing/model.hpp"
#include "support.hpp"

using namespace rightsizing;
using testing_support::Gen;
using testing_support::linear_instance;

namespace {

Schedule schedule_of(const std::vector<std::vector<double>>& rows) {
  Schedule s(rows.size(), rows.front().size());
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t i = 0; i < rows[t].size(); ++i) s(t, i) = rows[t][i];
  return s;
}

OperationalCost random_cost(Gen& g) {
  switch (g.index(0, 3)) {
    case 0: return OperationalCost::linear(g.uniform(0.0, 10.0));
    case 1:
      return OperationalCost(CyclicPenaltyCost{g.uniform(0.0, 5.0), g.index(1, 5), g.index(1, 50), 5});
    case 2:
      return OperationalCost(EnergyDelayCost{g.uniform(0.0, 20.0), g.uniform(0.0, 0.05),
                                             g.uniform(10.0, 260.0), 0.1, g.uniform(0.0, 1.0),
                                             g.coin(0.3) ? 0.005 : 0.0});
    default: return OperationalCost::quadratic(g.uniform(0.0, 3.0));
  }
}

}  // namespace

TEST_CASE("evaluate_cost on hand-sized schedules") {
  const auto one = linear_instance({{2}}, {5}, {3});
  auto c = evaluate_cost(one, schedule_of({{5}}));
  CHECK(c.operational == doctest::Approx(10.0));
  CHECK(c.switching == doctest::Approx(15.0));
  CHECK(c.total == doctest::Approx(25.0));

  Matrix r(2, 1, 0.0);
  r(1, 0) = 5.0;
  const auto absorbed = linear_instance({{1}, {1}}, {1, 6}, {4}, r);
  c = evaluate_cost(absorbed, schedule_of({{1}, {6}}));
  CHECK(c.per_slot[1].switching == 0.0);
  CHECK(c.total == doctest::Approx(7.0 + 4.0));  // only the first ramp pays

  // Two DCs, prices (1, 2) in both slots, beta 10, demand 1: all load on DC1
  // costs 1 + 1 of energy and one ramp of 10.
  const auto a = linear_instance({{1, 2}, {1, 2}}, {1, 1}, {10, 10});
  CHECK(evaluate_cost(a, schedule_of({{1, 0}, {1, 0}})).total == doctest::Approx(12.0));
}

TEST_CASE("evaluate_cost rejects bad schedules") {
  const auto a = linear_instance({{1, 2}, {1, 2}}, {1, 1}, {10, 10});
  CHECK_THROWS_AS(evaluate_cost(a, schedule_of({{1, 0}})), DimensionError);
  try {
    evaluate_cost(a, schedule_of({{1, 0}, {0.5, 0}}));
    FAIL("expected an infeasible schedule");
  } catch (const InfeasibleError& e) {
    CHECK(e.slot() == 2);
  }
}

TEST_CASE("instance validation") {
  SlotGrid<OperationalCost> costs(1, 1);
  CHECK_THROWS_AS(Instance({-1.0}, {1.0}, Matrix(1, 1, 0.0), costs), DomainError);
  CHECK_THROWS_AS(Instance({1.0}, {-1.0}, Matrix(1, 1, 0.0), costs), DomainError);
  CHECK_THROWS_AS(Instance({1.0}, {1.0}, Matrix(1, 1, -0.5), costs), DomainError);
  CHECK_THROWS_AS(Instance({1.0, 2.0}, {1.0}, Matrix(1, 1, 0.0), costs), DimensionError);
  CHECK_THROWS_AS(Instance({3.0}, {1.0}, Matrix(1, 1, 0.0), costs, std::vector<double>{2.0}),
                  InfeasibleError);

  const auto inst = linear_instance({{1}, {1}, {1}, {1}}, {0.0, 2.0, 0.5, 3.0}, {1});
  CHECK(inst.d_max() == 3.0);
  CHECK(inst.d_min() == 0.5);
  const auto idle = linear_instance({{1}}, {0.0}, {1});
  CHECK(idle.d_max() == 0.0);
  CHECK(idle.d_min() == 0.0);
}

TEST_CASE("cyclic surcharge follows slot mod period") {
  CHECK(cyclic_penalty_price(2.0, 3, 8, 5) == 22.0);
  CHECK(cyclic_penalty_price(2.0, 3, 7, 5) == 2.0);
  for (std::size_t t = 1; t < 20; ++t) CHECK(cyclic_penalty_price(1.0, 1, t, 1) == 1.0);
  const OperationalCost f(CyclicPenaltyCost{2.0, 3, 8, 5});
  CHECK(f.value(1.5) == doctest::Approx(33.0));
}

TEST_CASE("energy-delay cost values") {
  CHECK(energy_delay_cost(0.0, {3.0, 0.01, 100.0, 0.1, 1.0}) == 0.0);
  CHECK(energy_delay_cost(0.05, {1.0, 0.0, 0.0, 0.1, 0.0}) == doctest::Approx(0.05));
  const EnergyDelayCost p{0.0, 0.0, 10.0, 0.1, 1.0};
  const double x = 0.05;
  CHECK(energy_delay_cost(x, p) == doctest::Approx(x * 10.0 + x * 1000.0 / (0.1 - x)));
  CHECK(energy_delay_cost(x, p) == doctest::Approx(1000.5));
  CHECK_THROWS_AS(energy_delay_cost(0.1, p), DomainError);
  CHECK_THROWS_AS(energy_delay_cost(-0.01, p), DomainError);

  // Derivative against a central difference away from the kink.
  const OperationalCost f(EnergyDelayCost{4.0, 0.02, 50.0, 0.1, 0.5});
  for (double s : {0.005, 0.03, 0.07, 0.095}) {
    const double h = 1e-7;
    const double fd = (f.value(s + h) - f.value(s - h)) / (2 * h);
    CHECK(f.derivative(s) == doctest::Approx(fd).epsilon(1e-5));
  }
  CHECK(f.derivative(0.02) - f.left_derivative(0.02) == doctest::Approx(4.0));
}

TEST_CASE("e0 per cost kind") {
  SlotGrid<OperationalCost> costs(3, 1);
  costs(0, 0) = OperationalCost::linear(3);
  costs(1, 0) = OperationalCost::linear(5);
  costs(2, 0) = OperationalCost::linear(4);
  const Instance lin({1, 1, 1}, {1}, Matrix(3, 1, 0.0), costs);
  CHECK(e0(lin).e0 == 3.0);
  CHECK_FALSE(e0(lin).vacuous);

  SlotGrid<OperationalCost> quad(1, 1, OperationalCost::quadratic(1.0));
  const Instance q({1}, {1}, Matrix(1, 1, 0.0), quad);
  CHECK(e0(q).e0 == 0.0);
  CHECK(e0(q).vacuous);

  SlotGrid<OperationalCost> cyc(10, 1);
  for (std::size_t t = 0; t < 10; ++t) cyc(t, 0) = OperationalCost(CyclicPenaltyCost{2.0, 1, t + 1, 3});
  const Instance c({1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, {1}, Matrix(10, 1, 0.0), cyc);
  CHECK(e0(c).e0 == 2.0);
}

TEST_CASE("property: costs are nondecreasing and convex") {
  Gen g(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto f = random_cost(g);
    CAPTURE(trial);
    const double top = std::isfinite(f.domain_max()) ? 0.999 * f.domain_max() : 20.0;
    CHECK(f.value(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    const int n = 200;
    double prev_d = -1.0;
    for (int k = 0; k + 2 <= n; ++k) {
      const double a = top * k / n, b = top * (k + 1) / n, c = top * (k + 2) / n;
      const double fa = f.value(a), fb = f.value(b), fc = f.value(c);
      CHECK(fb >= fa - 1e-12 * (1 + std::abs(fa)));
      CHECK(fa - 2 * fb + fc >= -1e-9 * (1 + std::abs(fb)));
      const double d = f.derivative(a);
      CHECK(d >= prev_d - 1e-9 * (1 + std::abs(d)));
      prev_d = d;
    }
  }
}

TEST_CASE("property: cost breakdown is additive and ignores trailing idle slots") {
  Gen g(77);
  for (int trial = 0; trial < 100; ++trial) {
    testing_support::RandomLinear shape;
    shape.offset_scale = g.coin() ? 1.0 : 0.0;
    const auto inst = testing_support::random_linear(g, shape);
    Schedule s(inst.slots(), inst.dcs());
    for (std::size_t t = 0; t < inst.slots(); ++t) {
      double left = inst.demand(t);
      for (std::size_t i = 0; i < inst.dcs(); ++i) {
        const double take = i + 1 == inst.dcs() ? left : g.uniform(0.0, left);
        s(t, i) = take + g.uniform(0.0, 0.5);
        left -= take;
      }
    }
    const auto c = evaluate_cost(inst, s);
    double op = 0.0, sw = 0.0;
    for (const auto& p : c.per_slot) {
      op += p.operational;
      sw += p.switching;
    }
    CHECK(c.total == doctest::Approx(c.operational + c.switching).epsilon(1e-12));
    CHECK(op == doctest::Approx(c.operational).epsilon(1e-9));
    CHECK(sw == doctest::Approx(c.switching).epsilon(1e-9));

    // Same instance with two idle slots appended.
    const std::size_t T = inst.slots() + 2, N = inst.dcs();
    std::vector<double> demand = inst.demand();
    demand.resize(T, 0.0);
    SlotGrid<OperationalCost> costs(T, N, OperationalCost::linear(1.0));
    Matrix offset(T, N, 0.0);
    Schedule longer(T, N);
    for (std::size_t t = 0; t < inst.slots(); ++t)
      for (std::size_t i = 0; i < N; ++i) {
        costs(t, i) = inst.cost(t, i);
        offset(t, i) = inst.offset(t, i);
        longer(t, i) = s(t, i);
      }
    const Instance padded(demand, inst.beta(), offset, costs);
    CHECK(evaluate_cost(padded, longer).total == doctest::Approx(c.total).epsilon(1e-12));
  }
}

TEST_CASE("property: no switching cost when every rise fits in its offset") {
  Gen g(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t T = g.index(1, 6), N = g.index(1, 3);
    Schedule s(T, N);
    Matrix r(T, N, 0.0);
    std::vector<std::vector<double>> prices(T, std::vector<double>(N, 1.0));
    std::vector<double> demand(T, 0.0), beta(N, 5.0);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < N; ++i) {
        s(t, i) = g.uniform(0.0, 3.0);
        const double prev = t == 0 ? 0.0 : s(t - 1, i);
        r(t, i) = std::max(0.0, s(t, i) - prev) + g.uniform(0.0, 0.1);
      }
    const auto inst = linear_instance(prices, demand, beta, r);
    CHECK(evaluate_cost(inst, s).switching == 0.0);
  }
}
