#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "rightsizing/model.hpp"

namespace testing_support {

using rightsizing::Instance;
using rightsizing::Matrix;
using rightsizing::OperationalCost;
using rightsizing::SlotGrid;

// Seeded generator for hand-rolled property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return lo + static_cast<std::size_t>(rng_() % (hi - lo + 1));
  }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

 private:
  std::mt19937_64 rng_;
};

// prices[t][i] per slot and DC.
inline Instance linear_instance(const std::vector<std::vector<double>>& prices,
                                std::vector<double> demand, std::vector<double> beta,
                                Matrix offset = {}) {
  const std::size_t T = demand.size();
  const std::size_t N = beta.size();
  SlotGrid<OperationalCost> costs(T, N);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < N; ++i) costs(t, i) = OperationalCost::linear(prices[t][i]);
  if (offset.slots() == 0) offset = Matrix(T, N, 0.0);
  return Instance(std::move(demand), std::move(beta), std::move(offset), std::move(costs));
}

struct RandomLinear {
  std::size_t max_dcs = 3;
  std::size_t max_slots = 5;
  double price_lo = 1.0, price_hi = 10.0;
  double beta_hi = 20.0;
  double demand_lo = 0.1, demand_hi = 5.0;
  double offset_scale = 0.0;  // offsets drawn in [0, offset_scale * D_max]
  double demand_quantum = 0.0;  // > 0 rounds demands to multiples of it
};

inline Instance random_linear(Gen& g, const RandomLinear& p) {
  const std::size_t N = g.index(1, p.max_dcs);
  const std::size_t T = g.index(1, p.max_slots);
  std::vector<std::vector<double>> prices(T, std::vector<double>(N));
  for (auto& row : prices)
    for (auto& c : row) c = g.uniform(p.price_lo, p.price_hi);
  std::vector<double> demand(T), beta(N);
  for (auto& d : demand) {
    d = g.uniform(p.demand_lo, p.demand_hi);
    if (p.demand_quantum > 0.0) d = std::max(p.demand_quantum, std::round(d / p.demand_quantum) * p.demand_quantum);
  }
  for (auto& b : beta) b = g.uniform(0.0, p.beta_hi);
  double d_max = 0.0;
  for (double d : demand) d_max = std::max(d_max, d);
  Matrix offset(T, N, 0.0);
  if (p.offset_scale > 0.0) {
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < N; ++i) offset(t, i) = g.uniform(0.0, p.offset_scale * d_max);
  }
  return linear_instance(prices, std::move(demand), std::move(beta), std::move(offset));
}


// Brute-force minimum of a convex `obj` over {0 <= s_i <= box_i, sum s >= demand},
// N <= 3. The last coordinate is minimized exactly (golden section) for each
// grid point of the others; a coarse pass is refined around its best point.
inline double grid_minimum(const std::function<double(const std::vector<double>&)>& obj,
                           const std::vector<double>& box, double demand, double step) {
  const std::size_t n = box.size();
  std::vector<double> s(n, 0.0);
  auto inner = [&](std::vector<double>& v) {
    double used = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) used += v[i];
    double lo = std::max(0.0, demand - used);
    double hi = box[n - 1];
    if (lo > hi + 1e-12) return std::numeric_limits<double>::infinity();
    hi = std::max(lo, hi);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    for (int k = 0; k < 80 && b - a > 1e-12; ++k) {
      const double c = b - phi * (b - a), d = a + phi * (b - a);
      v[n - 1] = c;
      const double fc = obj(v);
      v[n - 1] = d;
      const double fd = obj(v);
      if (fc <= fd) b = d; else a = c;
    }
    double best = std::numeric_limits<double>::infinity();
    for (double x : {lo, hi, 0.5 * (a + b)}) {
      v[n - 1] = x;
      best = std::min(best, obj(v));
    }
    return best;
  };
  if (n == 1) return inner(s);

  auto sweep = [&](const std::vector<double>& lo, const std::vector<double>& hi, double h,
                   std::vector<double>& arg) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> v(n, 0.0);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i + 1 == n) {
        const double f = inner(v);
        if (f < best) {
          best = f;
          arg = v;
        }
        return;
      }
      const std::size_t steps = static_cast<std::size_t>(std::floor((hi[i] - lo[i]) / h + 1e-9));
      for (std::size_t k = 0; k <= steps + 1; ++k) {
        v[i] = std::min(lo[i] + static_cast<double>(k) * h, hi[i]);
        rec(i + 1);
      }
    };
    rec(0);
    return best;
  };

  std::vector<double> lo(n, 0.0), hi = box, arg;
  const double coarse = std::max(step, 1e-2 * *std::max_element(box.begin(), box.end()));
  double best = sweep(lo, hi, coarse, arg);
  if (coarse > step) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      lo[i] = std::max(0.0, arg[i] - 2.0 * coarse);
      hi[i] = std::min(box[i], arg[i] + 2.0 * coarse);
    }
    best = std::min(best, sweep(lo, hi, step, arg));
  }
  // One more pass a decade finer, so a kink between grid points is not missed.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    lo[i] = std::max(0.0, arg[i] - 2.0 * step);
    hi[i] = std::min(box[i], arg[i] + 2.0 * step);
  }
  return std::min(best, sweep(lo, hi, 0.1 * step, arg));
}

}  // namespace testing_support
