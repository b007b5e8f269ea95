#include <algorithm>
#include <cmath>
#include <limits>

#include "rightsizing/error.hpp"
#include "rightsizing/offline.hpp"

namespace rightsizing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mixed-radix indexing of grid states, DC 0 fastest.
struct Grid {
  std::vector<std::size_t> levels;  // per DC, count of grid points
  std::vector<std::size_t> stride;
  std::size_t states = 1;

  void decode(std::size_t k, std::vector<std::size_t>& out) const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      out[i] = k % levels[i];
      k /= levels[i];
    }
  }
};

// out[a] = min_b in[b] + weight * (h (a - b) - r)^+ along one axis, in place.
void min_convolve_axis(std::vector<double>& v, const Grid& g, std::size_t axis, double weight,
                       double h, double r) {
  const std::size_t K = g.levels[axis];
  const std::size_t st = g.stride[axis];
  std::vector<double> line(K), prefix(K), suffix(K + 1);
  for (std::size_t base = 0; base < g.states; ++base) {
    if ((base / st) % K != 0) continue;  // visit each line once via its first point
    for (std::size_t a = 0; a < K; ++a) line[a] = v[base + a * st];
    if (weight == 0.0) {
      // Free moves: every point sees the global minimum of the line.
      const double lo = *std::min_element(line.begin(), line.end());
      for (std::size_t a = 0; a < K; ++a) v[base + a * st] = lo;
      continue;
    }
    suffix[K] = kInf;
    for (std::size_t b = K; b-- > 0;) suffix[b] = std::min(suffix[b + 1], line[b]);
    double run = kInf;
    for (std::size_t b = 0; b < K; ++b) {
      run = std::min(run, line[b] - weight * h * static_cast<double>(b));
      prefix[b] = run;
    }
    for (std::size_t a = 0; a < K; ++a) {
      // Moves from b >= a - r/h are free.
      const double c = std::ceil(static_cast<double>(a) - r / h - 1e-12);
      const std::size_t free_from = c <= 0.0 ? 0 : static_cast<std::size_t>(c);
      double best = free_from < K ? suffix[free_from] : kInf;
      if (free_from > 0) {
        const std::size_t last = std::min(free_from, K) - 1;
        best = std::min(best, prefix[last] + weight * (h * static_cast<double>(a) - r));
      }
      v[base + a * st] = best;
    }
  }
}

}  // namespace

OfflineSolution solve_offline_dp(const Instance& instance, double grid_step,
                                 std::size_t max_cells) {
  if (!(grid_step > 0.0)) throw DomainError("grid step must be positive");
  const std::size_t N = instance.dcs();
  const std::size_t T = instance.slots();
  if (N > 3) throw DomainError("grid oracle supports at most 3 data centers");

  Grid g;
  g.levels.resize(N);
  g.stride.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    // Enough levels to cover D_max after rounding up, cut back by capacity;
    // open cost domains exclude their endpoint.
    double k = std::ceil(instance.d_max() / grid_step - 1e-9);
    for (std::size_t t = 0; t < T; ++t) {
      k = std::min(k, std::floor(instance.upper_bound(t, i) / grid_step + 1e-9));
    }
    for (std::size_t t = 0; t < T; ++t) {
      while (k > 0.0 && !(k * grid_step < instance.cost(t, i).domain_max())) k -= 1.0;
    }
    g.levels[i] = static_cast<std::size_t>(k) + 1;
    g.stride[i] = g.states;
    if (g.states > max_cells / g.levels[i]) throw DomainError("instance too large for the grid oracle");
    g.states *= g.levels[i];
  }
  if (T > 0 && g.states > max_cells / T) throw DomainError("instance too large for the grid oracle");

  std::vector<std::vector<double>> value(T);
  std::vector<double> prev(g.states, kInf);
  prev[0] = 0.0;  // s(0) = 0
  std::vector<std::size_t> idx(N);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> cur = prev;
    for (std::size_t i = 0; i < N; ++i) {
      min_convolve_axis(cur, g, i, instance.beta(i), grid_step, instance.offset(t, i));
    }
    const double need = std::ceil(instance.demand(t) / grid_step - 1e-9);
    for (std::size_t k = 0; k < g.states; ++k) {
      g.decode(k, idx);
      double units = 0.0;
      double op = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        units += static_cast<double>(idx[i]);
        op += instance.cost(t, i).value(static_cast<double>(idx[i]) * grid_step);
      }
      cur[k] = units >= need ? cur[k] + op : kInf;
    }
    value[t] = cur;
    prev = std::move(cur);
  }

  OfflineSolution out;
  out.method = OfflineMethod::GridDP;
  out.schedule = Schedule(T, N);
  if (T == 0) return out;

  const auto& last = value[T - 1];
  std::size_t state = static_cast<std::size_t>(
      std::min_element(last.begin(), last.end()) - last.begin());
  if (!std::isfinite(last[state])) throw InfeasibleError("no grid schedule meets demand", T);

  // Backtrack by rescanning predecessors of the chosen state.
  std::vector<std::size_t> cur_idx(N), prev_idx(N);
  for (std::size_t t = T; t-- > 0;) {
    g.decode(state, cur_idx);
    for (std::size_t i = 0; i < N; ++i) {
      out.schedule(t, i) = static_cast<double>(cur_idx[i]) * grid_step;
    }
    if (t == 0) break;
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < g.states; ++k) {
      const double base = value[t - 1][k];
      if (!std::isfinite(base)) continue;
      g.decode(k, prev_idx);
      double sw = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double jump = grid_step * (static_cast<double>(cur_idx[i]) -
                                         static_cast<double>(prev_idx[i])) -
                            instance.offset(t, i);
        sw += instance.beta(i) * std::max(jump, 0.0);
      }
      if (base + sw < best) {
        best = base + sw;
        arg = k;
      }
    }
    state = arg;
  }
  out.objective = evaluate_cost(instance, out.schedule).total;
  return out;
}

}  // namespace rightsizing
