#include "rightsizing/subproblem.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rightsizing/error.hpp"

namespace rightsizing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHuge = 1e300;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

double entropic_term(double z, double prev, double eps_over_n) {
  const double a = z + eps_over_n;
  return a * std::log(a / (prev + eps_over_n)) - z;
}

namespace detail {

Coordinate::Coordinate(const OperationalCost& f, Penalty penalty, double upper)
    : f_(&f), penalty_(penalty), upper_(std::min(upper, f.domain_max())) {}

double Coordinate::penalty_value(double s) const {
  return std::visit(
      Overloaded{
          [&](const EntropicPenalty& p) {
            return p.weight == 0.0 ? 0.0 : p.weight * entropic_term(s, p.prev, p.shift);
          },
          [&](const EntropicOffsetPenalty& p) {
            if (p.weight == 0.0) return 0.0;
            return p.weight * entropic_term(std::max(s - p.offset, p.prev), p.prev, p.shift);
          },
          [&](const HingePenalty& p) { return p.weight * std::max(0.0, s - p.knot); },
      },
      penalty_);
}

double Coordinate::penalty_derivative(double s, bool left) const {
  return std::visit(
      Overloaded{
          [&](const EntropicPenalty& p) {
            return p.weight == 0.0 ? 0.0 : p.weight * std::log((s + p.shift) / (p.prev + p.shift));
          },
          [&](const EntropicOffsetPenalty& p) {
            if (p.weight == 0.0 || s <= p.prev + p.offset) return 0.0;
            return p.weight * std::log((s - p.offset + p.shift) / (p.prev + p.shift));
          },
          [&](const HingePenalty& p) {
            const bool above = left ? s > p.knot : s >= p.knot;
            return above ? p.weight : 0.0;
          },
      },
      penalty_);
}

double Coordinate::penalty_second(double s) const {
  return std::visit(Overloaded{
                        [&](const EntropicPenalty& p) { return p.weight / (s + p.shift); },
                        [&](const EntropicOffsetPenalty& p) {
                          if (s <= p.prev + p.offset) return 0.0;
                          return p.weight / (s - p.offset + p.shift);
                        },
                        [&](const HingePenalty&) { return 0.0; },
                    },
                    penalty_);
}

bool Coordinate::penalty_linear_on(double a, double b) const {
  return std::visit(Overloaded{
                        [&](const EntropicPenalty& p) { return p.weight == 0.0; },
                        [&](const EntropicOffsetPenalty& p) {
                          return p.weight == 0.0 || b <= p.prev + p.offset;
                        },
                        [&](const HingePenalty& p) {
                          return p.weight == 0.0 || b <= p.knot || a >= p.knot;
                        },
                    },
                    penalty_);
}

double Coordinate::value(double s) const { return f_->value(s) + penalty_value(s); }

double Coordinate::right_derivative(double s) const {
  if (!(s < f_->domain_max())) return kInf;
  return f_->derivative(s) + penalty_derivative(s, false);
}

double Coordinate::left_derivative(double s) const {
  if (!(s < f_->domain_max())) return kInf;
  return f_->left_derivative(s) + penalty_derivative(s, true);
}

double Coordinate::second_derivative(double s) const {
  return f_->second_derivative(s) + penalty_second(s);
}

std::vector<double> Coordinate::segment_points() const {
  std::vector<double> pts{0.0};
  for (double k : f_->kinks()) pts.push_back(k);
  std::visit(Overloaded{
                 [&](const EntropicPenalty&) {},
                 [&](const EntropicOffsetPenalty& p) { pts.push_back(p.prev + p.offset); },
                 [&](const HingePenalty& p) { pts.push_back(p.knot); },
             },
             penalty_);
  if (std::isfinite(upper_)) pts.push_back(upper_);
  std::erase_if(pts, [&](double p) { return p < 0.0 || p > upper_; });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::vector<double> Coordinate::flat_slopes() const {
  std::vector<double> slopes;
  const auto pts = segment_points();
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double a = pts[k];
    const double b = pts[k + 1];
    if (b > a && f_->linear_on(a, b) && penalty_linear_on(a, b)) {
      slopes.push_back(right_derivative(a));
    }
  }
  if (!std::isfinite(upper_)) {
    const double a = pts.back();
    if (f_->linear_on(a, kInf) && penalty_linear_on(a, kInf)) slopes.push_back(right_derivative(a));
  }
  return slopes;
}

double Coordinate::response(double lambda, bool highest, const SolverConfig& cfg) const {
  // `below(s)` holds exactly on [0, answer).
  auto below = [&](double s) {
    return highest ? left_derivative(s) <= lambda : right_derivative(s) < lambda;
  };
  if (!highest && !(right_derivative(0.0) < lambda)) return 0.0;
  if (highest && right_derivative(0.0) > lambda) return 0.0;

  double lo = 0.0;
  double hi;
  if (std::isfinite(upper_)) {
    if (below(upper_)) return upper_;
    hi = upper_;
  } else {
    const auto pts = segment_points();
    const double last = pts.back();
    if (f_->linear_on(last, kInf) && penalty_linear_on(last, kInf)) {
      const double slope = right_derivative(last);
      if (highest ? slope <= lambda : slope < lambda) return kInf;
    }
    hi = std::max(1.0, 2.0 * last);
    while (below(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > kHuge) return kInf;
    }
  }

  // Safeguarded Newton on g'(s) = lambda inside the bracket [lo, hi].
  double x = 0.5 * (lo + hi);
  const int cap = cfg.max_newton + cfg.max_bisections;
  for (int it = 0; it < cap; ++it) {
    if (below(x)) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * DBL_EPSILON * hi) break;
    double next = 0.5 * (lo + hi);
    const double h = second_derivative(x);
    if (h > 0.0 && std::isfinite(h)) {
      const double newton = x - (right_derivative(x) - lambda) / h;
      if (newton > lo && newton < hi) {
        if (std::abs(newton - x) <= 4.0 * DBL_EPSILON * std::max(std::abs(x), DBL_MIN)) {
          return newton;
        }
        next = newton;
      }
    }
    if (next == x) break;
    x = next;
  }
  // A kink at the final bracket whose subdifferential holds lambda is the
  // exact answer. Kinks a few ulps apart can leave the bracket between them.
  const double slack = 16.0 * DBL_EPSILON * std::max(hi, DBL_MIN);
  for (double p : segment_points()) {
    if (p < lo - slack || p > hi + slack) continue;
    if (left_derivative(p) <= lambda && lambda <= right_derivative(p)) return p;
  }
  return highest ? hi : lo;
}

double Coordinate::lowest_response(double lambda, const SolverConfig& cfg) const {
  return response(lambda, false, cfg);
}

double Coordinate::highest_response(double lambda, const SolverConfig& cfg) const {
  return response(lambda, true, cfg);
}

namespace {

struct Responses {
  std::vector<double> s;
  double total = 0.0;
};

Responses respond(std::span<const Coordinate> coords, double lambda, bool highest,
                  const SolverConfig& cfg) {
  Responses r;
  r.s.reserve(coords.size());
  for (const auto& c : coords) {
    r.s.push_back(highest ? c.highest_response(lambda, cfg) : c.lowest_response(lambda, cfg));
    r.total += r.s.back();
  }
  return r;
}

// Start from the lowest responses at `lambda` and raise coordinates, lowest
// index first, until the total reaches `target`.
std::vector<double> fill(std::span<const Coordinate> coords, double lambda, double target,
                         const SolverConfig& cfg) {
  auto lo = respond(coords, lambda, false, cfg);
  double missing = target - lo.total;
  for (std::size_t i = 0; i < coords.size() && missing > 0.0; ++i) {
    const double room = coords[i].highest_response(lambda, cfg) - lo.s[i];
    const double add = std::min(missing, room);
    if (add > 0.0) {
      lo.s[i] += add;
      missing -= add;
    }
  }
  return lo.s;
}

StepResult finish(std::span<const Coordinate> coords, std::vector<double> s, double lambda,
                  double demand) {
  StepResult out;
  const std::size_t n = coords.size();
  out.s = std::move(s);
  out.lambda = lambda;
  out.l.assign(n, 0.0);
  out.u.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = coords[i];
    const double si = out.s[i];
    double residual;
    if (si <= 0.0) {
      const double d = c.right_derivative(0.0);
      out.l[i] = std::max(0.0, d - lambda);
      residual = std::max(0.0, lambda - d);
    } else if (std::isfinite(c.upper()) && si >= c.upper()) {
      const double d = c.left_derivative(si);
      out.u[i] = std::max(0.0, lambda - d);
      residual = std::max(0.0, d - lambda);
    } else {
      const double dl = c.left_derivative(si);
      const double dr = c.right_derivative(si);
      residual = lambda < dl ? dl - lambda : (lambda > dr ? lambda - dr : 0.0);
    }
    out.kkt_residual = std::max(out.kkt_residual, residual);
    out.slackness = std::max(out.slackness, si * out.l[i]);
  }
  out.slackness = std::max(out.slackness, lambda * std::abs(sum(out.s) - demand));
  return out;
}

}  // namespace

StepResult solve_separable(std::span<const Coordinate> coords, double demand,
                           const SolverConfig& cfg) {
  if (coords.empty()) throw DimensionError("subproblem needs at least one coordinate");
  double room = 0.0;
  for (const auto& c : coords) room += c.upper();
  if (!(room >= demand)) throw InfeasibleError("capacity below demand");

  auto upper_total = [&](double lambda) { return respond(coords, lambda, true, cfg).total; };

  // Demand slack at lambda = 0.
  if (upper_total(0.0) >= demand) {
    const double base = respond(coords, 0.0, false, cfg).total;
    return finish(coords, fill(coords, 0.0, std::max(demand, base), cfg), 0.0, demand);
  }

  std::vector<double> breaks;
  for (const auto& c : coords) {
    for (double b : c.flat_slopes()) {
      if (b > 0.0 && std::isfinite(b)) breaks.push_back(b);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double lo = 0.0;
  double hi = kInf;
  for (double b : breaks) {
    if (upper_total(b) >= demand) {
      if (respond(coords, b, false, cfg).total <= demand) {
        return finish(coords, fill(coords, b, demand, cfg), b, demand);
      }
      hi = b;
      break;
    }
    lo = b;
  }

  if (!std::isfinite(hi)) {
    // One coordinate absorbing all demand bounds the multiplier.
    for (const auto& c : coords) {
      if (c.upper() > demand) hi = std::min(hi, c.left_derivative(demand));
    }
    if (!(hi > lo) || !std::isfinite(hi)) hi = std::max(1.0, 2.0 * lo);
    int grow = 0;
    while (upper_total(hi) < demand) {
      lo = hi;
      hi *= 2.0;
      if (++grow > 2000 || !std::isfinite(hi)) {
        throw ConvergenceError("no dual bracket for demand " + std::to_string(demand), demand);
      }
    }
  }

  int it = 0;
  while (hi - lo > cfg.lambda_tol * std::max(1.0, hi) && it < cfg.max_bisections) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (upper_total(mid) >= demand) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++it;
  }
  if (hi - lo > cfg.lambda_tol * std::max(1.0, hi)) {
    throw ConvergenceError("dual bisection did not converge", hi - lo);
  }

  // Interpolate between the two bracket responses so demand binds exactly.
  const auto below = respond(coords, lo, true, cfg);
  const auto above = respond(coords, hi, false, cfg);
  const double span = above.total - below.total;
  const double theta = span > 0.0 ? std::clamp((demand - below.total) / span, 0.0, 1.0) : 1.0;
  std::vector<double> s(coords.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = below.s[i] + theta * (above.s[i] - below.s[i]);
  }
  const double excess = sum(s) - demand;
  if (excess < 0.0) {
    // Rounding; push the shortfall onto a coordinate with room, preferring
    // one that does not sit on a kink.
    auto on_kink = [&](std::size_t i) {
      for (double p : coords[i].segment_points()) {
        if (std::abs(s[i] - p) <= 1e-12 * (1.0 + p)) return true;
      }
      return false;
    };
    std::size_t pick = s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (coords[i].upper() - s[i] < -excess) continue;
      if (pick == s.size()) pick = i;
      if (!on_kink(i)) {
        pick = i;
        break;
      }
    }
    if (pick < s.size()) s[pick] -= excess;
  }
  return finish(coords, std::move(s), lo + theta * (hi - lo), demand);
}

}  // namespace detail

namespace {

void check_sizes(std::size_t n, std::size_t prev, std::size_t beta, std::size_t costs) {
  if (n == 0 || prev != n || beta != n || costs != n) {
    throw DimensionError("subproblem vectors must all have length N");
  }
}

double upper_of(const std::optional<std::vector<double>>& cap, std::size_t i) {
  return cap ? (*cap)[i] : kInf;
}

void check_result(const StepResult& r, const SolverConfig& cfg) {
  const double worst = std::max(r.kkt_residual, r.slackness);
  if (!(worst <= cfg.kkt_tol)) {
    throw ConvergenceError("subproblem KKT residual " + std::to_string(worst) + " above tolerance",
                           worst);
  }
}

}  // namespace

StepResult solve_step(const SubproblemSpec& spec, const SolverConfig& cfg) {
  const std::size_t n = spec.prev.size();
  check_sizes(n, spec.prev.size(), spec.beta.size(), spec.costs.size());
  if (spec.offset && spec.offset->size() != n) throw DimensionError("offset must have length N");
  if (spec.capacity && spec.capacity->size() != n) {
    throw DimensionError("capacity must have length N");
  }
  if (!(spec.eps > 0.0)) throw DomainError("eps must be positive");
  if (!(spec.eta > 0.0)) throw DomainError("eta must be positive");
  if (!(spec.demand >= 0.0)) throw DomainError("demand must be nonnegative");

  const double shift = spec.eps / static_cast<double>(n);
  std::vector<detail::Coordinate> coords;
  coords.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(spec.prev[i] >= 0.0)) throw DomainError("previous assignment must be nonnegative");
    const double weight = std::isinf(spec.eta) ? 0.0 : spec.beta[i] / spec.eta;
    detail::Penalty pen;
    if (spec.offset) {
      pen = detail::EntropicOffsetPenalty{spec.prev[i], (*spec.offset)[i], shift, weight};
    } else {
      pen = detail::EntropicPenalty{spec.prev[i], shift, weight};
    }
    coords.emplace_back(spec.costs[i], pen, upper_of(spec.capacity, i));
  }
  auto r = detail::solve_separable(coords, spec.demand, cfg);
  check_result(r, cfg);
  return r;
}

double step_objective(const SubproblemSpec& spec, std::span<const double> s) {
  const std::size_t n = spec.prev.size();
  const double shift = spec.eps / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += spec.costs[i].value(s[i]);
    if (std::isinf(spec.eta)) continue;
    const double z = spec.offset ? std::max(s[i] - (*spec.offset)[i], spec.prev[i]) : s[i];
    total += spec.beta[i] / spec.eta * entropic_term(z, spec.prev[i], shift);
  }
  return total;
}

StepResult solve_greedy_step(const GreedySpec& spec, const SolverConfig& cfg) {
  const std::size_t n = spec.prev.size();
  check_sizes(n, spec.prev.size(), spec.beta.size(), spec.costs.size());
  if (!spec.offset.empty() && spec.offset.size() != n) {
    throw DimensionError("offset must have length N");
  }
  if (spec.capacity && spec.capacity->size() != n) {
    throw DimensionError("capacity must have length N");
  }
  if (!(spec.demand >= 0.0)) throw DomainError("demand must be nonnegative");

  std::vector<detail::Coordinate> coords;
  coords.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = spec.offset.empty() ? 0.0 : spec.offset[i];
    coords.emplace_back(spec.costs[i], detail::HingePenalty{spec.prev[i] + r, spec.beta[i]},
                        upper_of(spec.capacity, i));
  }
  auto res = detail::solve_separable(coords, spec.demand, cfg);
  check_result(res, cfg);
  return res;
}

double greedy_objective(const GreedySpec& spec, std::span<const double> s) {
  double total = 0.0;
  for (std::size_t i = 0; i < spec.prev.size(); ++i) {
    const double r = spec.offset.empty() ? 0.0 : spec.offset[i];
    total += spec.costs[i].value(s[i]) + spec.beta[i] * std::max(0.0, s[i] - spec.prev[i] - r);
  }
  return total;
}

}  // namespace rightsizing
