#include "rightsizing/offline.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

#include "rightsizing/error.hpp"

namespace rightsizing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One linear constraint  sum coef * v[idx] + c0 > 0.
struct Constraint {
  std::vector<std::pair<int, double>> terms;
  double c0 = 0.0;

  double eval(const Eigen::VectorXd& v) const {
    double g = c0;
    for (const auto& [j, a] : terms) g += a * v[j];
    return g;
  }
  double eval_dir(const Eigen::VectorXd& d) const {
    double g = 0.0;
    for (const auto& [j, a] : terms) g += a * d[j];
    return g;
  }
};

// Epigraph form of the whole-horizon problem. Every constraint is linear; the
// only non-linear objective parts are the smooth pieces of f.
class BarrierProblem {
 public:
  explicit BarrierProblem(const Instance& inst) : inst_(inst) {
    const std::size_t T = inst.slots();
    const std::size_t N = inst.dcs();
    s_idx_.assign(T * N, -1);
    x_idx_.assign(T * N, -1);
    y_idx_.assign(T * N, -1);
    int next = 0;
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < N; ++i) {
        const std::size_t k = t * N + i;
        s_idx_[k] = next++;
        if (inst.beta(i) > 0.0) x_idx_[k] = next++;
        if (inst.cost(t, i).hinge()) y_idx_[k] = next++;
      }
    }
    n_ = next;
    linear_obj_ = Eigen::VectorXd::Zero(n_);
    build_bounds();
    build_constraints();
  }

  int size() const { return n_; }
  std::size_t constraints() const { return cons_.size(); }

  Eigen::VectorXd start() const {
    const std::size_t T = inst_.slots();
    const std::size_t N = inst_.dcs();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n_);
    const double pad = 0.1 * std::max(inst_.d_max(), 1e-12);
    for (std::size_t t = 0; t < T; ++t) {
      double total = 0.0;
      for (std::size_t i = 0; i < N; ++i) total += upper_[t * N + i];
      const double frac = (inst_.demand(t) + total) / (2.0 * total);
      for (std::size_t i = 0; i < N; ++i) v[s(t, i)] = frac * upper_[t * N + i];
    }
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < N; ++i) {
        const double cur = v[s(t, i)];
        if (x(t, i) >= 0) {
          const double prev = t == 0 ? 0.0 : v[s(t - 1, i)];
          v[x(t, i)] = std::max(cur - prev - inst_.offset(t, i), 0.0) + pad;
        }
        if (y(t, i) >= 0) {
          v[y(t, i)] = std::max(cur - inst_.cost(t, i).hinge()->knot, 0.0) + pad;
        }
      }
    }
    return v;
  }

  // Objective; +inf outside the domain of some f.
  double objective(const Eigen::VectorXd& v) const {
    double acc = linear_obj_.dot(v);
    for (std::size_t t = 0; t < inst_.slots(); ++t) {
      for (std::size_t i = 0; i < inst_.dcs(); ++i) {
        const double si = v[s(t, i)];
        if (!(si < inst_.cost(t, i).domain_max())) return kInf;
        acc += inst_.cost(t, i).smooth_value(si);
      }
    }
    return acc;
  }

  // tau * objective - sum log g; +inf when infeasible.
  double merit(const Eigen::VectorXd& v, double tau) const {
    double acc = 0.0;
    for (const auto& c : cons_) {
      const double g = c.eval(v);
      if (!(g > 0.0)) return kInf;
      acc -= std::log(g);
    }
    const double f = objective(v);
    if (!std::isfinite(f)) return kInf;
    return tau * f + acc;
  }

  void gradient_hessian(const Eigen::VectorXd& v, double tau, Eigen::VectorXd& grad,
                        std::vector<Eigen::Triplet<double>>& trip) const {
    grad = tau * linear_obj_;
    trip.clear();
    for (std::size_t t = 0; t < inst_.slots(); ++t) {
      for (std::size_t i = 0; i < inst_.dcs(); ++i) {
        const int j = s(t, i);
        const auto& f = inst_.cost(t, i);
        grad[j] += tau * f.smooth_derivative(v[j]);
        trip.emplace_back(j, j, tau * std::max(f.second_derivative(v[j]), 0.0));
      }
    }
    for (const auto& c : cons_) {
      const double g = c.eval(v);
      const double w = 1.0 / (g * g);
      for (const auto& [j, a] : c.terms) {
        grad[j] -= a / g;
        for (const auto& [k, b] : c.terms) {
          if (k <= j) trip.emplace_back(j, k, w * a * b);
        }
      }
    }
  }

  double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& d) const {
    double step = 1.0;
    for (const auto& c : cons_) {
      const double dg = c.eval_dir(d);
      if (dg < 0.0) step = std::min(step, -c.eval(v) / dg);
    }
    return step;
  }

  Schedule schedule(const Eigen::VectorXd& v) const {
    Schedule out(inst_.slots(), inst_.dcs());
    for (std::size_t t = 0; t < inst_.slots(); ++t) {
      for (std::size_t i = 0; i < inst_.dcs(); ++i) {
        out(t, i) = std::clamp(v[s(t, i)], 0.0, inst_.upper_bound(t, i));
      }
    }
    return out;
  }

 private:
  int s(std::size_t t, std::size_t i) const { return s_idx_[t * inst_.dcs() + i]; }
  int x(std::size_t t, std::size_t i) const { return x_idx_[t * inst_.dcs() + i]; }
  int y(std::size_t t, std::size_t i) const { return y_idx_[t * inst_.dcs() + i]; }

  // Loads above D_max never help: clamping at D_max lowers both cost terms.
  // 2 D_max keeps the box strictly feasible.
  void build_bounds() {
    const std::size_t T = inst_.slots();
    const std::size_t N = inst_.dcs();
    upper_.assign(T * N, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      double total = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        upper_[t * N + i] = std::min(inst_.upper_bound(t, i), 2.0 * inst_.d_max());
        total += upper_[t * N + i];
      }
      // A closed capacity that exactly meets demand leaves no interior; widen
      // it slightly, the final schedule is clamped back.
      const double slack = 1e-10 * std::max(1.0, inst_.demand(t));
      if (total - inst_.demand(t) < slack) {
        const double add = (inst_.demand(t) - total + slack) / static_cast<double>(N);
        for (std::size_t i = 0; i < N; ++i) upper_[t * N + i] += add;
      }
    }
  }

  void build_constraints() {
    const std::size_t T = inst_.slots();
    const std::size_t N = inst_.dcs();
    for (std::size_t t = 0; t < T; ++t) {
      Constraint demand;
      demand.c0 = -inst_.demand(t);
      for (std::size_t i = 0; i < N; ++i) {
        const int si = s(t, i);
        cons_.push_back({{{si, 1.0}}, 0.0});
        cons_.push_back({{{si, -1.0}}, upper_[t * N + i]});
        demand.terms.emplace_back(si, 1.0);
        if (const int xi = x(t, i); xi >= 0) {
          linear_obj_[xi] = inst_.beta(i);
          cons_.push_back({{{xi, 1.0}}, 0.0});
          Constraint sw{{{xi, 1.0}, {si, -1.0}}, inst_.offset(t, i)};
          if (t > 0) sw.terms.emplace_back(s(t - 1, i), 1.0);
          cons_.push_back(std::move(sw));
        }
        if (const int yi = y(t, i); yi >= 0) {
          const auto h = *inst_.cost(t, i).hinge();
          linear_obj_[yi] = h.slope;
          cons_.push_back({{{yi, 1.0}}, 0.0});
          cons_.push_back({{{yi, 1.0}, {si, -1.0}}, h.knot});
        }
      }
      cons_.push_back(std::move(demand));
    }
  }

  const Instance& inst_;
  std::vector<int> s_idx_, x_idx_, y_idx_;
  int n_ = 0;
  std::vector<double> upper_;
  Eigen::VectorXd linear_obj_;
  std::vector<Constraint> cons_;
};

}  // namespace

std::string_view to_string(OfflineMethod m) {
  return m == OfflineMethod::GridDP ? "grid-dp" : "continuous";
}

OfflineSolution solve_offline(const Instance& instance, const SolverConfig& cfg,
                              const OfflineOptions& opts) {
  OfflineSolution out;
  out.method = OfflineMethod::ContinuousSolver;
  if (instance.slots() == 0 || instance.d_max() == 0.0) {
    out.schedule = Schedule(instance.slots(), instance.dcs());
    out.objective = evaluate_cost(instance, out.schedule, cfg.feas_tol).total;
    out.certified_gap = 0.0;
    return out;
  }

  BarrierProblem prob(instance);
  const double m = static_cast<double>(prob.constraints());
  Eigen::VectorXd v = prob.start();
  double tau = m / std::max(std::abs(prob.objective(v)), 1e-12);

  Eigen::SparseMatrix<double> hess(prob.size(), prob.size());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd grad;
  bool analyzed = false;
  int newton = 0;

  // Numerical breakdown late in the path (pivots lost to cancellation) ends
  // the run at the last centered point.
  bool stalled = false;
  for (int outer = 0; outer < opts.max_outer && !stalled; ++outer) {
    for (int it = 0; it < opts.max_centering_steps; ++it) {
      prob.gradient_hessian(v, tau, grad, trip);
      hess.setFromTriplets(trip.begin(), trip.end());
      if (!analyzed) {
        ldlt.analyzePattern(hess);
        analyzed = true;
      }
      ldlt.factorize(hess);
      Eigen::VectorXd d;
      if (ldlt.info() == Eigen::Success) d = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !d.allFinite()) {
        if (outer == 0) throw ConvergenceError("barrier Newton system is singular", kInf);
        stalled = true;
        break;
      }
      const double decrement = -grad.dot(d);
      ++newton;
      if (decrement / 2.0 <= 1e-9) break;

      double step = std::min(1.0, 0.99 * prob.max_step(v, d));
      const double base = prob.merit(v, tau);
      while (step > 1e-14 && prob.merit(v + step * d, tau) > base - 0.25 * step * decrement) {
        step *= 0.5;
      }
      if (step <= 1e-14) break;
      v += step * d;
    }
    if (stalled) break;
    const double gap = m / tau;
    out.certified_gap = gap;
    if (gap <= opts.rel_gap * std::max(std::abs(prob.objective(v)), 1.0)) break;
    tau *= opts.barrier_growth;
  }

  out.schedule = prob.schedule(v);
  out.objective = evaluate_cost(instance, out.schedule, cfg.feas_tol).total;
  out.iterations = newton;
  return out;
}

double dual_lower_bound(const Instance& instance, const RunTrace& trace) {
  if (trace.policy != PolicyKind::RegConvex) {
    throw DomainError("dual lower bound needs a regularized (convex) trace");
  }
  if (trace.schedule.slots() != instance.slots() || trace.schedule.dcs() != instance.dcs()) {
    throw DimensionError("trace does not match instance");
  }
  if (instance.has_offset()) throw DomainError("dual lower bound requires zero offsets");
  if (instance.capacity()) throw DomainError("dual lower bound requires an uncapacitated instance");

  const double shift = trace.eps / static_cast<double>(instance.dcs());
  const bool regularized = std::isfinite(trace.eta);
  double acc = 0.0;
  for (std::size_t t = 0; t < instance.slots(); ++t) {
    for (std::size_t i = 0; i < instance.dcs(); ++i) {
      const double s = trace.schedule(t, i);
      const double prev = t == 0 ? 0.0 : trace.schedule(t - 1, i);
      acc += instance.cost(t, i).value(s);
      if (regularized && s > 0.0) {
        acc += instance.beta(i) / trace.eta * std::log((s + shift) / (prev + shift)) * s;
      }
    }
  }
  return acc;
}

}  // namespace rightsizing
