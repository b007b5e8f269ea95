#include "rightsizing/bench.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "rightsizing/algorithms.hpp"
#include "rightsizing/error.hpp"
#include "rightsizing/offline.hpp"
#include "rightsizing/theory.hpp"

namespace rightsizing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

std::string num(double x) { return fmt::format("{}", x); }

std::string opt_num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

std::string branch_name(const std::optional<OffsetCase>& b) {
  return b ? std::string(to_string(*b)) : std::string();
}

// Runs `job(k)` for k in [0, n) on up to `threads` workers, rethrowing the
// first failure.
template <class Job>
void parallel_for(std::size_t n, unsigned threads, Job job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          job(k);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

struct Point {
  std::vector<SummaryRow> rows;
  std::vector<std::string> violations;
};

TraceSet load_trace(const ExperimentSpec& spec) {
  if (spec.files) return load_csv(*spec.files);
  if (spec.model == CostModel::EnergyDelay) return energy_delay_family(spec.synth);
  return cyclic_family(spec.synth);
}

void write_slots(const Instance& inst, const Schedule& s, const std::filesystem::path& file) {
  const auto cost = evaluate_cost(inst, s);
  auto out = fmt::output_file(file.string());
  out.print("slot,demand,operational,switching");
  for (std::size_t i = 0; i < inst.dcs(); ++i) out.print(",s_{}", i + 1);
  out.print("\n");
  for (std::size_t t = 0; t < inst.slots(); ++t) {
    out.print("{},{},{},{}", t + 1, inst.demand(t), cost.per_slot[t].operational,
              cost.per_slot[t].switching);
    for (std::size_t i = 0; i < inst.dcs(); ++i) out.print(",{}", s(t, i));
    out.print("\n");
  }
}

Point run_point(const ExperimentSpec& spec, const TraceSet& trace, double value) {
  BuildOptions opt;
  opt.model = spec.model;
  opt.beta = {spec.beta};
  opt.rho_o = spec.rho_o;
  opt.rho_s = spec.rho_s;
  opt.delay_weight = spec.delay_weight.value_or(spec.files ? 1.0 : kFamilyDelayWeight);
  if (spec.sweep == SweepKind::Beta) opt.beta = {value};
  if (spec.sweep == SweepKind::RhoS) opt.rho_s = value;
  const Instance inst = build_instance(trace, opt);

  Point pt;
  const auto offline = solve_offline(inst);
  const auto fail = [&](BenchPolicy p, const std::string& what) {
    pt.violations.push_back(fmt::format("{}={} {}: {}", to_string(spec.sweep), value, to_string(p), what));
  };

  for (BenchPolicy p : spec.policies) {
    SummaryRow row;
    row.value = value;
    row.policy = p;
    Schedule schedule;
    if (p == BenchPolicy::Offline) {
      schedule = offline.schedule;
    } else {
      PolicyConfig cfg;
      cfg.kind = p == BenchPolicy::Greedy ? PolicyKind::Greedy
                 : p == BenchPolicy::Reg  ? PolicyKind::RegConvex
                                          : PolicyKind::RegOffset;
      cfg.eps = spec.eps;
      cfg.allow_nonlinear = true;
      const RunTrace trace_run = run_policy(inst, cfg);
      schedule = trace_run.schedule;
      row.branch = trace_run.branch;
      const auto rep = theory_report(inst, p == BenchPolicy::Reg ? &trace_run : nullptr);
      if (p == BenchPolicy::Greedy && !inst.has_offset()) row.bound = rep.bound_greedy;
      if (p == BenchPolicy::Reg && !inst.has_offset() && rep.bound_reg_convex) {
        row.bound = rep.bound_reg_convex;
        if (*rep.c < -1e-9 || *rep.c > rep.beta_max + 1e-9) fail(p, fmt::format("C = {} outside [0, beta]", *rep.c));
      }
      if (p == BenchPolicy::RegOffset && inst.all_linear() && inst.d_min() > 0.0) {
        row.bound = rep.bound_reg_offset;
      }
    }
    try {
      check_schedule(inst, schedule);
    } catch (const InfeasibleError& e) {
      fail(p, e.what());
    }
    const auto cost = evaluate_cost(inst, schedule, kInf);
    row.operational = cost.operational;
    row.switching = cost.switching;
    row.total = cost.total;
    row.offline = offline.objective;
    row.empirical_ratio = empirical_ratio(cost.total, offline.objective);
    if (row.bound && row.empirical_ratio > *row.bound + spec.tol) {
      fail(p, fmt::format("ratio {} above bound {}", row.empirical_ratio, *row.bound));
    }
    if (offline.objective > row.total + spec.tol * std::max(1.0, row.total)) {
      fail(p, fmt::format("offline {} above online {}", offline.objective, row.total));
    }
    if (!spec.out_dir.empty() && spec.per_slot) {
      write_slots(inst, schedule, spec.out_dir / fmt::format("slots_{}_{}.csv", to_string(p), value));
    }
    pt.rows.push_back(row);
  }
  return pt;
}

}  // namespace

std::string_view to_string(BenchPolicy p) {
  switch (p) {
    case BenchPolicy::Greedy: return "greedy";
    case BenchPolicy::Reg: return "reg";
    case BenchPolicy::RegOffset: return "reg-offset";
    case BenchPolicy::Offline: return "offline";
  }
  return "?";
}

std::optional<BenchPolicy> parse_policy(std::string_view name) {
  for (auto p : {BenchPolicy::Greedy, BenchPolicy::Reg, BenchPolicy::RegOffset, BenchPolicy::Offline}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::optional<CostModel> parse_cost_model(std::string_view name) {
  for (auto m : {CostModel::Linear, CostModel::Cyclic, CostModel::EnergyDelay}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view to_string(SweepKind k) {
  switch (k) {
    case SweepKind::None: return "none";
    case SweepKind::Beta: return "beta";
    case SweepKind::RhoS: return "rho_s";
  }
  return "?";
}

void validate(const ExperimentSpec& spec) {
  if (spec.policies.empty()) throw DomainError("at least one policy is required");
  if (spec.sweep != SweepKind::None && spec.values.empty()) throw DomainError("sweep needs values");
  for (double v : spec.values) {
    if (!(v >= 0.0)) throw DomainError("sweep values must be nonnegative");
  }
  if (!(spec.beta >= 0.0)) throw DomainError("beta must be nonnegative");
  if (!(spec.rho_o >= 0.0) || !(spec.rho_s >= 0.0)) throw DomainError("rho must be nonnegative");
  if (spec.eps && !(*spec.eps > 0.0)) throw DomainError("eps must be positive");
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const TraceSet trace = load_trace(spec);
  const std::vector<double> values =
      spec.sweep == SweepKind::None ? std::vector<double>{spec.beta} : spec.values;
  if (!spec.out_dir.empty()) std::filesystem::create_directories(spec.out_dir);

  std::vector<Point> points(values.size());
  parallel_for(values.size(), spec.threads,
               [&](std::size_t k) { points[k] = run_point(spec, trace, values[k]); });

  ExperimentResult result;
  for (auto& p : points) {
    result.rows.insert(result.rows.end(), p.rows.begin(), p.rows.end());
    result.violations.insert(result.violations.end(), p.violations.begin(), p.violations.end());
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return a.value != b.value ? a.value < b.value : a.policy < b.policy;
  });
  if (!spec.out_dir.empty()) write_summary(result, spec.sweep, spec.out_dir / "summary.csv");
  return result;
}

void write_summary(const ExperimentResult& result, SweepKind sweep, const std::filesystem::path& file) {
  auto out = fmt::output_file(file.string());
  out.print("sweep,value,policy,operational,switching,total,offline,empirical_ratio,bound,branch\n");
  for (const auto& r : result.rows) {
    out.print("{},{},{},{},{},{},{},{},{},{}\n", to_string(sweep), r.value, to_string(r.policy),
              r.operational, r.switching, r.total, r.offline, r.empirical_ratio, opt_num(r.bound),
              branch_name(r.branch));
  }
}

Instance lambda_family(const LambdaSweepSpec& spec) {
  BuildOptions opt;
  opt.model = CostModel::Linear;
  opt.beta = {spec.beta};
  return build_instance(cyclic_family(spec.synth), opt);
}

std::vector<LambdaRow> sweep_lambda(const LambdaSweepSpec& spec) {
  const Instance inst = lambda_family(spec);
  std::vector<double> grid = spec.r_values;
  if (grid.empty()) {
    // Ks has a pole where sum(beta) r = min c D_min and Kc reaches 1 at
    // r = 4 D_max beta_max / min c (eps = D_min). Sample both regions.
    const auto b = horizon_bounds(inst);
    double beta_sum = 0.0;
    for (double x : inst.beta()) beta_sum += x;
    const double pole = beta_sum > 0.0 ? b.min_price * b.d_min / beta_sum : 0.0;
    const double flat = 4.0 * b.d_max * inst.beta_max() / b.min_price;
    const std::size_t n = std::max<std::size_t>(spec.points, 8);
    const std::size_t low = n / 4;
    for (std::size_t k = 0; k < low; ++k) grid.push_back(0.95 * pole * static_cast<double>(k) / static_cast<double>(low));
    const double start = 1.05 * pole;
    const double stop = std::max(1.25 * flat, 2.0 * start);
    for (std::size_t k = 0; k < n - low; ++k) {
      grid.push_back(start + (stop - start) * static_cast<double>(k) / static_cast<double>(n - low - 1));
    }
  }
  std::vector<LambdaRow> rows;
  const auto pts = bound_sweep(inst, grid);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& p = pts[k];
    rows.push_back({p.r, p.ks, p.kc, p.lambda, p.branch, k > 0 && p.branch != pts[k - 1].branch});
  }
  return rows;
}

void write_lambda(const std::vector<LambdaRow>& rows, const std::filesystem::path& file) {
  auto out = fmt::output_file(file.string());
  out.print("r,ks,kc,lambda,branch,crossover\n");
  for (const auto& r : rows) {
    out.print("{},{},{},{},{},{}\n", r.r, r.ks, r.kc, r.lambda, to_string(r.branch), r.crossover ? 1 : 0);
  }
}

Instance random_linear_instance(std::mt19937_64& rng, const CorpusShape& p) {
  const std::size_t n = pick(rng, 1, p.max_dcs);
  const std::size_t slots = pick(rng, 1, p.max_slots);
  SlotGrid<OperationalCost> costs(slots, n);
  for (std::size_t t = 0; t < slots; ++t)
    for (std::size_t i = 0; i < n; ++i) costs(t, i) = OperationalCost::linear(uniform(rng, p.price_lo, p.price_hi));
  std::vector<double> demand(slots), beta(n);
  for (auto& d : demand) d = uniform(rng, p.demand_lo, p.demand_hi);
  for (auto& b : beta) b = uniform(rng, 0.0, p.beta_hi);
  const double d_max = *std::max_element(demand.begin(), demand.end());
  Matrix offset(slots, n, 0.0);
  if (p.offset_scale > 0.0) {
    for (std::size_t t = 0; t < slots; ++t)
      for (std::size_t i = 0; i < n; ++i) offset(t, i) = uniform(rng, 0.0, p.offset_scale * d_max);
  }
  return Instance(std::move(demand), std::move(beta), std::move(offset), std::move(costs));
}

ValidateResult run_validate(const ValidateSpec& spec) {
  ValidateResult result;
  for (const bool with_offset : {false, true}) {
    const std::string corpus = with_offset ? "offset" : "plain";
    std::mt19937_64 rng(spec.seed + (with_offset ? 1 : 0));
    CorpusShape shape;
    shape.offset_scale = with_offset ? 2.0 : 0.0;
    for (std::size_t k = 0; k < spec.count; ++k) {
      const Instance inst = random_linear_instance(rng, shape);
      double offline = solve_offline(inst).objective;
      if (inst.dcs() <= 2 && spec.dp_step > 0.0) {
        offline = std::min(offline, solve_offline_dp(inst, spec.dp_step).objective);
      }
      const auto policies = with_offset ? std::vector<BenchPolicy>{BenchPolicy::RegOffset}
                                        : std::vector<BenchPolicy>{BenchPolicy::Greedy, BenchPolicy::Reg};
      for (BenchPolicy p : policies) {
        ValidateRow row;
        row.corpus = corpus;
        row.index = k;
        row.dcs = inst.dcs();
        row.slots = inst.slots();
        row.policy = p;
        PolicyConfig cfg;
        cfg.kind = p == BenchPolicy::Greedy ? PolicyKind::Greedy
                   : p == BenchPolicy::Reg  ? PolicyKind::RegConvex
                                            : PolicyKind::RegOffset;
        const auto trace = run_policy(inst, cfg);
        const auto rep = theory_report(inst, p == BenchPolicy::Reg ? &trace : nullptr);
        row.total = evaluate_cost(inst, trace.schedule).total;
        row.offline = offline;
        row.ratio = empirical_ratio(row.total, offline);
        row.branch = trace.branch;
        row.kkt = *std::max_element(trace.kkt_residuals.begin(), trace.kkt_residuals.end());
        std::vector<std::string> why;
        if (p == BenchPolicy::Greedy) row.bound = rep.bound_greedy;
        if (p == BenchPolicy::Reg) {
          row.bound = rep.bound_reg_convex.value_or(kInf);
          row.c = rep.c;
          if (rep.c && (*rep.c < -1e-9 || *rep.c > rep.beta_max + 1e-9)) why.push_back(fmt::format("C = {}", *rep.c));
          if (row.bound > rep.bound_greedy + spec.tol) why.push_back("reg bound above greedy bound");
        }
        if (p == BenchPolicy::RegOffset) {
          row.bound = rep.bound_reg_offset;
          if (trace.branch != rep.branch) why.push_back("branch differs from the Ks/Kc rule");
        }
        if (row.ratio > row.bound + spec.tol) why.push_back(fmt::format("ratio {} above bound {}", row.ratio, row.bound));
        if (row.ratio < 1.0 - spec.tol) why.push_back(fmt::format("ratio {} below 1", row.ratio));
        if (row.kkt > spec.kkt_tol) why.push_back(fmt::format("KKT residual {}", row.kkt));
        row.ok = why.empty();
        for (const auto& w : why) {
          result.violations.push_back(fmt::format("{} #{} {}: {}", corpus, k, to_string(p), w));
        }
        result.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

void write_validate(const ValidateResult& result, const std::filesystem::path& file) {
  auto out = fmt::output_file(file.string());
  out.print("corpus,index,dcs,slots,policy,total,offline,ratio,bound,c,branch,kkt,ok\n");
  for (const auto& r : result.rows) {
    out.print("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.corpus, r.index, r.dcs, r.slots,
              to_string(r.policy), r.total, r.offline, r.ratio, r.bound, opt_num(r.c),
              branch_name(r.branch), r.kkt, r.ok ? 1 : 0);
  }
}

}  // namespace rightsizing
