// Batch front end: run policies on a trace, sweep beta or the offset share,
// tabulate the Lambda curve, or check the invariant corpus.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <string>
#include <vector>

#include "rightsizing/bench.hpp"
#include "rightsizing/error.hpp"

using namespace rightsizing;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kViolation = 3;

struct Options {
  std::string workload, renewable, prices;
  bool synth = false;
  std::size_t slots = 576;
  std::size_t dcs = 5;
  std::string cost_model;
  std::vector<std::string> policies;
  std::vector<double> values;
  double beta = 20.0;
  double eps = 0.0;
  double rho_o = 0.2;
  double rho_s = 0.0;
  double delay_weight = 0.0;
  std::uint64_t seed = 1;
  std::string out = "out";
  double tol = 1e-6;
  std::size_t count = 500;
  unsigned threads = 0;
  bool no_slots = false;
};

void add_trace_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--workload", o.workload, "workload CSV (slot,demand)");
  cmd->add_option("--renewable", o.renewable, "renewable CSV (slot,dc,supply)");
  cmd->add_option("--prices", o.prices, "prices CSV (dc,price,delay_ms)");
  cmd->add_flag("--synth", o.synth, "use the synthetic trace family (default without files)");
  cmd->add_option("--slots", o.slots, "synthetic slots")->check(CLI::PositiveNumber);
  cmd->add_option("--dcs", o.dcs, "synthetic data centers")->check(CLI::PositiveNumber);
  cmd->add_option("--cost-model", o.cost_model, "linear | cyclic | energy-delay")
      ->check(CLI::IsMember({"linear", "cyclic", "energy-delay"}));
  cmd->add_option("--policy", o.policies, "greedy | reg | reg-offset | offline (repeatable)")
      ->check(CLI::IsMember({"greedy", "reg", "reg-offset", "offline"}));
  cmd->add_option("--beta", o.beta, "switching cost per unit")->check(CLI::NonNegativeNumber);
  cmd->add_option("--eps", o.eps, "regularizer shift (default D_min)")->check(CLI::PositiveNumber);
  cmd->add_option("--rho-o", o.rho_o, "renewable share covering energy")->check(CLI::NonNegativeNumber);
  cmd->add_option("--rho-s", o.rho_s, "renewable share used as switching offset")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--delay-weight", o.delay_weight, "weight of the delay term")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "seed of the synthetic traces");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--tol", o.tol, "tolerance of the invariant checks")->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
  cmd->add_flag("--no-slots", o.no_slots, "skip the per-slot CSVs");
}

std::vector<double> steps(double first, double step, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(first + step * k);
  return v;
}

ExperimentSpec make_spec(const Options& o, SweepKind sweep, CostModel default_model,
                         std::vector<BenchPolicy> default_policies) {
  ExperimentSpec spec;
  const bool any_file = !o.workload.empty() || !o.renewable.empty() || !o.prices.empty();
  if (any_file && !o.synth) {
    if (o.workload.empty() || o.renewable.empty() || o.prices.empty()) {
      throw CLI::ValidationError("--workload, --renewable and --prices go together");
    }
    spec.files = TracePaths{o.workload, o.renewable, o.prices};
  }
  spec.synth = {o.slots, o.dcs, o.seed};
  spec.model = o.cost_model.empty() ? default_model : *parse_cost_model(o.cost_model);
  spec.policies = std::move(default_policies);
  if (!o.policies.empty()) {
    spec.policies.clear();
    for (const auto& p : o.policies) spec.policies.push_back(*parse_policy(p));
  }
  spec.sweep = sweep;
  spec.values = o.values;
  if (spec.values.empty()) {
    if (sweep == SweepKind::Beta) spec.values = steps(0.0, 5.0, 9);
    if (sweep == SweepKind::RhoS) spec.values = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  }
  spec.beta = o.beta;
  spec.rho_o = o.rho_o;
  spec.rho_s = o.rho_s;
  if (o.eps > 0.0) spec.eps = o.eps;
  if (o.delay_weight > 0.0) spec.delay_weight = o.delay_weight;
  spec.tol = o.tol;
  spec.out_dir = o.out;
  spec.per_slot = !o.no_slots;
  spec.threads = o.threads;
  return spec;
}

int report(const std::vector<std::string>& violations) {
  for (const auto& v : violations) fmt::print(stderr, "violation: {}\n", v);
  return violations.empty() ? 0 : kViolation;
}

int run_spec(const ExperimentSpec& spec) {
  const auto result = run_experiment(spec);
  for (const auto& r : result.rows) {
    fmt::print("{:>8} {:<10} op {:>14.4f} sw {:>12.4f} total {:>14.4f} ratio {:.6f}\n", r.value,
               to_string(r.policy), r.operational, r.switching, r.total, r.empirical_ratio);
  }
  fmt::print("wrote {}\n", (spec.out_dir / "summary.csv").string());
  return report(result.violations);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online right-sizing experiments"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "run policies once");
  add_trace_flags(run, o);
  auto* sweep_beta = app.add_subcommand("sweep-beta", "sweep the switching cost");
  add_trace_flags(sweep_beta, o);
  sweep_beta->add_option("--values", o.values, "beta grid (default 0,5,...,40)");
  auto* sweep_offset = app.add_subcommand("sweep-offset", "sweep the offset share rho_s");
  add_trace_flags(sweep_offset, o);
  sweep_offset->add_option("--values", o.values, "rho_s grid (default 0,0.1,...,0.5)");

  auto* sweep_lambda_cmd = app.add_subcommand("sweep-lambda", "Lambda against a uniform offset");
  double lambda_beta = 6.0;
  std::size_t points = 120;
  sweep_lambda_cmd->add_option("--beta", lambda_beta, "switching cost")->check(CLI::NonNegativeNumber);
  sweep_lambda_cmd->add_option("--values", o.values, "offset grid (default automatic)");
  sweep_lambda_cmd->add_option("--points", points, "size of the automatic grid");
  sweep_lambda_cmd->add_option("--seed", o.seed, "seed of the synthetic trace");
  sweep_lambda_cmd->add_option("--out", o.out, "output directory");

  auto* validate_cmd = app.add_subcommand("validate", "check the invariant corpus");
  validate_cmd->add_option("--seed", o.seed, "corpus seed");
  validate_cmd->add_option("--count", o.count, "instances per corpus");
  validate_cmd->add_option("--tol", o.tol, "tolerance")->check(CLI::NonNegativeNumber);
  validate_cmd->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*run) {
      return run_spec(make_spec(o, SweepKind::None, CostModel::Cyclic,
                                {BenchPolicy::Greedy, BenchPolicy::Reg, BenchPolicy::Offline}));
    }
    if (*sweep_beta) {
      return run_spec(make_spec(o, SweepKind::Beta, CostModel::Cyclic,
                                {BenchPolicy::Greedy, BenchPolicy::Reg}));
    }
    if (*sweep_offset) {
      return run_spec(make_spec(o, SweepKind::RhoS, CostModel::EnergyDelay,
                                {BenchPolicy::Greedy, BenchPolicy::Reg, BenchPolicy::RegOffset}));
    }
    std::filesystem::create_directories(o.out);
    if (*sweep_lambda_cmd) {
      LambdaSweepSpec spec;
      spec.synth.seed = o.seed;
      spec.beta = lambda_beta;
      spec.r_values = o.values;
      spec.points = points;
      const auto rows = sweep_lambda(spec);
      const auto file = std::filesystem::path(o.out) / "lambda.csv";
      write_lambda(rows, file);
      for (const auto& r : rows) {
        if (r.crossover) fmt::print("branch changes to {} at r = {}\n", to_string(r.branch), r.r);
      }
      fmt::print("wrote {}\n", file.string());
      return 0;
    }
    ValidateSpec spec;
    spec.seed = o.seed;
    spec.count = o.count;
    spec.tol = o.tol;
    const auto result = run_validate(spec);
    const auto file = std::filesystem::path(o.out) / "validate.csv";
    write_validate(result, file);
    fmt::print("{} rows, {} violations; wrote {}\n", result.rows.size(), result.violations.size(),
               file.string());
    return report(result.violations);
  } catch (const CLI::ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const DomainError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kData;
  }
}
