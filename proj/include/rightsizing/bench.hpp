#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rightsizing/algorithms.hpp"
#include "rightsizing/model.hpp"
#include "rightsizing/traces.hpp"

namespace rightsizing {

enum class BenchPolicy { Greedy, Reg, RegOffset, Offline };

std::string_view to_string(BenchPolicy p);
// Accepts the CLI names greedy, reg, reg-offset and offline.
std::optional<BenchPolicy> parse_policy(std::string_view name);
std::optional<CostModel> parse_cost_model(std::string_view name);

enum class SweepKind { None, Beta, RhoS };

std::string_view to_string(SweepKind k);

struct ExperimentSpec {
  // Trace files; the synthetic family for `model` when empty.
  std::optional<TracePaths> files;
  FamilyParams synth;
  CostModel model = CostModel::Cyclic;
  std::vector<BenchPolicy> policies{BenchPolicy::Greedy, BenchPolicy::Reg};
  SweepKind sweep = SweepKind::None;
  std::vector<double> values;
  double beta = 20.0;
  double rho_o = 0.2;
  double rho_s = 0.0;
  std::optional<double> eps;
  // Defaults to kFamilyDelayWeight for the synthetic family and 1 for files.
  std::optional<double> delay_weight;
  double tol = 1e-6;
  std::filesystem::path out_dir;  // nothing is written when empty
  bool per_slot = true;
  unsigned threads = 0;  // 0: one per hardware thread
};

// Throws DomainError on an empty policy list or negative sweep values.
void validate(const ExperimentSpec& spec);

struct SummaryRow {
  double value = 0.0;  // sweep value (beta or rho_s); beta when not sweeping
  BenchPolicy policy = BenchPolicy::Greedy;
  double operational = 0.0;
  double switching = 0.0;
  double total = 0.0;
  double offline = 0.0;
  double empirical_ratio = 1.0;
  std::optional<double> bound;  // only when the bound's preconditions hold
  std::optional<OffsetCase> branch;
};

struct ExperimentResult {
  std::vector<SummaryRow> rows;  // sorted by (value, policy)
  std::vector<std::string> violations;
};

// Runs every policy at every sweep point (points in parallel), checks the
// bound and offline-optimality invariants, and writes summary.csv plus one
// per-slot CSV per (policy, point) into spec.out_dir.
ExperimentResult run_experiment(const ExperimentSpec& spec);

void write_summary(const ExperimentResult& result, SweepKind sweep,
                   const std::filesystem::path& file);

struct LambdaSweepSpec {
  FamilyParams synth;
  double beta = 6.0;
  // Uniform offsets; an automatic grid reaching past the Kc = 1 threshold
  // when empty.
  std::vector<double> r_values;
  std::size_t points = 120;
};

struct LambdaRow {
  double r = 0.0;
  double ks = 1.0;
  double kc = 1.0;
  double lambda = 1.0;
  OffsetCase branch = OffsetCase::Case1;
  bool crossover = false;  // first point of a new branch
};

// Linear-cost instance behind the Lambda curve.
Instance lambda_family(const LambdaSweepSpec& spec);
std::vector<LambdaRow> sweep_lambda(const LambdaSweepSpec& spec);
void write_lambda(const std::vector<LambdaRow>& rows, const std::filesystem::path& file);

// Seeded random linear instances for the invariant corpus.
struct CorpusShape {
  std::size_t max_dcs = 3;
  std::size_t max_slots = 5;
  double price_lo = 1.0, price_hi = 10.0;
  double beta_hi = 20.0;
  double demand_lo = 0.1, demand_hi = 5.0;
  double offset_scale = 0.0;  // offsets drawn in [0, offset_scale * D_max]
};

Instance random_linear_instance(std::mt19937_64& rng, const CorpusShape& shape);

struct ValidateSpec {
  std::uint64_t seed = 1;
  std::size_t count = 500;  // instances per corpus
  double tol = 1e-6;
  double kkt_tol = 1e-8;
  // Also solve N <= 2 instances with the grid DP and take the smaller
  // offline cost.
  double dp_step = 0.01;
};

struct ValidateRow {
  std::string corpus;  // "plain" (r = 0) or "offset"
  std::size_t index = 0;
  std::size_t dcs = 0;
  std::size_t slots = 0;
  BenchPolicy policy = BenchPolicy::Greedy;
  double total = 0.0;
  double offline = 0.0;
  double ratio = 1.0;
  double bound = 0.0;
  std::optional<double> c;  // Reg only
  std::optional<OffsetCase> branch;
  double kkt = 0.0;
  bool ok = true;
};

struct ValidateResult {
  std::vector<ValidateRow> rows;
  std::vector<std::string> violations;
};

ValidateResult run_validate(const ValidateSpec& spec);
void write_validate(const ValidateResult& result, const std::filesystem::path& file);

}  // namespace rightsizing
