#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "rightsizing/model.hpp"

namespace rightsizing {

// Raw inputs for one experiment. Workload is per slot, renewable supply is
// per slot and DC in arbitrary units (normalized later), prices and delays
// are per DC.
struct TraceSet {
  std::vector<double> workload;
  Matrix renewable;
  std::vector<double> prices;
  std::vector<double> delays_ms;

  std::size_t slots() const noexcept { return workload.size(); }
  std::size_t dcs() const noexcept { return prices.size(); }

  // Throws DataError on negative or non-finite values or mismatched sizes.
  void validate() const;

  friend bool operator==(const TraceSet&, const TraceSet&) = default;
};

struct TracePaths {
  std::filesystem::path workload;   // slot,demand
  std::filesystem::path renewable;  // slot,dc,supply
  std::filesystem::path prices;     // dc,price,delay_ms
};

TraceSet load_csv(const TracePaths& paths);
void save_csv(const TraceSet& trace, const TracePaths& paths);

// Parsers behind load_csv, exposed for in-memory use. `source` names the
// input in error messages.
std::vector<double> parse_workload(std::string_view text, std::string_view source = "workload");
// Prices and delays as two columns.
void parse_prices(std::string_view text, std::vector<double>& prices, std::vector<double>& delays,
                  std::string_view source = "prices");
Matrix parse_renewable(std::string_view text, std::size_t slots, std::size_t dcs,
                       std::string_view source = "renewable");

// Renewable supply scaled by one factor so that its mean over all slots and
// DCs is rho * mean(workload).
Matrix normalize_renewable(const TraceSet& trace, double rho);

// base + amplitude sin(2 pi t / period) + uniform(-noise, noise), clamped at
// zero, for t = 1..slots.
std::vector<double> synth_workload(std::size_t slots, double base, double amplitude,
                                   double period, double noise, std::uint64_t seed);

// Positive supply series: even DCs follow a daylight bump, odd DCs a slowly
// varying wind-like process. `floor` is added everywhere so no DC ever has
// zero supply.
Matrix synth_renewable(std::size_t slots, std::size_t dcs, double period, double floor,
                       std::uint64_t seed);

enum class CostModel { Linear, Cyclic, EnergyDelay };

std::string_view to_string(CostModel m);

struct BuildOptions {
  CostModel model = CostModel::Linear;
  std::vector<double> beta{20.0};  // one value for all DCs, or one per DC
  double rho_o = 0.2;              // energy-delay only: renewable share covering energy
  double rho_s = 0.0;              // renewable share used as switching offset
  double service_rate = 0.1;       // jobs per ms
  double delay_weight = 1.0;
  double demand_scale = 1.0;       // multiplies the workload before use
};

// Throws DataError when the options do not fit the trace.
Instance build_instance(const TraceSet& trace, const BuildOptions& options);

// Synthetic stand-ins for the experiment data: two days of five-minute
// slots (T = 576) over five DCs.
struct FamilyParams {
  std::size_t slots = 576;
  std::size_t dcs = 5;
  std::uint64_t seed = 1;
};

// Workload in jobs per slot, prices in $ per job.
TraceSet cyclic_family(const FamilyParams& params = {});
// Workload in jobs per ms, so each DC's service rate of 0.1 bounds its load.
TraceSet energy_delay_family(const FamilyParams& params = {});
// Delay weight that goes with energy_delay_family.
inline constexpr double kFamilyDelayWeight = 0.002;

}  // namespace rightsizing
