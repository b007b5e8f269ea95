#include "rightsizing/traces.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "rightsizing/error.hpp"

namespace rightsizing {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, std::string_view what) {
  throw DataError(fmt::format("{}:{}: {}", source, line, what), line);
}

double parse_number(std::string_view field, std::string_view source, std::size_t line) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail(source, line, fmt::format("not a number: '{}'", field));
  }
  if (v < 0.0) fail(source, line, fmt::format("negative value {}", field));
  return v;
}

std::size_t parse_index(std::string_view field, std::string_view source, std::size_t line) {
  std::size_t v = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || v == 0) {
    fail(source, line, fmt::format("expected a positive integer, got '{}'", field));
  }
  return v;
}

// Calls `row(fields, line)` for every non-empty data line after checking the header.
template <class Row>
void for_each_row(std::string_view text, std::string_view header, std::size_t columns,
                  std::string_view source, Row&& row) {
  std::size_t line_no = 0;
  bool seen_header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) fail(source, line_no, fmt::format("expected header '{}'", header));
      seen_header = true;
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != columns) {
      fail(source, line_no, fmt::format("expected {} fields, got {}", columns, fields.size()));
    }
    row(fields, line_no);
  }
  if (!seen_header) fail(source, 0, "empty file");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Uniform [0, 1) from the top 53 bits, independent of the standard library's
// distribution implementations.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

}  // namespace

void TraceSet::validate() const {
  if (renewable.slots() != slots() || renewable.dcs() != dcs()) {
    throw DimensionError("renewable supply must be slots x DCs");
  }
  if (delays_ms.size() != prices.size()) throw DimensionError("one delay per DC required");
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!std::all_of(workload.begin(), workload.end(), ok)) throw DataError("invalid workload value");
  if (!std::all_of(renewable.data().begin(), renewable.data().end(), ok)) {
    throw DataError("invalid renewable value");
  }
  if (!std::all_of(prices.begin(), prices.end(), ok)) throw DataError("invalid price");
  if (!std::all_of(delays_ms.begin(), delays_ms.end(), ok)) throw DataError("invalid delay");
}

std::vector<double> parse_workload(std::string_view text, std::string_view source) {
  std::vector<double> demand;
  std::vector<bool> seen;
  for_each_row(text, "slot,demand", 2, source, [&](const auto& f, std::size_t line) {
    const std::size_t slot = parse_index(f[0], source, line);
    const double d = parse_number(f[1], source, line);
    if (slot > demand.size()) {
      demand.resize(slot, 0.0);
      seen.resize(slot, false);
    }
    if (seen[slot - 1]) fail(source, line, fmt::format("duplicate slot {}", slot));
    seen[slot - 1] = true;
    demand[slot - 1] = d;
  });
  for (std::size_t t = 0; t < seen.size(); ++t) {
    if (!seen[t]) throw DataError(fmt::format("{}: missing slot {}", source, t + 1));
  }
  return demand;
}

void parse_prices(std::string_view text, std::vector<double>& prices, std::vector<double>& delays,
                  std::string_view source) {
  prices.clear();
  delays.clear();
  std::vector<bool> seen;
  for_each_row(text, "dc,price,delay_ms", 3, source, [&](const auto& f, std::size_t line) {
    const std::size_t dc = parse_index(f[0], source, line);
    const double p = parse_number(f[1], source, line);
    const double d = parse_number(f[2], source, line);
    if (dc > prices.size()) {
      prices.resize(dc, 0.0);
      delays.resize(dc, 0.0);
      seen.resize(dc, false);
    }
    if (seen[dc - 1]) fail(source, line, fmt::format("duplicate dc {}", dc));
    seen[dc - 1] = true;
    prices[dc - 1] = p;
    delays[dc - 1] = d;
  });
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw DataError(fmt::format("{}: missing dc {}", source, i + 1));
  }
}

Matrix parse_renewable(std::string_view text, std::size_t slots, std::size_t dcs,
                       std::string_view source) {
  Matrix out(slots, dcs, 0.0);
  SlotGrid<char> seen(slots, dcs, 0);
  for_each_row(text, "slot,dc,supply", 3, source, [&](const auto& f, std::size_t line) {
    const std::size_t slot = parse_index(f[0], source, line);
    const std::size_t dc = parse_index(f[1], source, line);
    const double v = parse_number(f[2], source, line);
    if (slot > slots) fail(source, line, fmt::format("slot {} beyond the workload's {} slots", slot, slots));
    if (dc > dcs) fail(source, line, fmt::format("dc {} beyond the {} priced DCs", dc, dcs));
    if (seen(slot - 1, dc - 1)) fail(source, line, fmt::format("duplicate slot {} dc {}", slot, dc));
    seen(slot - 1, dc - 1) = 1;
    out(slot - 1, dc - 1) = v;
  });
  for (std::size_t t = 0; t < slots; ++t) {
    for (std::size_t i = 0; i < dcs; ++i) {
      if (!seen(t, i)) {
        throw DataError(fmt::format("{}: no supply for dc {} at slot {}", source, i + 1, t + 1));
      }
    }
  }
  return out;
}

TraceSet load_csv(const TracePaths& paths) {
  TraceSet trace;
  trace.workload = parse_workload(read_file(paths.workload), paths.workload.string());
  parse_prices(read_file(paths.prices), trace.prices, trace.delays_ms, paths.prices.string());
  trace.renewable = parse_renewable(read_file(paths.renewable), trace.slots(), trace.dcs(),
                                    paths.renewable.string());
  trace.validate();
  return trace;
}

void save_csv(const TraceSet& trace, const TracePaths& paths) {
  trace.validate();
  {
    auto out = fmt::output_file(paths.workload.string());
    out.print("slot,demand\n");
    for (std::size_t t = 0; t < trace.slots(); ++t) out.print("{},{}\n", t + 1, trace.workload[t]);
  }
  {
    auto out = fmt::output_file(paths.renewable.string());
    out.print("slot,dc,supply\n");
    for (std::size_t t = 0; t < trace.slots(); ++t)
      for (std::size_t i = 0; i < trace.dcs(); ++i)
        out.print("{},{},{}\n", t + 1, i + 1, trace.renewable(t, i));
  }
  {
    auto out = fmt::output_file(paths.prices.string());
    out.print("dc,price,delay_ms\n");
    for (std::size_t i = 0; i < trace.dcs(); ++i)
      out.print("{},{},{}\n", i + 1, trace.prices[i], trace.delays_ms[i]);
  }
}

Matrix normalize_renewable(const TraceSet& trace, double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("rho must be nonnegative");
  Matrix out(trace.slots(), trace.dcs(), 0.0);
  if (rho == 0.0) return out;
  const double load = mean(trace.workload);
  if (!(load > 0.0)) throw DataError("renewable normalization needs a positive mean workload");
  const double supply = mean(trace.renewable.data());
  if (!(supply > 0.0)) throw DataError("renewable supply is identically zero");
  const double k = rho * load / supply;
  for (std::size_t t = 0; t < trace.slots(); ++t)
    for (std::size_t i = 0; i < trace.dcs(); ++i) out(t, i) = k * trace.renewable(t, i);
  return out;
}

std::vector<double> synth_workload(std::size_t slots, double base, double amplitude,
                                   double period, double noise, std::uint64_t seed) {
  if (!(base > amplitude) || !(amplitude >= 0.0)) throw DomainError("need base > amplitude >= 0");
  if (!(period > 0.0) || !(noise >= 0.0)) throw DomainError("need period > 0 and noise >= 0");
  std::mt19937_64 rng(seed);
  std::vector<double> out(slots);
  for (std::size_t t = 0; t < slots; ++t) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(t + 1) / period;
    const double jitter = noise * (2.0 * unit(rng) - 1.0);
    out[t] = std::max(0.0, base + amplitude * std::sin(phase) + jitter);
  }
  return out;
}

Matrix synth_renewable(std::size_t slots, std::size_t dcs, double period, double floor,
                       std::uint64_t seed) {
  if (!(period > 0.0) || !(floor >= 0.0)) throw DomainError("need period > 0 and floor >= 0");
  std::mt19937_64 rng(seed);
  Matrix out(slots, dcs, 0.0);
  for (std::size_t i = 0; i < dcs; ++i) {
    const double shift = 0.05 * static_cast<double>(i);  // a time zone per DC
    double wind = 0.5 + 0.5 * unit(rng);
    for (std::size_t t = 0; t < slots; ++t) {
      double v;
      if (i % 2 == 0) {
        const double phase = static_cast<double>(t + 1) / period - shift;
        const double sun = std::max(0.0, std::sin(2.0 * std::numbers::pi * phase));
        v = sun * (0.7 + 0.3 * unit(rng));
      } else {
        wind = std::clamp(0.97 * wind + 0.03 * (2.0 * unit(rng)), 0.0, 2.0);
        v = wind;
      }
      out(t, i) = floor + v;
    }
  }
  return out;
}

std::string_view to_string(CostModel m) {
  switch (m) {
    case CostModel::Linear:
      return "linear";
    case CostModel::Cyclic:
      return "cyclic";
    case CostModel::EnergyDelay:
      return "energy-delay";
  }
  return "?";
}

Instance build_instance(const TraceSet& trace, const BuildOptions& opt) {
  trace.validate();
  const std::size_t T = trace.slots();
  const std::size_t N = trace.dcs();
  if (N == 0) throw DataError("trace has no data centers");

  std::vector<double> beta;
  if (opt.beta.size() == 1) {
    beta.assign(N, opt.beta[0]);
  } else if (opt.beta.size() == N) {
    beta = opt.beta;
  } else {
    throw DataError(fmt::format("beta needs 1 or {} values, got {}", N, opt.beta.size()));
  }
  if (!(opt.demand_scale > 0.0)) throw DataError("demand scale must be positive");

  TraceSet scaled = trace;
  for (auto& d : scaled.workload) d *= opt.demand_scale;

  const Matrix offset = normalize_renewable(scaled, opt.rho_s);
  SlotGrid<OperationalCost> costs(T, N);
  switch (opt.model) {
    case CostModel::Linear:
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < N; ++i) costs(t, i) = OperationalCost::linear(trace.prices[i]);
      break;
    case CostModel::Cyclic:
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < N; ++i)
          costs(t, i) = OperationalCost(CyclicPenaltyCost{trace.prices[i], i + 1, t + 1, N});
      break;
    case CostModel::EnergyDelay: {
      const Matrix green = normalize_renewable(scaled, opt.rho_o);
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < N; ++i)
          costs(t, i) = OperationalCost(EnergyDelayCost{trace.prices[i], green(t, i),
                                                        trace.delays_ms[i], opt.service_rate,
                                                        opt.delay_weight});
      break;
    }
  }
  try {
    return Instance(std::move(scaled.workload), std::move(beta), offset, std::move(costs));
  } catch (const InfeasibleError& e) {
    throw DataError(fmt::format("trace does not fit the {} model: {}", to_string(opt.model), e.what()));
  }
}

// Electricity prices in cents per unit of work, one per site.
constexpr std::array<double, 5> kPriceLevels{10.0, 7.0, 5.5, 6.5, 6.0};

TraceSet cyclic_family(const FamilyParams& p) {
  TraceSet trace;
  trace.workload = synth_workload(p.slots, 100.0, 60.0, 288.0, 10.0, p.seed);
  trace.renewable = synth_renewable(p.slots, p.dcs, 288.0, 0.2, p.seed + 1);
  for (std::size_t i = 0; i < p.dcs; ++i) {
    trace.prices.push_back(kPriceLevels[i % kPriceLevels.size()]);
    trace.delays_ms.push_back(10.0 + 250.0 * static_cast<double>(i) / std::max<double>(1.0, p.dcs - 1.0));
  }
  return trace;
}

TraceSet energy_delay_family(const FamilyParams& p) {
  TraceSet trace;
  trace.workload = synth_workload(p.slots, 0.2, 0.08, 288.0, 0.01, p.seed);
  trace.renewable = synth_renewable(p.slots, p.dcs, 288.0, 0.2, p.seed + 1);
  for (std::size_t i = 0; i < p.dcs; ++i) {
    trace.prices.push_back(10.0 + 5.0 * static_cast<double>(i));
    trace.delays_ms.push_back(10.0 + 250.0 * static_cast<double>(i) / std::max<double>(1.0, p.dcs - 1.0));
  }
  return trace;
}

}  // namespace rightsizing
