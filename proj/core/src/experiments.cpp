#include "cowsim/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cowsim/parallel.hpp"
#include "cowsim/rng.hpp"

namespace cowsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

SessionConfig cell_config(const SweepSpec& spec, ProtocolVariant variant,
                          double distance_km,
                          const WeatherCondition* weather) {
  SessionConfig cfg = spec.base;
  cfg.encoder.variant = variant;
  cfg.n_workers = 1;  // cells are the parallel unit
  if (weather) {
    FsoParams fso = std::holds_alternative<FsoParams>(cfg.channel)
                        ? std::get<FsoParams>(cfg.channel)
                        : FsoParams{};
    fso.weather = *weather;
    fso.length_km = distance_km;
    cfg.channel = fso;
  } else {
    FiberParams fiber = std::holds_alternative<FiberParams>(cfg.channel)
                            ? std::get<FiberParams>(cfg.channel)
                            : FiberParams{};
    fiber.length_km = distance_km;
    cfg.channel = fiber;
  }
  return cfg;
}

CsvRow run_cell(const SessionConfig& cfg) {
  CsvRow row;
  row.variant = variant_name(cfg.encoder.variant);
  row.channel = channel_kind_name(cfg.channel);
  row.weather = std::holds_alternative<FsoParams>(cfg.channel)
                    ? std::string(weather_name(
                          std::get<FsoParams>(cfg.channel).weather))
                    : "fiber";
  row.distance_km = channel_length_km(cfg.channel);
  row.seed = cfg.seed;
  try {
    const auto outcome = run_session(cfg);
    row.snr_db = outcome.report.snr_db;
    row.qber = outcome.report.qber_defined ? outcome.report.qber : kNaN;
    row.visibility = outcome.report.visibility_defined
                         ? outcome.report.visibility
                         : kNaN;
  } catch (const std::exception&) {
    // Row-level failure marker; the sweep continues.
    row.snr_db = kNaN;
    row.qber = kNaN;
    row.visibility = kNaN;
  }
  return row;
}

std::vector<CsvRow> run_cells(const SweepSpec& spec,
                              const std::vector<SessionConfig>& cells) {
  std::vector<CsvRow> rows(cells.size());
  parallel_for(cells.size(), spec.base.n_workers,
               [&](std::size_t i) { rows[i] = run_cell(cells[i]); });
  return rows;
}

}  // namespace

void SweepSpec::validate() const {
  if (distances_km.empty())
    throw std::invalid_argument("SweepSpec: distances must be non-empty");
  for (std::size_t i = 0; i < distances_km.size(); ++i) {
    if (distances_km[i] < 0)
      throw std::invalid_argument("SweepSpec: distances must be >= 0");
    if (i > 0 && !(distances_km[i] > distances_km[i - 1]))
      throw std::invalid_argument(
          "SweepSpec: distances must be strictly increasing");
  }
  if (variants.empty())
    throw std::invalid_argument("SweepSpec: variants must be non-empty");
  if (snr_average_runs < 1)
    throw std::invalid_argument("SweepSpec: snr_average_runs must be >= 1");
}

std::vector<CsvRow> sweep_fiber(const SweepSpec& spec) {
  spec.validate();
  std::vector<SessionConfig> cells;
  for (ProtocolVariant v : spec.variants)
    for (double d : spec.distances_km)
      cells.push_back(cell_config(spec, v, d, nullptr));
  return run_cells(spec, cells);
}

std::vector<CsvRow> sweep_fso(const SweepSpec& spec) {
  spec.validate();
  const std::vector<WeatherCondition> weathers =
      spec.weathers.empty()
          ? std::vector<WeatherCondition>(kAllWeathers.begin(),
                                          kAllWeathers.end())
          : spec.weathers;
  std::vector<SessionConfig> cells;
  for (ProtocolVariant v : spec.variants)
    for (WeatherCondition w : weathers)
      for (double d : spec.distances_km)
        cells.push_back(cell_config(spec, v, d, &w));
  return run_cells(spec, cells);
}

std::string rows_to_csv(std::span<const CsvRow> rows) {
  std::string out = kSweepCsvHeader;
  out.push_back('\n');
  for (const auto& r : rows) {
    out += r.variant;
    out.push_back(',');
    out += r.channel;
    out.push_back(',');
    out += r.weather;
    out.push_back(',');
    out += format_double(r.distance_km);
    out.push_back(',');
    out += format_double(r.snr_db);
    out.push_back(',');
    out += format_double(r.qber);
    out.push_back(',');
    out += format_double(r.visibility);
    out.push_back(',');
    out += std::to_string(r.seed);
    out.push_back('\n');
  }
  return out;
}

void write_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

double averaged_snr_db(const SessionConfig& config, int k) {
  if (k < 1) throw std::invalid_argument("averaged_snr_db: k must be >= 1");
  SnrAccumulator acc;
  for (int j = 0; j < k; ++j) {
    SessionConfig cfg = config;
    cfg.seed = derive_seed(config.seed, seed_tag::kSnrAverage,
                           static_cast<std::uint64_t>(j));
    acc.merge(run_session(cfg).snr);
  }
  return acc.snr_db();
}

MaxDistanceResult find_max_distance(const SessionConfig& base,
                                    double threshold_db, double lo_km,
                                    double hi_km, int k) {
  if (!(lo_km >= 0) || !(hi_km > lo_km))
    throw std::invalid_argument("find_max_distance: need 0 <= lo < hi");

  MaxDistanceResult result;
  std::vector<std::pair<double, double>> sorted;  // by distance

  auto probe = [&](double d) {
    SessionConfig cfg = base;
    set_channel_length_km(cfg.channel, d);
    const double snr = averaged_snr_db(cfg, k);
    result.probes.emplace_back(d, snr);
    // The averaged loss chain is deterministic in distance; a non-monotone
    // curve means the estimator is drowning in Monte-Carlo jitter.
    auto it = sorted.begin();
    while (it != sorted.end() && it->first < d) ++it;
    if (it != sorted.end() && !(snr >= it->second - 1e-6))
      throw std::runtime_error("find_max_distance: averaged SNR curve is not "
                               "monotone across probes");
    if (it != sorted.begin() && !(std::prev(it)->second >= snr - 1e-6))
      throw std::runtime_error("find_max_distance: averaged SNR curve is not "
                               "monotone across probes");
    sorted.insert(it, {d, snr});
    return snr;
  };

  const double snr_lo = probe(lo_km);
  if (!(snr_lo > threshold_db)) {
    std::ostringstream msg;
    msg << "find_max_distance: SNR at the minimum probe distance (" << lo_km
        << " km -> " << snr_lo << " dB) is not above the threshold "
        << threshold_db << " dB";
    throw std::runtime_error(msg.str());
  }
  const double snr_hi = probe(hi_km);
  if (!(snr_hi < threshold_db)) {
    std::ostringstream msg;
    msg << "find_max_distance: threshold " << threshold_db
        << " dB never crossed in [" << lo_km << ", " << hi_km
        << "] km (SNR at " << hi_km << " km is " << snr_hi
        << " dB); extend the probe range or enable noise";
    throw std::runtime_error(msg.str());
  }

  double lo = lo_km, hi = hi_km;
  while (hi - lo > 0.5) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid) > threshold_db)
      lo = mid;
    else
      hi = mid;
  }
  result.distance_km = 0.5 * (lo + hi);
  return result;
}

double calibrate_thermal_floor(const SessionConfig& base, double distance_km,
                               double threshold_db) {
  SessionConfig cfg = base;
  set_channel_length_km(cfg.channel, distance_km);
  cfg.apd.noise_enabled = false;
  cfg.detection_mode = DetectionMode::Analog;
  const auto outcome = run_session(cfg);

  const double signal_meansq = outcome.snr.signal_power_a2();
  if (!(signal_meansq > 0))
    throw std::runtime_error(
        "calibrate_thermal_floor: no signal power at the target distance");
  const double mean_optical_w =
      outcome.snr.mean_occupied_current_a() /
      (cfg.apd.gain * cfg.apd.responsivity_a_per_w);

  const double bandwidth = 0.5 * cfg.encoder.samples_per_slot /
                           cfg.encoder.effective_slot_duration_s();
  const double gf = cfg.apd.gain * cfg.apd.gain * cfg.apd.excess_noise_factor();
  const double dark_shot =
      2.0 * kElementaryChargeC * gf * cfg.apd.dark_current_a * bandwidth;
  const double signal_shot_excess = 2.0 * kElementaryChargeC * gf *
                                    cfg.apd.responsivity_a_per_w *
                                    mean_optical_w * bandwidth;

  // The measured signal power estimate converges to S + signal_shot_excess;
  // place its ratio to the vacuum noise power at the threshold.
  const double target_noise = (signal_meansq + signal_shot_excess) /
                              std::pow(10.0, threshold_db / 10.0);
  const double thermal_var = target_noise - dark_shot;
  if (!(thermal_var > 0)) {
    std::ostringstream msg;
    msg << "calibrate_thermal_floor: the dark-current shot floor (" << dark_shot
        << " A^2) already exceeds the target noise power (" << target_noise
        << " A^2) at " << distance_km
        << " km; raise the signal level or reduce dark current";
    throw std::runtime_error(msg.str());
  }
  return thermal_var / bandwidth;  // PSD across the 1-ohm equivalent load
}

CompareReport compare_variants(const SessionConfig& base,
                               std::span<const double> distances_km,
                               double threshold_db, double max_probe_km,
                               int k) {
  CompareReport report;
  report.channel = channel_kind_name(base.channel);
  report.threshold_db = threshold_db;

  const bool fso = std::holds_alternative<FsoParams>(base.channel);
  std::vector<WeatherCondition> weathers;
  if (fso)
    weathers.assign(kAllWeathers.begin(), kAllWeathers.end());

  auto snr_of = [&](ProtocolVariant v, double d,
                    const WeatherCondition* w) {
    SessionConfig cfg = base;
    cfg.encoder.variant = v;
    set_channel_length_km(cfg.channel, d);
    if (w) std::get<FsoParams>(cfg.channel).weather = *w;
    return averaged_snr_db(cfg, k);
  };

  auto add_cell = [&](double d, const WeatherCondition* w) {
    CompareCell cell;
    cell.weather = w ? std::string(weather_name(*w)) : "fiber";
    cell.distance_km = d;
    cell.snr_2p_db = snr_of(ProtocolVariant::TwoPulse, d, w);
    cell.snr_3p_db = snr_of(ProtocolVariant::ThreePulse, d, w);
    cell.delta_db = cell.snr_2p_db - cell.snr_3p_db;
    report.cells.push_back(cell);
  };

  if (fso) {
    for (WeatherCondition w : weathers)
      for (double d : distances_km) add_cell(d, &w);
  } else {
    for (double d : distances_km) add_cell(d, nullptr);
  }

  report.deltas_nonnegative = true;
  for (const auto& cell : report.cells) {
    if (std::isnan(cell.delta_db)) continue;  // both ports below the floor
    if (!(cell.delta_db >= 0)) report.deltas_nonnegative = false;
  }

  auto max_dist = [&](ProtocolVariant v) {
    SessionConfig cfg = base;
    cfg.encoder.variant = v;
    try {
      const double lo = distances_km.empty() ? 1.0 : distances_km.front();
      return find_max_distance(cfg, threshold_db, std::max(lo, 1e-3),
                               max_probe_km, k)
          .distance_km;
    } catch (const std::exception&) {
      return kNaN;
    }
  };
  report.max_distance_2p_km = max_dist(ProtocolVariant::TwoPulse);
  report.max_distance_3p_km = max_dist(ProtocolVariant::ThreePulse);
  return report;
}

namespace {

nlohmann::ordered_json json_number_or_marker(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string compare_to_json(const CompareReport& report) {
  nlohmann::ordered_json j;
  j["channel"] = report.channel;
  j["threshold_db"] = report.threshold_db;
  j["max_distance_2p_km"] = json_number_or_marker(report.max_distance_2p_km);
  j["max_distance_3p_km"] = json_number_or_marker(report.max_distance_3p_km);
  j["deltas_nonnegative"] = report.deltas_nonnegative;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& cell : report.cells) {
    nlohmann::ordered_json c;
    c["weather"] = cell.weather;
    c["distance_km"] = cell.distance_km;
    c["snr_2p_db"] = json_number_or_marker(cell.snr_2p_db);
    c["snr_3p_db"] = json_number_or_marker(cell.snr_3p_db);
    c["delta_db"] = json_number_or_marker(cell.delta_db);
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

}  // namespace cowsim
