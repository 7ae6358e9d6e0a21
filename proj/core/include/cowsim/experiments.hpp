#pragma once

#include <span>
#include <string>
#include <vector>

#include "cowsim/protocol.hpp"

namespace cowsim {

/// One sweep: sessions over (variant, condition, distance) cells built from
/// a base configuration. The channel kind (and its fixed parameters) come
/// from base.channel; each cell overrides variant, distance and weather.
struct SweepSpec {
  std::vector<ProtocolVariant> variants = {ProtocolVariant::TwoPulse,
                                           ProtocolVariant::ThreePulse};
  std::vector<double> distances_km;
  std::vector<WeatherCondition> weathers;  // FSO sweeps; empty = all ten
  SessionConfig base;
  int snr_average_runs = 8;  // k sessions merged per max-distance probe

  void validate() const;
};

struct CsvRow {
  std::string variant;
  std::string channel;
  std::string weather;  // "fiber" for fiber rows
  double distance_km = 0.0;
  double snr_db = 0.0;
  double qber = 0.0;       // NaN when undefined
  double visibility = 0.0; // NaN when undefined
  std::uint64_t seed = 0;
};

/// One session per (variant, distance), rows ordered by variant then
/// distance. Session failures become NaN-valued rows, never sweep aborts.
std::vector<CsvRow> sweep_fiber(const SweepSpec& spec);

/// One session per (variant, weather, distance), ordered by variant, then
/// table order of the weathers, then distance.
std::vector<CsvRow> sweep_fso(const SweepSpec& spec);

inline constexpr const char* kSweepCsvHeader =
    "variant,channel,weather,distance_km,snr_db,qber,visibility,seed";

std::string rows_to_csv(std::span<const CsvRow> rows);

/// Writes content via a temp file in the same directory plus rename.
void write_atomic(const std::string& path, std::string_view content);

/// SNR with the noise-seed jitter tamed: merges the accumulators of k
/// sessions run at seeds derived from config.seed, i.e. one pooled estimate
/// over k times the samples.
double averaged_snr_db(const SessionConfig& config, int k);

struct MaxDistanceResult {
  double distance_km = 0.0;
  // Probe history (distance, averaged snr_db), in probe order.
  std::vector<std::pair<double, double>> probes;
};

/// Bisects the averaged SNR-vs-distance curve for the crossing of
/// threshold_db between lo_km and hi_km, to a 0.5 km bracket. Monotonicity
/// of the averaged curve is asserted across probes. Throws
/// std::runtime_error when the curve does not cross in the probe range
/// (including the noiseless +inf case).
MaxDistanceResult find_max_distance(const SessionConfig& base,
                                    double threshold_db = 0.0,
                                    double lo_km = 1.0, double hi_km = 500.0,
                                    int k = 8);

/// Solves, in closed form from one deterministic noise-free session, for the
/// thermal noise PSD (W/Hz) that places the SNR threshold_db crossing of
/// base's variant/channel at distance_km. Throws std::runtime_error when the
/// irreducible dark-current shot floor already exceeds the target.
double calibrate_thermal_floor(const SessionConfig& base, double distance_km,
                               double threshold_db = 0.0);

struct CompareCell {
  std::string weather;  // "fiber" for fiber cells
  double distance_km = 0.0;
  double snr_2p_db = 0.0;
  double snr_3p_db = 0.0;
  double delta_db = 0.0;  // TwoPulse - ThreePulse
};

struct CompareReport {
  std::string channel;
  double threshold_db = 0.0;
  std::vector<CompareCell> cells;
  double max_distance_2p_km = 0.0;  // NaN when the threshold is not crossed
  double max_distance_3p_km = 0.0;
  bool deltas_nonnegative = false;
};

/// Per-condition TwoPulse-vs-ThreePulse SNR table plus both variants'
/// maximum distances; asserts and reports delta >= 0 across cells.
CompareReport compare_variants(const SessionConfig& base,
                               std::span<const double> distances_km,
                               double threshold_db = 0.0,
                               double max_probe_km = 500.0, int k = 8);

std::string compare_to_json(const CompareReport& report);

}  // namespace cowsim
