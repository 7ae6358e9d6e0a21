#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cowsim/channel.hpp"
#include "cowsim/encoder.hpp"
#include "cowsim/receiver.hpp"

namespace cowsim {

/// Analog mode drives the Gaussian-noise photocurrent chain (the regime of
/// the electrical SNR studies); photon-counting mode draws Bernoulli clicks
/// with p = 1 - exp(-eta * mu), the regime of QKD click statistics at mu < 1.
enum class DetectionMode : std::uint8_t { Analog, PhotonCounting };

inline const char* detection_mode_name(DetectionMode m) {
  return m == DetectionMode::Analog ? "analog" : "photon_counting";
}

struct SessionConfig {
  EncoderConfig encoder;
  ChannelModel channel = FiberParams{};  // 0 km by default: lossless
  ApdParams apd;
  FilterParams filter;
  ThresholdPolicy threshold;
  std::size_t n_symbols = 20000;
  std::uint64_t seed = 1;
  DetectionMode detection_mode = DetectionMode::PhotonCounting;
  bool eve_enabled = false;
  // Session internals: symbols are sharded into frames of this many symbols,
  // processed independently (and in parallel when n_workers != 1) with
  // per-frame derived seeds, so results do not depend on the worker count.
  std::size_t frame_symbols = 1024;
  int n_workers = 1;  // 0 = hardware concurrency

  void validate() const;
};

/// Positions kept by sifting: unambiguous, detected, non-decoy symbols.
struct SiftedKey {
  std::vector<std::uint8_t> alice_bits;
  std::vector<std::uint8_t> bob_bits;

  std::size_t size() const { return alice_bits.size(); }
};

/// Keeps symbol indices where Bob decoded a definite bit and Alice's symbol
/// was not a decoy. Ambiguous detections are always discarded: over a true
/// decoy by Alice's announcement, over data symbols conservatively.
SiftedKey sift(std::span<const Symbol> alice_symbols,
               std::span<const DecodeResult> bob_decodings);

/// Fraction of sifted positions where the bits disagree.
/// Throws InsufficientStatisticsError for an empty key.
double qber(const SiftedKey& key);

/// Intensity-faithful intercept-resend test adversary: every occupied slot
/// is resent with its power intact but a fresh uniform random phase, which
/// destroys the inter-slot coherence the monitoring line certifies.
OpticalField eve_intercept_resend(const OpticalField& field,
                                  const Frame& frame, std::uint64_t eve_seed);

struct SessionReport {
  std::string variant;
  std::uint64_t seed = 0;
  bool qber_defined = false;
  double qber = 0.0;
  bool visibility_defined = false;
  double visibility = 0.0;
  double snr_db = 0.0;
  std::size_t raw_detections = 0;
  std::size_t sifted_length = 0;
  // Configuration echo.
  std::size_t n_symbols = 0;
  std::string detection_mode;
  bool eve_enabled = false;
  bool noise_enabled = false;
  std::string channel;
  std::string weather;
  double distance_km = 0.0;
  double mu = 0.0;
  double decoy_fraction = 0.0;
};

/// Flat JSON document with stable field names (qber, visibility, snr_db,
/// raw_detections, sifted_length, seed, variant, plus the config echo).
/// Undefined statistics serialize as null; non-finite SNR as "inf"/"-inf".
std::string report_to_json(const SessionReport& report);

struct SessionOutcome {
  SessionReport report;
  SnrAccumulator snr;
  MonitoringStats monitoring;
};

/// Runs Alice -> (Eve) -> channel -> Bob for n_symbols, sifts, and fills the
/// report. Deterministic for a given config (including across worker
/// counts); insufficient statistics become undefined-markers, not errors.
SessionOutcome run_session(const SessionConfig& config);

}  // namespace cowsim
