#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cowsim/encoder.hpp"
#include "cowsim/pulsetrain.hpp"
#include "cowsim/rng.hpp"

namespace cowsim {

/// Avalanche photodiode model. The Gaussian noise closure replaces the
/// amplifier-ASE terms (no amplifier exists in this link) with thermal +
/// shot + dark-current noise; the equivalent load is fixed at 1 ohm and the
/// excess-noise factor is F = gain^excess_noise_exponent, both recorded here
/// so the noise floor is reproducible.
struct ApdParams {
  double gain = 30.0;
  double responsivity_a_per_w = 1.0;
  double dark_current_a = 10e-9;
  double thermal_noise_psd_w_per_hz = 1e-26;
  bool noise_enabled = false;
  double excess_noise_exponent = 0.7;
  // Quantum efficiency used by the photon-counting detection mode.
  double detection_efficiency = 1.0;

  double excess_noise_factor() const;
  void validate() const;
};

/// First-order low-pass (a first-order Bessel filter is a single real pole).
struct FilterParams {
  double cutoff_hz = 750e6;  // 0.75 x 1 Gbps data rate
};

/// Sampled photocurrent, amperes, on the optical field's grid.
struct ElectricalWaveform {
  std::vector<double> samples;
  SlotGrid grid;
};

/// Per-slot outcome of one detector: `energies` is the baseline-subtracted
/// mean slot current (A) in analog mode, or the slot mean photon number in
/// photon-counting mode. click implies energy >= threshold.
struct SlotDetection {
  std::vector<std::uint8_t> clicks;
  std::vector<double> energies;
  double threshold = 0.0;

  std::size_t click_count() const;
};

/// Full three-detector record of one frame (data line Dd, monitoring line
/// DM1/DM2). Pipelines that only run the data line leave dm1/dm2 empty.
struct DetectionRecord {
  SlotDetection dd;
  SlotDetection dm1;
  SlotDetection dm2;
};

struct MonitoringStats {
  std::size_t n_clicks_dm1 = 0;
  std::size_t n_clicks_dm2 = 0;
  std::size_t n_opportunities = 0;

  MonitoringStats& operator+=(const MonitoringStats& o) {
    n_clicks_dm1 += o.n_clicks_dm1;
    n_clicks_dm2 += o.n_clicks_dm2;
    n_opportunities += o.n_opportunities;
    return *this;
  }
};

/// Auto mode discriminates at baseline + n_sigma * sigma, with sigma
/// estimated from the frame's vacuum-slot energies; when the frame is
/// noiseless (sigma = 0) it falls back to half of the peak slot energy.
/// Absolute mode applies a fixed threshold to baseline-subtracted energies.
struct ThresholdPolicy {
  enum class Mode : std::uint8_t { Auto, Absolute };
  Mode mode = Mode::Auto;
  double n_sigma = 5.0;
  double absolute_threshold = 0.0;
};

/// Bob's input splitter: 9:1 toward the data line for TwoPulse, balanced
/// (1:1) for ThreePulse. Returns (data, monitor).
std::pair<OpticalField, OpticalField> tap_split(const OpticalField& field,
                                                ProtocolVariant variant);

/// Delay-line interferometer with a one-slot arm delay:
///   toward_dm1 = (field + delay(field, 1)) / 2   (bright port)
///   toward_dm2 = (field - delay(field, 1)) / 2   (dark port)
/// Lossless except for the final slot's delayed copy, which falls off the
/// fixed window; energy is conserved whenever the last slot is vacuum.
std::pair<OpticalField, OpticalField> mzi(const OpticalField& field);

/// Photocurrent i = gain * responsivity * |E|^2 + dark_current, plus (when
/// enabled) zero-mean Gaussian noise with per-sample variance
///   sigma^2 = thermal_psd/R_load * B + 2 q gain^2 F (responsivity |E|^2 +
///             dark_current) * B,   B = half the sample rate, R_load = 1 ohm.
/// Reproducible per seed.
ElectricalWaveform apd_photocurrent(const OpticalField& field,
                                    const ApdParams& apd,
                                    std::uint64_t noise_seed);

/// Closed-form per-sample noise variance (A^2) at a given incident optical
/// power; zero when noise is disabled. bandwidth_hz is the sample bandwidth.
double apd_noise_variance_a2(const ApdParams& apd, double optical_power_w,
                             double bandwidth_hz);

/// Bilinear-transform single-pole low-pass, prewarped so the magnitude at
/// the cutoff is exactly 1/sqrt(2); DC gain 1. Requires sample rate >
/// 2 * cutoff.
ElectricalWaveform bessel_lowpass(const ElectricalWaveform& wave,
                                  const FilterParams& filter);

/// Slot-gated discrimination: slot energy = mean baseline-subtracted current
/// over the slot, click iff energy >= threshold. The baseline is the mean
/// current over the frame's vacuum slots.
SlotDetection detect_clicks(const ElectricalWaveform& wave, const Frame& frame,
                            const ThresholdPolicy& policy);

/// Poissonian click probability of a coherent pulse: 1 - exp(-eff * mu).
double photon_click_probability(double mu_at_detector, double efficiency);

/// Discrete detection mode: per-slot Bernoulli clicks with
/// p = photon_click_probability(slot mean photon number, efficiency).
/// Energies record the slot photon numbers; draws one uniform per slot.
SlotDetection photon_counting_clicks(const OpticalField& field,
                                     double efficiency, Prng& rng);

enum class DecodeResult : std::uint8_t { Zero, One, Ambiguous, Erasure };

/// Time-bin decoding of the data line, per symbol: a click only in the
/// second pulse slot is 0_L, only in the first is 1_L, both is ambiguous
/// (decoy-compatible, resolved by Alice's announcement), none is an erasure.
std::vector<DecodeResult> decode_data_line(const SlotDetection& dd,
                                           const Frame& frame);

/// Occupancy as seen after the MZI: slot s carries light if s or s-1 was
/// occupied at the input. Used to pick honest vacuum slots for monitor-line
/// baselines.
Frame monitor_frame(const Frame& frame);

/// Counts DM1/DM2 clicks on the overlap slot of every adjacent occupied-slot
/// pair of the frame (the conditioning set: all signal combinations with two
/// or more consecutive non-empty pulses).
MonitoringStats count_monitoring_clicks(const SlotDetection& dm1,
                                        const SlotDetection& dm2,
                                        const Frame& frame);

struct VisibilityEstimate {
  double visibility = 0.0;
  MonitoringStats stats;
};

/// V = (N1 - N2) / (N1 + N2) over the conditioned adjacency slots of all
/// frames. Throws InsufficientStatisticsError when no clicks were observed.
VisibilityEstimate estimate_visibility(std::span<const DetectionRecord> records,
                                       std::span<const Frame> frames);

/// Pooled signal/noise power accumulator for the electrical SNR. Residuals
/// are taken about each frame's own vacuum baseline, so merged statistics
/// are worker-order independent.
struct SnrAccumulator {
  double sumsq_occupied = 0.0;
  double sum_occupied = 0.0;
  std::size_t n_occupied = 0;
  double sumsq_vacuum = 0.0;
  std::size_t n_vacuum = 0;

  void add(const ElectricalWaveform& wave, const Frame& frame);
  void merge(const SnrAccumulator& o);

  /// Variance of the current over vacuum slots (A^2).
  double noise_power_a2() const;
  /// Noise-floor-corrected mean-square signal current over occupied slots:
  /// max(0, meansq_occupied - noise_power). The correction keeps the 0 dB
  /// crossing well-defined when the signal sinks toward the floor.
  double signal_power_a2() const;
  /// Mean baseline-subtracted current over occupied slots (A).
  double mean_occupied_current_a() const;
  /// 10 log10(P_signal / P_noise); +infinity when the noise power is zero
  /// and signal is present, NaN when both vanish.
  double snr_db() const;
};

/// Single-waveform SNR meter (see SnrAccumulator for the estimator).
double measure_snr_db(const ElectricalWaveform& wave, const Frame& frame);

}  // namespace cowsim
