#include "cowsim/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cowsim/constants.hpp"
#include "cowsim/errors.hpp"
#include "cowsim/rng.hpp"

namespace cowsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLoadResistanceOhm = 1.0;
}  // namespace

double ApdParams::excess_noise_factor() const {
  return std::pow(gain, excess_noise_exponent);
}

void ApdParams::validate() const {
  if (gain < 0 || responsivity_a_per_w < 0 || dark_current_a < 0 ||
      thermal_noise_psd_w_per_hz < 0)
    throw std::invalid_argument("ApdParams: parameters must be >= 0");
  if (!(detection_efficiency >= 0 && detection_efficiency <= 1))
    throw std::invalid_argument(
        "ApdParams: detection_efficiency must be in [0, 1]");
}

std::size_t SlotDetection::click_count() const {
  std::size_t n = 0;
  for (auto c : clicks) n += c;
  return n;
}

std::pair<OpticalField, OpticalField> tap_split(const OpticalField& field,
                                                ProtocolVariant variant) {
  const double to_data = variant == ProtocolVariant::TwoPulse ? 0.9 : 0.5;
  return split(field, to_data);
}

std::pair<OpticalField, OpticalField> mzi(const OpticalField& field) {
  if (field.grid.n_slots < 2)
    throw std::invalid_argument("mzi: field must span at least 2 slots");
  const OpticalField delayed = delay(field, 1);
  OpticalField dm1 = field;
  OpticalField dm2 = field;
  for (std::size_t i = 0; i < field.samples.size(); ++i) {
    dm1.samples[i] = 0.5 * (field.samples[i] + delayed.samples[i]);
    dm2.samples[i] = 0.5 * (field.samples[i] - delayed.samples[i]);
  }
  return {std::move(dm1), std::move(dm2)};
}

double apd_noise_variance_a2(const ApdParams& apd, double optical_power_w,
                             double bandwidth_hz) {
  if (!apd.noise_enabled) return 0.0;
  const double thermal =
      apd.thermal_noise_psd_w_per_hz / kLoadResistanceOhm * bandwidth_hz;
  const double shot = 2.0 * kElementaryChargeC * apd.gain * apd.gain *
                      apd.excess_noise_factor() *
                      (apd.responsivity_a_per_w * optical_power_w +
                       apd.dark_current_a) *
                      bandwidth_hz;
  return thermal + shot;
}

ElectricalWaveform apd_photocurrent(const OpticalField& field,
                                    const ApdParams& apd,
                                    std::uint64_t noise_seed) {
  apd.validate();
  ElectricalWaveform wave;
  wave.grid = field.grid;
  wave.samples.resize(field.samples.size());
  const double bandwidth = 0.5 * field.grid.sample_rate_hz();
  Prng rng(noise_seed);
  for (std::size_t i = 0; i < field.samples.size(); ++i) {
    const double p_opt = std::norm(field.samples[i]);
    double current =
        apd.gain * apd.responsivity_a_per_w * p_opt + apd.dark_current_a;
    if (apd.noise_enabled) {
      const double sigma =
          std::sqrt(apd_noise_variance_a2(apd, p_opt, bandwidth));
      current += sigma * rng.gaussian();
    }
    wave.samples[i] = current;
  }
  return wave;
}

ElectricalWaveform bessel_lowpass(const ElectricalWaveform& wave,
                                  const FilterParams& filter) {
  if (!(filter.cutoff_hz > 0))
    throw std::invalid_argument("bessel_lowpass: cutoff must be > 0");
  const double fs = wave.grid.sample_rate_hz();
  if (!(fs > 2.0 * filter.cutoff_hz))
    throw std::invalid_argument(
        "bessel_lowpass: sample rate must exceed twice the cutoff");
  // Prewarped bilinear transform of H(s) = 1 / (1 + s/wc).
  const double k = std::tan(kPi * filter.cutoff_hz / fs);
  const double b = k / (1.0 + k);
  const double a1 = (k - 1.0) / (1.0 + k);
  ElectricalWaveform out;
  out.grid = wave.grid;
  out.samples.resize(wave.samples.size());
  double x_prev = 0.0;
  double y_prev = 0.0;
  for (std::size_t i = 0; i < wave.samples.size(); ++i) {
    const double x = wave.samples[i];
    const double y = b * (x + x_prev) - a1 * y_prev;
    out.samples[i] = y;
    x_prev = x;
    y_prev = y;
  }
  return out;
}

namespace {

std::vector<double> slot_mean_currents(const ElectricalWaveform& wave) {
  const int n_slots = wave.grid.n_slots;
  const int sps = wave.grid.samples_per_slot;
  std::vector<double> levels(n_slots, 0.0);
  for (int s = 0; s < n_slots; ++s) {
    double sum = 0.0;
    const std::size_t base = static_cast<std::size_t>(s) * sps;
    for (int j = 0; j < sps; ++j) sum += wave.samples[base + j];
    levels[s] = sum / sps;
  }
  return levels;
}

double vacuum_baseline(const std::vector<double>& levels, const Frame& frame) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int s = 0; s < frame.n_slots(); ++s) {
    if (!frame.occupied[s]) {
      sum += levels[s];
      ++n;
    }
  }
  if (n > 0) return sum / static_cast<double>(n);
  // All-occupied frame: the dark level is not observable, fall back to the
  // weakest slot.
  return *std::min_element(levels.begin(), levels.end());
}

}  // namespace

SlotDetection detect_clicks(const ElectricalWaveform& wave, const Frame& frame,
                            const ThresholdPolicy& policy) {
  if (wave.grid.n_slots != frame.n_slots())
    throw std::invalid_argument("detect_clicks: waveform/frame slot mismatch");
  if (wave.samples.size() != wave.grid.total_samples())
    throw std::invalid_argument("detect_clicks: waveform/grid size mismatch");

  const auto levels = slot_mean_currents(wave);
  const double baseline = vacuum_baseline(levels, frame);

  SlotDetection det;
  det.energies.resize(levels.size());
  for (std::size_t s = 0; s < levels.size(); ++s)
    det.energies[s] = levels[s] - baseline;

  double threshold;
  if (policy.mode == ThresholdPolicy::Mode::Absolute) {
    threshold = policy.absolute_threshold;
  } else {
    double var = 0.0;
    std::size_t n_vac = 0;
    for (int s = 0; s < frame.n_slots(); ++s) {
      if (!frame.occupied[s]) {
        var += det.energies[s] * det.energies[s];
        ++n_vac;
      }
    }
    const double sigma = n_vac > 0 ? std::sqrt(var / n_vac) : 0.0;
    if (sigma > 0) {
      threshold = policy.n_sigma * sigma;
    } else {
      // Noiseless fallback: mid-amplitude discriminator.
      const double peak =
          *std::max_element(det.energies.begin(), det.energies.end());
      threshold = peak > 0 ? 0.5 * peak
                           : std::numeric_limits<double>::infinity();
    }
  }

  det.threshold = threshold;
  det.clicks.resize(levels.size());
  for (std::size_t s = 0; s < levels.size(); ++s)
    det.clicks[s] = det.energies[s] >= threshold ? 1 : 0;
  return det;
}

double photon_click_probability(double mu_at_detector, double efficiency) {
  if (mu_at_detector < 0)
    throw std::invalid_argument("photon_click_probability: mu must be >= 0");
  if (!(efficiency >= 0 && efficiency <= 1))
    throw std::invalid_argument(
        "photon_click_probability: efficiency must be in [0, 1]");
  return -std::expm1(-efficiency * mu_at_detector);
}

SlotDetection photon_counting_clicks(const OpticalField& field,
                                     double efficiency, Prng& rng) {
  SlotDetection det;
  det.threshold = 0.0;
  const int n = field.grid.n_slots;
  det.clicks.resize(n);
  det.energies.resize(n);
  for (int s = 0; s < n; ++s) {
    const double mu = mean_photon_number(field, s);
    const double p = photon_click_probability(mu, efficiency);
    det.energies[s] = mu;
    det.clicks[s] = rng.uniform() < p ? 1 : 0;
  }
  return det;
}

std::vector<DecodeResult> decode_data_line(const SlotDetection& dd,
                                           const Frame& frame) {
  if (dd.clicks.size() != static_cast<std::size_t>(frame.n_slots()))
    throw std::invalid_argument("decode_data_line: record/frame mismatch");
  std::vector<DecodeResult> out(frame.symbols.size());
  const int sps = frame.slots_per_symbol;
  for (std::size_t i = 0; i < frame.symbols.size(); ++i) {
    // Pulse-capable slots are the first two of each symbol; the ThreePulse
    // tail slot never carries signal.
    const bool first = dd.clicks[i * sps] != 0;
    const bool second = dd.clicks[i * sps + 1] != 0;
    if (first && second)
      out[i] = DecodeResult::Ambiguous;
    else if (second)
      out[i] = DecodeResult::Zero;
    else if (first)
      out[i] = DecodeResult::One;
    else
      out[i] = DecodeResult::Erasure;
  }
  return out;
}

Frame monitor_frame(const Frame& frame) {
  Frame out = frame;
  for (int s = frame.n_slots() - 1; s >= 0; --s) {
    const bool lit = frame.occupied[s] || (s > 0 && frame.occupied[s - 1]);
    out.occupied[s] = lit ? 1 : 0;
  }
  return out;
}

MonitoringStats count_monitoring_clicks(const SlotDetection& dm1,
                                        const SlotDetection& dm2,
                                        const Frame& frame) {
  MonitoringStats stats;
  for (int s = 0; s + 1 < frame.n_slots(); ++s) {
    if (!frame.occupied[s] || !frame.occupied[s + 1]) continue;
    const int overlap = s + 1;
    ++stats.n_opportunities;
    if (dm1.clicks[overlap]) ++stats.n_clicks_dm1;
    if (dm2.clicks[overlap]) ++stats.n_clicks_dm2;
  }
  return stats;
}

VisibilityEstimate estimate_visibility(
    std::span<const DetectionRecord> records, std::span<const Frame> frames) {
  if (records.size() != frames.size())
    throw std::invalid_argument("estimate_visibility: records/frames mismatch");
  MonitoringStats stats;
  for (std::size_t i = 0; i < records.size(); ++i)
    stats += count_monitoring_clicks(records[i].dm1, records[i].dm2, frames[i]);
  const std::size_t total = stats.n_clicks_dm1 + stats.n_clicks_dm2;
  if (total == 0)
    throw InsufficientStatisticsError(
        "estimate_visibility: no monitoring clicks observed");
  VisibilityEstimate est;
  est.stats = stats;
  est.visibility =
      (static_cast<double>(stats.n_clicks_dm1) -
       static_cast<double>(stats.n_clicks_dm2)) /
      static_cast<double>(total);
  return est;
}

void SnrAccumulator::add(const ElectricalWaveform& wave, const Frame& frame) {
  if (wave.grid.n_slots != frame.n_slots())
    throw std::invalid_argument("SnrAccumulator: waveform/frame mismatch");
  const int sps = wave.grid.samples_per_slot;
  // Baseline from this frame's vacuum samples.
  double vac_sum = 0.0;
  std::size_t vac_n = 0;
  for (int s = 0; s < frame.n_slots(); ++s) {
    if (frame.occupied[s]) continue;
    const std::size_t base = static_cast<std::size_t>(s) * sps;
    for (int j = 0; j < sps; ++j) vac_sum += wave.samples[base + j];
    vac_n += sps;
  }
  double baseline;
  if (vac_n > 0) {
    baseline = vac_sum / static_cast<double>(vac_n);
  } else {
    baseline = *std::min_element(wave.samples.begin(), wave.samples.end());
  }
  for (int s = 0; s < frame.n_slots(); ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * sps;
    if (frame.occupied[s]) {
      for (int j = 0; j < sps; ++j) {
        const double r = wave.samples[base + j] - baseline;
        sumsq_occupied += r * r;
        sum_occupied += r;
      }
      n_occupied += sps;
    } else {
      for (int j = 0; j < sps; ++j) {
        const double r = wave.samples[base + j] - baseline;
        sumsq_vacuum += r * r;
      }
      n_vacuum += sps;
    }
  }
}

void SnrAccumulator::merge(const SnrAccumulator& o) {
  sumsq_occupied += o.sumsq_occupied;
  sum_occupied += o.sum_occupied;
  n_occupied += o.n_occupied;
  sumsq_vacuum += o.sumsq_vacuum;
  n_vacuum += o.n_vacuum;
}

double SnrAccumulator::noise_power_a2() const {
  // Residuals are centered per frame, so the pooled mean is zero and the
  // mean square is the variance.
  if (n_vacuum == 0) return 0.0;
  return sumsq_vacuum / static_cast<double>(n_vacuum);
}

double SnrAccumulator::signal_power_a2() const {
  if (n_occupied == 0) return 0.0;
  const double raw = sumsq_occupied / static_cast<double>(n_occupied);
  return std::max(0.0, raw - noise_power_a2());
}

double SnrAccumulator::mean_occupied_current_a() const {
  if (n_occupied == 0) return 0.0;
  return sum_occupied / static_cast<double>(n_occupied);
}

double SnrAccumulator::snr_db() const {
  const double noise = noise_power_a2();
  const double signal = signal_power_a2();
  if (noise == 0.0) {
    if (signal > 0.0) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (signal == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

double measure_snr_db(const ElectricalWaveform& wave, const Frame& frame) {
  SnrAccumulator acc;
  acc.add(wave, frame);
  return acc.snr_db();
}

}  // namespace cowsim
