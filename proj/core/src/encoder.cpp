#include "cowsim/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cowsim/rng.hpp"

namespace cowsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void EncoderConfig::validate() const {
  if (!(mu > 0.0 && mu < 1.0))
    throw std::invalid_argument("EncoderConfig: mu must be in (0, 1)");
  if (!(decoy_fraction > 0.0 && decoy_fraction < 1.0))
    throw std::invalid_argument(
        "EncoderConfig: decoy_fraction must be in (0, 1)");
  if (slot_duration_s < 0)
    throw std::invalid_argument("EncoderConfig: slot_duration must be >= 0");
  if (decoy_attenuation_db < 0)
    throw std::invalid_argument(
        "EncoderConfig: decoy_attenuation_db must be >= 0");
  if (peak_power_w < 0)
    throw std::invalid_argument("EncoderConfig: peak_power_w must be >= 0");
  if (!(center_frequency_hz > 0))
    throw std::invalid_argument(
        "EncoderConfig: center_frequency must be > 0");
  if (!(pulse_fill > 0.0 && pulse_fill <= 1.0))
    throw std::invalid_argument("EncoderConfig: pulse_fill must be in (0, 1]");
  if (samples_per_slot < 4)
    throw std::invalid_argument(
        "EncoderConfig: samples_per_slot must be >= 4");
  if (!(extinction_db > 0))
    throw std::invalid_argument("EncoderConfig: extinction_db must be > 0");
  if (linewidth_hz < 0)
    throw std::invalid_argument("EncoderConfig: linewidth_hz must be >= 0");
}

std::vector<Symbol> generate_symbols(const SymbolSource& source,
                                     std::size_t n) {
  if (n == 0) throw std::invalid_argument("generate_symbols: n must be >= 1");
  if (!(source.decoy_fraction > 0.0 && source.decoy_fraction < 1.0))
    throw std::invalid_argument(
        "generate_symbols: decoy_fraction must be in (0, 1)");
  Prng rng(source.seed);
  const double f = source.decoy_fraction;
  const double half = f + (1.0 - f) / 2.0;
  std::vector<Symbol> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.uniform();
    if (u < f)
      out.push_back(Symbol::Decoy);
    else if (u < half)
      out.push_back(Symbol::Bit0);
    else
      out.push_back(Symbol::Bit1);
  }
  return out;
}

std::array<bool, 3> occupied_relative_slots(Symbol s) {
  switch (s) {
    case Symbol::Bit0:
      return {false, true, false};
    case Symbol::Bit1:
      return {true, false, false};
    case Symbol::Decoy:
      return {true, true, false};
  }
  return {false, false, false};
}

Frame make_frame(std::span<const Symbol> symbols, ProtocolVariant variant) {
  Frame frame;
  frame.symbols.assign(symbols.begin(), symbols.end());
  frame.slots_per_symbol = variant == ProtocolVariant::TwoPulse ? 2 : 3;
  frame.occupied.assign(frame.n_slots(), 0);
  for (std::size_t i = 0; i < frame.symbols.size(); ++i) {
    auto rel = occupied_relative_slots(frame.symbols[i]);
    for (int r = 0; r < frame.slots_per_symbol; ++r)
      frame.occupied[i * frame.slots_per_symbol + r] = rel[r] ? 1 : 0;
  }
  return frame;
}

std::vector<double> pulse_envelope(const EncoderConfig& config) {
  const int sps = config.samples_per_slot;
  std::vector<double> env(sps, 0.0);
  int window = static_cast<int>(std::lround(config.pulse_fill * sps));
  window = std::max(1, std::min(window, sps));
  const int start = (sps - window) / 2;
  for (int j = 0; j < window; ++j) {
    const double u = (j + 0.5) / window;  // midpoint sampling
    env[start + j] = config.pulse_shape == PulseShape::Rectangular
                         ? 1.0
                         : 0.5 * (1.0 - std::cos(2.0 * kPi * u));
  }
  return env;
}

double calibrate_amplitude(double target_mu, const EncoderConfig& config) {
  if (!(target_mu > 0.0 && target_mu < 1.0))
    throw std::invalid_argument(
        "calibrate_amplitude: target_mu must be in (0, 1)");
  const auto env = pulse_envelope(config);
  double sumsq = 0.0;
  for (double e : env) sumsq += e * e;
  const double dt = config.effective_slot_duration_s() / config.samples_per_slot;
  const double photon_energy = kPlanckJs * config.center_frequency_hz;
  // pulse energy = peak_power * sum(env^2) * dt  ==  mu * h * nu
  return target_mu * photon_energy / (sumsq * dt);
}

double mean_photon_number(const OpticalField& field, int slot) {
  return slot_energy_j(field, slot) /
         (kPlanckJs * field.center_frequency_hz);
}

EncodedFrame encode_frame(std::span<const Symbol> symbols,
                          const EncoderConfig& config, double global_phase,
                          std::uint64_t phase_walk_seed) {
  if (symbols.empty())
    throw std::invalid_argument("encode_frame: symbols must be non-empty");
  config.validate();

  EncodedFrame out;
  out.frame = make_frame(symbols, config.variant);

  SlotGrid grid;
  grid.slot_duration_s = config.effective_slot_duration_s();
  grid.samples_per_slot = config.samples_per_slot;
  grid.n_slots = out.frame.n_slots();
  out.field = OpticalField::vacuum(grid, config.center_frequency_hz);

  const double peak_power = config.peak_power_w > 0
                                ? config.peak_power_w
                                : calibrate_amplitude(config.mu, config);
  const double peak_amp = std::sqrt(peak_power);
  const auto env = pulse_envelope(config);

  const double decoy_amp_scale =
      config.variant == ProtocolVariant::ThreePulse
          ? std::pow(10.0, -config.decoy_attenuation_db / 20.0)
          : 1.0;
  const double residual_amp_scale =
      std::isinf(config.extinction_db)
          ? 0.0
          : std::pow(10.0, -config.extinction_db / 20.0);

  // Slow phase diffusion of the source; coherence time 1/(pi * linewidth).
  Prng walk_rng(phase_walk_seed);
  const double dt = grid.sample_dt();
  const double walk_sigma =
      config.linewidth_hz > 0
          ? std::sqrt(2.0 * kPi * config.linewidth_hz * dt)
          : 0.0;
  double phase = global_phase;

  const int sps = out.frame.slots_per_symbol;
  std::size_t k = 0;
  for (std::size_t i = 0; i < out.frame.symbols.size(); ++i) {
    const Symbol sym = out.frame.symbols[i];
    const auto rel = occupied_relative_slots(sym);
    for (int r = 0; r < sps; ++r) {
      double amp_scale;
      if (rel[r])
        amp_scale = sym == Symbol::Decoy ? decoy_amp_scale : 1.0;
      else
        amp_scale = residual_amp_scale;
      for (int j = 0; j < grid.samples_per_slot; ++j, ++k) {
        if (walk_sigma > 0) phase += walk_sigma * walk_rng.gaussian();
        const double a = peak_amp * amp_scale * env[j];
        if (a != 0.0)
          out.field.samples[k] =
              std::polar(a, phase);
      }
    }
  }
  return out;
}

}  // namespace cowsim
