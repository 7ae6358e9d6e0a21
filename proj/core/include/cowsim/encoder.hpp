#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "cowsim/pulsetrain.hpp"

namespace cowsim {

enum class ProtocolVariant : std::uint8_t { TwoPulse, ThreePulse };

/// Intra-slot pulse envelope. RaisedCosine is a Hann-shaped amplitude window
/// occupying the central `pulse_fill` fraction of the slot; Rectangular is a
/// flat window over the same fraction.
enum class PulseShape : std::uint8_t { RaisedCosine, Rectangular };

inline const char* variant_name(ProtocolVariant v) {
  return v == ProtocolVariant::TwoPulse ? "2p" : "3p";
}

/// Default pulse-to-pulse separations: 1 ns for the two-pulse variant; the
/// three-pulse variant spaces one 3-slot block over 5 ns (5/3 ns per slot).
inline constexpr double kTwoPulseSlotDurationS = 1e-9;
inline constexpr double kThreePulseSlotDurationS = 5e-9 / 3.0;

struct EncoderConfig {
  ProtocolVariant variant = ProtocolVariant::TwoPulse;
  double mu = 0.5;                 // mean photons per non-empty pulse, (0, 1)
  double decoy_fraction = 0.1;     // decoy prior f, (0, 1)
  double slot_duration_s = 0.0;    // 0 -> variant default
  double decoy_attenuation_db = 3.0;  // ThreePulse decoy pulses only
  double peak_power_w = 0.0;       // 0 -> calibrated from mu; explicit value
                                   // selects a classical operating point
  double center_frequency_hz = kDefaultCenterFrequencyHz;
  PulseShape pulse_shape = PulseShape::RaisedCosine;
  double pulse_fill = 0.5;         // fraction of the slot carrying the pulse
  int samples_per_slot = 16;
  double extinction_db =
      std::numeric_limits<double>::infinity();  // vacuum-slot residual
  double linewidth_hz = 0.0;       // >0 enables the laser phase random walk

  int slots_per_symbol() const {
    return variant == ProtocolVariant::TwoPulse ? 2 : 3;
  }
  double effective_slot_duration_s() const {
    if (slot_duration_s > 0) return slot_duration_s;
    return variant == ProtocolVariant::TwoPulse ? kTwoPulseSlotDurationS
                                                : kThreePulseSlotDurationS;
  }
  void validate() const;
};

/// Deterministic symbol stream: identical seed, identical sequence.
struct SymbolSource {
  std::uint64_t seed = 0;
  double decoy_fraction = 0.1;
};

/// i.i.d. symbols with P(Bit0) = P(Bit1) = (1-f)/2 and P(Decoy) = f.
/// Throws std::invalid_argument for n = 0 or f outside (0, 1).
std::vector<Symbol> generate_symbols(const SymbolSource& source, std::size_t n);

/// Relative pulse slots within one symbol; the ThreePulse tail slot (2) is
/// always vacuum: Bit0 -> {1}, Bit1 -> {0}, Decoy -> {0, 1}.
std::array<bool, 3> occupied_relative_slots(Symbol s);

/// Builds the slot bookkeeping (occupancy map) for a symbol sequence without
/// synthesizing the optical field.
Frame make_frame(std::span<const Symbol> symbols, ProtocolVariant variant);

/// Unit-peak amplitude envelope of one slot (samples_per_slot values,
/// midpoint-sampled). Zero outside the central pulse_fill window.
std::vector<double> pulse_envelope(const EncoderConfig& config);

struct EncodedFrame {
  OpticalField field;
  Frame frame;
};

/// Synthesizes Alice's encoded field. All non-empty pulses share one global
/// coherent phase; `global_phase` randomizes it frame to frame and
/// `phase_walk_seed` drives the optional linewidth phase diffusion.
EncodedFrame encode_frame(std::span<const Symbol> symbols,
                          const EncoderConfig& config,
                          double global_phase = 0.0,
                          std::uint64_t phase_walk_seed = 0);

/// Slot energy divided by the photon energy h*nu: the mean photon number of
/// the coherent pulse in that slot.
double mean_photon_number(const OpticalField& field, int slot);

/// Peak power (W) such that one non-empty pulse of the configured shape
/// carries energy target_mu * h * nu. Requires 0 < target_mu < 1.
double calibrate_amplitude(double target_mu, const EncoderConfig& config);

}  // namespace cowsim
