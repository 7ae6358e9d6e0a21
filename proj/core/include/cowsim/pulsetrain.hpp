#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "cowsim/constants.hpp"

namespace cowsim {

/// Uniform time grid partitioned into equal slots. A slot is the basic
/// time-bin unit of the protocol; pulses live inside slots.
struct SlotGrid {
  double slot_duration_s = 1e-9;
  int samples_per_slot = 16;
  int n_slots = 0;

  std::size_t total_samples() const {
    return static_cast<std::size_t>(samples_per_slot) *
           static_cast<std::size_t>(n_slots);
  }
  double sample_dt() const { return slot_duration_s / samples_per_slot; }
  double sample_rate_hz() const { return samples_per_slot / slot_duration_s; }

  /// Throws std::invalid_argument unless slot_duration > 0,
  /// samples_per_slot >= 4 and n_slots >= 1.
  void validate() const;

  bool operator==(const SlotGrid&) const = default;
};

/// Sampled complex optical envelope. Amplitudes carry units sqrt(W), so
/// |sample|^2 is instantaneous optical power in watts. Fields are immutable
/// values: every operation returns a new field.
struct OpticalField {
  std::vector<std::complex<double>> samples;
  SlotGrid grid;
  double center_frequency_hz = kDefaultCenterFrequencyHz;

  static OpticalField vacuum(const SlotGrid& grid,
                             double center_frequency_hz =
                                 kDefaultCenterFrequencyHz);

  /// Sum of |sample|^2 * dt over the whole window, joules.
  double total_energy_j() const;
};

/// Logical symbols of the coherent one-way alphabet.
enum class Symbol : std::uint8_t { Bit0 = 0, Bit1 = 1, Decoy = 2 };

/// Alice's symbol sequence bound to grid slots. Symbol i occupies the
/// consecutive run [i*slots_per_symbol, (i+1)*slots_per_symbol); `occupied`
/// caches which grid slots carry a pulse under the variant's mapping.
struct Frame {
  std::vector<Symbol> symbols;
  int slots_per_symbol = 2;  // 2 or 3
  std::vector<std::uint8_t> occupied;

  int n_slots() const {
    return static_cast<int>(symbols.size()) * slots_per_symbol;
  }
  int symbol_of_slot(int slot) const { return slot / slots_per_symbol; }
  /// Slot-index run of one symbol: [first, last) — a partition of the grid.
  std::pair<int, int> slot_range(int symbol) const {
    return {symbol * slots_per_symbol, (symbol + 1) * slots_per_symbol};
  }
};

/// Arithmetic mean of |sample|^2 over the slot, watts.
/// Throws std::out_of_range for an invalid slot index.
double slot_power_w(const OpticalField& field, int slot);

/// Integral of |sample|^2 dt over the slot, joules.
double slot_energy_j(const OpticalField& field, int slot);

/// Scales every amplitude by 10^(-loss_db/20) (power by 10^(-loss_db/10)).
/// Gain is not modeled: loss_db < 0 throws std::invalid_argument.
OpticalField attenuate(const OpticalField& field, double loss_db);

/// Shifts the samples right by n_slots_delay slots. Leading samples are
/// zero-filled; trailing samples fall off the fixed window and are dropped.
/// Requires 0 <= n_slots_delay < n_slots.
OpticalField delay(const OpticalField& field, int n_slots_delay);

/// Lossless splitter: first output scaled by sqrt(transmittance), second by
/// sqrt(1 - transmittance). Requires transmittance in (0, 1).
std::pair<OpticalField, OpticalField> split(const OpticalField& field,
                                            double transmittance);

/// Coherent sample-wise sum. Grids and center frequencies must match.
OpticalField superpose(const OpticalField& a, const OpticalField& b);

}  // namespace cowsim
