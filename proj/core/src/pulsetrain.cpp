#include "cowsim/pulsetrain.hpp"

#include <cmath>
#include <stdexcept>

namespace cowsim {

void SlotGrid::validate() const {
  if (!(slot_duration_s > 0))
    throw std::invalid_argument("SlotGrid: slot_duration must be > 0");
  if (samples_per_slot < 4)
    throw std::invalid_argument("SlotGrid: samples_per_slot must be >= 4");
  if (n_slots < 1)
    throw std::invalid_argument("SlotGrid: n_slots must be >= 1");
}

OpticalField OpticalField::vacuum(const SlotGrid& grid,
                                  double center_frequency_hz) {
  grid.validate();
  OpticalField f;
  f.samples.assign(grid.total_samples(), {0.0, 0.0});
  f.grid = grid;
  f.center_frequency_hz = center_frequency_hz;
  return f;
}

double OpticalField::total_energy_j() const {
  double sum = 0.0;
  for (const auto& s : samples) sum += std::norm(s);
  return sum * grid.sample_dt();
}

namespace {

std::pair<std::size_t, std::size_t> slot_sample_range(const OpticalField& f,
                                                      int slot) {
  if (slot < 0 || slot >= f.grid.n_slots)
    throw std::out_of_range("slot index out of range");
  std::size_t begin = static_cast<std::size_t>(slot) *
                      static_cast<std::size_t>(f.grid.samples_per_slot);
  return {begin, begin + f.grid.samples_per_slot};
}

}  // namespace

double slot_power_w(const OpticalField& field, int slot) {
  auto [begin, end] = slot_sample_range(field, slot);
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += std::norm(field.samples[i]);
  return sum / field.grid.samples_per_slot;
}

double slot_energy_j(const OpticalField& field, int slot) {
  return slot_power_w(field, slot) * field.grid.slot_duration_s;
}

OpticalField attenuate(const OpticalField& field, double loss_db) {
  if (loss_db < 0)
    throw std::invalid_argument("attenuate: loss_db must be >= 0");
  OpticalField out = field;
  const double scale = std::pow(10.0, -loss_db / 20.0);
  for (auto& s : out.samples) s *= scale;
  return out;
}

OpticalField delay(const OpticalField& field, int n_slots_delay) {
  if (n_slots_delay < 0 || n_slots_delay >= field.grid.n_slots)
    throw std::invalid_argument("delay: need 0 <= n_slots_delay < n_slots");
  if (n_slots_delay == 0) return field;
  OpticalField out = OpticalField::vacuum(field.grid, field.center_frequency_hz);
  const std::size_t shift = static_cast<std::size_t>(n_slots_delay) *
                            static_cast<std::size_t>(field.grid.samples_per_slot);
  const std::size_t total = field.samples.size();
  for (std::size_t i = shift; i < total; ++i)
    out.samples[i] = field.samples[i - shift];
  return out;
}

std::pair<OpticalField, OpticalField> split(const OpticalField& field,
                                            double transmittance) {
  if (!(transmittance > 0.0 && transmittance < 1.0))
    throw std::invalid_argument("split: transmittance must be in (0, 1)");
  OpticalField a = field;
  OpticalField b = field;
  const double sa = std::sqrt(transmittance);
  const double sb = std::sqrt(1.0 - transmittance);
  for (auto& s : a.samples) s *= sa;
  for (auto& s : b.samples) s *= sb;
  return {std::move(a), std::move(b)};
}

OpticalField superpose(const OpticalField& a, const OpticalField& b) {
  if (a.grid != b.grid)
    throw std::invalid_argument("superpose: grid mismatch");
  if (a.center_frequency_hz != b.center_frequency_hz)
    throw std::invalid_argument("superpose: center frequency mismatch");
  OpticalField out = a;
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] += b.samples[i];
  return out;
}

}  // namespace cowsim
