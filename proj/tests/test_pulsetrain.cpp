#include "cowsim/pulsetrain.hpp"

#include <cmath>
#include <complex>

#include "doctest.h"
#include "cowsim/rng.hpp"

using namespace cowsim;

namespace {

SlotGrid grid_of(int n_slots, int sps = 16, double slot_s = 1e-9) {
  SlotGrid g;
  g.slot_duration_s = slot_s;
  g.samples_per_slot = sps;
  g.n_slots = n_slots;
  return g;
}

OpticalField constant_field(int n_slots, std::complex<double> amp) {
  auto f = OpticalField::vacuum(grid_of(n_slots));
  for (auto& s : f.samples) s = amp;
  return f;
}

// Random complex field; optionally forces the last slot to vacuum.
OpticalField random_field(Prng& rng, int n_slots, bool vacuum_tail = false) {
  auto f = OpticalField::vacuum(grid_of(n_slots));
  const std::size_t limit =
      vacuum_tail ? f.samples.size() - f.grid.samples_per_slot
                  : f.samples.size();
  for (std::size_t i = 0; i < limit; ++i)
    f.samples[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return f;
}

}  // namespace

TEST_CASE("slot grid validation") {
  CHECK_THROWS_AS(grid_of(0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(grid_of(4, 2).validate(), std::invalid_argument);
  CHECK_THROWS_AS(grid_of(4, 16, 0.0).validate(), std::invalid_argument);
  CHECK_NOTHROW(grid_of(1, 4).validate());
  CHECK(grid_of(3).total_samples() == 48);
  CHECK(grid_of(3).sample_dt() == doctest::Approx(1e-9 / 16).epsilon(1e-15));
}

TEST_CASE("slot power") {
  auto vac = OpticalField::vacuum(grid_of(4));
  CHECK(slot_power_w(vac, 0) == 0.0);

  auto one = constant_field(4, {1.0, 0.0});
  CHECK(slot_power_w(one, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(slot_power_w(one, 3) == doctest::Approx(1.0).epsilon(1e-14));

  auto half_i = constant_field(5, {0.0, 0.5});
  CHECK(slot_power_w(half_i, 3) == doctest::Approx(0.25).epsilon(1e-14));

  CHECK_THROWS_AS(slot_power_w(one, 4), std::out_of_range);
  CHECK_THROWS_AS(slot_power_w(one, -1), std::out_of_range);
}

TEST_CASE("attenuate") {
  auto f = constant_field(2, {1.0, 0.0});
  CHECK(slot_power_w(attenuate(f, 10.0), 0) ==
        doctest::Approx(0.1).epsilon(1e-12));
  // 10^(-0.3), evaluated independently.
  CHECK(slot_power_w(attenuate(f, 3.0), 0) ==
        doctest::Approx(0.5011872336272722).epsilon(1e-12));

  auto same = attenuate(f, 0.0);
  for (std::size_t i = 0; i < f.samples.size(); ++i)
    CHECK(same.samples[i] == f.samples[i]);

  CHECK_THROWS_AS(attenuate(f, -1.0), std::invalid_argument);
}

TEST_CASE("attenuate composes additively in dB") {
  Prng rng(42);
  auto f = random_field(rng, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform(0.0, 30.0);
    const double b = rng.uniform(0.0, 30.0);
    auto lhs = attenuate(attenuate(f, a), b);
    auto rhs = attenuate(f, a + b);
    for (std::size_t i = 0; i < lhs.samples.size(); ++i)
      CHECK(std::abs(lhs.samples[i] - rhs.samples[i]) <=
            1e-12 * (1.0 + std::abs(rhs.samples[i])));
  }
}

TEST_CASE("delay") {
  auto f = OpticalField::vacuum(grid_of(3));
  for (int j = 0; j < 16; ++j) f.samples[j] = {2.0, 0.0};  // pulse in slot 0

  auto same = delay(f, 0);
  CHECK(same.samples == f.samples);

  auto d1 = delay(f, 1);
  CHECK(slot_power_w(d1, 0) == 0.0);
  CHECK(slot_power_w(d1, 1) == doctest::Approx(4.0));
  CHECK(slot_power_w(d1, 2) == 0.0);

  // Pulse in the last slot falls off the window.
  auto tail = delay(d1, 1);
  auto gone = delay(tail, 1);
  CHECK(gone.total_energy_j() == 0.0);

  CHECK_THROWS_AS(delay(f, -1), std::invalid_argument);
  CHECK_THROWS_AS(delay(f, 3), std::invalid_argument);
}

TEST_CASE("delay is linear") {
  Prng rng(7);
  auto a = random_field(rng, 5);
  auto b = random_field(rng, 5);
  auto sum_then_delay = delay(superpose(a, b), 2);
  auto delay_then_sum = superpose(delay(a, 2), delay(b, 2));
  CHECK(sum_then_delay.samples == delay_then_sum.samples);
}

TEST_CASE("split ratios and errors") {
  auto f = constant_field(2, {1.0, 0.0});
  auto [t9, t1] = split(f, 0.9);
  CHECK(slot_power_w(t9, 0) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(slot_power_w(t1, 0) == doctest::Approx(0.1).epsilon(1e-12));

  auto [h1, h2] = split(f, 0.5);
  CHECK(slot_power_w(h1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(slot_power_w(h2, 1) == doctest::Approx(0.5).epsilon(1e-12));

  auto vac = OpticalField::vacuum(grid_of(2));
  auto [v1, v2] = split(vac, 0.3);
  CHECK(v1.total_energy_j() == 0.0);
  CHECK(v2.total_energy_j() == 0.0);

  CHECK_THROWS_AS(split(f, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(split(f, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(split(f, -0.2), std::invalid_argument);
}

TEST_CASE("split conserves energy for random fields and ratios") {
  Prng rng(1234);
  for (int trial = 0; trial < 50; ++trial) {
    auto f = random_field(rng, 4);
    const double ratio = rng.uniform(0.01, 0.99);
    auto [a, b] = split(f, ratio);
    const double in = f.total_energy_j();
    const double out = a.total_energy_j() + b.total_energy_j();
    CHECK(std::abs(out - in) <= 1e-12 * in);
    for (int s = 0; s < 4; ++s) {
      const double ps = slot_power_w(f, s);
      CHECK(std::abs(slot_power_w(a, s) + slot_power_w(b, s) - ps) <=
            1e-12 * (ps + 1e-300));
    }
  }
}

TEST_CASE("superpose") {
  Prng rng(99);
  auto a = random_field(rng, 3);
  auto vac = OpticalField::vacuum(a.grid);

  auto same = superpose(a, vac);
  CHECK(same.samples == a.samples);

  auto twice = superpose(a, a);
  CHECK(std::abs(twice.total_energy_j() - 4.0 * a.total_energy_j()) <=
        1e-12 * a.total_energy_j());

  OpticalField flipped = a;
  for (auto& s : flipped.samples) s = -s;
  auto cancelled = superpose(a, flipped);
  CHECK(cancelled.total_energy_j() <= 1e-20 * a.total_energy_j());

  auto other = OpticalField::vacuum(grid_of(4));
  CHECK_THROWS_AS(superpose(a, other), std::invalid_argument);
  auto shifted = OpticalField::vacuum(a.grid, 200e12);
  CHECK_THROWS_AS(superpose(a, shifted), std::invalid_argument);
}
