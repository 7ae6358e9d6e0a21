#include "cowsim/receiver.hpp"

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "cowsim/errors.hpp"

using namespace cowsim;

namespace {

SlotGrid grid_of(int n_slots, int sps = 16, double slot_s = 1e-9) {
  SlotGrid g;
  g.slot_duration_s = slot_s;
  g.samples_per_slot = sps;
  g.n_slots = n_slots;
  return g;
}

// Flat-top amplitude in the given slots, vacuum elsewhere.
OpticalField field_with_pulses(int n_slots, std::initializer_list<int> slots,
                               std::complex<double> amp) {
  auto f = OpticalField::vacuum(grid_of(n_slots));
  for (int s : slots)
    for (int j = 0; j < 16; ++j) f.samples[s * 16 + j] = amp;
  return f;
}

const std::vector<Symbol> kPaperPattern = {Symbol::Bit0, Symbol::Bit1,
                                           Symbol::Decoy, Symbol::Bit1,
                                           Symbol::Bit0, Symbol::Bit1};

}  // namespace

TEST_CASE("tap split ratios per variant") {
  auto f = field_with_pulses(2, {0, 1}, {1.0, 0.0});
  auto [d2, m2] = tap_split(f, ProtocolVariant::TwoPulse);
  CHECK(slot_power_w(d2, 0) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(slot_power_w(m2, 0) == doctest::Approx(0.1).epsilon(1e-12));

  auto [d3, m3] = tap_split(f, ProtocolVariant::ThreePulse);
  CHECK(slot_power_w(d3, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(slot_power_w(m3, 0) == doctest::Approx(0.5).epsilon(1e-12));

  auto vac = OpticalField::vacuum(grid_of(2));
  auto [dv, mv] = tap_split(vac, ProtocolVariant::TwoPulse);
  CHECK(dv.total_energy_j() == 0.0);
  CHECK(mv.total_energy_j() == 0.0);
}

TEST_CASE("mzi interference algebra") {
  const std::complex<double> amp{0.8, 0.3};

  SUBCASE("adjacent equal-phase pulses: dark port stays dark") {
    auto f = field_with_pulses(4, {1, 2}, amp);
    auto [dm1, dm2] = mzi(f);
    const double in_slot = slot_power_w(f, 1);
    CHECK(slot_power_w(dm2, 2) <= 1e-20 * in_slot);
    CHECK(slot_power_w(dm1, 2) == doctest::Approx(in_slot).epsilon(1e-12));
  }

  SUBCASE("isolated pulse splits evenly, no interference") {
    auto f = field_with_pulses(4, {1}, amp);
    auto [dm1, dm2] = mzi(f);
    const double quarter = 0.25 * slot_power_w(f, 1);
    CHECK(slot_power_w(dm1, 1) == doctest::Approx(quarter).epsilon(1e-12));
    CHECK(slot_power_w(dm1, 2) == doctest::Approx(quarter).epsilon(1e-12));
    CHECK(slot_power_w(dm2, 1) == doctest::Approx(quarter).epsilon(1e-12));
    CHECK(slot_power_w(dm2, 2) == doctest::Approx(quarter).epsilon(1e-12));
  }

  SUBCASE("pi relative phase swaps the ports") {
    auto f = field_with_pulses(4, {1}, amp);
    for (int j = 0; j < 16; ++j) f.samples[2 * 16 + j] = -amp;
    auto [dm1, dm2] = mzi(f);
    const double in_slot = slot_power_w(f, 1);
    CHECK(slot_power_w(dm1, 2) <= 1e-20 * in_slot);
    CHECK(slot_power_w(dm2, 2) == doctest::Approx(in_slot).epsilon(1e-12));
  }

  CHECK_THROWS_AS(mzi(OpticalField::vacuum(grid_of(1))),
                  std::invalid_argument);
}

TEST_CASE("mzi conserves energy when the final slot is vacuum") {
  Prng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = OpticalField::vacuum(grid_of(6));
    for (std::size_t i = 0; i + 16 < f.samples.size(); ++i)
      f.samples[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    auto [dm1, dm2] = mzi(f);
    const double in = f.total_energy_j();
    const double out = dm1.total_energy_j() + dm2.total_energy_j();
    CHECK(std::abs(out - in) <= 1e-9 * in);
  }
}

TEST_CASE("apd deterministic chain") {
  ApdParams apd;  // noise off by default

  auto vac = OpticalField::vacuum(grid_of(4));
  auto dark = apd_photocurrent(vac, apd, 1);
  for (double s : dark.samples) CHECK(s == apd.dark_current_a);

  auto f = field_with_pulses(2, {0, 1}, {1.0, 0.0});
  auto wave = apd_photocurrent(f, apd, 1);
  for (double s : wave.samples)
    CHECK(s == doctest::Approx(30.0 + 10e-9).epsilon(1e-12));
}

TEST_CASE("apd noise variance matches the closed form") {
  ApdParams apd;
  apd.noise_enabled = true;
  auto vac = OpticalField::vacuum(grid_of(62500));  // 1e6 samples
  auto wave = apd_photocurrent(vac, apd, 99);

  const double mean =
      std::accumulate(wave.samples.begin(), wave.samples.end(), 0.0) /
      wave.samples.size();
  double var = 0.0;
  for (double s : wave.samples) var += (s - mean) * (s - mean);
  var /= wave.samples.size();

  const double bandwidth = 0.5 * vac.grid.sample_rate_hz();
  const double expected = apd_noise_variance_a2(apd, 0.0, bandwidth);
  CHECK(std::abs(var - expected) <= 0.05 * expected);
  CHECK(std::abs(mean - apd.dark_current_a) <= 5.0 * std::sqrt(expected / 1e6));

  // Same seed reproduces the stream; different seeds do not.
  auto again = apd_photocurrent(vac, apd, 99);
  CHECK(again.samples == wave.samples);
  auto other = apd_photocurrent(vac, apd, 100);
  CHECK(other.samples != wave.samples);
}

TEST_CASE("single-pole low-pass filter") {
  FilterParams filter;  // 750 MHz

  SUBCASE("DC gain is one") {
    ElectricalWaveform impulse;
    impulse.grid = grid_of(64);
    impulse.samples.assign(impulse.grid.total_samples(), 0.0);
    impulse.samples[0] = 1.0;
    auto out = bessel_lowpass(impulse, filter);
    const double sum =
        std::accumulate(out.samples.begin(), out.samples.end(), 0.0);
    CHECK(std::abs(sum - 1.0) <= 1e-6);

    ElectricalWaveform constant;
    constant.grid = grid_of(64);
    constant.samples.assign(constant.grid.total_samples(), 3.5);
    auto settled = bessel_lowpass(constant, filter);
    CHECK(settled.samples.back() == doctest::Approx(3.5).epsilon(1e-9));
  }

  SUBCASE("magnitude at the cutoff is 1/sqrt(2)") {
    ElectricalWaveform sine;
    sine.grid = grid_of(1024);  // 16384 samples at 16 GHz
    sine.samples.resize(sine.grid.total_samples());
    const double dt = sine.grid.sample_dt();
    for (std::size_t i = 0; i < sine.samples.size(); ++i)
      sine.samples[i] = std::sin(2.0 * M_PI * filter.cutoff_hz * i * dt);
    auto out = bessel_lowpass(sine, filter);
    double in_sq = 0.0, out_sq = 0.0;
    for (std::size_t i = sine.samples.size() / 2; i < sine.samples.size(); ++i) {
      in_sq += sine.samples[i] * sine.samples[i];
      out_sq += out.samples[i] * out.samples[i];
    }
    const double ratio = std::sqrt(out_sq / in_sq);
    CHECK(std::abs(ratio - 0.7071) <= 0.05 * 0.7071);
  }

  SUBCASE("rejects an undersampled grid") {
    ElectricalWaveform coarse;
    coarse.grid = grid_of(8, 4);  // 4 GHz sample rate
    coarse.samples.assign(coarse.grid.total_samples(), 0.0);
    FilterParams high;
    high.cutoff_hz = 2.5e9;
    CHECK_THROWS_AS(bessel_lowpass(coarse, high), std::invalid_argument);
  }
}

namespace {

// Full noiseless analog data-line chain at the encoder defaults.
SlotDetection detect_pattern(const std::vector<Symbol>& pattern,
                             ProtocolVariant variant, Frame* frame_out) {
  EncoderConfig cfg;
  cfg.variant = variant;
  auto enc = encode_frame(pattern, cfg);
  auto [data, monitor] = tap_split(enc.field, variant);
  ApdParams apd;
  auto wave = bessel_lowpass(apd_photocurrent(data, apd, 0), FilterParams{});
  if (frame_out) *frame_out = enc.frame;
  return detect_clicks(wave, enc.frame, ThresholdPolicy{});
}

}  // namespace

TEST_CASE("noiseless detection and decoding of the reference pattern") {
  Frame frame;
  auto det = detect_pattern(kPaperPattern, ProtocolVariant::TwoPulse, &frame);
  // Clicks exactly on the occupied slots.
  for (int s = 0; s < frame.n_slots(); ++s)
    CHECK(static_cast<int>(det.clicks[s]) ==
          static_cast<int>(frame.occupied[s]));
  for (int s = 0; s < frame.n_slots(); ++s)
    if (det.clicks[s]) CHECK(det.energies[s] >= det.threshold);

  auto decoded = decode_data_line(det, frame);
  const std::vector<DecodeResult> expect = {
      DecodeResult::Zero, DecodeResult::One,  DecodeResult::Ambiguous,
      DecodeResult::One,  DecodeResult::Zero, DecodeResult::One};
  CHECK(decoded == expect);

  Frame frame3;
  auto det3 = detect_pattern(kPaperPattern, ProtocolVariant::ThreePulse, &frame3);
  auto decoded3 = decode_data_line(det3, frame3);
  CHECK(decoded3 == expect);
}

TEST_CASE("all-vacuum waveform yields no clicks and all erasures") {
  auto frame = make_frame(kPaperPattern, ProtocolVariant::TwoPulse);
  std::fill(frame.occupied.begin(), frame.occupied.end(), 0);
  ElectricalWaveform flat;
  flat.grid = grid_of(frame.n_slots());
  flat.samples.assign(flat.grid.total_samples(), 10e-9);
  auto det = detect_clicks(flat, frame, ThresholdPolicy{});
  CHECK(det.click_count() == 0);

  auto real_frame = make_frame(kPaperPattern, ProtocolVariant::TwoPulse);
  auto det2 = detect_clicks(flat, real_frame, ThresholdPolicy{});
  auto decoded = decode_data_line(det2, real_frame);
  for (auto d : decoded) CHECK(d == DecodeResult::Erasure);
}

TEST_CASE("false-click rate on noise-only input matches the Gaussian tail") {
  // 5-sigma threshold: one-sided tail 2.9e-7 per slot, so 0-2 expected
  // clicks in 1e6 slots; allow small-sample slack.
  const int n_slots = 1000000;
  Frame frame;
  frame.symbols.assign(n_slots / 2, Symbol::Bit0);
  frame.slots_per_symbol = 2;
  frame.occupied.assign(n_slots, 0);

  ApdParams apd;
  apd.noise_enabled = true;
  auto vac = OpticalField::vacuum(grid_of(n_slots, 4));
  auto wave = bessel_lowpass(apd_photocurrent(vac, apd, 4242), FilterParams{});
  auto det = detect_clicks(wave, frame, ThresholdPolicy{});
  CHECK(det.click_count() <= 5);
}

TEST_CASE("raising an absolute threshold never creates clicks") {
  EncoderConfig cfg;
  auto enc = encode_frame(generate_symbols({21, 0.2}, 200), cfg);
  ApdParams apd;
  apd.noise_enabled = true;
  apd.thermal_noise_psd_w_per_hz = 1e-22;
  auto wave =
      bessel_lowpass(apd_photocurrent(enc.field, apd, 5), FilterParams{});

  ThresholdPolicy policy;
  policy.mode = ThresholdPolicy::Mode::Absolute;
  std::size_t prev = enc.field.samples.size();
  for (double th : {0.0, 1e-9, 1e-8, 1e-7, 1e-6}) {
    policy.absolute_threshold = th;
    auto det = detect_clicks(wave, enc.frame, policy);
    CHECK(det.click_count() <= prev);
    prev = det.click_count();
  }
}

TEST_CASE("photon click probability") {
  CHECK(photon_click_probability(0.0, 1.0) == 0.0);
  CHECK(photon_click_probability(0.5, 1.0) ==
        doctest::Approx(0.3934693402873666).epsilon(1e-12));
  CHECK(photon_click_probability(1e9, 1.0) == doctest::Approx(1.0));
  CHECK(photon_click_probability(0.5, 0.0) == 0.0);
  CHECK_THROWS_AS(photon_click_probability(-0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(photon_click_probability(0.1, 1.5), std::invalid_argument);
}

TEST_CASE("photon-counting clicks only on lit slots") {
  EncoderConfig cfg;
  auto enc = encode_frame(generate_symbols({8, 0.2}, 500), cfg);
  Prng rng(3);
  auto det = photon_counting_clicks(enc.field, 1.0, rng);
  for (int s = 0; s < enc.frame.n_slots(); ++s) {
    if (!enc.frame.occupied[s]) CHECK(det.clicks[s] == 0);
    CHECK(det.energies[s] ==
          doctest::Approx(mean_photon_number(enc.field, s)).epsilon(1e-12));
  }
  CHECK(det.click_count() > 0);
}

TEST_CASE("monitor occupancy smears one slot to the right") {
  auto frame = make_frame({Symbol::Bit1, Symbol::Bit0},
                          ProtocolVariant::TwoPulse);
  // occupied: [1,0,0,1] -> monitor: [1,1,0,1] (last slot's tail leaves the
  // window, slot 3 stays lit by its own pulse).
  auto mon = monitor_frame(frame);
  CHECK(mon.occupied == std::vector<std::uint8_t>{1, 1, 0, 1});
}

TEST_CASE("conditioned adjacency counting on the reference pattern") {
  auto frame = make_frame(kPaperPattern, ProtocolVariant::TwoPulse);
  SlotDetection dm1, dm2;
  dm1.clicks.assign(frame.n_slots(), 1);  // bright port always clicks
  dm2.clicks.assign(frame.n_slots(), 0);
  auto stats = count_monitoring_clicks(dm1, dm2, frame);
  // Pairs: (1,2) 0L->1L, (4,5) decoy internal, (5,6) decoy->1L, (9,10) 0L->1L.
  CHECK(stats.n_opportunities == 4);
  CHECK(stats.n_clicks_dm1 == 4);
  CHECK(stats.n_clicks_dm2 == 0);
}

TEST_CASE("visibility estimate and the insufficient-statistics error") {
  auto frame = make_frame({Symbol::Decoy, Symbol::Decoy},
                          ProtocolVariant::TwoPulse);
  DetectionRecord rec;
  rec.dm1.clicks = {0, 1, 1, 0};
  rec.dm2.clicks = {0, 0, 0, 1};
  const Frame frames[] = {frame};
  const DetectionRecord records[] = {rec};
  auto est = estimate_visibility(records, frames);
  CHECK(est.stats.n_opportunities == 3);
  CHECK(est.visibility == doctest::Approx(1.0 / 3.0));

  DetectionRecord empty;
  empty.dm1.clicks.assign(4, 0);
  empty.dm2.clicks.assign(4, 0);
  const DetectionRecord no_clicks[] = {empty};
  CHECK_THROWS_AS(estimate_visibility(no_clicks, frames),
                  InsufficientStatisticsError);

  DetectionRecord balanced;
  balanced.dm1.clicks = {0, 1, 0, 0};
  balanced.dm2.clicks = {0, 0, 1, 0};
  const DetectionRecord both[] = {balanced};
  CHECK(estimate_visibility(both, frames).visibility == 0.0);
}

TEST_CASE("snr meter on synthetic waveforms") {
  const int n_slots = 400;
  Frame frame;
  frame.symbols.assign(n_slots / 2, Symbol::Bit0);
  frame.slots_per_symbol = 2;
  frame.occupied.assign(n_slots, 0);
  for (int s = 0; s < n_slots; s += 2) frame.occupied[s] = 1;

  const double base = 1e-8;
  const double sigma = 1e-3;

  auto craft = [&](double signal) {
    ElectricalWaveform w;
    w.grid = grid_of(n_slots);
    w.samples.assign(w.grid.total_samples(), base);
    for (int s = 0; s < n_slots; ++s) {
      for (int j = 0; j < 16; ++j) {
        auto& x = w.samples[s * 16 + j];
        if (frame.occupied[s])
          x = base + signal;
        else
          x = base + (j % 2 == 0 ? sigma : -sigma);  // exact variance sigma^2
      }
    }
    return w;
  };

  // signal meansq = 2 sigma^2  ->  corrected P_signal = P_noise  ->  0 dB.
  CHECK(measure_snr_db(craft(sigma * std::sqrt(2.0)), frame) ==
        doctest::Approx(0.0).epsilon(1e-9));
  // signal meansq = 101 sigma^2  ->  20 dB.
  CHECK(measure_snr_db(craft(sigma * std::sqrt(101.0)), frame) ==
        doctest::Approx(20.0).epsilon(1e-9));

  // Noiseless: vacuum variance is zero, SNR is the +inf sentinel.
  ElectricalWaveform clean;
  clean.grid = grid_of(n_slots);
  clean.samples.assign(clean.grid.total_samples(), base);
  for (int s = 0; s < n_slots; ++s)
    if (frame.occupied[s])
      for (int j = 0; j < 16; ++j) clean.samples[s * 16 + j] = base + 1e-3;
  CHECK(std::isinf(measure_snr_db(clean, frame)));

  CHECK(std::isnan(measure_snr_db(
      [&] {
        ElectricalWaveform w;
        w.grid = grid_of(n_slots);
        w.samples.assign(w.grid.total_samples(), base);
        return w;
      }(),
      frame)));
}

TEST_CASE("halving the channel transmission lowers the SNR by 6 dB") {
  EncoderConfig cfg;
  cfg.peak_power_w = 1e-3;  // classical operating point
  auto enc = encode_frame(generate_symbols({64, 0.1}, 2000), cfg);

  ApdParams apd;
  apd.noise_enabled = true;
  apd.dark_current_a = 1e-20;              // thermal-dominated floor
  apd.thermal_noise_psd_w_per_hz = 1e-15;

  auto snr_at = [&](double extra_loss_db) {
    auto field = attenuate(enc.field, extra_loss_db);
    auto wave = apd_photocurrent(field, apd, 31);  // same noise stream
    return measure_snr_db(wave, enc.frame);
  };

  const double half_db = 10.0 * std::log10(2.0);
  const double delta = snr_at(0.0) - snr_at(half_db);
  CHECK(std::abs(delta - 6.02) <= 0.5);
}
