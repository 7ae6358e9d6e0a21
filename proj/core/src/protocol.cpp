#include "cowsim/protocol.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cowsim/errors.hpp"
#include "cowsim/parallel.hpp"
#include "cowsim/rng.hpp"

namespace cowsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void SessionConfig::validate() const {
  encoder.validate();
  std::visit([](const auto& m) { m.validate(); }, channel);
  apd.validate();
  if (n_symbols < 1)
    throw std::invalid_argument("SessionConfig: n_symbols must be >= 1");
  if (frame_symbols < 1)
    throw std::invalid_argument("SessionConfig: frame_symbols must be >= 1");
}

SiftedKey sift(std::span<const Symbol> alice_symbols,
               std::span<const DecodeResult> bob_decodings) {
  if (alice_symbols.size() != bob_decodings.size())
    throw std::invalid_argument("sift: sequences must be aligned");
  SiftedKey key;
  for (std::size_t i = 0; i < alice_symbols.size(); ++i) {
    if (alice_symbols[i] == Symbol::Decoy) continue;
    const DecodeResult d = bob_decodings[i];
    if (d != DecodeResult::Zero && d != DecodeResult::One) continue;
    key.alice_bits.push_back(alice_symbols[i] == Symbol::Bit1 ? 1 : 0);
    key.bob_bits.push_back(d == DecodeResult::One ? 1 : 0);
  }
  return key;
}

double qber(const SiftedKey& key) {
  if (key.size() == 0)
    throw InsufficientStatisticsError("qber: empty sifted key");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < key.size(); ++i)
    if (key.alice_bits[i] != key.bob_bits[i]) ++errors;
  return static_cast<double>(errors) / static_cast<double>(key.size());
}

OpticalField eve_intercept_resend(const OpticalField& field,
                                  const Frame& frame, std::uint64_t eve_seed) {
  if (field.grid.n_slots != frame.n_slots())
    throw std::invalid_argument("eve_intercept_resend: field/frame mismatch");
  OpticalField out = field;
  Prng rng(eve_seed);
  const int sps = field.grid.samples_per_slot;
  for (int s = 0; s < frame.n_slots(); ++s) {
    if (!frame.occupied[s]) continue;
    const auto rot = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
    const std::size_t base = static_cast<std::size_t>(s) * sps;
    for (int j = 0; j < sps; ++j) out.samples[base + j] *= rot;
  }
  return out;
}

namespace {

struct FrameOutcome {
  Frame frame;
  DetectionRecord record;
  std::vector<DecodeResult> decodes;
  SnrAccumulator snr;
};

FrameOutcome process_frame(std::span<const Symbol> symbols,
                           const SessionConfig& cfg, std::size_t frame_index) {
  const std::uint64_t seed = cfg.seed;
  Prng phase_rng(derive_seed(seed, seed_tag::kFramePhase, frame_index));
  const double global_phase = phase_rng.uniform(0.0, 2.0 * kPi);

  FrameOutcome out;
  auto encoded =
      encode_frame(symbols, cfg.encoder, global_phase,
                   derive_seed(seed, seed_tag::kPhaseWalk, frame_index));
  out.frame = std::move(encoded.frame);
  OpticalField field = std::move(encoded.field);

  if (cfg.eve_enabled)
    field = eve_intercept_resend(
        field, out.frame, derive_seed(seed, seed_tag::kEve, frame_index));

  field = apply_channel(field, cfg.channel);
  auto [data_field, monitor_field] = tap_split(field, cfg.encoder.variant);

  // Data line. The raw APD waveform feeds the SNR meter; clicks come from
  // the filtered waveform (analog) or the Poissonian sampler.
  auto data_wave = apd_photocurrent(
      data_field, cfg.apd, derive_seed(seed, seed_tag::kApdDd, frame_index));
  out.snr.add(data_wave, out.frame);

  if (cfg.detection_mode == DetectionMode::Analog) {
    const auto filtered = bessel_lowpass(data_wave, cfg.filter);
    out.record.dd = detect_clicks(filtered, out.frame, cfg.threshold);
  } else {
    Prng click_rng(derive_seed(seed, seed_tag::kClicksDd, frame_index));
    out.record.dd = photon_counting_clicks(
        data_field, cfg.apd.detection_efficiency, click_rng);
  }
  out.decodes = decode_data_line(out.record.dd, out.frame);

  // Monitoring line.
  auto [dm1_field, dm2_field] = mzi(monitor_field);
  if (cfg.detection_mode == DetectionMode::Analog) {
    const Frame mon = monitor_frame(out.frame);
    auto w1 = bessel_lowpass(
        apd_photocurrent(dm1_field, cfg.apd,
                         derive_seed(seed, seed_tag::kApdDm1, frame_index)),
        cfg.filter);
    auto w2 = bessel_lowpass(
        apd_photocurrent(dm2_field, cfg.apd,
                         derive_seed(seed, seed_tag::kApdDm2, frame_index)),
        cfg.filter);
    out.record.dm1 = detect_clicks(w1, mon, cfg.threshold);
    out.record.dm2 = detect_clicks(w2, mon, cfg.threshold);
  } else {
    Prng rng1(derive_seed(seed, seed_tag::kClicksDm1, frame_index));
    Prng rng2(derive_seed(seed, seed_tag::kClicksDm2, frame_index));
    out.record.dm1 = photon_counting_clicks(
        dm1_field, cfg.apd.detection_efficiency, rng1);
    out.record.dm2 = photon_counting_clicks(
        dm2_field, cfg.apd.detection_efficiency, rng2);
  }
  return out;
}

}  // namespace

SessionOutcome run_session(const SessionConfig& cfg) {
  cfg.validate();

  const auto symbols = generate_symbols(
      {derive_seed(cfg.seed, seed_tag::kSymbols), cfg.encoder.decoy_fraction},
      cfg.n_symbols);

  const std::size_t n_frames =
      (cfg.n_symbols + cfg.frame_symbols - 1) / cfg.frame_symbols;
  std::vector<FrameOutcome> outcomes(n_frames);
  parallel_for(n_frames, cfg.n_workers, [&](std::size_t i) {
    const std::size_t begin = i * cfg.frame_symbols;
    const std::size_t count =
        std::min(cfg.frame_symbols, cfg.n_symbols - begin);
    outcomes[i] = process_frame(
        std::span<const Symbol>(symbols.data() + begin, count), cfg, i);
  });

  // Order-independent merge in frame-index order.
  SessionOutcome session;
  std::vector<DecodeResult> decodes;
  decodes.reserve(cfg.n_symbols);
  std::vector<DetectionRecord> records;
  std::vector<Frame> frames;
  records.reserve(n_frames);
  frames.reserve(n_frames);
  for (auto& fo : outcomes) {
    decodes.insert(decodes.end(), fo.decodes.begin(), fo.decodes.end());
    session.snr.merge(fo.snr);
    records.push_back(std::move(fo.record));
    frames.push_back(std::move(fo.frame));
  }

  SessionReport& report = session.report;
  report.variant = variant_name(cfg.encoder.variant);
  report.seed = cfg.seed;
  report.n_symbols = cfg.n_symbols;
  report.detection_mode = detection_mode_name(cfg.detection_mode);
  report.eve_enabled = cfg.eve_enabled;
  report.noise_enabled = cfg.apd.noise_enabled;
  report.channel = channel_kind_name(cfg.channel);
  report.weather = std::holds_alternative<FsoParams>(cfg.channel)
                       ? std::string(weather_name(
                             std::get<FsoParams>(cfg.channel).weather))
                       : "fiber";
  report.distance_km = channel_length_km(cfg.channel);
  report.mu = cfg.encoder.mu;
  report.decoy_fraction = cfg.encoder.decoy_fraction;

  for (DecodeResult d : decodes)
    if (d != DecodeResult::Erasure) ++report.raw_detections;

  const SiftedKey key = sift(symbols, decodes);
  report.sifted_length = key.size();
  if (key.size() > 0) {
    report.qber = qber(key);
    report.qber_defined = true;
  }

  for (std::size_t i = 0; i < records.size(); ++i)
    session.monitoring +=
        count_monitoring_clicks(records[i].dm1, records[i].dm2, frames[i]);
  const std::size_t total_clicks =
      session.monitoring.n_clicks_dm1 + session.monitoring.n_clicks_dm2;
  if (total_clicks > 0) {
    report.visibility =
        (static_cast<double>(session.monitoring.n_clicks_dm1) -
         static_cast<double>(session.monitoring.n_clicks_dm2)) /
        static_cast<double>(total_clicks);
    report.visibility_defined = true;
  }

  report.snr_db = session.snr.snr_db();
  return session;
}

std::string report_to_json(const SessionReport& report) {
  nlohmann::ordered_json j;
  j["variant"] = report.variant;
  j["seed"] = report.seed;
  if (report.qber_defined)
    j["qber"] = report.qber;
  else
    j["qber"] = nullptr;
  if (report.visibility_defined)
    j["visibility"] = report.visibility;
  else
    j["visibility"] = nullptr;
  if (std::isfinite(report.snr_db))
    j["snr_db"] = report.snr_db;
  else if (std::isnan(report.snr_db))
    j["snr_db"] = nullptr;
  else
    j["snr_db"] = report.snr_db > 0 ? "inf" : "-inf";
  j["raw_detections"] = report.raw_detections;
  j["sifted_length"] = report.sifted_length;
  j["n_symbols"] = report.n_symbols;
  j["detection_mode"] = report.detection_mode;
  j["eve_enabled"] = report.eve_enabled;
  j["noise_enabled"] = report.noise_enabled;
  j["channel"] = report.channel;
  j["weather"] = report.weather;
  j["distance_km"] = report.distance_km;
  j["mu"] = report.mu;
  j["decoy_fraction"] = report.decoy_fraction;
  return j.dump(2) + "\n";
}

}  // namespace cowsim
