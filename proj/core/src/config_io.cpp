#include "cowsim/config_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cowsim/errors.hpp"

namespace cowsim {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw ConfigError("config: " + context + ": " + what);
}

void expect_object(const json& j, const std::string& context) {
  if (!j.is_object()) fail(context, "expected an object");
}

void reject_unknown_keys(const json& j, const std::string& context,
                         std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known) fail(context, "unknown key \"" + key + "\"");
  }
}

double get_number(const json& j, const std::string& context) {
  if (!j.is_number()) fail(context, "expected a number");
  return j.get<double>();
}

bool get_bool(const json& j, const std::string& context) {
  if (!j.is_boolean()) fail(context, "expected a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& context) {
  if (!j.is_string()) fail(context, "expected a string");
  return j.get<std::string>();
}

std::uint64_t get_uint(const json& j, const std::string& context) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    fail(context, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

ProtocolVariant parse_variant(const std::string& s, const std::string& context) {
  if (s == "2p") return ProtocolVariant::TwoPulse;
  if (s == "3p") return ProtocolVariant::ThreePulse;
  fail(context, "variant must be \"2p\" or \"3p\", got \"" + s + "\"");
}

DetectionMode parse_detection_mode(const std::string& s,
                                   const std::string& context) {
  if (s == "analog") return DetectionMode::Analog;
  if (s == "photon_counting") return DetectionMode::PhotonCounting;
  fail(context, "detection_mode must be \"analog\" or \"photon_counting\"");
}

WeatherCondition parse_weather_or_fail(const std::string& s,
                                       const std::string& context) {
  auto w = parse_weather(s);
  if (!w) fail(context, "unknown weather condition \"" + s + "\"");
  return *w;
}

void load_encoder(const json& j, EncoderConfig& enc) {
  expect_object(j, "encoder");
  reject_unknown_keys(j, "encoder",
                      {"mu", "decoy_fraction", "slot_duration_s",
                       "decoy_attenuation_db", "peak_power_w",
                       "center_frequency_hz", "pulse_shape", "pulse_fill",
                       "samples_per_slot", "extinction_db", "linewidth_hz"});
  if (j.contains("mu")) enc.mu = get_number(j["mu"], "encoder.mu");
  if (j.contains("decoy_fraction"))
    enc.decoy_fraction = get_number(j["decoy_fraction"], "encoder.decoy_fraction");
  if (j.contains("slot_duration_s"))
    enc.slot_duration_s = get_number(j["slot_duration_s"], "encoder.slot_duration_s");
  if (j.contains("decoy_attenuation_db"))
    enc.decoy_attenuation_db =
        get_number(j["decoy_attenuation_db"], "encoder.decoy_attenuation_db");
  if (j.contains("peak_power_w"))
    enc.peak_power_w = get_number(j["peak_power_w"], "encoder.peak_power_w");
  if (j.contains("center_frequency_hz"))
    enc.center_frequency_hz =
        get_number(j["center_frequency_hz"], "encoder.center_frequency_hz");
  if (j.contains("pulse_shape")) {
    const auto s = get_string(j["pulse_shape"], "encoder.pulse_shape");
    if (s == "raised_cosine")
      enc.pulse_shape = PulseShape::RaisedCosine;
    else if (s == "rectangular")
      enc.pulse_shape = PulseShape::Rectangular;
    else
      fail("encoder.pulse_shape",
           "must be \"raised_cosine\" or \"rectangular\"");
  }
  if (j.contains("pulse_fill"))
    enc.pulse_fill = get_number(j["pulse_fill"], "encoder.pulse_fill");
  if (j.contains("samples_per_slot"))
    enc.samples_per_slot = static_cast<int>(
        get_uint(j["samples_per_slot"], "encoder.samples_per_slot"));
  if (j.contains("extinction_db"))
    enc.extinction_db = get_number(j["extinction_db"], "encoder.extinction_db");
  if (j.contains("linewidth_hz"))
    enc.linewidth_hz = get_number(j["linewidth_hz"], "encoder.linewidth_hz");
}

void load_channel(const json& j, ChannelModel& channel) {
  expect_object(j, "channel");
  std::string kind = "fiber";
  if (j.contains("kind")) kind = get_string(j["kind"], "channel.kind");
  if (kind == "fiber") {
    reject_unknown_keys(j, "channel",
                        {"kind", "length_km", "attenuation_db_per_km",
                         "dispersion_ps_nm_km", "dispersion_slope_ps_nm2_km",
                         "reference_wavelength_nm", "source_linewidth_hz"});
    FiberParams fiber;
    if (j.contains("length_km"))
      fiber.length_km = get_number(j["length_km"], "channel.length_km");
    if (j.contains("attenuation_db_per_km"))
      fiber.attenuation_db_per_km =
          get_number(j["attenuation_db_per_km"], "channel.attenuation_db_per_km");
    if (j.contains("dispersion_ps_nm_km"))
      fiber.dispersion_ps_nm_km =
          get_number(j["dispersion_ps_nm_km"], "channel.dispersion_ps_nm_km");
    if (j.contains("dispersion_slope_ps_nm2_km"))
      fiber.dispersion_slope_ps_nm2_km = get_number(
          j["dispersion_slope_ps_nm2_km"], "channel.dispersion_slope_ps_nm2_km");
    if (j.contains("reference_wavelength_nm"))
      fiber.reference_wavelength_nm = get_number(
          j["reference_wavelength_nm"], "channel.reference_wavelength_nm");
    if (j.contains("source_linewidth_hz"))
      fiber.source_linewidth_hz =
          get_number(j["source_linewidth_hz"], "channel.source_linewidth_hz");
    channel = fiber;
  } else if (kind == "fso") {
    reject_unknown_keys(j, "channel",
                        {"kind", "length_km", "weather", "tx_aperture_m",
                         "rx_aperture_m", "beam_divergence_rad"});
    FsoParams fso;
    if (j.contains("length_km"))
      fso.length_km = get_number(j["length_km"], "channel.length_km");
    if (j.contains("weather"))
      fso.weather = parse_weather_or_fail(
          get_string(j["weather"], "channel.weather"), "channel.weather");
    if (j.contains("tx_aperture_m"))
      fso.tx_aperture_m = get_number(j["tx_aperture_m"], "channel.tx_aperture_m");
    if (j.contains("rx_aperture_m"))
      fso.rx_aperture_m = get_number(j["rx_aperture_m"], "channel.rx_aperture_m");
    if (j.contains("beam_divergence_rad"))
      fso.beam_divergence_rad =
          get_number(j["beam_divergence_rad"], "channel.beam_divergence_rad");
    channel = fso;
  } else {
    fail("channel.kind", "must be \"fiber\" or \"fso\", got \"" + kind + "\"");
  }
}

void load_apd(const json& j, ApdParams& apd) {
  expect_object(j, "apd");
  reject_unknown_keys(
      j, "apd",
      {"gain", "responsivity_a_per_w", "dark_current_a",
       "thermal_noise_psd_w_per_hz", "noise_enabled", "excess_noise_exponent",
       "detection_efficiency"});
  if (j.contains("gain")) apd.gain = get_number(j["gain"], "apd.gain");
  if (j.contains("responsivity_a_per_w"))
    apd.responsivity_a_per_w =
        get_number(j["responsivity_a_per_w"], "apd.responsivity_a_per_w");
  if (j.contains("dark_current_a"))
    apd.dark_current_a = get_number(j["dark_current_a"], "apd.dark_current_a");
  if (j.contains("thermal_noise_psd_w_per_hz"))
    apd.thermal_noise_psd_w_per_hz = get_number(
        j["thermal_noise_psd_w_per_hz"], "apd.thermal_noise_psd_w_per_hz");
  if (j.contains("noise_enabled"))
    apd.noise_enabled = get_bool(j["noise_enabled"], "apd.noise_enabled");
  if (j.contains("excess_noise_exponent"))
    apd.excess_noise_exponent =
        get_number(j["excess_noise_exponent"], "apd.excess_noise_exponent");
  if (j.contains("detection_efficiency"))
    apd.detection_efficiency =
        get_number(j["detection_efficiency"], "apd.detection_efficiency");
}

void load_threshold(const json& j, ThresholdPolicy& policy) {
  expect_object(j, "threshold");
  reject_unknown_keys(j, "threshold", {"mode", "n_sigma", "absolute_threshold"});
  if (j.contains("mode")) {
    const auto s = get_string(j["mode"], "threshold.mode");
    if (s == "auto")
      policy.mode = ThresholdPolicy::Mode::Auto;
    else if (s == "absolute")
      policy.mode = ThresholdPolicy::Mode::Absolute;
    else
      fail("threshold.mode", "must be \"auto\" or \"absolute\"");
  }
  if (j.contains("n_sigma"))
    policy.n_sigma = get_number(j["n_sigma"], "threshold.n_sigma");
  if (j.contains("absolute_threshold"))
    policy.absolute_threshold =
        get_number(j["absolute_threshold"], "threshold.absolute_threshold");
}

void load_sweep(const json& j, SweepSpec& sweep) {
  expect_object(j, "sweep");
  reject_unknown_keys(j, "sweep",
                      {"variants", "distances_km", "weathers",
                       "snr_average_runs"});
  if (j.contains("variants")) {
    if (!j["variants"].is_array()) fail("sweep.variants", "expected an array");
    sweep.variants.clear();
    for (const auto& v : j["variants"])
      sweep.variants.push_back(
          parse_variant(get_string(v, "sweep.variants[]"), "sweep.variants[]"));
  }
  if (j.contains("distances_km")) {
    const auto& d = j["distances_km"];
    sweep.distances_km.clear();
    if (d.is_array()) {
      for (const auto& v : d)
        sweep.distances_km.push_back(get_number(v, "sweep.distances_km[]"));
    } else if (d.is_object()) {
      reject_unknown_keys(d, "sweep.distances_km", {"start", "stop", "step"});
      const double start = d.contains("start")
                               ? get_number(d["start"], "sweep.distances_km.start")
                               : 10.0;
      const double stop = d.contains("stop")
                              ? get_number(d["stop"], "sweep.distances_km.stop")
                              : 120.0;
      const double step = d.contains("step")
                              ? get_number(d["step"], "sweep.distances_km.step")
                              : 10.0;
      if (!(step > 0)) fail("sweep.distances_km.step", "must be > 0");
      if (!(stop >= start)) fail("sweep.distances_km", "need stop >= start");
      for (double x = start; x <= stop + 1e-9; x += step)
        sweep.distances_km.push_back(x);
    } else {
      fail("sweep.distances_km", "expected an array or {start, stop, step}");
    }
  }
  if (j.contains("weathers")) {
    if (!j["weathers"].is_array()) fail("sweep.weathers", "expected an array");
    sweep.weathers.clear();
    for (const auto& v : j["weathers"])
      sweep.weathers.push_back(parse_weather_or_fail(
          get_string(v, "sweep.weathers[]"), "sweep.weathers[]"));
  }
  if (j.contains("snr_average_runs"))
    sweep.snr_average_runs = static_cast<int>(
        get_uint(j["snr_average_runs"], "sweep.snr_average_runs"));
}

}  // namespace

LoadedConfig load_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  expect_object(j, "top level");
  reject_unknown_keys(j, "top level",
                      {"variant", "seed", "n_symbols", "detection_mode",
                       "eve_enabled", "n_workers", "frame_symbols", "encoder",
                       "channel", "apd", "filter", "threshold", "sweep"});

  LoadedConfig out;
  SessionConfig& cfg = out.session;
  if (j.contains("variant"))
    cfg.encoder.variant =
        parse_variant(get_string(j["variant"], "variant"), "variant");
  if (j.contains("seed")) cfg.seed = get_uint(j["seed"], "seed");
  if (j.contains("n_symbols"))
    cfg.n_symbols = get_uint(j["n_symbols"], "n_symbols");
  if (j.contains("detection_mode"))
    cfg.detection_mode = parse_detection_mode(
        get_string(j["detection_mode"], "detection_mode"), "detection_mode");
  if (j.contains("eve_enabled"))
    cfg.eve_enabled = get_bool(j["eve_enabled"], "eve_enabled");
  if (j.contains("n_workers"))
    cfg.n_workers =
        static_cast<int>(get_uint(j["n_workers"], "n_workers"));
  if (j.contains("frame_symbols"))
    cfg.frame_symbols = get_uint(j["frame_symbols"], "frame_symbols");
  if (j.contains("encoder")) load_encoder(j["encoder"], cfg.encoder);
  if (j.contains("channel")) load_channel(j["channel"], cfg.channel);
  if (j.contains("apd")) load_apd(j["apd"], cfg.apd);
  if (j.contains("filter")) {
    expect_object(j["filter"], "filter");
    reject_unknown_keys(j["filter"], "filter", {"cutoff_hz"});
    if (j["filter"].contains("cutoff_hz"))
      cfg.filter.cutoff_hz =
          get_number(j["filter"]["cutoff_hz"], "filter.cutoff_hz");
  }
  if (j.contains("threshold")) load_threshold(j["threshold"], cfg.threshold);
  if (j.contains("sweep")) {
    load_sweep(j["sweep"], out.sweep);
    out.has_sweep = true;
  }
  out.sweep.base = cfg;
  return out;
}

LoadedConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config_text(buf.str());
}

std::string default_config_json() {
  const SessionConfig cfg;
  const EncoderConfig& enc = cfg.encoder;
  nlohmann::ordered_json j;
  j["variant"] = variant_name(enc.variant);
  j["seed"] = cfg.seed;
  j["n_symbols"] = cfg.n_symbols;
  j["detection_mode"] = detection_mode_name(cfg.detection_mode);
  j["eve_enabled"] = cfg.eve_enabled;
  j["n_workers"] = cfg.n_workers;
  j["frame_symbols"] = cfg.frame_symbols;
  j["encoder"] = {{"mu", enc.mu},
                  {"decoy_fraction", enc.decoy_fraction},
                  {"slot_duration_s", enc.slot_duration_s},
                  {"decoy_attenuation_db", enc.decoy_attenuation_db},
                  {"peak_power_w", enc.peak_power_w},
                  {"center_frequency_hz", enc.center_frequency_hz},
                  {"pulse_shape", "raised_cosine"},
                  {"pulse_fill", enc.pulse_fill},
                  {"samples_per_slot", enc.samples_per_slot},
                  {"linewidth_hz", enc.linewidth_hz}};
  const FiberParams fiber;
  j["channel"] = {{"kind", "fiber"},
                  {"length_km", fiber.length_km},
                  {"attenuation_db_per_km", fiber.attenuation_db_per_km},
                  {"dispersion_ps_nm_km", fiber.dispersion_ps_nm_km},
                  {"dispersion_slope_ps_nm2_km", fiber.dispersion_slope_ps_nm2_km},
                  {"reference_wavelength_nm", fiber.reference_wavelength_nm},
                  {"source_linewidth_hz", fiber.source_linewidth_hz}};
  j["apd"] = {{"gain", cfg.apd.gain},
              {"responsivity_a_per_w", cfg.apd.responsivity_a_per_w},
              {"dark_current_a", cfg.apd.dark_current_a},
              {"thermal_noise_psd_w_per_hz", cfg.apd.thermal_noise_psd_w_per_hz},
              {"noise_enabled", cfg.apd.noise_enabled},
              {"excess_noise_exponent", cfg.apd.excess_noise_exponent},
              {"detection_efficiency", cfg.apd.detection_efficiency}};
  j["filter"] = {{"cutoff_hz", cfg.filter.cutoff_hz}};
  j["threshold"] = {{"mode", "auto"},
                    {"n_sigma", cfg.threshold.n_sigma},
                    {"absolute_threshold", cfg.threshold.absolute_threshold}};
  return j.dump(2) + "\n";
}

}  // namespace cowsim
