#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cowsim/pulsetrain.hpp"

namespace cowsim {

/// Single-mode fiber channel.
struct FiberParams {
  double attenuation_db_per_km = 0.2;
  double length_km = 0.0;
  double dispersion_ps_nm_km = 16.75;
  // Ingested for completeness; unused at a single carrier wavelength.
  double dispersion_slope_ps_nm2_km = 0.075;
  double reference_wavelength_nm = 1550.0;
  // Source spectral width driving the first-order broadening model.
  double source_linewidth_hz = 10e6;

  void validate() const;
};

/// Atmospheric conditions with fixed attenuation lookups (dB/km).
enum class WeatherCondition : std::uint8_t {
  VeryClear,
  Clear,
  LightHaze,
  Haze,
  LightRain,
  ModerateRain,
  HeavyRain,
  LightFog,
  ModerateFog,
  HeavyFog,
};

inline constexpr std::array<WeatherCondition, 10> kAllWeathers = {
    WeatherCondition::VeryClear,    WeatherCondition::Clear,
    WeatherCondition::LightHaze,    WeatherCondition::Haze,
    WeatherCondition::LightRain,    WeatherCondition::ModerateRain,
    WeatherCondition::HeavyRain,    WeatherCondition::LightFog,
    WeatherCondition::ModerateFog,  WeatherCondition::HeavyFog,
};

double weather_attenuation_db_per_km(WeatherCondition w);
std::string_view weather_name(WeatherCondition w);
/// Accepts the canonical name ("Very Clear") or any spacing/underscore/case
/// variant ("very_clear", "VeryClear").
std::optional<WeatherCondition> parse_weather(std::string_view name);

/// Reads a condition,attenuation_db_per_km CSV (the shipped provenance table)
/// and returns rows in file order. Throws std::runtime_error on I/O or
/// format problems.
std::vector<std::pair<std::string, double>> load_weather_table_csv(
    const std::string& path);

/// Free-space optical channel.
struct FsoParams {
  double tx_aperture_m = 0.05;
  double rx_aperture_m = 0.20;
  double beam_divergence_rad = 0.002;
  double length_km = 0.0;
  WeatherCondition weather = WeatherCondition::VeryClear;

  void validate() const;
};

using ChannelModel = std::variant<FiberParams, FsoParams>;

/// Power transmission 10^(-attenuation * length / 10), in (0, 1].
double fiber_transmission(double attenuation_db_per_km, double length_km);

/// Inverse of fiber_transmission: (10/L) * log10(p_in / p_out), dB/km.
/// Requires p_in >= p_out > 0 and length_km > 0.
double fiber_attenuation_from_powers(double p_in_w, double p_out_w,
                                     double length_km);

/// Beam-spread collection fraction d_r / (d_t + D*L), clamped to <= 1.
double fso_geometric_loss(double tx_aperture_m, double rx_aperture_m,
                          double divergence_rad, double length_m);

/// Beer-Lambert atmospheric transmission with the dB/km table attenuation:
/// 10^(-a * length / 10).
double fso_atmospheric_transmission(WeatherCondition w, double length_km);

/// Product of geometric and atmospheric factors, in (0, 1].
double fso_total_transmission(const FsoParams& params);

/// Scalar power transmission of either channel model.
double channel_transmission(const ChannelModel& model);

double channel_length_km(const ChannelModel& model);
void set_channel_length_km(ChannelModel& model, double length_km);
const char* channel_kind_name(const ChannelModel& model);

/// Applies the channel: amplitudes scaled by sqrt(transmission); fiber pulses
/// additionally broadened by the first-order dispersion model (a power-domain
/// Gaussian convolution, energy-conserving up to window truncation). At the
/// default parameters the broadening is sub-sample and degenerates to the
/// identity.
OpticalField apply_channel(const OpticalField& field,
                           const ChannelModel& model);

}  // namespace cowsim
