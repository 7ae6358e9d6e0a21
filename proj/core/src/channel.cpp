#include "cowsim/channel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cowsim {

namespace {

struct WeatherRow {
  WeatherCondition condition;
  std::string_view name;
  double attenuation_db_per_km;
};

// Attenuation table for the ten modeled atmospheric conditions.
constexpr std::array<WeatherRow, 10> kWeatherTable = {{
    {WeatherCondition::VeryClear, "Very Clear", 0.4},
    {WeatherCondition::Clear, "Clear", 0.57},
    {WeatherCondition::LightHaze, "Light Haze", 1.5},
    {WeatherCondition::Haze, "Haze", 3.8},
    {WeatherCondition::LightRain, "Light Rain", 6.27},
    {WeatherCondition::ModerateRain, "Moderate Rain", 9.64},
    {WeatherCondition::HeavyRain, "Heavy Rain", 19.28},
    {WeatherCondition::LightFog, "Light Fog", 18.0},
    {WeatherCondition::ModerateFog, "Moderate Fog", 28.9},
    {WeatherCondition::HeavyFog, "Heavy Fog", 75.0},
}};

std::string normalize_name(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

void FiberParams::validate() const {
  if (length_km < 0)
    throw std::invalid_argument("FiberParams: length must be >= 0");
  if (attenuation_db_per_km < 0)
    throw std::invalid_argument("FiberParams: attenuation must be >= 0");
  if (!(reference_wavelength_nm > 0))
    throw std::invalid_argument("FiberParams: wavelength must be > 0");
  if (source_linewidth_hz < 0)
    throw std::invalid_argument("FiberParams: linewidth must be >= 0");
}

void FsoParams::validate() const {
  if (!(tx_aperture_m > 0) || !(rx_aperture_m > 0))
    throw std::invalid_argument("FsoParams: apertures must be > 0");
  if (!(beam_divergence_rad > 0))
    throw std::invalid_argument("FsoParams: divergence must be > 0");
  if (length_km < 0)
    throw std::invalid_argument("FsoParams: length must be >= 0");
}

double weather_attenuation_db_per_km(WeatherCondition w) {
  return kWeatherTable[static_cast<std::size_t>(w)].attenuation_db_per_km;
}

std::string_view weather_name(WeatherCondition w) {
  return kWeatherTable[static_cast<std::size_t>(w)].name;
}

std::optional<WeatherCondition> parse_weather(std::string_view name) {
  const std::string key = normalize_name(name);
  for (const auto& row : kWeatherTable)
    if (normalize_name(row.name) == key) return row.condition;
  return std::nullopt;
}

std::vector<std::pair<std::string, double>> load_weather_table_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weather table: " + path);
  std::vector<std::pair<std::string, double>> rows;
  std::string line;
  if (!std::getline(in, line) ||
      line != "condition,attenuation_db_per_km")
    throw std::runtime_error("weather table: bad header in " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("weather table: malformed row: " + line);
    rows.emplace_back(line.substr(0, comma),
                      std::stod(line.substr(comma + 1)));
  }
  return rows;
}

double fiber_transmission(double attenuation_db_per_km, double length_km) {
  if (attenuation_db_per_km < 0 || length_km < 0)
    throw std::invalid_argument("fiber_transmission: inputs must be >= 0");
  return std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
}

double fiber_attenuation_from_powers(double p_in_w, double p_out_w,
                                     double length_km) {
  if (!(p_out_w > 0) || !(p_in_w >= p_out_w))
    throw std::invalid_argument(
        "fiber_attenuation_from_powers: need p_in >= p_out > 0");
  if (!(length_km > 0))
    throw std::invalid_argument(
        "fiber_attenuation_from_powers: length must be > 0");
  return (10.0 / length_km) * std::log10(p_in_w / p_out_w);
}

double fso_geometric_loss(double tx_aperture_m, double rx_aperture_m,
                          double divergence_rad, double length_m) {
  if (!(tx_aperture_m > 0) || !(rx_aperture_m > 0) || !(divergence_rad > 0))
    throw std::invalid_argument("fso_geometric_loss: parameters must be > 0");
  if (length_m < 0)
    throw std::invalid_argument("fso_geometric_loss: length must be >= 0");
  const double raw =
      rx_aperture_m / (tx_aperture_m + divergence_rad * length_m);
  // A collecting aperture cannot exceed unity collection.
  return std::min(raw, 1.0);
}

double fso_atmospheric_transmission(WeatherCondition w, double length_km) {
  if (length_km < 0)
    throw std::invalid_argument(
        "fso_atmospheric_transmission: length must be >= 0");
  return std::pow(10.0, -weather_attenuation_db_per_km(w) * length_km / 10.0);
}

double fso_total_transmission(const FsoParams& params) {
  params.validate();
  return fso_geometric_loss(params.tx_aperture_m, params.rx_aperture_m,
                            params.beam_divergence_rad,
                            params.length_km * 1000.0) *
         fso_atmospheric_transmission(params.weather, params.length_km);
}

double channel_transmission(const ChannelModel& model) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FiberParams>)
          return fiber_transmission(m.attenuation_db_per_km, m.length_km);
        else
          return fso_total_transmission(m);
      },
      model);
}

double channel_length_km(const ChannelModel& model) {
  return std::visit([](const auto& m) { return m.length_km; }, model);
}

void set_channel_length_km(ChannelModel& model, double length_km) {
  std::visit([length_km](auto& m) { m.length_km = length_km; }, model);
}

const char* channel_kind_name(const ChannelModel& model) {
  return std::holds_alternative<FiberParams>(model) ? "fiber" : "fso";
}

namespace {

// First-order dispersion broadening: convolve the power profile with a
// Gaussian of RMS width D * dlambda * L, preserving per-sample phase. Energy
// is conserved exactly away from the window edges.
OpticalField broaden_power_profile(const OpticalField& field,
                                   double sigma_seconds) {
  const double dt = field.grid.sample_dt();
  const double sigma_samples = sigma_seconds / dt;
  if (sigma_samples < 0.05) return field;  // sub-sample: identity

  const int radius = static_cast<int>(std::ceil(4.0 * sigma_samples));
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    kernel[j + radius] =
        std::exp(-0.5 * (j / sigma_samples) * (j / sigma_samples));
    ksum += kernel[j + radius];
  }
  for (double& k : kernel) k /= ksum;

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(field.samples.size());
  std::vector<double> power(n);
  for (std::ptrdiff_t i = 0; i < n; ++i)
    power[i] = std::norm(field.samples[i]);

  OpticalField out = field;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double p = 0.0;
    for (int j = -radius; j <= radius; ++j) {
      const std::ptrdiff_t src = i + j;
      if (src >= 0 && src < n) p += kernel[j + radius] * power[src];
    }
    const double mag = std::abs(field.samples[i]);
    if (mag > 0)
      out.samples[i] = field.samples[i] * (std::sqrt(p) / mag);
    else
      out.samples[i] = std::sqrt(p);
  }
  return out;
}

}  // namespace

OpticalField apply_channel(const OpticalField& field,
                           const ChannelModel& model) {
  const double transmission = channel_transmission(model);
  OpticalField out = field;
  const double scale = std::sqrt(transmission);
  for (auto& s : out.samples) s *= scale;

  if (const auto* fiber = std::get_if<FiberParams>(&model)) {
    fiber->validate();
    if (fiber->dispersion_ps_nm_km > 0 && fiber->length_km > 0 &&
        fiber->source_linewidth_hz > 0) {
      const double lambda_m = fiber->reference_wavelength_nm * 1e-9;
      const double dlambda_nm = lambda_m * lambda_m *
                                fiber->source_linewidth_hz / kSpeedOfLightMps *
                                1e9;
      const double sigma_s = fiber->dispersion_ps_nm_km * 1e-12 * dlambda_nm *
                             fiber->length_km;
      out = broaden_power_profile(out, sigma_s);
    }
  }
  return out;
}

}  // namespace cowsim
