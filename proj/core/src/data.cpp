#include "vopi/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include <boost/math/distributions/normal.hpp>

#include "vopi/error.hpp"
#include "vopi/random.hpp"

namespace vopi {

namespace {

constexpr std::array<std::string_view, 7> kColumns = {"timestamp", "ws10", "wd10", "ws100",
                                                      "wd100",     "power", "load"};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view cell, std::size_t row, std::string_view column) {
  cell = trim(cell);
  T value{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw ParseError(row, "non-numeric value '" + std::string(cell) + "' in column " +
                              std::string(column));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw ParseError(row, "non-finite value in column " + std::string(column));
    }
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double wrap_degrees(double deg) {
  deg = std::fmod(deg, 360.0);
  return deg < 0.0 ? deg + 360.0 : deg;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double direction_factor(double wd100_deg, const SyntheticOptions& o) {
  return 1.0 + o.direction_gain * std::cos(wd100_deg * std::numbers::pi / 180.0);
}

double power_curve(double effective_speed, double capacity, const SyntheticOptions& o) {
  return capacity * sigmoid((effective_speed - o.curve_center) / o.curve_width);
}

}  // namespace

Scaler::Scaler() { scale_.fill(1.0); }

Scaler Scaler::fit(std::span<const PowerSample> samples) {
  if (samples.empty()) throw ArgumentError("cannot fit scaler on an empty partition");
  Scaler s;
  const double n = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    double sum = 0.0;
    for (const auto& p : samples) sum += p.features[k];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& p : samples) ss += (p.features[k] - mean) * (p.features[k] - mean);
    const double sd = std::sqrt(ss / n);
    s.mean_[k] = mean;
    s.scale_[k] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

FeatureVector Scaler::transform(const FeatureVector& raw) const {
  FeatureVector out;
  for (std::size_t k = 0; k < kFeatureCount; ++k) out[k] = (raw[k] - mean_[k]) / scale_[k];
  return out;
}

FeatureVector Scaler::inverse(const FeatureVector& scaled) const {
  FeatureVector out;
  for (std::size_t k = 0; k < kFeatureCount; ++k) out[k] = scaled[k] * scale_[k] + mean_[k];
  return out;
}

Dataset::Dataset(std::vector<PowerSample> samples, double capacity, Scaler scaler)
    : samples_(std::move(samples)), capacity_(capacity), scaler_(std::move(scaler)) {
  if (!(capacity > 0.0)) throw ArgumentError("wind capacity must be positive");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (i > 0 && s.timestamp <= samples_[i - 1].timestamp) {
      throw ArgumentError("timestamps must be strictly increasing (sample " + std::to_string(i) + ")");
    }
    if (!(s.power >= 0.0 && s.power <= capacity)) {
      throw ArgumentError("power outside [0, capacity] at sample " + std::to_string(i));
    }
    if (!(s.load > 0.0)) throw ArgumentError("load must be positive at sample " + std::to_string(i));
    for (double f : s.features) {
      if (!std::isfinite(f)) throw ArgumentError("non-finite feature at sample " + std::to_string(i));
    }
  }
}

Dataset load_csv(const std::filesystem::path& path, double capacity) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw SchemaError(std::string(kColumns[0]));
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_fields(line);
  std::array<std::size_t, kColumns.size()> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    const auto it = std::find_if(header.begin(), header.end(),
                                 [&](std::string_view h) { return trim(h) == kColumns[c]; });
    if (it == header.end()) throw SchemaError(std::string(kColumns[c]));
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<PowerSample> samples;
  std::size_t clamped = 0;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()));
    }
    PowerSample s;
    s.timestamp = parse_number<std::int64_t>(fields[index[0]], row, kColumns[0]);
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      s.features[k] = parse_number<double>(fields[index[1 + k]], row, kColumns[1 + k]);
    }
    s.power = parse_number<double>(fields[index[5]], row, kColumns[5]);
    s.load = parse_number<double>(fields[index[6]], row, kColumns[6]);
    if (s.power < 0.0 || s.power > capacity) {
      s.power = std::clamp(s.power, 0.0, capacity);
      ++clamped;
    }
    if (!(s.load > 0.0)) throw ParseError(row, "load must be positive");
    if (!samples.empty() && s.timestamp <= samples.back().timestamp) {
      throw ParseError(row, "timestamp not strictly increasing");
    }
    samples.push_back(s);
  }
  Dataset ds(std::move(samples), capacity);
  ds.set_clamp_warnings(clamped);
  return ds;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "timestamp,ws10,wd10,ws100,wd100,power,load\n";
  for (const auto& s : dataset.samples()) {
    out << s.timestamp;
    for (double f : s.features) out << ',' << format_double(f);
    out << ',' << format_double(s.power) << ',' << format_double(s.load) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset generate_synthetic(std::size_t n, double capacity, std::uint64_t seed,
                           const SyntheticOptions& o) {
  if (n == 0) throw ArgumentError("synthetic dataset size must be at least 1");
  if (!(capacity > 0.0)) throw ArgumentError("wind capacity must be positive");

  Rng rng = make_rng(seed, "data");
  const double phi = o.speed_persistence;
  const double innovation = std::sqrt(1.0 - phi * phi);

  double log_speed = standard_normal(rng);
  double direction = 360.0 * uniform01(rng);

  std::vector<PowerSample> samples;
  samples.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    log_speed = phi * log_speed + innovation * standard_normal(rng);
    direction = wrap_degrees(direction + 12.0 * standard_normal(rng));
    const double ws10_noise = standard_normal(rng);
    const double wd10_noise = standard_normal(rng);
    const double power_noise = standard_normal(rng);

    PowerSample s;
    s.timestamp = static_cast<std::int64_t>(t);
    const double ws100 =
        o.speed_mean * std::exp(o.speed_log_sd * log_speed - 0.5 * o.speed_log_sd * o.speed_log_sd);
    s.features[kWs100] = ws100;
    s.features[kWd100] = direction;
    s.features[kWs10] = 0.78 * ws100 * std::exp(0.05 * ws10_noise);
    s.features[kWd10] = wrap_degrees(direction + 5.0 * wd10_noise);

    const double noise = std::exp(o.noise_log_sd * power_noise - 0.5 * o.noise_log_sd * o.noise_log_sd);
    const double effective = ws100 * direction_factor(direction, o) * noise;
    s.power = std::clamp(power_curve(effective, capacity, o), 0.0, capacity);

    const double hour = static_cast<double>(t % 24);
    s.load = o.load_mean *
             (1.0 + o.load_amplitude * std::sin(2.0 * std::numbers::pi * (hour - 6.0) / 24.0));
    samples.push_back(s);
  }
  return Dataset(std::move(samples), capacity);
}

double synthetic_conditional_quantile(const FeatureVector& features, double alpha, double capacity,
                                      const SyntheticOptions& o) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("quantile level must lie in (0, 1)");
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), alpha);
  const double noise = std::exp(o.noise_log_sd * z - 0.5 * o.noise_log_sd * o.noise_log_sd);
  const double effective = features[kWs100] * direction_factor(features[kWd100], o) * noise;
  return std::clamp(power_curve(effective, capacity, o), 0.0, capacity);
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train fraction must lie in (0, 1)");
  }
  if (dataset.empty()) throw ArgumentError("cannot split an empty dataset");
  const auto samples = dataset.samples();
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(samples.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, samples.size());

  std::vector<PowerSample> train(samples.begin(), samples.begin() + n_train);
  std::vector<PowerSample> test(samples.begin() + n_train, samples.end());
  Scaler scaler = Scaler::fit(train);
  return {Dataset(std::move(train), dataset.capacity(), scaler),
          Dataset(std::move(test), dataset.capacity(), scaler)};
}

Dataset rescale_capacity(const Dataset& dataset, double capacity) {
  if (!(capacity > 0.0)) throw ArgumentError("wind capacity must be positive");
  const double ratio = capacity / dataset.capacity();
  std::vector<PowerSample> samples(dataset.samples().begin(), dataset.samples().end());
  for (auto& s : samples) s.power = std::clamp(s.power * ratio, 0.0, capacity);
  return Dataset(std::move(samples), capacity, dataset.scaler());
}

}  // namespace vopi
