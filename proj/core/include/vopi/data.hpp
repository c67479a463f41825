#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace vopi {

inline constexpr std::size_t kFeatureCount = 4;

// Layout: [ws10, wd10, ws100, wd100]; speeds in m/s, directions in degrees.
using FeatureVector = std::array<double, kFeatureCount>;

enum Feature : std::size_t { kWs10 = 0, kWd10 = 1, kWs100 = 2, kWd100 = 3 };

struct PowerSample {
  std::int64_t timestamp = 0;  // hour index
  FeatureVector features{};
  double power = 0.0;  // MW, realization
  double load = 0.0;   // MW, demand
};

// Per-feature z-score normalization.
class Scaler {
public:
  Scaler();  // identity
  static Scaler fit(std::span<const PowerSample> samples);

  FeatureVector transform(const FeatureVector& raw) const;
  FeatureVector inverse(const FeatureVector& scaled) const;

  const FeatureVector& mean() const noexcept { return mean_; }
  const FeatureVector& scale() const noexcept { return scale_; }

private:
  FeatureVector mean_{};
  FeatureVector scale_{};
};

class Dataset {
public:
  Dataset() = default;
  // Validates PowerSample invariants and strictly increasing timestamps.
  Dataset(std::vector<PowerSample> samples, double capacity, Scaler scaler = Scaler());

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const PowerSample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const PowerSample> samples() const noexcept { return samples_; }
  double capacity() const noexcept { return capacity_; }
  const Scaler& scaler() const noexcept { return scaler_; }

  // Scaled model input for sample i.
  FeatureVector state(std::size_t i) const { return scaler_.transform(samples_[i].features); }

  // Rows whose power was clamped into [0, capacity] during loading.
  std::size_t clamp_warnings() const noexcept { return clamp_warnings_; }
  void set_clamp_warnings(std::size_t n) noexcept { clamp_warnings_ = n; }

private:
  std::vector<PowerSample> samples_;
  double capacity_ = 0.0;
  Scaler scaler_;
  std::size_t clamp_warnings_ = 0;
};

// Header must contain timestamp,ws10,wd10,ws100,wd100,power,load (any order).
Dataset load_csv(const std::filesystem::path& path, double capacity);
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

struct SyntheticOptions {
  double load_mean = 50.0;       // MW
  double load_amplitude = 0.2;   // fraction of mean, daily sinusoid
  double speed_mean = 7.5;       // m/s at 100 m
  double speed_persistence = 0.97;
  double speed_log_sd = 0.35;    // stationary sd of log wind speed
  double noise_log_sd = 0.18;    // multiplicative lognormal noise on effective speed
  double curve_center = 9.0;     // m/s, half-rated speed
  double curve_width = 1.4;      // m/s
  double direction_gain = 0.08;  // effective-speed modulation by wd100
};

// Deterministic in seed; a run of n samples is a prefix of any longer run.
Dataset generate_synthetic(std::size_t n, double capacity, std::uint64_t seed,
                           const SyntheticOptions& options = {});

// Exact alpha-quantile of power given features under the synthetic generator.
double synthetic_conditional_quantile(const FeatureVector& features, double alpha, double capacity,
                                      const SyntheticOptions& options = {});

// Chronological split; the scaler is fitted on the train part and applied to both.
// The train part always keeps at least one sample.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction);

// Linear rescaling of power to a new wind capacity.
Dataset rescale_capacity(const Dataset& dataset, double capacity);

}  // namespace vopi
