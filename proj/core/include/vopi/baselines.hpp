#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "vopi/quantile.hpp"

namespace vopi {

enum class BaselineKind { kProposed, kCentral, kNaive, kDeterministic };

std::string_view to_string(BaselineKind kind);
BaselineKind parse_baseline(std::string_view name);

inline constexpr std::size_t kDefaultNaiveWindow = 168;  // hours

// Symmetric interval from the bank's (beta/2, 1 - beta/2) models.
PredictionInterval central_pi_forecast(const QrBank& bank, const FeatureVector& state, double beta, double capacity);

// Empirical beta/2 and 1 - beta/2 quantiles of the recent realizations
// (linear interpolation between order statistics), clamped to [0, capacity].
PredictionInterval naive_pi_forecast(std::span<const double> history, double beta, double capacity);

// Degenerate interval [m, m] at the clamped median model output.
PredictionInterval deterministic_forecast(const QrModel& median, const FeatureVector& state, double capacity);

// Linear-interpolation sample quantile, h = (n - 1) p.
double empirical_quantile(std::span<const double> values, double p);

}  // namespace vopi
