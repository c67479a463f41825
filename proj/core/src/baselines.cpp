#include "vopi/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vopi/error.hpp"

namespace vopi {

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kProposed: return "proposed";
    case BaselineKind::kCentral: return "central";
    case BaselineKind::kNaive: return "naive";
    case BaselineKind::kDeterministic: return "deterministic";
  }
  return "unknown";
}

BaselineKind parse_baseline(std::string_view name) {
  for (auto k : {BaselineKind::kProposed, BaselineKind::kCentral, BaselineKind::kNaive, BaselineKind::kDeterministic}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown method '" + std::string(name) + "' (expected central|naive|deterministic|proposed)");
}

PredictionInterval central_pi_forecast(const QrBank& bank, const FeatureVector& state, double beta, double capacity) {
  return bank.predict_interval(ProportionPair::central(beta), state, capacity);
}

double empirical_quantile(std::span<const double> values, double p) {
  if (values.empty()) throw ArgumentError("empirical quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto k = static_cast<std::size_t>(std::floor(h));
  if (k + 1 >= sorted.size()) return sorted.back();
  return sorted[k] + (h - static_cast<double>(k)) * (sorted[k + 1] - sorted[k]);
}

PredictionInterval naive_pi_forecast(std::span<const double> history, double beta, double capacity) {
  if (history.empty()) throw ArgumentError("naive forecast needs a non-empty history");
  const ProportionPair p = ProportionPair::central(beta);
  return make_interval(empirical_quantile(history, p.lower), empirical_quantile(history, p.upper), p, capacity);
}

PredictionInterval deterministic_forecast(const QrModel& median, const FeatureVector& state, double capacity) {
  const double m = std::clamp(median.predict(state), 0.0, capacity);
  return PredictionInterval{m, m, ProportionPair{0.5, 0.5, 0.0}};
}

}  // namespace vopi
