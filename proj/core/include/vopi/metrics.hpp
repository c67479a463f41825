#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vopi/data.hpp"
#include "vopi/dispatch.hpp"
#include "vopi/quantile.hpp"

namespace vopi {

// Interval score: width plus 2/beta times the distance by which y misses.
double winkler(const PredictionInterval& interval, double y, double beta);

// Average coverage deviation in percentage points: (coverage - ncp) * 100.
double acd(std::span<const PredictionInterval> intervals, std::span<const double> realizations, double ncp);

struct SampleRecord {
  std::int64_t timestamp = 0;
  int action = -1;  // -1 for forecasters without an action
  double lower = 0.0;
  double upper = 0.0;
  double realization = 0.0;
  double load = 0.0;
  double schedule = 0.0;  // p*
  double winkler = 0.0;
  double width = 0.0;
  bool covered = false;
  double monetary = 0.0;
  double monetary_da = 0.0;
  double monetary_rt = 0.0;
};

struct EvaluationReport {
  std::string method;
  double ncp = 0.0;
  double winkler_avg = 0.0;
  double width_avg = 0.0;
  double acd = 0.0;
  double monetary_avg = 0.0;
  double monetary_da_avg = 0.0;
  double monetary_rt_avg = 0.0;
  std::vector<SampleRecord> records;
};

struct Forecast {
  PredictionInterval interval;
  int action = -1;
};

// Produces the forecast for sample i of the evaluated dataset.
using Forecaster = std::function<Forecast(std::size_t)>;

// Scores every sample and averages. Dispatch failures are rethrown as
// InfeasibleError naming the sample timestamp.
EvaluationReport evaluate(const Forecaster& forecaster, const Dataset& dataset, const VppConfig& config, double ncp,
                          std::string method = "forecast");

// Recomputes the aggregate fields from records, in record order.
EvaluationReport summarize(std::vector<SampleRecord> records, double ncp, std::string method);

void write_samples_csv(const EvaluationReport& report, const std::filesystem::path& path);
std::vector<SampleRecord> read_samples_csv(const std::filesystem::path& path);

}  // namespace vopi
