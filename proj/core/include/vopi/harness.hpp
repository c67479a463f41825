#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vopi/agent.hpp"
#include "vopi/config.hpp"
#include "vopi/data.hpp"
#include "vopi/metrics.hpp"
#include "vopi/quantile.hpp"

namespace vopi {

struct Partitions {
  Dataset train;
  Dataset test;
};

Dataset load_dataset(const RunConfig& config);
Partitions prepare_data(const RunConfig& config);

// Reward for taking `action` on `sample` given the interval it produced.
using RewardFn = std::function<double(const PowerSample& sample, std::size_t action, const PredictionInterval&)>;

// Negated monetary score under the run's VPP.
RewardFn monetary_reward(const VppConfig& vpp);

struct StepRecord {
  std::size_t epoch = 0;
  std::int64_t timestamp = 0;
  std::size_t action = 0;
  bool explored = false;
  double epsilon = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double reward = 0.0;
  double lower_loss = 0.0;
  double upper_loss = 0.0;
  double agent_loss = 0.0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double mean_reward = 0.0;
  double mean_lower_loss = 0.0;
  double mean_upper_loss = 0.0;
  double mean_agent_loss = 0.0;
  std::vector<std::size_t> action_counts;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
  std::vector<StepRecord> steps;
};

struct ProposedModel {
  QrBank bank;
  Agent agent;
  TrainingLog log;
};

// The value-oriented training loop: per epoch, per sample in timestamp
// order, select a proportion epsilon-greedily, predict the interval, update
// the selected quantile models, score the interval, and update the agent.
ProposedModel train_proposed(const RunConfig& config, const Dataset& train, const RewardFn& reward = {});

// Quality-oriented baselines trained on the same stream without a bandit.
QrBank train_central(const RunConfig& config, const Dataset& train);
QrModel train_median(const RunConfig& config, const Dataset& train);

struct Artifacts {
  std::optional<ProposedModel> proposed;
  std::optional<QrBank> central;
  std::optional<QrModel> median;
};

Artifacts train_all(const RunConfig& config, const Dataset& train);

// Checkpoint layout under dir: bank/, agent.bin, central/, median.bin,
// training_log.csv, training_steps.csv.
void save_artifacts(const Artifacts& artifacts, const std::filesystem::path& dir);
Artifacts load_artifacts(const RunConfig& config, const std::filesystem::path& dir);

struct RunReports {
  std::vector<EvaluationReport> reports;  // in config.methods order

  const EvaluationReport* find(std::string_view method) const;
};

// Greedy proposed forecasts and every enabled baseline on the test part.
RunReports evaluate_run(const RunConfig& config, const Artifacts& artifacts, const Partitions& data);

// Sum over samples of baseline score minus proposed score.
double accumulative_reduction(const EvaluationReport& baseline, const EvaluationReport& proposed);

std::string render_summary_markdown(const RunReports& reports);
// samples_<method>.csv, summary.csv, summary.md, reduction.csv
void write_reports(const RunReports& reports, const std::filesystem::path& dir);
// Rebuilds reports from samples_<method>.csv files found in dir.
RunReports read_reports(const std::filesystem::path& dir, double ncp);

void write_training_log(const TrainingLog& log, const std::filesystem::path& dir);

enum class SweepAxis { kNcp, kCapacity, kActionExponent };
SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct SweepRow {
  std::string axis;
  double value = 0.0;
  std::string seed;  // seed index, or "mean"/"std" across seeds
  std::size_t actions = 0;
  std::string method;
  double winkler = 0.0;
  double width = 0.0;
  double acd = 0.0;
  double monetary = 0.0;
  double monetary_da = 0.0;
  double monetary_rt = 0.0;
  double reduction = 0.0;  // vs proposed, summed over the test part
  std::string status = "ok";
  std::string message;
};

// Runs train + evaluate per setting and seed with derived sub-seeds. A
// failing setting produces a "failed" row instead of aborting.
std::vector<SweepRow> sweep(const RunConfig& config, SweepAxis axis, const std::vector<double>& values);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace vopi
