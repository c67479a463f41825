#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "vopi/baselines.hpp"
#include "vopi/dispatch.hpp"

namespace vopi {

// Everything a train/evaluate/sweep run needs. Defaults follow the reference
// network and optimizer settings.
struct RunConfig {
  double ncp = 0.95;
  int action_exponent = 2;  // |A| = 2^n - 1
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double lr_qr = 1e-3;
  double lr_agent = 1e-4;
  std::uint64_t seed = 1;
  std::size_t n_seeds = 1;

  std::string data_csv;  // empty selects the synthetic generator
  std::size_t synthetic_samples = 10'000;
  std::uint64_t data_seed = 1;
  double load_mean = 50.0;
  double load_amplitude = 0.2;
  double capacity = 30.0;  // wind capacity P, MW
  double train_fraction = 0.8;

  VppConfig vpp = VppConfig::reference();
  std::vector<BaselineKind> methods = {BaselineKind::kProposed, BaselineKind::kCentral, BaselineKind::kNaive,
                                       BaselineKind::kDeterministic};
  std::string output_dir = "runs/default";

  std::vector<std::size_t> qr_hidden = {128, 128};
  std::vector<std::size_t> agent_hidden = {512, 256};
  std::size_t qr_buffer = 50'000;
  std::size_t agent_buffer = 50'000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;
  bool normalize_rewards = true;
  std::size_t naive_window = 168;

  double beta() const { return 1.0 - ncp; }
  bool enabled(BaselineKind kind) const;
};

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

// All recognised keys, in documentation order.
const std::vector<ConfigKey>& config_keys();

// Applies one key = value assignment; throws ConfigError for unknown keys or
// malformed values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// Parses a key = value file over the defaults. '#' starts a comment.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::string_view text);
std::string format_config(const RunConfig& config);

// Throws ConfigError describing the first violated invariant. Returns
// non-fatal warnings.
std::vector<std::string> validate(const RunConfig& config);

inline constexpr const char* kOutputRootEnv = "VOPI_OUTPUT_ROOT";

// output_dir, placed under $VOPI_OUTPUT_ROOT when that is set and output_dir
// is relative.
std::filesystem::path resolve_output_dir(const RunConfig& config);

}  // namespace vopi
