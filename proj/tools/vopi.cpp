// vopi: train, evaluate and inspect value-oriented wind power intervals.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vopi/config.hpp"
#include "vopi/data.hpp"
#include "vopi/dispatch.hpp"
#include "vopi/error.hpp"
#include "vopi/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_file;
  std::vector<std::string> values;  // one slot per config key
};

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

void add_config_flags(CLI::App& app, Options& opts) {
  app.add_option("-c,--config", opts.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  const auto& keys = vopi::config_keys();
  opts.values.resize(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    app.add_option(flag_name(keys[i].name), opts.values[i], keys[i].help)->group("Configuration");
  }
}

vopi::RunConfig resolve_config(const CLI::App& app, const Options& opts) {
  vopi::RunConfig config = opts.config_file.empty() ? vopi::RunConfig{} : vopi::load_config(opts.config_file);
  const auto& keys = vopi::config_keys();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (app.count(flag_name(keys[i].name)) > 0) vopi::apply_setting(config, keys[i].name, opts.values[i]);
  }
  for (const auto& w : vopi::validate(config)) std::cerr << "warning: " << w << '\n';
  return config;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw vopi::IoError("cannot write " + path.string());
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

int cmd_generate(const vopi::RunConfig& config, std::string out) {
  if (out.empty()) out = (vopi::resolve_output_dir(config) / "data.csv").string();
  vopi::RunConfig synthetic = config;
  synthetic.data_csv.clear();
  const vopi::Dataset data = vopi::load_dataset(synthetic);
  fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  vopi::write_csv(data, path);
  std::cout << "wrote " << data.size() << " samples to " << path.string() << '\n';
  return 0;
}

int cmd_train(const vopi::RunConfig& config) {
  const fs::path dir = vopi::resolve_output_dir(config);
  const vopi::Partitions data = vopi::prepare_data(config);
  std::cout << "training on " << data.train.size() << " samples, " << config.epochs << " epochs\n";
  const vopi::Artifacts artifacts = vopi::train_all(config, data.train);
  vopi::save_artifacts(artifacts, dir / "checkpoints");
  write_text(dir / "config.txt", vopi::format_config(config));
  if (artifacts.proposed && !artifacts.proposed->log.epochs.empty()) {
    const auto& last = artifacts.proposed->log.epochs.back();
    std::printf("epoch %zu: mean reward %.2f $, pinball %.4f / %.4f, agent loss %.4f\n", last.epoch,
                last.mean_reward, last.mean_lower_loss, last.mean_upper_loss, last.mean_agent_loss);
  }
  std::cout << "checkpoints in " << (dir / "checkpoints").string() << '\n';
  return 0;
}

int cmd_evaluate(const vopi::RunConfig& config) {
  const fs::path dir = vopi::resolve_output_dir(config);
  const vopi::Artifacts artifacts = vopi::load_artifacts(config, dir / "checkpoints");
  const vopi::Partitions data = vopi::prepare_data(config);
  const vopi::RunReports reports = vopi::evaluate_run(config, artifacts, data);
  vopi::write_reports(reports, dir / "reports");
  std::cout << vopi::render_summary_markdown(reports);
  return 0;
}

int cmd_sweep(const vopi::RunConfig& config, const std::vector<double>& ncp, const std::vector<double>& capacity,
              const std::vector<double>& n) {
  const int given = !ncp.empty() + !capacity.empty() + !n.empty();
  if (given != 1) throw vopi::ArgumentError("give exactly one of --ncp-list, --capacity-list, --n-list");
  vopi::SweepAxis axis = vopi::SweepAxis::kNcp;
  const std::vector<double>* values = &ncp;
  if (!capacity.empty()) {
    axis = vopi::SweepAxis::kCapacity;
    values = &capacity;
  } else if (!n.empty()) {
    axis = vopi::SweepAxis::kActionExponent;
    values = &n;
  }
  const auto rows = vopi::sweep(config, axis, *values);
  const fs::path path = vopi::resolve_output_dir(config) / ("sweep_" + std::string(vopi::to_string(axis)) + ".csv");
  vopi::write_sweep_csv(rows, path);
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.status != "ok") {
      ++failed;
      std::cerr << "setting " << r.value << " seed " << r.seed << " failed: " << r.message << '\n';
      continue;
    }
    if (r.seed == "std") continue;
    std::printf("%s=%g seed=%s |A|=%zu %-13s monetary %.2f winkler %.3f acd %.2f\n", r.axis.c_str(), r.value,
                r.seed.c_str(), r.actions, r.method.c_str(), r.monetary, r.winkler, r.acd);
  }
  std::cout << "wrote " << path.string() << '\n';
  return failed == 0 ? 0 : 1;
}

int cmd_dispatch(const vopi::RunConfig& config, double load, double lower, double upper,
                 std::optional<double> realization) {
  const vopi::PredictionInterval interval =
      vopi::make_interval(lower, upper, vopi::ProportionPair::central(config.beta()), config.vpp.wind_capacity);
  const vopi::DayAheadSolution da = vopi::solve_day_ahead(config.vpp, interval, load);
  std::printf("interval     [%.6g, %.6g] MW\n", interval.lower, interval.upper);
  std::printf("wind p*      %.6f MW\n", da.p);
  for (std::size_t i = 0; i < da.x.size(); ++i) std::printf("x%zu          %.6f MW\n", i + 1, da.x[i]);
  std::printf("price        %.6f $/MW\n", da.marginal_price);
  std::printf("da cost      %.2f $\n", da.da_cost);
  std::printf("recourse     %.2f $ at w = %.6g MW\n", da.worst_case_recourse, da.worst_case_w);
  if (realization) {
    const vopi::MonetaryScore s = vopi::monetary_score(config.vpp, interval, load, *realization);
    std::printf("rt cost      %.2f $\n", s.rt);
    std::printf("score        %.2f $\n", s.score);
  }
  return 0;
}

int cmd_report(const vopi::RunConfig& config, std::string dir) {
  const fs::path path = dir.empty() ? vopi::resolve_output_dir(config) / "reports" : fs::path(dir);
  const vopi::RunReports reports = vopi::read_reports(path, config.ncp);
  const std::string md = vopi::render_summary_markdown(reports);
  write_text(path / "summary.md", md);
  std::cout << md;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-oriented wind power prediction intervals"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opts;
  add_config_flags(app, opts);

  std::string data_out;
  auto* generate = app.add_subcommand("generate-data", "write a synthetic wind/load CSV");
  generate->add_option("-o,--out", data_out, "output CSV (default <output_dir>/data.csv)");

  auto* train = app.add_subcommand("train", "train the proposed method and baselines");
  auto* evaluate = app.add_subcommand("evaluate", "score trained checkpoints on the test part");

  std::vector<double> ncp_list, capacity_list, n_list;
  auto* sweep = app.add_subcommand("sweep", "train and evaluate across settings");
  sweep->add_option("--ncp-list", ncp_list, "NCP values")->delimiter(',');
  sweep->add_option("--capacity-list", capacity_list, "wind capacities, MW")->delimiter(',');
  sweep->add_option("--n-list", n_list, "action-space exponents")->delimiter(',');

  double load = 0.0, lower = 0.0, upper = 0.0;
  std::optional<double> realization;
  auto* dispatch = app.add_subcommand("dispatch", "solve one day-ahead problem");
  dispatch->add_option("--load", load, "load, MW")->required();
  dispatch->add_option("--lower", lower, "interval lower bound, MW")->required();
  dispatch->add_option("--upper", upper, "interval upper bound, MW")->required();
  dispatch->add_option("--realization", realization, "realized wind, MW");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "rebuild the summary from per-sample CSVs");
  report->add_option("--dir", report_dir, "report directory (default <output_dir>/reports)");

  CLI11_PARSE(app, argc, argv);

  try {
    const vopi::RunConfig config = resolve_config(app, opts);
    if (*generate) return cmd_generate(config, data_out);
    if (*train) return cmd_train(config);
    if (*evaluate) return cmd_evaluate(config);
    if (*sweep) return cmd_sweep(config, ncp_list, capacity_list, n_list);
    if (*dispatch) return cmd_dispatch(config, load, lower, upper, realization);
    if (*report) return cmd_report(config, report_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
