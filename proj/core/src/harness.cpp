#include "vopi/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "vopi/error.hpp"
#include "vopi/random.hpp"

namespace vopi {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string money(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

QrModelConfig qr_config(const RunConfig& config, double capacity) {
  QrModelConfig c;
  c.hidden = config.qr_hidden;
  c.adam.learning_rate = config.lr_qr;
  c.buffer_capacity = config.qr_buffer;
  c.label_scale = capacity;
  return c;
}

AgentConfig agent_config(const RunConfig& config) {
  AgentConfig c;
  c.trunk_hidden = config.agent_hidden;
  c.batch_size = config.batch_size;
  c.learning_rate = config.lr_agent;
  c.buffer_capacity = config.agent_buffer;
  c.seed = derive_seed(config.seed, "agent");
  return c;
}

// Mean and standard deviation of the rewards a perfect point forecast would
// earn; used to standardize the agent's regression targets.
std::pair<double, double> reward_normalization(const Dataset& train, const RewardFn& reward) {
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& s : train.samples()) {
    const double r = reward(s, 0, PredictionInterval{s.power, s.power, {}});
    sum += r;
    sq += r * r;
  }
  const double n = static_cast<double>(train.size());
  const double mean = sum / n;
  const double sd = std::sqrt(std::max(0.0, sq / n - mean * mean));
  return {mean, std::max(sd, 1.0)};
}

void require_nonempty(const Dataset& train) {
  if (train.empty()) throw ArgumentError("training partition is empty");
}

const std::vector<BaselineKind> kAllMethods = {BaselineKind::kProposed, BaselineKind::kCentral, BaselineKind::kNaive,
                                               BaselineKind::kDeterministic};

}  // namespace

Dataset load_dataset(const RunConfig& config) {
  if (!config.data_csv.empty()) return load_csv(config.data_csv, config.capacity);
  SyntheticOptions options;
  options.load_mean = config.load_mean;
  options.load_amplitude = config.load_amplitude;
  return generate_synthetic(config.synthetic_samples, config.capacity, config.data_seed, options);
}

Partitions prepare_data(const RunConfig& config) {
  auto [train, test] = split(load_dataset(config), config.train_fraction);
  return Partitions{std::move(train), std::move(test)};
}

RewardFn monetary_reward(const VppConfig& vpp) {
  return [vpp](const PowerSample& s, std::size_t, const PredictionInterval& interval) {
    return monetary_score(vpp, interval, s.load, s.power).reward();
  };
}

ProposedModel train_proposed(const RunConfig& config, const Dataset& train, const RewardFn& reward_fn) {
  validate(config);
  require_nonempty(train);
  const RewardFn reward = reward_fn ? reward_fn : monetary_reward(config.vpp);
  const ActionSpace actions(config.beta(), static_cast<unsigned>(config.action_exponent));

  AgentConfig ac = agent_config(config);
  if (config.normalize_rewards) std::tie(ac.reward_shift, ac.reward_scale) = reward_normalization(train, reward);

  ProposedModel model{QrBank(actions, qr_config(config, train.capacity()), derive_seed(config.seed, "qr")),
                      Agent(actions, ac), TrainingLog{}};
  Rng qr_rng = make_rng(config.seed, "qr/batches");
  Rng agent_rng = make_rng(config.seed, "agent/batches");
  Rng epsilon_rng = make_rng(config.seed, "epsilon");
  const EpsilonSchedule schedule{config.epsilon_start, config.epsilon_end, config.epsilon_decay_fraction,
                                 static_cast<std::uint64_t>(config.epochs * train.size())};

  model.log.steps.reserve(config.epochs * train.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLog summary;
    summary.epoch = epoch;
    summary.action_counts.assign(actions.size(), 0);
    for (std::size_t t = 0; t < train.size(); ++t) {
      const PowerSample& sample = train[t];
      const FeatureVector state = train.state(t);
      const std::uint64_t step = model.agent.schedule_step();
      const double epsilon = schedule.value(step);

      const ActionChoice choice = model.agent.select_action(state, epsilon, epsilon_rng);
      const ProportionPair pair = model.bank.pair(choice.index);
      const PredictionInterval interval = model.bank.predict_interval(pair, state, train.capacity());
      const BankUpdate qr = model.bank.update_selected(pair, state, sample.power, config.batch_size, qr_rng);

      double r = 0.0;
      try {
        r = reward(sample, choice.index, interval);
      } catch (const InfeasibleError& e) {
        throw InfeasibleError("training sample at timestamp " + std::to_string(sample.timestamp) + ": " + e.what());
      }
      if (!std::isfinite(r)) {
        throw NumericError("non-finite reward at timestamp " + std::to_string(sample.timestamp));
      }
      model.agent.store(RewardRecord{state, choice.index, r});
      const double agent_loss = model.agent.update_from_buffer(agent_rng);
      if (!std::isfinite(agent_loss) || !std::isfinite(qr.lower_loss) || !std::isfinite(qr.upper_loss)) {
        throw NumericError("non-finite training loss at timestamp " + std::to_string(sample.timestamp));
      }
      model.agent.set_schedule_step(step + 1);

      model.log.steps.push_back(StepRecord{epoch, sample.timestamp, choice.index, choice.explored, epsilon,
                                           interval.lower, interval.upper, r, qr.lower_loss, qr.upper_loss,
                                           agent_loss});
      summary.mean_reward += r;
      summary.mean_lower_loss += qr.lower_loss;
      summary.mean_upper_loss += qr.upper_loss;
      summary.mean_agent_loss += agent_loss;
      ++summary.action_counts[choice.index];
    }
    const double n = static_cast<double>(train.size());
    summary.mean_reward /= n;
    summary.mean_lower_loss /= n;
    summary.mean_upper_loss /= n;
    summary.mean_agent_loss /= n;
    model.log.epochs.push_back(std::move(summary));
  }
  return model;
}

QrBank train_central(const RunConfig& config, const Dataset& train) {
  require_nonempty(train);
  // Same seeds and batch stream as the proposed bank, so that n = 1
  // reproduces this baseline exactly.
  QrBank bank(ActionSpace(config.beta(), 1), qr_config(config, train.capacity()), derive_seed(config.seed, "qr"));
  Rng rng = make_rng(config.seed, "qr/batches");
  const ProportionPair pair = ProportionPair::central(config.beta());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t t = 0; t < train.size(); ++t) {
      bank.update_selected(pair, train.state(t), train[t].power, config.batch_size, rng);
    }
  }
  return bank;
}

QrModel train_median(const RunConfig& config, const Dataset& train) {
  require_nonempty(train);
  QrModel model(0.5, qr_config(config, train.capacity()), derive_seed(config.seed, "qr/median"));
  Rng rng = make_rng(config.seed, "qr/median/batches");
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t t = 0; t < train.size(); ++t) {
      model.store(train.state(t), train[t].power);
      model.train_step(config.batch_size, rng);
    }
  }
  return model;
}

Artifacts train_all(const RunConfig& config, const Dataset& train) {
  validate(config);
  Artifacts a;
  if (config.enabled(BaselineKind::kProposed)) a.proposed = train_proposed(config, train);
  if (config.enabled(BaselineKind::kCentral)) a.central = train_central(config, train);
  if (config.enabled(BaselineKind::kDeterministic)) a.median = train_median(config, train);
  return a;
}

void write_training_log(const TrainingLog& log, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "training_log.csv");
    if (!out) throw IoError("cannot write training log in " + dir.string());
    const std::size_t k = log.epochs.empty() ? 0 : log.epochs.front().action_counts.size();
    out << "epoch,mean_reward,mean_lower_loss,mean_upper_loss,mean_agent_loss";
    for (std::size_t a = 0; a < k; ++a) out << ",action_" << a;
    out << '\n';
    for (const auto& e : log.epochs) {
      out << e.epoch << ',' << fmt(e.mean_reward) << ',' << fmt(e.mean_lower_loss) << ',' << fmt(e.mean_upper_loss)
          << ',' << fmt(e.mean_agent_loss);
      for (std::size_t c : e.action_counts) out << ',' << c;
      out << '\n';
    }
  }
  std::ofstream out(dir / "training_steps.csv");
  if (!out) throw IoError("cannot write training steps in " + dir.string());
  out << "epoch,timestamp,action,explored,epsilon,lower,upper,reward,lower_loss,upper_loss,agent_loss\n";
  for (const auto& s : log.steps) {
    out << s.epoch << ',' << s.timestamp << ',' << s.action << ',' << (s.explored ? 1 : 0) << ',' << fmt(s.epsilon)
        << ',' << fmt(s.lower) << ',' << fmt(s.upper) << ',' << fmt(s.reward) << ',' << fmt(s.lower_loss) << ','
        << fmt(s.upper_loss) << ',' << fmt(s.agent_loss) << '\n';
  }
}

void save_artifacts(const Artifacts& artifacts, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (artifacts.proposed) {
    artifacts.proposed->bank.save(dir / "bank");
    artifacts.proposed->agent.save(dir / "agent.bin");
    write_training_log(artifacts.proposed->log, dir);
  }
  if (artifacts.central) artifacts.central->save(dir / "central");
  if (artifacts.median) artifacts.median->save(dir / "median.bin");
}

Artifacts load_artifacts(const RunConfig& config, const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("no checkpoint directory at " + dir.string());
  const QrModelConfig qc = qr_config(config, config.capacity);
  Artifacts a;
  if (config.enabled(BaselineKind::kProposed)) {
    const ActionSpace actions(config.beta(), static_cast<unsigned>(config.action_exponent));
    a.proposed = ProposedModel{QrBank::load(dir / "bank", actions, qc), Agent::load(dir / "agent.bin", agent_config(config)),
                               TrainingLog{}};
  }
  if (config.enabled(BaselineKind::kCentral)) {
    a.central = QrBank::load(dir / "central", ActionSpace(config.beta(), 1), qc);
  }
  if (config.enabled(BaselineKind::kDeterministic)) a.median = QrModel::load(dir / "median.bin", qc);
  return a;
}

const EvaluationReport* RunReports::find(std::string_view method) const {
  for (const auto& r : reports) {
    if (r.method == method) return &r;
  }
  return nullptr;
}

RunReports evaluate_run(const RunConfig& config, const Artifacts& artifacts, const Partitions& data) {
  const Dataset& test = data.test;
  const double capacity = test.capacity();
  const double beta = config.beta();
  RunReports out;
  for (BaselineKind kind : config.methods) {
    Forecaster forecaster;
    switch (kind) {
      case BaselineKind::kProposed: {
        if (!artifacts.proposed) throw Error("missing artifacts for the proposed method");
        const ProposedModel& m = *artifacts.proposed;
        forecaster = [&m, &test, capacity](std::size_t i) {
          const FeatureVector state = test.state(i);
          const ActionChoice c = m.agent.greedy_action(state);
          return Forecast{m.bank.predict_interval(m.bank.pair(c.index), state, capacity), static_cast<int>(c.index)};
        };
        break;
      }
      case BaselineKind::kCentral: {
        if (!artifacts.central) throw Error("missing artifacts for the central baseline");
        const QrBank& bank = *artifacts.central;
        forecaster = [&bank, &test, beta, capacity](std::size_t i) {
          return Forecast{central_pi_forecast(bank, test.state(i), beta, capacity), -1};
        };
        break;
      }
      case BaselineKind::kNaive: {
        std::vector<double> history;
        history.reserve(data.train.size() + test.size());
        for (const auto& s : data.train.samples()) history.push_back(s.power);
        for (const auto& s : test.samples()) history.push_back(s.power);
        const std::size_t offset = data.train.size();
        const std::size_t window = config.naive_window;
        forecaster = [history = std::move(history), offset, window, beta, capacity](std::size_t i) {
          const std::size_t end = offset + i;
          const std::size_t begin = end > window ? end - window : 0;
          return Forecast{naive_pi_forecast(std::span<const double>(history).subspan(begin, end - begin), beta, capacity),
                          -1};
        };
        break;
      }
      case BaselineKind::kDeterministic: {
        if (!artifacts.median) throw Error("missing artifacts for the deterministic baseline");
        const QrModel& median = *artifacts.median;
        forecaster = [&median, &test, capacity](std::size_t i) {
          return Forecast{deterministic_forecast(median, test.state(i), capacity), -1};
        };
        break;
      }
    }
    out.reports.push_back(evaluate(forecaster, test, config.vpp, config.ncp, std::string(to_string(kind))));
  }
  return out;
}

double accumulative_reduction(const EvaluationReport& baseline, const EvaluationReport& proposed) {
  if (baseline.records.size() != proposed.records.size()) {
    throw ArgumentError("reduction needs reports over the same samples");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < baseline.records.size(); ++i) {
    if (baseline.records[i].timestamp != proposed.records[i].timestamp) {
      throw ArgumentError("reduction needs reports over the same samples");
    }
    total += baseline.records[i].monetary - proposed.records[i].monetary;
  }
  return total;
}

std::string render_summary_markdown(const RunReports& reports) {
  std::ostringstream md;
  const double ncp = reports.reports.empty() ? 0.0 : reports.reports.front().ncp;
  md << "## Forecast quality and value (NCP " << std::fixed << std::setprecision(0) << ncp * 100.0 << "%)\n\n";
  md << "| Method | Winkler score/MW | Average width/MW | ACD/% | Average monetary score/$ |\n";
  md << "|---|---|---|---|---|\n";
  for (const auto& r : reports.reports) {
    md << "| " << r.method << " | " << money(r.winkler_avg) << " | " << money(r.width_avg) << " | " << money(r.acd)
       << " | " << money(r.monetary_avg) << " |\n";
  }
  md << "\n## Operational value decomposition\n\n";
  md << "| Method | Average monetary score/$ | Average day-ahead monetary score/$ | Average real-time monetary score/$ |\n";
  md << "|---|---|---|---|\n";
  for (const auto& r : reports.reports) {
    md << "| " << r.method << " | " << money(r.monetary_avg) << " | " << money(r.monetary_da_avg) << " | "
       << money(r.monetary_rt_avg) << " |\n";
  }
  if (const EvaluationReport* proposed = reports.find("proposed")) {
    md << "\n## Accumulative monetary score reduction on the test set\n\n";
    md << "| Baseline | Baseline - proposed/$ |\n|---|---|\n";
    for (const auto& r : reports.reports) {
      if (r.method == "proposed") continue;
      md << "| " << r.method << " | " << money(accumulative_reduction(r, *proposed)) << " |\n";
    }
  }
  return md.str();
}

void write_reports(const RunReports& reports, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& r : reports.reports) write_samples_csv(r, dir / ("samples_" + r.method + ".csv"));
  {
    std::ofstream out(dir / "summary.csv");
    if (!out) throw IoError("cannot write summary in " + dir.string());
    out << "method,winkler,width,acd,monetary,monetary_da,monetary_rt\n";
    for (const auto& r : reports.reports) {
      out << r.method << ',' << fmt(r.winkler_avg) << ',' << fmt(r.width_avg) << ',' << fmt(r.acd) << ','
          << fmt(r.monetary_avg) << ',' << fmt(r.monetary_da_avg) << ',' << fmt(r.monetary_rt_avg) << '\n';
    }
  }
  if (const EvaluationReport* proposed = reports.find("proposed")) {
    std::ofstream out(dir / "reduction.csv");
    out << "baseline,reduction\n";
    for (const auto& r : reports.reports) {
      if (r.method == "proposed") continue;
      out << r.method << ',' << fmt(accumulative_reduction(r, *proposed)) << '\n';
    }
  }
  std::ofstream md(dir / "summary.md");
  md << render_summary_markdown(reports);
}

RunReports read_reports(const std::filesystem::path& dir, double ncp) {
  RunReports out;
  for (BaselineKind kind : kAllMethods) {
    const auto path = dir / ("samples_" + std::string(to_string(kind)) + ".csv");
    if (!std::filesystem::exists(path)) continue;
    out.reports.push_back(summarize(read_samples_csv(path), ncp, std::string(to_string(kind))));
  }
  if (out.reports.empty()) throw IoError("no samples_<method>.csv files in " + dir.string());
  return out;
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "ncp") return SweepAxis::kNcp;
  if (name == "capacity") return SweepAxis::kCapacity;
  if (name == "n") return SweepAxis::kActionExponent;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "' (expected ncp|capacity|n)");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNcp: return "ncp";
    case SweepAxis::kCapacity: return "capacity";
    case SweepAxis::kActionExponent: return "n";
  }
  return "unknown";
}

std::vector<SweepRow> sweep(const RunConfig& config, SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) throw ArgumentError("sweep needs at least one setting");
  const Dataset base = load_dataset(config);
  const std::string axis_name(to_string(axis));
  std::vector<SweepRow> rows;

  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    const double value = values[vi];
    std::vector<SweepRow> ok_rows;
    for (std::size_t k = 0; k < config.n_seeds; ++k) {
      RunConfig c = config;
      c.seed = derive_seed(config.seed, "sweep/" + axis_name + "/" + std::to_string(vi) + "/" + std::to_string(k));
      SweepRow failed;
      failed.axis = axis_name;
      failed.value = value;
      failed.seed = std::to_string(k);
      try {
        Dataset ds = base;
        switch (axis) {
          case SweepAxis::kNcp: c.ncp = value; break;
          case SweepAxis::kCapacity:
            c.capacity = value;
            c.vpp.wind_capacity = value;
            ds = rescale_capacity(base, value);
            break;
          case SweepAxis::kActionExponent:
            if (value != std::floor(value)) throw ConfigError("n must be an integer");
            c.action_exponent = static_cast<int>(value);
            break;
        }
        failed.actions = (std::size_t{1} << std::clamp(c.action_exponent, 1, 20)) - 1;
        auto [train, test] = split(ds, c.train_fraction);
        const Partitions data{std::move(train), std::move(test)};
        const Artifacts artifacts = train_all(c, data.train);
        const RunReports reports = evaluate_run(c, artifacts, data);
        const EvaluationReport* proposed = reports.find("proposed");
        for (const auto& r : reports.reports) {
          SweepRow row = failed;
          row.method = r.method;
          row.winkler = r.winkler_avg;
          row.width = r.width_avg;
          row.acd = r.acd;
          row.monetary = r.monetary_avg;
          row.monetary_da = r.monetary_da_avg;
          row.monetary_rt = r.monetary_rt_avg;
          row.reduction = proposed ? accumulative_reduction(r, *proposed) : 0.0;
          rows.push_back(row);
          ok_rows.push_back(row);
        }
      } catch (const std::exception& e) {
        failed.method = "-";
        failed.status = "failed";
        failed.message = e.what();
        rows.push_back(failed);
      }
    }
    if (config.n_seeds < 2) continue;
    std::vector<std::string> methods;
    for (const auto& r : ok_rows) {
      if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    }
    for (const auto& m : methods) {
      std::vector<const SweepRow*> group;
      for (const auto& r : ok_rows) {
        if (r.method == m) group.push_back(&r);
      }
      const double n = static_cast<double>(group.size());
      SweepRow mean;
      mean.axis = axis_name;
      mean.value = value;
      mean.seed = "mean";
      mean.actions = group.front()->actions;
      mean.method = m;
      SweepRow sd = mean;
      sd.seed = "std";
      auto fields = [](auto& r) {
        return std::array{&r.winkler, &r.width, &r.acd, &r.monetary, &r.monetary_da, &r.monetary_rt, &r.reduction};
      };
      for (const SweepRow* g : group) {
        auto src = fields(*g);
        auto dst = fields(mean);
        for (std::size_t f = 0; f < dst.size(); ++f) *dst[f] += *src[f] / n;
      }
      for (const SweepRow* g : group) {
        auto src = fields(*g);
        auto mu = fields(mean);
        auto dst = fields(sd);
        for (std::size_t f = 0; f < dst.size(); ++f) *dst[f] += (*src[f] - *mu[f]) * (*src[f] - *mu[f]);
      }
      for (double* f : fields(sd)) *f = n > 1 ? std::sqrt(*f / (n - 1)) : 0.0;
      rows.push_back(mean);
      rows.push_back(sd);
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "axis,value,seed,actions,method,winkler,width,acd,monetary,monetary_da,monetary_rt,reduction,status,message\n";
  for (const auto& r : rows) {
    std::string msg = r.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << r.axis << ',' << fmt(r.value) << ',' << r.seed << ',' << r.actions << ',' << r.method << ','
        << fmt(r.winkler) << ',' << fmt(r.width) << ',' << fmt(r.acd) << ',' << fmt(r.monetary) << ','
        << fmt(r.monetary_da) << ',' << fmt(r.monetary_rt) << ',' << fmt(r.reduction) << ',' << r.status << ','
        << msg << '\n';
  }
}

}  // namespace vopi
