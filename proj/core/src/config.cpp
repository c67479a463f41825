#include "vopi/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vopi/error.hpp"

namespace vopi {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("invalid value '" + std::string(text) + "' for key '" + std::string(key) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean '" + std::string(text) + "' for key '" + std::string(key) + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& values, std::string_view sep, auto&& to_text) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += to_text(values[i]);
  }
  return out;
}

std::vector<std::size_t> parse_widths(std::string_view key, std::string_view text) {
  std::vector<std::size_t> out;
  for (auto part : split_on(text, ',')) out.push_back(parse_value<std::size_t>(key, part));
  return out;
}

std::vector<double> parse_fields(std::string_view key, std::string_view item, std::size_t expected) {
  const auto parts = split_on(item, ':');
  if (parts.size() != expected) {
    throw ConfigError("key '" + std::string(key) + "' expects " + std::to_string(expected) +
                      " ':'-separated numbers per entry");
  }
  std::vector<double> out;
  for (auto p : parts) out.push_back(parse_value<double>(key, p));
  return out;
}

std::vector<ConfigKey> build_keys() {
  std::vector<ConfigKey> k;
  auto add = [&](std::string name, std::string help, auto set, auto get) {
    k.push_back(ConfigKey{std::move(name), std::move(help), set, get});
  };
#define VOPI_DOUBLE_KEY(name, field, help)                                                        \
  add(name, help, [](RunConfig& c, std::string_view v) { c.field = parse_value<double>(name, v); }, \
      [](const RunConfig& c) { return fmt(c.field); })
#define VOPI_SIZE_KEY(name, field, help)                                                               \
  add(name, help, [](RunConfig& c, std::string_view v) { c.field = parse_value<std::size_t>(name, v); }, \
      [](const RunConfig& c) { return std::to_string(c.field); })
#define VOPI_U64_KEY(name, field, help)                                                                  \
  add(name, help, [](RunConfig& c, std::string_view v) { c.field = parse_value<std::uint64_t>(name, v); }, \
      [](const RunConfig& c) { return std::to_string(c.field); })

  VOPI_DOUBLE_KEY("ncp", ncp, "nominal coverage probability 1 - beta");
  add("n", "action-space exponent; |A| = 2^n - 1",
      [](RunConfig& c, std::string_view v) { c.action_exponent = parse_value<int>("n", v); },
      [](const RunConfig& c) { return std::to_string(c.action_exponent); });
  VOPI_SIZE_KEY("epochs", epochs, "training epochs E");
  VOPI_SIZE_KEY("batch_size", batch_size, "batch size B for quantile models and agent");
  VOPI_DOUBLE_KEY("lr_qr", lr_qr, "quantile-model learning rate");
  VOPI_DOUBLE_KEY("lr_agent", lr_agent, "agent learning rate");
  VOPI_U64_KEY("seed", seed, "root seed for model init, batches and exploration");
  VOPI_SIZE_KEY("n_seeds", n_seeds, "seeds per sweep setting");
  add("data_csv", "CSV dataset path; empty uses the synthetic generator",
      [](RunConfig& c, std::string_view v) { c.data_csv = std::string(trim(v)); },
      [](const RunConfig& c) { return c.data_csv; });
  VOPI_SIZE_KEY("synthetic_samples", synthetic_samples, "synthetic dataset length (hours)");
  VOPI_U64_KEY("data_seed", data_seed, "synthetic dataset seed");
  VOPI_DOUBLE_KEY("load_mean", load_mean, "synthetic load mean, MW");
  VOPI_DOUBLE_KEY("load_amplitude", load_amplitude, "synthetic daily load swing, fraction of mean");
  add("capacity", "wind capacity P, MW (also the dispatch wind limit)",
      [](RunConfig& c, std::string_view v) {
        c.capacity = parse_value<double>("capacity", v);
        c.vpp.wind_capacity = c.capacity;
      },
      [](const RunConfig& c) { return fmt(c.capacity); });
  VOPI_DOUBLE_KEY("train_fraction", train_fraction, "chronological train share");
  add("generators", "DGs as capacity:a:b:c entries separated by ';'",
      [](RunConfig& c, std::string_view v) {
        c.vpp.generators.clear();
        for (auto item : split_on(v, ';')) {
          const auto f = parse_fields("generators", item, 4);
          c.vpp.generators.push_back(GeneratorParams{f[0], f[1], f[2], f[3]});
        }
      },
      [](const RunConfig& c) {
        return join(c.vpp.generators, ";", [](const GeneratorParams& g) {
          return fmt(g.capacity) + ":" + fmt(g.quadratic) + ":" + fmt(g.linear) + ":" + fmt(g.fixed);
        });
      });
  add("regulation", "regulation blocks as down_price:up_price:down_cap:up_cap entries separated by ';'",
      [](RunConfig& c, std::string_view v) {
        c.vpp.regulation.clear();
        for (auto item : split_on(v, ';')) {
          const auto f = parse_fields("regulation", item, 4);
          c.vpp.regulation.push_back(RegulationBlock{f[0], f[1], f[2], f[3]});
        }
      },
      [](const RunConfig& c) {
        return join(c.vpp.regulation, ";", [](const RegulationBlock& r) {
          return fmt(r.down_price) + ":" + fmt(r.up_price) + ":" + fmt(r.down_capacity) + ":" + fmt(r.up_capacity);
        });
      });
  add("baseline", "methods to run: comma list of proposed|central|naive|deterministic",
      [](RunConfig& c, std::string_view v) {
        c.methods.clear();
        for (auto item : split_on(v, ',')) {
          const BaselineKind kind = parse_baseline(item);
          if (std::find(c.methods.begin(), c.methods.end(), kind) == c.methods.end()) c.methods.push_back(kind);
        }
      },
      [](const RunConfig& c) { return join(c.methods, ",", [](BaselineKind b) { return std::string(to_string(b)); }); });
  add("output_dir", "run directory (relative paths go under $VOPI_OUTPUT_ROOT when set)",
      [](RunConfig& c, std::string_view v) { c.output_dir = std::string(trim(v)); },
      [](const RunConfig& c) { return c.output_dir; });
  add("qr_hidden", "quantile-network hidden widths, comma list",
      [](RunConfig& c, std::string_view v) { c.qr_hidden = parse_widths("qr_hidden", v); },
      [](const RunConfig& c) { return join(c.qr_hidden, ",", [](std::size_t w) { return std::to_string(w); }); });
  add("agent_hidden", "agent trunk hidden widths, comma list",
      [](RunConfig& c, std::string_view v) { c.agent_hidden = parse_widths("agent_hidden", v); },
      [](const RunConfig& c) { return join(c.agent_hidden, ",", [](std::size_t w) { return std::to_string(w); }); });
  VOPI_SIZE_KEY("qr_buffer", qr_buffer, "per-model replay capacity");
  VOPI_SIZE_KEY("agent_buffer", agent_buffer, "agent replay capacity");
  VOPI_DOUBLE_KEY("epsilon_start", epsilon_start, "initial exploration rate");
  VOPI_DOUBLE_KEY("epsilon_end", epsilon_end, "final exploration rate");
  VOPI_DOUBLE_KEY("epsilon_decay_fraction", epsilon_decay_fraction, "share of training steps spent decaying epsilon");
  add("normalize_rewards", "regress standardized rewards (shift/scale from a perfect-forecast pre-pass)",
      [](RunConfig& c, std::string_view v) { c.normalize_rewards = parse_bool("normalize_rewards", v); },
      [](const RunConfig& c) { return std::string(c.normalize_rewards ? "true" : "false"); });
  VOPI_SIZE_KEY("naive_window", naive_window, "persistence window, hours");
#undef VOPI_DOUBLE_KEY
#undef VOPI_SIZE_KEY
#undef VOPI_U64_KEY
  return k;
}

}  // namespace

bool RunConfig::enabled(BaselineKind kind) const {
  return std::find(methods.begin(), methods.end(), kind) != methods.end();
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  const auto& keys = config_keys();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
  if (it == keys.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->set(config, value);
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

std::vector<std::string> validate(const RunConfig& c) {
  if (!(c.ncp > 0.0 && c.ncp < 1.0)) throw ConfigError("ncp must lie in (0, 1)");
  if (c.action_exponent < 1 || c.action_exponent > 12) throw ConfigError("n must be in [1, 12]");
  if (c.epochs == 0) throw ConfigError("epochs must be at least 1");
  if (c.batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(c.lr_qr > 0.0) || !(c.lr_agent > 0.0)) throw ConfigError("learning rates must be positive");
  if (c.n_seeds == 0) throw ConfigError("n_seeds must be at least 1");
  if (c.data_csv.empty() && c.synthetic_samples < 2) throw ConfigError("synthetic_samples must be at least 2");
  if (!(c.capacity > 0.0)) throw ConfigError("capacity must be positive");
  if (c.vpp.wind_capacity != c.capacity) throw ConfigError("dispatch wind capacity must equal capacity");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (!(c.load_mean > 0.0) || !(c.load_amplitude >= 0.0 && c.load_amplitude < 1.0)) {
    throw ConfigError("load profile must have positive mean and amplitude in [0, 1)");
  }
  if (c.methods.empty()) throw ConfigError("baseline must name at least one method");
  if (c.qr_hidden.empty() || c.agent_hidden.empty()) throw ConfigError("hidden width lists must be non-empty");
  for (std::size_t w : c.qr_hidden) {
    if (w == 0) throw ConfigError("qr_hidden widths must be positive");
  }
  for (std::size_t w : c.agent_hidden) {
    if (w == 0) throw ConfigError("agent_hidden widths must be positive");
  }
  if (c.qr_buffer == 0 || c.agent_buffer == 0) throw ConfigError("buffer capacities must be positive");
  const auto in_unit = [](double e) { return e >= 0.0 && e <= 1.0; };
  if (!in_unit(c.epsilon_start) || !in_unit(c.epsilon_end) || !in_unit(c.epsilon_decay_fraction)) {
    throw ConfigError("epsilon schedule values must lie in [0, 1]");
  }
  if (c.naive_window < 2) throw ConfigError("naive_window must be at least 2");
  return c.vpp.validate();
}

std::filesystem::path resolve_output_dir(const RunConfig& config) {
  std::filesystem::path dir = config.output_dir;
  if (dir.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) return std::filesystem::path(root) / dir;
  }
  return dir;
}

}  // namespace vopi
