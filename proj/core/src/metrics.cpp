#include "vopi/metrics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vopi/error.hpp"

namespace vopi {

namespace {

constexpr const char* kSampleHeader =
    "timestamp,action,lower,upper,realization,load,schedule,winkler,width,covered,monetary,monetary_da,monetary_rt";

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double field_double(const std::string& s, std::size_t row) {
  double v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(row, "bad number '" + s + "'");
  return v;
}

long long field_int(const std::string& s, std::size_t row) {
  long long v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(row, "bad integer '" + s + "'");
  return v;
}

}  // namespace

double winkler(const PredictionInterval& interval, double y, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("beta must lie in (0, 1)");
  double score = interval.upper - interval.lower;
  if (y < interval.lower) score += 2.0 / beta * (interval.lower - y);
  if (y > interval.upper) score += 2.0 / beta * (y - interval.upper);
  return score;
}

double acd(std::span<const PredictionInterval> intervals, std::span<const double> realizations, double ncp) {
  if (intervals.size() != realizations.size()) throw ArgumentError("interval and realization counts differ");
  if (intervals.empty()) throw ArgumentError("coverage needs at least one sample");
  std::size_t covered = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) covered += intervals[i].covers(realizations[i]) ? 1 : 0;
  const double coverage = static_cast<double>(covered) / static_cast<double>(intervals.size());
  return (coverage - ncp) * 100.0;
}

EvaluationReport summarize(std::vector<SampleRecord> records, double ncp, std::string method) {
  EvaluationReport r;
  r.method = std::move(method);
  r.ncp = ncp;
  if (!records.empty()) {
    std::size_t covered = 0;
    for (const auto& s : records) {
      r.winkler_avg += s.winkler;
      r.width_avg += s.width;
      r.monetary_avg += s.monetary;
      r.monetary_da_avg += s.monetary_da;
      r.monetary_rt_avg += s.monetary_rt;
      covered += s.covered ? 1 : 0;
    }
    const double n = static_cast<double>(records.size());
    r.winkler_avg /= n;
    r.width_avg /= n;
    r.monetary_avg /= n;
    r.monetary_da_avg /= n;
    r.monetary_rt_avg /= n;
    r.acd = (static_cast<double>(covered) / n - ncp) * 100.0;
  }
  r.records = std::move(records);
  return r;
}

EvaluationReport evaluate(const Forecaster& forecaster, const Dataset& dataset, const VppConfig& config, double ncp,
                          std::string method) {
  if (!(ncp > 0.0 && ncp < 1.0)) throw ArgumentError("ncp must lie in (0, 1)");
  const double beta = 1.0 - ncp;
  std::vector<SampleRecord> records;
  records.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const PowerSample& s = dataset[i];
    const Forecast f = forecaster(i);
    SampleRecord rec;
    rec.timestamp = s.timestamp;
    rec.action = f.action;
    rec.lower = f.interval.lower;
    rec.upper = f.interval.upper;
    rec.realization = s.power;
    rec.load = s.load;
    rec.winkler = winkler(f.interval, s.power, beta);
    rec.width = f.interval.width();
    rec.covered = f.interval.covers(s.power);
    try {
      const MonetaryScore m = monetary_score(config, f.interval, s.load, s.power);
      rec.schedule = m.day_ahead.p;
      rec.monetary = m.score;
      rec.monetary_da = m.da;
      rec.monetary_rt = m.rt;
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("sample at timestamp " + std::to_string(s.timestamp) + ": " + e.what());
    }
    records.push_back(rec);
  }
  return summarize(std::move(records), ncp, std::move(method));
}

void write_samples_csv(const EvaluationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << kSampleHeader << '\n';
  for (const auto& s : report.records) {
    out << s.timestamp << ',' << s.action << ',' << fmt(s.lower) << ',' << fmt(s.upper) << ','
        << fmt(s.realization) << ',' << fmt(s.load) << ',' << fmt(s.schedule) << ',' << fmt(s.winkler) << ','
        << fmt(s.width) << ',' << (s.covered ? 1 : 0) << ',' << fmt(s.monetary) << ',' << fmt(s.monetary_da) << ','
        << fmt(s.monetary_rt) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<SampleRecord> read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSampleHeader) {
    throw IoError(path.string() + ": not a per-sample evaluation file");
  }
  std::vector<SampleRecord> records;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 13) throw ParseError(row, "expected 13 fields");
    SampleRecord s;
    s.timestamp = field_int(f[0], row);
    s.action = static_cast<int>(field_int(f[1], row));
    s.lower = field_double(f[2], row);
    s.upper = field_double(f[3], row);
    s.realization = field_double(f[4], row);
    s.load = field_double(f[5], row);
    s.schedule = field_double(f[6], row);
    s.winkler = field_double(f[7], row);
    s.width = field_double(f[8], row);
    s.covered = field_int(f[9], row) != 0;
    s.monetary = field_double(f[10], row);
    s.monetary_da = field_double(f[11], row);
    s.monetary_rt = field_double(f[12], row);
    records.push_back(s);
  }
  return records;
}

}  // namespace vopi
