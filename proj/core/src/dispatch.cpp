#include "vopi/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "vopi/error.hpp"

namespace vopi {

namespace {

constexpr double kPowerTolerance = 1e-9;       // MW
constexpr double kGoldenTolerance = 1e-6;      // MW

std::string mw(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v << " MW";
  return s.str();
}

std::vector<std::size_t> merit_order(const std::vector<RegulationBlock>& blocks, bool down) {
  std::vector<std::size_t> order(blocks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (down) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return blocks[a].down_price > blocks[b].down_price; });
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return blocks[a].up_price < blocks[b].up_price; });
  }
  return order;
}

}  // namespace

VppConfig VppConfig::reference(double wind_capacity) {
  VppConfig c;
  c.generators = {GeneratorParams{70.0, 0.27, 40.0, 3.4}, GeneratorParams{60.0, 0.3, 26.5, 3.0}};
  c.regulation = {RegulationBlock{10.0, 100.0, 10.0, 10.0}, RegulationBlock{20.0, 200.0, 30.0, 30.0}};
  c.wind_capacity = wind_capacity;
  return c;
}

std::vector<std::string> VppConfig::validate() const {
  if (generators.empty()) throw ConfigError("VPP needs at least one generator");
  if (regulation.empty()) throw ConfigError("VPP needs at least one regulation block");
  if (!(wind_capacity > 0.0)) throw ConfigError("wind capacity must be positive");
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const auto& g = generators[i];
    if (!(g.quadratic > 0.0)) throw ConfigError("generator " + std::to_string(i + 1) + ": quadratic cost must be positive");
    if (!(g.capacity > 0.0)) throw ConfigError("generator " + std::to_string(i + 1) + ": capacity must be positive");
    if (!std::isfinite(g.linear) || !std::isfinite(g.fixed)) {
      throw ConfigError("generator " + std::to_string(i + 1) + ": costs must be finite");
    }
  }
  double min_up = std::numeric_limits<double>::infinity();
  double max_down = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < regulation.size(); ++i) {
    const auto& r = regulation[i];
    if (!(r.down_price >= 0.0 && r.up_price >= 0.0 && r.down_capacity >= 0.0 && r.up_capacity >= 0.0)) {
      throw ConfigError("regulation block " + std::to_string(i + 1) + ": prices and capacities must be >= 0");
    }
    min_up = std::min(min_up, r.up_price);
    max_down = std::max(max_down, r.down_price);
  }
  if (!(min_up > max_down)) {
    throw ConfigError("regulation prices violate no-arbitrage: min up price must exceed max down price");
  }
  std::vector<std::string> warnings;
  if (total_up_capacity() < wind_capacity) {
    warnings.push_back("total up-regulation capacity " + mw(total_up_capacity()) + " is below wind capacity " +
                       mw(wind_capacity));
  }
  if (total_down_capacity() < wind_capacity) {
    warnings.push_back("total down-regulation capacity " + mw(total_down_capacity()) +
                       " is below wind capacity " + mw(wind_capacity));
  }
  return warnings;
}

double VppConfig::generation_capacity() const {
  double s = 0.0;
  for (const auto& g : generators) s += g.capacity;
  return s;
}

double VppConfig::total_down_capacity() const {
  double s = 0.0;
  for (const auto& r : regulation) s += r.down_capacity;
  return s;
}

double VppConfig::total_up_capacity() const {
  double s = 0.0;
  for (const auto& r : regulation) s += r.up_capacity;
  return s;
}

EconomicDispatch economic_dispatch(const std::vector<GeneratorParams>& generators, double residual_load) {
  if (generators.empty()) throw ArgumentError("economic dispatch needs at least one generator");
  double capacity = 0.0;
  for (const auto& g : generators) capacity += g.capacity;
  if (!(residual_load >= -kPowerTolerance && residual_load <= capacity + kPowerTolerance)) {
    throw InfeasibleError("residual load " + mw(residual_load) + " outside generation range [0, " + mw(capacity) + "]");
  }
  residual_load = std::clamp(residual_load, 0.0, capacity);

  auto output_at = [&](double lambda, std::vector<double>& x) {
    double total = 0.0;
    for (std::size_t i = 0; i < generators.size(); ++i) {
      const auto& g = generators[i];
      x[i] = std::clamp((lambda - g.linear) / g.quadratic, 0.0, g.capacity);
      total += x[i];
    }
    return total;
  };

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& g : generators) {
    lo = std::min(lo, g.linear);
    hi = std::max(hi, g.linear + g.quadratic * g.capacity);
  }

  EconomicDispatch out;
  out.x.assign(generators.size(), 0.0);
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (output_at(mid, out.x) < residual_load) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.marginal_price = residual_load <= 0.0 ? lo : hi;
  output_at(out.marginal_price, out.x);

  // Absorb the bisection residue so the balance holds to rounding.
  double mismatch = residual_load - std::accumulate(out.x.begin(), out.x.end(), 0.0);
  for (std::size_t i = 0; i < generators.size() && mismatch != 0.0; ++i) {
    const double room = mismatch > 0.0 ? generators[i].capacity - out.x[i] : out.x[i];
    const double shift = std::copysign(std::min(std::abs(mismatch), room), mismatch);
    out.x[i] += shift;
    mismatch -= shift;
  }

  for (std::size_t i = 0; i < generators.size(); ++i) out.cost += generators[i].cost(out.x[i]);
  return out;
}

RealTimeSolution settle_deviation(const std::vector<RegulationBlock>& blocks, double deviation) {
  if (blocks.empty()) throw ArgumentError("settlement needs at least one regulation block");
  if (!std::isfinite(deviation)) throw ArgumentError("deviation must be finite");
  RealTimeSolution sol;
  sol.z_down.assign(blocks.size(), 0.0);
  sol.z_up.assign(blocks.size(), 0.0);
  if (deviation == 0.0) return sol;

  const bool surplus = deviation > 0.0;
  double remaining = std::abs(deviation);
  double available = 0.0;
  for (const auto& b : blocks) available += surplus ? b.down_capacity : b.up_capacity;
  if (remaining > available + kPowerTolerance) {
    throw InfeasibleError(std::string(surplus ? "down" : "up") + "-regulation capacity " + mw(available) +
                          " cannot settle a " + (surplus ? "surplus" : "deficit") + " of " + mw(remaining));
  }

  for (std::size_t i : merit_order(blocks, surplus)) {
    if (remaining <= 0.0) break;
    const double cap = surplus ? blocks[i].down_capacity : blocks[i].up_capacity;
    const double take = std::min(remaining, cap);
    if (surplus) {
      sol.z_down[i] = take;
      sol.cost -= blocks[i].down_price * take;
    } else {
      sol.z_up[i] = take;
      sol.cost += blocks[i].up_price * take;
    }
    remaining -= take;
  }
  return sol;
}

Recourse worst_case_recourse(const std::vector<RegulationBlock>& blocks, const PredictionInterval& interval,
                             double p) {
  if (!(interval.lower <= interval.upper)) throw ArgumentError("interval lower bound exceeds upper bound");
  const double at_lower = settle_deviation(blocks, interval.lower - p).cost;
  const double at_upper = settle_deviation(blocks, interval.upper - p).cost;
  if (at_upper > at_lower) return Recourse{at_upper, interval.upper};
  return Recourse{at_lower, interval.lower};
}

ScheduleRange feasible_schedule_range(const VppConfig& config, const PredictionInterval& interval, double load) {
  if (!(load >= 0.0) || !std::isfinite(load)) throw ArgumentError("load must be finite and non-negative");
  if (!(interval.lower <= interval.upper)) throw ArgumentError("interval lower bound exceeds upper bound");
  ScheduleRange r;
  r.lo = std::max({0.0, load - config.generation_capacity(), interval.upper - config.total_down_capacity()});
  r.hi = std::min({config.wind_capacity, load, interval.lower + config.total_up_capacity()});
  if (r.lo > r.hi + kPowerTolerance) {
    throw InfeasibleError("no feasible wind schedule: need p in [" + mw(r.lo) + ", " + mw(r.hi) + "]");
  }
  r.hi = std::max(r.hi, r.lo);
  return r;
}

double day_ahead_objective(const VppConfig& config, const PredictionInterval& interval, double load, double p) {
  return economic_dispatch(config.generators, load - p).cost +
         worst_case_recourse(config.regulation, interval, p).cost;
}

DayAheadSolution solve_day_ahead(const VppConfig& config, const PredictionInterval& interval, double load) {
  const ScheduleRange range = feasible_schedule_range(config, interval, load);
  auto objective = [&](double p) { return day_ahead_objective(config, interval, load, p); };

  std::vector<double> candidates{range.lo, range.hi};
  if (range.hi > range.lo) {
    candidates.push_back(golden_section_minimize(objective, range.lo, range.hi, kGoldenTolerance));
  }
  // Kinks of the piecewise-linear recourse: w - p at zero and at each
  // cumulative merit-order capacity.
  for (const double w : {interval.lower, interval.upper}) {
    candidates.push_back(w);
    double cumulative = 0.0;
    for (std::size_t i : merit_order(config.regulation, true)) {
      cumulative += config.regulation[i].down_capacity;
      candidates.push_back(w - cumulative);
    }
    cumulative = 0.0;
    for (std::size_t i : merit_order(config.regulation, false)) {
      cumulative += config.regulation[i].up_capacity;
      candidates.push_back(w + cumulative);
    }
  }

  double best_p = range.lo;
  double best = objective(range.lo);
  for (double p : candidates) {
    if (p < range.lo || p > range.hi) continue;
    const double v = objective(p);
    if (v < best - 1e-12 || (std::abs(v - best) <= 1e-12 && p < best_p)) {
      best = v;
      best_p = p;
    }
  }

  const EconomicDispatch ed = economic_dispatch(config.generators, load - best_p);
  const Recourse rec = worst_case_recourse(config.regulation, interval, best_p);
  DayAheadSolution sol;
  sol.x = ed.x;
  sol.p = best_p;
  sol.da_cost = ed.cost;
  sol.marginal_price = ed.marginal_price;
  sol.worst_case_recourse = rec.cost;
  sol.worst_case_w = rec.worst_w;
  return sol;
}

MonetaryScore monetary_score(const VppConfig& config, const PredictionInterval& interval, double load,
                             double realization) {
  if (!(realization >= -kPowerTolerance && realization <= config.wind_capacity + kPowerTolerance)) {
    throw ArgumentError("realization " + mw(realization) + " outside [0, wind capacity]");
  }
  MonetaryScore s;
  s.day_ahead = solve_day_ahead(config, interval, load);
  s.real_time = settle_deviation(config.regulation, realization - s.day_ahead.p);
  s.da = s.day_ahead.da_cost;
  s.rt = s.real_time.cost;
  s.score = s.da + s.rt;
  return s;
}

}  // namespace vopi
