#pragma once

#include <string>
#include <vector>

#include "vopi/quantile.hpp"

namespace vopi {

// Quadratic-cost dispatchable generator: cost(x) = a/2 x^2 + b x + c.
struct GeneratorParams {
  double capacity = 0.0;      // MW
  double quadratic = 0.0;     // a, $/MW^2
  double linear = 0.0;        // b, $/MW
  double fixed = 0.0;         // c, $

  double cost(double x) const { return 0.5 * quadratic * x * x + linear * x + fixed; }
};

// One real-time regulation block. Down-regulation absorbs surplus wind and
// earns down_price per MW; up-regulation covers a deficit at up_price per MW.
struct RegulationBlock {
  double down_price = 0.0;     // c_D, $/MW
  double up_price = 0.0;       // c_U, $/MW
  double down_capacity = 0.0;  // MW
  double up_capacity = 0.0;    // MW
};

struct VppConfig {
  std::vector<GeneratorParams> generators;
  std::vector<RegulationBlock> regulation;
  double wind_capacity = 30.0;  // P, MW

  // Two DGs and two regulation blocks with the reference cost data.
  static VppConfig reference(double wind_capacity = 30.0);

  // Throws ConfigError on non-positive a or capacity, negative prices or
  // capacities, or when min up price <= max down price (the merit-order
  // settlement and endpoint recourse would be unsound). Returns warnings
  // for regulation capacity smaller than the wind capacity.
  std::vector<std::string> validate() const;

  double generation_capacity() const;
  double total_down_capacity() const;
  double total_up_capacity() const;
};

struct EconomicDispatch {
  std::vector<double> x;       // MW per generator
  double marginal_price = 0.0; // lambda, $/MW
  double cost = 0.0;           // $, fixed costs included
};

struct RealTimeSolution {
  std::vector<double> z_down;  // MW per block
  std::vector<double> z_up;    // MW per block
  double cost = 0.0;           // $
};

struct Recourse {
  double cost = 0.0;    // worst-case settlement cost, $
  double worst_w = 0.0; // interval endpoint attaining it, MW
};

struct DayAheadSolution {
  std::vector<double> x;           // MW per generator
  double p = 0.0;                  // scheduled wind, MW
  double da_cost = 0.0;            // generation cost, $
  double worst_case_recourse = 0.0;
  double worst_case_w = 0.0;
  double marginal_price = 0.0;

  double objective() const { return da_cost + worst_case_recourse; }
};

struct MonetaryScore {
  double score = 0.0;  // da + rt, $
  double da = 0.0;
  double rt = 0.0;
  DayAheadSolution day_ahead;
  RealTimeSolution real_time;

  double reward() const { return -score; }
};

// Minimizes sum a_i/2 x_i^2 + b_i x_i + c_i s.t. sum x_i = residual_load and
// 0 <= x_i <= capacity_i, by bisection on the marginal price.
EconomicDispatch economic_dispatch(const std::vector<GeneratorParams>& generators, double residual_load);

// Settles deviation = wind - schedule with merit-order regulation.
RealTimeSolution settle_deviation(const std::vector<RegulationBlock>& blocks, double deviation);

// Worst settlement over w in [interval.lower, interval.upper] for schedule p.
Recourse worst_case_recourse(const std::vector<RegulationBlock>& blocks, const PredictionInterval& interval,
                             double p);

// Feasible wind schedules for the robust day-ahead problem, [lo, hi].
struct ScheduleRange {
  double lo = 0.0;
  double hi = 0.0;
};
ScheduleRange feasible_schedule_range(const VppConfig& config, const PredictionInterval& interval, double load);

// Day-ahead objective for a fixed wind schedule p.
double day_ahead_objective(const VppConfig& config, const PredictionInterval& interval, double load, double p);

DayAheadSolution solve_day_ahead(const VppConfig& config, const PredictionInterval& interval, double load);

MonetaryScore monetary_score(const VppConfig& config, const PredictionInterval& interval, double load,
                             double realization);

// Golden-section minimization of a unimodal function on [lo, hi].
template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double tolerance);

}  // namespace vopi

#include "vopi/detail/golden_section.ipp"
