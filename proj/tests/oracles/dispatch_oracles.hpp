#pragma once

// Brute-force reference solvers for the dispatch problems. They share no code
// with the library solvers beyond the parameter structs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "vopi/dispatch.hpp"

namespace oracle {

struct EdResult {
  std::vector<double> x;
  double cost = std::numeric_limits<double>::infinity();
};

inline double generation_cost(const std::vector<vopi::GeneratorParams>& g, const std::vector<double>& x) {
  double c = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) c += 0.5 * g[i].quadratic * x[i] * x[i] + g[i].linear * x[i] + g[i].fixed;
  return c;
}

// Active-set enumeration: every unit is at 0, at capacity, or free with a
// shared marginal price. The optimum of the convex program is one of the
// feasible candidates.
inline std::optional<EdResult> ed_active_sets(const std::vector<vopi::GeneratorParams>& g, double load) {
  const std::size_t n = g.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= 3;
  std::optional<EdResult> best;
  for (std::size_t code = 0; code < combos; ++code) {
    std::vector<int> state(n);
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= 3) state[i] = static_cast<int>(c % 3);
    std::vector<double> x(n, 0.0);
    double fixed_sum = 0.0, inv_a = 0.0, b_over_a = 0.0;
    bool any_free = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] == 1) x[i] = g[i].capacity;
      if (state[i] == 2) {
        any_free = true;
        inv_a += 1.0 / g[i].quadratic;
        b_over_a += g[i].linear / g[i].quadratic;
      } else {
        fixed_sum += x[i];
      }
    }
    if (any_free) {
      const double lambda = (load - fixed_sum + b_over_a) / inv_a;
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (state[i] != 2) continue;
        x[i] = (lambda - g[i].linear) / g[i].quadratic;
        if (x[i] < -1e-12 || x[i] > g[i].capacity + 1e-12) ok = false;
      }
      if (!ok) continue;
    } else if (std::abs(fixed_sum - load) > 1e-9) {
      continue;
    }
    const double cost = generation_cost(g, x);
    if (!best || cost < best->cost) best = EdResult{x, cost};
  }
  return best;
}

// Scans x1 on a grid for a two-unit fleet.
inline EdResult ed_grid(const std::vector<vopi::GeneratorParams>& g, double load, double step) {
  EdResult best;
  const double lo = std::max(0.0, load - g[1].capacity);
  const double hi = std::min(g[0].capacity, load);
  const long steps = std::lround((hi - lo) / step);
  for (long k = 0; k <= steps; ++k) {
    const double x1 = std::min(hi, lo + static_cast<double>(k) * step);
    const std::vector<double> x = {x1, load - x1};
    const double c = generation_cost(g, x);
    if (c < best.cost) best = EdResult{x, c};
  }
  return best;
}

struct SettleResult {
  std::vector<double> down, up;
  double cost = std::numeric_limits<double>::infinity();
};

inline double settle_cost(const std::vector<vopi::RegulationBlock>& b, const std::vector<double>& down,
                          const std::vector<double>& up) {
  double c = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) c += -b[i].down_price * down[i] + b[i].up_price * up[i];
  return c;
}

// Exhaustive LP vertex enumeration of
//   min sum -cD zD + cU zU  s.t.  sum zU - sum zD = -deviation, boxes.
// Vertices of a box cut by one hyperplane have all but at most one variable
// at a bound.
inline std::optional<SettleResult> settle_vertices(const std::vector<vopi::RegulationBlock>& b, double deviation) {
  const std::size_t n = b.size();
  const std::size_t m = 2 * n;  // variables: down[0..n), up[0..n)
  std::vector<double> cap(m), coef(m), price(m);
  for (std::size_t i = 0; i < n; ++i) {
    cap[i] = b[i].down_capacity;
    coef[i] = -1.0;
    price[i] = -b[i].down_price;
    cap[n + i] = b[i].up_capacity;
    coef[n + i] = 1.0;
    price[n + i] = b[i].up_price;
  }
  const double rhs = -deviation;
  std::optional<SettleResult> best;
  auto consider = [&](const std::vector<double>& z) {
    double c = 0.0;
    for (std::size_t j = 0; j < m; ++j) c += price[j] * z[j];
    if (!best || c < best->cost - 1e-12) {
      best = SettleResult{std::vector<double>(z.begin(), z.begin() + n), std::vector<double>(z.begin() + n, z.end()),
                          c};
    }
  };
  for (std::size_t free_var = 0; free_var <= m; ++free_var) {  // m means none free
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      std::vector<double> z(m);
      double sum = 0.0;
      bool valid = true;
      for (std::size_t j = 0; j < m; ++j) {
        if (j == free_var) {
          if (mask >> j & 1U) valid = false;  // count each vertex once
          continue;
        }
        z[j] = (mask >> j & 1U) ? cap[j] : 0.0;
        sum += coef[j] * z[j];
      }
      if (!valid) continue;
      if (free_var == m) {
        if (std::abs(sum - rhs) > 1e-9) continue;
      } else {
        z[free_var] = (rhs - sum) / coef[free_var];
        if (z[free_var] < -1e-12 || z[free_var] > cap[free_var] + 1e-12) continue;
      }
      consider(z);
    }
  }
  return best;
}

// Grid search over three of the four block outputs, the fourth from balance.
// Only for the two-block reference layout.
inline SettleResult settle_grid(const std::vector<vopi::RegulationBlock>& b, double deviation, double step) {
  SettleResult best;
  auto count = [step](double cap) { return std::lround(cap / step); };
  for (long i = 0; i <= count(b[0].down_capacity); ++i) {
    for (long j = 0; j <= count(b[1].down_capacity); ++j) {
      for (long k = 0; k <= count(b[0].up_capacity); ++k) {
        const std::vector<double> down = {i * step, j * step};
        const double u1 = k * step;
        const double u2 = -deviation + down[0] + down[1] - u1;
        if (u2 < -1e-9 || u2 > b[1].up_capacity + 1e-9) continue;
        const std::vector<double> up = {u1, u2};
        const double c = settle_cost(b, down, up);
        if (c < best.cost) best = SettleResult{down, up, c};
      }
    }
  }
  return best;
}

// Worst case over a uniform grid of w values in [lo, hi].
inline double recourse_wgrid(const std::vector<vopi::RegulationBlock>& b, double lo, double hi, double p,
                             int points) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < points; ++k) {
    const double w = points == 1 ? lo : lo + (hi - lo) * k / (points - 1);
    const auto s = settle_vertices(b, w - p);
    if (!s) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, s->cost);
  }
  return worst;
}

struct DayAheadResult {
  double p = 0.0;
  double objective = std::numeric_limits<double>::infinity();
};

// p on a uniform grid over [0, min(P, load)]; infeasible points skipped. The
// worst case is taken over the two interval endpoints.
inline DayAheadResult day_ahead_grid(const vopi::VppConfig& c, double lo, double hi, double load, double step) {
  DayAheadResult best;
  const double top = std::min(c.wind_capacity, load);
  const long steps = std::lround(top / step);
  for (long k = 0; k <= steps; ++k) {
    const double p = std::min(top, static_cast<double>(k) * step);
    const auto ed = ed_active_sets(c.generators, load - p);
    if (!ed) continue;
    const auto s_lo = settle_vertices(c.regulation, lo - p);
    const auto s_hi = settle_vertices(c.regulation, hi - p);
    if (!s_lo || !s_hi) continue;
    const double obj = ed->cost + std::max(s_lo->cost, s_hi->cost);
    if (obj < best.objective) best = DayAheadResult{p, obj};
  }
  return best;
}

}  // namespace oracle
