#pragma once

// Planner test helpers: hand-built lattice primitives and an exhaustive
// shortest-path oracle that shares nothing with the A* implementation beyond
// the collision predicate.

#include <limits>
#include <vector>

#include "marex/planner.hpp"

namespace marex::testing {

inline std::pair<int, int> rot(int x, int y, int q) {
  switch (((q % 4) + 4) % 4) {
    case 1: return {-y, x};
    case 2: return {-x, -y};
    case 3: return {y, -x};
    default: return {x, y};
  }
}

inline Box rot(const Box& b, int q) {
  double xs[2] = {b.min_x, b.max_x};
  double ys[2] = {b.min_y, b.max_y};
  double nx[2], ny[2];
  for (int i = 0; i < 2; ++i) {
    switch (((q % 4) + 4) % 4) {
      case 1: nx[i] = -ys[i]; ny[i] = xs[i]; break;
      case 2: nx[i] = -xs[i]; ny[i] = -ys[i]; break;
      case 3: nx[i] = ys[i]; ny[i] = -xs[i]; break;
      default: nx[i] = xs[i]; ny[i] = ys[i]; break;
    }
  }
  return Box{std::min(nx[0], nx[1]), std::min(ny[0], ny[1]), std::max(nx[0], nx[1]),
             std::max(ny[0], ny[1])};
}

// Straight-line motion covering the segment from the start cell to the
// displaced cell, swept box inflated by `margin` meters.
inline MotionPrimitive line_primitive(int id, int slot, int dx, int dy, int dh, double cost,
                                      double cell_size, double margin) {
  MotionPrimitive mp;
  mp.id = id;
  mp.counter_slot = slot;
  mp.library_id = slot >= 0 ? 100 + slot : -1;
  mp.label = slot >= 0 ? "informative" : "basic";
  mp.cost = cost;
  mp.per_heading.resize(4);
  const Box base{std::min(0.0, dx * cell_size) - margin, std::min(0.0, dy * cell_size) - margin,
                 std::max(0.0, dx * cell_size) + margin, std::max(0.0, dy * cell_size) + margin};
  for (int h = 0; h < 4; ++h) {
    const auto [rx, ry] = rot(dx, dy, h);
    mp.per_heading[h].dx = rx;
    mp.per_heading[h].dy = ry;
    mp.per_heading[h].dh = dh;
    mp.per_heading[h].swept = {rot(base, h)};
  }
  return mp;
}

inline std::vector<MotionPrimitive> basic_moves(double cell_size, double margin, double l_bar,
                                                int first_id) {
  std::vector<MotionPrimitive> out;
  out.push_back(line_primitive(first_id, -1, 1, 0, 0, l_bar, cell_size, margin));
  out.push_back(line_primitive(first_id + 1, -1, 0, 0, 1, l_bar, cell_size, margin));
  out.push_back(line_primitive(first_id + 2, -1, 0, 0, -1, l_bar, cell_size, margin));
  return out;
}

// Exhaustive relaxation over the full augmented state space; returns the
// optimal cost to the goal or infinity.
inline double exhaustive_cost(const PlannerProblem& problem,
                              const std::vector<MotionPrimitive>& primitives) {
  const auto& map = problem.map;
  const std::size_t slots = problem.required_counters.size();
  std::vector<long> radix(slots);
  long counter_states = 1;
  for (std::size_t q = 0; q < slots; ++q) {
    radix[q] = problem.required_counters[q] + 1;
    counter_states *= radix[q];
  }
  const long total = static_cast<long>(map.width) * map.height * 4 * counter_states;

  auto index_of = [&](int cx, int cy, int h, const std::vector<int>& counters) {
    long idx = (static_cast<long>(cy) * map.width + cx) * 4 + h;
    for (std::size_t q = 0; q < slots; ++q) idx = idx * radix[q] + counters[q];
    return idx;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(total, inf);
  std::vector<int> counters(slots, 0);
  dist[index_of(problem.start_cx, problem.start_cy, problem.start_h, counters)] = 0.0;

  // Bellman-Ford style sweeps until stable; zero-cost edges converge too.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int cy = 0; cy < map.height; ++cy) {
      for (int cx = 0; cx < map.width; ++cx) {
        for (int h = 0; h < 4; ++h) {
          for (long c = 0; c < counter_states; ++c) {
            long rem = c;
            for (std::size_t q = slots; q-- > 0;) {
              counters[q] = static_cast<int>(rem % radix[q]);
              rem /= radix[q];
            }
            const long from = index_of(cx, cy, h, counters);
            if (dist[from] == inf) continue;
            for (const auto& prim : primitives) {
              std::vector<int> next_counters = counters;
              if (prim.informative()) {
                if (counters[prim.counter_slot] >= problem.required_counters[prim.counter_slot]) {
                  continue;
                }
                next_counters[prim.counter_slot] += 1;
              }
              const auto& m = prim.per_heading[h];
              const int nx = cx + m.dx;
              const int ny = cy + m.dy;
              const int nh = ((h + m.dh) % 4 + 4) % 4;
              if (!map.in_bounds(nx, ny)) continue;
              LatticeState state{cx, cy, h, counters};
              if (!collision_check(prim, state, map)) continue;
              const long to = index_of(nx, ny, nh, next_counters);
              if (dist[from] + prim.cost < dist[to]) {
                dist[to] = dist[from] + prim.cost;
                changed = true;
              }
            }
          }
        }
      }
    }
  }

  std::vector<int> goal_counters = problem.required_counters;
  return dist[index_of(problem.goal_cx, problem.goal_cy, problem.goal_h, goal_counters)];
}

// Walks a returned plan and re-verifies every invariant it promises.
inline void verify_plan(const Plan& plan, const PlannerProblem& problem,
                        const std::vector<MotionPrimitive>& primitives, double l_bar) {
  if (plan.states.empty()) throw std::runtime_error("plan has no states");
  const auto& start = plan.states.front();
  if (start.cx != problem.start_cx || start.cy != problem.start_cy || start.h != problem.start_h) {
    throw std::runtime_error("plan does not start at the start state");
  }
  for (int c : start.counters) {
    if (c != 0) throw std::runtime_error("start counters not zero");
  }

  int basics = 0;
  for (std::size_t i = 0; i < plan.primitive_ids.size(); ++i) {
    const auto& prim = primitives.at(plan.primitive_ids[i]);
    const auto& from = plan.states[i];
    const auto& to = plan.states[i + 1];
    if (!collision_check(prim, from, problem.map)) {
      throw std::runtime_error("plan step collides");
    }
    const auto& m = prim.per_heading[from.h];
    if (to.cx != from.cx + m.dx || to.cy != from.cy + m.dy ||
        to.h != ((from.h + m.dh) % 4 + 4) % 4) {
      throw std::runtime_error("states not linked by the declared delta");
    }
    std::vector<int> expect = from.counters;
    if (prim.informative()) {
      expect[prim.counter_slot] += 1;
    } else {
      ++basics;
    }
    if (expect != to.counters) throw std::runtime_error("counter update wrong");
  }

  const auto& goal = plan.states.back();
  if (goal.cx != problem.goal_cx || goal.cy != problem.goal_cy || goal.h != problem.goal_h) {
    throw std::runtime_error("plan does not end at the goal");
  }
  if (goal.counters != problem.required_counters) {
    throw std::runtime_error("final counters do not match the requirement");
  }
  if (plan.total_cost != basics * l_bar) {
    throw std::runtime_error("cost is not l_bar times the basic count");
  }
}

}  // namespace marex::testing
