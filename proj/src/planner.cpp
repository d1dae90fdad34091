#include "marex/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>

#include "marex/errors.hpp"

namespace marex {

OccupancyMap OccupancyMap::open(int width, int height, double cell_size) {
  OccupancyMap map;
  map.width = width;
  map.height = height;
  map.cell_size = cell_size;
  map.cells.assign(static_cast<std::size_t>(width) * height, 0);
  return map;
}

namespace {

// Rotate a planar point by quarter turns.
std::pair<double, double> rotate_quarter(double x, double y, int quarters) {
  switch (((quarters % 4) + 4) % 4) {
    case 1: return {-y, x};
    case 2: return {-x, -y};
    case 3: return {y, -x};
    default: return {x, y};
  }
}

std::pair<int, int> rotate_quarter(int x, int y, int quarters) {
  switch (((quarters % 4) + 4) % 4) {
    case 1: return {-y, x};
    case 2: return {-x, -y};
    case 3: return {y, -x};
    default: return {x, y};
  }
}

Box rotate_box(const Box& b, int quarters) {
  const auto [x1, y1] = rotate_quarter(b.min_x, b.min_y, quarters);
  const auto [x2, y2] = rotate_quarter(b.max_x, b.max_y, quarters);
  return Box{std::min(x1, x2), std::min(y1, y2), std::max(x1, x2), std::max(y1, y2)};
}

// Axis-aligned boxes covering a planar path, split into chunks, inflated by
// a margin. Positions are relative to the start pose.
std::vector<Box> sweep_boxes(const std::vector<std::pair<double, double>>& path, int chunk,
                             double margin) {
  std::vector<Box> boxes;
  if (path.empty()) return boxes;
  std::size_t begin = 0;
  while (begin + 1 < path.size() || boxes.empty()) {
    const std::size_t end = std::min(path.size() - 1, begin + static_cast<std::size_t>(chunk));
    Box b{path[begin].first, path[begin].second, path[begin].first, path[begin].second};
    for (std::size_t i = begin; i <= end; ++i) {
      b.min_x = std::min(b.min_x, path[i].first);
      b.min_y = std::min(b.min_y, path[i].second);
      b.max_x = std::max(b.max_x, path[i].first);
      b.max_y = std::max(b.max_y, path[i].second);
    }
    b.min_x -= margin;
    b.min_y -= margin;
    b.max_x += margin;
    b.max_y += margin;
    boxes.push_back(b);
    if (end == path.size() - 1) break;
    begin = end;
  }
  return boxes;
}

// Per-heading deltas and boxes from the heading-0 geometry.
std::vector<HeadingMotion> expand_headings(int dx, int dy, int dh, const std::vector<Box>& swept,
                                           int headings) {
  std::vector<HeadingMotion> out(headings);
  for (int h = 0; h < headings; ++h) {
    const auto [rx, ry] = rotate_quarter(dx, dy, h);
    out[h].dx = rx;
    out[h].dy = ry;
    out[h].dh = dh;
    out[h].swept.reserve(swept.size());
    for (const auto& b : swept) out[h].swept.push_back(rotate_box(b, h));
  }
  return out;
}

std::vector<std::pair<double, double>> trajectory_path(const std::vector<BodyVelocity>& states,
                                                       double dt) {
  std::vector<std::pair<double, double>> path;
  path.reserve(states.size() + 1);
  Pose pose;
  path.emplace_back(pose.x, pose.y);
  for (const auto& vel : states) {
    pose = kinematics_step(pose, vel, dt);
    path.emplace_back(pose.x, pose.y);
  }
  return path;
}

MotionPrimitive make_informative(int id, int slot, const ExperimentPrimitive& lib_prim,
                                 int segment_length, const LatticeConfig& config, double dt) {
  if (segment_length > lib_prim.duration) {
    throw ConfigError("segment length " + std::to_string(segment_length) +
                      " exceeds the duration of primitive " + std::to_string(lib_prim.id));
  }
  const int window = lib_prim.duration - segment_length;
  const std::vector<BodyVelocity> segment(lib_prim.expected_trajectory.begin() + window,
                                          lib_prim.expected_trajectory.end());

  const Pose delta = displacement_summary(segment, dt);
  const double cs = config.cell_size;
  const int dxc = static_cast<int>(std::lround(delta.x / cs));
  const int dyc = static_cast<int>(std::lround(delta.y / cs));
  const int dh = static_cast<int>(std::lround(delta.psi / (M_PI / 2.0)));
  if (dxc == 0 && dyc == 0 && dh == 0 && std::abs(delta.x) < 0.5 * cs &&
      std::abs(delta.y) < 0.5 * cs && std::abs(delta.psi) < M_PI / 4.0) {
    throw Error(Stage::Planning,
                "primitive " + std::to_string(lib_prim.id) +
                    " displaces less than half a cell in every coordinate and cannot be "
                    "represented on the lattice");
  }

  MotionPrimitive mp;
  mp.id = id;
  mp.label = lib_prim.label + "-segment";
  mp.counter_slot = slot;
  mp.library_id = lib_prim.id;
  mp.cost = 0.0;
  mp.input_signal.assign(lib_prim.input_signal.begin() + window, lib_prim.input_signal.end());
  mp.initial_state = lib_prim.expected_trajectory[window];
  const auto swept =
      sweep_boxes(trajectory_path(segment, dt), config.box_chunk, config.inflation_cells * cs);
  mp.per_heading = expand_headings(dxc, dyc, dh, swept, config.headings);
  return mp;
}

MotionPrimitive make_straight(int id, const BasicMotionSpecs& basics, const LatticeConfig& config,
                              const VesselParams& params, double dt) {
  const double cs = config.cell_size;
  const int samples = std::max(1, static_cast<int>(std::lround(cs / (basics.cruise_speed * dt))));
  const double speed = cs / (samples * dt);

  // Constant force balancing the damping keeps the speed exact.
  const double tau1 = -(params.x_u * speed + params.x_uu * speed * std::abs(speed)) / params.x_tau;
  MotionPrimitive mp;
  mp.id = id;
  mp.label = "straight";
  mp.cost = config.l_bar;
  mp.input_signal.assign(samples, Vec3(tau1, 0.0, 0.0));
  mp.initial_state = BodyVelocity{speed, 0.0, 0.0};

  std::vector<std::pair<double, double>> path;
  for (int k = 0; k <= samples; ++k) path.emplace_back(k * dt * speed, 0.0);
  const auto swept = sweep_boxes(path, config.box_chunk, config.inflation_cells * cs);
  mp.per_heading = expand_headings(1, 0, 0, swept, config.headings);
  return mp;
}

MotionPrimitive make_rotate(int id, int direction, const BasicMotionSpecs& basics,
                            const LatticeConfig& config, const VesselParams& params, double dt) {
  const int samples =
      std::max(1, static_cast<int>(std::ceil((M_PI / 2.0) / (basics.rotate_rate * dt))));
  const double rate = direction * (M_PI / 2.0) / (samples * dt);

  const double tau3 = -params.n_r * rate / params.n_tau;
  MotionPrimitive mp;
  mp.id = id;
  mp.label = direction > 0 ? "rotate-left" : "rotate-right";
  mp.cost = config.l_bar;
  mp.input_signal.assign(samples, Vec3(0.0, 0.0, tau3));
  mp.initial_state = BodyVelocity{0.0, 0.0, rate};

  const double margin = config.inflation_cells * config.cell_size;
  const std::vector<Box> swept{Box{-margin, -margin, margin, margin}};
  mp.per_heading = expand_headings(0, 0, direction, swept, config.headings);
  return mp;
}

}  // namespace

std::vector<MotionPrimitive> build_primitive_set(const Schedule& schedule,
                                                 const PrimitiveLibrary& library,
                                                 const BasicMotionSpecs& basics,
                                                 const LatticeConfig& config,
                                                 const VesselParams& params, double dt) {
  if (config.headings != 4) {
    throw ConfigError("only 4 heading levels are supported");
  }

  std::vector<MotionPrimitive> set;
  int slot = 0;
  for (const auto& seg : schedule.segments) {
    if (seg.repetitions <= 0) continue;
    set.push_back(make_informative(static_cast<int>(set.size()), slot++, library.by_id(seg.q),
                                   seg.segment_length, config, dt));
  }
  set.push_back(make_straight(static_cast<int>(set.size()), basics, config, params, dt));
  set.push_back(make_rotate(static_cast<int>(set.size()), +1, basics, config, params, dt));
  set.push_back(make_rotate(static_cast<int>(set.size()), -1, basics, config, params, dt));
  return set;
}

bool collision_check(const MotionPrimitive& primitive, const LatticeState& state,
                     const OccupancyMap& map) {
  if (!map.in_bounds(state.cx, state.cy)) {
    throw Error(Stage::Planning, "state outside the map");
  }
  const double cs = map.cell_size;
  const double ox = (state.cx + 0.5) * cs;
  const double oy = (state.cy + 0.5) * cs;
  const auto& motion = primitive.per_heading[state.h];

  for (const auto& rel : motion.swept) {
    const Box box{rel.min_x + ox, rel.min_y + oy, rel.max_x + ox, rel.max_y + oy};
    if (box.min_x < 0.0 || box.min_y < 0.0 || box.max_x > map.width * cs ||
        box.max_y > map.height * cs) {
      return false;  // crosses the map border
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(box.min_x / cs)));
    const int x1 = std::min(map.width - 1, static_cast<int>(std::floor(box.max_x / cs)));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.min_y / cs)));
    const int y1 = std::min(map.height - 1, static_cast<int>(std::floor(box.max_y / cs)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!map.blocked(x, y)) continue;
        // Positive-area overlap with the cell counts as a collision.
        if (box.min_x < (x + 1) * cs && box.max_x > x * cs && box.min_y < (y + 1) * cs &&
            box.max_y > y * cs) {
          return false;
        }
      }
    }
  }
  return true;
}

double heuristic(const LatticeState& state, const HeuristicWeights& weights,
                 const HeuristicContext& ctx) {
  const double dx = static_cast<double>(state.cx - ctx.goal_cx);
  const double dy = static_cast<double>(state.cy - ctx.goal_cy);
  const double euclid_cells = std::hypot(dx, dy);

  if (weights.admissible) {
    // Remaining zero-cost maneuvers can cover at most their own displacement,
    // so at least (distance - free travel) cells must be paid for.
    double free_travel = 0.0;
    for (std::size_t q = 0; q < ctx.required.size(); ++q) {
      free_travel += (ctx.required[q] - state.counters[q]) * ctx.max_travel_cells[q];
    }
    return ctx.l_bar * std::max(0.0, euclid_cells - free_travel);
  }

  const int dh = std::abs(state.h - ctx.goal_h) % 4;
  const double heading_gap = static_cast<double>(std::min(dh, 4 - dh));
  double remaining = 0.0;
  for (std::size_t q = 0; q < ctx.required.size(); ++q) {
    remaining += static_cast<double>(ctx.required[q] - state.counters[q]);
  }
  return weights.w1 * ctx.cell_size * euclid_cells + weights.w2 * heading_gap +
         weights.w3 * remaining;
}

namespace {

struct QueueEntry {
  double f = 0.0;
  double h = 0.0;
  std::uint64_t seq = 0;
  std::uint64_t key = 0;

  bool operator>(const QueueEntry& other) const {
    if (f != other.f) return f > other.f;
    if (h != other.h) return h > other.h;
    return seq > other.seq;
  }
};

struct NodeInfo {
  double g = std::numeric_limits<double>::infinity();
  std::uint64_t parent = 0;
  int via_primitive = -1;
  bool has_parent = false;
  bool closed = false;
};

class StateCodec {
 public:
  StateCodec(const OccupancyMap& map, int headings, const std::vector<int>& required)
      : width_(map.width), height_(map.height), headings_(headings), required_(required) {
    double states = static_cast<double>(width_) * height_ * headings_;
    for (int n : required_) states *= (n + 1);
    if (states > 1e15) {
      throw Error(Stage::Planning, "augmented lattice is too large to enumerate");
    }
  }

  std::uint64_t encode(const LatticeState& s) const {
    std::uint64_t key = (static_cast<std::uint64_t>(s.cy) * width_ + s.cx) * headings_ + s.h;
    for (std::size_t q = 0; q < required_.size(); ++q) {
      key = key * (required_[q] + 1) + s.counters[q];
    }
    return key;
  }

  LatticeState decode(std::uint64_t key) const {
    LatticeState s;
    s.counters.resize(required_.size());
    for (std::size_t q = required_.size(); q-- > 0;) {
      const std::uint64_t radix = required_[q] + 1;
      s.counters[q] = static_cast<int>(key % radix);
      key /= radix;
    }
    s.h = static_cast<int>(key % headings_);
    key /= headings_;
    s.cx = static_cast<int>(key % width_);
    s.cy = static_cast<int>(key / width_);
    return s;
  }

 private:
  int width_;
  int height_;
  int headings_;
  std::vector<int> required_;
};

}  // namespace

Plan astar_plan(const PlannerProblem& problem, const std::vector<MotionPrimitive>& primitives,
                const SearchOptions& opt) {
  const auto& map = problem.map;
  const std::size_t slots = problem.required_counters.size();
  if (!map.in_bounds(problem.start_cx, problem.start_cy) ||
      !map.in_bounds(problem.goal_cx, problem.goal_cy)) {
    throw Error(Stage::Planning, "start or goal lies outside the map");
  }
  if (map.blocked(problem.start_cx, problem.start_cy) ||
      map.blocked(problem.goal_cx, problem.goal_cy)) {
    throw Error(Stage::Planning, "start or goal cell is blocked");
  }
  for (const auto& p : primitives) {
    if (p.informative() && static_cast<std::size_t>(p.counter_slot) >= slots) {
      throw Error(Stage::Planning, "primitive counter slot out of range");
    }
  }

  HeuristicContext ctx;
  ctx.goal_cx = problem.goal_cx;
  ctx.goal_cy = problem.goal_cy;
  ctx.goal_h = problem.goal_h;
  ctx.required = problem.required_counters;
  ctx.cell_size = map.cell_size;
  ctx.l_bar = 1.0;
  ctx.max_travel_cells.assign(slots, 0.0);
  for (const auto& p : primitives) {
    if (!p.informative()) {
      ctx.l_bar = p.cost;
      continue;
    }
    const auto& m = p.per_heading[0];
    ctx.max_travel_cells[p.counter_slot] = std::hypot(static_cast<double>(m.dx),
                                                      static_cast<double>(m.dy));
  }

  LatticeState start{problem.start_cx, problem.start_cy, problem.start_h,
                     std::vector<int>(slots, 0)};
  LatticeState goal{problem.goal_cx, problem.goal_cy, problem.goal_h, problem.required_counters};

  const StateCodec codec(map, 4, problem.required_counters);
  const std::uint64_t start_key = codec.encode(start);
  const std::uint64_t goal_key = codec.encode(goal);

  std::unordered_map<std::uint64_t, NodeInfo> nodes;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> open;

  nodes[start_key].g = 0.0;
  const double h0 = heuristic(start, opt.weights, ctx);
  open.push(QueueEntry{h0, h0, 0, start_key});
  std::uint64_t seq = 1;

  std::vector<int> best_counters(slots, 0);
  long best_counter_sum = 0;
  std::uint64_t expansions = 0;

  while (!open.empty()) {
    const QueueEntry entry = open.top();
    open.pop();
    auto& info = nodes[entry.key];
    if (info.closed) continue;
    info.closed = true;

    const LatticeState state = codec.decode(entry.key);
    if (opt.on_expand) opt.on_expand(state);

    long counter_sum = 0;
    for (int c : state.counters) counter_sum += c;
    if (counter_sum > best_counter_sum) {
      best_counter_sum = counter_sum;
      best_counters = state.counters;
    }

    if (entry.key == goal_key) {
      Plan plan;
      plan.total_cost = info.g;
      std::uint64_t key = entry.key;
      while (true) {
        const auto& n = nodes.at(key);
        plan.states.push_back(codec.decode(key));
        if (!n.has_parent) break;
        plan.primitive_ids.push_back(n.via_primitive);
        key = n.parent;
      }
      std::reverse(plan.states.begin(), plan.states.end());
      std::reverse(plan.primitive_ids.begin(), plan.primitive_ids.end());
      return plan;
    }

    if (++expansions > opt.max_expansions) {
      throw PlanningError("expansion limit reached before the goal", best_counters);
    }

    const double g = info.g;
    for (const auto& prim : primitives) {
      LatticeState next = state;
      if (prim.informative()) {
        if (state.counters[prim.counter_slot] >= problem.required_counters[prim.counter_slot]) {
          continue;  // never exceed the requirement
        }
        next.counters[prim.counter_slot] += 1;
      }
      const auto& motion = prim.per_heading[state.h];
      next.cx += motion.dx;
      next.cy += motion.dy;
      next.h = ((state.h + motion.dh) % 4 + 4) % 4;
      if (!map.in_bounds(next.cx, next.cy)) continue;
      if (!collision_check(prim, state, map)) continue;

      const std::uint64_t next_key = codec.encode(next);
      auto& next_info = nodes[next_key];
      const double tentative = g + prim.cost;
      if (tentative < next_info.g) {
        next_info.g = tentative;
        next_info.parent = entry.key;
        next_info.via_primitive = prim.id;
        next_info.has_parent = true;
        next_info.closed = false;
        const double h = heuristic(next, opt.weights, ctx);
        open.push(QueueEntry{tentative + h, h, seq++, next_key});
      }
    }
  }

  throw PlanningError("no feasible plan reaches the goal with the required maneuver counts",
                      best_counters);
}

std::vector<Vec3> stitched_inputs(const Plan& plan, const std::vector<MotionPrimitive>& primitives) {
  std::vector<Vec3> inputs;
  for (int id : plan.primitive_ids) {
    const auto& sig = primitives.at(id).input_signal;
    inputs.insert(inputs.end(), sig.begin(), sig.end());
  }
  return inputs;
}

}  // namespace marex
