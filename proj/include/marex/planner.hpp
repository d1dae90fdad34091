#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "marex/design.hpp"
#include "marex/primitives.hpp"

namespace marex {

struct OccupancyMap {
  int width = 35;
  int height = 44;
  double cell_size = 2.0;
  std::vector<std::uint8_t> cells;  // row-major, nonzero = blocked

  static OccupancyMap open(int width, int height, double cell_size);

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  bool blocked(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x] != 0; }
  void block(int x, int y) { cells[static_cast<std::size_t>(y) * width + x] = 1; }
};

// Pose cell plus per-maneuver usage counters.
struct LatticeState {
  int cx = 0;
  int cy = 0;
  int h = 0;  // heading level, quarter turns
  std::vector<int> counters;

  bool operator==(const LatticeState& other) const = default;
};

struct Box {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;
};

// Lattice effect of one motion primitive applied at a given start heading:
// the cell/heading change and the area swept relative to the start position.
struct HeadingMotion {
  int dx = 0;
  int dy = 0;
  int dh = 0;
  std::vector<Box> swept;
};

struct MotionPrimitive {
  int id = 0;              // index within the primitive set
  std::string label;
  int counter_slot = -1;   // counter incremented by this primitive; -1 = basic
  int library_id = -1;     // dictionary id for informative primitives
  double cost = 0.0;       // zero for informative, l_bar for basic
  std::vector<HeadingMotion> per_heading;
  std::vector<Vec3> input_signal;  // input segment for stitched replay
  BodyVelocity initial_state;      // body velocities the segment was cut at

  bool informative() const { return counter_slot >= 0; }
};

struct LatticeConfig {
  double cell_size = 2.0;
  int headings = 4;            // quarter-turn levels; only 4 is supported
  double inflation_cells = 0.5;  // swept-box inflation, in cells
  int box_chunk = 16;          // trajectory samples per swept box
  double l_bar = 1.0;          // basic-primitive cost
};

struct BasicMotionSpecs {
  double cruise_speed = 0.5;  // straight driving speed, m/s
  double rotate_rate = 0.35;  // on-the-spot turn rate, rad/s
};

// Assembles the planner's primitive set: one zero-cost segment per scheduled
// maneuver (deltas snapped from its expected displacement, swept boxes from
// its trajectory) plus straight driving and both on-the-spot turns.
std::vector<MotionPrimitive> build_primitive_set(const Schedule& schedule,
                                                 const PrimitiveLibrary& library,
                                                 const BasicMotionSpecs& basics,
                                                 const LatticeConfig& config,
                                                 const VesselParams& params, double dt);

// True when every swept box of the primitive, placed at the state's cell and
// heading, stays inside the map and clear of blocked cells.
bool collision_check(const MotionPrimitive& primitive, const LatticeState& state,
                     const OccupancyMap& map);

struct HeuristicWeights {
  double w1 = 1.0;  // euclidean distance to the goal cell
  double w2 = 0.0;  // heading deviation, per quarter turn
  double w3 = 0.0;  // remaining required maneuver uses
  bool admissible = false;  // use the free-travel-compensated lower bound instead

  static HeuristicWeights defaults(double cell_size) {
    return HeuristicWeights{1.0, 0.5 * cell_size, 5.0 * cell_size, false};
  }
  static HeuristicWeights zero() { return HeuristicWeights{0.0, 0.0, 0.0, false}; }
  static HeuristicWeights admissible_bound() { return HeuristicWeights{0.0, 0.0, 0.0, true}; }
};

struct HeuristicContext {
  int goal_cx = 0;
  int goal_cy = 0;
  int goal_h = 0;
  std::vector<int> required;
  double cell_size = 1.0;
  double l_bar = 1.0;
  std::vector<double> max_travel_cells;  // per counter slot, for the admissible bound
};

double heuristic(const LatticeState& state, const HeuristicWeights& weights,
                 const HeuristicContext& ctx);

struct Plan {
  std::vector<LatticeState> states;  // start state first
  std::vector<int> primitive_ids;    // indices into the primitive set
  double total_cost = 0.0;
};

struct PlannerProblem {
  OccupancyMap map;
  int start_cx = 0;
  int start_cy = 0;
  int start_h = 0;
  int goal_cx = 0;
  int goal_cy = 0;
  int goal_h = 0;
  std::vector<int> required_counters;
};

struct SearchOptions {
  HeuristicWeights weights;
  std::function<void(const LatticeState&)> on_expand;  // optional observer
  std::uint64_t max_expansions = 50'000'000;
};

// A* over the counter-augmented lattice with deterministic tie breaking
// (f, then h, then insertion order). Throws PlanningError with the best
// counter vector reached when no plan exists.
Plan astar_plan(const PlannerProblem& problem, const std::vector<MotionPrimitive>& primitives,
                const SearchOptions& opt);

// Concatenates the input segments of the planned primitives for replay.
std::vector<Vec3> stitched_inputs(const Plan& plan, const std::vector<MotionPrimitive>& primitives);

}  // namespace marex
