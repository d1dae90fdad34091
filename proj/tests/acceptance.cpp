// Acceptance suite: end-to-end checks of the toolkit against its contracted
// behavior. Each criterion prints one PASS/FAIL line; the process exits
// nonzero if any criterion fails.
//
// Usage: acceptance [--mc-runs N]
//   --mc-runs below 500 switches the Monte Carlo criteria to the reduced
//   mode, which checks the optimized-vs-random ordering only.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "marex/errors.hpp"
#include "marex/harness.hpp"
#include "marex/io.hpp"
#include "planner_support.hpp"
#include "support.hpp"

using namespace marex;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %d (%s): %s  [%s]\n", criterion, name, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

ScenarioConfig reference_config() {
  return load_scenario(fs::path(MAREX_SOURCE_DIR) / "configs" / "reference.json");
}

// ---------------------------------------------------------------------------
// 1. Noise-free recovery from each single maneuver that excites every degree
//    of freedom (the pure-surge runs cannot identify the sway/yaw blocks and
//    must raise the documented error instead).
void criterion_1(const ScenarioConfig& cfg, const PrimitiveLibrary& lib) {
  const Eigen::VectorXd theta0 = cfg.params.theta();
  double worst = 0.0;
  int worst_id = 0;
  bool pass = true;
  std::string detail;

  for (int id = 3; id <= 11; ++id) {
    const auto& prim = lib.by_id(id);
    const auto sim =
        simulate(prim.initial_state(), prim.input_signal, cfg.params, DisturbanceConfig::none());
    const auto records = build_regressors(sim.outputs(), prim.input_signal);
    auto instruments =
        generate_instruments(prim.input_signal, NominalModel{cfg.nominal_theta},
                             sim.outputs().front());
    instruments = demean_complete(instruments, {instruments.size()});
    try {
      const auto est = iv_estimate(records, instruments);
      const double err =
          (est.theta_hat - theta0).cwiseQuotient(theta0).cwiseAbs().maxCoeff();
      if (err > worst) {
        worst = err;
        worst_id = id;
      }
    } catch (const Error& e) {
      pass = false;
      detail = "tau_" + std::to_string(id) + " failed: " + e.what();
    }
  }
  if (pass) {
    pass = worst < 1e-6;
    std::ostringstream os;
    os << "worst relative error " << worst << " (tau_" << worst_id
       << "); pure-surge runs tau_1/tau_2 correctly rank deficient";
    // The surge-only maneuvers leave the sway and yaw blocks unexcited.
    for (int id : {1, 2}) {
      const auto& prim = lib.by_id(id);
      const auto sim = simulate(prim.initial_state(), prim.input_signal, cfg.params,
                                DisturbanceConfig::none());
      const auto records = build_regressors(sim.outputs(), prim.input_signal);
      try {
        ls_estimate(records);
        pass = false;
        os << "; tau_" << id << " unexpectedly full rank";
      } catch (const NonInformativeDataError&) {
      }
    }
    detail = os.str();
  }
  report(1, "noise-free recovery", pass, detail);
}

// ---------------------------------------------------------------------------
// 2 and 3. Monte Carlo comparison of the compensated optimal design against
//    the random design: parameter-error fractions and cross-validation
//    fractions at the contracted thresholds.
void criteria_2_3(const ScenarioConfig& cfg, const InitialExperiments& init,
                  const Allocation& alloc, int runs) {
  const bool reduced = runs < 500;
  const auto optimized = run_monte_carlo(cfg, DesignLabel::Optimized, init.library, &alloc, runs);
  const auto random = run_monte_carlo(cfg, DesignLabel::Random, init.library, nullptr, runs);

  {
    const double gap = optimized.fraction_param_below - random.fraction_param_below;
    std::ostringstream os;
    os << "optimized " << optimized.fraction_param_below << ", random "
       << random.fraction_param_below << ", gap " << gap << " over " << runs << " runs";
    bool pass;
    if (reduced) {
      pass = optimized.fraction_param_below > random.fraction_param_below;
      os << "; reduced mode checks the ordering only";
    } else {
      pass = optimized.fraction_param_below >= 0.95 && gap >= 0.20;
      os << "; requires optimized >= 0.95 and gap >= 0.20";
    }
    report(2, "parameter-error ordering", pass, os.str());
  }
  {
    const double gap = optimized.fraction_cv_below - random.fraction_cv_below;
    std::ostringstream os;
    os << "optimized " << optimized.fraction_cv_below << ", random "
       << random.fraction_cv_below << ", gap " << gap << " over " << runs << " runs";
    bool pass;
    if (reduced) {
      pass = optimized.fraction_cv_below > random.fraction_cv_below;
      os << "; reduced mode checks the ordering only";
    } else {
      pass = gap >= 0.15;
      os << "; requires gap >= 0.15";
    }
    report(3, "cross-validation ordering", pass, os.str());
  }
}

// ---------------------------------------------------------------------------
// 4. Scalar offset example: complete mean subtraction keeps the offset in the
//    instrument and reduces the estimator variance against batchwise
//    subtraction.
void criterion_4() {
  const double theta0 = 1.5;
  const double sigma_e = 0.1;
  const double u_bar = 5.0 * sigma_e;
  const int n = 500;

  std::vector<double> complete_est, batchwise_est;
  complete_est.reserve(1000);
  batchwise_est.reserve(1000);
  for (int seed = 0; seed < 1000; ++seed) {
    const auto data = marex::testing::make_example1(theta0, u_bar, sigma_e, n, 50000 + seed);
    complete_est.push_back(
        iv_estimate(data.records, demean_complete(data.instruments, data.batches)).theta_hat[0]);
    batchwise_est.push_back(
        iv_estimate(data.records, demean_batchwise(data.instruments, data.batches)).theta_hat[0]);
  }
  const double var_complete = marex::testing::variance(complete_est);
  const double var_batchwise = marex::testing::variance(batchwise_est);
  std::ostringstream os;
  os << "var(complete) " << var_complete << " vs var(batchwise) " << var_batchwise << " at "
     << complete_est.size() << " seeds, offset 5 sigma";
  report(4, "zero-mean variance effect", var_complete < var_batchwise, os.str());
}

// ---------------------------------------------------------------------------
// 5. Optimizer dominance and gradient correctness on the reference scenario.
void criterion_5(const ScenarioConfig& cfg, const std::vector<InfoSummary>& summaries,
                 const Allocation& alloc) {
  const int q_count = static_cast<int>(summaries.size());
  const Eigen::VectorXd uniform = uniform_fractions(q_count);
  const double f_opt = design_objective(alloc.fractions, summaries, cfg.design.mode);
  const double f_uniform = design_objective(uniform, summaries, cfg.design.mode);

  Rng rng(424242);
  double best_probe = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < 200; ++p) {
    Eigen::VectorXd probe(q_count);
    double total = 0.0;
    for (int q = 0; q < q_count; ++q) {
      probe[q] = -std::log(1.0 - rng.uniform());
      total += probe[q];
    }
    probe /= total;
    best_probe = std::max(best_probe, design_objective(probe, summaries, cfg.design.mode));
  }

  bool grad_ok = true;
  double worst_grad = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd rho(q_count);
    double total = 0.0;
    for (int q = 0; q < q_count; ++q) {
      rho[q] = 0.2 + rng.uniform();
      total += rho[q];
    }
    rho /= total;
    const Eigen::VectorXd grad = design_gradient(rho, summaries, cfg.design.mode);
    const double h = 1e-6;
    for (int q = 0; q < q_count; ++q) {
      Eigen::VectorXd up = rho, down = rho;
      up[q] += h;
      down[q] -= h;
      const double fd = (design_objective(up, summaries, cfg.design.mode) -
                         design_objective(down, summaries, cfg.design.mode)) /
                        (2.0 * h);
      const double rel = std::abs(fd - grad[q]) / std::max(1.0, std::abs(grad[q]));
      worst_grad = std::max(worst_grad, rel);
      grad_ok = grad_ok && rel < 1e-5;
    }
  }

  const bool dominance = f_opt >= f_uniform && f_opt >= best_probe;
  std::ostringstream os;
  os << "objective " << f_opt << " vs uniform " << f_uniform << " and best probe " << best_probe
     << "; worst gradient mismatch " << worst_grad;
  report(5, "optimizer dominance and gradient", dominance && grad_ok, os.str());
}

// ---------------------------------------------------------------------------
// 6. Two-candidate allocation agrees with a fine grid search.
void criterion_6() {
  auto diag_summary = [](int q, double a, double b) {
    InfoSummary s;
    s.q = q;
    s.gamma_bar = Eigen::Vector2d(a, b).asDiagonal();
    s.y_bar = Eigen::MatrixXd::Zero(2, 1);
    s.z_bar = Eigen::MatrixXd::Zero(2, 1);
    s.x_bar = s.gamma_bar;
    s.n_samples_used = 300;
    return s;
  };

  bool pass = true;
  std::ostringstream os;
  Rng rng(31337);
  for (int trial = 0; trial < 5; ++trial) {
    const double a1 = 0.2 + 2.0 * rng.uniform();
    const double b1 = 0.05 + 0.4 * rng.uniform();
    const double a2 = 0.05 + 0.4 * rng.uniform();
    const double b2 = 0.2 + 2.0 * rng.uniform();
    const std::vector<InfoSummary> summaries{diag_summary(1, a1, b1), diag_summary(2, a2, b2)};

    double best_rho = 0.0;
    double best_f = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
      Eigen::VectorXd rho(2);
      rho << i / 1000.0, 1.0 - i / 1000.0;
      const double f = design_objective(rho, summaries, DesignMode::Basic);
      if (f > best_f) {
        best_f = f;
        best_rho = i / 1000.0;
      }
    }
    const auto alloc =
        optimize_allocation(summaries, 100.0, DesignMode::Basic, uniform_fractions(2));
    const double diff = std::abs(alloc.fractions[0] - best_rho);
    if (diff >= 1e-2) {
      pass = false;
      os << "trial " << trial << ": optimizer " << alloc.fractions[0] << " vs grid " << best_rho
         << "; ";
    }
  }
  if (pass) os << "5 randomized two-candidate problems within 1e-2 of the 1e-3 grid";
  report(6, "two-candidate grid-search agreement", pass, os.str());
}

// ---------------------------------------------------------------------------
// 7. Reference planning scenario: three maneuvers three times each plus the
//    basic moves on the shipped 35x44 map.
void criterion_7(const ScenarioConfig& base, const PrimitiveLibrary& lib) {
  const auto t0 = std::chrono::steady_clock::now();

  ScenarioConfig cfg = base;
  Schedule schedule;
  for (int id : {1, 3, 6}) {
    schedule.segments.push_back(ScheduleSegment{id, 3, lib.by_id(id).natural_segment});
  }
  const auto motion_set = build_primitive_set(schedule, lib, cfg.planner.basics,
                                              cfg.planner.lattice, cfg.params, cfg.dt);

  PlannerProblem problem;
  problem.map = cfg.planner.map;
  problem.start_cx = cfg.planner.start_cx;
  problem.start_cy = cfg.planner.start_cy;
  problem.start_h = cfg.planner.start_h;
  problem.goal_cx = cfg.planner.goal_cx;
  problem.goal_cy = cfg.planner.goal_cy;
  problem.goal_h = cfg.planner.goal_h;
  problem.required_counters = {3, 3, 3};

  SearchOptions search;
  search.weights = HeuristicWeights::defaults(cfg.planner.lattice.cell_size);

  bool pass = true;
  std::ostringstream os;
  try {
    const Plan plan = astar_plan(problem, motion_set, search);
    marex::testing::verify_plan(plan, problem, motion_set, cfg.planner.lattice.l_bar);
    int basics = 0;
    for (int id : plan.primitive_ids) {
      if (!motion_set.at(id).informative()) ++basics;
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    pass = plan.total_cost == cfg.planner.lattice.l_bar * basics && elapsed < 300.0;
    os << plan.primitive_ids.size() << " primitives, cost " << plan.total_cost << " = "
       << basics << " basic moves, counters fulfilled, re-checked collision free, " << elapsed
       << " s";
  } catch (const std::exception& e) {
    pass = false;
    os << "failed: " << e.what();
  }
  report(7, "reference plan validity", pass, os.str());
}

// ---------------------------------------------------------------------------
// 8. Small-lattice optimality against the exhaustive oracle.
void criterion_8() {
  Rng rng(777);
  int compared = 0;
  bool pass = true;
  std::ostringstream os;
  int maps_tried = 0;
  while (compared < 20 && maps_tried < 200) {
    ++maps_tried;
    auto map = OccupancyMap::open(6, 6, 1.0);
    for (int i = 0; i < 6; ++i) {
      map.block(static_cast<int>(rng.integer(6)), static_cast<int>(rng.integer(6)));
    }
    PlannerProblem problem;
    problem.map = map;
    problem.start_cx = 0;
    problem.start_cy = 0;
    problem.start_h = 0;
    problem.goal_cx = 5;
    problem.goal_cy = 5;
    problem.goal_h = static_cast<int>(rng.integer(4));
    problem.required_counters = {1};
    if (map.blocked(0, 0) || map.blocked(5, 5)) continue;

    std::vector<MotionPrimitive> set;
    set.push_back(marex::testing::line_primitive(0, 0, 2, 0, 0, 0.0, 1.0, 0.3));
    for (auto& b : marex::testing::basic_moves(1.0, 0.3, 1.0, 1)) set.push_back(b);

    const double oracle = marex::testing::exhaustive_cost(problem, set);
    SearchOptions search;
    search.weights = HeuristicWeights::admissible_bound();
    if (std::isinf(oracle)) {
      try {
        astar_plan(problem, set, search);
        pass = false;
        os << "map " << maps_tried << ": oracle says infeasible but a plan was returned; ";
      } catch (const PlanningError&) {
      }
      continue;
    }
    const Plan plan = astar_plan(problem, set, search);
    if (plan.total_cost != oracle) {
      pass = false;
      os << "map " << maps_tried << ": cost " << plan.total_cost << " vs oracle " << oracle
         << "; ";
    }
    ++compared;
  }
  if (pass) os << compared << " randomized maps matched the exhaustive search";
  report(8, "small-lattice optimality", pass && compared >= 20, os.str());
}

// ---------------------------------------------------------------------------
// 9. Byte-level reproducibility of the whole pipeline under fixed seeds.
void criterion_9(const ScenarioConfig& cfg) {
  const fs::path dir_a = fs::temp_directory_path() / "marex_accept_a";
  const fs::path dir_b = fs::temp_directory_path() / "marex_accept_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  bool pass = true;
  std::ostringstream os;
  try {
    run_pipeline(cfg, dir_a.string());
    run_pipeline(cfg, dir_b.string());
    int files = 0;
    for (const auto& entry : fs::directory_iterator(dir_a)) {
      ++files;
      std::ifstream a(entry.path(), std::ios::binary);
      std::ifstream b(dir_b / entry.path().filename(), std::ios::binary);
      std::stringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      if (sa.str() != sb.str()) {
        pass = false;
        os << entry.path().filename().string() << " differs; ";
      }
    }
    if (pass) os << files << " artifact files byte-identical across two runs";
  } catch (const std::exception& e) {
    pass = false;
    os << "pipeline failed: " << e.what();
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  report(9, "pipeline determinism", pass, os.str());
}

}  // namespace

int main(int argc, char** argv) {
  int mc_runs = 500;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--mc-runs") == 0 && i + 1 < argc) {
      mc_runs = std::atoi(argv[++i]);
    }
  }

  const ScenarioConfig cfg = reference_config();
  const InitialExperiments init = collect_initial_experiments(cfg);
  const auto summaries = estimate_summaries(init.datasets, cfg.design.min_samples);
  const Allocation alloc =
      optimize_allocation(summaries, cfg.design.total_n, cfg.design.mode,
                          uniform_fractions(static_cast<int>(summaries.size())),
                          cfg.design.optimize);

  criterion_1(cfg, init.library);
  criteria_2_3(cfg, init, alloc, mc_runs);
  criterion_4();
  criterion_5(cfg, summaries, alloc);
  criterion_6();
  criterion_7(cfg, init.library);
  criterion_8();
  criterion_9(cfg);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
