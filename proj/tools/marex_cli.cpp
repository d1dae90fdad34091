// Command-line front end: simulation, experiment design, planning and the
// Monte Carlo study, each writing its artifacts under --out.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "marex/errors.hpp"
#include "marex/harness.hpp"
#include "marex/io.hpp"

namespace fs = std::filesystem;
using namespace marex;

namespace {

int exit_code_for(Stage stage) {
  switch (stage) {
    case Stage::Config: return 2;
    case Stage::Simulation: return 3;
    case Stage::Synthesis: return 4;
    case Stage::Regression: return 5;
    case Stage::Estimation: return 6;
    case Stage::Design: return 7;
    case Stage::Schedule: return 8;
    case Stage::Planning: return 9;
    case Stage::Io: return 10;
  }
  return 1;
}

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::Config: return "config";
    case Stage::Simulation: return "simulation";
    case Stage::Synthesis: return "synthesis";
    case Stage::Regression: return "regression";
    case Stage::Estimation: return "estimation";
    case Stage::Design: return "design";
    case Stage::Schedule: return "schedule";
    case Stage::Planning: return "planning";
    case Stage::Io: return "io";
  }
  return "unknown";
}

struct CommonArgs {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
};

ScenarioConfig load_with_overrides(const CommonArgs& args) {
  ScenarioConfig cfg =
      args.config.empty() ? ScenarioConfig::reference() : load_scenario(args.config);
  if (args.seed) {
    cfg.disturbance.seed = *args.seed;
    cfg.mc.base_seed = *args.seed;
  }
  return cfg;
}

std::vector<Vec3> simulation_input(const ScenarioConfig& cfg, const PrimitiveLibrary& lib,
                                   BodyVelocity* initial) {
  const auto& spec = cfg.simulate;
  if (spec.kind == "inline") {
    if (spec.inline_tau.empty()) {
      throw ConfigError("simulate.kind is \"inline\" but no tau rows were given");
    }
    *initial = spec.initial;
    return spec.inline_tau;
  }
  if (spec.kind == "validation") {
    *initial = cfg.validation.initial;
    return make_validation_input(cfg.validation, cfg.dt);
  }
  if (spec.kind == "primitive") {
    const auto& prim = lib.by_id(spec.primitive_id);
    *initial = spec.initial_given ? spec.initial : prim.initial_state();
    return prim.input_signal;
  }
  throw ConfigError("simulate.kind must be \"primitive\", \"validation\" or \"inline\"");
}

Schedule planner_schedule(const ScenarioConfig& cfg, const PrimitiveLibrary& lib,
                          const Allocation& alloc, const std::vector<int>& ids) {
  if (cfg.planner.use_design_schedule) {
    std::vector<int> lengths;
    for (int id : ids) lengths.push_back(lib.by_id(id).natural_segment);
    return realize_schedule(alloc, lengths, ids);
  }
  Schedule manual;
  for (int id : cfg.planner.informative) {
    manual.segments.push_back(
        ScheduleSegment{id, cfg.planner.repetitions, lib.by_id(id).natural_segment});
  }
  return manual;
}

void print_allocation(const Allocation& alloc, const std::vector<int>& ids,
                      const PrimitiveLibrary& lib) {
  std::printf("optimized design (N = %.0f, log|det| = %.4f):\n", alloc.total_n,
              alloc.objective_value);
  for (Eigen::Index q = 0; q < alloc.fractions.size(); ++q) {
    const double pct = 100.0 * alloc.fractions[q];
    if (pct < 0.5) continue;
    std::printf("  tau_%d (%s): %.0f %% of the total experiment time\n", ids[q],
                lib.by_id(ids[q]).label.c_str(), pct);
  }
}

int cmd_simulate(const CommonArgs& args) {
  const ScenarioConfig cfg = load_with_overrides(args);
  const PrimitiveLibrary lib = [&] {
    if (cfg.simulate.kind != "primitive") return PrimitiveLibrary{};
    SynthesisOptions synth = cfg.synthesis;
    synth.dt = cfg.dt;
    return build_reference_library(cfg.params, synth);
  }();

  BodyVelocity initial;
  const auto tau = simulation_input(cfg, lib, &initial);
  const SimResult sim = simulate(initial, tau, cfg.params, cfg.disturbance);

  fs::create_directories(args.out);
  write_trajectory_csv(fs::path(args.out) / "trajectory.csv", sim, tau);
  std::printf("simulated %zu samples -> %s/trajectory.csv\n", sim.steps.size(),
              args.out.c_str());
  return 0;
}

int cmd_summaries(const CommonArgs& args) {
  const ScenarioConfig cfg = load_with_overrides(args);
  const InitialExperiments init = collect_initial_experiments(cfg);
  const auto summaries = estimate_summaries(init.datasets, cfg.design.min_samples);

  fs::create_directories(args.out);
  write_library_json(fs::path(args.out) / "library.json", init.library, cfg.dt);
  write_envelopes_json(fs::path(args.out) / "fullscale_envelopes.json",
                       fullscale_primitive_specs(), 1.0);
  write_summaries_json(fs::path(args.out) / "summaries.json", summaries, init.ids);
  std::printf("estimated %zu summaries -> %s/summaries.json\n", summaries.size(),
              args.out.c_str());
  return 0;
}

int cmd_optimize(const CommonArgs& args, const std::string& mode_override) {
  ScenarioConfig cfg = load_with_overrides(args);
  if (mode_override == "basic") cfg.design.mode = DesignMode::Basic;
  if (mode_override == "zero_mean") cfg.design.mode = DesignMode::ZeroMean;

  const InitialExperiments init = collect_initial_experiments(cfg);
  const auto summaries = estimate_summaries(init.datasets, cfg.design.min_samples);
  const Allocation alloc =
      optimize_allocation(summaries, cfg.design.total_n, cfg.design.mode,
                          uniform_fractions(static_cast<int>(summaries.size())),
                          cfg.design.optimize);

  fs::create_directories(args.out);
  write_allocation_json(fs::path(args.out) / "allocation.json", alloc, init.ids, cfg.design.mode,
                        &init.library);
  print_allocation(alloc, init.ids, init.library);
  return 0;
}

int cmd_schedule(const CommonArgs& args) {
  const ScenarioConfig cfg = load_with_overrides(args);
  const InitialExperiments init = collect_initial_experiments(cfg);
  const auto summaries = estimate_summaries(init.datasets, cfg.design.min_samples);
  const Allocation alloc =
      optimize_allocation(summaries, cfg.design.total_n, cfg.design.mode,
                          uniform_fractions(static_cast<int>(summaries.size())),
                          cfg.design.optimize);
  std::vector<int> lengths;
  for (int id : init.ids) lengths.push_back(init.library.by_id(id).natural_segment);
  const Schedule schedule = realize_schedule(alloc, lengths, init.ids);

  fs::create_directories(args.out);
  write_allocation_json(fs::path(args.out) / "allocation.json", alloc, init.ids, cfg.design.mode,
                        &init.library);
  write_schedule_json(fs::path(args.out) / "schedule.json", schedule);
  for (const auto& seg : schedule.segments) {
    if (seg.repetitions > 0) {
      std::printf("  tau_%d: %d segment(s) of %d samples\n", seg.q, seg.repetitions,
                  seg.segment_length);
    }
  }
  std::printf("total %ld samples -> %s/schedule.json\n", schedule.total_samples(),
              args.out.c_str());
  return 0;
}

int cmd_plan(const CommonArgs& args) {
  const ScenarioConfig cfg = load_with_overrides(args);
  const InitialExperiments init = collect_initial_experiments(cfg);

  Allocation alloc;
  std::vector<int> ids = init.ids;
  if (cfg.planner.use_design_schedule) {
    const auto summaries = estimate_summaries(init.datasets, cfg.design.min_samples);
    alloc = optimize_allocation(summaries, cfg.design.total_n, cfg.design.mode,
                                uniform_fractions(static_cast<int>(summaries.size())),
                                cfg.design.optimize);
  }
  const Schedule schedule = planner_schedule(cfg, init.library, alloc, ids);
  const auto motion_set = build_primitive_set(schedule, init.library, cfg.planner.basics,
                                              cfg.planner.lattice, cfg.params, cfg.dt);

  PlannerProblem problem;
  problem.map = cfg.planner.map;
  problem.start_cx = cfg.planner.start_cx;
  problem.start_cy = cfg.planner.start_cy;
  problem.start_h = cfg.planner.start_h;
  problem.goal_cx = cfg.planner.goal_cx;
  problem.goal_cy = cfg.planner.goal_cy;
  problem.goal_h = cfg.planner.goal_h;
  for (const auto& seg : schedule.segments) {
    if (seg.repetitions > 0) problem.required_counters.push_back(seg.repetitions);
  }

  SearchOptions search;
  if (cfg.planner.weights == "admissible") {
    search.weights = HeuristicWeights::admissible_bound();
  } else if (cfg.planner.weights == "zero") {
    search.weights = HeuristicWeights::zero();
  } else {
    search.weights = HeuristicWeights::defaults(cfg.planner.lattice.cell_size);
  }
  const Plan plan = astar_plan(problem, motion_set, search);

  fs::create_directories(args.out);
  write_plan_json(fs::path(args.out) / "plan.json", plan, motion_set, problem.map);
  write_plan_inputs_csv(fs::path(args.out) / "plan_inputs.csv", plan, motion_set);
  int basics = 0;
  for (int id : plan.primitive_ids) {
    if (!motion_set.at(id).informative()) ++basics;
  }
  std::printf("plan: %zu primitives (%d basic), cost %.1f -> %s/plan.json\n",
              plan.primitive_ids.size(), basics, plan.total_cost, args.out.c_str());
  return 0;
}

int cmd_montecarlo(const CommonArgs& args, const std::string& design, int runs, bool resample) {
  ScenarioConfig cfg = load_with_overrides(args);
  if (resample && runs > 0) cfg.resample.resamples = runs;
  const InitialExperiments init = collect_initial_experiments(cfg);
  fs::create_directories(args.out);

  if (resample) {
    const auto pool = simulate_subexperiment_pool(cfg, init.library);
    {
      Dataset data;
      for (const auto& sub : pool) {
        for (std::size_t k = 0; k < sub.y.size(); ++k) {
          data.y.push_back(sub.y[k]);
          data.tau.push_back(sub.tau[k]);
          data.batch.push_back(sub.batch_id);
        }
      }
      write_dataset_csv(fs::path(args.out) / "subexperiments.csv", data);
    }
    for (const bool random_design : {false, true}) {
      if (design == "optimized" && random_design) continue;
      if (design == "random" && !random_design) continue;
      MonteCarloReport report = resample_study(cfg, pool, random_design);
      report.design = random_design ? "resample_random" : "resample_optimized";
      write_mc_report(args.out, report, cfg.mc);
      std::printf("%s: fraction(cv < %.2f) = %.3f over %d resamples\n", report.design.c_str(),
                  report.cv_threshold, report.fraction_cv_below, report.runs);
    }
    return 0;
  }

  std::optional<Allocation> alloc;
  auto need_alloc = [&]() -> const Allocation& {
    if (!alloc) {
      const auto summaries = estimate_summaries(init.datasets, cfg.design.min_samples);
      alloc = optimize_allocation(summaries, cfg.design.total_n, cfg.design.mode,
                                  uniform_fractions(static_cast<int>(summaries.size())),
                                  cfg.design.optimize);
    }
    return *alloc;
  };

  for (DesignLabel label : {DesignLabel::Optimized, DesignLabel::Random, DesignLabel::Uniform}) {
    const std::string name = to_string(label);
    if (design != "all" && design != name) continue;

    const Allocation* fixed = nullptr;
    Allocation uniform_alloc;
    if (label == DesignLabel::Optimized) {
      fixed = &need_alloc();
    } else if (label == DesignLabel::Uniform) {
      uniform_alloc.fractions = uniform_fractions(init.library.size());
      uniform_alloc.total_n = cfg.design.total_n;
      fixed = &uniform_alloc;
    }
    const MonteCarloReport report = run_monte_carlo(cfg, label, init.library, fixed, runs);
    write_mc_report(args.out, report, cfg.mc);
    std::printf(
        "%-9s fraction(param-err < %.1f) = %.3f   fraction(cv < %.2f) = %.3f   (%d runs)\n",
        report.design.c_str(), report.param_threshold, report.fraction_param_below,
        report.cv_threshold, report.fraction_cv_below, report.runs);
  }
  return 0;
}

int cmd_pipeline(const CommonArgs& args) {
  const ScenarioConfig cfg = load_with_overrides(args);
  const PipelineArtifacts art = run_pipeline(cfg, args.out);
  std::printf("pipeline complete -> %s\n", args.out.c_str());
  std::printf("  plan: %zu primitives, cost %.1f\n", art.plan.primitive_ids.size(),
              art.plan.total_cost);
  std::printf("  estimate: condition %.3g, residual %.3g over %ld samples\n",
              art.estimate.condition_number, art.estimate.residual_norm, art.estimate.n_samples);
  if (art.cv.degenerate) {
    std::printf("  cross-validation: degenerate (diverged at step %ld)\n",
                art.cv.divergence_step);
  } else {
    std::printf("  cross-validation: eps = (%.4f, %.4f, %.4f), norm %.4f\n", art.cv.eps_u,
                art.cv.eps_v, art.cv.eps_r, art.cv.norm());
  }
  return 0;
}

int cmd_validate(const CommonArgs& args, const std::string& estimate_file) {
  const ScenarioConfig cfg = load_with_overrides(args);

  std::ifstream in(estimate_file);
  if (!in) {
    throw IoError("cannot open " + estimate_file);
  }
  Eigen::VectorXd theta(kNumParams);
  {
    auto j = nlohmann::json::parse(in);
    const auto& t = j.at("theta_hat");
    if (t.size() != kNumParams) {
      throw ConfigError("theta_hat must have 10 entries");
    }
    for (int i = 0; i < kNumParams; ++i) theta[i] = t.at(i).get<double>();
  }

  const ValidationScenario scenario{cfg.params, cfg.dt, cfg.validation.initial,
                                    make_validation_input(cfg.validation, cfg.dt)};
  const CvResult cv = cv_validate(theta, scenario);
  fs::create_directories(args.out);
  write_cv_json(fs::path(args.out) / "cv.json", cv);
  if (cv.degenerate) {
    std::printf("cross-validation degenerate (diverged at step %ld)\n", cv.divergence_step);
  } else {
    std::printf("cross-validation eps = (%.4f, %.4f, %.4f), norm %.4f\n", cv.eps_u, cv.eps_v,
                cv.eps_r, cv.norm());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Informative experiment design toolkit for surface-vessel models"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string mode_override;
  std::string design = "all";
  std::string estimate_file;
  int runs = -1;
  bool resample = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config, "scenario configuration (JSON)");
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--seed", args.seed, "override the base random seed");
  };

  auto* sim = app.add_subcommand("simulate", "simulate one input sequence");
  add_common(sim);
  auto* sum = app.add_subcommand("summaries", "run initial experiments and estimate summaries");
  add_common(sum);
  auto* opt = app.add_subcommand("optimize", "solve the duration-allocation problem");
  add_common(opt);
  opt->add_option("--mode", mode_override, "basic or zero_mean")
      ->check(CLI::IsMember({"basic", "zero_mean"}));
  auto* sch = app.add_subcommand("schedule", "round the allocation to whole segments");
  add_common(sch);
  auto* pln = app.add_subcommand("plan", "plan a feasible experiment trajectory");
  add_common(pln);
  auto* mc = app.add_subcommand("montecarlo", "compare designs over repeated estimations");
  add_common(mc);
  mc->add_option("--design", design, "optimized, random, uniform or all")
      ->check(CLI::IsMember({"optimized", "random", "uniform", "all"}));
  mc->add_option("--runs", runs, "override the configured run count");
  mc->add_flag("--resample", resample, "resampling study over recorded sub-experiments");
  auto* pipe = app.add_subcommand("pipeline", "run the full design-plan-estimate pipeline");
  add_common(pipe);
  auto* val = app.add_subcommand("validate", "cross-validate a stored estimate");
  add_common(val);
  val->add_option("--estimate", estimate_file, "estimate JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(args);
    if (sum->parsed()) return cmd_summaries(args);
    if (opt->parsed()) return cmd_optimize(args, mode_override);
    if (sch->parsed()) return cmd_schedule(args);
    if (pln->parsed()) return cmd_plan(args);
    if (mc->parsed()) return cmd_montecarlo(args, design, runs, resample);
    if (pipe->parsed()) return cmd_pipeline(args);
    if (val->parsed()) return cmd_validate(args, estimate_file);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", stage_name(e.stage()), e.what());
    return exit_code_for(e.stage());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
