#include "marex/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

#include "marex/errors.hpp"
#include "marex/io.hpp"

namespace marex {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Seed offsets keeping the run's disturbance draws and design draws on
// unrelated streams.
constexpr std::uint64_t kDesignSeedSalt = 0xd1b54a32d192ed03ULL;

std::vector<Vec3> take_samples(const ExperimentPrimitive& p, long n) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  const long d = p.duration;
  for (long k = 0; k < std::min(n, d); ++k) out.push_back(p.input_signal[k]);
  if (n > d) {
    // Extend periodically with the last natural segment.
    const long seg = std::max(1, p.natural_segment);
    const long start = d - seg;
    long k = 0;
    while (static_cast<long>(out.size()) < n) {
      out.push_back(p.input_signal[start + (k % seg)]);
      ++k;
    }
  }
  return out;
}

}  // namespace

std::vector<Vec3> make_validation_input(const ValidationSpec& spec, double dt) {
  std::vector<Vec3> tau;
  tau.reserve(spec.duration);
  const double total_time = spec.duration * dt;
  for (int k = 0; k < spec.duration; ++k) {
    const double t = k * dt;
    const double phase =
        2.0 * M_PI * (spec.f0_hz * t + 0.5 * (spec.f1_hz - spec.f0_hz) * t * t / total_time);
    Vec3 u;
    u[0] = spec.surge_level + spec.surge_amp * std::sin(phase);
    u[1] = spec.sway_amp * std::sin(0.7 * phase + 1.0);
    u[2] = spec.yaw_amp * std::sin(1.3 * phase + 2.0);
    tau.push_back(u);
  }
  return tau;
}

InitialExperiments collect_initial_experiments(const ScenarioConfig& cfg) {
  InitialExperiments init;

  SynthesisOptions synth = cfg.synthesis;
  synth.dt = cfg.dt;
  for (auto spec : reference_primitive_specs()) {
    spec.duration = cfg.synth_duration;
    spec.period = cfg.synth_period;
    init.library.primitives.push_back(synthesize_primitive(spec, cfg.params, synth));
  }

  const NominalModel nominal{cfg.nominal_theta};
  for (const auto& prim : init.library.primitives) {
    DisturbanceConfig dist = cfg.disturbance;
    if (cfg.design.init.noise_free) {
      dist = DisturbanceConfig::none();
    } else {
      dist.seed = cfg.design.init.seed + static_cast<std::uint64_t>(prim.id) * 101;
    }
    const SimResult sim = simulate(prim.initial_state(), prim.input_signal, cfg.params, dist);
    const auto outputs = sim.outputs();
    const auto records = build_regressors(outputs, prim.input_signal);
    const auto instruments =
        generate_instruments(prim.input_signal, nominal, outputs.front());

    PrimitiveDataset data;
    data.q = prim.id;
    data.phi.reserve(records.size());
    data.z.reserve(instruments.size());
    for (const auto& rec : records) data.phi.push_back(rec.phi);
    for (const auto& rec : instruments) data.z.push_back(rec.z);
    init.ids.push_back(prim.id);
    init.datasets.push_back(std::move(data));
  }
  return init;
}

double CvResult::norm() const {
  if (degenerate) return std::numeric_limits<double>::infinity();
  return std::sqrt(eps_u * eps_u + eps_v * eps_v + eps_r * eps_r);
}

CvResult cv_validate(const Eigen::VectorXd& theta_hat, const ValidationScenario& scenario,
                     const PrimitiveLibrary* distinct_from) {
  if (distinct_from != nullptr) {
    for (const auto& prim : distinct_from->primitives) {
      if (prim.input_signal.size() != scenario.input.size()) continue;
      bool same = true;
      for (std::size_t k = 0; k < scenario.input.size() && same; ++k) {
        same = prim.input_signal[k] == scenario.input[k];
      }
      if (same) {
        throw ConfigError("validation input coincides with dictionary maneuver " +
                          std::to_string(prim.id));
      }
    }
  }

  const SimResult truth =
      simulate(scenario.initial, scenario.input, scenario.params, DisturbanceConfig::none());

  CvResult cv;
  SimResult predicted;
  try {
    predicted = simulate(scenario.initial, scenario.input, VesselParams::from_theta(theta_hat),
                         DisturbanceConfig::none());
  } catch (const SimulationError& e) {
    cv.degenerate = true;
    cv.divergence_step = e.step();
    cv.eps_u = cv.eps_v = cv.eps_r = kNan;
    return cv;
  }

  Vec3 sq = Vec3::Zero();
  const std::size_t n = truth.steps.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 diff = predicted.steps[k].state.vec() - truth.steps[k].state.vec();
    sq += diff.cwiseProduct(diff);
  }
  cv.eps_u = std::sqrt(sq[0] / n);
  cv.eps_v = std::sqrt(sq[1] / n);
  cv.eps_r = std::sqrt(sq[2] / n);
  return cv;
}

std::string to_string(DesignLabel label) {
  switch (label) {
    case DesignLabel::Optimized: return "optimized";
    case DesignLabel::Random: return "random";
    case DesignLabel::Uniform: return "uniform";
  }
  return "unknown";
}

std::vector<Vec3> stitch_optimized_inputs(const PrimitiveLibrary& library,
                                          const Allocation& allocation,
                                          const std::vector<int>& ids, long total_n,
                                          BodyVelocity* initial) {
  const int q_count = static_cast<int>(allocation.fractions.size());
  if (static_cast<int>(ids.size()) != q_count) {
    throw ConfigError("allocation and id list disagree");
  }

  std::vector<long> samples(q_count);
  long assigned = 0;
  int largest = 0;
  for (int q = 0; q < q_count; ++q) {
    samples[q] = std::llround(allocation.fractions[q] * static_cast<double>(total_n));
    assigned += samples[q];
    if (allocation.fractions[q] > allocation.fractions[largest]) largest = q;
  }
  samples[largest] += total_n - assigned;  // absorb rounding drift
  if (samples[largest] < 0) {
    throw ConfigError("allocation rounding produced a negative duration");
  }

  std::vector<Vec3> tau;
  tau.reserve(static_cast<std::size_t>(total_n));
  bool first = true;
  for (int q = 0; q < q_count; ++q) {
    if (samples[q] <= 0) continue;
    const auto& prim = library.by_id(ids[q]);
    if (first && initial != nullptr) *initial = prim.initial_state();
    first = false;
    const auto chunk = take_samples(prim, samples[q]);
    tau.insert(tau.end(), chunk.begin(), chunk.end());
  }
  if (tau.empty()) {
    throw ConfigError("allocation assigns no samples");
  }
  return tau;
}

std::vector<Vec3> stitch_random_inputs(const PrimitiveLibrary& library, int segments,
                                       int segment_length, Rng& rng, BodyVelocity* initial) {
  std::vector<Vec3> tau;
  tau.reserve(static_cast<std::size_t>(segments) * segment_length);
  for (int s = 0; s < segments; ++s) {
    const auto& prim =
        library.primitives[rng.integer(static_cast<std::uint64_t>(library.size()))];
    if (s == 0 && initial != nullptr) *initial = prim.initial_state();
    const auto chunk = take_samples(prim, segment_length);
    tau.insert(tau.end(), chunk.begin(), chunk.end());
  }
  return tau;
}

namespace {

struct EstimationOutcome {
  bool ok = false;
  std::string reason;
  ThetaEstimate estimate;
};

EstimationOutcome estimate_from_run(const ScenarioConfig& cfg, const std::vector<Vec3>& outputs,
                                    const std::vector<Vec3>& tau) {
  EstimationOutcome out;
  try {
    const auto records = build_regressors(outputs, tau);
    auto instruments =
        generate_instruments(tau, NominalModel{cfg.nominal_theta}, outputs.front());
    instruments = demean_complete(instruments, {instruments.size()});
    out.estimate = iv_estimate(records, instruments);
    out.ok = true;
  } catch (const Error& e) {
    out.reason = e.what();
  }
  return out;
}

double normalized_param_error(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta_true) {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < theta_true.size(); ++i) {
    const double rel = (theta_hat[i] - theta_true[i]) / theta_true[i];
    sq += rel * rel;
  }
  return std::sqrt(sq);
}

void finalize_fractions(MonteCarloReport& report) {
  int param_below = 0;
  int cv_below = 0;
  for (const auto& run : report.per_run) {
    if (std::isfinite(run.param_err_norm) && run.param_err_norm < report.param_threshold) {
      ++param_below;
    }
    if (std::isfinite(run.cv_norm) && run.cv_norm < report.cv_threshold) ++cv_below;
  }
  const double n = static_cast<double>(report.per_run.size());
  report.fraction_param_below = n > 0 ? param_below / n : 0.0;
  report.fraction_cv_below = n > 0 ? cv_below / n : 0.0;
}

}  // namespace

MonteCarloReport run_monte_carlo(const ScenarioConfig& cfg, DesignLabel label,
                                 const PrimitiveLibrary& library, const Allocation* allocation,
                                 int runs_override) {
  const int runs = runs_override > 0 ? runs_override : cfg.mc.runs;
  const long total_n = static_cast<long>(std::llround(cfg.design.total_n));

  std::vector<int> ids;
  for (const auto& p : library.primitives) ids.push_back(p.id);

  std::vector<Vec3> fixed_tau;
  BodyVelocity fixed_initial;
  if (label != DesignLabel::Random) {
    if (allocation == nullptr) {
      throw ConfigError("a fixed design needs an allocation");
    }
    fixed_tau = stitch_optimized_inputs(library, *allocation, ids, total_n, &fixed_initial);
  }

  const ValidationScenario validation{cfg.params, cfg.dt, cfg.validation.initial,
                                      make_validation_input(cfg.validation, cfg.dt)};
  const Eigen::VectorXd theta_true = cfg.params.theta();

  MonteCarloReport report;
  report.design = to_string(label);
  report.runs = runs;
  report.param_threshold = cfg.mc.param_threshold;
  report.cv_threshold = cfg.mc.cv_threshold;

  for (int run = 0; run < runs; ++run) {
    RunMetrics metrics;
    metrics.run = run;
    metrics.seed = cfg.mc.base_seed + static_cast<std::uint64_t>(run);
    metrics.param_err_norm = kNan;
    metrics.eps_u = metrics.eps_v = metrics.eps_r = kNan;
    metrics.cv_norm = kNan;

    std::vector<Vec3> tau;
    BodyVelocity initial;
    if (label == DesignLabel::Random) {
      Rng design_rng(metrics.seed ^ kDesignSeedSalt);
      tau = stitch_random_inputs(library, cfg.mc.random_segments, cfg.mc.random_segment_length,
                                 design_rng, &initial);
    } else {
      tau = fixed_tau;
      initial = fixed_initial;
    }

    DisturbanceConfig dist = cfg.disturbance;
    dist.seed = metrics.seed;

    try {
      const SimResult sim = simulate(initial, tau, cfg.params, dist);
      const EstimationOutcome outcome = estimate_from_run(cfg, sim.outputs(), tau);
      if (!outcome.ok) {
        metrics.degenerate = true;
        metrics.reason = outcome.reason;
      } else {
        metrics.param_err_norm = normalized_param_error(outcome.estimate.theta_hat, theta_true);
        const CvResult cv = cv_validate(outcome.estimate.theta_hat, validation);
        if (cv.degenerate) {
          metrics.degenerate = true;
          metrics.reason = "estimated model diverged in cross-validation";
        } else {
          metrics.eps_u = cv.eps_u;
          metrics.eps_v = cv.eps_v;
          metrics.eps_r = cv.eps_r;
          metrics.cv_norm = cv.norm();
        }
      }
    } catch (const Error& e) {
      metrics.degenerate = true;
      metrics.reason = e.what();
    }

    report.per_run.push_back(std::move(metrics));
  }

  finalize_fractions(report);
  return report;
}

std::vector<SubExperiment> simulate_subexperiment_pool(const ScenarioConfig& cfg,
                                                       const PrimitiveLibrary& library) {
  std::vector<SubExperiment> pool;
  int batch = 0;
  for (const auto& prim : library.primitives) {
    // One continuous recording per maneuver, divided into equal parts, so the
    // parts cover all phases of the motion.
    const long part = cfg.resample.samples;
    const long total = static_cast<long>(cfg.resample.per_primitive) * part;
    const auto tau = take_samples(prim, total);
    DisturbanceConfig dist = cfg.disturbance;
    dist.seed = cfg.resample.pool_seed + static_cast<std::uint64_t>(prim.id) * 1009;
    const SimResult sim = simulate(prim.initial_state(), tau, cfg.params, dist);
    for (int j = 0; j < cfg.resample.per_primitive; ++j) {
      SubExperiment sub;
      sub.batch_id = batch++;
      sub.primitive_id = prim.id;
      for (long k = j * part; k < (j + 1) * part; ++k) {
        sub.y.push_back(sim.steps[k].y);
        sub.tau.push_back(tau[k]);
      }
      pool.push_back(std::move(sub));
    }
  }
  return pool;
}

namespace {

// Estimate over a set of pool batches: records are built per batch (outputs
// are not continuous across recordings) and instruments are demeaned over
// the complete concatenation.
EstimationOutcome estimate_from_batches(const std::vector<SubExperiment>& pool,
                                        const std::vector<int>& picked,
                                        const Eigen::VectorXd& nominal_theta) {
  EstimationOutcome out;
  try {
    std::vector<RegressionRecord> records;
    std::vector<InstrumentRecord> instruments;
    std::vector<std::size_t> batch_sizes;
    for (int idx : picked) {
      const auto& sub = pool[idx];
      auto recs = build_regressors(sub.y, sub.tau);
      auto instr = generate_instruments(sub.tau, NominalModel{nominal_theta}, sub.y.front());
      batch_sizes.push_back(recs.size());
      records.insert(records.end(), recs.begin(), recs.end());
      instruments.insert(instruments.end(), instr.begin(), instr.end());
    }
    instruments = demean_complete(instruments, batch_sizes);
    out.estimate = iv_estimate(records, instruments);
    out.ok = true;
  } catch (const Error& e) {
    out.reason = e.what();
  }
  return out;
}

CvResult cv_against_pool(const Eigen::VectorXd& theta_hat, const std::vector<SubExperiment>& pool,
                         const VesselParams& true_params) {
  (void)true_params;
  CvResult cv;
  Vec3 sq = Vec3::Zero();
  long n = 0;
  VesselParams model;
  try {
    model = VesselParams::from_theta(theta_hat);
  } catch (const Error&) {
    cv.degenerate = true;
    return cv;
  }
  for (const auto& sub : pool) {
    SimResult predicted;
    try {
      predicted = simulate(BodyVelocity::from(sub.y.front()), sub.tau, model,
                           DisturbanceConfig::none());
    } catch (const SimulationError& e) {
      cv.degenerate = true;
      cv.divergence_step = e.step();
      cv.eps_u = cv.eps_v = cv.eps_r = kNan;
      return cv;
    }
    for (std::size_t k = 0; k < sub.y.size(); ++k) {
      const Vec3 diff = predicted.steps[k].state.vec() - sub.y[k];
      sq += diff.cwiseProduct(diff);
    }
    n += static_cast<long>(sub.y.size());
  }
  cv.eps_u = std::sqrt(sq[0] / n);
  cv.eps_v = std::sqrt(sq[1] / n);
  cv.eps_r = std::sqrt(sq[2] / n);
  return cv;
}

std::vector<int> pick_without_replacement(std::vector<int> candidates, int count, Rng& rng) {
  if (count > static_cast<int>(candidates.size())) {
    throw ConfigError("cannot pick " + std::to_string(count) + " of " +
                      std::to_string(candidates.size()) + " sub-experiments");
  }
  for (int i = 0; i < count; ++i) {
    const std::size_t j = i + rng.integer(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(count);
  return candidates;
}

}  // namespace

MonteCarloReport resample_study(const ScenarioConfig& cfg, const std::vector<SubExperiment>& pool,
                                bool random_design) {
  if (pool.empty()) {
    throw ConfigError("empty sub-experiment pool");
  }

  // Crude model for the instruments, bootstrapped from the whole pool by
  // least squares.
  std::vector<RegressionRecord> all_records;
  for (const auto& sub : pool) {
    auto recs = build_regressors(sub.y, sub.tau);
    all_records.insert(all_records.end(), recs.begin(), recs.end());
  }
  const Eigen::VectorXd nominal_theta = ls_estimate(all_records).theta_hat;

  const Eigen::VectorXd theta_true = cfg.params.theta();

  MonteCarloReport report;
  report.design = random_design ? "random" : "optimized";
  report.runs = cfg.resample.resamples;
  report.param_threshold = cfg.mc.param_threshold;
  report.cv_threshold = cfg.resample.cv_threshold;

  for (int rep = 0; rep < cfg.resample.resamples; ++rep) {
    RunMetrics metrics;
    metrics.run = rep;
    metrics.seed = cfg.resample.seed + static_cast<std::uint64_t>(rep);
    metrics.param_err_norm = kNan;
    metrics.eps_u = metrics.eps_v = metrics.eps_r = kNan;
    metrics.cv_norm = kNan;

    Rng rng(metrics.seed);
    std::vector<int> picked;
    if (random_design) {
      std::vector<int> all(pool.size());
      std::iota(all.begin(), all.end(), 0);
      picked = pick_without_replacement(all, cfg.resample.random_picks, rng);
    } else {
      for (const auto& [primitive_id, count] : cfg.resample.picks) {
        std::vector<int> candidates;
        for (std::size_t i = 0; i < pool.size(); ++i) {
          if (pool[i].primitive_id == primitive_id) candidates.push_back(static_cast<int>(i));
        }
        const auto chosen = pick_without_replacement(candidates, count, rng);
        picked.insert(picked.end(), chosen.begin(), chosen.end());
      }
    }

    const EstimationOutcome outcome = estimate_from_batches(pool, picked, nominal_theta);
    if (!outcome.ok) {
      metrics.degenerate = true;
      metrics.reason = outcome.reason;
    } else {
      metrics.param_err_norm = normalized_param_error(outcome.estimate.theta_hat, theta_true);
      const CvResult cv = cv_against_pool(outcome.estimate.theta_hat, pool, cfg.params);
      if (cv.degenerate) {
        metrics.degenerate = true;
        metrics.reason = "estimated model diverged in cross-validation";
      } else {
        metrics.eps_u = cv.eps_u;
        metrics.eps_v = cv.eps_v;
        metrics.eps_r = cv.eps_r;
        metrics.cv_norm = cv.norm();
      }
    }
    report.per_run.push_back(std::move(metrics));
  }

  finalize_fractions(report);
  return report;
}

namespace {

std::vector<int> required_counters_from(const Schedule& schedule) {
  std::vector<int> required;
  for (const auto& seg : schedule.segments) {
    if (seg.repetitions > 0) required.push_back(seg.repetitions);
  }
  return required;
}

HeuristicWeights weights_from_spec(const PlannerSpec& spec) {
  if (spec.weights == "admissible") return HeuristicWeights::admissible_bound();
  if (spec.weights == "zero") return HeuristicWeights::zero();
  return HeuristicWeights::defaults(spec.lattice.cell_size);
}

}  // namespace

PipelineArtifacts run_pipeline(const ScenarioConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  PipelineArtifacts art;

  InitialExperiments init = collect_initial_experiments(cfg);
  art.library = std::move(init.library);
  art.candidate_ids = init.ids;
  art.summaries = estimate_summaries(init.datasets, cfg.design.min_samples);

  art.allocation =
      optimize_allocation(art.summaries, cfg.design.total_n, cfg.design.mode,
                          uniform_fractions(static_cast<int>(art.summaries.size())),
                          cfg.design.optimize);

  std::vector<int> segment_lengths;
  for (int id : art.candidate_ids) {
    segment_lengths.push_back(art.library.by_id(id).natural_segment);
  }
  art.schedule = realize_schedule(art.allocation, segment_lengths, art.candidate_ids);

  Schedule planner_schedule;
  if (cfg.planner.use_design_schedule) {
    planner_schedule = art.schedule;
  } else {
    for (int id : cfg.planner.informative) {
      planner_schedule.segments.push_back(ScheduleSegment{
          id, cfg.planner.repetitions, art.library.by_id(id).natural_segment});
    }
  }

  art.motion_set = build_primitive_set(planner_schedule, art.library, cfg.planner.basics,
                                       cfg.planner.lattice, cfg.params, cfg.dt);

  PlannerProblem problem;
  problem.map = cfg.planner.map;
  problem.start_cx = cfg.planner.start_cx;
  problem.start_cy = cfg.planner.start_cy;
  problem.start_h = cfg.planner.start_h;
  problem.goal_cx = cfg.planner.goal_cx;
  problem.goal_cy = cfg.planner.goal_cy;
  problem.goal_h = cfg.planner.goal_h;
  problem.required_counters = required_counters_from(planner_schedule);

  SearchOptions search;
  search.weights = weights_from_spec(cfg.planner);
  art.plan = astar_plan(problem, art.motion_set, search);

  art.stitched_tau = stitched_inputs(art.plan, art.motion_set);
  if (art.stitched_tau.empty()) {
    throw Error(Stage::Planning, "planned experiment contains no samples");
  }

  DisturbanceConfig dist = cfg.disturbance;
  const BodyVelocity replay_initial = art.motion_set[art.plan.primitive_ids.front()].initial_state;
  art.replay = simulate(replay_initial, art.stitched_tau, cfg.params, dist);

  const auto outputs = art.replay.outputs();
  const auto records = build_regressors(outputs, art.stitched_tau);
  auto instruments =
      generate_instruments(art.stitched_tau, NominalModel{cfg.nominal_theta}, outputs.front());
  instruments = demean_complete(instruments, {instruments.size()});
  art.estimate = iv_estimate(records, instruments);

  const ValidationScenario validation{cfg.params, cfg.dt, cfg.validation.initial,
                                      make_validation_input(cfg.validation, cfg.dt)};
  art.cv = cv_validate(art.estimate.theta_hat, validation, &art.library);

  if (!out_dir.empty()) {
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    write_library_json(dir / "library.json", art.library, cfg.dt);
    write_envelopes_json(dir / "fullscale_envelopes.json", fullscale_primitive_specs(), 1.0);
    write_summaries_json(dir / "summaries.json", art.summaries, art.candidate_ids);
    write_allocation_json(dir / "allocation.json", art.allocation, art.candidate_ids,
                          cfg.design.mode, &art.library);
    write_schedule_json(dir / "schedule.json", art.schedule);
    write_plan_json(dir / "plan.json", art.plan, art.motion_set, problem.map);
    write_plan_inputs_csv(dir / "plan_inputs.csv", art.plan, art.motion_set);
    write_trajectory_csv(dir / "replay.csv", art.replay, art.stitched_tau);
    write_estimate_json(dir / "estimate.json", art.estimate);
    write_cv_json(dir / "cv.json", art.cv);
  }
  return art;
}

}  // namespace marex
