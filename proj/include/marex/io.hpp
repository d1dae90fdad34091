#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "marex/config.hpp"
#include "marex/estimator.hpp"
#include "marex/harness.hpp"

namespace marex {

ScenarioConfig load_scenario(const std::filesystem::path& path);

// Occupancy maps: JSON ({width, height, cell_size, blocked: [[x,y],...]}) or
// a text grid ('#' blocked, '.' free, top row printed first).
OccupancyMap load_map(const std::filesystem::path& path);
void save_map_txt(const std::filesystem::path& path, const OccupancyMap& map);

void write_trajectory_csv(const std::filesystem::path& path, const SimResult& sim,
                          const std::vector<Vec3>& tau);

struct Dataset {
  std::vector<Vec3> y;
  std::vector<Vec3> tau;
  std::vector<int> batch;  // optional sub-experiment ids; empty when absent
};

Dataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

std::vector<SubExperiment> dataset_to_subexperiments(const Dataset& data,
                                                     const std::vector<int>& primitive_of_batch);

void write_library_json(const std::filesystem::path& path, const PrimitiveLibrary& library,
                        double dt);
PrimitiveLibrary read_library_json(const std::filesystem::path& path);

// Envelope definitions without reference signals (the full-scale list).
void write_envelopes_json(const std::filesystem::path& path,
                          const std::vector<PrimitiveSpec>& specs, double sample_rate_hz);

void write_summaries_json(const std::filesystem::path& path,
                          const std::vector<InfoSummary>& summaries,
                          const std::vector<int>& ids);
std::vector<InfoSummary> read_summaries_json(const std::filesystem::path& path,
                                             std::vector<int>* ids = nullptr);

void write_allocation_json(const std::filesystem::path& path, const Allocation& allocation,
                           const std::vector<int>& ids, DesignMode mode,
                           const PrimitiveLibrary* library = nullptr);
Allocation read_allocation_json(const std::filesystem::path& path,
                                std::vector<int>* ids = nullptr, DesignMode* mode = nullptr);

void write_schedule_json(const std::filesystem::path& path, const Schedule& schedule);
Schedule read_schedule_json(const std::filesystem::path& path);

void write_plan_json(const std::filesystem::path& path, const Plan& plan,
                     const std::vector<MotionPrimitive>& primitives, const OccupancyMap& map);
void write_plan_inputs_csv(const std::filesystem::path& path, const Plan& plan,
                           const std::vector<MotionPrimitive>& primitives);

void write_estimate_json(const std::filesystem::path& path, const ThetaEstimate& estimate);
void write_cv_json(const std::filesystem::path& path, const CvResult& cv);

// report.json plus raw per-run metrics (runs.csv) and display-capped plot
// data (plot.csv) under `dir`, prefixed by the design label.
void write_mc_report(const std::filesystem::path& dir, const MonteCarloReport& report,
                     const MonteCarloSpec& spec);

}  // namespace marex
