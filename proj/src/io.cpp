#include "marex/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "marex/errors.hpp"

namespace marex {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("failed to parse " + path.string() + ": " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << j.dump(2) << "\n";
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.size();
  const auto cols = rows > 0 ? j.at(0).size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

json vec3_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from_json(const json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

json envelope_to_json(const ChannelEnvelope& e) {
  switch (e.kind) {
    case ChannelEnvelope::Kind::Constant: return {{"kind", "constant"}, {"value", e.a}};
    case ChannelEnvelope::Kind::Band: return {{"kind", "band"}, {"lo", e.a}, {"hi", e.b}};
    case ChannelEnvelope::Kind::AbsBand: return {{"kind", "abs_band"}, {"lo", e.a}, {"hi", e.b}};
    case ChannelEnvelope::Kind::Ramp: return {{"kind", "ramp"}, {"from", e.a}, {"to", e.b}};
  }
  return {};
}

}  // namespace

ScenarioConfig ScenarioConfig::reference() {
  ScenarioConfig cfg;
  cfg.nominal_theta = NominalModel::reference().theta_prime;
  cfg.disturbance.current_noise = 0.025;
  cfg.disturbance.meas_noise = 0.025;
  cfg.disturbance.interpretation = NoiseInterpretation::Variance;
  cfg.disturbance.seed = 1;
  cfg.resample.picks = {{1, 1}, {6, 3}, {9, 1}, {11, 1}};
  return cfg;
}

namespace {

void parse_disturbance(const json& j, DisturbanceConfig& d) {
  d.current_noise = j.value("current", d.current_noise);
  d.meas_noise = j.value("meas", d.meas_noise);
  d.process_noise = j.value("process", d.process_noise);
  if (j.contains("interpretation")) {
    const std::string mode = j.at("interpretation").get<std::string>();
    if (mode == "variance") {
      d.interpretation = NoiseInterpretation::Variance;
    } else if (mode == "std") {
      d.interpretation = NoiseInterpretation::StdDev;
    } else {
      throw ConfigError("disturbance.interpretation must be \"variance\" or \"std\"");
    }
  }
  d.constant_current = j.value("constant_current", d.constant_current);
  d.seed = j.value("seed", d.seed);
}

}  // namespace

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  const json j = load_json(path);
  ScenarioConfig cfg = ScenarioConfig::reference();

  cfg.dt = j.value("dt", cfg.dt);
  if (j.contains("params")) {
    const json& p = j.at("params");
    cfg.params.x_u = p.value("x_u", cfg.params.x_u);
    cfg.params.x_uu = p.value("x_uu", cfg.params.x_uu);
    cfg.params.x_vr = p.value("x_vr", cfg.params.x_vr);
    cfg.params.x_tau = p.value("x_tau", cfg.params.x_tau);
    cfg.params.y_v = p.value("y_v", cfg.params.y_v);
    cfg.params.y_ur = p.value("y_ur", cfg.params.y_ur);
    cfg.params.y_tau = p.value("y_tau", cfg.params.y_tau);
    cfg.params.n_r = p.value("n_r", cfg.params.n_r);
    cfg.params.n_uv = p.value("n_uv", cfg.params.n_uv);
    cfg.params.n_tau = p.value("n_tau", cfg.params.n_tau);
    cfg.params.validate();
  }
  if (j.contains("nominal_theta")) {
    const auto& t = j.at("nominal_theta");
    if (t.size() != kNumParams) {
      throw ConfigError("nominal_theta must have 10 entries");
    }
    for (int i = 0; i < kNumParams; ++i) cfg.nominal_theta[i] = t.at(i).get<double>();
  }
  if (j.contains("disturbance")) parse_disturbance(j.at("disturbance"), cfg.disturbance);

  if (j.contains("synthesis")) {
    const json& s = j.at("synthesis");
    cfg.synth_duration = s.value("duration", cfg.synth_duration);
    cfg.synth_period = s.value("period", cfg.synth_period);
    if (s.contains("tau_limit")) cfg.synthesis.tau_limit = vec3_from_json(s.at("tau_limit"));
    cfg.synthesis.dither_fraction = s.value("dither_fraction", cfg.synthesis.dither_fraction);
    cfg.synthesis.envelope_tolerance =
        s.value("envelope_tolerance", cfg.synthesis.envelope_tolerance);
    cfg.synthesis.slew_samples = s.value("slew_samples", cfg.synthesis.slew_samples);
  }

  if (j.contains("design")) {
    const json& d = j.at("design");
    const std::string mode = d.value("mode", std::string("zero_mean"));
    if (mode == "zero_mean") {
      cfg.design.mode = DesignMode::ZeroMean;
    } else if (mode == "basic") {
      cfg.design.mode = DesignMode::Basic;
    } else {
      throw ConfigError("design.mode must be \"zero_mean\" or \"basic\"");
    }
    cfg.design.total_n = d.value("total_n", cfg.design.total_n);
    cfg.design.min_samples = d.value("min_samples", cfg.design.min_samples);
    cfg.design.optimize.starts = d.value("starts", cfg.design.optimize.starts);
    cfg.design.optimize.max_iterations =
        d.value("max_iterations", cfg.design.optimize.max_iterations);
    cfg.design.optimize.step_tolerance =
        d.value("step_tolerance", cfg.design.optimize.step_tolerance);
    cfg.design.optimize.random_probes = d.value("random_probes", cfg.design.optimize.random_probes);
    cfg.design.optimize.seed = d.value("seed", cfg.design.optimize.seed);
    if (d.contains("init_experiments")) {
      const json& e = d.at("init_experiments");
      cfg.design.init.noise_free = e.value("noise_free", cfg.design.init.noise_free);
      cfg.design.init.seed = e.value("seed", cfg.design.init.seed);
    }
  }

  if (j.contains("montecarlo")) {
    const json& m = j.at("montecarlo");
    cfg.mc.runs = m.value("runs", cfg.mc.runs);
    cfg.mc.base_seed = m.value("base_seed", cfg.mc.base_seed);
    cfg.mc.random_segments = m.value("random_segments", cfg.mc.random_segments);
    cfg.mc.random_segment_length =
        m.value("random_segment_length", cfg.mc.random_segment_length);
    cfg.mc.param_threshold = m.value("param_threshold", cfg.mc.param_threshold);
    cfg.mc.cv_threshold = m.value("cv_threshold", cfg.mc.cv_threshold);
    if (m.contains("plot_caps")) {
      const json& c = m.at("plot_caps");
      cfg.mc.plot_cap_param = c.value("param", cfg.mc.plot_cap_param);
      cfg.mc.plot_cap_cv_u = c.value("cv_u", cfg.mc.plot_cap_cv_u);
      cfg.mc.plot_cap_cv_v = c.value("cv_v", cfg.mc.plot_cap_cv_v);
      cfg.mc.plot_cap_cv_r = c.value("cv_r", cfg.mc.plot_cap_cv_r);
      cfg.mc.plot_cap_cv_norm = c.value("cv_norm", cfg.mc.plot_cap_cv_norm);
    }
  }

  if (j.contains("resample")) {
    const json& r = j.at("resample");
    cfg.resample.per_primitive = r.value("per_primitive", cfg.resample.per_primitive);
    cfg.resample.samples = r.value("samples", cfg.resample.samples);
    cfg.resample.resamples = r.value("resamples", cfg.resample.resamples);
    cfg.resample.seed = r.value("seed", cfg.resample.seed);
    cfg.resample.pool_seed = r.value("pool_seed", cfg.resample.pool_seed);
    cfg.resample.random_picks = r.value("random_picks", cfg.resample.random_picks);
    cfg.resample.cv_threshold = r.value("cv_threshold", cfg.resample.cv_threshold);
    if (r.contains("picks")) {
      cfg.resample.picks.clear();
      for (const auto& [key, value] : r.at("picks").items()) {
        cfg.resample.picks[std::stoi(key)] = value.get<int>();
      }
    }
  }

  if (j.contains("validation")) {
    const json& v = j.at("validation");
    cfg.validation.duration = v.value("duration", cfg.validation.duration);
    cfg.validation.surge_level = v.value("surge_level", cfg.validation.surge_level);
    cfg.validation.surge_amp = v.value("surge_amp", cfg.validation.surge_amp);
    cfg.validation.sway_amp = v.value("sway_amp", cfg.validation.sway_amp);
    cfg.validation.yaw_amp = v.value("yaw_amp", cfg.validation.yaw_amp);
    cfg.validation.f0_hz = v.value("f0", cfg.validation.f0_hz);
    cfg.validation.f1_hz = v.value("f1", cfg.validation.f1_hz);
    if (v.contains("initial")) {
      cfg.validation.initial = BodyVelocity::from(vec3_from_json(v.at("initial")));
    }
  }

  if (j.contains("planner")) {
    const json& p = j.at("planner");
    cfg.planner.lattice.cell_size = p.value("cell_size", cfg.planner.lattice.cell_size);
    cfg.planner.lattice.inflation_cells =
        p.value("inflation_cells", cfg.planner.lattice.inflation_cells);
    cfg.planner.lattice.box_chunk = p.value("box_chunk", cfg.planner.lattice.box_chunk);
    cfg.planner.lattice.l_bar = p.value("l_bar", cfg.planner.lattice.l_bar);
    cfg.planner.weights = p.value("weights", cfg.planner.weights);
    cfg.planner.use_design_schedule =
        p.value("use_design_schedule", cfg.planner.use_design_schedule);
    if (p.contains("informative")) {
      cfg.planner.informative.clear();
      for (const auto& id : p.at("informative")) cfg.planner.informative.push_back(id.get<int>());
    }
    cfg.planner.repetitions = p.value("repetitions", cfg.planner.repetitions);
    if (p.contains("basics")) {
      const json& b = p.at("basics");
      cfg.planner.basics.cruise_speed = b.value("cruise_speed", cfg.planner.basics.cruise_speed);
      cfg.planner.basics.rotate_rate = b.value("rotate_rate", cfg.planner.basics.rotate_rate);
    }
    if (p.contains("start")) {
      cfg.planner.start_cx = p.at("start").value("cx", cfg.planner.start_cx);
      cfg.planner.start_cy = p.at("start").value("cy", cfg.planner.start_cy);
      cfg.planner.start_h = p.at("start").value("h", cfg.planner.start_h);
    }
    if (p.contains("goal")) {
      cfg.planner.goal_cx = p.at("goal").value("cx", cfg.planner.goal_cx);
      cfg.planner.goal_cy = p.at("goal").value("cy", cfg.planner.goal_cy);
      cfg.planner.goal_h = p.at("goal").value("h", cfg.planner.goal_h);
    }
    cfg.planner.map_file = p.value("map_file", cfg.planner.map_file);
    if (!cfg.planner.map_file.empty()) {
      cfg.planner.map = load_map(path.parent_path() / cfg.planner.map_file);
    }
    cfg.planner.map.cell_size = cfg.planner.lattice.cell_size;
  }

  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    cfg.simulate.kind = s.value("kind", cfg.simulate.kind);
    cfg.simulate.primitive_id = s.value("primitive_id", cfg.simulate.primitive_id);
    if (s.contains("initial")) {
      cfg.simulate.initial = BodyVelocity::from(vec3_from_json(s.at("initial")));
      cfg.simulate.initial_given = true;
    }
    if (s.contains("tau")) {
      for (const auto& row : s.at("tau")) cfg.simulate.inline_tau.push_back(vec3_from_json(row));
    }
  }

  return cfg;
}

OccupancyMap load_map(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    const json j = load_json(path);
    OccupancyMap map = OccupancyMap::open(j.at("width").get<int>(), j.at("height").get<int>(),
                                          j.value("cell_size", 2.0));
    for (const auto& cell : j.at("blocked")) {
      const int x = cell.at(0).get<int>();
      const int y = cell.at(1).get<int>();
      if (!map.in_bounds(x, y)) {
        throw ConfigError("blocked cell (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") outside the map");
      }
      map.block(x, y);
    }
    return map;
  }

  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) {
    throw ConfigError("map file " + path.string() + " is empty");
  }
  const int height = static_cast<int>(rows.size());
  const int width = static_cast<int>(rows.front().size());
  OccupancyMap map = OccupancyMap::open(width, height, 2.0);
  for (int i = 0; i < height; ++i) {
    if (static_cast<int>(rows[i].size()) != width) {
      throw ConfigError("map rows differ in width");
    }
    for (int x = 0; x < width; ++x) {
      const char c = rows[i][x];
      const int y = height - 1 - i;  // top row printed first
      if (c == '#') {
        map.block(x, y);
      } else if (c != '.') {
        throw ConfigError(std::string("unexpected map character '") + c + "'");
      }
    }
  }
  return map;
}

void save_map_txt(const std::filesystem::path& path, const OccupancyMap& map) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  for (int y = map.height - 1; y >= 0; --y) {
    for (int x = 0; x < map.width; ++x) out << (map.blocked(x, y) ? '#' : '.');
    out << "\n";
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const SimResult& sim,
                          const std::vector<Vec3>& tau) {
  if (sim.steps.size() != tau.size()) {
    throw IoError("trajectory and input lengths differ");
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "k,u,v,r,y1,y2,y3,tau1,tau2,tau3\n";
  for (std::size_t k = 0; k < sim.steps.size(); ++k) {
    const auto& s = sim.steps[k];
    out << k << ',' << fmt(s.state.u) << ',' << fmt(s.state.v) << ',' << fmt(s.state.r) << ','
        << fmt(s.y[0]) << ',' << fmt(s.y[1]) << ',' << fmt(s.y[2]) << ',' << fmt(tau[k][0]) << ','
        << fmt(tau[k][1]) << ',' << fmt(tau[k][2]) << "\n";
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("dataset file " + path.string() + " is empty");
  }

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int iy1 = column("y1"), iy2 = column("y2"), iy3 = column("y3");
  const int it1 = column("tau1"), it2 = column("tau2"), it3 = column("tau3");
  const int ibatch = column("batch");
  if (iy1 < 0 || iy2 < 0 || iy3 < 0 || it1 < 0 || it2 < 0 || it3 < 0) {
    throw ConfigError("dataset must have columns y1,y2,y3,tau1,tau2,tau3");
  }

  Dataset data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    auto value = [&](int idx) { return std::stod(fields.at(idx)); };
    data.y.emplace_back(value(iy1), value(iy2), value(iy3));
    data.tau.emplace_back(value(it1), value(it2), value(it3));
    if (ibatch >= 0) data.batch.push_back(static_cast<int>(std::stol(fields.at(ibatch))));
  }
  return data;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  const bool with_batch = !data.batch.empty();
  out << "k,y1,y2,y3,tau1,tau2,tau3" << (with_batch ? ",batch" : "") << "\n";
  for (std::size_t k = 0; k < data.y.size(); ++k) {
    out << k << ',' << fmt(data.y[k][0]) << ',' << fmt(data.y[k][1]) << ',' << fmt(data.y[k][2])
        << ',' << fmt(data.tau[k][0]) << ',' << fmt(data.tau[k][1]) << ',' << fmt(data.tau[k][2]);
    if (with_batch) out << ',' << data.batch[k];
    out << "\n";
  }
}

std::vector<SubExperiment> dataset_to_subexperiments(const Dataset& data,
                                                     const std::vector<int>& primitive_of_batch) {
  if (data.batch.size() != data.y.size()) {
    throw ConfigError("dataset has no sub-experiment id column");
  }
  std::vector<SubExperiment> pool;
  for (std::size_t k = 0; k < data.y.size(); ++k) {
    const int id = data.batch[k];
    if (pool.empty() || pool.back().batch_id != id) {
      SubExperiment sub;
      sub.batch_id = id;
      sub.primitive_id = id < static_cast<int>(primitive_of_batch.size())
                             ? primitive_of_batch[id]
                             : 0;
      pool.push_back(std::move(sub));
    }
    pool.back().y.push_back(data.y[k]);
    pool.back().tau.push_back(data.tau[k]);
  }
  return pool;
}

void write_library_json(const std::filesystem::path& path, const PrimitiveLibrary& library,
                        double dt) {
  json j;
  j["dt"] = dt;
  json prims = json::array();
  for (const auto& p : library.primitives) {
    json e;
    e["id"] = p.id;
    e["label"] = p.label;
    e["duration"] = p.duration;
    e["natural_segment"] = p.natural_segment;
    e["displacement"] = {{"x", p.displacement.x}, {"y", p.displacement.y},
                         {"psi", p.displacement.psi}};
    json sig = json::array();
    for (const auto& t : p.input_signal) sig.push_back(vec3_to_json(t));
    e["input_signal"] = std::move(sig);
    json traj = json::array();
    for (const auto& s : p.expected_trajectory) traj.push_back(vec3_to_json(s.vec()));
    e["expected_trajectory"] = std::move(traj);
    prims.push_back(std::move(e));
  }
  j["primitives"] = std::move(prims);
  save_json(path, j);
}

PrimitiveLibrary read_library_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  PrimitiveLibrary lib;
  for (const auto& e : j.at("primitives")) {
    ExperimentPrimitive p;
    p.id = e.at("id").get<int>();
    p.label = e.at("label").get<std::string>();
    p.duration = e.at("duration").get<int>();
    p.natural_segment = e.at("natural_segment").get<int>();
    p.displacement.x = e.at("displacement").at("x").get<double>();
    p.displacement.y = e.at("displacement").at("y").get<double>();
    p.displacement.psi = e.at("displacement").at("psi").get<double>();
    for (const auto& t : e.at("input_signal")) p.input_signal.push_back(vec3_from_json(t));
    for (const auto& s : e.at("expected_trajectory")) {
      p.expected_trajectory.push_back(BodyVelocity::from(vec3_from_json(s)));
    }
    lib.primitives.push_back(std::move(p));
  }
  return lib;
}

void write_envelopes_json(const std::filesystem::path& path,
                          const std::vector<PrimitiveSpec>& specs, double sample_rate_hz) {
  json j;
  j["sample_rate_hz"] = sample_rate_hz;
  json prims = json::array();
  for (const auto& s : specs) {
    json e;
    e["id"] = s.id;
    e["label"] = s.label;
    e["duration"] = s.duration;
    e["period"] = s.period;
    e["u"] = envelope_to_json(s.u);
    e["v"] = envelope_to_json(s.v);
    e["r"] = envelope_to_json(s.r);
    prims.push_back(std::move(e));
  }
  j["primitives"] = std::move(prims);
  save_json(path, j);
}

void write_summaries_json(const std::filesystem::path& path,
                          const std::vector<InfoSummary>& summaries,
                          const std::vector<int>& ids) {
  json j;
  json entries = json::array();
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    json e;
    e["id"] = i < ids.size() ? ids[i] : s.q;
    e["n_samples"] = s.n_samples_used;
    e["gamma_bar"] = matrix_to_json(s.gamma_bar);
    e["x_bar"] = matrix_to_json(s.x_bar);
    e["y_bar"] = matrix_to_json(s.y_bar);
    e["z_bar"] = matrix_to_json(s.z_bar);
    entries.push_back(std::move(e));
  }
  j["summaries"] = std::move(entries);
  save_json(path, j);
}

std::vector<InfoSummary> read_summaries_json(const std::filesystem::path& path,
                                             std::vector<int>* ids) {
  const json j = load_json(path);
  std::vector<InfoSummary> summaries;
  if (ids != nullptr) ids->clear();
  for (const auto& e : j.at("summaries")) {
    InfoSummary s;
    s.q = e.at("id").get<int>();
    s.n_samples_used = e.at("n_samples").get<long>();
    s.gamma_bar = matrix_from_json(e.at("gamma_bar"));
    s.x_bar = matrix_from_json(e.at("x_bar"));
    s.y_bar = matrix_from_json(e.at("y_bar"));
    s.z_bar = matrix_from_json(e.at("z_bar"));
    if (ids != nullptr) ids->push_back(s.q);
    summaries.push_back(std::move(s));
  }
  return summaries;
}

void write_allocation_json(const std::filesystem::path& path, const Allocation& allocation,
                           const std::vector<int>& ids, DesignMode mode,
                           const PrimitiveLibrary* library) {
  json j;
  j["mode"] = mode == DesignMode::ZeroMean ? "zero_mean" : "basic";
  j["total_n"] = allocation.total_n;
  j["objective_value"] = allocation.objective_value;
  json entries = json::array();
  for (Eigen::Index q = 0; q < allocation.fractions.size(); ++q) {
    json e;
    const int id = q < static_cast<Eigen::Index>(ids.size()) ? ids[q] : static_cast<int>(q);
    e["id"] = id;
    if (library != nullptr) e["label"] = library->by_id(id).label;
    e["fraction"] = allocation.fractions[q];
    e["duration"] = allocation.fractions[q] * allocation.total_n;
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  save_json(path, j);
}

Allocation read_allocation_json(const std::filesystem::path& path, std::vector<int>* ids,
                                DesignMode* mode) {
  const json j = load_json(path);
  Allocation a;
  a.total_n = j.at("total_n").get<double>();
  a.objective_value = j.value("objective_value", 0.0);
  const auto& entries = j.at("entries");
  a.fractions.resize(entries.size());
  if (ids != nullptr) ids->clear();
  for (std::size_t q = 0; q < entries.size(); ++q) {
    a.fractions[q] = entries.at(q).at("fraction").get<double>();
    if (ids != nullptr) ids->push_back(entries.at(q).at("id").get<int>());
  }
  if (mode != nullptr) {
    *mode = j.value("mode", std::string("zero_mean")) == "basic" ? DesignMode::Basic
                                                                 : DesignMode::ZeroMean;
  }
  return a;
}

void write_schedule_json(const std::filesystem::path& path, const Schedule& schedule) {
  json j;
  json segments = json::array();
  for (const auto& seg : schedule.segments) {
    segments.push_back(json{{"id", seg.q},
                            {"repetitions", seg.repetitions},
                            {"segment_length", seg.segment_length}});
  }
  j["segments"] = std::move(segments);
  j["total_samples"] = schedule.total_samples();
  save_json(path, j);
}

Schedule read_schedule_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  Schedule schedule;
  for (const auto& seg : j.at("segments")) {
    schedule.segments.push_back(ScheduleSegment{seg.at("id").get<int>(),
                                                seg.at("repetitions").get<int>(),
                                                seg.at("segment_length").get<int>()});
  }
  return schedule;
}

namespace {

json pose_json(const OccupancyMap& map, int cx, int cy, int h) {
  return json{{"cx", cx},
              {"cy", cy},
              {"h", h},
              {"x", (cx + 0.5) * map.cell_size},
              {"y", (cy + 0.5) * map.cell_size},
              {"psi", wrap_angle(h * M_PI / 2.0)}};
}

}  // namespace

void write_plan_json(const std::filesystem::path& path, const Plan& plan,
                     const std::vector<MotionPrimitive>& primitives, const OccupancyMap& map) {
  json j;
  j["total_cost"] = plan.total_cost;
  int basic_count = 0;
  for (int id : plan.primitive_ids) {
    if (!primitives.at(id).informative()) ++basic_count;
  }
  j["basic_count"] = basic_count;
  if (!plan.states.empty()) j["final_counters"] = plan.states.back().counters;

  json steps = json::array();
  for (std::size_t i = 0; i < plan.primitive_ids.size(); ++i) {
    const auto& prim = primitives.at(plan.primitive_ids[i]);
    const auto& from = plan.states[i];
    const auto& to = plan.states[i + 1];
    json e;
    e["order"] = i;
    e["primitive"] = prim.id;
    e["label"] = prim.label;
    e["informative"] = prim.informative();
    e["library_id"] = prim.library_id;
    e["start"] = pose_json(map, from.cx, from.cy, from.h);
    e["end"] = pose_json(map, to.cx, to.cy, to.h);
    steps.push_back(std::move(e));
  }
  j["steps"] = std::move(steps);
  save_json(path, j);
}

void write_plan_inputs_csv(const std::filesystem::path& path, const Plan& plan,
                           const std::vector<MotionPrimitive>& primitives) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "k,tau1,tau2,tau3,primitive\n";
  long k = 0;
  for (int id : plan.primitive_ids) {
    const auto& prim = primitives.at(id);
    for (const auto& t : prim.input_signal) {
      out << k++ << ',' << fmt(t[0]) << ',' << fmt(t[1]) << ',' << fmt(t[2]) << ',' << prim.id
          << "\n";
    }
  }
}

void write_estimate_json(const std::filesystem::path& path, const ThetaEstimate& estimate) {
  json j;
  json theta = json::array();
  for (Eigen::Index i = 0; i < estimate.theta_hat.size(); ++i) theta.push_back(estimate.theta_hat[i]);
  j["theta_hat"] = std::move(theta);
  j["condition_number"] = estimate.condition_number;
  j["residual_norm"] = estimate.residual_norm;
  j["n_samples"] = estimate.n_samples;
  save_json(path, j);
}

void write_cv_json(const std::filesystem::path& path, const CvResult& cv) {
  json j;
  j["degenerate"] = cv.degenerate;
  if (cv.degenerate) {
    j["divergence_step"] = cv.divergence_step;
  } else {
    j["eps_u"] = cv.eps_u;
    j["eps_v"] = cv.eps_v;
    j["eps_r"] = cv.eps_r;
    j["norm"] = cv.norm();
  }
  save_json(path, j);
}

void write_mc_report(const std::filesystem::path& dir, const MonteCarloReport& report,
                     const MonteCarloSpec& spec) {
  std::filesystem::create_directories(dir);

  json j;
  j["design"] = report.design;
  j["runs"] = report.runs;
  j["param_threshold"] = report.param_threshold;
  j["cv_threshold"] = report.cv_threshold;
  j["fraction_param_below"] = report.fraction_param_below;
  j["fraction_cv_below"] = report.fraction_cv_below;
  j["param_error_normalization"] = "per-parameter |estimate - truth| / |truth|, 2-norm over parameters";
  int degenerate = 0;
  for (const auto& run : report.per_run) degenerate += run.degenerate ? 1 : 0;
  j["degenerate_runs"] = degenerate;
  save_json(dir / (report.design + "_report.json"), j);

  // Raw metrics, never truncated.
  {
    std::ofstream out(dir / (report.design + "_runs.csv"));
    if (!out) {
      throw IoError("cannot write run metrics");
    }
    out << "run,seed,degenerate,param_err_norm,eps_u,eps_v,eps_r,cv_norm\n";
    for (const auto& r : report.per_run) {
      out << r.run << ',' << r.seed << ',' << (r.degenerate ? 1 : 0) << ','
          << fmt(r.param_err_norm) << ',' << fmt(r.eps_u) << ',' << fmt(r.eps_v) << ','
          << fmt(r.eps_r) << ',' << fmt(r.cv_norm) << "\n";
    }
  }

  // Display data with the documented caps applied.
  {
    std::ofstream out(dir / (report.design + "_plot.csv"));
    if (!out) {
      throw IoError("cannot write plot data");
    }
    auto cap = [](double x, double limit) {
      if (!std::isfinite(x)) return limit;
      return std::min(x, limit);
    };
    out << "run,param_err_norm,eps_u,eps_v,eps_r,cv_norm\n";
    for (const auto& r : report.per_run) {
      out << r.run << ',' << fmt(cap(r.param_err_norm, spec.plot_cap_param)) << ','
          << fmt(cap(r.eps_u, spec.plot_cap_cv_u)) << ',' << fmt(cap(r.eps_v, spec.plot_cap_cv_v))
          << ',' << fmt(cap(r.eps_r, spec.plot_cap_cv_r)) << ','
          << fmt(cap(r.cv_norm, spec.plot_cap_cv_norm)) << "\n";
    }
  }
}

}  // namespace marex
