#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace marex {

// Pipeline stage of a failure; the CLI maps these to distinct exit codes.
enum class Stage {
  Config,
  Simulation,
  Synthesis,
  Regression,
  Estimation,
  Design,
  Schedule,
  Planning,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(Stage stage, std::string msg)
      : std::runtime_error(std::move(msg)), stage_(stage) {}
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::string msg) : Error(Stage::Config, std::move(msg)) {}
};

class IoError : public Error {
 public:
  explicit IoError(std::string msg) : Error(Stage::Io, std::move(msg)) {}
};

// Non-finite inputs or a diverged trajectory; step < 0 means "not step-related".
class SimulationError : public Error {
 public:
  explicit SimulationError(std::string msg, long step = -1)
      : Error(Stage::Simulation, std::move(msg)), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

// A target envelope could not be realized; names the violated channel.
class SynthesisError : public Error {
 public:
  SynthesisError(std::string msg, std::string channel)
      : Error(Stage::Synthesis, std::move(msg)), channel_(std::move(channel)) {}
  const std::string& channel() const noexcept { return channel_; }

 private:
  std::string channel_;
};

class RegressionError : public Error {
 public:
  explicit RegressionError(std::string msg) : Error(Stage::Regression, std::move(msg)) {}
};

// Instrument generation failed, typically because the nominal model diverged.
class InstrumentError : public Error {
 public:
  explicit InstrumentError(std::string msg, long step = -1)
      : Error(Stage::Regression, std::move(msg)), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

// The normal matrix is rank deficient: the data does not excite all
// parameter directions. Carries the numerical rank and the name of the
// worst-conditioned channel block.
class NonInformativeDataError : public Error {
 public:
  NonInformativeDataError(std::string msg, int rank, std::string worst_block)
      : Error(Stage::Estimation, std::move(msg)),
        rank_(rank),
        worst_block_(std::move(worst_block)) {}
  int rank() const noexcept { return rank_; }
  const std::string& worst_block() const noexcept { return worst_block_; }

 private:
  int rank_;
  std::string worst_block_;
};

// Every evaluated allocation was singular: the dictionary cannot span the
// parameter space.
class DictionaryDeficiencyError : public Error {
 public:
  explicit DictionaryDeficiencyError(std::string msg) : Error(Stage::Design, std::move(msg)) {}
};

// Search exhausted without fulfilling the goal; carries the best counter
// vector that was reached.
class PlanningError : public Error {
 public:
  PlanningError(std::string msg, std::vector<int> max_counters)
      : Error(Stage::Planning, std::move(msg)), max_counters_(std::move(max_counters)) {}
  const std::vector<int>& max_counters() const noexcept { return max_counters_; }

 private:
  std::vector<int> max_counters_;
};

}  // namespace marex
