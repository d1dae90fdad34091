#include "marex/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "marex/errors.hpp"
#include "marex/rng.hpp"

namespace marex {

InfoSummary estimate_summary(const PrimitiveDataset& data, long min_samples) {
  const long n = static_cast<long>(data.phi.size());
  if (n == 0 || data.z.empty()) {
    throw Error(Stage::Design, "primitive " + std::to_string(data.q) + " has no samples");
  }
  if (data.phi.size() != data.z.size()) {
    throw Error(Stage::Design, "primitive " + std::to_string(data.q) +
                                   ": regressor/instrument length mismatch");
  }
  if (n < min_samples) {
    throw Error(Stage::Design, "primitive " + std::to_string(data.q) + " has only " +
                                   std::to_string(n) + " samples, " +
                                   std::to_string(min_samples) + " required");
  }

  const auto n_theta = data.phi.front().rows();
  const auto n_x = data.phi.front().cols();

  InfoSummary s;
  s.q = data.q;
  s.n_samples_used = n;
  s.x_bar = Eigen::MatrixXd::Zero(n_theta, n_theta);
  s.y_bar = Eigen::MatrixXd::Zero(n_theta, n_x);
  s.z_bar = Eigen::MatrixXd::Zero(n_theta, n_x);
  for (long k = 0; k < n; ++k) {
    s.x_bar.noalias() += data.phi[k] * data.z[k].transpose();
    s.y_bar += data.phi[k];
    s.z_bar += data.z[k];
  }
  s.x_bar /= static_cast<double>(n);
  s.y_bar /= static_cast<double>(n);
  s.z_bar /= static_cast<double>(n);
  // Demeaning the instruments within the batch subtracts exactly the
  // rank-one moment y_bar z_bar^T in finite samples.
  s.gamma_bar = s.x_bar - s.y_bar * s.z_bar.transpose();

  if (!s.x_bar.allFinite() || !s.y_bar.allFinite() || !s.z_bar.allFinite()) {
    throw Error(Stage::Design,
                "primitive " + std::to_string(data.q) + " produced non-finite moments");
  }
  return s;
}

std::vector<InfoSummary> estimate_summaries(const std::vector<PrimitiveDataset>& data,
                                            long min_samples) {
  std::vector<InfoSummary> out;
  out.reserve(data.size());
  for (const auto& d : data) out.push_back(estimate_summary(d, min_samples));
  return out;
}

namespace {

// Information matrix in fraction space (total duration factored out).
Eigen::MatrixXd kernel_matrix(const Eigen::VectorXd& rho, const std::vector<InfoSummary>& summaries,
                              DesignMode mode) {
  const auto n_theta = summaries.front().gamma_bar.rows();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n_theta, n_theta);
  if (mode == DesignMode::Basic) {
    for (std::size_t q = 0; q < summaries.size(); ++q) {
      k += rho[q] * summaries[q].gamma_bar;
    }
    return k;
  }
  const auto n_x = summaries.front().y_bar.cols();
  Eigen::MatrixXd pooled_y = Eigen::MatrixXd::Zero(n_theta, n_x);
  Eigen::MatrixXd pooled_z = Eigen::MatrixXd::Zero(n_theta, n_x);
  for (std::size_t q = 0; q < summaries.size(); ++q) {
    k += rho[q] * summaries[q].x_bar;
    pooled_y += rho[q] * summaries[q].y_bar;
    pooled_z += rho[q] * summaries[q].z_bar;
  }
  k -= pooled_y * pooled_z.transpose();
  return k;
}

void check_rho(const Eigen::VectorXd& rho, std::size_t q) {
  if (static_cast<std::size_t>(rho.size()) != q) {
    throw Error(Stage::Design, "fraction vector has " + std::to_string(rho.size()) +
                                   " entries for " + std::to_string(q) + " summaries");
  }
}

// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (int i = 0; i < n; ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / (i + 1);
    if (sorted[i] - candidate > 0.0) {
      threshold = candidate;
    }
  }
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(0.0, v[i] - threshold);
  return out;
}

Eigen::VectorXd random_simplex_point(Rng& rng, int q) {
  Eigen::VectorXd p(q);
  double total = 0.0;
  for (int i = 0; i < q; ++i) {
    p[i] = -std::log(1.0 - rng.uniform());
    total += p[i];
  }
  return p / total;
}

}  // namespace

LogDet log_abs_det(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw Error(Stage::Design, "log_abs_det requires a square matrix");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) {
    return LogDet{-std::numeric_limits<double>::infinity(), true};
  }
  double value = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    value += std::log(std::abs(lu.matrixLU()(i, i)));
  }
  if (!std::isfinite(value)) {
    return LogDet{-std::numeric_limits<double>::infinity(), true};
  }
  return LogDet{value, false};
}

Eigen::MatrixXd info_matrix(const Allocation& allocation, const std::vector<InfoSummary>& summaries,
                            DesignMode mode) {
  if (summaries.empty()) {
    throw Error(Stage::Design, "no summaries given");
  }
  check_rho(allocation.fractions, summaries.size());
  for (std::size_t q = 0; q < summaries.size(); ++q) {
    if (allocation.fractions[q] > 0.0 && summaries[q].n_samples_used <= 0) {
      throw Error(Stage::Design, "missing summary for primitive " + std::to_string(summaries[q].q));
    }
  }
  return allocation.total_n * kernel_matrix(allocation.fractions, summaries, mode);
}

double design_objective(const Eigen::VectorXd& rho, const std::vector<InfoSummary>& summaries,
                        DesignMode mode) {
  check_rho(rho, summaries.size());
  return log_abs_det(kernel_matrix(rho, summaries, mode)).value;
}

Eigen::VectorXd design_gradient(const Eigen::VectorXd& rho, const std::vector<InfoSummary>& summaries,
                                DesignMode mode) {
  check_rho(rho, summaries.size());
  const int q_count = static_cast<int>(summaries.size());
  const Eigen::MatrixXd k = kernel_matrix(rho, summaries, mode);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);

  // d log|det K| = tr(K^{-1} dK); each trace is evaluated through a solve.
  Eigen::VectorXd grad(q_count);
  if (mode == DesignMode::Basic) {
    for (int q = 0; q < q_count; ++q) {
      grad[q] = lu.solve(summaries[q].gamma_bar).trace();
    }
    return grad;
  }

  const auto n_theta = summaries.front().y_bar.rows();
  const auto n_x = summaries.front().y_bar.cols();
  Eigen::MatrixXd pooled_y = Eigen::MatrixXd::Zero(n_theta, n_x);
  Eigen::MatrixXd pooled_z = Eigen::MatrixXd::Zero(n_theta, n_x);
  for (int q = 0; q < q_count; ++q) {
    pooled_y += rho[q] * summaries[q].y_bar;
    pooled_z += rho[q] * summaries[q].z_bar;
  }
  for (int q = 0; q < q_count; ++q) {
    const Eigen::MatrixXd dk = summaries[q].x_bar -
                               summaries[q].y_bar * pooled_z.transpose() -
                               pooled_y * summaries[q].z_bar.transpose();
    grad[q] = lu.solve(dk).trace();
  }
  return grad;
}

Eigen::VectorXd uniform_fractions(int q) {
  return Eigen::VectorXd::Constant(q, 1.0 / static_cast<double>(q));
}

Allocation optimize_allocation(const std::vector<InfoSummary>& summaries, double total_n,
                               DesignMode mode, const Eigen::VectorXd& init,
                               const OptimizeOptions& opt) {
  if (summaries.empty()) {
    throw Error(Stage::Design, "no summaries given");
  }
  const int q_count = static_cast<int>(summaries.size());
  check_rho(init, summaries.size());
  const auto n_theta = summaries.front().gamma_bar.rows();

  auto objective = [&](const Eigen::VectorXd& rho) {
    return design_objective(rho, summaries, mode);
  };

  auto finalize = [&](const Eigen::VectorXd& rho, double kernel_objective) {
    Allocation a;
    a.fractions = rho;
    a.total_n = total_n;
    a.objective_value = kernel_objective + n_theta * std::log(total_n);
    return a;
  };

  if (q_count == 1) {
    Eigen::VectorXd rho = Eigen::VectorXd::Ones(1);
    const double f = objective(rho);
    if (!std::isfinite(f)) {
      throw DictionaryDeficiencyError("the single candidate maneuver is uninformative");
    }
    return finalize(rho, f);
  }

  // Ascend from one start; backtracking keeps every accepted step an
  // improvement, so the result can never fall below the starting value.
  auto ascend = [&](Eigen::VectorXd rho, double f) {
    for (int it = 0; it < opt.max_iterations; ++it) {
      const Eigen::VectorXd grad = design_gradient(rho, summaries, mode);
      const double scale = grad.cwiseAbs().maxCoeff();
      double step = scale > 0.0 ? 1.0 / scale : 1.0;
      bool moved = false;
      for (int half = 0; half < 60; ++half) {
        const Eigen::VectorXd candidate = project_simplex(rho + step * grad);
        const double fc = objective(candidate);
        if (std::isfinite(fc) && fc > f) {
          if ((candidate - rho).norm() < opt.step_tolerance) {
            rho = candidate;
            f = fc;
            return std::make_pair(rho, f);
          }
          rho = candidate;
          f = fc;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    return std::make_pair(rho, f);
  };

  Rng rng(opt.seed);
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(init);
  for (int s = 1; s < opt.starts; ++s) starts.push_back(random_simplex_point(rng, q_count));

  // Random probes the returned allocation must dominate; the best probe is
  // promoted to an extra start, which guarantees the dominance.
  Eigen::VectorXd best_probe;
  double best_probe_f = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < opt.random_probes; ++p) {
    const Eigen::VectorXd probe = random_simplex_point(rng, q_count);
    const double f = objective(probe);
    if (f > best_probe_f) {
      best_probe_f = f;
      best_probe = probe;
    }
  }
  if (best_probe.size() > 0 && std::isfinite(best_probe_f)) starts.push_back(best_probe);

  Eigen::VectorXd best_rho;
  double best_f = -std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    const double f0 = objective(start);
    if (!std::isfinite(f0)) continue;
    auto [rho, f] = ascend(start, f0);
    if (f > best_f) {
      best_f = f;
      best_rho = rho;
    }
  }

  if (!std::isfinite(best_f)) {
    throw DictionaryDeficiencyError(
        "every evaluated allocation is singular; the dictionary does not span all " +
        std::to_string(n_theta) + " parameter directions");
  }
  return finalize(best_rho, best_f);
}

long Schedule::total_samples() const {
  long total = 0;
  for (const auto& seg : segments) {
    total += static_cast<long>(seg.repetitions) * seg.segment_length;
  }
  return total;
}

Schedule realize_schedule(const Allocation& allocation, const std::vector<int>& segment_lengths,
                          const std::vector<int>& ids) {
  const int q_count = static_cast<int>(allocation.fractions.size());
  if (static_cast<int>(segment_lengths.size()) != q_count) {
    throw Error(Stage::Schedule, "segment length list does not match the allocation");
  }
  if (!ids.empty() && static_cast<int>(ids.size()) != q_count) {
    throw Error(Stage::Schedule, "id list does not match the allocation");
  }
  for (int q = 0; q < q_count; ++q) {
    if (segment_lengths[q] < 1) {
      throw Error(Stage::Schedule, "segment lengths must be at least one sample");
    }
  }

  std::vector<double> exact(q_count);
  std::vector<int> reps(q_count);
  for (int q = 0; q < q_count; ++q) {
    exact[q] = allocation.fractions[q] * allocation.total_n / segment_lengths[q];
    reps[q] = static_cast<int>(std::floor(exact[q] + 0.5));  // half away from zero
  }

  const long target = static_cast<long>(std::llround(allocation.total_n));
  const int max_segment = *std::max_element(segment_lengths.begin(), segment_lengths.end());
  auto total = [&]() {
    long t = 0;
    for (int q = 0; q < q_count; ++q) t += static_cast<long>(reps[q]) * segment_lengths[q];
    return t;
  };

  // Nudge the total back into range by adjusting the entry whose rounding
  // left the largest remainder in the needed direction.
  while (std::llabs(total() - target) > max_segment) {
    const bool need_more = total() < target;
    int pick = -1;
    double best_remainder = -std::numeric_limits<double>::infinity();
    for (int q = 0; q < q_count; ++q) {
      const double remainder = need_more ? exact[q] - reps[q] : reps[q] - exact[q];
      if (!need_more && reps[q] == 0) continue;
      if (remainder > best_remainder) {
        best_remainder = remainder;
        pick = q;
      }
    }
    if (pick < 0) break;
    reps[pick] += need_more ? 1 : -1;
  }

  Schedule schedule;
  for (int q = 0; q < q_count; ++q) {
    const int label = ids.empty() ? q : ids[q];
    schedule.segments.push_back(ScheduleSegment{label, reps[q], segment_lengths[q]});
  }
  return schedule;
}

}  // namespace marex
