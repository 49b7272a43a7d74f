#pragma once

// Synthetic covariate-shift regression task. The labeling function is
// linear on the target region but saturates where most source samples sit,
// so a misspecified linear fit improves when source samples are reweighted
// toward the target distribution.

#include <cmath>

#include <Eigen/Core>

#include "webcolor/common.hpp"

namespace synth {

inline double gaussian(std::mt19937_64& gen) {
  // Box-Muller on the portable 53-bit uniform.
  double u1 = webcolor::rng::uniform01(gen);
  double u2 = webcolor::rng::uniform01(gen);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

struct ShiftTask {
  Eigen::MatrixXd source_X;
  Eigen::VectorXd source_y;
  Eigen::MatrixXd target_X;   // unlabeled
  Eigen::MatrixXd test_X;     // held-out target
  Eigen::VectorXd test_y;
};

/// y = 3*min(x0, 1) + 0.5 + noise. Source x0 ~ N(2, 0.7) (mostly in the
/// saturated region), target x0 ~ N(0, 0.5) (linear region). Two nuisance
/// dimensions are shared.
inline ShiftTask make_shift_task(std::uint64_t seed, int n_source, int n_target, int n_test) {
  std::mt19937_64 gen = webcolor::rng::substream(seed, "shift-task");
  auto label = [&](double x0) { return 3.0 * std::min(x0, 1.0) + 0.5 + 0.05 * gaussian(gen); };

  ShiftTask task;
  task.source_X.resize(n_source, 3);
  task.source_y.resize(n_source);
  for (int i = 0; i < n_source; ++i) {
    task.source_X(i, 0) = 2.0 + 0.7 * gaussian(gen);
    task.source_X(i, 1) = gaussian(gen);
    task.source_X(i, 2) = gaussian(gen);
    task.source_y[i] = label(task.source_X(i, 0));
  }
  task.target_X.resize(n_target, 3);
  for (int i = 0; i < n_target; ++i) {
    task.target_X(i, 0) = 0.5 * gaussian(gen);
    task.target_X(i, 1) = gaussian(gen);
    task.target_X(i, 2) = gaussian(gen);
  }
  task.test_X.resize(n_test, 3);
  task.test_y.resize(n_test);
  for (int i = 0; i < n_test; ++i) {
    task.test_X(i, 0) = 0.5 * gaussian(gen);
    task.test_X(i, 1) = gaussian(gen);
    task.test_X(i, 2) = gaussian(gen);
    task.test_y[i] = label(task.test_X(i, 0));
  }
  return task;
}

} // namespace synth
