#pragma once

#include <Eigen/Core>

#include <cstdint>

#include "spe/qn.hpp"

namespace spe {

struct SimulationOptions {
  double horizon = 1e5;  // model seconds, warmup included
  double warmup = 1e3;
  std::uint64_t seed = 1;
  int batches = 20;
  double confidence = 0.95;
};

/// Point estimates (mean over batches) with confidence half-widths.
struct SimResult {
  SolverResult estimate;
  Eigen::VectorXd throughputHalfWidth;
  Eigen::VectorXd cycleTimeHalfWidth;
  Eigen::VectorXd serverResponseHalfWidth;
  Eigen::VectorXd utilizationHalfWidth;
  Eigen::MatrixXd queueLengthHalfWidth;
  std::uint64_t seed = 0;
  double warmup = 0.0;
  double horizon = 0.0;
  int batches = 0;
  std::uint64_t events = 0;
};

/// Event-driven simulation of the closed network: exponential think times,
/// exponential service at processor-sharing centers. Each class visits the
/// centers where it has positive demand once per cycle, in center order, so
/// visit-level demands equal the aggregate demands. Batch means over the
/// post-warmup window give Student-t confidence intervals. The same seed
/// reproduces the same result bit for bit.
SimResult simulate(const QnModel& qn, const SimulationOptions& options);

}  // namespace spe
