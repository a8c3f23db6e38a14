#pragma once

// Mean value analysis kernels over dense demand matrices, templated on the
// scalar type. They work on queueing centers only; the delay center enters
// as a per-class total delay (think time plus delay demand).

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace spe::mva {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Solution {
  Vector<Scalar> throughput;  // per class
  Matrix<Scalar> residence;   // queueing centers x classes
  Matrix<Scalar> queue;       // queueing centers x classes
  int iterations = 0;
  bool converged = true;
};

inline std::uint64_t lattice_size(const std::vector<int>& population) {
  std::uint64_t size = 1;
  for (int n : population) {
    const auto f = static_cast<std::uint64_t>(n) + 1;
    if (size > std::numeric_limits<std::uint64_t>::max() / f) return std::numeric_limits<std::uint64_t>::max();
    size *= f;
  }
  return size;
}

/// Exact MVA recursion over all population vectors n <= N.
///
/// Vectors are visited in mixed-radix order with the largest class as the
/// most significant digit, so n - e_c always lies at most `stride_max`
/// positions back. Queue lengths are kept in a ring of stride_max + 1
/// columns instead of a table over the whole lattice.
template <typename Scalar>
Solution<Scalar> exact(const Matrix<Scalar>& demand, const Vector<Scalar>& delay,
                       const std::vector<int>& population) {
  const Eigen::Index K = demand.rows();
  const Eigen::Index C = demand.cols();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(C));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return population[a] < population[b]; });

  std::vector<std::uint64_t> stride(static_cast<std::size_t>(C), 1);
  std::uint64_t s = 1;
  for (Eigen::Index i = 0; i < C; ++i) {
    stride[order[i]] = s;
    s *= static_cast<std::uint64_t>(population[order[i]]) + 1;
  }
  const std::uint64_t total = s;
  const std::uint64_t ring = (C == 0 ? 1 : stride[order.back()]) + 1;

  Matrix<Scalar> Q = Matrix<Scalar>::Zero(K, static_cast<Eigen::Index>(ring));
  Matrix<Scalar> R = Matrix<Scalar>::Zero(K, C);
  Vector<Scalar> X = Vector<Scalar>::Zero(C);
  std::vector<int> n(static_cast<std::size_t>(C), 0);

  for (std::uint64_t idx = 1; idx < total; ++idx) {
    for (Eigen::Index i = 0; i < C; ++i) {  // odometer increment
      const Eigen::Index c = order[i];
      if (++n[c] <= population[c]) break;
      n[c] = 0;
    }
    const auto slot = static_cast<Eigen::Index>(idx % ring);
    for (Eigen::Index c = 0; c < C; ++c) {
      if (n[c] == 0) {
        R.col(c).setZero();
        X(c) = Scalar(0);
        continue;
      }
      const auto prev = static_cast<Eigen::Index>((idx - stride[c]) % ring);
      R.col(c).array() = demand.col(c).array() * (Scalar(1) + Q.col(prev).array());
      X(c) = Scalar(n[c]) / (delay(c) + R.col(c).sum());
    }
    Q.col(slot).noalias() = R * X;
  }

  Solution<Scalar> out;
  if (total == 1) {
    out.throughput = Vector<Scalar>::Zero(C);
    out.residence = Matrix<Scalar>::Zero(K, C);
    out.queue = Matrix<Scalar>::Zero(K, C);
    return out;
  }
  out.throughput = X;
  out.residence = R;
  out.queue = R * X.asDiagonal();
  out.iterations = 1;
  return out;
}

/// Bard-Schweitzer fixed point: an arriving class-c customer sees the
/// full-population queue with its own contribution scaled by (N_c - 1)/N_c.
template <typename Scalar>
Solution<Scalar> schweitzer(const Matrix<Scalar>& demand, const Vector<Scalar>& delay,
                            const std::vector<int>& population, Scalar tolerance, int maxIterations) {
  const Eigen::Index K = demand.rows();
  const Eigen::Index C = demand.cols();

  Matrix<Scalar> Q(K, C);
  for (Eigen::Index c = 0; c < C; ++c) {
    const Scalar cycle = delay(c) + demand.col(c).sum();
    Q.col(c) = demand.col(c) * (Scalar(population[c]) / cycle);
  }

  Matrix<Scalar> R(K, C);
  Vector<Scalar> X(C);
  Solution<Scalar> out;
  out.converged = false;
  for (int it = 1; it <= maxIterations; ++it) {
    const Vector<Scalar> total = Q.rowwise().sum();
    for (Eigen::Index c = 0; c < C; ++c) {
      const Scalar self = Scalar(1) / Scalar(population[c]);
      R.col(c).array() = demand.col(c).array() * (Scalar(1) + total.array() - Q.col(c).array() * self);
      X(c) = Scalar(population[c]) / (delay(c) + R.col(c).sum());
    }
    const Matrix<Scalar> next = R * X.asDiagonal();

    Scalar change(0);
    for (Eigen::Index c = 0; c < C; ++c)
      for (Eigen::Index k = 0; k < K; ++k)
        if (next(k, c) > Scalar(0)) change = std::max(change, std::abs(next(k, c) - Q(k, c)) / next(k, c));
    Q = next;
    out.iterations = it;
    if (change < tolerance) {
      out.converged = true;
      break;
    }
  }
  out.throughput = X;
  out.residence = R;
  out.queue = Q;
  return out;
}

}  // namespace spe::mva
