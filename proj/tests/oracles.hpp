#pragma once

// Test-only reference solvers. They share no code with the library's MVA
// kernels.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace spe::testing {

/// Normalization-constant (convolution) solution of a closed product-form
/// network with processor-sharing centers and a single delay station.
/// `demand[k][c]` for queueing centers, `think[c]` for the delay station.
/// Returns per-class throughput X_c = G(N - e_c) / G(N).
class ConvolutionOracle {
 public:
  ConvolutionOracle(std::vector<std::vector<long double>> demand, std::vector<long double> think,
                    std::vector<int> population)
      : demand_(std::move(demand)), think_(std::move(think)), population_(std::move(population)) {
    for (int n : population_) size_ *= static_cast<std::size_t>(n + 1);
  }

  std::vector<long double> throughput() const {
    const std::vector<long double> g = normalization();
    const std::size_t full = size_ - 1;
    std::vector<long double> x(population_.size());
    for (std::size_t c = 0; c < population_.size(); ++c)
      x[c] = g[full - stride(c)] / g[full];
    return x;
  }

  /// Utilization of queueing center k: sum_c X_c D_kc.
  long double utilization(std::size_t k) const {
    const auto x = throughput();
    long double u = 0;
    for (std::size_t c = 0; c < x.size(); ++c) u += x[c] * demand_[k][c];
    return u;
  }

 private:
  std::size_t stride(std::size_t c) const {
    std::size_t s = 1;
    for (std::size_t i = 0; i < c; ++i) s *= static_cast<std::size_t>(population_[i] + 1);
    return s;
  }

  std::vector<int> decode(std::size_t index) const {
    std::vector<int> n(population_.size());
    for (std::size_t c = 0; c < population_.size(); ++c) {
      n[c] = static_cast<int>(index % static_cast<std::size_t>(population_[c] + 1));
      index /= static_cast<std::size_t>(population_[c] + 1);
    }
    return n;
  }

  static long double factorial(int n) {
    long double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  }

  // Processor sharing: |n|! prod_c D_c^n_c / n_c!
  long double ps_factor(std::size_t k, const std::vector<int>& n) const {
    int total = 0;
    long double f = 1;
    for (std::size_t c = 0; c < n.size(); ++c) {
      total += n[c];
      f *= std::pow(demand_[k][c], static_cast<long double>(n[c])) / factorial(n[c]);
    }
    return f * factorial(total);
  }

  // Infinite server: prod_c Z_c^n_c / n_c!
  long double delay_factor(const std::vector<int>& n) const {
    long double f = 1;
    for (std::size_t c = 0; c < n.size(); ++c)
      f *= std::pow(think_[c], static_cast<long double>(n[c])) / factorial(n[c]);
    return f;
  }

  std::vector<long double> normalization() const {
    std::vector<long double> g(size_);
    for (std::size_t i = 0; i < size_; ++i) g[i] = delay_factor(decode(i));
    for (std::size_t k = 0; k < demand_.size(); ++k) {
      std::vector<long double> next(size_, 0);
      for (std::size_t i = 0; i < size_; ++i) {
        const auto n = decode(i);
        for (std::size_t j = 0; j < size_; ++j) {
          const auto m = decode(j);
          bool fits = true;
          std::size_t rest = 0;
          std::size_t s = 1;
          for (std::size_t c = 0; c < n.size(); ++c) {
            if (m[c] > n[c]) {
              fits = false;
              break;
            }
            rest += static_cast<std::size_t>(n[c] - m[c]) * s;
            s *= static_cast<std::size_t>(population_[c] + 1);
          }
          if (fits) next[i] += ps_factor(k, m) * g[rest];
        }
      }
      g = std::move(next);
    }
    return g;
  }

  std::vector<std::vector<long double>> demand_;
  std::vector<long double> think_;
  std::vector<int> population_;
  std::size_t size_ = 1;
};

/// Hand MVA for a single class, used to cross-check tiny examples.
inline double single_class_mva_throughput(const std::vector<double>& demand, double think, int population) {
  std::vector<double> q(demand.size(), 0.0);
  double x = 0.0;
  for (int n = 1; n <= population; ++n) {
    double r = 0.0;
    std::vector<double> rk(demand.size());
    for (std::size_t k = 0; k < demand.size(); ++k) {
      rk[k] = demand[k] * (1.0 + q[k]);
      r += rk[k];
    }
    x = n / (think + r);
    for (std::size_t k = 0; k < demand.size(); ++k) q[k] = x * rk[k];
  }
  return x;
}

}  // namespace spe::testing
