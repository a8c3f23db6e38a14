#pragma once

#include <random>
#include <string>
#include <vector>

#include "spe/qn.hpp"

namespace spe::testing {

/// Network with one delay center "Z" and queueing centers "K0".."Kn";
/// `demand[k][c]` for queueing centers.
inline QnModel make_qn(const std::vector<std::vector<double>>& demand, const std::vector<double>& think,
                       const std::vector<int>& population) {
  QnModel qn;
  for (std::size_t c = 0; c < population.size(); ++c)
    qn.classes.push_back({"C" + std::to_string(c), population[c], think[c]});
  qn.centers.push_back({"Z", CenterKind::Delay});
  for (std::size_t k = 0; k < demand.size(); ++k) qn.centers.push_back({"K" + std::to_string(k), CenterKind::Queueing});
  qn.demand = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(demand.size() + 1),
                                    static_cast<Eigen::Index>(population.size()));
  for (std::size_t k = 0; k < demand.size(); ++k)
    for (std::size_t c = 0; c < population.size(); ++c)
      qn.demand(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(c)) = demand[k][c];
  return qn;
}

struct RandomNetSpec {
  int maxCenters = 3;
  int maxClasses = 2;
  int maxPopulationPerClass = 20;
  int maxTotalPopulation = 1 << 30;
  double minDemand = 0.05;
  double maxDemand = 1.0;
  double zeroDemandProbability = 0.2;
  double maxThink = 5.0;
};

/// Random network for property suites. Every class keeps at least one
/// positive queueing demand.
inline QnModel random_qn(std::mt19937_64& rng, const RandomNetSpec& spec) {
  std::uniform_int_distribution<int> centers(1, spec.maxCenters);
  std::uniform_int_distribution<int> classes(1, spec.maxClasses);
  std::uniform_real_distribution<double> dem(spec.minDemand, spec.maxDemand);
  std::uniform_real_distribution<double> think(0.0, spec.maxThink);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int K = centers(rng);
  const int C = classes(rng);
  std::vector<int> pop(static_cast<std::size_t>(C));
  int remaining = spec.maxTotalPopulation;
  for (int c = 0; c < C; ++c) {
    const int cap = std::max(1, std::min(spec.maxPopulationPerClass, remaining - (C - c - 1)));
    pop[static_cast<std::size_t>(c)] = std::uniform_int_distribution<int>(1, cap)(rng);
    remaining -= pop[static_cast<std::size_t>(c)];
  }
  std::vector<double> z(static_cast<std::size_t>(C));
  for (auto& v : z) v = think(rng);
  std::vector<std::vector<double>> d(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(C)));
  for (int c = 0; c < C; ++c) {
    for (int k = 0; k < K; ++k)
      d[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] =
          unit(rng) < spec.zeroDemandProbability ? 0.0 : dem(rng);
    const int keep = std::uniform_int_distribution<int>(0, K - 1)(rng);
    if (d[static_cast<std::size_t>(keep)][static_cast<std::size_t>(c)] == 0.0)
      d[static_cast<std::size_t>(keep)][static_cast<std::size_t>(c)] = dem(rng);
  }
  return make_qn(d, z, pop);
}

}  // namespace spe::testing
