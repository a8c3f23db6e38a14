#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "spe/error.hpp"
#include "spe/mva.hpp"
#include "spe/qn.hpp"

using namespace spe;
using spe::testing::make_qn;

TEST_CASE("exact MVA: single customer at a single center") {
  const auto r = solve_exact_mva(make_qn({{2.0}}, {0.0}, {1}));
  CHECK(r.throughput(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.cycleTime(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r.utilization(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.utilization(0) == 0.0);
}

TEST_CASE("exact MVA: two centers, two customers, no think time") {
  // N=1: R = 1 + 2, X = 1/3, Q = (1/3, 2/3)
  // N=2: R = 1*(4/3) + 2*(5/3) = 14/3, X = 3/7
  const auto r = solve_exact_mva(make_qn({{1.0}, {2.0}}, {0.0}, {2}));
  CHECK(std::abs(r.throughput(0) - 3.0 / 7.0) < 1e-12);
  CHECK(std::abs(r.cycleTime(0) - 14.0 / 3.0) < 1e-12);
  CHECK(std::abs(r.utilization(1) - 3.0 / 7.0) < 1e-12);
  CHECK(std::abs(r.utilization(2) - 6.0 / 7.0) < 1e-12);
}

TEST_CASE("exact MVA: one center with think time") {
  // N=1: R = 1, X = 1/2, Q = 1/2. N=2: R = 1.5, X = 2 / 2.5 = 0.8
  const auto r = solve_exact_mva(make_qn({{1.0}}, {1.0}, {2}));
  CHECK(r.throughput(0) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(r.cycleTime(0) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(r.utilization(1) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(r.serverResponse(0) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("exact MVA agrees with the convolution oracle on tiny random nets") {
  std::mt19937_64 rng(20240601);
  spe::testing::RandomNetSpec spec;
  spec.maxCenters = 3;
  spec.maxClasses = 2;
  spec.maxPopulationPerClass = 6;
  spec.maxTotalPopulation = 6;
  for (int trial = 0; trial < 40; ++trial) {
    const QnModel qn = spe::testing::random_qn(rng, spec);
    const auto r = solve_exact_mva(qn);
    std::vector<std::vector<long double>> d;
    for (Eigen::Index k : qn.queueing_indices()) {
      std::vector<long double> row;
      for (Eigen::Index c = 0; c < qn.demand.cols(); ++c) row.push_back(qn.demand(k, c));
      d.push_back(row);
    }
    std::vector<long double> z;
    for (const auto& c : qn.classes) z.push_back(c.thinkTime);
    const auto x = spe::testing::ConvolutionOracle(d, z, qn.populations()).throughput();
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double rel = std::abs(r.throughput(static_cast<Eigen::Index>(c)) - static_cast<double>(x[c])) /
                         static_cast<double>(x[c]);
      CHECK(rel < 1e-9);
    }
  }
}

TEST_CASE("exact MVA: Little's law, population conservation, utilization law") {
  std::mt19937_64 rng(7);
  spe::testing::RandomNetSpec spec;
  spec.maxCenters = 5;
  spec.maxClasses = 3;
  spec.maxPopulationPerClass = 8;
  for (int trial = 0; trial < 25; ++trial) {
    const QnModel qn = spe::testing::random_qn(rng, spec);
    const auto r = solve_exact_mva(qn);
    for (std::size_t c = 0; c < qn.classes.size(); ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      const double n = qn.classes[c].population;
      CHECK(std::abs(r.throughput(ci) * r.cycleTime(ci) - n) <= 1e-6 * n);
      CHECK(std::abs(r.queueLength.col(ci).sum() - n) <= 1e-9 * n);
    }
    for (Eigen::Index k : qn.queueing_indices()) {
      double u = 0.0;
      for (std::size_t c = 0; c < qn.classes.size(); ++c)
        u += r.throughput(static_cast<Eigen::Index>(c)) * qn.demand(k, static_cast<Eigen::Index>(c));
      CHECK(std::abs(u - r.utilization(k)) <= 1e-9);
      CHECK(r.utilization(k) >= 0.0);
      CHECK(r.utilization(k) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("exact MVA: increasing one demand never increases that class's throughput") {
  std::mt19937_64 rng(11);
  spe::testing::RandomNetSpec spec;
  spec.maxCenters = 4;
  spec.maxClasses = 3;
  spec.maxPopulationPerClass = 6;
  std::uniform_real_distribution<double> bump(0.01, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    QnModel qn = spe::testing::random_qn(rng, spec);
    const auto before = solve_exact_mva(qn);
    const auto rows = qn.queueing_indices();
    const Eigen::Index k = rows[static_cast<std::size_t>(trial) % rows.size()];
    const Eigen::Index c = trial % qn.demand.cols();
    qn.demand(k, c) += bump(rng);
    const auto after = solve_exact_mva(qn);
    CHECK(after.throughput(c) <= before.throughput(c) * (1.0 + 1e-12));
  }
}

TEST_CASE("exact MVA: scaling demands and think times scales times, keeps utilizations") {
  std::mt19937_64 rng(3);
  spe::testing::RandomNetSpec spec;
  spec.maxCenters = 4;
  spec.maxClasses = 2;
  spec.maxPopulationPerClass = 7;
  for (double s : {0.25, 3.0, 17.5}) {
    QnModel qn = spe::testing::random_qn(rng, spec);
    const auto base = solve_exact_mva(qn);
    qn.demand *= s;
    for (auto& c : qn.classes) c.thinkTime *= s;
    const auto scaled = solve_exact_mva(qn);
    CHECK((scaled.cycleTime - base.cycleTime * s).cwiseAbs().maxCoeff() <= 1e-9 * base.cycleTime.maxCoeff() * s);
    CHECK((scaled.throughput * s - base.throughput).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((scaled.utilization - base.utilization).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((scaled.queueLength - base.queueLength).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("exact MVA kernel is generic over the scalar type") {
  mva::Matrix<long double> d(2, 1);
  d << 1.0L, 2.0L;
  mva::Vector<long double> z = mva::Vector<long double>::Zero(1);
  const auto sol = mva::exact<long double>(d, z, {2});
  CHECK(std::abs(static_cast<double>(sol.throughput(0) - 3.0L / 7.0L)) < 1e-15);
}

TEST_CASE("exact MVA enforces the lattice budget") {
  const QnModel qn = make_qn({{0.1, 0.1}}, {1.0, 1.0}, {999, 999});
  SolverOptions opt;
  opt.latticeBudget = 1000;
  CHECK(lattice_size(qn) == 1'000'000);
  try {
    solve_exact_mva(qn, opt);
    FAIL("expected BudgetExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BudgetExceeded);
  }
  // solve() falls back to AMVA
  const auto r = solve(qn, opt);
  CHECK(r.solver == SolverKind::Amva);
  CHECK(r.approximate);
}

TEST_CASE("invalid networks are rejected") {
  auto expect_invalid = [](const QnModel& qn) {
    try {
      solve_exact_mva(qn);
      FAIL("expected InvalidModel");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::InvalidModel);
    }
  };
  expect_invalid(make_qn({{0.0}}, {1.0}, {1}));  // class without demand
  QnModel neg = make_qn({{1.0}}, {1.0}, {1});
  neg.demand(1, 0) = -1.0;
  expect_invalid(neg);
  QnModel nodelay = make_qn({{1.0}}, {1.0}, {1});
  nodelay.centers[0].kind = CenterKind::Queueing;
  expect_invalid(nodelay);
  QnModel twodelay = make_qn({{1.0}}, {1.0}, {1});
  twodelay.centers[1].kind = CenterKind::Delay;
  expect_invalid(twodelay);
}

TEST_CASE("AMVA: exact for one customer, close for small populations") {
  const auto one = make_qn({{1.0}, {2.0}, {0.5}}, {3.0}, {1});
  const auto a = solve_amva(one);
  const auto e = solve_exact_mva(one);
  CHECK(a.throughput(0) == doctest::Approx(e.throughput(0)).epsilon(1e-12));
  CHECK(a.approximate);
  CHECK(a.converged);

  const auto two = make_qn({{1.0}, {2.0}}, {0.0}, {2});
  const auto a2 = solve_amva(two);
  CHECK(std::abs(a2.throughput(0) - 3.0 / 7.0) / (3.0 / 7.0) < 0.05);
}

TEST_CASE("AMVA reports non-convergence instead of throwing") {
  const auto qn = make_qn({{1.0, 0.3}, {2.0, 0.9}}, {1.0, 2.0}, {10, 12});
  const auto r = solve_amva(qn, 1e-14, 2);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
  CHECK(r.throughput.allFinite());
}

TEST_CASE("asymptotic bounds") {
  const auto qn = make_qn({{1.0}, {2.0}}, {0.0}, {2});
  const auto b = asymptotic_bounds(qn);
  REQUIRE(b.size() == 1);
  CHECK(b[0].throughputUpper == doctest::Approx(0.5));
  CHECK(b[0].throughputUpper >= 3.0 / 7.0);

  const auto single = make_qn({{1.0}, {2.0}}, {4.0}, {1});
  CHECK(asymptotic_bounds(single)[0].throughputUpper ==
        doctest::Approx(solve_exact_mva(single).throughput(0)).epsilon(1e-15));

  std::mt19937_64 rng(5);
  spe::testing::RandomNetSpec spec;
  spec.maxCenters = 4;
  spec.maxClasses = 3;
  spec.maxPopulationPerClass = 6;
  for (int t = 0; t < 20; ++t) {
    const auto q = spe::testing::random_qn(rng, spec);
    const auto r = solve_exact_mva(q);
    const auto bounds = asymptotic_bounds(q);
    for (std::size_t c = 0; c < bounds.size(); ++c) {
      CHECK(bounds[c].throughputUpper >= r.throughput(static_cast<Eigen::Index>(c)) * (1 - 1e-12));
      CHECK(bounds[c].responseLower <= r.serverResponse(static_cast<Eigen::Index>(c)) * (1 + 1e-12));
    }
  }
}

TEST_CASE("bottleneck picks the highest utilization, ties by id") {
  SolverResult r;
  r.centerIds = {"Z", "A", "B"};
  r.centerKinds = {CenterKind::Delay, CenterKind::Queueing, CenterKind::Queueing};
  r.utilization = Eigen::Vector3d(0.0, 0.97, 0.999);
  CHECK(bottleneck(r) == "B");
  r.utilization = Eigen::Vector3d(0.0, 0.5, 0.5);
  r.centerIds = {"Z", "M", "C"};
  CHECK(bottleneck(r) == "C");
}

TEST_CASE("server-side response and cycle throughput arithmetic") {
  CHECK(server_side_response(23.32, 15.00) == doctest::Approx(8.32).epsilon(1e-12));
  CHECK(server_side_response(17.81, 15.00) == doctest::Approx(2.81).epsilon(1e-12));
  CHECK(server_side_response(7.5, 0.0) == 7.5);
  CHECK(throughput_from_cycle(150, 23.32) == doctest::Approx(6.432).epsilon(1e-3));
  CHECK(throughput_from_cycle(300, 17.81) == doctest::Approx(16.84).epsilon(1e-3));
  CHECK(throughput_from_cycle(1, 1.0) == 1.0);
  CHECK_THROWS_AS(throughput_from_cycle(1, 0.0), Error);

  const auto r = solve_exact_mva(make_qn({{1.0}}, {1.0}, {2}));
  CHECK(server_side_response(r, "C0") == doctest::Approx(1.5));
  CHECK_THROWS_AS(server_side_response(r, "nope"), Error);
}
