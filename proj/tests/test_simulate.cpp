#include <doctest.h>

#include "helpers.hpp"
#include "spe/error.hpp"
#include "spe/simulate.hpp"

using namespace spe;
using spe::testing::make_qn;

TEST_CASE("simulation brackets the exact throughput of the two-center net") {
  const QnModel qn = make_qn({{1.0}, {2.0}}, {0.0}, {2});
  SimulationOptions opt;
  opt.horizon = 1e6;
  opt.warmup = 1e3;
  opt.seed = 42;
  const SimResult r = simulate(qn, opt);
  const double x = r.estimate.throughput(0);
  const double hw = r.throughputHalfWidth(0);
  CHECK(hw > 0.0);
  CHECK(std::abs(x - 3.0 / 7.0) <= hw);
  CHECK(r.estimate.utilization(2) == doctest::Approx(6.0 / 7.0).epsilon(0.01));
  CHECK(r.estimate.solver == SolverKind::Simulation);
  CHECK(r.events > 100000);
}

TEST_CASE("a center without demand is never busy") {
  const QnModel qn = make_qn({{1.0, 0.5}, {0.0, 0.0}, {0.3, 0.2}}, {2.0, 1.0}, {3, 2});
  SimulationOptions opt;
  opt.horizon = 2e4;
  opt.warmup = 100;
  const SimResult r = simulate(qn, opt);
  CHECK(r.estimate.utilization(2) == 0.0);
  CHECK(r.utilizationHalfWidth(2) == 0.0);
}

TEST_CASE("same seed reproduces the result bit for bit") {
  const QnModel qn = make_qn({{0.4, 0.2}, {0.1, 0.6}}, {1.0, 0.0}, {4, 3});
  SimulationOptions opt;
  opt.horizon = 5e3;
  opt.warmup = 50;
  opt.seed = 99;
  const SimResult a = simulate(qn, opt);
  const SimResult b = simulate(qn, opt);
  CHECK(a.events == b.events);
  CHECK(a.estimate.throughput == b.estimate.throughput);
  CHECK(a.estimate.queueLength == b.estimate.queueLength);
  CHECK(a.throughputHalfWidth == b.throughputHalfWidth);
  opt.seed = 100;
  const SimResult c = simulate(qn, opt);
  CHECK(c.estimate.throughput != a.estimate.throughput);
}

TEST_CASE("half-widths are non-negative and estimates finite") {
  const QnModel qn = make_qn({{0.4, 0.2, 0.3}, {0.1, 0.6, 0.0}}, {1.0, 0.5, 2.0}, {4, 3, 2});
  SimulationOptions opt;
  opt.horizon = 4e3;
  opt.warmup = 40;
  const SimResult r = simulate(qn, opt);
  CHECK((r.throughputHalfWidth.array() >= 0.0).all());
  CHECK((r.queueLengthHalfWidth.array() >= 0.0).all());
  CHECK((r.estimate.throughput.array() >= 0.0).all());
  CHECK(r.estimate.queueLength.allFinite());
  // customers are conserved in the time averages
  for (Eigen::Index c = 0; c < 3; ++c)
    CHECK(r.estimate.queueLength.col(c).sum() == doctest::Approx(r.estimate.population(c)).epsilon(1e-9));
}

TEST_CASE("simulation rejects bad windows") {
  const QnModel qn = make_qn({{1.0}}, {1.0}, {1});
  SimulationOptions opt;
  opt.horizon = 10;
  opt.warmup = 10;
  CHECK_THROWS_AS(simulate(qn, opt), Error);
  opt.warmup = -1;
  CHECK_THROWS_AS(simulate(qn, opt), Error);
}
