#include "spe/simulate.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "spe/error.hpp"

namespace spe {

namespace {

struct BatchStats {
  Eigen::VectorXd completions;  // per class
  Eigen::MatrixXd queueArea;    // centers x classes (delay row: thinking customers)
  Eigen::VectorXd busy;         // per center
};

class Simulator {
 public:
  Simulator(const QnModel& qn, const SimulationOptions& opt)
      : qn_(qn), opt_(opt), rng_(opt.seed), K_(static_cast<Eigen::Index>(qn.centers.size())),
        C_(static_cast<Eigen::Index>(qn.classes.size())), delay_(qn.delay_index()), Z_(qn.total_delay()) {
    for (Eigen::Index c = 0; c < C_; ++c) {
      std::vector<Eigen::Index> route;
      for (Eigen::Index k = 0; k < K_; ++k)
        if (k != delay_ && qn.demand(k, c) > 0.0) route.push_back(k);
      routes_.push_back(std::move(route));
    }
    position_ = Eigen::MatrixXi::Constant(K_, C_, -1);
    for (Eigen::Index c = 0; c < C_; ++c)
      for (std::size_t j = 0; j < routes_[c].size(); ++j) position_(routes_[c][j], c) = static_cast<int>(j);

    at_ = Eigen::MatrixXi::Zero(K_, C_);
    total_ = Eigen::VectorXi::Zero(K_);
    for (Eigen::Index c = 0; c < C_; ++c) {
      const int n = qn.classes[static_cast<std::size_t>(c)].population;
      if (Z_(c) > 0.0) {
        at_(delay_, c) = n;
      } else {
        at_(routes_[c].front(), c) = n;
        total_(routes_[c].front()) += n;
      }
    }
    batchLength_ = (opt.horizon - opt.warmup) / opt.batches;
    batches_.assign(static_cast<std::size_t>(opt.batches),
                    BatchStats{Eigen::VectorXd::Zero(C_), Eigen::MatrixXd::Zero(K_, C_), Eigen::VectorXd::Zero(K_)});
  }

  std::uint64_t run() {
    std::exponential_distribution<double> exp1(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> rates;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> events;  // (center, class)
    std::uint64_t count = 0;
    double now = 0.0;
    while (true) {
      rates.clear();
      events.clear();
      double sum = 0.0;
      for (Eigen::Index c = 0; c < C_; ++c) {
        if (at_(delay_, c) > 0) {
          const double r = at_(delay_, c) / Z_(c);
          sum += r;
          rates.push_back(sum);
          events.emplace_back(delay_, c);
        }
      }
      for (Eigen::Index k = 0; k < K_; ++k) {
        if (k == delay_ || total_(k) == 0) continue;
        for (Eigen::Index c = 0; c < C_; ++c) {
          if (at_(k, c) == 0) continue;
          const double r = at_(k, c) / (total_(k) * qn_.demand(k, c));
          sum += r;
          rates.push_back(sum);
          events.emplace_back(k, c);
        }
      }
      const double next = now + exp1(rng_) / sum;
      if (next >= opt_.horizon) {
        accumulate(now, opt_.horizon);
        break;
      }
      accumulate(now, next);
      now = next;

      const double pick = unit(rng_) * sum;
      std::size_t e = 0;
      while (e + 1 < rates.size() && rates[e] <= pick) ++e;
      fire(events[e].first, events[e].second, now);
      ++count;
    }
    return count;
  }

  SimResult collect() const {
    const int B = opt_.batches;
    boost::math::students_t dist(B - 1);
    const double t = boost::math::quantile(dist, 1.0 - (1.0 - opt_.confidence) / 2.0);

    std::vector<Eigen::VectorXd> X, cycle, server, U;
    std::vector<Eigen::MatrixXd> Q;
    const Eigen::VectorXd N = population();
    for (const BatchStats& b : batches_) {
      Eigen::VectorXd x = b.completions / batchLength_;
      Eigen::MatrixXd q = b.queueArea / batchLength_;
      Eigen::VectorXd cyc(C_), srv(C_);
      for (Eigen::Index c = 0; c < C_; ++c) {
        cyc(c) = x(c) > 0.0 ? N(c) / x(c) : 0.0;
        srv(c) = x(c) > 0.0 ? (q.col(c).sum() - q(delay_, c)) / x(c) : 0.0;
      }
      X.push_back(x);
      Q.push_back(q);
      U.push_back(b.busy / batchLength_);
      cycle.push_back(cyc);
      server.push_back(srv);
    }

    auto mean_hw = [&](const auto& samples, auto& mean, auto& hw) {
      mean = samples.front();
      mean.setZero();
      for (const auto& s : samples) mean += s;
      mean /= static_cast<double>(B);
      hw = mean;
      hw.setZero();
      for (const auto& s : samples) hw.array() += (s - mean).array().square();
      hw = (hw.array() / static_cast<double>(B - 1)).sqrt() * (t / std::sqrt(static_cast<double>(B)));
    };

    SimResult out;
    SolverResult& r = out.estimate;
    r.solver = SolverKind::Simulation;
    r.approximate = true;
    for (const QnClass& c : qn_.classes) r.classIds.push_back(c.id);
    for (const QnCenter& k : qn_.centers) {
      r.centerIds.push_back(k.id);
      r.centerKinds.push_back(k.kind);
    }
    r.thinkTime.resize(C_);
    for (Eigen::Index c = 0; c < C_; ++c) r.thinkTime(c) = qn_.classes[static_cast<std::size_t>(c)].thinkTime;
    r.population = N;
    Eigen::VectorXd cycleMean, serverMean;
    mean_hw(X, r.throughput, out.throughputHalfWidth);
    mean_hw(Q, r.queueLength, out.queueLengthHalfWidth);
    mean_hw(U, r.utilization, out.utilizationHalfWidth);
    mean_hw(cycle, cycleMean, out.cycleTimeHalfWidth);
    mean_hw(server, serverMean, out.serverResponseHalfWidth);
    r.utilization(delay_) = 0.0;
    out.utilizationHalfWidth(delay_) = 0.0;

    r.cycleTime = cycleMean;
    r.serverResponse = serverMean;
    r.residence = Eigen::MatrixXd::Zero(K_, C_);
    for (Eigen::Index c = 0; c < C_; ++c)
      if (r.throughput(c) > 0.0) r.residence.col(c) = r.queueLength.col(c) / r.throughput(c);
    out.seed = opt_.seed;
    out.warmup = opt_.warmup;
    out.horizon = opt_.horizon;
    out.batches = B;
    return out;
  }

 private:
  Eigen::VectorXd population() const {
    Eigen::VectorXd n(C_);
    for (Eigen::Index c = 0; c < C_; ++c) n(c) = qn_.classes[static_cast<std::size_t>(c)].population;
    return n;
  }

  void fire(Eigen::Index k, Eigen::Index c, double now) {
    const auto& route = routes_[c];
    --at_(k, c);
    if (k != delay_) --total_(k);
    Eigen::Index to = -1;
    if (k == delay_) {
      to = route.front();
    } else {
      const int j = position_(k, c);
      if (static_cast<std::size_t>(j) + 1 < route.size()) {
        to = route[static_cast<std::size_t>(j) + 1];
      } else {
        record_completion(c, now);
        to = Z_(c) > 0.0 ? delay_ : route.front();
      }
    }
    ++at_(to, c);
    if (to != delay_) ++total_(to);
  }

  void record_completion(Eigen::Index c, double now) {
    if (now < opt_.warmup) return;
    auto b = static_cast<std::size_t>((now - opt_.warmup) / batchLength_);
    if (b >= batches_.size()) b = batches_.size() - 1;
    batches_[b].completions(c) += 1.0;
  }

  // Time-weighted state statistics over [from, to), split at batch borders.
  void accumulate(double from, double to) {
    from = std::max(from, opt_.warmup);
    while (from < to) {
      auto b = static_cast<std::size_t>((from - opt_.warmup) / batchLength_);
      if (b >= batches_.size()) break;
      const double end = std::min(to, opt_.warmup + batchLength_ * static_cast<double>(b + 1));
      const double dt = end - from;
      if (dt <= 0.0) break;
      BatchStats& s = batches_[b];
      s.queueArea += at_.cast<double>() * dt;
      for (Eigen::Index k = 0; k < K_; ++k)
        if (k != delay_ && total_(k) > 0) s.busy(k) += dt;
      from = end;
    }
  }

  const QnModel& qn_;
  SimulationOptions opt_;
  std::mt19937_64 rng_;
  Eigen::Index K_;
  Eigen::Index C_;
  Eigen::Index delay_;
  Eigen::VectorXd Z_;
  std::vector<std::vector<Eigen::Index>> routes_;
  Eigen::MatrixXi position_;
  Eigen::MatrixXi at_;
  Eigen::VectorXi total_;
  double batchLength_ = 0.0;
  std::vector<BatchStats> batches_;
};

}  // namespace

SimResult simulate(const QnModel& qn, const SimulationOptions& options) {
  validate_qn(qn);
  if (!(options.warmup >= 0.0) || !(options.horizon > options.warmup))
    throw Error(Errc::InvalidArgument, "simulation needs horizon > warmup >= 0");
  if (options.batches < 2) throw Error(Errc::InvalidArgument, "simulation needs at least two batches");
  if (!(options.confidence > 0.0 && options.confidence < 1.0))
    throw Error(Errc::InvalidArgument, "confidence level must lie in (0, 1)");
  Simulator sim(qn, options);
  const std::uint64_t events = sim.run();
  SimResult out = sim.collect();
  out.events = events;
  return out;
}

}  // namespace spe
