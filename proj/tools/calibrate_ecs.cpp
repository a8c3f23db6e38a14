// Searches per-operation service times for the ECS fixture so that the
// analysis narrative holds: the initial model, the BLOB split, the EST fix
// and the QN-side catalog splits flip the requirements the way the case
// study describes. Prints the resulting EcsDemands and facade costs.
//
//   calibrate_ecs [--iterations N] [--refine N] [--seed S] [--emit PATH]
//
// Exits 0 when every target holds for the exact solution.

#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "spe/antipatterns.hpp"
#include "spe/ecs.hpp"
#include "spe/model_io.hpp"
#include "spe/qn.hpp"
#include "spe/transform.hpp"

using namespace spe;

namespace {

constexpr int kParams = 8;
using Params = std::array<double, kParams>;

struct Candidate {
  EcsDemands demands;
  EstFacadeSpec facade;
};

Candidate decode(const Params& p) {
  Candidate c;
  EcsDemands& d = c.demands;
  d.searchProducts = p[0];
  d.getProductDetails = p[0] / 2;
  d.reserveProduct = p[1];
  d.checkUsername = d.insertCustomer = d.insertAddress = d.insertCredentials = d.insertPreferences =
      d.insertPaymentData = p[2];
  d.loadCatalogData = p[3];
  d.updateStock = d.storeOrder = d.chargePayment = p[4];
  d.databaseRequestOverhead = p[5];
  c.facade.remoteCost = p[6];
  c.facade.localCost = p[7];
  return c;
}

struct Stages {
  SolverResult initial, blob, est, film;
};

using Solver = SolverResult (*)(const QnModel&);

SolverResult amva(const QnModel& qn) { return solve_amva(qn, 1e-10, 100000); }
SolverResult exact(const QnModel& qn) { return solve_exact_mva(qn); }

Stages run(const Candidate& c, Solver solver) {
  const SoftwareModel m0 = ecs_model(c.demands);
  Stages s;
  const ForwardResult f0 = forward(m0);
  s.initial = solver(f0.qn);
  const SoftwareModel m1 =
      solve_blob(m0, {blob_subject("ProductCatalog"), {}, {}}, {{{"FilmCatalog", 0.8, {}}, {"BookCatalog", 0.2, {}}}});
  s.blob = solver(forward(m1).qn);
  const SoftwareModel m2 = solve_est(m1, {est_subject("Register", "UserController", "Database"), {}, {}}, c.facade);
  s.est = solver(forward(m2).qn);
  ForwardResult p = apply_qn_edit(f0.qn, f0.trace, SplitCenter{"ProductCatalog", {{"FilmCatalog", 0.8}, {"BookCatalog", 0.2}}});
  p = apply_qn_edit(p.qn, p.trace, SplitCenter{"FilmCatalog", {{"FilmCatalog1", 0.5}, {"FilmCatalog2", 0.5}}});
  s.film = solver(p.qn);
  return s;
}

double r(const SolverResult& res, const char* cls) { return res.serverResponse(*res.class_index(cls)); }
double u(const SolverResult& res, const char* center) { return res.utilization(*res.center_index(center)); }

// Hinge penalties with margins; zero means every target holds with room.
double penalty(const Stages& s, bool report = false, int* failures = nullptr) {
  double total = 0.0;
  int failed = 0;
  auto above = [&](double v, double bound, double margin, const char* what) {
    const double gap = std::max(0.0, bound + margin - v);
    if (report) fmt::print("  {:<44} {:10.4f}  (> {:.4f}) {}\n", what, v, bound, v > bound ? "ok" : "FAIL");
    failed += v > bound ? 0 : 1;
    total += gap * gap;
  };
  auto below = [&](double v, double bound, double margin, const char* what) {
    const double gap = std::max(0.0, v - (bound - margin));
    if (report) fmt::print("  {:<44} {:10.4f}  (< {:.4f}) {}\n", what, v, bound, v < bound ? "ok" : "FAIL");
    failed += v < bound ? 0 : 1;
    total += gap * gap;
  };
  const double rm = 0.25, um = 0.004;

  above(u(s.initial, "ProductCatalog"), 0.97, um, "initial U ProductCatalog");
  below(u(s.initial, "ProductCatalog"), 1.0, 0.002, "initial U ProductCatalog");
  above(u(s.initial, "Database"), 0.93, um, "initial U Database");
  below(u(s.initial, "Database"), 0.98, um, "initial U Database");
  below(u(s.initial, "Database"), u(s.initial, "ProductCatalog"), um, "initial U Database vs ProductCatalog");
  below(u(s.initial, "UserController"), 0.9, 0.1, "initial U UserController");
  below(u(s.initial, "CatalogController"), 0.9, 0.1, "initial U CatalogController");
  above(r(s.initial, "MakePurchase"), 4.0, rm, "initial R MakePurchase");
  below(r(s.initial, "BrowseCatalog"), 4.0, rm, "initial R BrowseCatalog");
  below(r(s.initial, "Register"), 4.0, rm, "initial R Register");

  below(r(s.blob, "MakePurchase"), 4.0, rm, "blob R MakePurchase");
  above(r(s.blob, "Register"), 4.0, rm, "blob R Register");

  below(r(s.est, "MakePurchase"), 4.0, rm, "est R MakePurchase");
  below(r(s.est, "BrowseCatalog"), 4.0, rm, "est R BrowseCatalog");
  below(r(s.est, "Register"), 4.0, rm, "est R Register");

  above(u(s.film, "Database"), 0.9, um, "film-split U Database");
  for (const char* c : {"FilmCatalog1", "FilmCatalog2", "BookCatalog", "UserController", "CatalogController"})
    below(u(s.film, c), 0.9, 0.02, (std::string("film-split U ") + c).c_str());
  if (failures) *failures = failed;
  return total;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ECS fixture calibration"};
  int iterations = 4000;
  int refine = 300;
  unsigned seed = 1;
  app.add_option("--iterations", iterations, "hill-climbing steps with AMVA");
  app.add_option("--refine", refine, "further steps with exact MVA");
  app.add_option("--seed", seed, "random seed");
  std::string emit;
  app.add_option("--emit", emit, "write the model built from the resulting demands");
  CLI11_PARSE(app, argc, argv);

  const EcsDemands d0;
  const EstFacadeSpec f0;
  Params best{d0.searchProducts, d0.reserveProduct, d0.checkUsername, d0.loadCatalogData, d0.updateStock,
              d0.databaseRequestOverhead, f0.remoteCost, f0.localCost};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, kParams - 1);
  auto climb = [&](Solver solver, int steps) {
    double bestPenalty = penalty(run(decode(best), solver));
    for (int it = 0; it < steps && bestPenalty > 0.0; ++it) {
      Params trial = best;
      const double scale = 0.08 * (1.0 - 0.9 * it / steps);
      trial[pick(rng)] *= std::exp(scale * step(rng));
      if (it % 3 == 0) trial[pick(rng)] *= std::exp(scale * step(rng));
      const double p = penalty(run(decode(trial), solver));
      if (p < bestPenalty) {
        best = trial;
        bestPenalty = p;
      }
    }
    return bestPenalty;
  };
  fmt::print("AMVA penalty {:.3e}\n", climb(amva, iterations));
  fmt::print("exact penalty {:.3e}\n", climb(exact, refine));

  const Candidate c = decode(best);
  fmt::print("exact check:\n");
  int failures = 0;
  penalty(run(c, exact), true, &failures);
  const EcsDemands& d = c.demands;
  fmt::print("\nsearchProducts = {:.4g}\ngetProductDetails = {:.4g}\nreserveProduct = {:.4g}\n"
             "registration ops = {:.4g}\nloadCatalogData = {:.4g}\npurchase ops = {:.4g}\n"
             "databaseRequestOverhead = {:.4g}\nestRemoteCost = {:.4g}\nfacadeLocalCost = {:.4g}\n",
             d.searchProducts, d.getProductDetails, d.reserveProduct, d.checkUsername, d.loadCatalogData,
             d.updateStock, d.databaseRequestOverhead, c.facade.remoteCost, c.facade.localCost);
  if (!emit.empty()) save_model_file(ecs_model(d), emit);
  return failures == 0 ? 0 : 1;
}
