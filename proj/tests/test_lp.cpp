#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mmot/errors.hpp"
#include "mmot/lp.hpp"
#include "test_support.hpp"

using namespace mmot;
using namespace mmot::test;

TEST_CASE("one-constraint toy problem") {
  Eigen::VectorXd c(2);
  c << 2.0, 1.0;
  RowMatrix a(1, 2);
  a << 1.0, 1.0;
  Eigen::VectorXd b(1);
  b << 1.0;
  const LpResult r = maximize_equality_lp(c, a, b);
  CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.0));
}

TEST_CASE("known two-by-two transport optimum") {
  // marginals (.5,.5) each; payoff prefers the diagonal
  Eigen::VectorXd c(4);
  c << 1.0, 0.0, 0.0, 1.0;
  RowMatrix a(3, 4);
  a << 1, 1, 0, 0,  // first row marginal
      0, 0, 1, 1,   // second row marginal
      1, 0, 1, 0;   // first column marginal (second is redundant)
  Eigen::VectorXd b(3);
  b << 0.5, 0.5, 0.5;
  const LpResult r = maximize_equality_lp(c, a, b);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.x[0] == doctest::Approx(0.5));
  CHECK(r.x[3] == doctest::Approx(0.5));
}

TEST_CASE("inconsistent constraints are reported infeasible") {
  Eigen::VectorXd c(2);
  c << 1.0, 1.0;
  RowMatrix a(2, 2);
  a << 1.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd b(2);
  b << 1.0, 2.0;
  CHECK_THROWS_AS(maximize_equality_lp(c, a, b), SolverError);
}

TEST_CASE("negative right-hand sides are flipped internally") {
  Eigen::VectorXd c(2);
  c << -1.0, -2.0;
  RowMatrix a(1, 2);
  a << -1.0, -1.0;
  Eigen::VectorXd b(1);
  b << -1.0;  // equivalent to x1 + x2 = 1
  const LpResult r = maximize_equality_lp(c, a, b);
  CHECK(r.objective == doctest::Approx(-1.0));
}

TEST_CASE("both pivot rules find the same optimum on random transport") {
  Rng rng(21);
  for (int trial = 0; trial < 12; ++trial) {
    const int nz = 2 + static_cast<int>(rng.index(3));
    const int nx = 2 + static_cast<int>(rng.index(3));
    Eigen::VectorXd c(nz * nx);
    for (int k = 0; k < c.size(); ++k) c[k] = rng.uniform(-1, 1);

    std::vector<double> wz(nz), wx(nx);
    double tz = 0, tx = 0;
    for (auto& w : wz) tz += (w = rng.uniform(0.2, 1.0));
    for (auto& w : wx) tx += (w = rng.uniform(0.2, 1.0));
    for (auto& w : wz) w /= tz;
    for (auto& w : wx) w /= tx;

    const int rows = nz + nx - 1;
    RowMatrix a = RowMatrix::Zero(rows, nz * nx);
    Eigen::VectorXd b(rows);
    for (int k = 0; k < nz; ++k) {
      b[k] = wz[k];
      for (int l = 0; l < nx; ++l) a(k, k * nx + l) = 1.0;
    }
    for (int l = 0; l + 1 < nx; ++l) {
      b[nz + l] = wx[l];
      for (int k = 0; k < nz; ++k) a(nz + l, k * nx + l) = 1.0;
    }

    LpSettings bland;
    bland.pivot = PivotRule::Bland;
    LpSettings dantzig;
    dantzig.pivot = PivotRule::Dantzig;
    const LpResult rb = maximize_equality_lp(c, a, b, bland);
    const LpResult rd = maximize_equality_lp(c, a, b, dantzig);
    CHECK(std::abs(rb.objective - rd.objective) <= 1e-10);

    // cross-check against exhaustive vertex enumeration
    const auto brute = enumerate_vertex_max(c, a, b);
    CHECK(std::abs(rb.objective - brute.best) <= 1e-10);

    // feasibility of the returned point
    CHECK((a * rb.x - b).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(rb.x.minCoeff() >= 0.0);
  }
}

TEST_CASE("degenerate ties terminate under both rules") {
  // equal weights and a constant payoff: everything ties
  Eigen::VectorXd c = Eigen::VectorXd::Ones(9);
  const int nz = 3, nx = 3;
  const int rows = nz + nx - 1;
  RowMatrix a = RowMatrix::Zero(rows, 9);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(rows, 1.0 / 3.0);
  for (int k = 0; k < nz; ++k)
    for (int l = 0; l < nx; ++l) a(k, k * nx + l) = 1.0;
  for (int l = 0; l + 1 < nx; ++l)
    for (int k = 0; k < nz; ++k) a(nz + l, k * nx + l) = 1.0;
  for (auto rule : {PivotRule::Bland, PivotRule::Dantzig}) {
    LpSettings s;
    s.pivot = rule;
    const LpResult r = maximize_equality_lp(c, a, b, s);
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-12));
  }
}
