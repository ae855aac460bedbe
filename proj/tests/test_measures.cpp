#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "mmot/errors.hpp"
#include "mmot/io.hpp"
#include "mmot/measure.hpp"
#include "mmot/problem.hpp"
#include "mmot/rng.hpp"
#include "test_support.hpp"

using namespace mmot;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

}  // namespace

TEST_CASE("csv load parses coordinates and weights") {
  const auto p = write_temp("m1.csv", "0,0,0.5\n1,1,0.5\n");
  const DiscreteMeasure mu = load_measure_csv(p.string());
  REQUIRE(mu.size() == 2);
  REQUIRE(mu.dim() == 2);
  CHECK(mu.point(0)[0] == 0.0);
  CHECK(mu.point(1)[0] == 1.0);
  CHECK(mu.weight(0) == 0.5);
  CHECK(mu.weight(1) == 0.5);
}

TEST_CASE("csv load normalizes and records the rescale factor") {
  const auto p = write_temp("m2.csv", "0,2\n1,6\n");
  LoadInfo info;
  const DiscreteMeasure mu = load_measure_csv(p.string(), &info);
  REQUIRE(mu.size() == 2);
  CHECK(mu.dim() == 1);
  CHECK(mu.weight(0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(mu.weight(1) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(info.total_mass == doctest::Approx(8.0));
  CHECK(info.rescale == doctest::Approx(0.125));
}

TEST_CASE("csv load rejects bad rows with their row number") {
  SUBCASE("negative weight") {
    const auto p = write_temp("m3.csv", "0,-1\n");
    CHECK_THROWS_WITH_AS(load_measure_csv(p.string()),
                         doctest::Contains("nonpositive weight at row 1"),
                         ValidationError);
  }
  SUBCASE("malformed value") {
    const auto p = write_temp("m4.csv", "0,0.5\nx,0.5\n");
    CHECK_THROWS_WITH_AS(load_measure_csv(p.string()),
                         doctest::Contains("row 2"), ValidationError);
  }
  SUBCASE("inconsistent dimension") {
    const auto p = write_temp("m5.csv", "0,0,0.5\n1,0.5\n");
    CHECK_THROWS_WITH_AS(load_measure_csv(p.string()),
                         doctest::Contains("inconsistent dimension at row 2"),
                         ValidationError);
  }
  SUBCASE("NaN entry") {
    const auto p = write_temp("m6.csv", "nan,0.5\n");
    CHECK_THROWS_WITH_AS(load_measure_csv(p.string()),
                         doctest::Contains("NaN entry at row 1"),
                         ValidationError);
  }
  SUBCASE("zero total mass") {
    const auto p = write_temp("m7.csv", "0,0\n1,0\n");
    CHECK_THROWS_WITH_AS(load_measure_csv(p.string()),
                         doctest::Contains("nonpositive total mass"),
                         ValidationError);
  }
}

TEST_CASE("construction invariants") {
  SUBCASE("zero-weight atoms are dropped") {
    const DiscreteMeasure mu({Vector{{0.0}}, Vector{{1.0}}}, {0.0, 1.0});
    CHECK(mu.size() == 1);
    CHECK(mu.point(0)[0] == 1.0);
  }
  SUBCASE("weights must sum to one") {
    CHECK_THROWS_AS(DiscreteMeasure({Vector{{0.0}}}, {0.5}), ValidationError);
  }
  SUBCASE("no empty measures") {
    CHECK_THROWS_AS(DiscreteMeasure({}, {}), ValidationError);
  }
  SUBCASE("non-finite coordinates rejected") {
    CHECK_THROWS_AS(
        DiscreteMeasure({Vector{{std::nan("")}}}, {1.0}), ValidationError);
  }
}

TEST_CASE("instance generation is deterministic in the seed") {
  InstanceSpec spec;
  spec.m = 3;
  spec.n = 1;
  spec.atoms = 2;
  spec.seed = 7;
  const auto a = generate_marginals(spec);
  const auto b = generate_marginals(spec);
  REQUIRE(a.size() == 3);
  for (int i = 0; i < 3; ++i) {
    // bitwise identical serialization
    CHECK(measure_to_json(a[i]).dump() == measure_to_json(b[i]).dump());
  }
  spec.seed = 8;
  const auto c = generate_marginals(spec);
  CHECK(measure_to_json(a[0]).dump() != measure_to_json(c[0]).dump());
}

TEST_CASE("single-atom instances are Diracs of weight 1") {
  InstanceSpec spec;
  spec.m = 2;
  spec.n = 2;
  spec.atoms = 1;
  const auto ms = generate_marginals(spec);
  for (const auto& mu : ms) {
    CHECK(mu.size() == 1);
    CHECK(mu.weight(0) == 1.0);
  }
}

TEST_CASE("empty marginal is rejected") {
  InstanceSpec spec;
  spec.atoms = 0;
  CHECK_THROWS_WITH_AS(generate_marginals(spec),
                       doctest::Contains("empty marginal"), ValidationError);
}

TEST_CASE("pushforward of a Dirac is a Dirac at the image") {
  const auto mu = DiscreteMeasure::dirac(Vector{{1.0, 2.0}});
  const auto nu = pushforward(
      mu, [](const Vector& x) { return Vector(2.0 * x); });
  REQUIRE(nu.size() == 1);
  CHECK(nu.point(0)[0] == 2.0);
  CHECK(nu.point(0)[1] == 4.0);
  CHECK(nu.weight(0) == 1.0);
}

TEST_CASE("pushforward under the identity keeps the measure") {
  Rng rng(3);
  std::vector<Vector> pts;
  std::vector<double> ws;
  for (int k = 0; k < 6; ++k) {
    pts.push_back(Vector{{rng.uniform(-1, 1), rng.uniform(-1, 1)}});
    ws.push_back(1.0 / 6.0);
  }
  const DiscreteMeasure mu(pts, ws);
  const auto nu = pushforward(mu, [](const Vector& x) { return x; });
  CHECK(nu.approx_equal(mu, 1e-15));
}

TEST_CASE("pushforward merges coinciding images and conserves mass") {
  const DiscreteMeasure mu({Vector{{0.0}}, Vector{{1.0}}}, {0.3, 0.7});
  const auto nu =
      pushforward(mu, [](const Vector&) { return Vector{{5.0}}; });
  REQUIRE(nu.size() == 1);
  CHECK(nu.point(0)[0] == 5.0);
  CHECK(nu.weight(0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("pushforward conserves mass on random maps") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + static_cast<int>(rng.index(6));
    std::vector<Vector> pts;
    std::vector<double> ws;
    for (int i = 0; i < k; ++i) {
      pts.push_back(Vector{{rng.uniform(-2, 2)}});
      ws.push_back(rng.uniform(0.1, 1.0));
    }
    const auto mu = DiscreteMeasure::normalized(pts, ws);
    // rounding map creates deliberate collisions
    const auto nu = pushforward(mu, [](const Vector& x) {
      return Vector{{std::round(x[0])}};
    });
    double total = 0.0;
    for (int i = 0; i < nu.size(); ++i) total += nu.weight(i);
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("save and load round-trip csv and json") {
  Rng rng(5);
  std::vector<Vector> pts;
  std::vector<double> ws;
  for (int k = 0; k < 5; ++k) {
    pts.push_back(Vector{{rng.uniform(-3, 3), rng.uniform(-3, 3),
                          rng.uniform(-3, 3)}});
    ws.push_back(rng.uniform(0.05, 1.0));
  }
  const auto mu = DiscreteMeasure::normalized(pts, ws);

  SUBCASE("csv") {
    const auto p = fs::temp_directory_path() / "roundtrip.csv";
    save_measure_csv(mu, p.string());
    const auto back = load_measure_csv(p.string());
    REQUIRE(back.size() == mu.size());
    for (int k = 0; k < mu.size(); ++k) {
      CHECK((back.point(k) - mu.point(k)).lpNorm<Eigen::Infinity>() <= 1e-15);
      CHECK(std::abs(back.weight(k) - mu.weight(k)) <= 1e-15);
    }
  }
  SUBCASE("json") {
    const auto p = fs::temp_directory_path() / "roundtrip.json";
    save_measure_json(mu, p.string());
    const auto back = load_measure_json(p.string());
    REQUIRE(back.size() == mu.size());
    for (int k = 0; k < mu.size(); ++k) {
      CHECK((back.point(k) - mu.point(k)).lpNorm<Eigen::Infinity>() <= 1e-15);
      CHECK(std::abs(back.weight(k) - mu.weight(k)) <= 1e-15);
    }
  }
}

TEST_CASE("canonical order sorts atoms lexicographically") {
  const DiscreteMeasure mu(
      {Vector{{1.0, 0.0}}, Vector{{0.0, 2.0}}, Vector{{0.0, 1.0}}},
      {0.2, 0.3, 0.5});
  const auto c = mu.canonical();
  CHECK(c.point(0)[0] == 0.0);
  CHECK(c.point(0)[1] == 1.0);
  CHECK(c.point(1)[1] == 2.0);
  CHECK(c.point(2)[0] == 1.0);
  CHECK(c.weight(0) == 0.5);
}

TEST_CASE("generated atoms never coincide") {
  InstanceSpec spec;
  spec.m = 2;
  spec.n = 1;
  spec.atoms = 40;
  spec.seed = 123;
  const auto ms = generate_marginals(spec);
  for (const auto& mu : ms) {
    for (int a = 0; a < mu.size(); ++a)
      for (int b = a + 1; b < mu.size(); ++b)
        CHECK((mu.point(a) - mu.point(b)).norm() > 0.0);
  }
}
