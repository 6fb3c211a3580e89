#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hiergp/rng.hpp"
#include "test_util.hpp"

using namespace hiergp;

TEST_CASE("normal sampling moments and concentration", "[rng]") {
  RngHandle rng(7);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_normal(0.0, 1.0, rng);
  const auto m = testutil::moments(xs);
  CHECK(std::abs(m.mean) < 0.02);
  CHECK(std::abs(m.var - 1.0) < 0.05);

  for (int i = 0; i < 20000; ++i) {
    const double x = sample_normal(5.0, 0.001, rng);
    REQUIRE(x > 4.99);
    REQUIRE(x < 5.01);
  }
  CHECK_THROWS_AS(sample_normal(0.0, 0.0, rng), invalid_parameter);
  CHECK_THROWS_AS(sample_normal(0.0, -1.0, rng), invalid_parameter);
}

TEST_CASE("seeded streams replay and sub-streams differ", "[rng]") {
  RngHandle a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(sample_normal(0, 1, a) == sample_normal(0, 1, b));

  RngHandle s0(42, 0), s1(42, 1), s0b(42, 0);
  bool all_equal = true;
  for (int i = 0; i < 32; ++i) {
    const double x = sample_normal(0, 1, s0), y = sample_normal(0, 1, s1);
    all_equal = all_equal && x == y;
    REQUIRE(x == sample_normal(0, 1, s0b));
  }
  CHECK_FALSE(all_equal);
}

TEST_CASE("multivariate normal sampling", "[rng]") {
  RngHandle rng(11);

  SECTION("identity covariance, componentwise standard moments") {
    const Eigen::VectorXd mu = Eigen::VectorXd::Zero(3);
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3);
    std::vector<std::vector<double>> comp(3, std::vector<double>());
    for (int i = 0; i < 100000; ++i) {
      const Eigen::VectorXd x = sample_mvn(mu, cov, rng);
      for (int j = 0; j < 3; ++j) comp[j].push_back(x[j]);
    }
    for (int j = 0; j < 3; ++j) {
      const auto m = testutil::moments(comp[j]);
      CHECK(std::abs(m.mean) < 0.02);
      CHECK(std::abs(m.var - 1.0) < 0.05);
    }
  }

  SECTION("diagonal covariance variances") {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    cov(0, 0) = 4.0;
    cov(1, 1) = 9.0;
    std::vector<double> c0, c1;
    for (int i = 0; i < 60000; ++i) {
      const Eigen::VectorXd x = sample_mvn(Eigen::VectorXd::Zero(2), cov, rng);
      c0.push_back(x[0]);
      c1.push_back(x[1]);
    }
    CHECK(testutil::moments(c0).var == Approx(4.0).epsilon(0.05));
    CHECK(testutil::moments(c1).var == Approx(9.0).epsilon(0.05));
  }

  SECTION("rank-deficient covariance collapses to its eigenvector") {
    Eigen::MatrixXd cov(2, 2);
    cov << 1, 1, 1, 1;
    // oracle: eigendecomposition of the 2x2 matrix
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    REQUIRE(eig.eigenvalues()[0] == Approx(0.0).margin(1e-12));
    REQUIRE(eig.eigenvalues()[1] == Approx(2.0).margin(1e-12));

    std::vector<double> along, across;
    for (int i = 0; i < 20000; ++i) {
      const Eigen::VectorXd x = sample_mvn(Eigen::VectorXd::Zero(2), cov, rng);
      REQUIRE(std::abs(x[0] - x[1]) < 1e-3);
      along.push_back((x[0] + x[1]) / std::numbers::sqrt2);
      across.push_back((x[0] - x[1]) / std::numbers::sqrt2);
    }
    CHECK(testutil::moments(along).var == Approx(2.0).epsilon(0.05));
    CHECK(testutil::moments(across).var < 1e-6);
  }

  SECTION("diagonal mvn matches independent normals (two-sample KS)") {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    cov(0, 0) = 1.0;
    cov(1, 1) = 2.25;
    std::vector<std::vector<double>> mvn_draws(2), ind_draws(2);
    RngHandle rng2(1234);
    for (int i = 0; i < 10000; ++i) {
      const Eigen::VectorXd x = sample_mvn(Eigen::VectorXd::Zero(2), cov, rng);
      mvn_draws[0].push_back(x[0]);
      mvn_draws[1].push_back(x[1]);
      ind_draws[0].push_back(sample_normal(0.0, 1.0, rng2));
      ind_draws[1].push_back(sample_normal(0.0, 1.5, rng2));
    }
    const double thresh = testutil::ks_two_sample_threshold(10000, 10000, testutil::ks_c_01);
    for (int j = 0; j < 2; ++j)
      CHECK(testutil::ks_two_sample(mvn_draws[j], ind_draws[j]) < thresh);
  }

  SECTION("shape mismatch") {
    CHECK_THROWS_AS(sample_mvn(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(3, 3), rng),
                    dimension_mismatch);
  }
}

TEST_CASE("inverse gamma sampling", "[rng]") {
  RngHandle rng(3);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_inverse_gamma(3.0, 2.0, rng);
  CHECK(testutil::moments(xs).mean == Approx(1.0).margin(0.03));

  SECTION("heavy tail of IG(1,1)") {
    // oracle: numerical tail mass of the density x^-2 exp(-1/x) / Gamma(1)
    const auto grid = testutil::log_grid(30.0, 1e9, 4000);
    std::vector<double> dens(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      dens[i] = std::exp(-2.0 * std::log(grid[i]) - 1.0 / grid[i]);
    const double tail = testutil::trapezoid(grid, dens);
    REQUIRE(tail > 0.01);

    long over = 0;
    for (int i = 0; i < 100000; ++i)
      if (sample_inverse_gamma(1.0, 1.0, rng) > 30.0) ++over;
    const double frac = over / 1e5;
    CHECK(frac > 0.01);
    CHECK(frac == Approx(tail).margin(0.004));
  }

  SECTION("determinism under fixed seed") {
    RngHandle a(99), b(99);
    for (int i = 0; i < 50; ++i)
      REQUIRE(sample_inverse_gamma(2.0, 3.0, a) == sample_inverse_gamma(2.0, 3.0, b));
  }
  CHECK_THROWS_AS(sample_inverse_gamma(0.0, 1.0, rng), invalid_parameter);
}

TEST_CASE("beta sampling", "[rng]") {
  RngHandle rng(5);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_beta(1.0, 6.0, rng);
  CHECK(testutil::moments(xs).mean == Approx(1.0 / 7.0).margin(0.01));

  for (auto& x : xs) x = sample_beta(1.0, 1.0, rng);
  const double d = testutil::ks_statistic(xs, [](double x) { return x; });
  CHECK(d < 0.01);

  for (auto& x : xs) x = sample_beta(2.0, 2.0, rng);
  const auto m = testutil::moments(xs);
  CHECK(m.mean == Approx(0.5).margin(0.01));
  CHECK(m.var == Approx(0.05).epsilon(0.10));

  CHECK_THROWS_AS(sample_beta(0.0, 1.0, rng), invalid_parameter);
}

TEST_CASE("categorical sampling", "[rng]") {
  RngHandle rng(17);
  const std::vector<double> degenerate{0.0, 1.0, 0.0};
  for (int i = 0; i < 100; ++i) REQUIRE(sample_categorical(degenerate, rng) == 1);

  const std::vector<double> even{1.0, 1.0};
  long ones = 0;
  for (int i = 0; i < 100000; ++i) ones += sample_categorical(even, rng);
  CHECK(ones / 1e5 == Approx(0.5).margin(0.01));

  const std::vector<double> skew{1.0, 2.0, 7.0};
  std::vector<long> counts(3, 0);
  for (int i = 0; i < 100000; ++i) ++counts[sample_categorical(skew, rng)];
  CHECK(counts[0] / 1e5 == Approx(0.1).margin(0.01));
  CHECK(counts[1] / 1e5 == Approx(0.2).margin(0.01));
  CHECK(counts[2] / 1e5 == Approx(0.7).margin(0.01));

  CHECK_THROWS_AS(sample_categorical(std::vector<double>{0.0, 0.0}, rng), invalid_parameter);
  CHECK_THROWS_AS(sample_categorical(std::vector<double>{-1.0, 2.0}, rng), invalid_parameter);
}

TEST_CASE("normal density closed forms", "[rng]") {
  CHECK(density_normal(0.0, 0.0, 1.0) == Approx(0.398942).margin(1e-6));
  CHECK(density_normal(1.0, 0.0, 1.0) == Approx(0.241971).margin(1e-6));
  CHECK(density_normal(0.0, 0.0, 4.0) == Approx(0.199471).margin(1e-6));
  CHECK_THROWS_AS(density_normal(0.0, 0.0, 0.0), invalid_parameter);

  // integrates to one on a wide grid
  const double mass = testutil::trapezoid_fn([](double x) { return density_normal(x, 0, 1); },
                                             -12.0, 12.0, 20000);
  CHECK(mass == Approx(1.0).margin(1e-3));
}

TEST_CASE("student-t density closed forms and quadrature", "[rng]") {
  CHECK(density_student_t(0.0, 2.0, 1.0) == Approx(0.353553).margin(1e-6));
  CHECK(density_student_t(0.0, 2.0, 4.0) == Approx(0.176777).margin(1e-6));
  CHECK_THROWS_AS(density_student_t(0.0, 0.0, 1.0), invalid_parameter);

  // trapezoid with step 0.01 over [-50, 50]
  const double mass = testutil::trapezoid_fn(
      [](double x) { return density_student_t(x, 2.0, 1.0); }, -50.0, 50.0, 10000);
  CHECK(mass == Approx(1.0).margin(1e-3));

  for (double x : {-3.0, -0.5, 0.0, 1.0, 10.0})
    CHECK(density_student_t(x, 2.0, 1.0) >= 0.0);
}
