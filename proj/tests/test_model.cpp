#include <catch2/catch.hpp>

#include <cmath>

#include "hiergp/model.hpp"
#include "test_util.hpp"

using namespace hiergp;

namespace {

ChainState make_state(const TruncationVector& trunc) {
  ChainState st;
  st.trunc = trunc;
  const auto K = static_cast<Eigen::Index>(trunc.size());
  st.lambda = Eigen::VectorXd::Zero(K);
  st.sigma_sq = Eigen::VectorXd::Ones(K);
  st.nu.resize(static_cast<std::size_t>(trunc.dims()));
  st.w.resize(static_cast<std::size_t>(trunc.dims()));
  for (int m = 0; m < trunc.dims(); ++m)
    st.nu[static_cast<std::size_t>(m)] = Eigen::VectorXd::Zero(trunc.count(m));
  st.refresh_weights();
  st.z = Eigen::MatrixXi::Ones(K, trunc.dims());
  st.theta_sq = 1.0;
  return st;
}

}  // namespace

TEST_CASE("log likelihood closed forms", "[model]") {
  ChainState st = make_state(TruncationVector{{1}, 1});

  Eigen::MatrixXd design(1, 1);
  design << 1.0;
  Eigen::VectorXd y(1);
  y << 0.0;
  CHECK(log_likelihood(st, design, y) == Approx(-0.918939).margin(1e-5));

  Eigen::MatrixXd design2(2, 1);
  design2 << 1.0, 1.0;
  Eigen::VectorXd y2 = Eigen::VectorXd::Zero(2);
  CHECK(log_likelihood(st, design2, y2) == Approx(-1.837877).margin(1e-5));

  Eigen::VectorXd y3(1);
  y3 << 2.0;
  st.theta_sq = 4.0;
  CHECK(log_likelihood(st, design, y3) == Approx(-2.112086).margin(1e-5));

  CHECK_THROWS_AS(log_likelihood(st, design2, y3), dimension_mismatch);
}

TEST_CASE("prior inclusion weights", "[model]") {
  SECTION("no shrinkage means weight one everywhere") {
    ChainState st = make_state(TruncationVector{{3, 3}, 1});
    for (const auto& k : enumerate_indices(st.trunc)) CHECK(prior_weight(st, k) == 1.0);
  }

  SECTION("univariate product") {
    ChainState st = make_state(TruncationVector{{2}, 1});
    st.nu[0] << 0.5, 0.5;
    st.refresh_weights();
    CHECK(prior_weight(st, {2}) == Approx(0.25));
  }

  SECTION("two-dimensional product from hand-set tables") {
    ChainState st = make_state(TruncationVector{{2, 2}, 1});
    st.nu[0] << 0.2, 0.5;  // w = (1, 0.8, 0.4)
    st.nu[1] << 0.5, 0.8;  // w = (1, 0.5, 0.1)
    st.refresh_weights();
    REQUIRE(st.w[0][2] == Approx(0.4));
    REQUIRE(st.w[1][1] == Approx(0.5));
    CHECK(prior_weight(st, {2, 1}) == Approx(0.4 * 0.5));
  }
}

TEST_CASE("prior expectation of cumulative weights", "[model]") {
  // E(w_k) = (alpha/(1+alpha))^k for nu ~ Beta(1, alpha)
  const double alpha = 6.0;
  RngHandle rng(2024);
  const int draws = 100000;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(9);
  for (int i = 0; i < draws; ++i) {
    double w = 1.0;
    acc[0] += w;
    for (int k = 1; k <= 8; ++k) {
      w *= 1.0 - sample_beta(1.0, alpha, rng);
      acc[k] += w;
    }
  }
  for (int k = 1; k <= 8; ++k) {
    const double expect = std::pow(alpha / (1.0 + alpha), k);
    CHECK(acc[k] / draws == Approx(expect).epsilon(0.02));
  }
}

TEST_CASE("heredity monotonicity of prior weights", "[model]") {
  RngHandle rng(5);
  const TruncationVector trunc{{4, 4, 4}, 1};
  const Hyperparameters hyper;
  for (int rep = 0; rep < 50; ++rep) {
    const PriorDraw draw = draw_from_prior(trunc, hyper, rng);
    ChainState st = make_state(trunc);
    st.nu = draw.nu;
    st.refresh_weights();
    const auto indices = enumerate_indices(trunc);
    for (int trial = 0; trial < 40; ++trial) {
      const auto& a = indices[static_cast<std::size_t>(rng.raw() % indices.size())];
      const auto& b = indices[static_cast<std::size_t>(rng.raw() % indices.size())];
      bool a_ge_b = true;
      for (std::size_t m = 0; m < a.size(); ++m) a_ge_b = a_ge_b && a[m] >= b[m];
      if (a_ge_b) CHECK(prior_weight(st, a) <= prior_weight(st, b) + 1e-15);
    }
  }
}

TEST_CASE("dataset and hyperparameter validation", "[model]") {
  Dataset data;
  data.points = Eigen::MatrixXd::Constant(3, 2, 0.5);
  data.responses = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(data.validate(false), dimension_mismatch);

  data.responses = Eigen::VectorXd::Zero(3);
  CHECK_NOTHROW(data.validate(true));
  data.points(0, 0) = 1.5;
  CHECK_THROWS_AS(data.validate(true), invalid_parameter);
  CHECK_NOTHROW(data.validate(false));

  Hyperparameters hyper;
  CHECK(hyper.validate().empty());
  hyper.sigma_inf_sq = 10.0;  // not small relative to the slab
  CHECK_FALSE(hyper.validate().empty());
  hyper.alpha = -1.0;
  CHECK_THROWS_AS(hyper.validate(), invalid_parameter);
}

TEST_CASE("chain state invariants are enforced", "[model]") {
  ChainState st = make_state(TruncationVector{{3, 2}, 1});
  CHECK_NOTHROW(st.validate());

  SECTION("broken cumulative identity") {
    st.w[0][1] = 0.123;
    CHECK_THROWS_AS(st.validate(), numerical_error);
  }
  SECTION("size mismatch") {
    st.lambda.resize(2);
    CHECK_THROWS_AS(st.validate(), dimension_mismatch);
  }
  SECTION("prior draws keep sigma in the spike-or-slab support") {
    RngHandle rng(1);
    Hyperparameters hyper;
    hyper.sigma_inf_sq = 0.0;
    const PriorDraw draw = draw_from_prior(st.trunc, hyper, rng);
    bool saw_spike = false;
    for (Eigen::Index i = 0; i < draw.sigma_sq.size(); ++i) {
      const bool spike = draw.sigma_sq[i] == 0.0;
      saw_spike = saw_spike || spike;
      if (spike) CHECK(draw.lambda[i] == 0.0);
      if (!spike) CHECK(draw.sigma_sq[i] > 0.0);
    }
    CHECK(saw_spike);
  }
}
