#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "japc/estimator.hpp"
#include "oracles.hpp"

using namespace japc;

namespace {
const double kSigma = 8.0622577482985497e-3;
}

TEST_CASE("trial floor from the minority-count rule", "[estimator]") {
  CHECK(min_trials(0.5) == 9);
  CHECK(min_trials(0.1) == 81);
  CHECK(min_trials(0.9) == 81);
  CHECK(min_trials(0.3) == 21);  // exact odds ratio must not round up
  CHECK(min_trials(0.7) == 21);
  CHECK(min_trials(0.01) == 891);
  CHECK_THROWS_AS(min_trials(0.0), std::domain_error);
  CHECK_THROWS_AS(min_trials(1.0), std::domain_error);
  CHECK_THROWS_AS(min_trials(-0.1), std::domain_error);
}

TEST_CASE("probability interval width", "[estimator]") {
  CHECK(delta_p(0.5, 1000) == Catch::Approx(0.06198).margin(1e-5));
  CHECK(delta_p(0.5, 100000) == Catch::Approx(0.00619795).margin(1e-7));
  // Against the independent inverse-CDF oracle.
  const double z = static_cast<double>(oracle::inverse_normal_cdf_bisect(0.975));
  CHECK(delta_p(0.5, 1000) ==
        Catch::Approx(2.0 * z * std::sqrt(0.25 / 1000.0)).margin(1e-9));
  CHECK(delta_p(0.2, 500, 0.99) ==
        Catch::Approx(2.0 * static_cast<double>(oracle::inverse_normal_cdf_bisect(0.995)) *
                      std::sqrt(0.16 / 500.0))
            .margin(1e-9));
  // Tighter with more trials, wider with more confidence.
  CHECK(delta_p(0.5, 4000) == Catch::Approx(0.5 * delta_p(0.5, 1000)).margin(1e-12));
  CHECK(delta_p(0.5, 1000, 0.99) > delta_p(0.5, 1000, 0.95));
  CHECK_THROWS_AS(delta_p(0.0, 1000), std::domain_error);
  CHECK_THROWS_AS(delta_p(0.5, 0), std::domain_error);
  CHECK_THROWS_AS(delta_p(0.5, 1000, 1.0), std::domain_error);
}

TEST_CASE("gaussian readout inverts the comparator response", "[estimator]") {
  PvmSpec g{PvmSpec::kGaussian, kSigma, 0.0, 1.0};
  g.validate();

  const auto mid = pvm_apply(g, 0.5);
  CHECK(mid.value == 0.0);
  CHECK_FALSE(mid.saturated);

  const auto v = pvm_apply(g, 0.8413);
  const double z = static_cast<double>(oracle::inverse_normal_cdf_bisect(0.8413));
  CHECK(v.value == Catch::Approx(-kSigma * z).margin(1e-9));
  CHECK(v.value == Catch::Approx(-8.0607670e-3).margin(2e-8));
  CHECK_FALSE(v.saturated);

  // Bias shifts the readout; polarity mirrors it.
  PvmSpec gb = g;
  gb.bias_v = 0.1;
  CHECK(pvm_apply(gb, 0.8413).value == Catch::Approx(0.1 - kSigma * z).margin(1e-9));
  PvmSpec gp = g;
  gp.polarity = -1.0;
  CHECK(pvm_apply(gp, 0.8413).value == Catch::Approx(kSigma * z).margin(1e-9));
}

TEST_CASE("gaussian readout clamps deep tails", "[estimator]") {
  PvmSpec g{PvmSpec::kGaussian, kSigma, 0.0, 1.0};
  const auto hi = pvm_apply(g, 1.0);
  CHECK(hi.value == Catch::Approx(-4.0 * kSigma).margin(1e-15));
  CHECK(hi.saturated);
  const auto lo = pvm_apply(g, 0.0);
  CHECK(lo.value == Catch::Approx(4.0 * kSigma).margin(1e-15));
  CHECK(lo.saturated);
  // Just inside the clamp: Phi(3.9) is reported unclamped.
  const auto near = pvm_apply(g, normal_cdf(3.9));
  CHECK(near.value == Catch::Approx(-3.9 * kSigma).margin(1e-9));
  CHECK_FALSE(near.saturated);
  const auto past = pvm_apply(g, normal_cdf(4.3));
  CHECK(past.value == Catch::Approx(-4.0 * kSigma).margin(1e-12));
  CHECK(past.saturated);
}

TEST_CASE("linear readout applies the midpoint slope", "[estimator]") {
  PvmSpec lin{PvmSpec::kLinear, kSigma, 0.0, 1.0};
  const auto v = pvm_apply(lin, 0.6);
  CHECK(v.value == Catch::Approx(-0.1 * kSigma * kSqrt2Pi).margin(1e-12));
  CHECK_FALSE(v.saturated);
  CHECK(pvm_apply(lin, 0.5).value == 0.0);
  CHECK(pvm_apply(lin, 0.0).saturated);
  CHECK(pvm_apply(lin, 1.0).saturated);
  PvmSpec mirrored = lin;
  mirrored.polarity = -1.0;
  CHECK(pvm_apply(mirrored, 0.6).value == Catch::Approx(-v.value).margin(1e-15));
}

TEST_CASE("probability readout is the identity", "[estimator]") {
  PvmSpec ident;
  CHECK(pvm_apply(ident, 0.37).value == 0.37);
  CHECK_FALSE(pvm_apply(ident, 0.37).saturated);
  CHECK(pvm_apply(ident, 0.0).saturated);
  CHECK(pvm_apply(ident, 1.0).saturated);
}

TEST_CASE("readout rejects out-of-range probabilities and bad specs", "[estimator]") {
  PvmSpec ident;
  CHECK_THROWS_AS(pvm_apply(ident, -0.01), std::domain_error);
  CHECK_THROWS_AS(pvm_apply(ident, 1.01), std::domain_error);
  PvmSpec bad{PvmSpec::kGaussian, 0.0, 0.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  PvmSpec badpol{PvmSpec::kLinear, kSigma, 0.0, 0.5};
  CHECK_THROWS_AS(badpol.validate(), std::invalid_argument);
}

TEST_CASE("voltage resolution of the readout", "[estimator]") {
  PvmSpec lin{PvmSpec::kLinear, kSigma, 0.0, 1.0};
  CHECK(delta_v(lin, 0.5, 100000) == Catch::Approx(1.25255e-4).margin(5e-9));
  const double z = static_cast<double>(oracle::inverse_normal_cdf_bisect(0.975));
  CHECK(delta_v(lin, 0.5, 100000) ==
        Catch::Approx(2.0 * z * std::sqrt(0.25 / 1e5) * kSigma * kSqrt2Pi).margin(1e-12));

  // Gaussian mode agrees at the midpoint and degrades off it.
  PvmSpec g{PvmSpec::kGaussian, kSigma, 0.0, 1.0};
  CHECK(delta_v(g, 0.5, 100000) == Catch::Approx(delta_v(lin, 0.5, 100000)).margin(1e-15));
  CHECK(delta_v(g, 0.8413, 100000) > delta_v(g, 0.5, 100000));

  PvmSpec ident;
  CHECK_THROWS_AS(delta_v(ident, 0.5, 1000), std::domain_error);
}
