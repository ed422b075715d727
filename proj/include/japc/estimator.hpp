#pragma once

// Trial planning and probability readout: how many 1-bit trials an operating
// point needs, the probability resolution a trial count buys, and the mapping
// from an estimated probability back to a voltage.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "japc/normal.hpp"

namespace japc {

// Smallest trial count that keeps the expected minority count at or above 9,
// the usual floor for treating a binomial estimate as Gaussian. The small
// backoff keeps inputs whose odds ratio lands on an exact integer from
// rounding up a spurious extra trial.
inline std::int64_t min_trials(double p0) {
  if (!(p0 > 0.0 && p0 < 1.0)) {
    throw std::domain_error("min_trials: operating point must be inside (0, 1)");
  }
  const double odds = std::max(p0 / (1.0 - p0), (1.0 - p0) / p0);
  return static_cast<std::int64_t>(std::ceil(9.0 * odds - 1e-9));
}

// Two-sided confidence interval width for a probability estimated from the
// given number of trials: 2 z sqrt(p0 (1 - p0) / n) at confidence gamma.
inline double delta_p(double p0, std::int64_t trials, double gamma = 0.95) {
  if (!(p0 > 0.0 && p0 < 1.0)) {
    throw std::domain_error("delta_p: operating point must be inside (0, 1)");
  }
  if (trials < 1) {
    throw std::domain_error("delta_p: trial count must be positive");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::domain_error("delta_p: confidence must be inside (0, 1)");
  }
  const double z = inverse_normal_cdf(0.5 * (1.0 + gamma));
  return 2.0 * z * std::sqrt(p0 * (1.0 - p0) / static_cast<double>(trials));
}

// Probability-to-voltage mapping. kProbability passes estimates through
// unchanged; kGaussian inverts the comparator's error-function response;
// kLinear applies the small-signal slope at the 0.5 operating point. Voltages
// are referred to bias_v; polarity is +1 when the signal drives the inverting
// input, so a probability above 0.5 reads as a level below the bias.
struct PvmSpec {
  enum Mode { kProbability, kGaussian, kLinear };

  Mode mode = kProbability;
  double sigma_total_v = 0.0;  // combined dither rms; required for voltage modes
  double bias_v = 0.0;
  double polarity = 1.0;

  void validate() const {
    if (mode != kProbability && (!(sigma_total_v > 0.0) || !std::isfinite(sigma_total_v))) {
      throw std::invalid_argument("PvmSpec: voltage modes need a positive dither sigma");
    }
    if (polarity != 1.0 && polarity != -1.0) {
      throw std::invalid_argument("PvmSpec: polarity must be +1 or -1");
    }
    if (!std::isfinite(bias_v)) {
      throw std::invalid_argument("PvmSpec: bias must be finite");
    }
  }
};

struct PvmValue {
  double value = 0.0;
  bool saturated = false;
};

// The Gaussian inverse is clamped to |z| <= 4: beyond that the estimate sits
// in a tail where one count flips the readout by millivolts, so the value is
// pinned and flagged instead.
inline PvmValue pvm_apply(const PvmSpec& spec, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("pvm_apply: probability outside [0, 1]");
  }
  switch (spec.mode) {
    case PvmSpec::kProbability:
      return {p, p == 0.0 || p == 1.0};
    case PvmSpec::kLinear:
      return {spec.bias_v - spec.polarity * (p - 0.5) * spec.sigma_total_v * kSqrt2Pi,
              p == 0.0 || p == 1.0};
    case PvmSpec::kGaussian: {
      double z;
      bool saturated = false;
      if (p == 0.0) {
        z = -4.0;
        saturated = true;
      } else if (p == 1.0) {
        z = 4.0;
        saturated = true;
      } else {
        z = inverse_normal_cdf(p);
        if (z >= 4.0) {
          z = 4.0;
          saturated = true;
        } else if (z <= -4.0) {
          z = -4.0;
          saturated = true;
        }
      }
      return {spec.bias_v - spec.polarity * spec.sigma_total_v * z, saturated};
    }
  }
  throw std::logic_error("pvm_apply: unhandled mode");
}

// Voltage resolution of the readout at operating point p0: the probability
// interval width propagated through the local slope of the mapping.
inline double delta_v(const PvmSpec& spec, double p0, std::int64_t trials,
                      double gamma = 0.95) {
  spec.validate();
  if (spec.mode == PvmSpec::kProbability) {
    throw std::domain_error("delta_v: probability readout has no voltage scale");
  }
  const double dp = delta_p(p0, trials, gamma);
  if (spec.mode == PvmSpec::kLinear) {
    return dp * spec.sigma_total_v * kSqrt2Pi;
  }
  return dp * spec.sigma_total_v / normal_pdf(inverse_normal_cdf(p0));
}

}  // namespace japc
