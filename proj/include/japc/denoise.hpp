#pragma once

// Reference subtraction for probability waveforms. Slow drift and static
// pickup move every cell of a run (or of one delay set) together, so
// differencing against a quiet reference removes them without touching the
// echo signature. Outputs are differences in probability units; they are no
// longer probabilities.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "japc/estimator.hpp"
#include "japc/sampler.hpp"

namespace japc {

enum class DenoiseMode { kNone, kBackground, kSetReference };

// Cell-by-cell difference against a probe-off run of identical shape.
// Saturation flags travel with the measurement side: a saturated background
// cell still subtracts, but a saturated measurement cell stays flagged.
inline ProbabilityWaveform subtract_background(const ProbabilityWaveform& meas,
                                               const ProbabilityWaveform& background) {
  if (!meas.same_shape(background)) {
    throw std::invalid_argument("subtract_background: waveform shapes differ");
  }
  ProbabilityWaveform out = meas;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] -= background.values[i];
  }
  return out;
}

// Differences each cell against its own set's reference column, cancelling
// anything constant within a set (drift over the set, the set's pickup phase).
// The reference column itself reads zero afterwards.
inline ProbabilityWaveform subtract_set_reference(const ProbabilityWaveform& meas,
                                                  int ref_column = 0) {
  if (ref_column < 0 || ref_column >= meas.samples_per_cycle) {
    throw std::invalid_argument("subtract_set_reference: reference column out of range");
  }
  ProbabilityWaveform out = meas;
  for (int j = 0; j < meas.delay_sets; ++j) {
    const double ref = meas.at(j, ref_column);
    for (int p = 0; p < meas.samples_per_cycle; ++p) {
      out.at(j, p) = (p == ref_column) ? 0.0 : meas.at(j, p) - ref;
    }
  }
  return out;
}

struct ReferenceCheck {
  bool ok = true;
  int worst_set = 0;
  double worst_deviation = 0.0;
  double median = 0.0;
  double noise_floor = 0.0;
};

// The reference column must be signal-free: every set's reference should sit
// within the noise floor of the column median, otherwise echoes are leaking
// into it and subtraction would corrupt the waveform. A negative floor selects
// the default of 1.5x the probability interval width for the waveform's trial
// count.
inline ReferenceCheck validate_reference_set(const ProbabilityWaveform& meas,
                                             int ref_column = 0,
                                             double noise_floor = -1.0) {
  if (ref_column < 0 || ref_column >= meas.samples_per_cycle) {
    throw std::invalid_argument("validate_reference_set: reference column out of range");
  }
  if (meas.delay_sets < 1) {
    throw std::invalid_argument("validate_reference_set: empty waveform");
  }
  ReferenceCheck check;
  check.noise_floor = noise_floor >= 0.0 ? noise_floor : 1.5 * delta_p(0.5, meas.trials);
  std::vector<double> column(meas.delay_sets);
  for (int j = 0; j < meas.delay_sets; ++j) column[j] = meas.at(j, ref_column);
  std::vector<double> sorted = column;
  std::sort(sorted.begin(), sorted.end());
  const int n = meas.delay_sets;
  check.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  for (int j = 0; j < n; ++j) {
    const double dev = std::fabs(column[j] - check.median);
    if (dev > check.worst_deviation) {
      check.worst_deviation = dev;
      check.worst_set = j;
    }
  }
  check.ok = check.worst_deviation <= check.noise_floor;
  return check;
}

}  // namespace japc
