#pragma once

// Turning the probability grid back into a time-domain story: flatten the
// (set, sample) grid onto the equivalent-time axis, locate reflection peaks
// against the baseline, and convert round trips to positions along the line.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "japc/estimator.hpp"
#include "japc/sampler.hpp"

namespace japc {

struct WaveformPoint {
  double time_s = 0.0;  // equivalent-time position within the probing cycle
  double value = 0.0;
  bool saturated = false;
};

struct Waveform {
  std::vector<WaveformPoint> points;  // strictly increasing in time
  bool volts = false;                 // value units: volts, else probability units
};

// Flattens the grid in waveform-time order: sample index outer, delay set
// inner, so consecutive points are one fine step apart. Pass a column index to
// drop that sample from the output (a subtracted reference column carries no
// information); -1 keeps everything. The readout mapping is applied per point;
// the identity mapping passes differences through unchanged, the voltage
// mappings require genuine probabilities.
inline Waveform reconstruct_waveform(const ProbabilityWaveform& w, const MeasurementConfig& cfg,
                                     const PvmSpec& pvm, int exclude_column = -1) {
  if (w.delay_sets != cfg.delay_sets || w.samples_per_cycle != cfg.samples_per_cycle) {
    throw std::invalid_argument("reconstruct_waveform: waveform shape does not match the config");
  }
  if (exclude_column >= w.samples_per_cycle) {
    throw std::invalid_argument("reconstruct_waveform: excluded column out of range");
  }
  pvm.validate();
  Waveform out;
  out.volts = pvm.mode != PvmSpec::kProbability;
  out.points.reserve(static_cast<std::size_t>(w.delay_sets) * w.samples_per_cycle);
  for (int p = 0; p < w.samples_per_cycle; ++p) {
    if (p == exclude_column) continue;
    for (int j = 0; j < w.delay_sets; ++j) {
      WaveformPoint pt;
      pt.time_s = waveform_time(cfg, j, p);
      if (pvm.mode == PvmSpec::kProbability) {
        pt.value = w.at(j, p);
        pt.saturated = w.saturated_at(j, p);
      } else {
        const PvmValue v = pvm_apply(pvm, w.at(j, p));
        pt.value = v.value;
        pt.saturated = v.saturated || w.saturated_at(j, p);
      }
      out.points.push_back(pt);
    }
  }
  return out;
}

// Propagation velocity as a function of position: knots[i] = {start_m, v_mps}
// means velocity v_mps from start_m until the next knot. The first knot must
// sit at the near end (0); the last segment extends indefinitely.
struct VelocityMap {
  std::vector<std::pair<double, double>> knots = {{0.0, 2e8}};

  void validate() const {
    if (knots.empty()) throw std::invalid_argument("VelocityMap: needs at least one knot");
    if (knots.front().first != 0.0) {
      throw std::invalid_argument("VelocityMap: first knot must start at position 0");
    }
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!(knots[i].second > 0.0) || knots[i].second > 2.99792458e8) {
        throw std::invalid_argument("VelocityMap: velocity must be in (0, c]");
      }
      if (i > 0 && !(knots[i].first > knots[i - 1].first)) {
        throw std::invalid_argument("VelocityMap: knot positions must increase");
      }
    }
  }

  // Walks segments, spending travel time at each segment's velocity.
  double distance_for_time(double one_way_s) const {
    validate();
    if (one_way_s < 0.0) {
      throw std::domain_error("VelocityMap: travel time must be non-negative");
    }
    double remaining = one_way_s;
    for (std::size_t i = 0; i < knots.size(); ++i) {
      const double v = knots[i].second;
      if (i + 1 < knots.size()) {
        const double seg_t = (knots[i + 1].first - knots[i].first) / v;
        if (remaining <= seg_t) return knots[i].first + remaining * v;
        remaining -= seg_t;
      } else {
        return knots[i].first + remaining * v;
      }
    }
    return 0.0;  // unreachable; knots is never empty past validate
  }
};

// Two reflections closer than half the spatial pulse extent blur into one.
inline double spatial_resolution(double velocity_mps, double pulse_width_s) {
  if (!(velocity_mps > 0.0) || !(pulse_width_s > 0.0)) {
    throw std::domain_error("spatial_resolution: velocity and width must be positive");
  }
  return 0.5 * velocity_mps * pulse_width_s;
}

struct InterfacePeak {
  double time_s = 0.0;           // leading-edge half-maximum crossing, absolute
  double round_trip_s = 0.0;     // time_s minus the launch instant
  double extremum_time_s = 0.0;  // position of the largest deviation
  double value = 0.0;            // deviation at the extremum, waveform units
  int polarity = 0;              // sign of the reflection in voltage terms
  double distance_m = 0.0;       // position along the line via the velocity map
};

struct InterfaceProfile {
  std::vector<InterfacePeak> peaks;  // in time order
  double baseline = 0.0;             // median the deviations were taken against
};

struct ExtractionParams {
  double threshold = 0.1;       // minimum |deviation| that counts, waveform units
  double pulse_width_s = 1e-9;
  double launch_time_s = 0.0;
  VelocityMap velocity;
  double pvm_polarity = 1.0;  // polarity the readout mapping was (or would be) run with

  void validate() const {
    if (!(threshold > 0.0)) throw std::invalid_argument("ExtractionParams: threshold must be positive");
    if (!(pulse_width_s > 0.0)) throw std::invalid_argument("ExtractionParams: pulse width must be positive");
    if (launch_time_s < 0.0) throw std::invalid_argument("ExtractionParams: launch time must be non-negative");
    if (pvm_polarity != 1.0 && pvm_polarity != -1.0) {
      throw std::invalid_argument("ExtractionParams: polarity must be +1 or -1");
    }
    velocity.validate();
  }
};

// Locates reflection signatures: deviations from the waveform median that are
// windowed local maxima, exceed the threshold, and survive clustering (peaks
// within one pulse width of a cluster's extremum belong to the same physical
// echo; the largest wins). Arrival is timed at the leading edge's last sample
// at or above half the extremum, which stays put when the top saturates.
inline InterfaceProfile extract_iip(const Waveform& wf, const ExtractionParams& params) {
  params.validate();
  const std::size_t n = wf.points.size();
  if (n == 0) throw std::invalid_argument("extract_iip: empty waveform");

  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = wf.points[i].value;
  std::sort(sorted.begin(), sorted.end());
  const double median =
      (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = wf.points[i].value - median;

  // Candidate peaks: magnitude local maxima over a half-pulse-width time
  // window, first of a plateau on ties, at or above threshold.
  const double radius = 0.5 * params.pulse_width_s;
  std::vector<std::size_t> candidates;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(dev[i]) < params.threshold) continue;
    while (wf.points[i].time_s - wf.points[lo].time_s > radius) ++lo;
    bool is_peak = true;
    for (std::size_t k = lo; k < n && wf.points[k].time_s - wf.points[i].time_s <= radius; ++k) {
      if (k == i) continue;
      const double a = std::fabs(dev[k]);
      const double b = std::fabs(dev[i]);
      if (a > b || (a == b && k < i)) {
        is_peak = false;
        break;
      }
    }
    if (is_peak) candidates.push_back(i);
  }

  // Cluster in time order: a candidate within one pulse width of the current
  // cluster's extremum joins it, and the larger magnitude keeps the extremum.
  std::vector<std::size_t> extrema;
  for (const std::size_t c : candidates) {
    if (!extrema.empty() &&
        wf.points[c].time_s - wf.points[extrema.back()].time_s < params.pulse_width_s) {
      if (std::fabs(dev[c]) > std::fabs(dev[extrema.back()])) extrema.back() = c;
    } else {
      extrema.push_back(c);
    }
  }

  InterfaceProfile profile;
  profile.baseline = median;
  for (const std::size_t e : extrema) {
    const double half = 0.5 * std::fabs(dev[e]);
    std::size_t edge = e;
    while (edge > 0 && std::fabs(dev[edge - 1]) >= half) --edge;
    InterfacePeak peak;
    peak.time_s = wf.points[edge].time_s;
    peak.round_trip_s = peak.time_s - params.launch_time_s;
    peak.extremum_time_s = wf.points[e].time_s;
    peak.value = dev[e];
    const double sense = wf.volts ? dev[e] : -params.pvm_polarity * dev[e];
    peak.polarity = sense > 0.0 ? 1 : -1;
    peak.distance_m =
        params.velocity.distance_for_time(0.5 * std::max(peak.round_trip_s, 0.0));
    profile.peaks.push_back(peak);
  }
  return profile;
}

}  // namespace japc
