#pragma once

// Transmission-line model: a cascade of uniform segments driven from a pad,
// described by a bounce diagram. Events are wave arrivals back at the pad;
// the observed waveform is the superposition of the probe pulse shifted to
// each arrival and scaled by the path gain.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

namespace japc {

struct Termination {
  enum Kind { kOpen, kShort, kMatched, kResistive };
  Kind kind = kOpen;
  double ohms = 0.0;  // only meaningful for kResistive

  static Termination open() { return {kOpen, 0.0}; }
  static Termination short_circuit() { return {kShort, 0.0}; }
  static Termination matched() { return {kMatched, 0.0}; }
  static Termination resistive(double r) { return {kResistive, r}; }
};

struct LineSegment {
  double impedance_ohms = 50.0;
  double length_m = 1.0;
  double velocity_mps = 2e8;
  double attenuation = 1.0;  // amplitude factor applied per traversal

  double one_way_delay_s() const { return length_m / velocity_mps; }
};

struct SegmentedLine {
  double source_impedance_ohms = 50.0;
  std::vector<LineSegment> segments;
  Termination termination = Termination::open();

  void validate() const {
    if (!(source_impedance_ohms > 0.0) || !std::isfinite(source_impedance_ohms)) {
      throw std::invalid_argument("SegmentedLine: source impedance must be positive and finite");
    }
    if (segments.empty()) {
      throw std::invalid_argument("SegmentedLine: at least one segment required");
    }
    for (const LineSegment& s : segments) {
      if (!(s.impedance_ohms > 0.0) || !std::isfinite(s.impedance_ohms)) {
        throw std::invalid_argument("SegmentedLine: segment impedance must be positive and finite");
      }
      if (!(s.length_m > 0.0)) {
        throw std::invalid_argument("SegmentedLine: segment length must be positive");
      }
      if (!(s.velocity_mps > 0.0) || s.velocity_mps > 2.99792458e8) {
        throw std::invalid_argument("SegmentedLine: velocity must be in (0, c]");
      }
      if (!(s.attenuation > 0.0) || s.attenuation > 1.0) {
        throw std::invalid_argument("SegmentedLine: attenuation must be in (0, 1]");
      }
    }
    if (termination.kind == Termination::kResistive &&
        (!(termination.ohms > 0.0) || !std::isfinite(termination.ohms))) {
      throw std::invalid_argument("SegmentedLine: resistive termination must be positive and finite");
    }
  }
};

struct ProbePulse {
  enum Shape { kRectangular, kTrapezoidal };

  double amplitude_v = 0.6;
  double width_s = 1e-9;
  Shape shape = kTrapezoidal;
  double rise_time_s = 2e-10;  // trapezoidal only
  double launch_time_s = 0.0;

  void validate() const {
    if (amplitude_v == 0.0 || !std::isfinite(amplitude_v)) {
      throw std::invalid_argument("ProbePulse: amplitude must be nonzero and finite");
    }
    if (!(width_s > 0.0)) {
      throw std::invalid_argument("ProbePulse: width must be positive");
    }
    if (shape == kTrapezoidal && !(rise_time_s > 0.0 && rise_time_s < width_s)) {
      throw std::invalid_argument("ProbePulse: rise time must be in (0, width)");
    }
    if (launch_time_s < 0.0) {
      throw std::invalid_argument("ProbePulse: launch time must be non-negative");
    }
  }

  /// Pulse value at absolute time t; support is [launch, launch + width).
  double value_at(double t) const {
    const double u = t - launch_time_s;
    if (u < 0.0 || u >= width_s) return 0.0;
    if (shape == kRectangular) return amplitude_v;
    const double env = std::min({1.0, u / rise_time_s, (width_s - u) / rise_time_s});
    return amplitude_v * std::max(0.0, env);
  }
};

/// One wave arrival at the pad. Times are relative to the launch instant;
/// the incident launch itself is the event at time zero with gain one.
struct ReflectionEvent {
  double arrival_time_s = 0.0;
  double gain = 0.0;
};

/// Voltage reflection coefficient looking from z_from into z_to.
inline double reflection_coefficient(double z_from, double z_to) {
  if (!(z_from > 0.0) || !std::isfinite(z_from) || !(z_to > 0.0) || !std::isfinite(z_to)) {
    throw std::domain_error("reflection_coefficient: impedances must be positive and finite");
  }
  return (z_to - z_from) / (z_to + z_from);
}

inline double reflection_coefficient(double z_from, const Termination& to) {
  if (!(z_from > 0.0) || !std::isfinite(z_from)) {
    throw std::domain_error("reflection_coefficient: impedances must be positive and finite");
  }
  switch (to.kind) {
    case Termination::kOpen:
      return 1.0;
    case Termination::kShort:
      return -1.0;
    case Termination::kMatched:
      return 0.0;
    case Termination::kResistive:
      return reflection_coefficient(z_from, to.ohms);
  }
  return 0.0;
}

/// Enumerates all pad arrivals with at most max_order reflections and final
/// |gain| >= min_gain, sorted by (arrival time, gain). Paths whose gain hits
/// exactly zero are dropped (nothing propagates past a matched interface).
inline std::vector<ReflectionEvent> bounce_diagram(const SegmentedLine& line,
                                                   int max_order = 8,
                                                   double min_gain = 1e-4) {
  line.validate();
  if (max_order < 1) {
    throw std::invalid_argument("bounce_diagram: max_order must be >= 1");
  }
  if (!(min_gain >= 0.0) || min_gain >= 1.0) {
    throw std::invalid_argument("bounce_diagram: min_gain must be in [0, 1)");
  }

  const std::size_t n = line.segments.size();

  // Interface coefficients. right_refl[i] / right_tau[i]: rightward wave in
  // segment i hitting its right boundary. left_refl[i] / left_tau[i]: the
  // same for a leftward wave hitting the left boundary of segment i.
  std::vector<double> right_refl(n), right_tau(n, 0.0), left_refl(n), left_tau(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = line.segments[i].impedance_ohms;
    if (i + 1 < n) {
      const double zr = line.segments[i + 1].impedance_ohms;
      right_refl[i] = reflection_coefficient(z, zr);
      right_tau[i] = 1.0 + right_refl[i];
    } else {
      right_refl[i] = reflection_coefficient(z, line.termination);
    }
    if (i == 0) {
      left_refl[i] = reflection_coefficient(z, line.source_impedance_ohms);
    } else {
      const double zl = line.segments[i - 1].impedance_ohms;
      left_refl[i] = reflection_coefficient(z, zl);
      left_tau[i] = 1.0 + left_refl[i];
    }
  }

  // A path returning to the pad crosses every interface an equal number of
  // times in each direction, so the product of the leftover (pad-bound)
  // transmission factors bounds how much an in-flight gain can still grow.
  double headroom = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    headroom *= std::max(1.0, left_tau[i]);
  }
  const double inflight_floor = (min_gain > 0.0) ? min_gain / headroom : 0.0;

  struct Wave {
    std::size_t segment;
    bool rightward;
    double t;
    double gain;
    int order;
  };

  std::vector<ReflectionEvent> events;
  events.push_back({0.0, 1.0});  // incident launch observed at the pad

  std::deque<Wave> queue;
  queue.push_back({0, true, 0.0, 1.0, 0});

  constexpr std::size_t kMaxEvents = 1u << 20;
  while (!queue.empty()) {
    Wave w = queue.front();
    queue.pop_front();
    if (min_gain > 0.0 && std::fabs(w.gain) < inflight_floor) continue;

    const LineSegment& seg = line.segments[w.segment];
    const double t_arrive = w.t + seg.one_way_delay_s();
    const double g_arrive = w.gain * seg.attenuation;
    if (g_arrive == 0.0) continue;

    if (w.rightward) {
      // Reflection back toward the pad.
      if (w.order + 1 <= max_order) {
        const double g = g_arrive * right_refl[w.segment];
        if (g != 0.0) queue.push_back({w.segment, false, t_arrive, g, w.order + 1});
      }
      // Transmission into the next segment (none past the termination).
      if (w.segment + 1 < n) {
        const double g = g_arrive * right_tau[w.segment];
        if (g != 0.0) queue.push_back({w.segment + 1, true, t_arrive, g, w.order});
      }
    } else {
      if (w.segment == 0) {
        // Arrival at the pad: record, then re-launch off the source mismatch.
        if (min_gain == 0.0 || std::fabs(g_arrive) >= min_gain) {
          events.push_back({t_arrive, g_arrive});
          if (events.size() > kMaxEvents) {
            throw std::runtime_error(
                "bounce_diagram: event explosion; tighten max_order/min_gain");
          }
        }
        if (w.order + 1 <= max_order) {
          const double g = g_arrive * left_refl[0];
          if (g != 0.0) queue.push_back({0, true, t_arrive, g, w.order + 1});
        }
      } else {
        if (w.order + 1 <= max_order) {
          const double g = g_arrive * left_refl[w.segment];
          if (g != 0.0) queue.push_back({w.segment, true, t_arrive, g, w.order + 1});
        }
        const double g = g_arrive * left_tau[w.segment];
        if (g != 0.0) queue.push_back({w.segment - 1, false, t_arrive, g, w.order});
      }
    }
  }

  std::sort(events.begin(), events.end(), [](const ReflectionEvent& a, const ReflectionEvent& b) {
    if (a.arrival_time_s != b.arrival_time_s) return a.arrival_time_s < b.arrival_time_s;
    return a.gain < b.gain;
  });
  return events;
}

/// Pad voltage at time t: sum of the pulse shifted to each arrival. Zero
/// before the first arrival because the pulse has no pre-launch support.
inline double synthesize_waveform(const std::vector<ReflectionEvent>& events,
                                  const ProbePulse& pulse, double t) {
  double v = 0.0;
  for (const ReflectionEvent& e : events) {
    if (e.arrival_time_s > t - pulse.launch_time_s) break;  // sorted by arrival
    v += e.gain * pulse.value_at(t - e.arrival_time_s);
  }
  return v;
}

}  // namespace japc
