#pragma once

// Exhaustive recursive reflection-path enumerator, used as the reference for
// the library's queue-based bounce diagram. Interface coefficients are
// recomputed here from first principles rather than reusing library helpers.

#include <algorithm>
#include <cmath>
#include <vector>

#include "japc/channel.hpp"

namespace oracle {

inline double gamma_between(double z_from, double z_to) {
  return (z_to - z_from) / (z_to + z_from);
}

inline double gamma_termination(double z, const japc::Termination& t) {
  switch (t.kind) {
    case japc::Termination::kOpen:
      return 1.0;
    case japc::Termination::kShort:
      return -1.0;
    case japc::Termination::kMatched:
      return 0.0;
    case japc::Termination::kResistive:
      return gamma_between(z, t.ohms);
  }
  return 0.0;
}

inline void bounce_recurse(const japc::SegmentedLine& line, std::size_t seg, bool rightward,
                           double t, double gain, int order, int max_order,
                           std::vector<japc::ReflectionEvent>& out) {
  if (gain == 0.0) return;
  const japc::LineSegment& s = line.segments[seg];
  t += s.length_m / s.velocity_mps;
  gain *= s.attenuation;
  if (rightward) {
    const double gr = (seg + 1 < line.segments.size())
                          ? gamma_between(s.impedance_ohms, line.segments[seg + 1].impedance_ohms)
                          : gamma_termination(s.impedance_ohms, line.termination);
    if (order + 1 <= max_order) {
      bounce_recurse(line, seg, false, t, gain * gr, order + 1, max_order, out);
    }
    if (seg + 1 < line.segments.size()) {
      bounce_recurse(line, seg + 1, true, t, gain * (1.0 + gr), order, max_order, out);
    }
  } else {
    if (seg == 0) {
      out.push_back({t, gain});
      const double gs = gamma_between(s.impedance_ohms, line.source_impedance_ohms);
      if (order + 1 <= max_order) {
        bounce_recurse(line, 0, true, t, gain * gs, order + 1, max_order, out);
      }
    } else {
      const double gl = gamma_between(s.impedance_ohms, line.segments[seg - 1].impedance_ohms);
      if (order + 1 <= max_order) {
        bounce_recurse(line, seg, true, t, gain * gl, order + 1, max_order, out);
      }
      bounce_recurse(line, seg - 1, false, t, gain * (1.0 + gl), order, max_order, out);
    }
  }
}

inline std::vector<japc::ReflectionEvent> bounce_enumerate(const japc::SegmentedLine& line,
                                                           int max_order, double min_gain) {
  std::vector<japc::ReflectionEvent> all;
  all.push_back({0.0, 1.0});
  bounce_recurse(line, 0, true, 0.0, 1.0, 0, max_order, all);
  std::vector<japc::ReflectionEvent> kept;
  for (const japc::ReflectionEvent& e : all) {
    if (min_gain == 0.0 || std::fabs(e.gain) >= min_gain) kept.push_back(e);
  }
  std::sort(kept.begin(), kept.end(), [](const japc::ReflectionEvent& a, const japc::ReflectionEvent& b) {
    if (a.arrival_time_s != b.arrival_time_s) return a.arrival_time_s < b.arrival_time_s;
    return a.gain < b.gain;
  });
  return kept;
}

}  // namespace oracle
