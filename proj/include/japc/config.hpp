#pragma once

// Scenario description: everything a run needs, loadable from INI-style text.
// Parsing is strict: unknown sections or keys, duplicate scalar keys, and
// malformed values are hard errors. List-valued keys (tone, segment, knot)
// accumulate; the first occurrence in a document or override set replaces
// whatever an earlier layer left behind.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "japc/analysis.hpp"
#include "japc/channel.hpp"
#include "japc/errors.hpp"
#include "japc/sampler.hpp"

namespace japc {

struct ScenarioConfig {
  std::string name = "custom";
  std::uint64_t seed = 1;
  MeasurementConfig measurement;
  SegmentedLine line;
  ProbePulse pulse;
  int echo_max_order = 8;
  double echo_min_gain = 1e-4;
  double extraction_threshold = 0.1;
  // Acceptance floor for the reference-set health check; negative selects the
  // statistical default derived from the trial count.
  double reference_floor = -1.0;
  VelocityMap velocity;

  // A zero-amplitude pulse turns the probe stage off; the run then only
  // characterizes the noise environment.
  bool probe_enabled() const { return pulse.amplitude_v != 0.0; }

  void validate() const {
    measurement.validate();
    try {
      if (probe_enabled()) {
        pulse.validate();
        line.validate();
      }
      velocity.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
    if (probe_enabled()) {
      const double window_s = measurement.sample_period_s * measurement.samples_per_cycle;
      if (pulse.launch_time_s + pulse.width_s > window_s) {
        throw config_error("scenario: pulse must fit inside the cycle window");
      }
    }
    if (!(extraction_threshold > 0.0)) {
      throw config_error("scenario: extraction threshold must be positive");
    }
    if (echo_max_order < 1) throw config_error("scenario: echo max_order must be at least 1");
    if (!(echo_min_gain >= 0.0) || echo_min_gain >= 1.0) {
      throw config_error("scenario: echo min_gain must be in [0, 1)");
    }
    if (name.empty()) throw config_error("scenario: name must not be empty");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  int line_no = 0;
};

inline std::vector<IniEntry> parse_ini(const std::string& text, const std::string& origin) {
  std::vector<IniEntry> entries;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw config_error(where + ": malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw config_error(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error(where + ": expected 'key = value', found '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw config_error(where + ": empty key");
    if (section.empty()) {
      throw config_error(where + ": key '" + key + "' appears before any [section]");
    }
    entries.push_back({section, key, trim(line.substr(eq + 1)), line_no});
  }
  return entries;
}

inline double to_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw config_error(where + ": malformed number '" + s + "'");
  }
  return v;
}

inline std::int64_t to_int(const std::string& s, const std::string& where) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw config_error(where + ": malformed integer '" + s + "'");
  }
  return v;
}

inline std::uint64_t to_uint(const std::string& s, const std::string& where) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw config_error(where + ": malformed unsigned integer '" + s + "'");
  }
  return v;
}

inline std::vector<double> to_list(const std::string& s, const std::string& where) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    const std::string item =
        trim(comma == std::string::npos ? s.substr(start) : s.substr(start, comma - start));
    out.push_back(to_double(item, where));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Applies one parsed entry. `seen` detects duplicate scalar keys within one
// layer; `cleared` tracks list keys whose first occurrence in this layer has
// already replaced the inherited list.
inline void apply_entry(ScenarioConfig& cfg, const IniEntry& e, const std::string& origin,
                        std::set<std::string>& seen, std::set<std::string>& cleared) {
  const std::string where = origin + ":" + std::to_string(e.line_no);
  const std::string full = e.section + "." + e.key;
  const bool is_list = (full == "noise.tone" || full == "line.segment" || full == "extraction.knot");
  if (!is_list && !seen.insert(full).second) {
    throw config_error(where + ": duplicate key '" + full + "'");
  }

  MeasurementConfig& m = cfg.measurement;
  if (e.section == "scenario") {
    if (e.key == "name") {
      cfg.name = e.value;
    } else if (e.key == "seed") {
      cfg.seed = to_uint(e.value, where);
    } else {
      throw config_error(where + ": unknown key '" + full + "'");
    }
  } else if (e.section == "measurement") {
    if (e.key == "sample_period_s") {
      m.sample_period_s = to_double(e.value, where);
    } else if (e.key == "samples_per_cycle") {
      m.samples_per_cycle = static_cast<int>(to_int(e.value, where));
    } else if (e.key == "delay_sets") {
      m.delay_sets = static_cast<int>(to_int(e.value, where));
    } else if (e.key == "trials") {
      m.trials = static_cast<int>(to_int(e.value, where));
    } else if (e.key == "overhead_cycles") {
      m.overhead_cycles = static_cast<int>(to_int(e.value, where));
    } else if (e.key == "cal_trials") {
      m.cal_trials = to_int(e.value, where);
    } else if (e.key == "delay_tap_s") {
      m.delay_tap_s = to_double(e.value, where);
    } else if (e.key == "min_fine_step_s") {
      m.min_fine_step_s = to_double(e.value, where);
    } else {
      throw config_error(where + ": unknown key '" + full + "'");
    }
  } else if (e.section == "clock") {
    if (e.key == "jitter_rms_s") {
      m.clock.sigma_j_s = to_double(e.value, where);
    } else if (e.key == "ramp_slope_v_per_s") {
      m.clock.gain_v_per_s = to_double(e.value, where);
    } else if (e.key == "bias_v") {
      m.clock.bias_v = to_double(e.value, where);
    } else if (e.key == "ramp_low_v") {
      m.clock.ramp_low_v = to_double(e.value, where);
    } else if (e.key == "ramp_high_v") {
      m.clock.ramp_high_v = to_double(e.value, where);
    } else {
      throw config_error(where + ": unknown key '" + full + "'");
    }
  } else if (e.section == "comparator") {
    if (e.key == "offset_v") {
      m.comparator.offset_v = to_double(e.value, where);
    } else if (e.key == "hysteresis_v") {
      m.comparator.hysteresis_v = to_double(e.value, where);
    } else {
      throw config_error(where + ": unknown key '" + full + "'");
    }
  } else if (e.section == "noise") {
    if (e.key == "thermal_sigma_v") {
      m.environment.thermal_sigma_v = to_double(e.value, where);
    } else if (e.key == "low_freq_rms_v") {
      m.environment.low_freq.rms_v = to_double(e.value, where);
    } else if (e.key == "low_freq_tau_s") {
      m.environment.low_freq.correlation_time_s = to_double(e.value, where);
    } else if (e.key == "pickup_cutoff_hz") {
      m.environment.cutoff_fc_hz = to_double(e.value, where);
    } else if (e.key == "tone") {
      if (cleared.insert(full).second) m.environment.system_tones.clear();
      const auto v = to_list(e.value, where);
      if (v.size() != 3) {
        throw config_error(where + ": tone needs 'harmonic, amplitude_v, phase_rad'");
      }
      ToneSpec tone;
      tone.harmonic = static_cast<int>(v[0]);
      if (tone.harmonic != v[0] || tone.harmonic < 1) {
        throw config_error(where + ": tone harmonic must be a positive integer");
      }
      tone.amplitude_v = v[1];
      tone.phase_rad = v[2];
      m.environment.system_tones.push_back(tone);
    } else {
      throw config_error(where + ": unknown key '" + full + "'");
    }
  } else if (e.section == "pulse") {
    if (e.key == "shape") {
      if (e.value == "trapezoid") {
        cfg.pulse.shape = ProbePulse::kTrapezoidal;
      } else if (e.value == "rect") {
        cfg.pulse.shape = ProbePulse::kRectangular;
      } else {
        throw config_error(where + ": pulse shape must be 'trapezoid' or 'rect'");
      }
    } else if (e.key == "amplitude_v") {
      cfg.pulse.amplitude_v = to_double(e.value, where);
    } else if (e.key == "width_s") {
      cfg.pulse.width_s = to_double(e.value, where);
    } else if (e.key == "rise_time_s") {
      cfg.pulse.rise_time_s = to_double(e.value, where);
    } else if (e.key == "launch_time_s") {
      cfg.pulse.launch_time_s = to_double(e.value, where);
    } else {
      throw config_error(where + ": unknown key '" + full + "'");
    }
  } else if (e.section == "line") {
    if (e.key == "source_impedance_ohms") {
      cfg.line.source_impedance_ohms = to_double(e.value, where);
    } else if (e.key == "termination") {
      if (e.value == "open") {
        cfg.line.termination = Termination::open();
      } else if (e.value == "short") {
        cfg.line.termination = Termination::short_circuit();
      } else if (e.value == "matched") {
        cfg.line.termination = Termination::matched();
      } else {
        cfg.line.termination = Termination::resistive(to_double(e.value, where));
      }
    } else if (e.key == "segment") {
      if (cleared.insert(full).second) cfg.line.segments.clear();
      const auto v = to_list(e.value, where);
      if (v.size() != 3 && v.size() != 4) {
        throw config_error(where +
                           ": segment needs 'impedance_ohms, length_m, velocity_mps[, attenuation]'");
      }
      LineSegment seg;
      seg.impedance_ohms = v[0];
      seg.length_m = v[1];
      seg.velocity_mps = v[2];
      seg.attenuation = v.size() == 4 ? v[3] : 1.0;
      cfg.line.segments.push_back(seg);
    } else {
      throw config_error(where + ": unknown key '" + full + "'");
    }
  } else if (e.section == "echoes") {
    if (e.key == "max_order") {
      cfg.echo_max_order = static_cast<int>(to_int(e.value, where));
    } else if (e.key == "min_gain") {
      cfg.echo_min_gain = to_double(e.value, where);
    } else {
      throw config_error(where + ": unknown key '" + full + "'");
    }
  } else if (e.section == "extraction") {
    if (e.key == "threshold") {
      cfg.extraction_threshold = to_double(e.value, where);
    } else if (e.key == "reference_floor") {
      cfg.reference_floor = to_double(e.value, where);
    } else if (e.key == "knot") {
      if (cleared.insert(full).second) cfg.velocity.knots.clear();
      const auto v = to_list(e.value, where);
      if (v.size() != 2) {
        throw config_error(where + ": knot needs 'start_m, velocity_mps'");
      }
      cfg.velocity.knots.emplace_back(v[0], v[1]);
    } else {
      throw config_error(where + ": unknown key '" + full + "'");
    }
  } else {
    throw config_error(where + ": unknown section '" + e.section + "'");
  }
}

inline void apply_layer(ScenarioConfig& cfg, const std::vector<IniEntry>& entries,
                        const std::string& origin) {
  std::set<std::string> seen;
  std::set<std::string> cleared;
  for (const IniEntry& e : entries) apply_entry(cfg, e, origin, seen, cleared);
}

}  // namespace detail

/// Parses a scenario document on top of library defaults. Does not validate;
/// callers validate after every layer (including overrides) is applied.
inline ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin) {
  ScenarioConfig cfg;
  detail::apply_layer(cfg, detail::parse_ini(text, origin), origin);
  return cfg;
}

/// Applies "section.key=value" override strings as a layer on top of cfg.
inline void apply_overrides(ScenarioConfig& cfg, const std::vector<std::string>& overrides) {
  std::vector<detail::IniEntry> entries;
  int idx = 0;
  for (const std::string& spec : overrides) {
    ++idx;
    const std::string where = "override #" + std::to_string(idx);
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw config_error(where + ": expected 'section.key=value', found '" + spec + "'");
    }
    const std::string lhs = detail::trim(spec.substr(0, eq));
    const auto dot = lhs.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= lhs.size()) {
      throw config_error(where + ": expected 'section.key=value', found '" + spec + "'");
    }
    entries.push_back({lhs.substr(0, dot), lhs.substr(dot + 1),
                       detail::trim(spec.substr(eq + 1)), idx});
  }
  detail::apply_layer(cfg, entries, "--override");
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"open-connector", "open-cable",
                                                 "matched-termination", "curved-cable"};
  return names;
}

/// Full INI text of a built-in scenario. The four presets share the same
/// instrument and disturbance model and differ only in the attached line.
inline std::string preset_text(const std::string& name) {
  const std::string common = R"(
[measurement]
sample_period_s = 1e-8
samples_per_cycle = 10
delay_sets = 560
trials = 1000
overhead_cycles = 12
cal_trials = 1000

[clock]
jitter_rms_s = 8e-12
ramp_slope_v_per_s = 1e9
bias_v = 0
ramp_low_v = -0.5
ramp_high_v = 0.5

[comparator]
offset_v = 3e-3
hysteresis_v = 2e-3

[noise]
thermal_sigma_v = 1e-3
low_freq_rms_v = 2e-3
low_freq_tau_s = 1e-5
pickup_cutoff_hz = 1e9
tone = 1, 2e-3, 0
tone = 2, 5e-4, 0

[pulse]
shape = trapezoid
amplitude_v = 0.6
width_s = 1e-9
rise_time_s = 2e-10
launch_time_s = 1e-8

[echoes]
max_order = 8
min_gain = 1e-4

[extraction]
threshold = 0.12
reference_floor = 0.35
knot = 0, 1.5e8
knot = 0.2175, 1.85e8
)";
  if (name == "open-connector") {
    return "[scenario]\nname = open-connector\n" + common + R"(
[line]
source_impedance_ohms = 250
segment = 50, 0.2175, 1.5e8
termination = open
)";
  }
  if (name == "open-cable") {
    return "[scenario]\nname = open-cable\n" + common + R"(
[line]
source_impedance_ohms = 250
segment = 50, 0.2175, 1.5e8
segment = 45, 1.80, 1.85e8
termination = open
)";
  }
  if (name == "matched-termination") {
    return "[scenario]\nname = matched-termination\n" + common + R"(
[line]
source_impedance_ohms = 250
segment = 50, 0.2175, 1.5e8
segment = 45, 1.80, 1.85e8
termination = matched
)";
  }
  if (name == "curved-cable") {
    return "[scenario]\nname = curved-cable\n" + common + R"(
[line]
source_impedance_ohms = 250
segment = 50, 0.2175, 1.5e8
segment = 45, 0.60, 1.85e8
segment = 44, 0.05, 1.85e8
segment = 45, 0.50, 1.85e8
segment = 44, 0.05, 1.85e8
segment = 45, 0.60, 1.85e8
termination = matched
)";
  }
  throw config_error("unknown preset '" + name + "'");
}

/// Loads a scenario by preset name or from an INI file on disk. The result is
/// not yet validated so CLI overrides can still be layered on.
inline ScenarioConfig load_scenario(const std::string& name_or_path) {
  for (const std::string& preset : preset_names()) {
    if (name_or_path == preset) {
      return parse_scenario_text(preset_text(preset), "<preset:" + preset + ">");
    }
  }
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in) {
    throw config_error("'" + name_or_path +
                       "' is neither a preset name nor a readable scenario file");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), name_or_path);
}

}  // namespace japc
