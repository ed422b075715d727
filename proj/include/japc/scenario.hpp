#pragma once

// End-to-end measurement pipeline. A run walks fixed stages: delay-tap
// calibration, a probe-off background pass, the probe pass, optional
// denoising with a reference health gate, waveform reconstruction, interface
// extraction, and CSV export. Each stage uses its own deterministic substream
// of the scenario seed, so stages stay reproducible in isolation.

#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "japc/analysis.hpp"
#include "japc/channel.hpp"
#include "japc/config.hpp"
#include "japc/csv.hpp"
#include "japc/denoise.hpp"
#include "japc/errors.hpp"
#include "japc/estimator.hpp"
#include "japc/sampler.hpp"

namespace japc {

// Substream ids per stage; stream 0 stays free for ad-hoc use.
inline constexpr std::uint64_t kCalibrationStream = 1;
inline constexpr std::uint64_t kBackgroundStream = 2;
inline constexpr std::uint64_t kProbeStream = 3;

struct ScenarioOptions {
  DenoiseMode denoise = DenoiseMode::kSetReference;
  PvmSpec::Mode readout = PvmSpec::kProbability;
  std::string out_dir;  // empty disables export
};

struct ScenarioResult {
  ScenarioConfig config;
  ScenarioOptions options;
  CalibrationResult calibration;
  double delay_offset_s = 0.0;
  std::vector<ReflectionEvent> echoes;

  SampleTensor background;
  SampleTensor probe;  // empty when the probe is disabled
  ProbabilityWaveform background_p;
  ProbabilityWaveform measured_p;  // probe pass, or background when probe off
  ProbabilityWaveform denoised;
  ReferenceCheck reference;
  bool reference_checked = false;

  Waveform waveform;  // full reconstructed record
  InterfaceProfile profile;
  bool profile_valid = false;

  double delta_p_mid = 0.0;         // probability resolution at the midpoint
  double delta_v_mid = 0.0;         // voltage resolution of the equivalent readout
  double spatial_resolution_m = 0.0;

  std::vector<std::string> log;
  std::vector<std::string> outputs;
};

inline const char* denoise_mode_name(DenoiseMode m) {
  switch (m) {
    case DenoiseMode::kNone: return "none";
    case DenoiseMode::kBackground: return "background";
    case DenoiseMode::kSetReference: return "setref";
  }
  return "?";
}

inline DenoiseMode parse_denoise_mode(const std::string& s) {
  if (s == "none") return DenoiseMode::kNone;
  if (s == "background") return DenoiseMode::kBackground;
  if (s == "setref") return DenoiseMode::kSetReference;
  throw config_error("unknown denoise mode '" + s + "' (none, background, setref)");
}

inline const char* readout_mode_name(PvmSpec::Mode m) {
  switch (m) {
    case PvmSpec::kProbability: return "probability";
    case PvmSpec::kGaussian: return "gaussian";
    case PvmSpec::kLinear: return "linear";
  }
  return "?";
}

inline PvmSpec::Mode parse_readout_mode(const std::string& s) {
  if (s == "probability") return PvmSpec::kProbability;
  if (s == "gaussian") return PvmSpec::kGaussian;
  if (s == "linear") return PvmSpec::kLinear;
  throw config_error("unknown readout mode '" + s + "' (probability, gaussian, linear)");
}

namespace detail {

template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  const auto tag = [stage](const char* what) {
    return std::string("stage '") + stage + "': " + what;
  };
  try {
    return f();
  } catch (const calibration_range_error& e) {
    throw calibration_range_error(tag(e.what()));
  } catch (const ramp_saturation_error& e) {
    throw ramp_saturation_error(tag(e.what()));
  } catch (const io_error& e) {
    throw io_error(tag(e.what()));
  } catch (const config_error& e) {
    throw config_error(tag(e.what()));
  } catch (const std::exception& e) {
    throw std::runtime_error(tag(e.what()));
  }
}

inline std::string brief(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace detail

inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const ScenarioOptions& opt = {}) {
  cfg.validate();
  const bool probe_on = cfg.probe_enabled();

  if (opt.readout != PvmSpec::kProbability && opt.denoise != DenoiseMode::kNone) {
    throw config_error(
        "voltage readout works on raw probabilities only; combine readout 'gaussian' or "
        "'linear' with denoise 'none'");
  }
  if (!probe_on && opt.denoise == DenoiseMode::kBackground) {
    throw config_error("denoise 'background' needs an enabled probe");
  }
  if (opt.denoise == DenoiseMode::kSetReference && cfg.measurement.samples_per_cycle < 2) {
    throw config_error("denoise 'setref' needs at least two samples per cycle");
  }

  ScenarioResult r;
  r.config = cfg;
  r.options = opt;

  detail::run_stage("calibrate", [&] {
    RngStream rng(cfg.seed, kCalibrationStream);
    r.calibration = calibrate(cfg.measurement, rng);
    r.delay_offset_s = static_cast<double>(r.calibration.taps) * cfg.measurement.delay_tap_s;
    r.log.push_back("calibrate: taps=" + std::to_string(r.calibration.taps) +
                    " residual_bias_v=" + detail::brief(r.calibration.achieved_bias_v) +
                    " p_hat=" + detail::brief(r.calibration.p_hat));
  });

  detail::run_stage("background", [&] {
    RngStream rng(cfg.seed, kBackgroundStream);
    r.background = run_measurement(cfg.measurement, nullptr, {}, r.delay_offset_s, rng);
    r.background_p = average_probabilities(r.background);
    r.log.push_back("background: " + std::to_string(r.background.ones.size()) + " cells");
  });

  if (probe_on) {
    detail::run_stage("probe", [&] {
      RngStream rng(cfg.seed, kProbeStream);
      r.echoes = bounce_diagram(cfg.line, cfg.echo_max_order, cfg.echo_min_gain);
      r.probe = run_measurement(cfg.measurement, &cfg.pulse, r.echoes, r.delay_offset_s, rng);
      r.measured_p = average_probabilities(r.probe);
      r.log.push_back("probe: " + std::to_string(r.echoes.size()) + " arrivals expanded");
    });
  } else {
    r.measured_p = r.background_p;
    r.log.push_back("probe: disabled (zero-amplitude pulse)");
  }

  detail::run_stage("denoise", [&] {
    switch (opt.denoise) {
      case DenoiseMode::kNone:
        r.denoised = r.measured_p;
        break;
      case DenoiseMode::kBackground:
        r.denoised = subtract_background(r.measured_p, r.background_p);
        break;
      case DenoiseMode::kSetReference: {
        r.reference = validate_reference_set(r.measured_p, 0, cfg.reference_floor);
        r.reference_checked = true;
        if (!r.reference.ok) {
          std::ostringstream ss;
          ss << "reference column deviates beyond the noise floor (worst set "
             << r.reference.worst_set << ", deviation " << r.reference.worst_deviation
             << ", floor " << r.reference.noise_floor << ")";
          throw std::runtime_error(ss.str());
        }
        r.denoised = subtract_set_reference(r.measured_p, 0);
        break;
      }
    }
    r.log.push_back(std::string("denoise: mode=") + denoise_mode_name(opt.denoise));
  });

  PvmSpec spec;
  spec.mode = opt.readout;
  spec.sigma_total_v =
      total_noise_sigma(cfg.measurement.clock, cfg.measurement.environment.thermal_sigma_v);
  spec.bias_v = r.calibration.achieved_bias_v;
  spec.polarity = 1;

  detail::run_stage("reconstruct", [&] {
    r.waveform = reconstruct_waveform(r.denoised, cfg.measurement, spec, -1);
    r.log.push_back("reconstruct: " + std::to_string(r.waveform.points.size()) + " points, units=" +
                    (r.waveform.volts ? "volts" : "probability"));
  });

  if (probe_on) {
    detail::run_stage("extract", [&] {
      // The zeroed reference column would read as signal-free samples; drop it
      // from the extraction copy when set-reference denoising is active.
      Waveform scratch;
      const Waveform* wf = &r.waveform;
      if (opt.denoise == DenoiseMode::kSetReference) {
        scratch = reconstruct_waveform(r.denoised, cfg.measurement, spec, 0);
        wf = &scratch;
      }
      ExtractionParams params;
      params.threshold = cfg.extraction_threshold;
      params.pulse_width_s = cfg.pulse.width_s;
      params.launch_time_s = cfg.pulse.launch_time_s;
      params.velocity = cfg.velocity;
      params.pvm_polarity = spec.polarity;
      r.profile = extract_iip(*wf, params);
      r.profile_valid = true;
      r.log.push_back("extract: " + std::to_string(r.profile.peaks.size()) + " interfaces");
    });
  }

  r.delta_p_mid = delta_p(0.5, cfg.measurement.trials);
  PvmSpec gauss = spec;
  gauss.mode = PvmSpec::kGaussian;
  r.delta_v_mid = delta_v(gauss, 0.5, cfg.measurement.trials);
  r.spatial_resolution_m =
      spatial_resolution(cfg.velocity.knots.front().second, cfg.pulse.width_s);

  if (!opt.out_dir.empty()) {
    detail::run_stage("export", [&] {
      namespace fs = std::filesystem;
      std::error_code ec;
      fs::create_directories(opt.out_dir, ec);
      if (ec) throw io_error("cannot create output directory '" + opt.out_dir + "'");
      const MetaList meta = {{"scenario", cfg.name},
                             {"seed", std::to_string(cfg.seed)},
                             {"denoise", denoise_mode_name(opt.denoise)},
                             {"readout", readout_mode_name(opt.readout)}};
      const auto target = [&](const std::string& suffix) {
        return (fs::path(opt.out_dir) / (cfg.name + "_" + suffix)).string();
      };
      try {
        const auto add = [&](const std::string& path) { r.outputs.push_back(path); };
        write_counts_csv(target("background_counts.csv"), r.background, cfg.measurement, meta);
        add(target("background_counts.csv"));
        if (probe_on) {
          write_counts_csv(target("probe_counts.csv"), r.probe, cfg.measurement, meta);
          add(target("probe_counts.csv"));
        }
        write_probability_csv(target("probabilities.csv"), r.measured_p, cfg.measurement, meta);
        add(target("probabilities.csv"));
        write_waveform_csv(target("waveform.csv"), r.waveform, meta);
        add(target("waveform.csv"));
        if (r.profile_valid) {
          write_profile_csv(target("profile.csv"), r.profile, meta);
          add(target("profile.csv"));
        }
      } catch (...) {
        for (const std::string& path : r.outputs) {
          std::error_code rc;
          fs::remove(path, rc);
        }
        r.outputs.clear();
        throw;
      }
      r.log.push_back("export: " + std::to_string(r.outputs.size()) + " files in " + opt.out_dir);
    });
  }

  return r;
}

}  // namespace japc
