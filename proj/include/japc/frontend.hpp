#pragma once

// Comparator front end: a jittered ramp reference on the non-inverting input
// races the signal on the inverting input. Clock jitter multiplied by the ramp
// slope acts as Gaussian dither, so the comparator's 1-bit output encodes the
// signal level as a probability.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "japc/errors.hpp"
#include "japc/rng.hpp"

namespace japc {

// Ramp reference derived from a jittered clock edge. The slope converts timing
// jitter (seconds rms) into voltage dither at the comparator input.
struct JitterClock {
  double sigma_j_s = 8e-12;    // rms edge jitter
  double gain_v_per_s = 1e9;   // ramp slope, volts per second of delay
  double bias_v = 0.0;         // reference level at zero delay offset
  double ramp_low_v = -0.5;    // physical ramp span; samples clip to it
  double ramp_high_v = 0.5;

  double sigma_v() const { return gain_v_per_s * sigma_j_s; }

  void validate() const {
    if (!(sigma_j_s >= 0.0) || !std::isfinite(sigma_j_s)) {
      throw std::invalid_argument("JitterClock: sigma_j must be non-negative and finite");
    }
    if (!(gain_v_per_s > 0.0) || !std::isfinite(gain_v_per_s)) {
      throw std::invalid_argument("JitterClock: gain must be positive and finite");
    }
    if (!(ramp_low_v < ramp_high_v)) {
      throw std::invalid_argument("JitterClock: ramp range must be non-empty");
    }
    if (!(bias_v >= ramp_low_v && bias_v <= ramp_high_v)) {
      throw std::invalid_argument("JitterClock: bias must lie inside the ramp range");
    }
  }
};

struct ComparatorParams {
  double offset_v = 3e-3;      // input-referred offset
  double hysteresis_v = 2e-3;  // full band width; thresholds sit at +-h/2

  void validate() const {
    if (!std::isfinite(offset_v)) {
      throw std::invalid_argument("ComparatorParams: offset must be finite");
    }
    if (!(hysteresis_v >= 0.0) || !std::isfinite(hysteresis_v)) {
      throw std::invalid_argument("ComparatorParams: hysteresis must be non-negative and finite");
    }
  }
};

// Last latched output. The ramp returns to its low rail between samples, so a
// sampled measurement re-arms the comparator (state 0, rising threshold)
// before every decision; the state only persists within a continuous ramp.
struct ComparatorState {
  int last_output = 0;
};

struct ToneSpec {
  int harmonic = 1;        // multiple of the sample clock
  double amplitude_v = 0.0;
  double phase_rad = 0.0;
};

struct LowFreqSpec {
  double rms_v = 0.0;
  double correlation_time_s = 1e-5;
};

// Additive disturbances seen at the signal input: broadband thermal noise, a
// slow drift process, and clock-harmonic pickup below the front-end bandwidth.
struct NoiseEnvironment {
  double thermal_sigma_v = 1e-3;
  LowFreqSpec low_freq;
  std::vector<ToneSpec> system_tones;
  double cutoff_fc_hz = 1e9;  // pickup above this frequency never reaches the input

  void validate() const {
    if (!(thermal_sigma_v >= 0.0) || !std::isfinite(thermal_sigma_v)) {
      throw std::invalid_argument("NoiseEnvironment: thermal sigma must be non-negative and finite");
    }
    if (!(low_freq.rms_v >= 0.0) || !std::isfinite(low_freq.rms_v)) {
      throw std::invalid_argument("NoiseEnvironment: low-frequency rms must be non-negative and finite");
    }
    if (low_freq.rms_v > 0.0 && !(low_freq.correlation_time_s > 0.0)) {
      throw std::invalid_argument("NoiseEnvironment: correlation time must be positive");
    }
    if (!(cutoff_fc_hz > 0.0)) {
      throw std::invalid_argument("NoiseEnvironment: cutoff frequency must be positive");
    }
    for (const ToneSpec& tone : system_tones) {
      if (tone.harmonic < 1) {
        throw std::invalid_argument("NoiseEnvironment: tone harmonic must be >= 1");
      }
      if (!std::isfinite(tone.amplitude_v) || !std::isfinite(tone.phase_rad)) {
        throw std::invalid_argument("NoiseEnvironment: tone amplitude and phase must be finite");
      }
    }
  }

  // Harmonic pickup at time t for sample period T. Time is reduced modulo the
  // period before the phase is formed, so large absolute times do not lose
  // precision; fmod is exact in floating point.
  double tone_voltage(double t_s, double period_s) const {
    double v = 0.0;
    const double r = std::fmod(t_s, period_s);
    for (const ToneSpec& tone : system_tones) {
      if (tone.harmonic / period_s > cutoff_fc_hz) continue;
      constexpr double kTwoPi = 6.283185307179586476925286766559;
      v += tone.amplitude_v * std::sin(kTwoPi * tone.harmonic * r / period_s + tone.phase_rad);
    }
    return v;
  }
};

inline double total_noise_sigma(const JitterClock& clk, double thermal_sigma_v) {
  return std::hypot(clk.sigma_v(), thermal_sigma_v);
}

// One ramp reference sample at the given delay offset. Consumes exactly one
// normal draw. Throws ramp_saturation_error when the 4-sigma dither window
// around the nominal level does not fit inside the ramp span: decisions there
// would be dominated by clipping, not by the signal.
inline double jitter_reference_voltage(const JitterClock& clk, double delay_offset_s,
                                       RngStream& rng) {
  const double mean = clk.bias_v + clk.gain_v_per_s * delay_offset_s;
  const double window = 4.0 * clk.sigma_v();
  if (mean - window < clk.ramp_low_v || mean + window > clk.ramp_high_v) {
    throw ramp_saturation_error("reference level " + std::to_string(mean) +
                                " V leaves no 4-sigma dither headroom inside the ramp span");
  }
  double v = mean + clk.gain_v_per_s * (clk.sigma_j_s * rng.normal());
  if (v < clk.ramp_low_v) v = clk.ramp_low_v;
  if (v > clk.ramp_high_v) v = clk.ramp_high_v;
  return v;
}

// One latched decision. Output is 1 when the reference input exceeds the
// signal input by more than the offset plus the active hysteresis threshold
// (+h/2 when last output was 0, -h/2 when it was 1). Always consumes exactly
// one normal draw for thermal noise, even at zero sigma, so the draw sequence
// does not depend on the noise configuration.
inline int compare(const ComparatorParams& cmp, double v_reference, double v_signal,
                   double thermal_sigma_v, ComparatorState& state, RngStream& rng) {
  const double h_eff = (state.last_output == 0) ? 0.5 * cmp.hysteresis_v
                                                : -0.5 * cmp.hysteresis_v;
  const double noise = thermal_sigma_v * rng.normal();
  const int y = (v_reference + noise - v_signal - cmp.offset_v - h_eff > 0.0) ? 1 : 0;
  state.last_output = y;
  return y;
}

// Ornstein-Uhlenbeck drift sampled at caller-chosen, nondecreasing times.
// Stationary from the first sample; step correlation exp(-dt/tau). Consumes
// one normal draw per strictly advancing sample and none when rms is zero, so
// disabling drift leaves the rest of the draw sequence untouched.
class LowFreqNoise {
 public:
  LowFreqNoise(const LowFreqSpec& spec, RngStream& rng) : spec_(spec), rng_(rng) {
    if (!(spec.rms_v >= 0.0) || !std::isfinite(spec.rms_v)) {
      throw std::invalid_argument("LowFreqNoise: rms must be non-negative and finite");
    }
    if (spec.rms_v > 0.0 && !(spec.correlation_time_s > 0.0)) {
      throw std::invalid_argument("LowFreqNoise: correlation time must be positive");
    }
  }

  double sample_at(double t_s) {
    if (spec_.rms_v == 0.0) return 0.0;
    if (!started_) {
      started_ = true;
      t_prev_ = t_s;
      x_ = spec_.rms_v * rng_.normal();
      return x_;
    }
    if (t_s < t_prev_) {
      throw std::logic_error("LowFreqNoise: sample times must be nondecreasing");
    }
    if (t_s == t_prev_) return x_;
    const double dt = t_s - t_prev_;
    if (dt != cached_dt_) {
      cached_dt_ = dt;
      cached_rho_ = std::exp(-dt / spec_.correlation_time_s);
      cached_diff_ = spec_.rms_v * std::sqrt(1.0 - cached_rho_ * cached_rho_);
    }
    x_ = cached_rho_ * x_ + cached_diff_ * rng_.normal();
    t_prev_ = t_s;
    return x_;
  }

 private:
  LowFreqSpec spec_;
  RngStream& rng_;
  bool started_ = false;
  double t_prev_ = 0.0;
  double x_ = 0.0;
  double cached_dt_ = -1.0;
  double cached_rho_ = 0.0;
  double cached_diff_ = 0.0;
};

// Combined additive disturbance at the signal input. Drift advances on the
// actual wall clock; harmonic pickup is evaluated at the waveform phase so a
// caller can pass a period-reduced time without precision loss.
class EnvironmentNoise {
 public:
  EnvironmentNoise(const NoiseEnvironment& spec, double period_s, RngStream& rng)
      : spec_(spec), period_s_(period_s), drift_(spec.low_freq, rng) {
    spec.validate();
    if (!(period_s > 0.0)) {
      throw std::invalid_argument("EnvironmentNoise: period must be positive");
    }
  }

  double sample(double t_wall_s, double t_phase_s) {
    return drift_.sample_at(t_wall_s) + spec_.tone_voltage(t_phase_s, period_s_);
  }

  const NoiseEnvironment& spec() const { return spec_; }

 private:
  NoiseEnvironment spec_;
  double period_s_;
  LowFreqNoise drift_;
};

}  // namespace japc
