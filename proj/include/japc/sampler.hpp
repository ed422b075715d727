#pragma once

// Equivalent-time acquisition engine. A probing cycle spans P sample clocks.
// Each delay set replays the cycle M times with the sample clock shifted by a
// fine phase step tau = T/J, so J sets sweep one full clock period and the bit
// grid covers P*J distinct waveform positions at tau resolution. Between sets
// the delay loop needs a fixed number of idle clocks to settle; those shift
// wall-clock time (and everything driven by it, like drift) but are never
// recorded, so recorded timestamps follow the nominal schedule.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "japc/channel.hpp"
#include "japc/errors.hpp"
#include "japc/frontend.hpp"
#include "japc/rng.hpp"

namespace japc {

struct MeasurementConfig {
  double sample_period_s = 10e-9;
  int samples_per_cycle = 10;  // P
  int delay_sets = 560;        // J
  int trials = 1000;           // M repetitions of the cycle per set
  int overhead_cycles = 12;    // idle clocks before each set while the delay settles

  double min_fine_step_s = 11.12e-12;   // smallest phase shift the delay loop holds
  std::int64_t cal_trials = 1000;       // decisions per candidate tap during calibration
  double delay_tap_s = 2.1484375e-12;   // calibration delay line tap pitch

  JitterClock clock;
  ComparatorParams comparator;
  NoiseEnvironment environment;

  double fine_step_s() const { return sample_period_s / delay_sets; }

  void validate() const {
    if (!(sample_period_s > 0.0) || !std::isfinite(sample_period_s)) {
      throw config_error("sample_period must be positive and finite");
    }
    if (samples_per_cycle < 1) throw config_error("samples_per_cycle must be >= 1");
    if (delay_sets < 1) throw config_error("delay_sets must be >= 1");
    if (trials < 1) throw config_error("trials must be >= 1");
    if (overhead_cycles < 0) throw config_error("overhead_cycles must be >= 0");
    if (!(min_fine_step_s >= 0.0)) throw config_error("min_fine_step must be >= 0");
    if (fine_step_s() < min_fine_step_s) {
      throw config_error("fine step " + std::to_string(fine_step_s()) +
                         " s is below the delay loop minimum of " +
                         std::to_string(min_fine_step_s) + " s; reduce delay_sets");
    }
    if (cal_trials < 1) throw config_error("cal_trials must be >= 1");
    if (!(delay_tap_s > 0.0)) throw config_error("delay_tap must be positive");
    try {
      clock.validate();
      comparator.validate();
      environment.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
  }
};

// Recorded timestamp of bit (set j, repetition m, sample p). The instrument
// stamps bits with the nominal schedule; settling overhead is invisible here.
inline double wall_clock_nominal(const MeasurementConfig& cfg, int j, int m, int p) {
  const double idx =
      static_cast<double>((static_cast<std::int64_t>(cfg.samples_per_cycle) * cfg.trials) * j +
                          static_cast<std::int64_t>(cfg.samples_per_cycle) * m + p);
  return idx * cfg.sample_period_s;
}

// Physical time of the same bit: settling overhead precedes every set, and the
// set's fine phase shift moves every edge within it.
inline double wall_clock_actual(const MeasurementConfig& cfg, int j, int m, int p) {
  return wall_clock_nominal(cfg, j, m, p) +
         static_cast<double>(j + 1) * cfg.overhead_cycles * cfg.sample_period_s +
         static_cast<double>(j) * cfg.fine_step_s();
}

// Position of bit (j, p) on the equivalent-time axis of one probing cycle.
inline double waveform_time(const MeasurementConfig& cfg, int j, int p) {
  return p * cfg.sample_period_s + j * cfg.fine_step_s();
}

// Full acquisition in schedule order; fn(j, m, p, t_actual_s) per bit.
template <typename F>
inline void for_each_sample(const MeasurementConfig& cfg, F&& fn) {
  for (int j = 0; j < cfg.delay_sets; ++j) {
    for (int m = 0; m < cfg.trials; ++m) {
      for (int p = 0; p < cfg.samples_per_cycle; ++p) {
        fn(j, m, p, wall_clock_actual(cfg, j, m, p));
      }
    }
  }
}

// True when an equivalent-time position falls inside the transmit window, in
// which case the receiver is blanked. The tolerance absorbs representation
// error when the launch edge lands exactly on the sampling grid.
inline bool in_probe_window(const ProbePulse& pulse, double t_wave_s, double fine_step_s) {
  const double tol = 1e-3 * fine_step_s;
  return t_wave_s > pulse.launch_time_s - tol &&
         t_wave_s < pulse.launch_time_s + pulse.width_s - tol;
}

// Counts of 1 decisions per (set, sample) cell, accumulated over trials.
struct SampleTensor {
  int delay_sets = 0;
  int samples_per_cycle = 0;
  int trials = 0;
  std::vector<std::int32_t> ones;  // delay_sets x samples_per_cycle, row-major

  std::int32_t& at(int j, int p) { return ones[static_cast<std::size_t>(j) * samples_per_cycle + p]; }
  std::int32_t at(int j, int p) const { return ones[static_cast<std::size_t>(j) * samples_per_cycle + p]; }
  bool same_shape(const SampleTensor& o) const {
    return delay_sets == o.delay_sets && samples_per_cycle == o.samples_per_cycle &&
           trials == o.trials;
  }
};

// Per-cell probability estimates. Cells where every trial agreed carry no
// gradient information and are flagged saturated.
struct ProbabilityWaveform {
  int delay_sets = 0;
  int samples_per_cycle = 0;
  int trials = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> saturated;

  double& at(int j, int p) { return values[static_cast<std::size_t>(j) * samples_per_cycle + p]; }
  double at(int j, int p) const { return values[static_cast<std::size_t>(j) * samples_per_cycle + p]; }
  bool saturated_at(int j, int p) const {
    return saturated[static_cast<std::size_t>(j) * samples_per_cycle + p] != 0;
  }
  bool same_shape(const ProbabilityWaveform& o) const {
    return delay_sets == o.delay_sets && samples_per_cycle == o.samples_per_cycle &&
           trials == o.trials;
  }
};

inline ProbabilityWaveform average_probabilities(const SampleTensor& t) {
  ProbabilityWaveform w;
  w.delay_sets = t.delay_sets;
  w.samples_per_cycle = t.samples_per_cycle;
  w.trials = t.trials;
  w.values.resize(t.ones.size());
  w.saturated.resize(t.ones.size());
  for (std::size_t i = 0; i < t.ones.size(); ++i) {
    w.values[i] = static_cast<double>(t.ones[i]) / t.trials;
    w.saturated[i] = (t.ones[i] == 0 || t.ones[i] == t.trials) ? 1 : 0;
  }
  return w;
}

// One full acquisition. Pass a pulse plus its reflection events to drive the
// line, or a null pulse for a quiet listen-only run. The delay offset is the
// calibrated threshold shift, in seconds of ramp delay.
//
// Draw discipline, per decision, in order: one drift draw (only when drift is
// enabled), one ramp jitter draw, one thermal draw. The sequence depends only
// on the schedule shape and the drift on/off state, never on data, so runs
// with identical configuration and seed are reproducible bit for bit.
inline SampleTensor run_measurement(const MeasurementConfig& cfg, const ProbePulse* pulse,
                                    const std::vector<ReflectionEvent>& echoes,
                                    double delay_offset_s, RngStream& rng) {
  cfg.validate();
  if (pulse) pulse->validate();

  const int J = cfg.delay_sets, P = cfg.samples_per_cycle, M = cfg.trials;
  const double tau = cfg.fine_step_s();

  SampleTensor out;
  out.delay_sets = J;
  out.samples_per_cycle = P;
  out.trials = M;
  out.ones.assign(static_cast<std::size_t>(J) * P, 0);

  // Line response and clock-harmonic pickup depend only on (j, p); the pickup
  // is evaluated at the set's fine phase j*tau, which equals the waveform time
  // modulo the clock period, keeping it exactly constant across a set.
  std::vector<double> signal(static_cast<std::size_t>(J) * P, 0.0);
  std::vector<std::uint8_t> blanked(static_cast<std::size_t>(J) * P, 0);
  std::vector<double> pickup(static_cast<std::size_t>(J), 0.0);
  for (int j = 0; j < J; ++j) {
    pickup[j] = cfg.environment.tone_voltage(j * tau, cfg.sample_period_s);
    if (pulse) {
      for (int p = 0; p < P; ++p) {
        const double tw = waveform_time(cfg, j, p);
        signal[static_cast<std::size_t>(j) * P + p] = synthesize_waveform(echoes, *pulse, tw);
        blanked[static_cast<std::size_t>(j) * P + p] = in_probe_window(*pulse, tw, tau) ? 1 : 0;
      }
    }
  }

  LowFreqNoise drift(cfg.environment.low_freq, rng);
  ComparatorState state;
  for (int j = 0; j < J; ++j) {
    for (int m = 0; m < M; ++m) {
      for (int p = 0; p < P; ++p) {
        const std::size_t cell = static_cast<std::size_t>(j) * P + p;
        const double env = drift.sample_at(wall_clock_actual(cfg, j, m, p)) + pickup[j];
        const double v_ref = jitter_reference_voltage(cfg.clock, delay_offset_s, rng);
        state.last_output = 0;  // ramp re-arms between samples
        int y = compare(cfg.comparator, v_ref, signal[cell] + env,
                        cfg.environment.thermal_sigma_v, state, rng);
        // The receiver is blanked while the transmitter drives the line; the
        // decision still happens (and consumes draws), but records a 0.
        if (blanked[cell]) y = 0;
        out.ones[cell] += y;
      }
    }
  }
  return out;
}

struct CalibrationResult {
  std::int64_t taps = 0;          // selected delay line tap, signed
  double achieved_bias_v = 0.0;   // reference level the tap realizes
  double p_hat = 0.0;             // estimate at the selected tap
  double residual = 0.0;          // p_hat - 0.5
};

// Threshold calibration against a quiet line. Sweeps the delay line in coarse
// steps of about one dither sigma away from tap 0 toward the half-probability
// crossing, then refines over every tap inside the bracketing pair. Decisions
// run back to back on the sample clock with the environment live, so drift and
// static pickup are calibrated out along with comparator offset.
inline CalibrationResult calibrate(const MeasurementConfig& cfg, RngStream& rng) {
  cfg.validate();
  const double sigma_v = cfg.clock.sigma_v();
  const double tap_v = cfg.clock.gain_v_per_s * cfg.delay_tap_s;
  const double head_hi = cfg.clock.ramp_high_v - cfg.clock.bias_v - 4.0 * sigma_v;
  const double head_lo = cfg.clock.bias_v - cfg.clock.ramp_low_v - 4.0 * sigma_v;
  if (head_hi < 0.0 || head_lo < 0.0) {
    throw calibration_range_error("dither window does not fit the ramp span at the nominal bias");
  }
  // Usable taps keep the full 4-sigma dither window inside the ramp.
  const std::int64_t k_max = static_cast<std::int64_t>(std::floor(head_hi / tap_v));
  const std::int64_t k_min = -static_cast<std::int64_t>(std::floor(head_lo / tap_v));

  const double pickup0 = cfg.environment.tone_voltage(0.0, cfg.sample_period_s);
  LowFreqNoise drift(cfg.environment.low_freq, rng);
  std::int64_t tick = 0;  // decisions run at consecutive sample clocks
  auto estimate = [&](std::int64_t k) {
    const double d = static_cast<double>(k) * cfg.delay_tap_s;
    std::int64_t ones = 0;
    ComparatorState st;
    for (std::int64_t n = 0; n < cfg.cal_trials; ++n, ++tick) {
      const double env = drift.sample_at(static_cast<double>(tick) * cfg.sample_period_s) + pickup0;
      const double v_ref = jitter_reference_voltage(cfg.clock, d, rng);
      st.last_output = 0;
      ones += compare(cfg.comparator, v_ref, env, cfg.environment.thermal_sigma_v, st, rng);
    }
    return static_cast<double>(ones) / static_cast<double>(cfg.cal_trials);
  };

  const std::int64_t step = std::max<std::int64_t>(
      1, std::llround(total_noise_sigma(cfg.clock, cfg.environment.thermal_sigma_v) / tap_v));

  std::int64_t lo_k = 0, hi_k = 0;
  const double p0 = estimate(0);
  bool found = false;
  if (p0 >= 0.5) {
    // Reference reads high at tap 0: the crossing sits at or below it.
    std::int64_t prev = 0;
    for (std::int64_t k = -step; !found; k = (k - step < k_min && k > k_min) ? k_min : k - step) {
      if (k < k_min) break;
      if (estimate(k) < 0.5) {
        lo_k = k;
        hi_k = prev;
        found = true;
      }
      prev = k;
    }
  } else {
    std::int64_t prev = 0;
    for (std::int64_t k = step; !found; k = (k + step > k_max && k < k_max) ? k_max : k + step) {
      if (k > k_max) break;
      if (estimate(k) >= 0.5) {
        lo_k = prev;
        hi_k = k;
        found = true;
      }
      prev = k;
    }
  }
  if (!found) {
    throw calibration_range_error(
        "no half-probability crossing inside the usable delay range (taps " +
        std::to_string(k_min) + " to " + std::to_string(k_max) + ")");
  }

  CalibrationResult best;
  double best_dist = 2.0;
  for (std::int64_t k = lo_k; k <= hi_k; ++k) {
    const double pk = estimate(k);
    if (std::fabs(pk - 0.5) < best_dist) {
      best_dist = std::fabs(pk - 0.5);
      best.taps = k;
      best.p_hat = pk;
    }
  }
  best.achieved_bias_v =
      cfg.clock.bias_v + cfg.clock.gain_v_per_s * static_cast<double>(best.taps) * cfg.delay_tap_s;
  best.residual = best.p_hat - 0.5;
  return best;
}

}  // namespace japc
