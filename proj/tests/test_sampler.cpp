#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "japc/estimator.hpp"
#include "japc/normal.hpp"
#include "japc/sampler.hpp"

using namespace japc;

namespace {

MeasurementConfig tiny_cfg(int sets, int per_cycle, int trials) {
  MeasurementConfig cfg;
  cfg.delay_sets = sets;
  cfg.samples_per_cycle = per_cycle;
  cfg.trials = trials;
  return cfg;
}

const double kSigma = 8.0622577482985497e-3;

}  // namespace

TEST_CASE("fine step derivation and config validation", "[sampler]") {
  MeasurementConfig cfg;
  CHECK(cfg.fine_step_s() == Catch::Approx(1.7857142857142857e-11).margin(1e-24));
  CHECK(cfg.delay_sets * cfg.fine_step_s() == Catch::Approx(10e-9).margin(1e-23));
  CHECK_NOTHROW(cfg.validate());

  cfg.delay_sets = 1000;  // 10 ps step, below the 11.12 ps loop floor
  CHECK_THROWS_AS(cfg.validate(), config_error);

  cfg = MeasurementConfig{};
  cfg.clock.sigma_j_s = -1e-12;
  CHECK_THROWS_AS(cfg.validate(), config_error);

  cfg = MeasurementConfig{};
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("recorded and physical schedule times", "[sampler]") {
  MeasurementConfig cfg;  // 10 ns clock, P=10, M=1000, J=560, 12 idle clocks
  CHECK(wall_clock_nominal(cfg, 0, 2, 1) == Catch::Approx(210e-9).margin(1e-22));
  CHECK(wall_clock_nominal(cfg, 1, 0, 0) == Catch::Approx(1e-4).margin(1e-18));
  CHECK(wall_clock_actual(cfg, 0, 2, 1) == Catch::Approx(330e-9).margin(1e-21));
  CHECK(wall_clock_actual(cfg, 1, 0, 0) ==
        Catch::Approx(1e-4 + 240e-9 + cfg.fine_step_s()).margin(1e-18));
  CHECK(waveform_time(cfg, 3, 2) ==
        Catch::Approx(2e-8 + 3 * cfg.fine_step_s()).margin(1e-22));
  // Physical time strictly advances across a set boundary.
  CHECK(wall_clock_actual(cfg, 0, cfg.trials - 1, cfg.samples_per_cycle - 1) <
        wall_clock_actual(cfg, 1, 0, 0));
}

TEST_CASE("schedule iteration order and times", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(2, 2, 2);
  struct Row {
    int j, m, p;
    double t;
  };
  std::vector<Row> rows;
  for_each_sample(cfg, [&](int j, int m, int p, double t) { rows.push_back({j, m, p, t}); });
  REQUIRE(rows.size() == 8);
  double prev = -1.0;
  std::size_t i = 0;
  for (int j = 0; j < 2; ++j) {
    for (int m = 0; m < 2; ++m) {
      for (int p = 0; p < 2; ++p, ++i) {
        CHECK(rows[i].j == j);
        CHECK(rows[i].m == m);
        CHECK(rows[i].p == p);
        CHECK(rows[i].t == wall_clock_actual(cfg, j, m, p));
        CHECK(rows[i].t > prev);
        prev = rows[i].t;
      }
    }
  }
}

TEST_CASE("transmit window membership with grid tolerance", "[sampler]") {
  MeasurementConfig cfg;
  const double tau = cfg.fine_step_s();
  ProbePulse pulse{0.6, 1e-9, ProbePulse::kTrapezoidal, 2e-10, 1e-8};
  CHECK(in_probe_window(pulse, 1e-8, tau));
  CHECK(in_probe_window(pulse, 1e-8 - 1e-4 * tau, tau));  // fuzzy launch edge
  CHECK_FALSE(in_probe_window(pulse, 1e-8 - 0.5 * tau, tau));
  CHECK(in_probe_window(pulse, 1.1e-8 - tau, tau));
  CHECK_FALSE(in_probe_window(pulse, 1.1e-8, tau));
  CHECK_FALSE(in_probe_window(pulse, 1.1e-8 - 1e-4 * tau, tau));  // trailing edge is open
}

TEST_CASE("transmit window census on the sampling grid", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(56, 10, 1);
  const double tau = cfg.fine_step_s();  // 10 ns / 56
  ProbePulse pulse{0.6, 1e-9, ProbePulse::kRectangular, 0.0, 1e-8};
  int count = 0;
  for (int j = 0; j < cfg.delay_sets; ++j) {
    for (int p = 0; p < cfg.samples_per_cycle; ++p) {
      if (in_probe_window(pulse, waveform_time(cfg, j, p), tau)) {
        ++count;
        CHECK(p == 1);
        CHECK(j < 6);
      }
    }
  }
  CHECK(count == 6);  // ceil(width / tau)
}

TEST_CASE("acquisition consumes a schedule-shaped draw count", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(2, 2, 3);
  cfg.environment.low_freq = {2e-3, 1e-5};
  {
    RngStream a(5, 2), b(5, 2);
    run_measurement(cfg, nullptr, {}, 0.0, a);
    for (int i = 0; i < 3 * 2 * 2 * 3; ++i) b.next_u64();  // drift + jitter + thermal
    CHECK(a.next_u64() == b.next_u64());
  }
  cfg.environment.low_freq.rms_v = 0.0;
  {
    RngStream a(5, 3), b(5, 3);
    run_measurement(cfg, nullptr, {}, 0.0, a);
    for (int i = 0; i < 2 * 2 * 2 * 3; ++i) b.next_u64();  // jitter + thermal only
    CHECK(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("quiet-line probability matches the decision law", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(1, 1, 50000);
  RngStream rng(17, 4);
  const auto t = run_measurement(cfg, nullptr, {}, 0.0, rng);
  const double p_hat = static_cast<double>(t.at(0, 0)) / t.trials;
  const double p_exp = normal_cdf((0.0 - 3e-3 - 1e-3) / kSigma);
  CHECK(std::fabs(p_hat - p_exp) <= 4.0 * std::sqrt(p_exp * (1 - p_exp) / t.trials));

  // A 4 ps delay offset cancels offset plus half hysteresis exactly.
  RngStream rng2(17, 5);
  const auto t2 = run_measurement(cfg, nullptr, {}, 4e-12, rng2);
  const double p2 = static_cast<double>(t2.at(0, 0)) / t2.trials;
  CHECK(std::fabs(p2 - 0.5) <= 4.0 * std::sqrt(0.25 / t2.trials));
}

TEST_CASE("clock-harmonic pickup is constant within a set", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(4, 3, 20000);
  cfg.environment.system_tones = {{1, 8e-3, 0.0}};
  RngStream rng(23, 6);
  const auto t = run_measurement(cfg, nullptr, {}, 0.0, rng);
  const double tau = cfg.fine_step_s();  // 2.5 ns: the tone walks a quarter period per set
  for (int j = 0; j < 4; ++j) {
    const double tone = 8e-3 * std::sin(2.0 * 3.14159265358979323846 * j * tau / 10e-9);
    const double p_exp = normal_cdf((-tone - 4e-3) / kSigma);
    for (int p = 0; p < 3; ++p) {
      const double p_hat = static_cast<double>(t.at(j, p)) / t.trials;
      INFO("j=" << j << " p=" << p << " expect " << p_exp << " got " << p_hat);
      CHECK(std::fabs(p_hat - p_exp) <=
            4.0 * std::sqrt(std::max(p_exp * (1 - p_exp), 1e-4) / t.trials));
    }
  }
}

TEST_CASE("receiver blanking zeroes transmit-window cells only", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(2, 2, 20);  // waveform grid: 0, 5, 10, 15 ns
  ProbePulse pulse{-0.5, 1e-9, ProbePulse::kRectangular, 0.0, 0.0};
  // Incident drive at t=0 plus a synthetic echo at 5 ns, equal strength.
  const std::vector<ReflectionEvent> echoes = {{0.0, 1.0}, {5e-9, 1.0}};
  RngStream rng(31, 7);
  const auto t = run_measurement(cfg, &pulse, echoes, 0.0, rng);
  // The echo cell sees -0.5 V, 60 sigma past threshold: every trial fires.
  CHECK(t.at(1, 0) == 20);
  // The launch cell sees the same level but the receiver is blanked.
  CHECK(t.at(0, 0) == 0);
}

TEST_CASE("ramp saturation surfaces from acquisition", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(1, 1, 10);
  RngStream rng(1, 1);
  CHECK_THROWS_AS(run_measurement(cfg, nullptr, {}, 0.48e-9, rng), ramp_saturation_error);
}

TEST_CASE("threshold calibration finds the half-probability tap", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(2, 2, 3);
  RngStream rng(99, 1);
  const auto cal = calibrate(cfg, rng);
  // Offset 3 mV plus 1 mV half-hysteresis wants +4 mV; taps pitch 2.1484 mV.
  CHECK(cal.achieved_bias_v ==
        Catch::Approx(cal.taps * 1e9 * 2.1484375e-12).margin(1e-15));
  CHECK(std::fabs(cal.achieved_bias_v - 4e-3) <= 1.2 * 2.1484375e-3);
  CHECK(cal.p_hat == 0.5 + cal.residual);
  CHECK(std::fabs(cal.residual) <= 2.0 * delta_p(0.5, cfg.cal_trials));
}

TEST_CASE("calibration absorbs static pickup", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(2, 2, 3);
  cfg.environment.system_tones = {{1, 5e-3, 1.5707963267948966}};  // +5 mV at the clock edge
  RngStream rng(99, 2);
  const auto cal = calibrate(cfg, rng);
  CHECK(std::fabs(cal.achieved_bias_v - 9e-3) <= 1.2 * 2.1484375e-3);
  CHECK(std::fabs(cal.residual) <= 2.0 * delta_p(0.5, cfg.cal_trials));
}

TEST_CASE("calibration reports an unreachable crossing", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(2, 2, 3);
  cfg.comparator.offset_v = 0.48;  // crossing past the last usable tap
  RngStream rng(99, 3);
  CHECK_THROWS_AS(calibrate(cfg, rng), calibration_range_error);

  MeasurementConfig cfg2 = tiny_cfg(2, 2, 3);
  cfg2.clock.bias_v = 0.49;  // dither window cannot fit at the bias itself
  RngStream rng2(99, 4);
  CHECK_THROWS_AS(calibrate(cfg2, rng2), calibration_range_error);
}

TEST_CASE("probability averaging and saturation flags", "[sampler]") {
  SampleTensor t;
  t.delay_sets = 1;
  t.samples_per_cycle = 3;
  t.trials = 5;
  t.ones = {0, 3, 5};
  const auto w = average_probabilities(t);
  CHECK(w.at(0, 0) == 0.0);
  CHECK(w.at(0, 1) == Catch::Approx(0.6).margin(1e-15));
  CHECK(w.at(0, 2) == 1.0);
  CHECK(w.saturated_at(0, 0));
  CHECK_FALSE(w.saturated_at(0, 1));
  CHECK(w.saturated_at(0, 2));
}

TEST_CASE("acquisition is reproducible per seed and distinct across streams", "[sampler]") {
  MeasurementConfig cfg = tiny_cfg(2, 2, 200);
  RngStream a(777, 2), b(777, 2), c(777, 3);
  const auto ta = run_measurement(cfg, nullptr, {}, 0.0, a);
  const auto tb = run_measurement(cfg, nullptr, {}, 0.0, b);
  const auto tc = run_measurement(cfg, nullptr, {}, 0.0, c);
  CHECK(ta.ones == tb.ones);
  CHECK(ta.ones != tc.ones);
}
