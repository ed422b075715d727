// Command-line front end: loads scenario descriptions, runs the measurement
// pipeline, prints a per-scenario summary, and leaves CSV (and optional SVG)
// records in the output directory.

#include <CLI11.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "japc/config.hpp"
#include "japc/scenario.hpp"
#include "japc/svg.hpp"

namespace {

struct Job {
  japc::ScenarioConfig cfg;
  std::optional<japc::ScenarioResult> result;
  std::string error;
};

void print_summary(std::ostream& os, const japc::ScenarioResult& r) {
  os << "=== " << r.config.name << " (seed " << r.config.seed << ") ===\n";
  for (const auto& line : r.log) os << "  " << line << "\n";
  os << "  resolution: delta_p=" << r.delta_p_mid << "  delta_v=" << r.delta_v_mid
     << " V  spatial=" << r.spatial_resolution_m << " m\n";
  if (r.profile_valid) {
    os << "  interfaces (" << r.profile.peaks.size() << "):\n";
    os << "    round_trip_ns  distance_m  polarity  value\n";
    for (const auto& peak : r.profile.peaks) {
      std::ostringstream row;
      row << "    " << std::setw(13) << std::fixed << std::setprecision(3)
          << peak.round_trip_s * 1e9 << "  " << std::setw(10) << std::setprecision(4)
          << peak.distance_m << "  " << std::setw(8) << (peak.polarity > 0 ? "+" : "-") << "  "
          << std::setprecision(4) << peak.value;
      os << row.str() << "\n";
    }
  }
  for (const auto& path : r.outputs) os << "  wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-sample time-domain reflectometry on a probability readout"};

  std::vector<std::string> scenario_refs;
  std::vector<std::string> overrides;
  std::string denoise_name = "setref";
  std::string readout_name = "probability";
  std::string out_dir = "out";
  std::string emit_preset;
  std::uint64_t seed = 0;
  bool quiet = false;
  bool want_svg = false;
  bool list_presets = false;
  int parallel = 1;

  app.add_option("-s,--scenario", scenario_refs,
                 "Preset name or scenario file; repeat for a batch");
  app.add_option("--seed", seed, "Replace the seed of every loaded scenario");
  auto* seed_opt = app.get_option("--seed");
  app.add_option("-O,--override", overrides,
                 "section.key=value applied to every scenario; repeatable");
  app.add_option("--denoise", denoise_name, "none | background | setref")
      ->capture_default_str();
  app.add_option("--pvm", readout_name, "probability | gaussian | linear")
      ->capture_default_str();
  app.add_option("--out-dir", out_dir, "Output directory; empty disables export")
      ->capture_default_str();
  app.add_flag("--quiet", quiet, "Suppress per-scenario summaries");
  app.add_flag("--svg", want_svg, "Also render the record to SVG");
  app.add_option("--parallel", parallel, "Worker threads for batch runs")
      ->check(CLI::PositiveNumber);
  app.add_flag("--list-presets", list_presets, "Print built-in scenario names and exit");
  app.add_option("--emit-preset", emit_preset,
                 "Print the text of a built-in scenario and exit");

  CLI11_PARSE(app, argc, argv);

  if (list_presets) {
    for (const auto& name : japc::preset_names()) std::cout << name << "\n";
    return 0;
  }

  try {
    if (!emit_preset.empty()) {
      std::cout << japc::preset_text(emit_preset);
      return 0;
    }

    if (scenario_refs.empty()) {
      std::cerr << "error: no scenario given (try --scenario open-cable or --list-presets)\n";
      return 1;
    }

    japc::ScenarioOptions opt;
    opt.denoise = japc::parse_denoise_mode(denoise_name);
    opt.readout = japc::parse_readout_mode(readout_name);
    opt.out_dir = out_dir;

    std::vector<Job> jobs;
    jobs.reserve(scenario_refs.size());
    for (const auto& ref : scenario_refs) {
      Job job;
      job.cfg = japc::load_scenario(ref);
      japc::apply_overrides(job.cfg, overrides);
      if (seed_opt->count() > 0) job.cfg.seed = seed;
      jobs.push_back(std::move(job));
    }

    const int workers =
        std::min<int>(parallel, static_cast<int>(jobs.size()) > 0 ? static_cast<int>(jobs.size()) : 1);
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) break;
        try {
          jobs[i].result = japc::run_scenario(jobs[i].cfg, opt);
          if (want_svg && !opt.out_dir.empty()) {
            namespace fs = std::filesystem;
            const std::string path =
                (fs::path(opt.out_dir) / (jobs[i].cfg.name + "_waveform.svg")).string();
            japc::detail::write_atomic(path, japc::render_waveform_svg(jobs[i].result->waveform));
            jobs[i].result->outputs.push_back(path);
          }
        } catch (const std::exception& e) {
          jobs[i].error = e.what();
        }
      }
    };

    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int i = 0; i < workers; ++i) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }

    int failures = 0;
    for (const auto& job : jobs) {
      if (job.result) {
        if (!quiet) print_summary(std::cout, *job.result);
      } else {
        ++failures;
        std::cerr << "error: scenario '" << job.cfg.name << "': " << job.error << "\n";
      }
    }
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
