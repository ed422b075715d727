#pragma once

// CSV export and import. All numbers are written with round-trip precision
// through locale-independent conversions, so a run's output is byte-identical
// across re-runs and machines. Files are staged next to the target and
// renamed into place, never left half-written.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "japc/analysis.hpp"
#include "japc/errors.hpp"
#include "japc/sampler.hpp"

namespace japc {

using MetaList = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (res.ec != std::errc()) throw io_error("failed to format a number");
  return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) throw io_error("failed to format a number");
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw io_error(where + ": malformed number '" + s + "'");
  }
  return v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& where) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw io_error(where + ": malformed integer '" + s + "'");
  }
  return v;
}

// Writes content to path via a sibling temp file and an atomic rename.
inline void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw io_error("failed while writing '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ec2;
    std::filesystem::remove(tmp, ec2);
    throw io_error("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

struct ParsedCsv {
  std::map<std::string, std::string> meta;
  std::string header;
  std::vector<std::vector<std::string>> rows;
};

inline ParsedCsv read_csv(const std::string& path, const std::string& expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  ParsedCsv csv;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!header_seen) {
      if (line.rfind("# ", 0) == 0) {
        const auto eq = line.find('=', 2);
        if (eq == std::string::npos) {
          throw io_error(path + ":" + std::to_string(line_no) + ": malformed metadata line");
        }
        csv.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
        continue;
      }
      if (line != expected_header) {
        throw io_error(path + ":" + std::to_string(line_no) + ": expected header '" +
                       expected_header + "', found '" + line + "'");
      }
      csv.header = line;
      header_seen = true;
      continue;
    }
    csv.rows.push_back(split_line(line));
  }
  if (!header_seen) throw io_error(path + ": missing column header");
  return csv;
}

inline std::string require_meta(const ParsedCsv& csv, const std::string& key,
                                const std::string& path) {
  const auto it = csv.meta.find(key);
  if (it == csv.meta.end()) throw io_error(path + ": missing metadata key '" + key + "'");
  return it->second;
}

inline void append_meta(std::string& out, const MetaList& extra) {
  for (const auto& [k, v] : extra) out += "# " + k + "=" + v + "\n";
}

}  // namespace detail

inline const char* kCountsHeader = "set,sample,wall_time_s,waveform_time_s,ones,trials";
inline const char* kProbabilityHeader = "set,sample,wall_time_s,waveform_time_s,p,saturated";
inline const char* kWaveformHeader = "time_s,value,saturated";
inline const char* kProfileHeader =
    "time_s,round_trip_s,extremum_time_s,value,polarity,distance_m";

// Raw decision counts on the (set, sample) grid. Wall time is the recorded
// (nominal) timestamp of the cell's first trial.
inline void write_counts_csv(const std::string& path, const SampleTensor& t,
                             const MeasurementConfig& cfg, const MetaList& extra = {}) {
  if (t.delay_sets != cfg.delay_sets || t.samples_per_cycle != cfg.samples_per_cycle ||
      t.trials != cfg.trials) {
    throw std::invalid_argument("write_counts_csv: tensor shape does not match the config");
  }
  std::string out;
  out += "# format=counts\n";
  out += "# delay_sets=" + detail::format_int(t.delay_sets) + "\n";
  out += "# samples_per_cycle=" + detail::format_int(t.samples_per_cycle) + "\n";
  out += "# trials=" + detail::format_int(t.trials) + "\n";
  out += "# sample_period_s=" + detail::format_double(cfg.sample_period_s) + "\n";
  out += "# fine_step_s=" + detail::format_double(cfg.fine_step_s()) + "\n";
  detail::append_meta(out, extra);
  out += kCountsHeader;
  out += "\n";
  for (int j = 0; j < t.delay_sets; ++j) {
    for (int p = 0; p < t.samples_per_cycle; ++p) {
      out += detail::format_int(j) + "," + detail::format_int(p) + "," +
             detail::format_double(wall_clock_nominal(cfg, j, 0, p)) + "," +
             detail::format_double(waveform_time(cfg, j, p)) + "," +
             detail::format_int(t.at(j, p)) + "," + detail::format_int(t.trials) + "\n";
    }
  }
  detail::write_atomic(path, out);
}

inline SampleTensor read_counts_csv(const std::string& path) {
  const auto csv = detail::read_csv(path, kCountsHeader);
  if (detail::require_meta(csv, "format", path) != "counts") {
    throw io_error(path + ": not a counts file");
  }
  SampleTensor t;
  t.delay_sets =
      static_cast<int>(detail::parse_int(detail::require_meta(csv, "delay_sets", path), path));
  t.samples_per_cycle = static_cast<int>(
      detail::parse_int(detail::require_meta(csv, "samples_per_cycle", path), path));
  t.trials = static_cast<int>(detail::parse_int(detail::require_meta(csv, "trials", path), path));
  if (t.delay_sets < 1 || t.samples_per_cycle < 1 || t.trials < 1) {
    throw io_error(path + ": invalid grid dimensions");
  }
  t.ones.assign(static_cast<std::size_t>(t.delay_sets) * t.samples_per_cycle, 0);
  if (csv.rows.size() != t.ones.size()) {
    throw io_error(path + ": expected " + std::to_string(t.ones.size()) + " rows, found " +
                   std::to_string(csv.rows.size()));
  }
  for (const auto& row : csv.rows) {
    if (row.size() != 6) throw io_error(path + ": expected 6 columns");
    const auto j = detail::parse_int(row[0], path);
    const auto p = detail::parse_int(row[1], path);
    const auto ones = detail::parse_int(row[4], path);
    if (j < 0 || j >= t.delay_sets || p < 0 || p >= t.samples_per_cycle) {
      throw io_error(path + ": cell (" + row[0] + "," + row[1] + ") out of range");
    }
    if (ones < 0 || ones > t.trials) {
      throw io_error(path + ": count " + row[4] + " outside [0, trials]");
    }
    t.at(static_cast<int>(j), static_cast<int>(p)) = static_cast<std::int32_t>(ones);
  }
  return t;
}

inline void write_probability_csv(const std::string& path, const ProbabilityWaveform& w,
                                  const MeasurementConfig& cfg, const MetaList& extra = {}) {
  if (w.delay_sets != cfg.delay_sets || w.samples_per_cycle != cfg.samples_per_cycle) {
    throw std::invalid_argument("write_probability_csv: waveform shape does not match the config");
  }
  std::string out;
  out += "# format=probabilities\n";
  out += "# delay_sets=" + detail::format_int(w.delay_sets) + "\n";
  out += "# samples_per_cycle=" + detail::format_int(w.samples_per_cycle) + "\n";
  out += "# trials=" + detail::format_int(w.trials) + "\n";
  out += "# sample_period_s=" + detail::format_double(cfg.sample_period_s) + "\n";
  out += "# fine_step_s=" + detail::format_double(cfg.fine_step_s()) + "\n";
  detail::append_meta(out, extra);
  out += kProbabilityHeader;
  out += "\n";
  for (int j = 0; j < w.delay_sets; ++j) {
    for (int p = 0; p < w.samples_per_cycle; ++p) {
      out += detail::format_int(j) + "," + detail::format_int(p) + "," +
             detail::format_double(wall_clock_nominal(cfg, j, 0, p)) + "," +
             detail::format_double(waveform_time(cfg, j, p)) + "," +
             detail::format_double(w.at(j, p)) + "," +
             (w.saturated_at(j, p) ? "1" : "0") + "\n";
    }
  }
  detail::write_atomic(path, out);
}

inline ProbabilityWaveform read_probability_csv(const std::string& path) {
  const auto csv = detail::read_csv(path, kProbabilityHeader);
  if (detail::require_meta(csv, "format", path) != "probabilities") {
    throw io_error(path + ": not a probabilities file");
  }
  ProbabilityWaveform w;
  w.delay_sets =
      static_cast<int>(detail::parse_int(detail::require_meta(csv, "delay_sets", path), path));
  w.samples_per_cycle = static_cast<int>(
      detail::parse_int(detail::require_meta(csv, "samples_per_cycle", path), path));
  w.trials = static_cast<int>(detail::parse_int(detail::require_meta(csv, "trials", path), path));
  if (w.delay_sets < 1 || w.samples_per_cycle < 1) {
    throw io_error(path + ": invalid grid dimensions");
  }
  const std::size_t cells = static_cast<std::size_t>(w.delay_sets) * w.samples_per_cycle;
  w.values.assign(cells, 0.0);
  w.saturated.assign(cells, 0);
  if (csv.rows.size() != cells) {
    throw io_error(path + ": expected " + std::to_string(cells) + " rows, found " +
                   std::to_string(csv.rows.size()));
  }
  for (const auto& row : csv.rows) {
    if (row.size() != 6) throw io_error(path + ": expected 6 columns");
    const auto j = detail::parse_int(row[0], path);
    const auto p = detail::parse_int(row[1], path);
    if (j < 0 || j >= w.delay_sets || p < 0 || p >= w.samples_per_cycle) {
      throw io_error(path + ": cell (" + row[0] + "," + row[1] + ") out of range");
    }
    const auto sat = detail::parse_int(row[5], path);
    if (sat != 0 && sat != 1) throw io_error(path + ": saturated flag must be 0 or 1");
    w.at(static_cast<int>(j), static_cast<int>(p)) = detail::parse_double(row[4], path);
    w.saturated[static_cast<std::size_t>(j) * w.samples_per_cycle + p] =
        static_cast<std::uint8_t>(sat);
  }
  return w;
}

inline void write_waveform_csv(const std::string& path, const Waveform& wf,
                               const MetaList& extra = {}) {
  std::string out;
  out += "# format=waveform\n";
  out += std::string("# units=") + (wf.volts ? "volts" : "probability") + "\n";
  out += "# points=" + detail::format_int(static_cast<std::int64_t>(wf.points.size())) + "\n";
  detail::append_meta(out, extra);
  out += kWaveformHeader;
  out += "\n";
  for (const auto& pt : wf.points) {
    out += detail::format_double(pt.time_s) + "," + detail::format_double(pt.value) + "," +
           (pt.saturated ? "1" : "0") + "\n";
  }
  detail::write_atomic(path, out);
}

inline void write_profile_csv(const std::string& path, const InterfaceProfile& profile,
                              const MetaList& extra = {}) {
  std::string out;
  out += "# format=profile\n";
  out += "# baseline=" + detail::format_double(profile.baseline) + "\n";
  out += "# peaks=" + detail::format_int(static_cast<std::int64_t>(profile.peaks.size())) + "\n";
  detail::append_meta(out, extra);
  out += kProfileHeader;
  out += "\n";
  for (const auto& peak : profile.peaks) {
    out += detail::format_double(peak.time_s) + "," + detail::format_double(peak.round_trip_s) +
           "," + detail::format_double(peak.extremum_time_s) + "," +
           detail::format_double(peak.value) + "," + detail::format_int(peak.polarity) + "," +
           detail::format_double(peak.distance_m) + "\n";
  }
  detail::write_atomic(path, out);
}

}  // namespace japc
