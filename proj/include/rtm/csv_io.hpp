#pragma once

// CSV ingestion of observed samples and the CSV tables the tools emit.
//
// Input contract: UTF-8, comma separated, a header row naming columns x1 and
// x2 (other columns are ignored with a warning), decimal point only.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rtm/errors.hpp"
#include "rtm/experiments.hpp"
#include "rtm/model.hpp"
#include "rtm/sample.hpp"
#include "rtm/simulate.hpp"

namespace rtm {

inline std::string format_number(double v, int significant) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant, v);
  return buf;
}

struct CsvSample {
  ObservedSample sample;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

inline double parse_cell(std::string_view cell, std::size_t line_no, std::string_view column) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw IngestionError("line " + std::to_string(line_no) + ": column " + std::string(column) +
                         ": not a finite decimal number: '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace detail

inline CsvSample parse_sample_csv(std::istream& in, const std::string& name = "input") {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw IngestionError(name + ": empty file, expected header x1,x2");
  ++line_no;
  std::string_view header_line = line;
  if (header_line.starts_with("\xEF\xBB\xBF")) header_line.remove_prefix(3);
  const auto header = detail::split_commas(header_line);

  std::size_t i1 = header.size(), i2 = header.size();
  std::vector<std::string> warnings;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "x1" && i1 == header.size()) {
      i1 = c;
    } else if (header[c] == "x2" && i2 == header.size()) {
      i2 = c;
    } else {
      warnings.push_back(name + ": ignoring column '" + std::string(header[c]) + "'");
    }
  }
  if (i1 == header.size() || i2 == header.size()) {
    throw IngestionError(name + ": header must contain columns x1 and x2");
  }

  std::vector<double> x1, x2;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != header.size()) {
      throw IngestionError(name + ": line " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(header.size()));
    }
    x1.push_back(detail::parse_cell(cells[i1], line_no, "x1"));
    x2.push_back(detail::parse_cell(cells[i2], line_no, "x2"));
  }
  if (x1.size() < 2) {
    throw IngestionError(name + ": at least 2 data rows required, got " + std::to_string(x1.size()));
  }
  return {ObservedSample(std::move(x1), std::move(x2)), std::move(warnings)};
}

inline CsvSample read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open data file: " + path);
  return parse_sample_csv(in, path);
}

// Full round-trip precision.
inline void write_sample_csv(std::ostream& out, const ObservedSample& obs) {
  out << "x1,x2\n";
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out << format_number(obs.x1()[i], 17) << ',' << format_number(obs.x2()[i], 17) << '\n';
  }
}

inline void write_sample_csv(std::ostream& out, const SimulatedSample& s) {
  out << "X1,X2,x1,x2\n";
  for (std::size_t i = 0; i < s.observed.size(); ++i) {
    out << format_number(s.latent.X1()[i], 17) << ',' << format_number(s.latent.X2()[i], 17)
        << ',' << format_number(s.observed.x1()[i], 17) << ','
        << format_number(s.observed.x2()[i], 17) << '\n';
  }
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "beta,noise_ratio,crude_slope,berry_slope,rho\n";
  for (const auto& r : rows) {
    out << format_number(r.beta, 6) << ',' << format_number(r.noise_ratio, 6) << ','
        << format_number(r.crude, 6) << ',' << format_number(r.berry, 6) << ','
        << format_number(r.rho, 6) << '\n';
  }
}

inline void write_column_csv(std::ostream& out, std::string_view column,
                             std::span<const double> values) {
  out << column << '\n';
  for (double v : values) out << format_number(v, 17) << '\n';
}

inline void write_replicates_csv(std::ostream& out, const SamplingDistReport& report) {
  out << "crude,berry,blomqvist,true\n";
  for (std::size_t r = 0; r < report.replicates; ++r) {
    for (std::size_t m = 0; m < kAllMethods.size(); ++m) {
      const double v = report.values[m][r];
      out << (m ? "," : "") << (std::isfinite(v) ? format_number(v, 17) : "nan");
    }
    out << '\n';
  }
}

inline void write_head_to_head_csv(std::ostream& out, const HeadToHeadReport& report) {
  out << "beta,p_crude_beats_berry,p_crude_beats_blomqvist\n";
  for (const auto& row : report.rows) {
    out << format_number(row.beta, 6) << ',' << format_number(row.p_crude_beats_berry, 6) << ','
        << format_number(row.p_crude_beats_blomqvist, 6) << '\n';
  }
}

}  // namespace rtm
