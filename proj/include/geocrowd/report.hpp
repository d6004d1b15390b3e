#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geocrowd/datagen.hpp"
#include "geocrowd/harness.hpp"

namespace geocrowd {

struct MetricsRow {
  std::string run_id;
  std::string algorithm;
  std::string distribution;
  std::string sweep_param;
  std::string sweep_value;
  std::uint64_t seed = 0;
  double avg_moving_distance = 0.0;
  int finished = 0;
  int confident_finished = 0;
  double running_time = 0.0;
};

inline constexpr std::string_view kMetricsHeader =
    "run_id,algorithm,distribution,sweep_param,sweep_value,seed,avg_moving_distance,"
    "finished,confident_finished,running_time_seconds";

inline void write_metrics(std::ostream& out, const std::vector<MetricsRow>& rows) {
  using detail::fmt_real;
  out << kMetricsHeader << '\n';
  char rt[32];
  for (const auto& r : rows) {
    std::snprintf(rt, sizeof rt, "%.6f", r.running_time);
    out << r.run_id << ',' << r.algorithm << ',' << r.distribution << ',' << r.sweep_param
        << ',' << r.sweep_value << ',' << r.seed << ',' << fmt_real(r.avg_moving_distance)
        << ',' << r.finished << ',' << r.confident_finished << ',' << rt << '\n';
  }
}

inline std::vector<MetricsRow> read_metrics(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      detail::split_csv(line) != detail::split_csv(std::string(kMetricsHeader))) {
    throw std::invalid_argument("metrics file: missing or unexpected header");
  }
  std::vector<MetricsRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto f = detail::split_csv(line);
    if (f.size() != 10) {
      throw std::invalid_argument("metrics file line " + std::to_string(lineno) +
                                  ": expected 10 fields");
    }
    MetricsRow r;
    r.run_id = f[0];
    r.algorithm = f[1];
    r.distribution = f[2];
    r.sweep_param = f[3];
    r.sweep_value = f[4];
    r.seed = static_cast<std::uint64_t>(detail::to_real(f[5], "seed"));
    r.avg_moving_distance = detail::to_real(f[6], "avg_moving_distance");
    r.finished = detail::to_int(f[7], "finished");
    r.confident_finished = detail::to_int(f[8], "confident_finished");
    r.running_time = detail::to_real(f[9], "running_time_seconds");
    rows.push_back(std::move(r));
  }
  return rows;
}

struct MetricInfo {
  const char* key;
  const char* title;
  bool higher_is_better;
};

inline constexpr std::array<MetricInfo, 4> kMetrics{{
    {"moving_distance", "Moving Distance", false},
    {"finished_tasks", "Finished Tasks", true},
    {"confident_finished_tasks", "Confident Finished Tasks", true},
    {"running_time", "Running Time (s)", false},
}};

inline double metric_value(const MetricsRow& r, std::size_t metric) {
  switch (metric) {
    case 0: return r.avg_moving_distance;
    case 1: return r.finished;
    case 2: return r.confident_finished;
    default: return r.running_time;
  }
}

// Seed-averaged values of one swept parameter: values[alg][x][metric].
struct SweepSummary {
  std::string param;
  std::vector<std::string> x_values;    // order of first appearance
  std::vector<std::string> algorithms;  // registry order, unknown names last
  std::map<std::string, std::vector<std::array<double, 4>>> mean;
  std::map<std::string, std::vector<int>> samples;
};

inline std::vector<SweepSummary> summarize(const std::vector<MetricsRow>& rows) {
  std::vector<SweepSummary> out;
  auto rank = [](const std::string& alg) {
    for (std::size_t i = 0; i < kAlgorithms.size(); ++i) {
      if (kAlgorithms[i].second == alg) return i;
    }
    return kAlgorithms.size();
  };
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](auto& s) { return s.param == r.sweep_param; });
    if (it == out.end()) {
      out.push_back({r.sweep_param, {}, {}, {}, {}});
      it = out.end() - 1;
    }
    if (std::find(it->x_values.begin(), it->x_values.end(), r.sweep_value) == it->x_values.end()) {
      it->x_values.push_back(r.sweep_value);
    }
    if (std::find(it->algorithms.begin(), it->algorithms.end(), r.algorithm) == it->algorithms.end()) {
      it->algorithms.push_back(r.algorithm);
    }
  }
  for (auto& s : out) {
    std::stable_sort(s.algorithms.begin(), s.algorithms.end(),
                     [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
    for (const auto& a : s.algorithms) {
      s.mean[a].assign(s.x_values.size(), {0, 0, 0, 0});
      s.samples[a].assign(s.x_values.size(), 0);
    }
  }
  for (const auto& r : rows) {
    auto& s = *std::find_if(out.begin(), out.end(), [&](auto& x) { return x.param == r.sweep_param; });
    auto xi = static_cast<std::size_t>(
        std::find(s.x_values.begin(), s.x_values.end(), r.sweep_value) - s.x_values.begin());
    for (std::size_t m = 0; m < 4; ++m) s.mean[r.algorithm][xi][m] += metric_value(r, m);
    ++s.samples[r.algorithm][xi];
  }
  for (auto& s : out) {
    for (auto& [alg, series] : s.mean) {
      for (std::size_t xi = 0; xi < series.size(); ++xi) {
        int k = s.samples[alg][xi];
        for (auto& v : series[xi]) v = k ? v / k : std::nan("");
      }
    }
  }
  return out;
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string num(double v, const char* f = "%.4g") {
  char buf[32];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace detail

// Line chart, one series per algorithm, sweep values evenly spaced on x.
inline void write_svg_chart(std::ostream& out, const SweepSummary& s, std::size_t metric) {
  using detail::num;
  const double W = 640, H = 400, left = 70, right = 150, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  static constexpr std::array<const char*, 11> colors{
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
      "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#000000"};

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [alg, series] : s.mean) {
    for (const auto& p : series) {
      if (std::isnan(p[metric])) continue;
      lo = std::min(lo, p[metric]);
      hi = std::max(hi, p[metric]);
    }
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (lo > 0.0) lo = 0.0;
  if (hi <= lo) hi = lo + 1.0;
  std::size_t nx = s.x_values.size();
  auto X = [&](std::size_t i) { return left + (nx <= 1 ? pw / 2 : pw * i / (nx - 1)); };
  auto Y = [&](double v) { return top + ph - (v - lo) / (hi - lo) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << detail::xml_escape(kMetrics[metric].title) << " vs " << detail::xml_escape(s.param)
      << "</text>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double v = lo + (hi - lo) * k / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << num(Y(v) + 4, "%.1f")
        << "\" text-anchor=\"end\">" << num(v) << "</text>\n"
        << "<line x1=\"" << left << "\" y1=\"" << num(Y(v), "%.1f") << "\" x2=\"" << left + pw
        << "\" y2=\"" << num(Y(v), "%.1f") << "\" stroke=\"#ddd\"/>\n";
  }
  for (std::size_t i = 0; i < nx; ++i) {
    out << "<text x=\"" << num(X(i), "%.1f") << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\">" << detail::xml_escape(s.x_values[i]) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
      << detail::xml_escape(s.param) << "</text>\n";

  for (std::size_t a = 0; a < s.algorithms.size(); ++a) {
    const auto& alg = s.algorithms[a];
    const char* color = colors[a % colors.size()];
    const auto& series = s.mean.at(alg);
    std::string pts;
    for (std::size_t i = 0; i < nx; ++i) {
      if (std::isnan(series[i][metric])) continue;
      pts += num(X(i), "%.1f") + "," + num(Y(series[i][metric]), "%.1f") + " ";
    }
    out << "<polyline class=\"series\" data-algorithm=\"" << detail::xml_escape(alg)
        << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts
        << "\"/>\n";
    for (std::size_t i = 0; i < nx; ++i) {
      if (std::isnan(series[i][metric])) continue;
      out << "<circle cx=\"" << num(X(i), "%.1f") << "\" cy=\"" << num(Y(series[i][metric]), "%.1f")
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    double ly = top + 14 + 18.0 * a;
    out << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 35
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly << "\">" << detail::xml_escape(alg)
        << "</text>\n";
  }
  out << "</svg>\n";
}

inline void write_table(std::ostream& out, const SweepSummary& s) {
  char buf[256];
  out << "sweep: " << s.param << " (mean over seeds)\n";
  std::snprintf(buf, sizeof buf, "%-10s %-12s %14s %10s %12s %14s\n", "algorithm", "value",
                "move_distance", "finished", "confident", "time_s");
  out << buf;
  for (const auto& alg : s.algorithms) {
    for (std::size_t i = 0; i < s.x_values.size(); ++i) {
      const auto& v = s.mean.at(alg)[i];
      if (std::isnan(v[0])) continue;
      std::snprintf(buf, sizeof buf, "%-10s %-12s %14.6f %10.2f %12.2f %14.6f\n", alg.c_str(),
                    s.x_values[i].c_str(), v[0], v[1], v[2], v[3]);
      out << buf;
    }
  }
}

// Each metric, averaged over all rows of an algorithm, mapped linearly onto
// 0..5 between the worst and best algorithm (5 = best).
inline void write_grades(std::ostream& out, const std::vector<MetricsRow>& rows) {
  std::vector<std::string> algs;
  std::map<std::string, std::array<double, 4>> sum;
  std::map<std::string, int> count;
  for (const auto& r : rows) {
    if (!count.contains(r.algorithm)) algs.push_back(r.algorithm);
    auto& s = sum[r.algorithm];
    for (std::size_t m = 0; m < 4; ++m) s[m] += metric_value(r, m);
    ++count[r.algorithm];
  }
  auto rank = [](const std::string& alg) {
    for (std::size_t i = 0; i < kAlgorithms.size(); ++i) {
      if (kAlgorithms[i].second == alg) return i;
    }
    return kAlgorithms.size();
  };
  std::stable_sort(algs.begin(), algs.end(), [&](auto& a, auto& b) { return rank(a) < rank(b); });

  char buf[256];
  out << "grades (0 = worst, 5 = best among the algorithms run)\n";
  std::snprintf(buf, sizeof buf, "%-10s %16s %16s %26s %14s\n", "algorithm", kMetrics[0].key,
                kMetrics[1].key, kMetrics[2].key, kMetrics[3].key);
  out << buf;
  std::array<double, 4> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& a : algs) {
    for (std::size_t m = 0; m < 4; ++m) {
      double v = sum[a][m] / count[a];
      lo[m] = std::min(lo[m], v);
      hi[m] = std::max(hi[m], v);
    }
  }
  for (const auto& a : algs) {
    std::array<double, 4> g;
    for (std::size_t m = 0; m < 4; ++m) {
      double v = sum[a][m] / count[a];
      double t = hi[m] > lo[m] ? (v - lo[m]) / (hi[m] - lo[m]) : 1.0;
      if (!kMetrics[m].higher_is_better) t = hi[m] > lo[m] ? 1.0 - t : 1.0;
      g[m] = 5.0 * t;
    }
    std::snprintf(buf, sizeof buf, "%-10s %16.1f %16.1f %26.1f %14.1f\n", a.c_str(), g[0], g[1],
                  g[2], g[3]);
    out << buf;
  }
}

}  // namespace geocrowd
