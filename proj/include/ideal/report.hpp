#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ideal/json_io.hpp"

namespace ideal {

/// Statistics of one named residual. Informational entries are reported but
/// never gate a run.
struct ResidualReport {
  std::string name;
  double max = 0.0;
  double l2 = 0.0;  // root mean square over the samples
  double h = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  bool informational = false;
  std::string detail;
  Json extra = Json::object();

  static ResidualReport from_samples(std::string name, std::span<const double> samples, double h,
                                     double tolerance) {
    ResidualReport r;
    r.name = std::move(name);
    r.h = h;
    r.tolerance = tolerance;
    double s = 0.0;
    bool finite = true;
    for (double x : samples) {
      if (!std::isfinite(x)) finite = false;
      r.max = std::max(r.max, std::abs(x));
      s += x * x;
    }
    r.l2 = samples.empty() ? 0.0 : std::sqrt(s / static_cast<double>(samples.size()));
    r.pass = finite && r.max <= tolerance;
    if (!finite) r.max = std::numeric_limits<double>::infinity();
    return r;
  }

  static ResidualReport info(std::string name, std::span<const double> samples, double h, std::string detail) {
    ResidualReport r = from_samples(std::move(name), samples, h, std::numeric_limits<double>::infinity());
    r.informational = true;
    r.pass = true;
    r.detail = std::move(detail);
    return r;
  }

  Json to_json() const {
    Json j;
    j["name"] = name;
    j["max"] = max;
    j["l2"] = l2;
    j["h"] = h;
    j["tolerance"] = informational ? Json(nullptr) : Json(tolerance);
    j["pass"] = pass;
    if (informational) j["informational"] = true;
    if (!detail.empty()) j["detail"] = detail;
    if (!extra.empty()) j["extra"] = extra;
    return j;
  }
};

inline bool all_pass(const std::vector<ResidualReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const ResidualReport& r) { return r.pass; });
}

inline Json reports_to_json(const std::vector<ResidualReport>& reports) {
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(r.to_json());
  return arr;
}

inline const ResidualReport& find_report(const std::vector<ResidualReport>& reports, const std::string& name) {
  for (const auto& r : reports)
    if (r.name == name) return r;
  throw std::out_of_range("no report named '" + name + "'");
}

/// Mean and standard deviation of a sample set.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(std::span<const double> xs) {
  MeanStd m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / static_cast<double>(xs.size()));
  return m;
}

}  // namespace ideal
