// SPDX-License-Identifier: Apache-2.0
#include "mad.hpp"

#include <algorithm>
#include <cmath>

namespace pmugan {

void validate_mad_config(const MadConfig& cfg) {
  if (cfg.coarse_window < 3 || cfg.fine_window < 3)
    throw ConfigError("mad windows must be >= 3");
  if (!(cfg.k > 0)) throw ConfigError("mad.k must be > 0");
  if (!(cfg.mad_scale > 0)) throw ConfigError("mad.scale must be > 0");
  for (int f : cfg.features)
    if (f < 0 || f >= 12) throw ConfigError("mad.features indices must be in [0, 11]");
}

RollingMedianMad::RollingMedianMad(int window) : window_(window) {
  if (window < 1) throw ConfigError("rolling window must be >= 1");
  sorted_.reserve(static_cast<size_t>(window));
}

void RollingMedianMad::push(double x) {
  buf_.push_back(x);
  sorted_.insert(std::lower_bound(sorted_.begin(), sorted_.end(), x), x);
  if (static_cast<int>(buf_.size()) > window_) {
    const double old = buf_.front();
    buf_.pop_front();
    sorted_.erase(std::lower_bound(sorted_.begin(), sorted_.end(), old));
  }
}

double RollingMedianMad::median() const {
  const size_t n = sorted_.size();
  return (sorted_[(n - 1) / 2] + sorted_[n / 2]) * 0.5;
}

double RollingMedianMad::mad_raw() const {
  // k-th smallest |x - median| via two pointers walking outward from the
  // median position in the sorted window
  const size_t n = sorted_.size();
  const double m = median();
  const size_t k1 = (n - 1) / 2;
  const size_t k2 = n / 2;
  // last index with value <= m
  size_t right = static_cast<size_t>(
      std::upper_bound(sorted_.begin(), sorted_.end(), m) - sorted_.begin());
  size_t left = right;  // elements < right are <= m; elements >= right are > m
  double d1 = 0, d2 = 0;
  for (size_t taken = 0; taken <= k2; ++taken) {
    double dev;
    const double dl = (left > 0) ? (m - sorted_[left - 1]) : HUGE_VAL;
    const double dr = (right < n) ? (sorted_[right] - m) : HUGE_VAL;
    if (dl <= dr) {
      dev = dl;
      --left;
    } else {
      dev = dr;
      ++right;
    }
    if (taken == k1) d1 = dev;
    if (taken == k2) d2 = dev;
  }
  return (d1 + d2) * 0.5;
}

std::vector<MedianMad> rolling_median_mad(const std::vector<double>& series, int window,
                                          double scale) {
  std::vector<MedianMad> out;
  if (static_cast<int>(series.size()) < window) return out;
  out.reserve(series.size() - static_cast<size_t>(window) + 1);
  RollingMedianMad roll(window);
  double run_max = 0.0;
  for (double x : series) {
    roll.push(x);
    run_max = std::max(run_max, std::abs(x));
    if (roll.full()) {
      MedianMad mm;
      mm.median = roll.median();
      mm.mad = std::max(roll.mad_raw() * scale, 1e-12 * run_max);
      out.push_back(mm);
    }
  }
  return out;
}

MadSampleDetector::MadSampleDetector(const MadConfig& cfg, int n_features)
    : cfg_(cfg), n_features_(n_features) {
  validate_mad_config(cfg);
  if (cfg_.features.empty())
    for (int f = 0; f < n_features; ++f) cfg_.features.push_back(f);
  coarse_.assign(static_cast<size_t>(n_features), RollingMedianMad(cfg.coarse_window));
  fine_.assign(static_cast<size_t>(n_features), RollingMedianMad(cfg.fine_window));
  run_max_.assign(static_cast<size_t>(n_features), 0.0);
}

bool MadSampleDetector::push(const double* row) {
  bool anomalous = false;
  for (int f : cfg_.features) {
    const double x = row[f];
    auto& c = coarse_[static_cast<size_t>(f)];
    auto& fi = fine_[static_cast<size_t>(f)];
    c.push(x);
    fi.push(x);
    double& rm = run_max_[static_cast<size_t>(f)];
    rm = std::max(rm, std::abs(x));
    const double floor = 1e-12 * rm;
    if (c.full()) {
      const double mad = std::max(c.mad_raw() * cfg_.mad_scale, floor);
      if (std::abs(x - c.median()) > cfg_.k * mad) anomalous = true;
    }
    if (!anomalous && fi.full()) {
      const double mad = std::max(fi.mad_raw() * cfg_.mad_scale, floor);
      if (std::abs(x - fi.median()) > cfg_.k * mad) anomalous = true;
    }
  }
  return anomalous;
}

}  // namespace pmugan
