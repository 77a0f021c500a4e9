// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "common.hpp"

namespace pmugan {

// Median/MAD statistical baseline: a sample is anomalous when it deviates
// from the trailing median by more than k * MAD in either the coarse or the
// fine window (the two sizes are the "dynamic" element). Training-free.
struct MadConfig {
  int coarse_window = 480;
  int fine_window = 120;
  double k = 5.0;
  double mad_scale = 1.4826;          // Normal-consistency constant
  std::vector<int> features;          // indices into the 12-feature row; empty = all
};

void validate_mad_config(const MadConfig& cfg);

// Trailing-window median and scaled MAD over one series, maintained
// incrementally. Values are exact (same results as a per-index sort).
class RollingMedianMad {
 public:
  explicit RollingMedianMad(int window);
  void push(double x);
  bool full() const { return static_cast<int>(buf_.size()) == window_; }
  double median() const;
  double mad_raw() const;  // unscaled median absolute deviation around median()

 private:
  int window_;
  std::deque<double> buf_;     // arrival order
  std::vector<double> sorted_;  // same values, ascending
};

struct MedianMad {
  double median = 0;
  double mad = 0;  // scaled by mad_scale and epsilon-floored
};

// Per-sample trailing stats for indices >= window-1 (earlier indices are not
// emitted). The MAD floor is 1e-12 times the running max |x| seen so far,
// which keeps the detector causal/streamable.
std::vector<MedianMad> rolling_median_mad(const std::vector<double>& series, int window,
                                          double scale = 1.4826);

// Streaming per-sample anomaly test across all monitored features.
class MadSampleDetector {
 public:
  MadSampleDetector(const MadConfig& cfg, int n_features);
  // feature row for one sample; returns true when any monitored feature
  // deviates beyond k * MAD in either window
  bool push(const double* row);

 private:
  MadConfig cfg_;
  int n_features_;
  std::vector<RollingMedianMad> coarse_;
  std::vector<RollingMedianMad> fine_;
  std::vector<double> run_max_;
};

}  // namespace pmugan
