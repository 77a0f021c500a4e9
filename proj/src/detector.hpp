// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gan.hpp"
#include "mad.hpp"

namespace pmugan {

// Normal fitted over training scores; one per trained GAN.
struct ScoreDistribution {
  double mean = 0.5;
  double std = 1.0;
};

inline constexpr double kScoreStdFloor = 1e-9;

// Sample mean and (n-1) standard deviation, std floored.
ScoreDistribution fit_score_distribution(const std::vector<double>& scores);

struct DetectorConfig {
  double z_p = 3.0;  // three-sigma rule by default
  int window = 40;
  int stride = 20;
};

void validate_detector_config(const DetectorConfig& cfg);

// Flag rule of both algorithms: s outside the OPEN interval
// (mean - z_p*std, mean + z_p*std); boundary values flag.
bool outside_band(const ScoreDistribution& dist, double z_p, double score);

struct BasicDetector {
  TrainedGan gan;  // ALL12
  ScoreDistribution dist;
  DetectorConfig cfg;
};

struct EnhancedDetector {
  TrainedGan gan_ipq;  // IPQ9, scores s1 against (mu, sigma)
  ScoreDistribution dist_ipq;
  TrainedGan gan_v;    // V3, scores s2 against (phi, varphi)
  ScoreDistribution dist_v;
  DetectorConfig cfg;
};

// Discriminator score of a block already normalized with the gan's normalizer.
double score_block(const TrainedGan& gan, const Mat& normalized_block);

// Projection + normalization + scoring of a raw ALL12 block.
double score_raw_block(const TrainedGan& gan, const FeatureBlock& block12);

struct BasicResult {
  int flag = 0;
  double score = 0;
};
BasicResult detect_basic(const BasicDetector& d, const FeatureBlock& block12);

struct EnhancedResult {
  int flag = 0;
  double s1 = 0;  // D*_{I,P,Q}
  double s2 = 0;  // D*_V
  bool fired_ipq = false;
  bool fired_v = false;
};
EnhancedResult detect_enhanced(const EnhancedDetector& d, const FeatureBlock& block12);

// Half-open sample-index interval.
struct Interval {
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct WindowFlag {
  std::int64_t start = 0;
  bool flag = false;
};

// Coalesces overlapping/adjacent flagged windows into maximal intervals
// [first flagged start, last flagged start + window_size).
std::vector<Interval> merge_flags(const std::vector<WindowFlag>& windows, int window_size);

struct WindowResult {
  std::int64_t start = 0;
  double s = 0, s1 = 0, s2 = 0;  // NaN marks "not applicable" in the CSV
  int flag = 0;
  std::string source;
};

struct DetectionReport {
  std::vector<WindowResult> windows;
  std::vector<Interval> intervals;
};

enum class DetectorKind { Basic, Enhanced, Mad };
const char* detector_kind_name(DetectorKind k);
DetectorKind detector_kind_from_name(const std::string& s);

// Incremental engine shared by the offline and streaming paths. A window's
// result is emitted with the frame that completes it.
class StreamDetector {
 public:
  static StreamDetector basic(BasicDetector d);
  static StreamDetector enhanced(EnhancedDetector d);
  static StreamDetector mad(MadConfig mcfg, DetectorConfig dcfg);

  // Returns the completed window's result, if this frame completed one.
  // Rejects out-of-order or gapped timestamps.
  std::optional<WindowResult> push(const PhasorFrame& frame);

  DetectionReport report() const;  // windows so far + merged intervals
  int window_size() const { return cfg_.window; }

 private:
  StreamDetector() = default;

  DetectorKind kind_ = DetectorKind::Basic;
  DetectorConfig cfg_;
  std::optional<BasicDetector> basic_;
  std::optional<EnhancedDetector> enhanced_;
  std::optional<MadConfig> mad_cfg_;
  std::unique_ptr<MadSampleDetector> mad_state_;

  std::vector<double> rows_;  // ring of the last `window` 12-feature rows
  std::vector<char> anomalous_;  // per-sample MAD verdicts for the same ring
  std::int64_t n_samples_ = 0;
  std::int64_t first_ts_ = 0;
  std::int64_t last_ts_ = 0;
  std::vector<WindowResult> windows_;

  std::optional<WindowResult> complete_window();
};

// Offline convenience wrappers over StreamDetector.
DetectionReport run_stream(const BasicDetector& d, const std::vector<PhasorFrame>& frames);
DetectionReport run_stream(const EnhancedDetector& d, const std::vector<PhasorFrame>& frames);
DetectionReport run_stream_mad(const MadConfig& mcfg, const DetectorConfig& dcfg,
                               const std::vector<PhasorFrame>& frames);

// ---- model file (PMUGAN v1) --------------------------------------------------
//
// Versioned text format: header, feature set, window/noise dims, normalizer
// ranges, generator and discriminator networks, score-distribution footer.
// Weights are written with 17 significant digits (round-trip exact).

void save_model(std::ostream& os, const TrainedGan& gan, const ScoreDistribution& dist);
void save_model_file(const std::string& path, const TrainedGan& gan, const ScoreDistribution& dist);

struct LoadedModel {
  TrainedGan gan;
  ScoreDistribution dist;
};
LoadedModel load_model(std::istream& is);
LoadedModel load_model_file(const std::string& path);

// ---- report CSV ----------------------------------------------------------------
// window_start,score_s,score_s1,score_s2,flag,source  (empty = not applicable)

extern const char* const kReportCsvHeader;
void write_report_csv(std::ostream& os, const DetectionReport& report);
DetectionReport read_report_csv(std::istream& is, int window_size);

extern const char* const kIntervalsCsvHeader;  // t_start,t_end
void write_intervals_csv(std::ostream& os, const std::vector<Interval>& intervals);
std::vector<Interval> read_intervals_csv(std::istream& is);

}  // namespace pmugan
