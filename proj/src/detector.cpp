// SPDX-License-Identifier: Apache-2.0
#include "detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pmugan {

ScoreDistribution fit_score_distribution(const std::vector<double>& scores) {
  if (scores.size() < 2) throw DataError("fit_score_distribution: need >= 2 scores");
  const double n = static_cast<double>(scores.size());
  double mean = 0;
  for (double s : scores) mean += s;
  mean /= n;
  double ss = 0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  ScoreDistribution d;
  d.mean = mean;
  d.std = std::max(std::sqrt(ss / (n - 1.0)), kScoreStdFloor);
  return d;
}

void validate_detector_config(const DetectorConfig& cfg) {
  if (!(cfg.z_p > 0)) throw ConfigError("detector.z_p must be > 0");
  if (cfg.window < 1) throw ConfigError("window.size must be >= 1");
  if (cfg.stride < 1 || cfg.stride > cfg.window)
    throw ConfigError("window.stride must be in [1, window.size]");
}

bool outside_band(const ScoreDistribution& dist, double z_p, double score) {
  // open interval: equality with an endpoint flags
  return score <= dist.mean - z_p * dist.std || score >= dist.mean + z_p * dist.std;
}

double score_block(const TrainedGan& gan, const Mat& normalized_block) {
  if (normalized_block.rows != gan.window || normalized_block.cols != feature_count(gan.set))
    throw DataError("score_block: block shape does not match model feature set");
  return discriminator_forward(gan.discriminator, normalized_block);
}

double score_raw_block(const TrainedGan& gan, const FeatureBlock& block12) {
  const FeatureBlock proj =
      (gan.set == FeatureSet::All12) ? block12 : project_block(block12, gan.set);
  return score_block(gan, normalize_block(gan.normalizer, proj));
}

BasicResult detect_basic(const BasicDetector& d, const FeatureBlock& block12) {
  if (d.gan.set != FeatureSet::All12) throw DataError("basic detector requires an ALL12 model");
  BasicResult r;
  r.score = score_raw_block(d.gan, block12);
  r.flag = outside_band(d.dist, d.cfg.z_p, r.score) ? 1 : 0;
  return r;
}

EnhancedResult detect_enhanced(const EnhancedDetector& d, const FeatureBlock& block12) {
  if (d.gan_ipq.set != FeatureSet::Ipq9 || d.gan_v.set != FeatureSet::V3)
    throw DataError("enhanced detector requires IPQ9 + V3 models");
  EnhancedResult r;
  r.s1 = score_raw_block(d.gan_ipq, block12);
  r.s2 = score_raw_block(d.gan_v, block12);
  r.fired_ipq = outside_band(d.dist_ipq, d.cfg.z_p, r.s1);
  r.fired_v = outside_band(d.dist_v, d.cfg.z_p, r.s2);
  r.flag = (r.fired_ipq || r.fired_v) ? 1 : 0;
  return r;
}

std::vector<Interval> merge_flags(const std::vector<WindowFlag>& windows, int window_size) {
  std::vector<Interval> out;
  for (const WindowFlag& w : windows) {
    if (!w.flag) continue;
    const std::int64_t end = w.start + window_size;
    if (!out.empty() && w.start <= out.back().end) {
      out.back().end = std::max(out.back().end, end);
    } else {
      out.push_back({w.start, end});
    }
  }
  return out;
}

const char* detector_kind_name(DetectorKind k) {
  switch (k) {
    case DetectorKind::Basic: return "basic";
    case DetectorKind::Enhanced: return "enhanced";
    case DetectorKind::Mad: return "mad";
  }
  return "?";
}

DetectorKind detector_kind_from_name(const std::string& s) {
  if (s == "basic") return DetectorKind::Basic;
  if (s == "enhanced") return DetectorKind::Enhanced;
  if (s == "mad") return DetectorKind::Mad;
  throw ConfigError("unknown detector '" + s + "' (expected basic|enhanced|mad)");
}

StreamDetector StreamDetector::basic(BasicDetector d) {
  validate_detector_config(d.cfg);
  StreamDetector s;
  s.kind_ = DetectorKind::Basic;
  s.cfg_ = d.cfg;
  s.basic_ = std::move(d);
  s.rows_.assign(static_cast<size_t>(s.cfg_.window) * kAllFeatures, 0.0);
  return s;
}

StreamDetector StreamDetector::enhanced(EnhancedDetector d) {
  validate_detector_config(d.cfg);
  StreamDetector s;
  s.kind_ = DetectorKind::Enhanced;
  s.cfg_ = d.cfg;
  s.enhanced_ = std::move(d);
  s.rows_.assign(static_cast<size_t>(s.cfg_.window) * kAllFeatures, 0.0);
  return s;
}

StreamDetector StreamDetector::mad(MadConfig mcfg, DetectorConfig dcfg) {
  validate_detector_config(dcfg);
  validate_mad_config(mcfg);
  StreamDetector s;
  s.kind_ = DetectorKind::Mad;
  s.cfg_ = dcfg;
  s.mad_cfg_ = mcfg;
  s.mad_state_ = std::make_unique<MadSampleDetector>(mcfg, kAllFeatures);
  s.rows_.assign(static_cast<size_t>(s.cfg_.window) * kAllFeatures, 0.0);
  s.anomalous_.assign(static_cast<size_t>(s.cfg_.window), 0);
  return s;
}

std::optional<WindowResult> StreamDetector::push(const PhasorFrame& frame) {
  if (n_samples_ == 0) {
    first_ts_ = frame.ts;
  } else {
    if (frame.ts <= last_ts_) throw DataError("out-of-order timestamp at ts=" + std::to_string(frame.ts));
    if (frame.ts != last_ts_ + 1)
      throw DataError("gap in timestamps (" + std::to_string(last_ts_) + " -> " +
                      std::to_string(frame.ts) + ")");
  }
  last_ts_ = frame.ts;

  const FeatureSample s = derive_features(frame);
  const size_t slot = static_cast<size_t>(n_samples_ % cfg_.window);
  feature_row(s, FeatureSet::All12, rows_.data() + slot * kAllFeatures);
  if (kind_ == DetectorKind::Mad)
    anomalous_[slot] = mad_state_->push(rows_.data() + slot * kAllFeatures) ? 1 : 0;
  n_samples_ += 1;

  if (n_samples_ >= cfg_.window && (n_samples_ - cfg_.window) % cfg_.stride == 0)
    return complete_window();
  return std::nullopt;
}

std::optional<WindowResult> StreamDetector::complete_window() {
  const std::int64_t start = n_samples_ - cfg_.window;
  WindowResult r;
  r.start = first_ts_ + start;
  r.s = r.s1 = r.s2 = std::nan("");

  if (kind_ == DetectorKind::Mad) {
    bool any = false;
    for (char a : anomalous_)
      if (a) any = true;
    r.flag = any ? 1 : 0;
    r.source = "mad";
  } else {
    FeatureBlock block;
    block.set = FeatureSet::All12;
    block.start = r.start;
    block.features = Mat(cfg_.window, kAllFeatures);
    for (int i = 0; i < cfg_.window; ++i) {
      const size_t slot = static_cast<size_t>((start + i) % cfg_.window);
      std::copy_n(rows_.data() + slot * kAllFeatures, kAllFeatures, block.features.row(i));
    }
    if (kind_ == DetectorKind::Basic) {
      const BasicResult b = detect_basic(*basic_, block);
      r.s = b.score;
      r.flag = b.flag;
      r.source = "basic";
    } else {
      const EnhancedResult e = detect_enhanced(*enhanced_, block);
      r.s1 = e.s1;
      r.s2 = e.s2;
      r.flag = e.flag;
      r.source = "enhanced";
      if (e.fired_ipq && e.fired_v) r.source += ":ipq+v";
      else if (e.fired_ipq) r.source += ":ipq";
      else if (e.fired_v) r.source += ":v";
    }
  }
  windows_.push_back(r);
  return r;
}

DetectionReport StreamDetector::report() const {
  DetectionReport rep;
  rep.windows = windows_;
  std::vector<WindowFlag> flags;
  flags.reserve(windows_.size());
  for (const WindowResult& w : windows_) flags.push_back({w.start, w.flag != 0});
  rep.intervals = merge_flags(flags, cfg_.window);
  return rep;
}

namespace {

DetectionReport run_all(StreamDetector&& sd, const std::vector<PhasorFrame>& frames) {
  for (const PhasorFrame& f : frames) sd.push(f);
  return sd.report();
}

}  // namespace

DetectionReport run_stream(const BasicDetector& d, const std::vector<PhasorFrame>& frames) {
  return run_all(StreamDetector::basic(d), frames);
}

DetectionReport run_stream(const EnhancedDetector& d, const std::vector<PhasorFrame>& frames) {
  return run_all(StreamDetector::enhanced(d), frames);
}

DetectionReport run_stream_mad(const MadConfig& mcfg, const DetectorConfig& dcfg,
                               const std::vector<PhasorFrame>& frames) {
  return run_all(StreamDetector::mad(mcfg, dcfg), frames);
}

// ---- model file ----------------------------------------------------------------

void save_model(std::ostream& os, const TrainedGan& gan, const ScoreDistribution& dist) {
  os << "PMUGAN v1\n";
  os << "feature_set " << feature_set_name(gan.set) << '\n';
  os << "window " << gan.window << '\n';
  os << "noise_dim " << gan.noise_dim << '\n';
  os << "normalizer " << gan.normalizer.ranges.size() << '\n';
  for (const auto& r : gan.normalizer.ranges)
    os << fmt_g17(r.lo) << ' ' << fmt_g17(r.hi) << '\n';
  os << "generator\n";
  write_network(os, gan.generator);
  os << "discriminator\n";
  write_network(os, gan.discriminator);
  os << "scoredist " << fmt_g17(dist.mean) << ' ' << fmt_g17(dist.std) << '\n';
  os << "converged " << (gan.diag.converged ? 1 : 0) << '\n';
  os << "restarts " << gan.diag.restarts << '\n';
  os << "end\n";
}

void save_model_file(const std::string& path, const TrainedGan& gan,
                     const ScoreDistribution& dist) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write model file: " + path);
  save_model(os, gan, dist);
  if (!os.good()) throw DataError("write error on model file: " + path);
}

LoadedModel load_model(std::istream& is) {
  std::string magic, version;
  if (!(is >> magic >> version) || magic != "PMUGAN" || version != "v1")
    throw DataError("not a PMUGAN v1 model file");
  LoadedModel m;
  std::string tok, value;
  if (!(is >> tok >> value) || tok != "feature_set") throw DataError("model: expected feature_set");
  m.gan.set = feature_set_from_name(value);
  if (!(is >> tok >> m.gan.window) || tok != "window") throw DataError("model: expected window");
  if (!(is >> tok >> m.gan.noise_dim) || tok != "noise_dim")
    throw DataError("model: expected noise_dim");
  size_t n_ranges = 0;
  if (!(is >> tok >> n_ranges) || tok != "normalizer") throw DataError("model: expected normalizer");
  if (n_ranges != static_cast<size_t>(feature_count(m.gan.set)))
    throw DataError("model: normalizer size does not match feature set");
  m.gan.normalizer.set = m.gan.set;
  m.gan.normalizer.ranges.resize(n_ranges);
  for (auto& r : m.gan.normalizer.ranges)
    if (!(is >> r.lo >> r.hi)) throw DataError("model: truncated normalizer");
  if (!(is >> tok) || tok != "generator") throw DataError("model: expected generator");
  m.gan.generator = read_network(is);
  if (!(is >> tok) || tok != "discriminator") throw DataError("model: expected discriminator");
  m.gan.discriminator = read_network(is);
  if (!(is >> tok >> m.dist.mean >> m.dist.std) || tok != "scoredist")
    throw DataError("model: expected scoredist");
  int conv = 0, restarts = 0;
  if (!(is >> tok >> conv) || tok != "converged") throw DataError("model: expected converged");
  if (!(is >> tok >> restarts) || tok != "restarts") throw DataError("model: expected restarts");
  m.gan.diag.converged = conv != 0;
  m.gan.diag.restarts = restarts;
  if (!(is >> tok) || tok != "end") throw DataError("model: missing end marker");
  if (m.gan.generator.output_activation != OutputActivation::Tanh ||
      m.gan.discriminator.output_activation != OutputActivation::Sigmoid)
    throw DataError("model: head activations do not match roles");
  return m;
}

LoadedModel load_model_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open model file: " + path);
  return load_model(is);
}

// ---- report CSV -------------------------------------------------------------------

const char* const kReportCsvHeader = "window_start,score_s,score_s1,score_s2,flag,source";

namespace {

std::string score_field(double v) { return std::isnan(v) ? std::string() : fmt_g17(v); }

}  // namespace

void write_report_csv(std::ostream& os, const DetectionReport& report) {
  os << kReportCsvHeader << '\n';
  for (const WindowResult& w : report.windows) {
    os << w.start << ',' << score_field(w.s) << ',' << score_field(w.s1) << ','
       << score_field(w.s2) << ',' << w.flag << ',' << w.source << '\n';
  }
}

DetectionReport read_report_csv(std::istream& is, int window_size) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty report file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kReportCsvHeader)
    throw DataError("bad report header: expected '" + std::string(kReportCsvHeader) + "'");
  DetectionReport rep;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string start, s, s1, s2, flag, source;
    if (!std::getline(ss, start, ',') || !std::getline(ss, s, ',') ||
        !std::getline(ss, s1, ',') || !std::getline(ss, s2, ',') ||
        !std::getline(ss, flag, ',') || !std::getline(ss, source))
      throw DataError("report line " + std::to_string(line_no) + ": expected 6 columns");
    WindowResult w;
    w.start = std::strtoll(start.c_str(), nullptr, 10);
    w.s = s.empty() ? std::nan("") : std::strtod(s.c_str(), nullptr);
    w.s1 = s1.empty() ? std::nan("") : std::strtod(s1.c_str(), nullptr);
    w.s2 = s2.empty() ? std::nan("") : std::strtod(s2.c_str(), nullptr);
    w.flag = (flag == "1") ? 1 : 0;
    w.source = source;
    rep.windows.push_back(std::move(w));
  }
  std::vector<WindowFlag> flags;
  flags.reserve(rep.windows.size());
  for (const WindowResult& w : rep.windows) flags.push_back({w.start, w.flag != 0});
  rep.intervals = merge_flags(flags, window_size);
  return rep;
}

const char* const kIntervalsCsvHeader = "t_start,t_end";

void write_intervals_csv(std::ostream& os, const std::vector<Interval>& intervals) {
  os << kIntervalsCsvHeader << '\n';
  for (const Interval& iv : intervals) os << iv.start << ',' << iv.end << '\n';
}

std::vector<Interval> read_intervals_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty intervals file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kIntervalsCsvHeader)
    throw DataError("bad intervals header: expected '" + std::string(kIntervalsCsvHeader) + "'");
  std::vector<Interval> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b)) throw DataError("bad intervals row");
    out.push_back({std::strtoll(a.c_str(), nullptr, 10), std::strtoll(b.c_str(), nullptr, 10)});
  }
  return out;
}

}  // namespace pmugan
