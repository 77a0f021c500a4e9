// SPDX-License-Identifier: Apache-2.0
#include "pipeline.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "eval.hpp"

namespace pmugan {

namespace {

std::vector<PhasorFrame> read_frames_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open stream file: " + path);
  return read_stream_csv(is);
}

void write_text_file(const std::string& path, const std::string& what,
                     const std::function<void(std::ostream&)>& fn) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + what + ": " + path);
  fn(os);
  if (!os.good()) throw DataError("write error on " + what + ": " + path);
}

std::vector<FeatureSample> derive_all(const std::vector<PhasorFrame>& frames) {
  std::vector<FeatureSample> samples;
  samples.reserve(frames.size());
  for (const PhasorFrame& f : frames) samples.push_back(derive_features(f));
  return samples;
}

}  // namespace

void cmd_synth(const RunConfig& cfg, const std::string& stream_csv,
               const std::string& truth_csv, std::ostream& log) {
  validate_config(cfg);
  std::vector<PhasorFrame> stream;
  GroundTruth truth;
  if (cfg.synth.n_events > 0) {
    const std::int64_t n_frames = static_cast<std::int64_t>(cfg.feeder.duration_s * kSampleRate + 0.5);
    const auto plan = make_event_plan(cfg.feeder, cfg.synth, n_frames);
    auto corpus = build_corpus(cfg.feeder, plan);
    stream = std::move(corpus.first);
    truth = std::move(corpus.second);
  } else {
    stream = generate_normal(cfg.feeder);
  }
  write_text_file(stream_csv, "stream CSV",
                  [&](std::ostream& os) { write_stream_csv(os, stream); });
  write_text_file(truth_csv, "truth CSV", [&](std::ostream& os) { write_truth_csv(os, truth); });
  log << "synth: " << stream.size() << " frames, " << truth.events.size() << " events -> "
      << stream_csv << ", " << truth_csv << "\n";
}

TrainOutput train_one(const std::vector<FeatureSample>& samples, FeatureSet set,
                      const RunConfig& cfg, const TrainConfig& tcfg) {
  const Normalizer norm = fit_normalizer(samples, set);
  const auto blocks = window_stream(samples, cfg.window_size, cfg.window_stride, set);
  if (blocks.empty()) throw DataError("training stream shorter than one window");
  std::vector<Mat> normalized;
  normalized.reserve(blocks.size());
  for (const FeatureBlock& b : blocks) normalized.push_back(normalize_block(norm, b));

  TrainOutput out;
  out.gan = train_gan(normalized, norm, set, cfg.window_size, tcfg);

  // score every training block with the final discriminator and fit the Normal
  std::vector<double> scores;
  scores.reserve(normalized.size());
  for (const Mat& m : normalized) scores.push_back(score_block(out.gan, m));
  out.dist = fit_score_distribution(scores);
  return out;
}

void cmd_train(const RunConfig& cfg, const std::string& train_csv, const std::string& mode,
               const std::string& model_out, const std::string& diag_csv, std::ostream& log) {
  validate_config(cfg);
  if (mode != "basic" && mode != "enhanced")
    throw ConfigError("unknown train mode '" + mode + "' (expected basic|enhanced)");
  const auto frames = read_frames_file(train_csv);
  const auto samples = derive_all(frames);

  auto run = [&](FeatureSet set, const TrainConfig& tcfg, const std::string& model_path,
                 const std::string& diag_path) {
    TrainOutput t = train_one(samples, set, cfg, tcfg);
    write_text_file(diag_path, "diagnostics CSV",
                    [&](std::ostream& os) { write_diagnostics_csv(os, t.gan.diag); });
    save_model_file(model_path, t.gan, t.dist);
    log << "train[" << feature_set_name(set) << "]: " << (t.gan.diag.converged ? "converged" : "NOT CONVERGED")
        << " after " << t.gan.diag.restarts << " restart(s), m_real=" << fmt_g17(t.gan.diag.m_real)
        << " m_fake=" << fmt_g17(t.gan.diag.m_fake) << " -> " << model_path << "\n";
    return t.gan.diag.converged;
  };

  bool ok;
  std::string diag_paths;
  if (mode == "basic") {
    ok = run(FeatureSet::All12, cfg.train, model_out, diag_csv);
    diag_paths = diag_csv;
  } else {
    TrainConfig tv = cfg.train;
    tv.seed = cfg.train.seed + 1000003;  // independent stream for the second model
    const bool ok1 = run(FeatureSet::Ipq9, cfg.train, model_out + ".ipq.pmugan", diag_csv + ".ipq.csv");
    const bool ok2 = run(FeatureSet::V3, tv, model_out + ".v.pmugan", diag_csv + ".v.csv");
    ok = ok1 && ok2;
    diag_paths = diag_csv + ".ipq.csv, " + diag_csv + ".v.csv";
  }
  if (!ok)
    throw NotConvergedError("training did not reach equilibrium after " +
                            std::to_string(cfg.train.max_restarts) +
                            " restart(s); diagnostics at " + diag_paths);
}

StreamDetector open_detector(const RunConfig& cfg, const std::string& detector,
                             const std::string& model_path) {
  validate_config(cfg);
  const DetectorKind kind = detector_kind_from_name(detector);
  const DetectorConfig dcfg = cfg.detector_cfg();
  if (kind == DetectorKind::Mad) return StreamDetector::mad(cfg.mad, dcfg);

  if (kind == DetectorKind::Basic) {
    LoadedModel m = load_model_file(model_path);
    if (m.gan.set != FeatureSet::All12)
      throw DataError("feature set mismatch: basic detector needs an ALL12 model, got " +
                      std::string(feature_set_name(m.gan.set)));
    if (m.gan.window != dcfg.window)
      throw DataError("model window " + std::to_string(m.gan.window) +
                      " does not match window.size " + std::to_string(dcfg.window));
    return StreamDetector::basic({std::move(m.gan), m.dist, dcfg});
  }

  // enhanced: <prefix>.ipq.pmugan + <prefix>.v.pmugan; a single model file
  // passed here is a feature-set mismatch by construction
  std::ifstream probe(model_path + ".ipq.pmugan");
  if (!probe) {
    std::ifstream single(model_path);
    if (single) {
      LoadedModel m = load_model(single);
      throw DataError("feature set mismatch: enhanced detector needs IPQ9 + V3 models, got one " +
                      std::string(feature_set_name(m.gan.set)) + " model");
    }
    throw DataError("cannot open model file: " + model_path + ".ipq.pmugan");
  }
  LoadedModel ipq = load_model_file(model_path + ".ipq.pmugan");
  LoadedModel v = load_model_file(model_path + ".v.pmugan");
  if (ipq.gan.set != FeatureSet::Ipq9 || v.gan.set != FeatureSet::V3)
    throw DataError("feature set mismatch: expected IPQ9 + V3 models, got " +
                    std::string(feature_set_name(ipq.gan.set)) + " + " +
                    std::string(feature_set_name(v.gan.set)));
  if (ipq.gan.window != dcfg.window || v.gan.window != dcfg.window)
    throw DataError("model window does not match window.size");
  return StreamDetector::enhanced(
      {std::move(ipq.gan), ipq.dist, std::move(v.gan), v.dist, dcfg});
}

void cmd_detect(const RunConfig& cfg, const std::string& detector,
                const std::string& model_path, const std::string& test_csv,
                const std::string& report_csv, const std::string& intervals_csv,
                std::ostream& log) {
  StreamDetector sd = open_detector(cfg, detector, model_path);
  const auto frames = read_frames_file(test_csv);
  for (const PhasorFrame& f : frames) sd.push(f);
  const DetectionReport rep = sd.report();
  write_text_file(report_csv, "report CSV",
                  [&](std::ostream& os) { write_report_csv(os, rep); });
  write_text_file(intervals_csv, "intervals CSV",
                  [&](std::ostream& os) { write_intervals_csv(os, rep.intervals); });
  size_t flagged = 0;
  for (const WindowResult& w : rep.windows) flagged += static_cast<size_t>(w.flag);
  log << "detect[" << detector << "]: " << rep.windows.size() << " windows, " << flagged
      << " flagged, " << rep.intervals.size() << " merged intervals -> " << report_csv << "\n";
}

void cmd_detect_stream(const RunConfig& cfg, const std::string& detector,
                       const std::string& model_path, std::istream& in, std::ostream& out) {
  StreamDetector sd = open_detector(cfg, detector, model_path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input stream");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kStreamCsvHeader)
    throw DataError("bad stream header: expected '" + std::string(kStreamCsvHeader) + "'");
  out << kReportCsvHeader << '\n';
  long line_no = 1;
  DetectionReport one;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const PhasorFrame f = parse_stream_row(line, line_no);
    if (auto w = sd.push(f)) {
      one.windows.assign(1, *w);
      // reuse the CSV row format, header already emitted
      std::ostringstream row;
      write_report_csv(row, one);
      const std::string text = row.str();
      out << text.substr(text.find('\n') + 1);
      out.flush();
    }
  }
}

void cmd_eval(const RunConfig& cfg, const std::string& truth_csv,
              const std::vector<std::string>& report_csvs, const std::string& metrics_csv,
              const std::string& kinds_csv, std::ostream& summary) {
  validate_config(cfg);
  if (report_csvs.empty()) throw ConfigError("eval: at least one report CSV required");
  std::ifstream ts(truth_csv);
  if (!ts) throw DataError("cannot open truth file: " + truth_csv);
  const GroundTruth truth = read_truth_csv(ts);

  std::vector<NamedResult> rows;
  for (const std::string& path : report_csvs) {
    std::ifstream rs(path);
    if (!rs) throw DataError("cannot open report file: " + path);
    const DetectionReport rep = read_report_csv(rs, cfg.window_size);
    std::string label;
    if (!rep.windows.empty()) {
      label = rep.windows.front().source;
      const size_t colon = label.find(':');
      if (colon != std::string::npos) label.erase(colon);
    }
    if (label.empty()) {
      // fall back to the file stem
      label = path;
      const size_t slash = label.find_last_of('/');
      if (slash != std::string::npos) label.erase(0, slash + 1);
      const size_t dot = label.find_last_of('.');
      if (dot != std::string::npos) label.erase(dot);
    }
    rows.push_back({label, match_events(rep.intervals, truth, cfg.eval_slack)});
  }
  write_text_file(metrics_csv, "metrics CSV",
                  [&](std::ostream& os) { write_metrics_csv(os, rows); });
  write_text_file(kinds_csv, "per-kind recall CSV",
                  [&](std::ostream& os) { write_kind_recall_csv(os, rows); });
  summary << format_summary(rows);
}

}  // namespace pmugan
