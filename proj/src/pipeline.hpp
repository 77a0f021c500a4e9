// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace pmugan {

// High-level operations behind the CLI subcommands and the C API. All paths
// are plain files; errors surface as the typed exceptions from common.hpp.

void cmd_synth(const RunConfig& cfg, const std::string& stream_csv,
               const std::string& truth_csv, std::ostream& log);

// mode "basic": one ALL12 model written to model_out, diagnostics to diag_csv.
// mode "enhanced": two models written to <model_out>.ipq.pmugan and
// <model_out>.v.pmugan, diagnostics to <diag_csv>.ipq.csv / <diag_csv>.v.csv.
// Throws NotConvergedError when equilibrium fails after all restarts (files
// are still written first so the diagnostics can be inspected).
void cmd_train(const RunConfig& cfg, const std::string& train_csv, const std::string& mode,
               const std::string& model_out, const std::string& diag_csv, std::ostream& log);

// detector "basic"|"enhanced"|"mad"; "enhanced" treats model_path as the
// prefix used by cmd_train; "mad" needs no model.
void cmd_detect(const RunConfig& cfg, const std::string& detector,
                const std::string& model_path, const std::string& test_csv,
                const std::string& report_csv, const std::string& intervals_csv,
                std::ostream& log);

// Streaming form: stream CSV rows on `in`, one report row per completed
// window on `out` (flushed per row).
void cmd_detect_stream(const RunConfig& cfg, const std::string& detector,
                       const std::string& model_path, std::istream& in, std::ostream& out);

void cmd_eval(const RunConfig& cfg, const std::string& truth_csv,
              const std::vector<std::string>& report_csvs, const std::string& metrics_csv,
              const std::string& kinds_csv, std::ostream& summary);

// Shared by cmd_detect and the C API streaming handle.
StreamDetector open_detector(const RunConfig& cfg, const std::string& detector,
                             const std::string& model_path);

// Library-level form of cmd_train for one feature set (used by tests too).
struct TrainOutput {
  TrainedGan gan;
  ScoreDistribution dist;
};
TrainOutput train_one(const std::vector<FeatureSample>& samples, FeatureSet set,
                      const RunConfig& cfg, const TrainConfig& tcfg);

}  // namespace pmugan
