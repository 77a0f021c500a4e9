// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "detector.hpp"
#include "synth.hpp"

namespace pmugan {

struct MatchResult {
  int tp = 0, fp = 0, fn = 0;
  std::vector<bool> truth_hit;                 // per truth event, in truth order
  std::map<EventKind, std::pair<int, int>> per_kind;  // kind -> (hits, total)
};

// Event-level matching: a truth event is TP when some detection interval
// intersects its slack-extended interval; each detection matches at most one
// truth event (greedy in time order). tp + fn always equals |truth|.
MatchResult match_events(const std::vector<Interval>& detections, const GroundTruth& truth,
                         std::int64_t slack);

struct Metrics {
  double precision = 0, recall = 0, f1 = 0, accuracy = 0;
};

// accuracy = tp / (tp + fp + fn): event-level TN is unbounded, so a
// Jaccard-style count is used instead of the usual confusion-matrix form.
Metrics metrics(const MatchResult& m);

double kind_recall(const MatchResult& m, EventKind k);

// Comparison report CSV: detector,precision,recall,f1,accuracy
// Per-kind recall CSV: detector,kind,hits,total,recall
struct NamedResult {
  std::string detector;
  MatchResult match;
};
void write_metrics_csv(std::ostream& os, const std::vector<NamedResult>& rows);
void write_kind_recall_csv(std::ostream& os, const std::vector<NamedResult>& rows);
std::string format_summary(const std::vector<NamedResult>& rows);

}  // namespace pmugan
