// SPDX-License-Identifier: Apache-2.0
#include "eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace pmugan {

MatchResult match_events(const std::vector<Interval>& detections, const GroundTruth& truth,
                         std::int64_t slack) {
  std::vector<Interval> dets = detections;
  std::sort(dets.begin(), dets.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });

  MatchResult r;
  r.truth_hit.assign(truth.events.size(), false);
  std::vector<bool> det_used(dets.size(), false);

  for (size_t e = 0; e < truth.events.size(); ++e) {
    const TruthEvent& ev = truth.events[e];
    const std::int64_t lo = ev.t_start - slack;
    const std::int64_t hi = ev.t_end + slack;
    for (size_t d = 0; d < dets.size(); ++d) {
      if (det_used[d]) continue;
      if (dets[d].start >= hi) break;  // sorted: nothing later can intersect
      if (dets[d].end > lo && dets[d].start < hi) {
        det_used[d] = true;
        r.truth_hit[e] = true;
        break;
      }
    }
    auto& pk = r.per_kind[ev.spec.kind];
    pk.second += 1;
    if (r.truth_hit[e]) {
      pk.first += 1;
      r.tp += 1;
    } else {
      r.fn += 1;
    }
  }
  for (bool used : det_used)
    if (!used) r.fp += 1;
  return r;
}

Metrics metrics(const MatchResult& m) {
  if (m.tp + m.fp + m.fn == 0) throw DataError("metrics: all counts zero");
  Metrics out;
  out.precision = (m.tp + m.fp > 0) ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
  out.recall = (m.tp + m.fn > 0) ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  out.f1 = (out.precision + out.recall > 0)
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  out.accuracy = static_cast<double>(m.tp) / (m.tp + m.fp + m.fn);
  return out;
}

double kind_recall(const MatchResult& m, EventKind k) {
  auto it = m.per_kind.find(k);
  if (it == m.per_kind.end() || it->second.second == 0) return 0.0;
  return static_cast<double>(it->second.first) / it->second.second;
}

namespace {

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

void write_metrics_csv(std::ostream& os, const std::vector<NamedResult>& rows) {
  os << "detector,precision,recall,f1,accuracy\n";
  for (const NamedResult& r : rows) {
    const Metrics m = metrics(r.match);
    os << r.detector << ',' << fmt4(m.precision) << ',' << fmt4(m.recall) << ','
       << fmt4(m.f1) << ',' << fmt4(m.accuracy) << '\n';
  }
}

void write_kind_recall_csv(std::ostream& os, const std::vector<NamedResult>& rows) {
  os << "detector,kind,hits,total,recall\n";
  for (const NamedResult& r : rows) {
    for (const auto& [kind, counts] : r.match.per_kind) {
      const double rec = counts.second ? static_cast<double>(counts.first) / counts.second : 0.0;
      os << r.detector << ',' << event_kind_name(kind) << ',' << counts.first << ','
         << counts.second << ',' << fmt4(rec) << '\n';
    }
  }
}

std::string format_summary(const std::vector<NamedResult>& rows) {
  std::ostringstream os;
  os << "detector      precision  recall   f1       accuracy  (tp/fp/fn)\n";
  for (const NamedResult& r : rows) {
    const Metrics m = metrics(r.match);
    char line[160];
    std::snprintf(line, sizeof(line), "%-13s %-10.4f %-8.4f %-8.4f %-9.4f (%d/%d/%d)\n",
                  r.detector.c_str(), m.precision, m.recall, m.f1, m.accuracy, r.match.tp,
                  r.match.fp, r.match.fn);
    os << line;
  }
  return os.str();
}

}  // namespace pmugan
