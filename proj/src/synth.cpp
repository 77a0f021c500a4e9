// SPDX-License-Identifier: Apache-2.0
#include "synth.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace pmugan {

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Inrush: return "INRUSH";
    case EventKind::CapBank: return "CAP_BANK";
    case EventKind::IpqSmall: return "IPQ_SMALL";
    case EventKind::Oscillation: return "OSCILLATION";
    case EventKind::LongTransient: return "LONG_TRANSIENT";
    case EventKind::VoltageSag: return "VOLTAGE_SAG";
    case EventKind::VoltageDampedOsc: return "VOLTAGE_DAMPED_OSC";
  }
  return "?";
}

EventKind event_kind_from_name(const std::string& name) {
  for (int k = 0; k < kEventKindCount; ++k)
    if (name == event_kind_name(static_cast<EventKind>(k))) return static_cast<EventKind>(k);
  throw DataError("unknown event kind: " + name);
}

std::string phase_mask_name(PhaseMask m) {
  std::string s;
  if (m & 1) s += 'A';
  if (m & 2) s += 'B';
  if (m & 4) s += 'C';
  return s;
}

PhaseMask phase_mask_from_name(const std::string& s) {
  PhaseMask m = 0;
  for (char c : s) {
    if (c == 'A') m |= 1;
    else if (c == 'B') m |= 2;
    else if (c == 'C') m |= 4;
    else throw DataError("bad phase list: " + s);
  }
  if (m == 0) throw DataError("empty phase list");
  return m;
}

std::vector<PhasorFrame> generate_normal(const FeederConfig& cfg) {
  if (cfg.duration_s <= 0) throw ConfigError("feeder.duration_s must be > 0");
  if (cfg.noise_v < 0 || cfg.noise_i < 0) throw ConfigError("feeder noise levels must be >= 0");
  if (cfg.base_v <= 0 || cfg.base_i[0] <= 0 || cfg.base_i[1] <= 0 || cfg.base_i[2] <= 0)
    throw ConfigError("feeder base magnitudes must be > 0");

  const std::int64_t n = static_cast<std::int64_t>(cfg.duration_s * kSampleRate + 0.5);
  static const double phase_offset[kPhases] = {0.0, -2.0 * M_PI / 3.0, 2.0 * M_PI / 3.0};
  const double drift_w = (cfg.load_drift_period_s > 0)
                             ? 2.0 * M_PI / (kSampleRate * cfg.load_drift_period_s)
                             : 0.0;
  Rng rng(cfg.seed);
  std::vector<PhasorFrame> out(static_cast<size_t>(n));
  for (std::int64_t t = 0; t < n; ++t) {
    PhasorFrame& f = out[static_cast<size_t>(t)];
    f.ts = t;
    const double drift = cfg.load_drift_depth * std::sin(drift_w * static_cast<double>(t));
    for (int p = 0; p < kPhases; ++p) {
      const double gv = rng.gaussian();
      const double ga = rng.gaussian();
      const double gi = rng.gaussian();
      const double gia = rng.gaussian();
      f.v_mag[p] = std::max(0.0, cfg.base_v * (1.0 + kVoltageDriftScale * drift + cfg.noise_v * gv));
      f.v_ang[p] = wrap_angle(phase_offset[p] + cfg.noise_v * ga);
      f.i_mag[p] = std::max(0.0, cfg.base_i[p] * (1.0 + drift + cfg.noise_i * gi));
      f.i_ang[p] = wrap_angle(f.v_ang[p] - cfg.pf_base + cfg.noise_i * gia);
    }
  }
  return out;
}

void inject_event(std::vector<PhasorFrame>& stream, const EventSpec& spec) {
  const std::int64_t n = static_cast<std::int64_t>(stream.size());
  if (spec.t_start < 0 || spec.duration <= 0 || spec.t_start + spec.duration > n)
    throw DataError("event interval out of bounds");
  if (spec.phases == 0) throw DataError("event phase set empty");

  for (std::int64_t t = spec.t_start; t < spec.t_start + spec.duration; ++t) {
    PhasorFrame& f = stream[static_cast<size_t>(t)];
    const double rel = static_cast<double>(t - spec.t_start);
    const double tau = rel / static_cast<double>(spec.duration);
    const double secs = rel / kSampleRate;
    for (int p = 0; p < kPhases; ++p) {
      if (!(spec.phases & (1u << p))) continue;
      switch (spec.kind) {
        case EventKind::Inrush:
          f.i_mag[p] *= 1.0 + spec.magnitude * std::exp(-3.0 * tau);
          break;
        case EventKind::CapBank:
          // reactive step: current angle jumps toward the voltage, with a
          // small sympathetic voltage rise, both persisting to interval end
          f.i_ang[p] = wrap_angle(f.i_ang[p] + spec.magnitude);
          f.v_mag[p] *= 1.0 + 0.05 * spec.magnitude;
          break;
        case EventKind::IpqSmall: {
          // ramp current up but hold Q fixed by closing the V-I angle, so the
          // signature lands on I and P only
          const double scale = 1.0 + spec.magnitude * std::min(1.0, tau / 0.25);
          const double delta = wrap_angle(f.v_ang[p] - f.i_ang[p]);
          const double s = std::clamp(std::sin(delta) / scale, -1.0, 1.0);
          f.i_mag[p] *= scale;
          f.i_ang[p] = wrap_angle(f.v_ang[p] - std::asin(s));
          break;
        }
        case EventKind::Oscillation:
          f.i_mag[p] *= 1.0 + spec.magnitude * std::sin(2.0 * M_PI * spec.freq_hz * secs);
          break;
        case EventKind::LongTransient: {
          // step at onset, then a slowly relaxing plateau with a gentle wobble
          const double env = (0.4 + 0.6 * std::exp(-2.0 * tau)) *
                             (1.0 + 0.08 * std::sin(2.0 * M_PI * 3.0 * tau));
          f.i_mag[p] *= 1.0 + spec.magnitude * env;
          break;
        }
        case EventKind::VoltageSag:
          f.v_mag[p] *= 1.0 - spec.magnitude;
          break;
        case EventKind::VoltageDampedOsc:
          f.v_mag[p] *= 1.0 + spec.magnitude * std::sin(2.0 * M_PI * spec.freq_hz * secs) *
                                  std::exp(-spec.damping * secs);
          break;
      }
    }
  }
}

std::pair<std::vector<PhasorFrame>, GroundTruth> build_corpus(
    const FeederConfig& cfg, const std::vector<EventSpec>& specs) {
  std::vector<EventSpec> sorted = specs;
  std::sort(sorted.begin(), sorted.end(),
            [](const EventSpec& a, const EventSpec& b) { return a.t_start < b.t_start; });
  for (size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].t_start < sorted[k - 1].t_start + sorted[k - 1].duration)
      throw DataError("overlapping event specs at t=" + std::to_string(sorted[k].t_start));
  }
  std::vector<PhasorFrame> stream = generate_normal(cfg);
  GroundTruth truth;
  truth.events.reserve(sorted.size());
  for (const EventSpec& s : sorted) {
    inject_event(stream, s);
    truth.events.push_back({s, s.t_start, s.t_start + s.duration});
  }
  return {std::move(stream), std::move(truth)};
}

namespace {

bool is_voltage_kind(EventKind k) {
  return k == EventKind::VoltageSag || k == EventKind::VoltageDampedOsc;
}

bool is_small_tier(EventKind k) {
  return k == EventKind::IpqSmall || k == EventKind::Oscillation || is_voltage_kind(k);
}

// duration range in seconds per kind
void duration_range(EventKind k, double* lo, double* hi) {
  switch (k) {
    case EventKind::Inrush: *lo = 0.5; *hi = 2.0; break;
    case EventKind::CapBank: *lo = 1.0; *hi = 3.0; break;
    case EventKind::IpqSmall: *lo = 1.0; *hi = 3.0; break;
    case EventKind::Oscillation: *lo = 1.0; *hi = 3.0; break;
    case EventKind::LongTransient: *lo = 20.0; *hi = 25.0; break;
    case EventKind::VoltageSag: *lo = 0.5; *hi = 1.5; break;
    case EventKind::VoltageDampedOsc: *lo = 1.0; *hi = 2.0; break;
  }
}

}  // namespace

std::vector<EventSpec> make_event_plan(const FeederConfig& feeder,
                                       const EventPlanConfig& plan,
                                       std::int64_t n_frames) {
  std::vector<EventKind> kinds = plan.kinds;
  if (kinds.empty())
    for (int k = 0; k < kEventKindCount; ++k) kinds.push_back(static_cast<EventKind>(k));

  Rng rng(plan.seed);
  std::vector<EventSpec> specs;
  specs.reserve(static_cast<size_t>(plan.n_events));
  std::int64_t cursor = 5 * kSampleRate;  // leave a clean lead-in
  for (int e = 0; e < plan.n_events; ++e) {
    EventSpec s;
    s.kind = kinds[static_cast<size_t>(e) % kinds.size()];  // round-robin: every kind appears

    double dlo, dhi;
    duration_range(s.kind, &dlo, &dhi);
    s.duration = static_cast<std::int64_t>(rng.uniform(dlo, dhi) * kSampleRate);

    const double noise = is_voltage_kind(s.kind) ? feeder.noise_v : feeder.noise_i;
    const double mult = is_small_tier(s.kind) ? rng.uniform(plan.small_lo, plan.small_hi)
                                              : rng.uniform(plan.large_lo, plan.large_hi);
    s.magnitude = mult * noise;

    if (s.kind == EventKind::Oscillation) s.freq_hz = rng.uniform(5.0, 15.0);
    if (s.kind == EventKind::VoltageDampedOsc) {
      s.freq_hz = rng.uniform(10.0, 25.0);
      s.damping = rng.uniform(2.0, 6.0);
    }

    const int n_ph = 1 + static_cast<int>(rng.index(3));
    PhaseMask m = 0;
    while (std::popcount(static_cast<unsigned>(m)) < n_ph)
      m |= static_cast<PhaseMask>(1u << rng.index(3));
    s.phases = m;

    const double gap_s = plan.spacing_s * (1.0 + rng.uniform01());
    s.t_start = cursor + static_cast<std::int64_t>(gap_s * kSampleRate);
    cursor = s.t_start + s.duration;
    if (cursor + kSampleRate > n_frames)
      throw ConfigError("stream too short for requested event plan (" +
                        std::to_string(plan.n_events) + " events)");
    specs.push_back(s);
  }
  return specs;
}

const char* const kTruthCsvHeader = "kind,t_start,t_end,phases,magnitude";

void write_truth_csv(std::ostream& os, const GroundTruth& truth) {
  os << kTruthCsvHeader << '\n';
  for (const TruthEvent& e : truth.events) {
    os << event_kind_name(e.spec.kind) << ',' << e.t_start << ',' << e.t_end << ','
       << phase_mask_name(e.spec.phases) << ',' << fmt_g17(e.spec.magnitude) << '\n';
  }
}

GroundTruth read_truth_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty truth file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTruthCsvHeader)
    throw DataError("bad truth header: expected '" + std::string(kTruthCsvHeader) + "'");
  GroundTruth truth;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string kind, ts, te, ph, mag;
    if (!std::getline(ss, kind, ',') || !std::getline(ss, ts, ',') ||
        !std::getline(ss, te, ',') || !std::getline(ss, ph, ',') || !std::getline(ss, mag))
      throw DataError("truth line " + std::to_string(line_no) + ": expected 5 columns");
    TruthEvent e;
    e.spec.kind = event_kind_from_name(kind);
    e.t_start = std::strtoll(ts.c_str(), nullptr, 10);
    e.t_end = std::strtoll(te.c_str(), nullptr, 10);
    e.spec.t_start = e.t_start;
    e.spec.duration = e.t_end - e.t_start;
    e.spec.phases = phase_mask_from_name(ph);
    e.spec.magnitude = std::strtod(mag.c_str(), nullptr);
    if (e.t_end <= e.t_start)
      throw DataError("truth line " + std::to_string(line_no) + ": empty interval");
    truth.events.push_back(e);
  }
  std::sort(truth.events.begin(), truth.events.end(),
            [](const TruthEvent& a, const TruthEvent& b) { return a.t_start < b.t_start; });
  return truth;
}

}  // namespace pmugan
