// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "phasor.hpp"

namespace pmugan {

// Feeder simulation parameters. Stands in for a real distribution feeder:
// stiff voltage, load-driven current with slow drift, i.i.d. Gaussian
// measurement noise, constant lagging power factor.
struct FeederConfig {
  std::uint64_t seed = 1;
  double duration_s = 60.0;
  double base_v = 7200.0;                    // nominal per-phase voltage magnitude
  double base_i[kPhases] = {100.0, 95.0, 105.0};  // per-phase loading (unbalanced)
  double noise_v = 0.002;                    // relative std-dev of voltage noise
  double noise_i = 0.01;                     // relative std-dev of current noise
  double load_drift_period_s = 300.0;
  double load_drift_depth = 0.02;            // relative drift amplitude on current
  double pf_base = 0.3;                      // power-factor angle, radians lagging
};

// Voltage follows the load drift attenuated by this factor (the feeder head
// holds voltage much stiffer than current).
inline constexpr double kVoltageDriftScale = 0.05;

enum class EventKind {
  Inrush,
  CapBank,
  IpqSmall,
  Oscillation,
  LongTransient,
  VoltageSag,
  VoltageDampedOsc,
};
inline constexpr int kEventKindCount = 7;

const char* event_kind_name(EventKind k);
EventKind event_kind_from_name(const std::string& name);

// Phase subset as a bitmask, bit p = phase p in {A,B,C}.
using PhaseMask = std::uint8_t;
inline constexpr PhaseMask kAllPhases = 0x7;
std::string phase_mask_name(PhaseMask m);
PhaseMask phase_mask_from_name(const std::string& s);

struct EventSpec {
  EventKind kind = EventKind::Inrush;
  std::int64_t t_start = 0;
  std::int64_t duration = 0;   // samples
  PhaseMask phases = kAllPhases;
  double magnitude = 0.0;      // relative amplitude (kind-specific meaning)
  double freq_hz = 0.0;        // oscillatory kinds
  double damping = 0.0;        // 1/seconds, damped kinds
};

struct TruthEvent {
  EventSpec spec;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;  // half-open [t_start, t_end)
};

struct GroundTruth {
  std::vector<TruthEvent> events;  // sorted by t_start, non-overlapping
};

// Deterministic per seed. No events.
std::vector<PhasorFrame> generate_normal(const FeederConfig& cfg);

// Modifies frames inside [t_start, t_start+duration) on the listed phases only.
void inject_event(std::vector<PhasorFrame>& stream, const EventSpec& spec);

// Normal stream with all events injected; specs must be disjoint and in bounds.
std::pair<std::vector<PhasorFrame>, GroundTruth> build_corpus(
    const FeederConfig& cfg, const std::vector<EventSpec>& specs);

// Randomized labeled event plan used by the CLI and the evaluation corpus.
// Magnitude tiers are relative multiples of the feeder noise floor: voltage
// kinds and the small current kinds (IPQ_SMALL, OSCILLATION) draw from the
// small tier, the rest from the large tier.
struct EventPlanConfig {
  int n_events = 0;
  std::uint64_t seed = 7;
  double spacing_s = 4.0;      // minimum gap between events
  double small_lo = 1.0;       // small tier, x noise std-dev
  double small_hi = 3.0;
  double large_lo = 10.0;      // large tier, x noise std-dev
  double large_hi = 30.0;
  std::vector<EventKind> kinds;  // empty = all seven
};

std::vector<EventSpec> make_event_plan(const FeederConfig& feeder,
                                       const EventPlanConfig& plan,
                                       std::int64_t n_frames);

// Ground-truth CSV: kind,t_start,t_end,phases,magnitude
extern const char* const kTruthCsvHeader;
void write_truth_csv(std::ostream& os, const GroundTruth& truth);
GroundTruth read_truth_csv(std::istream& is);

}  // namespace pmugan
