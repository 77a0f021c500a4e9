// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "common.hpp"

namespace pmugan {

inline constexpr int kSampleRate = 120;  // micro-PMU frames per second
inline constexpr int kPhases = 3;
inline constexpr int kAllFeatures = 12;  // V, I, P, Q per phase

// One timestamped three-phase phasor reading. Magnitudes >= 0, angles in
// (-pi, pi], timestamps strictly increasing (and gap-free at ingest).
struct PhasorFrame {
  std::int64_t ts = 0;
  double v_mag[kPhases] = {0, 0, 0};
  double v_ang[kPhases] = {0, 0, 0};
  double i_mag[kPhases] = {0, 0, 0};
  double i_ang[kPhases] = {0, 0, 0};
};

// The twelve derived series, per phase.
struct FeatureSample {
  double v[kPhases] = {0, 0, 0};
  double i[kPhases] = {0, 0, 0};
  double p[kPhases] = {0, 0, 0};
  double q[kPhases] = {0, 0, 0};
};

// Column layout of a 12-feature row: V_A V_B V_C I_A I_B I_C P_A P_B P_C Q_A Q_B Q_C.
// V3 takes columns 0..2, IPQ9 takes columns 3..11.
enum class FeatureSet { All12, V3, Ipq9 };

int feature_count(FeatureSet set);
const char* feature_set_name(FeatureSet set);
FeatureSet feature_set_from_name(const std::string& name);

// P = V*I*cos(dphi), Q = V*I*sin(dphi), dphi = v_ang - i_ang wrapped to (-pi, pi].
FeatureSample derive_features(const PhasorFrame& frame);

// Write the selected columns of `s` into out[0..feature_count(set)).
void feature_row(const FeatureSample& s, FeatureSet set, double* out);

// A window of feature rows.
struct FeatureBlock {
  Mat features;  // W x F
  std::int64_t start = 0;
  FeatureSet set = FeatureSet::All12;
};

// Overlapping windows starting at 0, stride, 2*stride, ...; only full windows.
std::vector<FeatureBlock> window_stream(const std::vector<FeatureSample>& samples,
                                        int size, int stride,
                                        FeatureSet set = FeatureSet::All12);

// Column projection of an All12 block onto V3 or Ipq9.
FeatureBlock project_block(const FeatureBlock& all12, FeatureSet set);

// Per-feature affine map fitted on training data: [lo, hi] -> [-1, 1].
// Values outside the training range extrapolate past +-1 on purpose;
// those excursions are exactly the event signal downstream.
struct Normalizer {
  struct Range {
    double lo = 0.0;
    double hi = 1.0;
  };
  FeatureSet set = FeatureSet::All12;
  std::vector<Range> ranges;  // feature_count(set) entries
};

inline constexpr double kNormalizerEps = 1e-9;  // floor for constant features

Normalizer fit_normalizer(const std::vector<FeatureSample>& training, FeatureSet set);

void normalize_row(const Normalizer& n, const double* in, double* out);
void denormalize_row(const Normalizer& n, const double* in, double* out);

// All12 convenience forms of the two maps above.
FeatureSample normalize(const Normalizer& n, const FeatureSample& s);
FeatureSample denormalize(const Normalizer& n, const FeatureSample& s);

// Block must match the normalizer's feature set.
Mat normalize_block(const Normalizer& n, const FeatureBlock& block);

// CSV stream schema:
//   ts,va_mag,va_ang,vb_mag,vb_ang,vc_mag,vc_ang,ia_mag,ia_ang,ib_mag,ib_ang,ic_mag,ic_ang
// Header row required, angles in radians. Ingest validates magnitudes,
// angle ranges and consecutive timestamps; violations raise DataError.
extern const char* const kStreamCsvHeader;

void write_stream_csv(std::ostream& os, const std::vector<PhasorFrame>& frames);
std::vector<PhasorFrame> read_stream_csv(std::istream& is);

// Parse one data row (used by the streaming front end); `line_no` only for messages.
PhasorFrame parse_stream_row(const std::string& line, long line_no);
void validate_frame(const PhasorFrame& f, long line_no);

}  // namespace pmugan
