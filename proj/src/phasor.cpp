// SPDX-License-Identifier: Apache-2.0
#include "phasor.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace pmugan {

int feature_count(FeatureSet set) {
  switch (set) {
    case FeatureSet::All12: return 12;
    case FeatureSet::V3: return 3;
    case FeatureSet::Ipq9: return 9;
  }
  return 0;
}

const char* feature_set_name(FeatureSet set) {
  switch (set) {
    case FeatureSet::All12: return "ALL12";
    case FeatureSet::V3: return "V3";
    case FeatureSet::Ipq9: return "IPQ9";
  }
  return "?";
}

FeatureSet feature_set_from_name(const std::string& name) {
  if (name == "ALL12") return FeatureSet::All12;
  if (name == "V3") return FeatureSet::V3;
  if (name == "IPQ9") return FeatureSet::Ipq9;
  throw DataError("unknown feature set: " + name);
}

FeatureSample derive_features(const PhasorFrame& frame) {
  FeatureSample s;
  for (int p = 0; p < kPhases; ++p) {
    const double dphi = wrap_angle(frame.v_ang[p] - frame.i_ang[p]);
    s.v[p] = frame.v_mag[p];
    s.i[p] = frame.i_mag[p];
    s.p[p] = frame.v_mag[p] * frame.i_mag[p] * std::cos(dphi);
    s.q[p] = frame.v_mag[p] * frame.i_mag[p] * std::sin(dphi);
  }
  return s;
}

void feature_row(const FeatureSample& s, FeatureSet set, double* out) {
  switch (set) {
    case FeatureSet::All12:
      for (int p = 0; p < kPhases; ++p) {
        out[p] = s.v[p];
        out[3 + p] = s.i[p];
        out[6 + p] = s.p[p];
        out[9 + p] = s.q[p];
      }
      break;
    case FeatureSet::V3:
      for (int p = 0; p < kPhases; ++p) out[p] = s.v[p];
      break;
    case FeatureSet::Ipq9:
      for (int p = 0; p < kPhases; ++p) {
        out[p] = s.i[p];
        out[3 + p] = s.p[p];
        out[6 + p] = s.q[p];
      }
      break;
  }
}

std::vector<FeatureBlock> window_stream(const std::vector<FeatureSample>& samples,
                                        int size, int stride, FeatureSet set) {
  if (size < 1) throw ConfigError("window size must be >= 1");
  if (stride < 1 || stride > size) throw ConfigError("window stride must be in [1, size]");
  std::vector<FeatureBlock> blocks;
  const long n = static_cast<long>(samples.size());
  if (n < size) return blocks;
  blocks.reserve(static_cast<size_t>((n - size) / stride + 1));
  const int nf = feature_count(set);
  for (long start = 0; start + size <= n; start += stride) {
    FeatureBlock b;
    b.start = start;
    b.set = set;
    b.features = Mat(size, nf);
    for (int r = 0; r < size; ++r) feature_row(samples[start + r], set, b.features.row(r));
    blocks.push_back(std::move(b));
  }
  return blocks;
}

namespace {

// Source columns in the All12 layout for each set.
void set_columns(FeatureSet set, int* cols, int* n) {
  *n = feature_count(set);
  if (set == FeatureSet::V3) {
    for (int k = 0; k < 3; ++k) cols[k] = k;
  } else if (set == FeatureSet::Ipq9) {
    for (int k = 0; k < 9; ++k) cols[k] = 3 + k;
  } else {
    for (int k = 0; k < 12; ++k) cols[k] = k;
  }
}

}  // namespace

FeatureBlock project_block(const FeatureBlock& all12, FeatureSet set) {
  if (all12.set != FeatureSet::All12)
    throw DataError("project_block requires an ALL12 block");
  FeatureBlock b;
  b.start = all12.start;
  b.set = set;
  int cols[12], nf;
  set_columns(set, cols, &nf);
  b.features = Mat(all12.features.rows, nf);
  for (int r = 0; r < all12.features.rows; ++r) {
    const double* src = all12.features.row(r);
    double* dst = b.features.row(r);
    for (int k = 0; k < nf; ++k) dst[k] = src[cols[k]];
  }
  return b;
}

Normalizer fit_normalizer(const std::vector<FeatureSample>& training, FeatureSet set) {
  if (training.empty()) throw DataError("no training data");
  const int nf = feature_count(set);
  Normalizer n;
  n.set = set;
  n.ranges.assign(nf, {});
  double row[kAllFeatures];
  feature_row(training[0], set, row);
  for (int k = 0; k < nf; ++k) n.ranges[k] = {row[k], row[k]};
  for (const FeatureSample& s : training) {
    feature_row(s, set, row);
    for (int k = 0; k < nf; ++k) {
      n.ranges[k].lo = std::min(n.ranges[k].lo, row[k]);
      n.ranges[k].hi = std::max(n.ranges[k].hi, row[k]);
    }
  }
  for (auto& r : n.ranges)
    if (r.hi - r.lo < kNormalizerEps) r.hi = r.lo + kNormalizerEps;
  return n;
}

void normalize_row(const Normalizer& n, const double* in, double* out) {
  for (size_t k = 0; k < n.ranges.size(); ++k) {
    const auto& r = n.ranges[k];
    out[k] = 2.0 * (in[k] - r.lo) / (r.hi - r.lo) - 1.0;
  }
}

void denormalize_row(const Normalizer& n, const double* in, double* out) {
  for (size_t k = 0; k < n.ranges.size(); ++k) {
    const auto& r = n.ranges[k];
    out[k] = r.lo + (in[k] + 1.0) * 0.5 * (r.hi - r.lo);
  }
}

namespace {

FeatureSample sample_from_row12(const double* row) {
  FeatureSample s;
  for (int p = 0; p < kPhases; ++p) {
    s.v[p] = row[p];
    s.i[p] = row[3 + p];
    s.p[p] = row[6 + p];
    s.q[p] = row[9 + p];
  }
  return s;
}

}  // namespace

FeatureSample normalize(const Normalizer& n, const FeatureSample& s) {
  if (n.set != FeatureSet::All12) throw DataError("normalize(FeatureSample) requires an ALL12 normalizer");
  double in[kAllFeatures], out[kAllFeatures];
  feature_row(s, FeatureSet::All12, in);
  normalize_row(n, in, out);
  return sample_from_row12(out);
}

FeatureSample denormalize(const Normalizer& n, const FeatureSample& s) {
  if (n.set != FeatureSet::All12) throw DataError("denormalize(FeatureSample) requires an ALL12 normalizer");
  double in[kAllFeatures], out[kAllFeatures];
  feature_row(s, FeatureSet::All12, in);
  denormalize_row(n, in, out);
  return sample_from_row12(out);
}

Mat normalize_block(const Normalizer& n, const FeatureBlock& block) {
  if (n.set != block.set) throw DataError("normalizer feature set does not match block");
  Mat out(block.features.rows, block.features.cols);
  for (int r = 0; r < block.features.rows; ++r)
    normalize_row(n, block.features.row(r), out.row(r));
  return out;
}

const char* const kStreamCsvHeader =
    "ts,va_mag,va_ang,vb_mag,vb_ang,vc_mag,vc_ang,ia_mag,ia_ang,ib_mag,ib_ang,ic_mag,ic_ang";

void write_stream_csv(std::ostream& os, const std::vector<PhasorFrame>& frames) {
  os << kStreamCsvHeader << '\n';
  for (const PhasorFrame& f : frames) {
    os << f.ts;
    for (int p = 0; p < kPhases; ++p)
      os << ',' << fmt_g17(f.v_mag[p]) << ',' << fmt_g17(f.v_ang[p]);
    for (int p = 0; p < kPhases; ++p)
      os << ',' << fmt_g17(f.i_mag[p]) << ',' << fmt_g17(f.i_ang[p]);
    os << '\n';
  }
}

namespace {

// Split a simple CSV row (no quoting in any of our schemas).
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, long line_no, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw DataError("line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
  return v;
}

}  // namespace

void validate_frame(const PhasorFrame& f, long line_no) {
  const std::string at = "line " + std::to_string(line_no) + ": ";
  for (int p = 0; p < kPhases; ++p) {
    if (!(f.v_mag[p] >= 0.0) || !(f.i_mag[p] >= 0.0))
      throw DataError(at + "negative magnitude");
    for (double a : {f.v_ang[p], f.i_ang[p]}) {
      if (!std::isfinite(a) || a <= -M_PI - 1e-9 || a > M_PI + 1e-9)
        throw DataError(at + "angle outside (-pi, pi]");
    }
    if (!std::isfinite(f.v_mag[p]) || !std::isfinite(f.i_mag[p]))
      throw DataError(at + "non-finite magnitude");
  }
}

PhasorFrame parse_stream_row(const std::string& line, long line_no) {
  const auto f = split_csv(line);
  if (f.size() != 13)
    throw DataError("line " + std::to_string(line_no) + ": expected 13 columns, got " +
                    std::to_string(f.size()));
  PhasorFrame frame;
  char* end = nullptr;
  frame.ts = std::strtoll(f[0].c_str(), &end, 10);
  if (end == f[0].c_str() || *end != '\0')
    throw DataError("line " + std::to_string(line_no) + ": bad ts value '" + f[0] + "'");
  for (int p = 0; p < kPhases; ++p) {
    frame.v_mag[p] = parse_double(f[1 + 2 * p], line_no, "v_mag");
    frame.v_ang[p] = parse_double(f[2 + 2 * p], line_no, "v_ang");
    frame.i_mag[p] = parse_double(f[7 + 2 * p], line_no, "i_mag");
    frame.i_ang[p] = parse_double(f[8 + 2 * p], line_no, "i_ang");
  }
  validate_frame(frame, line_no);
  return frame;
}

std::vector<PhasorFrame> read_stream_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty stream file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kStreamCsvHeader)
    throw DataError("bad stream header: expected '" + std::string(kStreamCsvHeader) + "'");
  std::vector<PhasorFrame> frames;
  long line_no = 1;
  bool have_prev = false;
  std::int64_t prev_ts = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    PhasorFrame f = parse_stream_row(line, line_no);
    if (have_prev) {
      if (f.ts <= prev_ts)
        throw DataError("line " + std::to_string(line_no) + ": timestamps not increasing");
      if (f.ts != prev_ts + 1)
        throw DataError("line " + std::to_string(line_no) + ": gap in timestamps (" +
                        std::to_string(prev_ts) + " -> " + std::to_string(f.ts) + ")");
    }
    prev_ts = f.ts;
    have_prev = true;
    frames.push_back(f);
  }
  return frames;
}

}  // namespace pmugan
