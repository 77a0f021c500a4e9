// SPDX-License-Identifier: Apache-2.0
#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace pmugan {

namespace {

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config key '" + key + "': bad numeric value '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config key '" + key + "': bad integer value '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': bad boolean value '" + v + "'");
}

std::string kinds_to_string(const std::vector<EventKind>& kinds) {
  if (kinds.empty()) return "all";
  std::string out;
  for (size_t i = 0; i < kinds.size(); ++i) {
    if (i) out += ',';
    out += event_kind_name(kinds[i]);
  }
  return out;
}

std::vector<EventKind> kinds_from_string(const std::string& key, const std::string& v) {
  std::vector<EventKind> kinds;
  if (v == "all") return kinds;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      kinds.push_back(event_kind_from_name(item));
    } catch (const DataError&) {
      throw ConfigError("config key '" + key + "': unknown event kind '" + item + "'");
    }
  }
  if (kinds.empty()) throw ConfigError("config key '" + key + "': empty kind list");
  return kinds;
}

std::string features_to_string(const std::vector<int>& f) {
  if (f.empty()) return "all";
  std::string out;
  for (size_t i = 0; i < f.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(f[i]);
  }
  return out;
}

std::vector<int> features_from_string(const std::string& key, const std::string& v) {
  std::vector<int> f;
  if (v == "all") return f;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) f.push_back(static_cast<int>(to_int(key, item)));
  if (f.empty()) throw ConfigError("config key '" + key + "': empty feature list");
  return f;
}

struct Entry {
  const char* key;
  const char* help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define NUM_ENTRY(KEY, FIELD, HELP)                                                     \
  Entry{KEY, HELP, [](RunConfig& c, const std::string& v) { c.FIELD = to_double(KEY, v); }, \
        [](const RunConfig& c) { return fmt_g17(c.FIELD); }}
#define INT_ENTRY(KEY, FIELD, TYPE, HELP)                                                 \
  Entry{KEY, HELP,                                                                       \
        [](RunConfig& c, const std::string& v) { c.FIELD = static_cast<TYPE>(to_int(KEY, v)); }, \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }}
#define BOOL_ENTRY(KEY, FIELD, HELP)                                                    \
  Entry{KEY, HELP, [](RunConfig& c, const std::string& v) { c.FIELD = to_bool(KEY, v); }, \
        [](const RunConfig& c) { return c.FIELD ? "true" : "false"; }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      INT_ENTRY("feeder.seed", feeder.seed, std::uint64_t, "feeder RNG seed"),
      NUM_ENTRY("feeder.duration_s", feeder.duration_s, "stream length in seconds"),
      NUM_ENTRY("feeder.base_v", feeder.base_v, "nominal per-phase voltage magnitude, volts"),
      NUM_ENTRY("feeder.base_i_a", feeder.base_i[0], "phase A base current, amperes"),
      NUM_ENTRY("feeder.base_i_b", feeder.base_i[1], "phase B base current, amperes"),
      NUM_ENTRY("feeder.base_i_c", feeder.base_i[2], "phase C base current, amperes"),
      NUM_ENTRY("feeder.noise_v", feeder.noise_v, "relative std-dev of voltage noise"),
      NUM_ENTRY("feeder.noise_i", feeder.noise_i, "relative std-dev of current noise"),
      NUM_ENTRY("feeder.drift_period_s", feeder.load_drift_period_s, "load drift period, seconds"),
      NUM_ENTRY("feeder.drift_depth", feeder.load_drift_depth, "relative load drift amplitude"),
      NUM_ENTRY("feeder.pf_base", feeder.pf_base, "power-factor angle, radians"),
      INT_ENTRY("synth.events", synth.n_events, int, "number of injected events (0 = clean)"),
      INT_ENTRY("synth.seed", synth.seed, std::uint64_t, "event plan RNG seed"),
      NUM_ENTRY("synth.spacing_s", synth.spacing_s, "minimum gap between events, seconds"),
      NUM_ENTRY("synth.small_lo", synth.small_lo, "small tier magnitude, x noise std-dev, low"),
      NUM_ENTRY("synth.small_hi", synth.small_hi, "small tier magnitude, x noise std-dev, high"),
      NUM_ENTRY("synth.large_lo", synth.large_lo, "large tier magnitude, x noise std-dev, low"),
      NUM_ENTRY("synth.large_hi", synth.large_hi, "large tier magnitude, x noise std-dev, high"),
      Entry{"synth.kinds", "event kinds to inject: all or comma-separated names",
            [](RunConfig& c, const std::string& v) { c.synth.kinds = kinds_from_string("synth.kinds", v); },
            [](const RunConfig& c) { return kinds_to_string(c.synth.kinds); }},
      INT_ENTRY("window.size", window_size, int, "detection window length, samples"),
      INT_ENTRY("window.stride", window_stride, int, "window stride, samples (overlap = size - stride)"),
      INT_ENTRY("train.seed", train.seed, std::uint64_t, "training RNG seed"),
      INT_ENTRY("train.batch", train.batch, int, "batch size N"),
      INT_ENTRY("train.iterations", train.iterations, int, "adversarial training iterations"),
      INT_ENTRY("train.d_steps", train.d_steps, int, "discriminator updates per iteration"),
      INT_ENTRY("train.g_steps", train.g_steps, int, "generator updates per iteration"),
      NUM_ENTRY("train.lr_d", train.lr_d, "discriminator Adam learning rate"),
      NUM_ENTRY("train.lr_g", train.lr_g, "generator Adam learning rate"),
      NUM_ENTRY("train.beta1", train.beta1, "Adam beta1"),
      NUM_ENTRY("train.beta2", train.beta2, "Adam beta2"),
      NUM_ENTRY("train.adam_eps", train.adam_eps, "Adam epsilon"),
      NUM_ENTRY("train.noise_mu", train.noise_mu, "generator noise mean"),
      NUM_ENTRY("train.noise_sigma", train.noise_sigma, "generator noise std-dev (> 0)"),
      INT_ENTRY("train.noise_dim", train.noise_dim, int, "noise vector width per time step"),
      NUM_ENTRY("train.eq_eps", train.eq_eps, "equilibrium tolerance on |mean D - 0.5|"),
      INT_ENTRY("train.max_restarts", train.max_restarts, int, "retraining attempts on failed equilibrium"),
      BOOL_ENTRY("train.non_saturating", train.non_saturating, "use the non-saturating generator loss"),
      INT_ENTRY("train.disc_hidden1", train.disc_hidden1, int, "discriminator LSTM layer 1 width"),
      INT_ENTRY("train.disc_hidden2", train.disc_hidden2, int, "discriminator LSTM layer 2 width"),
      INT_ENTRY("train.gen_hidden1", train.gen_hidden1, int, "generator LSTM layer 1 width"),
      INT_ENTRY("train.gen_hidden2", train.gen_hidden2, int, "generator LSTM layer 2 width"),
      NUM_ENTRY("train.holdout_frac", train.holdout_frac, "block fraction held out for the equilibrium check"),
      NUM_ENTRY("detector.z_p", z_p, "flag threshold multiplier (three-sigma rule)"),
      INT_ENTRY("mad.coarse_window", mad.coarse_window, int, "MAD coarse trailing window, samples"),
      INT_ENTRY("mad.fine_window", mad.fine_window, int, "MAD fine trailing window, samples"),
      NUM_ENTRY("mad.k", mad.k, "MAD threshold multiplier"),
      NUM_ENTRY("mad.scale", mad.mad_scale, "MAD Normal-consistency scale"),
      Entry{"mad.features", "monitored feature columns: all or comma-separated indices 0-11",
            [](RunConfig& c, const std::string& v) { c.mad.features = features_from_string("mad.features", v); },
            [](const RunConfig& c) { return features_to_string(c.mad.features); }},
      INT_ENTRY("eval.slack", eval_slack, std::int64_t, "matching slack around truth intervals, samples"),
  };
  return table;
}

#undef NUM_ENTRY
#undef INT_ENTRY
#undef BOOL_ENTRY

const Entry* find_entry(const std::string& key) {
  for (const Entry& e : entries())
    if (key == e.key) return &e;
  return nullptr;
}

}  // namespace

void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Entry* e = find_entry(key);
  if (!e) throw ConfigError("unknown config key '" + key + "'");
  e->set(cfg, value);
}

void apply_config_override(RunConfig& cfg, const std::string& kv) {
  const size_t eq = kv.find('=');
  if (eq == std::string::npos)
    throw ConfigError("bad --set argument '" + kv + "' (expected key=value)");
  apply_config_kv(cfg, kv.substr(0, eq), kv.substr(eq + 1));
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) {
  const Entry* e = find_entry(key);
  if (!e) throw ConfigError("unknown config key '" + key + "'");
  return e->get(cfg);
}

RunConfig parse_config_file(const std::string& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const size_t e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.erase(0, 1);
    apply_config_kv(base, key, value);
  }
  return base;
}

void validate_config(const RunConfig& cfg) {
  // feeder
  if (!(cfg.feeder.duration_s > 0)) throw ConfigError("feeder.duration_s must be > 0");
  if (cfg.feeder.noise_v < 0 || cfg.feeder.noise_i < 0)
    throw ConfigError("feeder noise levels must be >= 0");
  if (!(cfg.feeder.base_v > 0) || !(cfg.feeder.base_i[0] > 0) || !(cfg.feeder.base_i[1] > 0) ||
      !(cfg.feeder.base_i[2] > 0))
    throw ConfigError("feeder base magnitudes must be > 0");
  if (cfg.synth.n_events < 0) throw ConfigError("synth.events must be >= 0");
  if (!(cfg.synth.small_lo > 0) || cfg.synth.small_hi < cfg.synth.small_lo)
    throw ConfigError("synth small tier range invalid");
  if (!(cfg.synth.large_lo > 0) || cfg.synth.large_hi < cfg.synth.large_lo)
    throw ConfigError("synth large tier range invalid");
  validate_detector_config(cfg.detector_cfg());
  if (cfg.train.iterations < 1) throw ConfigError("train.iterations must be >= 1");
  validate_train_config(cfg.train);
  validate_mad_config(cfg.mad);
  if (cfg.eval_slack < 0) throw ConfigError("eval.slack must be >= 0");
}

std::string describe_config() {
  RunConfig defaults;
  std::string out;
  for (const Entry& e : entries()) {
    out += e.key;
    out += '=';
    out += e.get(defaults);
    out += "  ";
    out += e.help;
    out += '\n';
  }
  return out;
}

}  // namespace pmugan
