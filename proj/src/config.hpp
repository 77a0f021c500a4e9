// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "detector.hpp"
#include "gan.hpp"
#include "mad.hpp"
#include "synth.hpp"

namespace pmugan {

// Flat key=value configuration covering every module. Every key has a
// default; unknown keys and unparsable values raise ConfigError naming the key.
struct RunConfig {
  FeederConfig feeder;
  EventPlanConfig synth;
  int window_size = 40;
  int window_stride = 20;
  TrainConfig train;
  double z_p = 3.0;
  MadConfig mad;
  std::int64_t eval_slack = 40;

  DetectorConfig detector_cfg() const { return {z_p, window_size, window_stride}; }
};

// key=value, one per line; '#' starts a comment.
RunConfig parse_config_file(const std::string& path, RunConfig base = {});

void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value);

// "key=value" form used by --set
void apply_config_override(RunConfig& cfg, const std::string& kv);

std::string get_config_value(const RunConfig& cfg, const std::string& key);

// Full range/consistency validation (parse-then-validate).
void validate_config(const RunConfig& cfg);

// One line per key: "key=default  help". Backs --help.
std::string describe_config();

}  // namespace pmugan
