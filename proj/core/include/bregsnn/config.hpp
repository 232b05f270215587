#pragma once

#include <string>

#include "bregsnn/network.hpp"
#include "bregsnn/train.hpp"

namespace bregsnn {

// Run configuration, read from a plain `key = value` text file ('#' starts
// a comment). Unknown keys are rejected. Every field has a documented
// default; command-line flags override file values.
struct RunConfig {
  std::string dataset;          // SPK1 file path
  std::string output_dir = ".";
  std::string net = "40 64 64r 10";
  double lif_beta = 0.9;
  double u_th = 1.0;
  double surrogate_k = 10.0;
  double train_frac = 0.7;
  double val_frac = 0.15;
  double test_frac = 0.15;
  std::uint64_t split_seed = 42;
  TrainConfig train;

  NetworkSpec network_spec() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string to_text(const RunConfig& cfg);

}  // namespace bregsnn
