#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bregsnn/rng.hpp"
#include "bregsnn/tensor.hpp"

namespace bregsnn {

// N samples of [T x C] non-negative spike counts plus integer labels.
struct SpikeDataset {
  std::string name;
  std::size_t T = 0;
  std::size_t C = 0;
  std::size_t num_classes = 0;
  std::vector<Tensor> samples;   // each [T x C]
  std::vector<std::uint16_t> labels;

  std::size_t size() const { return samples.size(); }
  void validate() const;
};

// Sums `factor` consecutive input channels; preserves the per-timestep
// total count.
SpikeDataset bin_channels(const SpikeDataset& ds, std::size_t factor);

struct PatternTaskConfig {
  std::size_t num_classes = 10;
  std::size_t T = 50;
  std::size_t C = 40;
  std::size_t samples_per_class = 60;
  double base_rate = 2.0;
  double jitter = 0.1;
  // Channels carrying class-specific structure; the rest share one
  // baseline template across all classes. 0 means every channel is
  // informative.
  std::size_t informative_channels = 0;
};

// Synthetic stand-in for event-audio classification: one fixed random rate
// template per class, samples drawn as independent Poisson counts around
// the template.
SpikeDataset gen_pattern_task(Rng& rng, const PatternTaskConfig& cfg);

struct SequentialPixelConfig {
  std::size_t num_classes = 10;
  std::size_t height = 12;
  std::size_t width = 12;
  std::size_t samples_per_class = 30;
  double noise = 0.15;
  std::uint64_t permutation_seed = 1;
};

// Synthetic glyphs flattened to [T = H*W x C = 1] sequences with one fixed
// time-axis permutation shared by all samples.
SpikeDataset gen_sequential_pixels(Rng& rng, const SequentialPixelConfig& cfg);

// SPK1 binary format, little-endian: magic "SPK1", u32 version=1,
// u32 N, T, C, num_classes, then N records of (u16 label, T*C u16 counts,
// row-major time-major). Bit-exact round trip.
void save_dataset(const SpikeDataset& ds, const std::string& path);
SpikeDataset load_dataset(const std::string& path);

struct SplitResult {
  SpikeDataset train, val, test;
};

// Disjoint label-stratified split, deterministic given rng state.
SplitResult split(const SpikeDataset& ds, double train_frac, double val_frac,
                  double test_frac, Rng& rng);

}  // namespace bregsnn
