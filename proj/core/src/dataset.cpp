#include "bregsnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "bregsnn/errors.hpp"

namespace bregsnn {

void SpikeDataset::validate() const {
  if (samples.size() != labels.size())
    throw ShapeError("dataset: sample/label count mismatch");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.rank() != 2 || s.rows() != T || s.cols() != C)
      throw ShapeError("dataset: sample shape mismatch");
    if (labels[i] >= num_classes)
      throw ShapeError("dataset: label out of range");
  }
}

SpikeDataset bin_channels(const SpikeDataset& ds, std::size_t factor) {
  if (factor == 0 || ds.C % factor != 0)
    throw ShapeError("bin_channels: channel count not divisible by factor");
  SpikeDataset out;
  out.name = ds.name;
  out.T = ds.T;
  out.C = ds.C / factor;
  out.num_classes = ds.num_classes;
  out.labels = ds.labels;
  out.samples.reserve(ds.samples.size());
  for (const auto& s : ds.samples) {
    Tensor binned({ds.T, out.C});
    for (std::size_t t = 0; t < ds.T; ++t)
      for (std::size_t c = 0; c < out.C; ++c) {
        double acc = 0.0;
        for (std::size_t f = 0; f < factor; ++f)
          acc += s(t, c * factor + f);
        binned(t, c) = acc;
      }
    out.samples.push_back(std::move(binned));
  }
  return out;
}

SpikeDataset gen_pattern_task(Rng& rng, const PatternTaskConfig& cfg) {
  if (cfg.num_classes == 0 || cfg.T == 0 || cfg.C == 0)
    throw ShapeError("gen_pattern_task: dimensions must be positive");
  SpikeDataset ds;
  ds.name = "pattern";
  ds.T = cfg.T;
  ds.C = cfg.C;
  ds.num_classes = cfg.num_classes;

  std::size_t n_inf = cfg.informative_channels;
  if (n_inf == 0 || n_inf > cfg.C) n_inf = cfg.C;
  std::vector<bool> informative(cfg.C, false);
  {
    std::vector<std::size_t> chans(cfg.C);
    std::iota(chans.begin(), chans.end(), 0);
    shuffle(chans, rng);
    for (std::size_t c = 0; c < n_inf; ++c) informative[chans[c]] = true;
  }

  // Shared baseline plus class-specific templates on the informative
  // channels only.
  Tensor baseline({cfg.T, cfg.C});
  if (cfg.base_rate > 0.0)
    for (std::size_t i = 0; i < baseline.size(); ++i)
      baseline[i] = rng.uniform(0.0, 2.0 * cfg.base_rate);

  std::vector<Tensor> templates;
  for (std::size_t k = 0; k < cfg.num_classes; ++k) {
    Tensor tmpl = baseline;
    if (cfg.base_rate > 0.0)
      for (std::size_t t = 0; t < cfg.T; ++t)
        for (std::size_t c = 0; c < cfg.C; ++c)
          if (informative[c])
            tmpl(t, c) = rng.uniform(0.0, 2.0 * cfg.base_rate);
    templates.push_back(std::move(tmpl));
  }

  for (std::size_t k = 0; k < cfg.num_classes; ++k) {
    for (std::size_t n = 0; n < cfg.samples_per_class; ++n) {
      Tensor sample({cfg.T, cfg.C});
      for (std::size_t i = 0; i < sample.size(); ++i) {
        double rate = templates[k][i];
        if (cfg.jitter > 0.0) rate += cfg.jitter * rng.normal(1.0);
        if (rate > 0.0)
          sample[i] = static_cast<double>(rng.poisson(rate));
      }
      ds.samples.push_back(std::move(sample));
      ds.labels.push_back(static_cast<std::uint16_t>(k));
    }
  }
  return ds;
}

SpikeDataset gen_sequential_pixels(Rng& rng, const SequentialPixelConfig& cfg) {
  const std::size_t T = cfg.height * cfg.width;
  SpikeDataset ds;
  ds.name = "seqpix";
  ds.T = T;
  ds.C = 1;
  ds.num_classes = cfg.num_classes;

  // One random binary glyph per class; samples are the glyph with pixel
  // noise, encoded as small counts.
  std::vector<std::vector<double>> glyphs(cfg.num_classes,
                                          std::vector<double>(T, 0.0));
  for (auto& g : glyphs)
    for (auto& px : g) px = rng.next_double() < 0.35 ? 2.0 : 0.0;

  // A single fixed permutation of the time axis, shared by every sample.
  Rng perm_rng(cfg.permutation_seed);
  std::vector<std::size_t> perm(T);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(perm, perm_rng);

  for (std::size_t k = 0; k < cfg.num_classes; ++k) {
    for (std::size_t n = 0; n < cfg.samples_per_class; ++n) {
      Tensor sample({T, std::size_t{1}});
      for (std::size_t t = 0; t < T; ++t) {
        double px = glyphs[k][t];
        if (cfg.noise > 0.0 && rng.next_double() < cfg.noise)
          px = px > 0.0 ? 0.0 : 2.0;
        sample(perm[t], 0) = px;
      }
      ds.samples.push_back(std::move(sample));
      ds.labels.push_back(static_cast<std::uint16_t>(k));
    }
  }
  return ds;
}

namespace {

constexpr char kMagic[4] = {'S', 'P', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw IoError("dataset: truncated file");
  return v;
}

}  // namespace

void save_dataset(const SpikeDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("dataset: cannot open for writing: " + path);
  os.write(kMagic, 4);
  write_pod<std::uint32_t>(os, kVersion);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.size()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.T));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.C));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.num_classes));
  std::vector<std::uint16_t> row(ds.T * ds.C);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    write_pod<std::uint16_t>(os, ds.labels[i]);
    const auto& s = ds.samples[i];
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double v = s[j];
      if (v < 0.0 || v > 65535.0 || v != std::floor(v))
        throw IoError("dataset: counts must be integers in [0, 65535]");
      row[j] = static_cast<std::uint16_t>(v);
    }
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(std::uint16_t)));
  }
  if (!os) throw IoError("dataset: write failed: " + path);
}

SpikeDataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("dataset: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("dataset: bad magic");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kVersion)
    throw IoError("dataset: unsupported version " + std::to_string(version));
  SpikeDataset ds;
  const auto n = read_pod<std::uint32_t>(is);
  ds.T = read_pod<std::uint32_t>(is);
  ds.C = read_pod<std::uint32_t>(is);
  ds.num_classes = read_pod<std::uint32_t>(is);
  std::vector<std::uint16_t> row(ds.T * ds.C);
  for (std::uint32_t i = 0; i < n; ++i) {
    ds.labels.push_back(read_pod<std::uint16_t>(is));
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(std::uint16_t)));
    if (!is) throw IoError("dataset: truncated sample payload");
    Tensor s({ds.T, ds.C});
    for (std::size_t j = 0; j < row.size(); ++j)
      s[j] = static_cast<double>(row[j]);
    ds.samples.push_back(std::move(s));
  }
  ds.validate();
  return ds;
}

SplitResult split(const SpikeDataset& ds, double train_frac, double val_frac,
                  double test_frac, Rng& rng) {
  const double sum = train_frac + val_frac + test_frac;
  if (std::fabs(sum - 1.0) > 1e-9)
    throw ShapeError("split: fractions must sum to 1");

  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i)
    by_class[ds.labels[i]].push_back(i);

  SplitResult result;
  for (SpikeDataset* part : {&result.train, &result.val, &result.test}) {
    part->name = ds.name;
    part->T = ds.T;
    part->C = ds.C;
    part->num_classes = ds.num_classes;
  }

  for (auto& idx : by_class) {
    shuffle(idx, rng);
    const std::size_t n = idx.size();
    const auto n_train = static_cast<std::size_t>(std::round(train_frac * n));
    const auto n_val = static_cast<std::size_t>(std::round(val_frac * n));
    for (std::size_t j = 0; j < n; ++j) {
      SpikeDataset* dst = j < n_train              ? &result.train
                          : j < n_train + n_val    ? &result.val
                                                   : &result.test;
      dst->samples.push_back(ds.samples[idx[j]]);
      dst->labels.push_back(ds.labels[idx[j]]);
    }
  }
  return result;
}

}  // namespace bregsnn
