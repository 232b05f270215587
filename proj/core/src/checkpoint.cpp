#include <cstdint>
#include <cstring>
#include <fstream>

#include "bregsnn/errors.hpp"
#include "bregsnn/optim.hpp"

namespace bregsnn {

// SNNC checkpoint layout (little-endian):
//   magic "SNNC", u32 version=1, u32 group count, then per group:
//   u32 name length + bytes, u32 rank + u64 dims,
//   theta/v/m/s payloads as raw f64, u64 step counter, f64 lambda,
//   u8 regularized flag.

namespace {

constexpr char kMagic[4] = {'S', 'N', 'N', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw IoError("checkpoint: truncated file");
  return v;
}

void write_tensor(std::ostream& os, const Tensor& t) {
  os.write(reinterpret_cast<const char*>(t.data().data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
}

Tensor read_tensor(std::istream& is, const std::vector<std::size_t>& shape) {
  Tensor t(shape);
  is.read(reinterpret_cast<char*>(t.data().data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!is) throw IoError("checkpoint: truncated tensor payload");
  return t;
}

}  // namespace

void save_checkpoint(const std::vector<ParamState>& states,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("checkpoint: cannot open for writing: " + path);
  os.write(kMagic, 4);
  write_pod<std::uint32_t>(os, kVersion);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(states.size()));
  for (const auto& st : states) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(st.name.size()));
    os.write(st.name.data(), static_cast<std::streamsize>(st.name.size()));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(st.theta.rank()));
    for (auto d : st.theta.shape()) write_pod<std::uint64_t>(os, d);
    write_tensor(os, st.theta);
    write_tensor(os, st.v);
    write_tensor(os, st.m);
    write_tensor(os, st.s);
    write_pod<std::uint64_t>(os, st.t);
    write_pod<double>(os, st.prox.effective_lambda());
    write_pod<std::uint8_t>(os, st.regularized ? 1 : 0);
  }
  if (!os) throw IoError("checkpoint: write failed: " + path);
}

std::vector<ParamState> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("checkpoint: bad magic");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kVersion)
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const auto ngroups = read_pod<std::uint32_t>(is);
  std::vector<ParamState> states;
  states.reserve(ngroups);
  for (std::uint32_t g = 0; g < ngroups; ++g) {
    ParamState st;
    const auto name_len = read_pod<std::uint32_t>(is);
    st.name.resize(name_len);
    is.read(st.name.data(), name_len);
    if (!is) throw IoError("checkpoint: truncated name");
    const auto rank = read_pod<std::uint32_t>(is);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape)
      d = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    st.theta = read_tensor(is, shape);
    st.v = read_tensor(is, shape);
    st.m = read_tensor(is, shape);
    st.s = read_tensor(is, shape);
    st.t = read_pod<std::uint64_t>(is);
    const double lambda = read_pod<double>(is);
    st.regularized = read_pod<std::uint8_t>(is) != 0;
    st.prox = lambda > 0.0 || st.regularized ? ProxSpec::l1(lambda)
                                             : ProxSpec::none();
    states.push_back(std::move(st));
  }
  return states;
}

}  // namespace bregsnn
