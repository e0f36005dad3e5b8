#include "svbrdf/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "svbrdf/common.hpp"

namespace svbrdf::nn {

namespace {

constexpr char kMagic[4] = {'S', 'V', 'C', 'K'};

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_i64(std::ostream& os, std::int64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_floats(std::ostream& os, const float* data, std::size_t n) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
}

std::uint32_t read_u32(std::istream& is, const std::string& path) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  SVBRDF_REQUIRE(is.good(), "checkpoint truncated: " + path);
  return v;
}

std::int64_t read_i64(std::istream& is, const std::string& path) {
  std::int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  SVBRDF_REQUIRE(is.good(), "checkpoint truncated: " + path);
  return v;
}

std::string read_string(std::istream& is, const std::string& path) {
  const std::uint32_t n = read_u32(is, path);
  SVBRDF_REQUIRE(n <= 1u << 20, "checkpoint corrupt (absurd string length): " + path);
  std::string s(n, '\0');
  is.read(s.data(), n);
  SVBRDF_REQUIRE(is.good(), "checkpoint truncated: " + path);
  return s;
}

void read_floats(std::istream& is, float* data, std::size_t n, const std::string& path) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
  SVBRDF_REQUIRE(is.good(), "checkpoint truncated: " + path);
}

std::vector<std::pair<std::string, Tensor>> all_named(const Generator& g, const Discriminator& d) {
  auto named = g.named_params();
  auto dn = d.named_params();
  named.insert(named.end(), dn.begin(), dn.end());
  return named;
}

}  // namespace

void save_checkpoint(const std::string& path, const Generator& g, const Discriminator& d,
                     const CheckpointMeta& meta, const std::vector<OptimizerSnapshot>& optimizers) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  SVBRDF_REQUIRE(os.good(), "cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  write_u32(os, kCheckpointVersion);

  CheckpointMeta full = meta;
  full.emplace("arch", kArchId);
  write_u32(os, static_cast<std::uint32_t>(full.size()));
  for (const auto& [k, v] : full) {
    write_string(os, k);
    write_string(os, v);
  }

  const auto named = all_named(g, d);
  write_u32(os, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, t] : named) {
    write_string(os, name);
    write_u32(os, static_cast<std::uint32_t>(t.shape().size()));
    for (int dim : t.shape()) write_u32(os, static_cast<std::uint32_t>(dim));
    write_floats(os, t.data(), static_cast<std::size_t>(t.numel()));
  }

  write_u32(os, static_cast<std::uint32_t>(optimizers.size()));
  for (const auto& snap : optimizers) {
    write_string(os, snap.name);
    write_i64(os, snap.step);
    write_u32(os, static_cast<std::uint32_t>(snap.states.size()));
    for (const auto& st : snap.states) {
      write_i64(os, static_cast<std::int64_t>(st.m.size()));
      write_floats(os, st.m.data(), st.m.size());
      write_floats(os, st.v.data(), st.v.size());
    }
  }
  os.flush();
  SVBRDF_REQUIRE(os.good(), "checkpoint write failed: " + path);
}

CheckpointMeta load_checkpoint(const std::string& path, Generator& g, Discriminator& d,
                               std::vector<OptimizerSnapshot>* optimizers) {
  std::ifstream is(path, std::ios::binary);
  SVBRDF_REQUIRE(is.good(), "cannot open checkpoint: " + path);
  char magic[4] = {};
  is.read(magic, 4);
  SVBRDF_REQUIRE(is.good() && std::memcmp(magic, kMagic, 4) == 0,
                 "not a checkpoint file (bad magic): " + path);
  const std::uint32_t version = read_u32(is, path);
  SVBRDF_REQUIRE(version == kCheckpointVersion,
                 "unsupported checkpoint version " + std::to_string(version) + ": " + path);

  CheckpointMeta meta;
  const std::uint32_t meta_count = read_u32(is, path);
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string k = read_string(is, path);
    meta[k] = read_string(is, path);
  }
  SVBRDF_REQUIRE(meta.count("arch") && meta["arch"] == kArchId,
                 "checkpoint architecture mismatch (want " + std::string(kArchId) + "): " + path);

  auto named = all_named(g, d);
  std::map<std::string, Tensor> by_name(named.begin(), named.end());
  const std::uint32_t tensor_count = read_u32(is, path);
  SVBRDF_REQUIRE(tensor_count == named.size(),
                 "checkpoint holds " + std::to_string(tensor_count) + " tensors, model expects " +
                     std::to_string(named.size()) + ": " + path);
  for (std::uint32_t i = 0; i < tensor_count; ++i) {
    const std::string name = read_string(is, path);
    auto it = by_name.find(name);
    SVBRDF_REQUIRE(it != by_name.end(), "checkpoint tensor unknown to this model: " + name);
    const std::uint32_t ndim = read_u32(is, path);
    std::vector<int> shape(ndim);
    for (auto& dim : shape) dim = static_cast<int>(read_u32(is, path));
    SVBRDF_REQUIRE(shape == it->second.shape(),
                   "checkpoint shape mismatch for " + name + ": file " + shape_string(shape) +
                       " vs model " + shape_string(it->second.shape()));
    read_floats(is, it->second.data(), static_cast<std::size_t>(it->second.numel()), path);
  }

  const std::uint32_t opt_count = read_u32(is, path);
  std::vector<OptimizerSnapshot> snaps;
  for (std::uint32_t i = 0; i < opt_count; ++i) {
    OptimizerSnapshot snap;
    snap.name = read_string(is, path);
    snap.step = read_i64(is, path);
    const std::uint32_t params = read_u32(is, path);
    snap.states.resize(params);
    for (auto& st : snap.states) {
      const std::int64_t n = read_i64(is, path);
      SVBRDF_REQUIRE(n >= 0 && n < (std::int64_t{1} << 32), "checkpoint corrupt moment size: " + path);
      st.m.resize(static_cast<std::size_t>(n));
      st.v.resize(static_cast<std::size_t>(n));
      read_floats(is, st.m.data(), st.m.size(), path);
      read_floats(is, st.v.data(), st.v.size(), path);
    }
    snaps.push_back(std::move(snap));
  }
  if (optimizers) *optimizers = std::move(snaps);
  return meta;
}

}  // namespace svbrdf::nn
