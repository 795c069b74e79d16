#include "urnn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace urnn {

namespace {

constexpr char kMagic[4] = {'U', 'R', 'N', 'C'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

template <typename T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& f, const char* what) {
  T v;
  if (!f.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw std::runtime_error(std::string("checkpoint: truncated ") + what);
  }
  return v;
}

void put_group(std::ofstream& f, const std::string& name,
               const std::vector<uint64_t>& dims, const double* data,
               size_t n) {
  put<uint32_t>(f, static_cast<uint32_t>(name.size()));
  f.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<uint32_t>(f, static_cast<uint32_t>(dims.size()));
  for (uint64_t d : dims) put<uint64_t>(f, d);
  f.write(reinterpret_cast<const char*>(data),
          static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

const Checkpoint::Group* Checkpoint::find(const std::string& name) const {
  for (const Group& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

void save_checkpoint(const std::string& path, const SequenceModel& model,
                     const RmsProp* opt, const std::string& config_text) {
  // Written to a sibling temp file and renamed so a failed write never
  // leaves a corrupt checkpoint at the target path.
  const std::string tmp = path + ".tmp";
  std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + tmp);
  f.write(kMagic, 4);
  put<uint32_t>(f, 1);
  put<uint64_t>(f, config_text.size());
  f.write(config_text.data(),
          static_cast<std::streamsize>(config_text.size()));

  const auto specs = model.groups();
  std::vector<double> flat(model.flat_size());
  model.to_flat(flat.data());

  uint32_t count = static_cast<uint32_t>(specs.size());
  if (opt) count += 4;
  put<uint32_t>(f, count);

  size_t off = 0;
  for (const TensorSpec& s : specs) {
    put_group(f, s.name, s.dims, flat.data() + off, s.size);
    off += s.size;
  }
  if (opt) {
    put_group(f, "opt.accum", {opt->accum.size()}, opt->accum.data(),
              opt->accum.size());
    put_group(f, "opt.lr", {1}, &opt->lr, 1);
    put_group(f, "opt.decay", {1}, &opt->decay, 1);
    put_group(f, "opt.eps", {1}, &opt->eps, 1);
  }
  f.flush();
  if (!f) throw std::runtime_error("checkpoint: write failed for " + tmp);
  f.close();
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("checkpoint: cannot move " + tmp + " to " + path);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  Checkpoint ck;
  ck.version = get<uint32_t>(f, "version");
  if (ck.version != 1) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(ck.version));
  }
  const uint64_t cfg_len = get<uint64_t>(f, "config length");
  ck.config_text.resize(cfg_len);
  if (cfg_len > 0 &&
      !f.read(ck.config_text.data(), static_cast<std::streamsize>(cfg_len))) {
    throw std::runtime_error("checkpoint: truncated config");
  }
  const uint32_t count = get<uint32_t>(f, "group count");
  ck.groups.resize(count);
  for (Checkpoint::Group& g : ck.groups) {
    const uint32_t name_len = get<uint32_t>(f, "group name length");
    g.name.resize(name_len);
    if (!f.read(g.name.data(), name_len)) {
      throw std::runtime_error("checkpoint: truncated group name");
    }
    const uint32_t rank = get<uint32_t>(f, "group rank");
    g.dims.resize(rank);
    uint64_t n = 1;
    for (uint64_t& d : g.dims) {
      d = get<uint64_t>(f, "group dim");
      n *= d;
    }
    g.data.resize(n);
    if (!f.read(reinterpret_cast<char*>(g.data.data()),
                static_cast<std::streamsize>(n * sizeof(double)))) {
      throw std::runtime_error("checkpoint: truncated payload of " + g.name);
    }
  }
  return ck;
}

void restore_model(const Checkpoint& ck, SequenceModel& model, RmsProp* opt) {
  const auto specs = model.groups();
  std::vector<double> flat(model.flat_size());
  size_t off = 0;
  for (const TensorSpec& s : specs) {
    const Checkpoint::Group* g = ck.find(s.name);
    if (!g) throw std::runtime_error("checkpoint: missing group " + s.name);
    if (g->dims != s.dims) {
      throw std::runtime_error("checkpoint: shape mismatch for " + s.name);
    }
    std::memcpy(flat.data() + off, g->data.data(),
                s.size * sizeof(double));
    off += s.size;
  }
  model.from_flat(flat.data());
  if (opt) {
    if (const Checkpoint::Group* g = ck.find("opt.accum")) {
      opt->accum = g->data;
      opt->lr = ck.find("opt.lr")->data[0];
      opt->decay = ck.find("opt.decay")->data[0];
      opt->eps = ck.find("opt.eps")->data[0];
    }
  }
}

}  // namespace urnn
