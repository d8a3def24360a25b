#include "asma/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

static_assert(std::endian::native == std::endian::little, "checkpoint codec assumes a little-endian host");

namespace asma {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'M', 'A'};

enum Section : uint8_t {
  kGenEntry = 0,
  kDiscEntry = 1,
  kAdamGM = 2,
  kAdamGV = 3,
  kAdamDM = 4,
  kAdamDV = 5,
};

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  }
  void raw(const void* p, size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  template <typename V>
  void num(V v) {
    raw(&v, sizeof(V));
  }
  void str(const std::string& s) {
    num<uint32_t>(static_cast<uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  bool good() const { return out_.good(); }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open checkpoint " + path);
  }
  void raw(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw std::runtime_error("truncated checkpoint");
  }
  template <typename V>
  V num() {
    V v;
    raw(&v, sizeof(V));
    return v;
  }
  std::string str() {
    uint32_t n = num<uint32_t>();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }

 private:
  std::ifstream in_;
};

template <typename T>
void write_record(Writer& w, uint8_t section, const std::string& name, const Shape& shape, std::span<const T> data) {
  w.num(section);
  w.str(name);
  w.num<uint8_t>(static_cast<uint8_t>(shape.rank()));
  for (int i = 0; i < shape.rank(); ++i) w.num<int64_t>(shape[i]);
  w.num<uint64_t>(data.size());
  w.raw(data.data(), data.size() * sizeof(T));
}

template <typename T>
typename Adam<T>::Slot* find_slot(Adam<T>& opt, const std::string& name) {
  for (auto& s : opt.slots())
    if (s.name == name) return &s;
  return nullptr;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::string& path, const CheckpointInfo& info, const ParamStore<T>& gen,
                     const ParamStore<T>& disc, const Adam<T>& opt_g, const Adam<T>& opt_d) {
  const std::string tmp = path + ".tmp";
  {
    Writer w(tmp);
    w.raw(kMagic, 4);
    w.num<uint32_t>(kCheckpointVersion);
    w.num<uint8_t>(static_cast<uint8_t>(sizeof(T)));
    w.num<uint64_t>(info.step);
    w.num<uint64_t>(info.config_hash);
    w.num<int64_t>(opt_g.step_count());
    w.num<int64_t>(opt_d.step_count());
    w.str(info.rng_state);
    uint32_t count = static_cast<uint32_t>(gen.entries().size() + disc.entries().size() +
                                           2 * opt_g.slots().size() + 2 * opt_d.slots().size());
    w.num<uint32_t>(count);
    for (const auto& e : gen.entries()) write_record<T>(w, kGenEntry, e.name, e.tensor.shape(), e.tensor.data());
    for (const auto& e : disc.entries()) write_record<T>(w, kDiscEntry, e.name, e.tensor.shape(), e.tensor.data());
    const Shape dummy{1};
    for (const auto& s : opt_g.slots()) {
      write_record<T>(w, kAdamGM, s.name, dummy, std::span<const T>(s.m.data(), s.m.size()));
      write_record<T>(w, kAdamGV, s.name, dummy, std::span<const T>(s.v.data(), s.v.size()));
    }
    for (const auto& s : opt_d.slots()) {
      write_record<T>(w, kAdamDM, s.name, dummy, std::span<const T>(s.m.data(), s.m.size()));
      write_record<T>(w, kAdamDV, s.name, dummy, std::span<const T>(s.v.data(), s.v.size()));
    }
    if (!w.good()) throw std::runtime_error("checkpoint write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

template <typename T>
CheckpointInfo load_checkpoint(const std::string& path, ParamStore<T>& gen, ParamStore<T>& disc, Adam<T>& opt_g,
                               Adam<T>& opt_d) {
  Reader r(path);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("not an ASMA checkpoint: " + path);
  CheckpointInfo info;
  info.version = r.num<uint32_t>();
  if (info.version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(info.version));
  uint8_t dtype = r.num<uint8_t>();
  if (dtype != sizeof(T))
    throw std::runtime_error("checkpoint dtype width " + std::to_string(dtype) + " does not match model width " +
                             std::to_string(sizeof(T)));
  info.step = r.num<uint64_t>();
  info.config_hash = r.num<uint64_t>();
  opt_g.set_step_count(r.num<int64_t>());
  opt_d.set_step_count(r.num<int64_t>());
  info.rng_state = r.str();
  uint32_t count = r.num<uint32_t>();
  std::set<std::string> seen;
  for (uint32_t i = 0; i < count; ++i) {
    uint8_t section = r.num<uint8_t>();
    std::string name = r.str();
    uint8_t rank = r.num<uint8_t>();
    std::vector<int64_t> dims(rank);
    for (auto& d : dims) d = r.num<int64_t>();
    uint64_t n = r.num<uint64_t>();
    std::vector<T> payload(n);
    r.raw(payload.data(), n * sizeof(T));

    auto copy_into_store = [&](ParamStore<T>& store) {
      Tensor<T>* t = store.find(name);
      if (!t) throw std::runtime_error("checkpoint record " + name + " has no matching parameter");
      if (static_cast<uint64_t>(t->numel()) != n)
        throw std::runtime_error("checkpoint record " + name + " size mismatch");
      std::copy(payload.begin(), payload.end(), t->data().begin());
    };
    auto copy_into_moment = [&](Adam<T>& opt, bool first) {
      auto* slot = find_slot(opt, name);
      if (!slot) throw std::runtime_error("checkpoint moment record " + name + " has no matching optimizer slot");
      auto& dst = first ? slot->m : slot->v;
      if (dst.size() != n) throw std::runtime_error("checkpoint moment record " + name + " size mismatch");
      std::copy(payload.begin(), payload.end(), dst.begin());
    };
    switch (section) {
      case kGenEntry: copy_into_store(gen); break;
      case kDiscEntry: copy_into_store(disc); break;
      case kAdamGM: copy_into_moment(opt_g, true); break;
      case kAdamGV: copy_into_moment(opt_g, false); break;
      case kAdamDM: copy_into_moment(opt_d, true); break;
      case kAdamDV: copy_into_moment(opt_d, false); break;
      default: throw std::runtime_error("unknown checkpoint section " + std::to_string(section));
    }
    seen.insert(std::to_string(section) + ":" + name);
  }
  const size_t expected = gen.entries().size() + disc.entries().size() + 2 * opt_g.slots().size() + 2 * opt_d.slots().size();
  if (seen.size() != expected)
    throw std::runtime_error("checkpoint incomplete: " + std::to_string(seen.size()) + " records, expected " +
                             std::to_string(expected));
  return info;
}

template void save_checkpoint<float>(const std::string&, const CheckpointInfo&, const ParamStore<float>&,
                                     const ParamStore<float>&, const Adam<float>&, const Adam<float>&);
template void save_checkpoint<double>(const std::string&, const CheckpointInfo&, const ParamStore<double>&,
                                      const ParamStore<double>&, const Adam<double>&, const Adam<double>&);
template CheckpointInfo load_checkpoint<float>(const std::string&, ParamStore<float>&, ParamStore<float>&, Adam<float>&,
                                               Adam<float>&);
template CheckpointInfo load_checkpoint<double>(const std::string&, ParamStore<double>&, ParamStore<double>&,
                                                Adam<double>&, Adam<double>&);

}  // namespace asma
