#include "sequnet/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

namespace sequnet {
namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  template <typename U>
  void le(U v) {
    using Raw = std::conditional_t<sizeof(U) == 8, std::uint64_t,
                                   std::conditional_t<sizeof(U) == 4, std::uint32_t,
                                                      std::conditional_t<sizeof(U) == 2, std::uint16_t, std::uint8_t>>>;
    Raw r;
    std::memcpy(&r, &v, sizeof(U));
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(r >> (8 * i)));
  }
  void str(const std::string& s) {
    le<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void floats(const std::vector<float>& v) {
    for (float f : v) le(f);
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : in(b) {}
  void need(std::size_t n) {
    if (pos + n > in.size())
      throw DataError("checkpoint truncated at byte offset " + std::to_string(pos));
  }
  template <typename U>
  U le() {
    using Raw = std::conditional_t<sizeof(U) == 8, std::uint64_t,
                                   std::conditional_t<sizeof(U) == 4, std::uint32_t,
                                                      std::conditional_t<sizeof(U) == 2, std::uint16_t, std::uint8_t>>>;
    need(sizeof(U));
    Raw r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) r |= static_cast<Raw>(static_cast<Raw>(in[pos + i]) << (8 * i));
    pos += sizeof(U);
    U v;
    std::memcpy(&v, &r, sizeof(U));
    return v;
  }
  std::string str() {
    const auto n = le<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(in.data() + pos), n);
    pos += n;
    return s;
  }
  std::vector<float> floats(std::size_t n) {
    need(n * 4);
    std::vector<float> v(n);
    for (auto& f : v) f = le<float>();
    return v;
  }
  const std::vector<std::uint8_t>& in;
  std::size_t pos = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Model<float>& model, const OptimizerSection* optimizer) {
  Writer w;
  w.bytes("SUNW", 4);
  w.le<std::uint16_t>(kCheckpointVersion);
  w.str(model.config().to_text());
  const auto& store = model.params();
  w.le<std::uint32_t>(static_cast<std::uint32_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& p = store[i];
    w.str(p.name);
    w.le<std::uint32_t>(static_cast<std::uint32_t>(p.shape.size()));
    for (int d : p.shape) w.le<std::uint32_t>(static_cast<std::uint32_t>(d));
    w.floats(p.value);
  }
  w.le<std::uint8_t>(optimizer ? 1 : 0);
  if (optimizer) {
    if (optimizer->first_moment.size() != store.size() || optimizer->second_moment.size() != store.size())
      throw ShapeError("optimizer state does not cover every parameter");
    w.le<std::uint64_t>(optimizer->step);
    w.le<std::int32_t>(optimizer->epoch);
    w.le<double>(optimizer->learning_rate);
    w.le<double>(optimizer->best_metric);
    w.le<std::int32_t>(optimizer->stalled_epochs);
    for (std::size_t i = 0; i < store.size(); ++i) {
      if (optimizer->first_moment[i].size() != store[i].size() || optimizer->second_moment[i].size() != store[i].size())
        throw ShapeError("optimizer moment size mismatch for " + store[i].name);
      w.floats(optimizer->first_moment[i]);
      w.floats(optimizer->second_moment[i]);
    }
  }
  return std::move(w.out);
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(4);
  if (std::memcmp(bytes.data(), "SUNW", 4) != 0) throw DataError("not a checkpoint: bad magic bytes");
  r.pos = 4;
  const auto version = r.le<std::uint16_t>();
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  ck.config = ModelConfig::from_text(r.str());
  const auto count = r.le<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const auto rank = r.le<std::uint32_t>();
    if (rank > 8) throw DataError("implausible rank for " + name);
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(r.le<std::uint32_t>());
    auto& p = ck.params.add(name, shape);
    p.value = r.floats(p.size());
  }
  if (r.le<std::uint8_t>() == 1) {
    OptimizerSection o;
    o.step = r.le<std::uint64_t>();
    o.epoch = r.le<std::int32_t>();
    o.learning_rate = r.le<double>();
    o.best_metric = r.le<double>();
    o.stalled_epochs = r.le<std::int32_t>();
    for (std::size_t i = 0; i < ck.params.size(); ++i) {
      o.first_moment.push_back(r.floats(ck.params[i].size()));
      o.second_moment.push_back(r.floats(ck.params[i].size()));
    }
    ck.optimizer = std::move(o);
  }
  if (r.pos != bytes.size()) throw DataError("trailing bytes after checkpoint at offset " + std::to_string(r.pos));
  return ck;
}

void save_checkpoint(const std::string& path, const Model<float>& model, const OptimizerSection* optimizer) {
  const auto bytes = serialize_checkpoint(model, optimizer);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write checkpoint: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

Model<float> model_from_checkpoint(const Checkpoint& ckpt) {
  return Model<float>(build_graph(ckpt.config), ckpt.params);
}

}  // namespace sequnet
