#include "rnli/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "rnli/errors.hpp"

namespace rnli {
namespace {

constexpr char kMagic[8] = {'R', 'N', 'L', 'I', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> buf) : buf_(std::move(buf)) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw CheckpointError("checkpoint truncated");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

Shape shape_from(const std::vector<std::size_t>& e) {
  switch (e.size()) {
    case 1: return Shape{e[0]};
    case 2: return Shape{e[0], e[1]};
    case 3: return Shape{e[0], e[1], e[2]};
    default: throw CheckpointError("unsupported tensor rank " + std::to_string(e.size()));
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamStore& store,
                     const std::string& config_json) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.u64(config_json.size());
  w.bytes(config_json.data(), config_json.size());
  w.f64(store.optimizer().rho);
  w.f64(store.optimizer().epsilon);
  w.u32(static_cast<std::uint32_t>(store.size()));
  for (ParamId id = 0; id < store.size(); ++id) {
    const std::string& name = store.name(id);
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    const Shape& s = store.value(id).shape();
    w.u32(static_cast<std::uint32_t>(s.rank()));
    for (std::size_t a = 0; a < s.rank(); ++a) w.u64(s[a]);
    for (const Tensor* t : {&store.value(id), &store.sq_grad(id), &store.sq_delta(id)}) {
      for (double v : t->values()) w.f64(v);
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

  if (r.str(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
    throw CheckpointError(path.string() + " is not a checkpoint");
  }
  if (const auto v = r.u32(); v != kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(v));
  }
  Checkpoint ck;
  ck.config_json = r.str(r.u64());
  AdaDeltaConfig opt;
  opt.rho = r.f64();
  opt.epsilon = r.f64();
  ck.store.set_optimizer(opt);
  const std::uint32_t count = r.u32();
  for (std::uint32_t p = 0; p < count; ++p) {
    std::string name = r.str(r.u32());
    const std::uint32_t rank = r.u32();
    if (rank < 1 || rank > 3) throw CheckpointError("bad rank for parameter " + name);
    std::vector<std::size_t> extents(rank);
    for (auto& e : extents) {
      e = r.u64();
      if (e == 0) throw CheckpointError("zero extent for parameter " + name);
    }
    const Shape shape = shape_from(extents);
    std::vector<double> values(shape.size());
    for (double& v : values) v = r.f64();
    const ParamId id = ck.store.add(name, Tensor(shape, std::move(values)));
    for (Tensor* t : {&ck.store.sq_grad(id), &ck.store.sq_delta(id)}) {
      for (double& v : t->values()) v = r.f64();
    }
  }
  if (!r.done()) throw CheckpointError("trailing bytes in checkpoint");
  return ck;
}

}  // namespace rnli
