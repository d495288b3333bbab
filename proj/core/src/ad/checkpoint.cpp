#include "rumi/ad/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace rumi::ad {

namespace {

constexpr char kMagic[8] = {'R', 'U', 'M', 'I', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint: truncated at byte " + std::to_string(pos_));
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const ParamStore& store, const std::string& meta) {
  std::string out(kMagic, sizeof(kMagic));
  put_le(out, kVersion);
  put_le(out, static_cast<std::uint64_t>(meta.size()));
  out += meta;
  const auto params = store.all();
  put_le(out, static_cast<std::uint64_t>(params.size()));
  for (const Parameter* p : params) {
    put_le(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    put_le(out, static_cast<std::uint8_t>((p->frozen ? 1 : 0) | (p->regularized ? 2 : 0)));
    put_le(out, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape()) put_le(out, static_cast<std::uint64_t>(d));
    for (double v : p->value.data()) put_f64(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic)))
    throw CheckpointError("checkpoint: bad magic");
  if (const auto v = in.get<std::uint32_t>(); v != kVersion)
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(v));
  Checkpoint ckpt;
  ckpt.meta = in.str(in.get<std::uint64_t>());
  const auto count = in.get<std::uint64_t>();
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedTensor nt;
    nt.name = in.str(in.get<std::uint32_t>());
    const auto flags = in.get<std::uint8_t>();
    nt.frozen = flags & 1;
    nt.regularized = flags & 2;
    const auto rank = in.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(in.get<std::uint64_t>());
    Tensor t(shape);
    for (double& v : t.data()) v = in.f64();
    nt.value = std::move(t);
    ckpt.tensors.push_back(std::move(nt));
  }
  if (!in.done()) throw CheckpointError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& store,
                     const std::string& meta) {
  const std::string bytes = encode_checkpoint(store, meta);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("checkpoint: cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw CheckpointError("checkpoint: write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

void restore(ParamStore& store, const Checkpoint& ckpt) {
  std::unordered_map<std::string, const NamedTensor*> by_name;
  for (const auto& nt : ckpt.tensors) by_name.emplace(nt.name, &nt);
  for (Parameter* p : store.all()) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw CheckpointError("checkpoint: missing parameter " + p->name);
    if (it->second->value.shape() != p->value.shape())
      throw CheckpointError("checkpoint: parameter " + p->name + " has shape " +
                            shape_string(it->second->value.shape()) + ", model expects " +
                            shape_string(p->value.shape()));
  }
  if (by_name.size() != store.size())
    throw CheckpointError("checkpoint: holds " + std::to_string(by_name.size()) +
                          " parameters, model has " + std::to_string(store.size()));
  for (Parameter* p : store.all()) p->value = by_name.at(p->name)->value;
}

}  // namespace rumi::ad
