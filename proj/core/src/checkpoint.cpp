#include "tgrpo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "tgrpo/errors.hpp"

namespace tgrpo {
namespace {

constexpr char kMagic[8] = {'T', 'G', 'R', 'P', 'O', 'C', 'K', 'P'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void raw(const void* data, std::size_t n) {
    out_.append(static_cast<const char*>(data), n);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  void raw(void* dst, std::size_t n) {
    if (pos_ + n > in_.size()) throw FormatError("checkpoint is truncated");
    std::memcpy(dst, in_.data() + pos_, n);
    pos_ += n;
  }
  // Guards vector sizes read from the file against absurd allocations.
  std::uint64_t count(std::size_t element_bytes) {
    const std::uint64_t n = u64();
    if (n > (in_.size() - pos_) / element_bytes) {
      throw FormatError("checkpoint length field exceeds file size");
    }
    return n;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& checkpoint) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u64(checkpoint.config_digest);
  const Architecture& arch = checkpoint.policy.architecture();
  w.u64(arch.input_dim);
  w.u64(arch.hidden.size());
  for (std::size_t h : arch.hidden) w.u64(h);
  w.u64(arch.action_count);
  const auto values = checkpoint.policy.values();
  w.u64(values.size());
  for (double v : values) w.f64(v);
  w.u8(checkpoint.optimizer ? 1 : 0);
  if (checkpoint.optimizer) {
    const OptimizerState& opt = *checkpoint.optimizer;
    w.f64(opt.config.learning_rate);
    w.f64(opt.config.beta1);
    w.f64(opt.config.beta2);
    w.f64(opt.config.epsilon);
    w.f64(opt.config.weight_decay);
    w.u64(opt.step);
    w.u64(opt.first_moment.size());
    for (double v : opt.first_moment) w.f64(v);
    w.u64(opt.second_moment.size());
    for (double v : opt.second_moment) w.f64(v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  char magic[sizeof kMagic];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a tgrpo checkpoint (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t digest = r.u64();
  Architecture arch;
  arch.input_dim = r.u64();
  const std::uint64_t hidden = r.count(8);
  for (std::uint64_t k = 0; k < hidden; ++k) arch.hidden.push_back(r.u64());
  arch.action_count = r.u64();
  const std::uint64_t n = r.count(8);
  std::vector<double> values(n);
  for (double& v : values) v = r.f64();
  Checkpoint ckpt{PolicyParams(arch, std::move(values)), std::nullopt, digest};
  if (r.u8() != 0) {
    OptimizerState opt;
    opt.config.learning_rate = r.f64();
    opt.config.beta1 = r.f64();
    opt.config.beta2 = r.f64();
    opt.config.epsilon = r.f64();
    opt.config.weight_decay = r.f64();
    opt.step = r.u64();
    opt.first_moment.resize(r.count(8));
    for (double& v : opt.first_moment) v = r.f64();
    opt.second_moment.resize(r.count(8));
    for (double& v : opt.second_moment) v = r.f64();
    if (opt.first_moment.size() != n || opt.second_moment.size() != n) {
      throw FormatError("optimizer moments do not match parameter count");
    }
    ckpt.optimizer = std::move(opt);
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint payload");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::string bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace tgrpo
