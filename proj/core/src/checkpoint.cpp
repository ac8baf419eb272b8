#include "dlcf/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <limits>

#include "dlcf/dataset.hpp"
#include "dlcf/errors.hpp"

namespace dlcf {

namespace {

constexpr std::string_view kMagic = "LCFD";

class Writer {
 public:
  void u32(std::uint32_t v) { little_endian(v, 4); }
  void u64(std::uint64_t v) { little_endian(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { out_.append(s); }
  void str(std::string_view s) {
    if (s.size() > std::numeric_limits<std::uint32_t>::max()) throw Error("string too long");
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }
  std::string take() { return std::move(out_); }

 private:
  void little_endian(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint32_t u32(const std::string& field) { return static_cast<std::uint32_t>(little_endian(4, field)); }
  std::uint64_t u64(const std::string& field) { return little_endian(8, field); }
  double f64(const std::string& field) { return std::bit_cast<double>(u64(field)); }
  std::string_view raw(std::size_t n, const std::string& field) {
    need(n, field);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str(const std::string& field) { return std::string(raw(u32(field + " length"), field)); }
  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n, const std::string& field) {
    if (in_.size() - pos_ < n) throw LoadError("checkpoint truncated while reading " + field);
  }
  std::uint64_t little_endian(int bytes, const std::string& field) {
    need(static_cast<std::size_t>(bytes), field);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const DebertaLcfModel& model, const Vocab& vocab) {
  Writer w;
  w.raw(kMagic);
  w.u32(kCheckpointVersion);
  w.str(model.config().to_text());
  w.u32(static_cast<std::uint32_t>(model.parameters().size()));
  for (const auto& p : model.parameters()) {
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) w.u64(d);
    for (double v : p.value.data()) w.f64(v);
  }
  w.u32(static_cast<std::uint32_t>(vocab.size()));
  for (const auto& t : vocab.tokens()) w.str(t);
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.raw(kMagic.size(), "magic") != kMagic) throw LoadError("not a checkpoint: bad magic");
  Checkpoint ckpt;
  ckpt.version = r.u32("version");
  if (ckpt.version != kCheckpointVersion) {
    throw LoadError("unsupported checkpoint version " + std::to_string(ckpt.version) +
                    " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  try {
    ckpt.config = ModelConfig::from_text(r.str("config"));
    ckpt.config.validate();
  } catch (const ConfigError& e) {
    throw LoadError(std::string("checkpoint config: ") + e.what());
  }
  const std::uint32_t count = r.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string field = "tensor " + std::to_string(i);
    NamedTensor t;
    t.name = r.str(field + " name");
    const std::uint32_t rank = r.u32(t.name + " rank");
    if (rank == 0 || rank > 8) throw LoadError("tensor '" + t.name + "' has invalid rank " + std::to_string(rank));
    Shape shape;
    std::uint64_t size = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const std::uint64_t d = r.u64(t.name + " dims");
      if (d == 0) throw LoadError("tensor '" + t.name + "' has a zero dimension");
      size *= d;
      shape.push_back(static_cast<std::size_t>(d));
    }
    if (size > r.remaining() / 8) throw LoadError("checkpoint truncated while reading " + t.name + " values");
    std::vector<double> values(static_cast<std::size_t>(size));
    for (auto& v : values) v = r.f64(t.name + " values");
    t.value = Tensor(std::move(shape), std::move(values));
    ckpt.tensors.push_back(std::move(t));
  }
  const std::uint32_t tokens = r.u32("vocabulary size");
  std::string vocab_text;
  for (std::uint32_t i = 0; i < tokens; ++i) {
    vocab_text += r.str("vocabulary token " + std::to_string(i));
    vocab_text += '\n';
  }
  try {
    ckpt.vocab = Vocab::from_text(vocab_text);
  } catch (const FormatError& e) {
    throw LoadError(std::string("checkpoint vocabulary: ") + e.what());
  }
  if (!r.done()) throw LoadError("checkpoint has trailing bytes after the vocabulary");
  if (ckpt.vocab.size() != ckpt.config.vocab_size) {
    throw LoadError("checkpoint vocabulary has " + std::to_string(ckpt.vocab.size()) +
                    " tokens but config.vocab_size is " + std::to_string(ckpt.config.vocab_size));
  }
  return ckpt;
}

void save_checkpoint(const DebertaLcfModel& model, const Vocab& vocab,
                     const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(model, vocab);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_text_file(path));
}

void load_parameters(DebertaLcfModel& model, const Checkpoint& ckpt) {
  model.assign_parameters(ckpt.tensors);
}

DebertaLcfModel restore_model(const Checkpoint& ckpt) {
  auto model = DebertaLcfModel::build(ckpt.config);
  load_parameters(model, ckpt);
  return model;
}

}  // namespace dlcf
