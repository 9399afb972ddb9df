#include "pseudomix/checkpoint.hpp"

#include <cstring>

#include "pseudomix/error.hpp"

namespace pseudomix::nmt {

namespace {

template <typename U>
void put(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

void put_float(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  put(out, bits);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return static_cast<U>(v);
  }

  float get_float() {
    const auto bits = get<std::uint32_t>();
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
  }

  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) {
    if (p > bytes_.size()) throw CorruptionError(bytes_.size(), "checkpoint truncated before tensor data");
    pos_ = p;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw CorruptionError(pos_, "checkpoint truncated: " + std::to_string(n) + " bytes needed, " +
                                      std::to_string(bytes_.size() - pos_) + " left");
    }
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::size_t header_size() {
  std::size_t n = 4 + 4 + 4;
  for (const auto& [name, member] : ModelParameters::tensors()) n += 2 + name.size() + 4 + 4 + 8;
  return n;
}

}  // namespace

std::size_t checkpoint_size(const ModelShape& shape) {
  return header_size() + 4 * ModelParameters::zeros(shape).num_values();
}

std::string serialize_checkpoint(const ModelParameters& params) {
  std::string out;
  out.reserve(header_size() + 4 * params.num_values());
  out.append(kCheckpointMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, ModelParameters::kNumTensors);
  std::uint64_t offset = 0;
  params.for_each([&](std::string_view name, const Mat<float>& m) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.append(name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    put<std::uint64_t>(out, offset);
    offset += 4 * static_cast<std::uint64_t>(m.size());
  });
  params.for_each([&](std::string_view, const Mat<float>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) put_float(out, m(i, j));
    }
  });
  return out;
}

ModelParameters deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw FormatError("not a checkpoint: bad magic bytes");
  }
  Reader in(bytes);
  in.get_bytes(4);
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = in.get<std::uint32_t>();
  if (count != ModelParameters::kNumTensors) {
    throw FormatError("checkpoint has " + std::to_string(count) + " tensors, expected " +
                      std::to_string(ModelParameters::kNumTensors));
  }
  struct Entry {
    std::uint32_t rows, cols;
    std::uint64_t offset;
  };
  std::vector<Entry> entries;
  for (const auto& [name, member] : ModelParameters::tensors()) {
    const auto len = in.get<std::uint16_t>();
    const auto got = in.get_bytes(len);
    if (got != name) throw FormatError("checkpoint tensor '" + got + "', expected '" + std::string(name) + "'");
    Entry e{};
    e.rows = in.get<std::uint32_t>();
    e.cols = in.get<std::uint32_t>();
    e.offset = in.get<std::uint64_t>();
    entries.push_back(e);
  }
  const std::size_t data_start = in.pos();

  ModelParameters p;
  std::size_t k = 0;
  for (const auto& [name, member] : ModelParameters::tensors()) {
    const auto& e = entries[k++];
    in.seek(data_start + e.offset);
    auto& m = p.*member;
    m.resize(e.rows, e.cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = in.get_float();
    }
  }
  // Shapes must agree with each other.
  const auto shape = p.shape();
  const auto expected = ModelParameters::zeros(shape);
  const auto a = ModelParameters::tensors();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = p.*(a[i].second);
    const auto& y = expected.*(a[i].second);
    if (x.rows() != y.rows() || x.cols() != y.cols()) {
      throw FormatError("checkpoint tensor '" + std::string(a[i].first) + "' has inconsistent shape");
    }
  }
  return p;
}

void checkpoint_save(const ModelParameters& params, const std::string& path) {
  text::write_file(path, serialize_checkpoint(params));
}

ModelParameters checkpoint_load(const std::string& path) {
  return deserialize_checkpoint(text::read_file(path));
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  checkpoint_save(bundle.params, path);
  bundle.source_vocab.save(path + ".src.vocab");
  bundle.target_vocab.save(path + ".tgt.vocab");
}

ModelBundle load_bundle(const std::string& path) {
  ModelBundle b{checkpoint_load(path), Vocabulary::load(path + ".src.vocab"),
                Vocabulary::load(path + ".tgt.vocab")};
  const auto shape = b.params.shape();
  if (shape.source_vocab != b.source_vocab.size() || shape.target_vocab != b.target_vocab.size()) {
    throw FormatError("vocabulary sizes do not match checkpoint " + path);
  }
  return b;
}

}  // namespace pseudomix::nmt
