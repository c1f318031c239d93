#include "encoder/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "common/errors.hpp"

namespace mgh::enc {
namespace {

constexpr char kMagic[8] = {'M', 'G', 'H', 'C', 'K', 'P', 'T', '\0'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const std::string& field) {
    if (pos_ + sizeof(T) > bytes_.size()) throw FormatError(field, "truncated");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string take(std::size_t n, const std::string& field) {
    if (n > bytes_.size() - pos_) throw FormatError(field, "truncated");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Encoder& model) {
  if (!model.initialized()) throw ContractError("cannot serialize an uninitialized encoder");
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::string cfg = to_json(model.config()).dump();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
  out += cfg;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.params().size()));
  for (const auto& p : model.params()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) put<std::uint64_t>(out, d);
    for (double v : p.value.data()) put<double>(out, v);
  }
  return out;
}

Encoder deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.take(sizeof kMagic, "magic") != std::string(kMagic, sizeof kMagic)) {
    throw FormatError("magic", "not an encoder checkpoint");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("version", "unsupported version " + std::to_string(version));
  }
  const auto cfg_len = r.get<std::uint32_t>("config_len");
  const std::string cfg_text = r.take(cfg_len, "config");
  EncoderConfig cfg;
  try {
    cfg = encoder_config_from_json(nlohmann::json::parse(cfg_text));
    cfg.validate();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config", e.what());
  } catch (const ConfigError& e) {
    throw FormatError("config", e.what());
  }
  const auto layout = parameter_layout(cfg);
  const auto count = r.get<std::uint32_t>("tensor_count");
  if (count != layout.size()) {
    throw FormatError("tensor_count", "expected " + std::to_string(layout.size()) + ", found " +
                                          std::to_string(count));
  }
  std::vector<NamedTensor> params;
  params.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string tag = "tensor[" + std::to_string(i) + "]";
    const auto name_len = r.get<std::uint32_t>(tag + ".name_len");
    std::string name = r.take(name_len, tag + ".name");
    if (name != layout[i].first) {
      throw FormatError(tag + ".name", "expected '" + layout[i].first + "', found '" + name + "'");
    }
    const auto rank = r.get<std::uint32_t>(tag + ".rank");
    if (rank != layout[i].second.size()) throw FormatError(tag + ".rank", "mismatch");
    num::Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint64_t>(tag + ".dims");
    if (shape != layout[i].second) {
      throw FormatError(tag + ".dims", num::shape_string(shape) + " does not match config");
    }
    std::vector<double> data(num::shape_size(shape));
    for (auto& v : data) v = r.get<double>(tag + ".data");
    params.push_back({std::move(name), num::Tensor(std::move(shape), std::move(data))});
  }
  if (!r.done()) throw FormatError("trailing", "unexpected bytes after last tensor");
  return Encoder(cfg, std::move(params));
}

void save_checkpoint(const Encoder& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(path.string(), "cannot open checkpoint for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FileError(path.string(), "failed writing checkpoint");
}

Encoder load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path.string(), "cannot open checkpoint");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace mgh::enc
