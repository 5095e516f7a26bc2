#include "prw/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "prw/errors.hpp"

namespace prw {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'P', 'R', 'W', 'C', 'K', 'P', 'T', '\0'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += 4;
    return v;
  }
  std::string text(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  double f32() { return std::bit_cast<float>(u32()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("checkpoint is truncated");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint Checkpoint::from_net(const EmbeddingNet& net) {
  Checkpoint c;
  c.layer_sizes = net.layer_sizes();
  for (const auto& p : net.params()) {
    Matrix q = p;
    for (auto& v : q.data()) v = static_cast<float>(v);
    c.params.push_back(std::move(q));
  }
  return c;
}

EmbeddingNet Checkpoint::net() const {
  EmbeddingNet n(layer_sizes);
  if (n.params().size() != params.size()) throw DataError("checkpoint tensor count does not match architecture");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].rows() != n.params()[k].rows() || params[k].cols() != n.params()[k].cols()) {
      throw DataError("checkpoint tensor " + std::to_string(k) + " has the wrong shape");
    }
    n.params()[k] = params[k];
  }
  return n;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  json tensors = json::array();
  for (const auto& p : ckpt.params) tensors.push_back({p.rows(), p.cols()});
  const json header = {
      {"architecture", {{"layers", ckpt.layer_sizes}, {"activation", "relu"}}},
      {"tensors", tensors},
      {"config_digest", ckpt.config_digest},
      {"tag", ckpt.tag},
      {"episode", ckpt.episode},
      {"validation_accuracy", ckpt.validation_accuracy},
  };
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& p : ckpt.params) {
    put_u32(out, static_cast<std::uint32_t>(p.rows()));
    put_u32(out, static_cast<std::uint32_t>(p.cols()));
    for (double v : p.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  if (in.text(8) != std::string(kMagic, 8)) throw DataError("not a checkpoint (bad magic)");
  const auto version = in.u32();
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  std::size_t n_tensors = 0;
  try {
    const json header = json::parse(in.text(in.u32()));
    c.layer_sizes = header.at("architecture").at("layers").get<std::vector<std::size_t>>();
    c.config_digest = header.at("config_digest").get<std::string>();
    c.tag = header.at("tag").get<std::string>();
    c.episode = header.at("episode").get<std::uint64_t>();
    c.validation_accuracy = header.at("validation_accuracy").get<double>();
    n_tensors = header.at("tensors").size();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint header: ") + e.what());
  }
  for (std::size_t k = 0; k < n_tensors; ++k) {
    const auto rows = in.u32();
    const auto cols = in.u32();
    Matrix p(rows, cols);
    for (auto& v : p.data()) v = in.f32();
    c.params.push_back(std::move(p));
  }
  if (!in.done()) throw DataError("trailing bytes after checkpoint tensors");
  c.net();  // validates shapes against the architecture
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

}  // namespace prw
