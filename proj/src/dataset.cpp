#include "prw/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

#include "prw/errors.hpp"

namespace prw {

namespace fs = std::filesystem;
using nlohmann::json;

Dataset::Dataset(std::vector<ClassRecord> classes) : classes_(std::move(classes)) {
  if (classes_.empty()) throw DataError("dataset has no classes");
  dim_ = classes_.front().points.cols();
  std::set<std::string> seen;
  for (const auto& c : classes_) {
    if (!seen.insert(c.id).second) throw DataError("duplicate class id '" + c.id + "'");
    if (c.points.rows() > 0 && c.points.cols() != dim_) {
      throw DataError("class '" + c.id + "' has dimension " + std::to_string(c.points.cols()) +
                      ", expected " + std::to_string(dim_));
    }
  }
  if (dim_ == 0) throw DataError("dataset has zero feature dimension");
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
  if (first + count > classes_.size()) {
    throw CapacityError("dataset slice [" + std::to_string(first) + ", " +
                        std::to_string(first + count) + ") exceeds " +
                        std::to_string(classes_.size()) + " classes");
  }
  return Dataset(std::vector<ClassRecord>(classes_.begin() + static_cast<std::ptrdiff_t>(first),
                                          classes_.begin() + static_cast<std::ptrdiff_t>(first + count)));
}

void write_f32_le(std::ostream& out, std::span<const double> values) {
  std::vector<char> buf(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int b = 0; b < 4; ++b) buf[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<double> read_f32_le(std::istream& in, std::size_t count) {
  std::vector<unsigned char> buf(count * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw IoError("truncated float32 payload");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(buf[i * 4 + b]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

void save_dataset(const Dataset& ds, const fs::path& dir, bool overwrite) {
  const fs::path manifest_path = dir / "manifest.json";
  if (fs::exists(manifest_path) && !overwrite) {
    throw IoError("refusing to overwrite existing dataset at " + dir.string());
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  json manifest = {{"format", "prw-dataset"}, {"version", 1}, {"dim", ds.dim()}};
  json classes = json::array();
  for (const auto& c : ds.classes()) {
    const std::string file = c.id + ".bin";
    std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / file).string());
    write_f32_le(out, c.points.data());
    if (!out) throw IoError("write failed for " + (dir / file).string());
    classes.push_back({{"id", c.id}, {"file", file}, {"points", c.points.rows()}});
  }
  manifest["classes"] = std::move(classes);
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + manifest_path.string());
  out << manifest.dump(2) << '\n';
}

Dataset load_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  try {
    if (manifest.at("format").get<std::string>() != "prw-dataset") {
      throw DataError("unexpected manifest format in " + manifest_path.string());
    }
    if (manifest.at("version").get<int>() != 1) throw DataError("unsupported dataset version");
    const auto dim = manifest.at("dim").get<std::size_t>();
    std::vector<ClassRecord> classes;
    for (const auto& entry : manifest.at("classes")) {
      const auto id = entry.at("id").get<std::string>();
      const auto n = entry.at("points").get<std::size_t>();
      if (n == 0) throw DataError("class '" + id + "' is empty");
      const fs::path file = dir / entry.at("file").get<std::string>();
      std::ifstream bin(file, std::ios::binary);
      if (!bin) throw IoError("cannot open " + file.string());
      classes.push_back({id, Matrix(n, dim, read_f32_le(bin, n * dim))});
    }
    return Dataset(std::move(classes));
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
}

}  // namespace prw
