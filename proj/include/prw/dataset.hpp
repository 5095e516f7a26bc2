#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "prw/matrix.hpp"

namespace prw {

struct ClassRecord {
  std::string id;
  Matrix points;  // [n_points x dim]
};

// A labelled collection of feature vectors grouped by class. All classes share
// one feature dimension and carry unique ids.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<ClassRecord> classes);

  std::size_t num_classes() const { return classes_.size(); }
  std::size_t dim() const { return dim_; }
  const ClassRecord& cls(std::size_t i) const { return classes_.at(i); }
  const std::vector<ClassRecord>& classes() const { return classes_; }

  // Classes [first, first + count) as a new dataset.
  Dataset slice(std::size_t first, std::size_t count) const;

 private:
  std::vector<ClassRecord> classes_;
  std::size_t dim_ = 0;
};

// On-disk layout:
//   <dir>/manifest.json   {"format": "prw-dataset", "version": 1, "dim": d,
//                          "classes": [{"id": ..., "file": ..., "points": n}, ...]}
//   <dir>/<file>          n*d little-endian float32 values, row-major
// Values are stored as float32, so save() rounds to single precision.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir, bool overwrite = false);
Dataset load_dataset(const std::filesystem::path& dir);

// Writes `values` as little-endian float32.
void write_f32_le(std::ostream& out, std::span<const double> values);
std::vector<double> read_f32_le(std::istream& in, std::size_t count);

}  // namespace prw
