#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace drt {

// Row-major n x d matrix of coordinates.
class PointMatrix {
 public:
  PointMatrix() = default;
  explicit PointMatrix(std::size_t dim) : dim_(dim) {}
  PointMatrix(std::size_t dim, std::vector<double> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const noexcept { return values_.empty(); }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }

  void reserve(std::size_t n) { values_.reserve(n * dim_); }
  void push_back(std::span<const double> point);
  void append(const PointMatrix& other);

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

enum class Source : std::uint8_t { Reference = 0, Contaminant = 1, Test = 2 };

const char* to_string(Source s) noexcept;
std::optional<Source> parse_source(std::string_view text) noexcept;

// Points tagged with the sample they come from. Per-source counts are kept
// up to date so count(source) is O(1).
class LabeledDataset {
 public:
  explicit LabeledDataset(std::size_t dim);
  LabeledDataset(PointMatrix points, std::vector<Source> sources);

  std::size_t dim() const noexcept { return points_.dim(); }
  std::size_t rows() const noexcept { return sources_.size(); }
  std::size_t count(Source s) const noexcept { return counts_[static_cast<std::size_t>(s)]; }

  std::span<const double> point(std::size_t i) const { return points_.row(i); }
  Source source(std::size_t i) const { return sources_[i]; }
  const PointMatrix& points() const noexcept { return points_; }
  const std::vector<Source>& sources() const noexcept { return sources_; }

  void add_row(std::span<const double> point, Source s);
  void append(const PointMatrix& points, Source s);

  // Row indices carrying the given tag, in row order.
  std::vector<std::size_t> indices_of(Source s) const;
  PointMatrix select(std::span<const std::size_t> indices) const;

  // True when every coordinate lies in [0, 1].
  bool in_unit_cube() const noexcept;

 private:
  PointMatrix points_;
  std::vector<Source> sources_;
  std::array<std::size_t, 3> counts_{};
};

// Index sets are tagged by their role so partition growth can only ever be
// handed part-sample rows and estimation only est-sample rows.
struct PartTag {};
struct EstTag {};

template <class Tag>
struct IndexSet {
  std::vector<std::size_t> indices;
  std::size_t size() const noexcept { return indices.size(); }
};

using PartIndices = IndexSet<PartTag>;
using EstIndices = IndexSet<EstTag>;

struct SampleSplit {
  PartIndices part_reference;
  EstIndices est_reference;
  PartIndices part_contaminant;
  EstIndices est_contaminant;

  std::size_t n0_part() const noexcept { return part_reference.size(); }
  std::size_t n0_est() const noexcept { return est_reference.size(); }
  std::size_t n1_part() const noexcept { return part_contaminant.size(); }
  std::size_t n1_est() const noexcept { return est_contaminant.size(); }
};

struct CsvSchema {
  // Name of the column holding 0 / 1 / test tags. Ignored when
  // `file_source` is set.
  std::string source_column = "source";
  // Assigns one tag to every row of the file; the file then needs no
  // source column (a column of that name is still skipped if present).
  std::optional<Source> file_source;
};

LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
LabeledDataset parse_csv(std::string_view text, const CsvSchema& schema = {});

// Writes a header (x0..x{d-1},source) and one row per point with
// round-trip precision.
void write_csv(const std::filesystem::path& path, const LabeledDataset& ds);

// Per coordinate: centre on the mean, apply asinh, rescale min->0, max->1.
LabeledDataset preprocess(const LabeledDataset& raw);

// Within each of the reference and contaminant sources, a uniformly random
// floor(frac_part * n_source) rows go to the part set, the rest to est.
SampleSplit split_training(const LabeledDataset& ds, double frac_part, std::uint64_t seed);

}  // namespace drt
