#include "drt/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "drt/error.hpp"
#include "drt/random.hpp"

namespace drt {

PointMatrix::PointMatrix(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw PreconditionError("point matrix dimension must be positive");
  if (values_.size() % dim_ != 0) throw PreconditionError("value count is not a multiple of the dimension");
}

void PointMatrix::push_back(std::span<const double> point) {
  if (point.size() != dim_) throw PreconditionError("point dimension mismatch");
  values_.insert(values_.end(), point.begin(), point.end());
}

void PointMatrix::append(const PointMatrix& other) {
  if (other.empty()) return;
  if (other.dim_ != dim_) throw PreconditionError("point dimension mismatch");
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
}

const char* to_string(Source s) noexcept {
  switch (s) {
    case Source::Reference: return "0";
    case Source::Contaminant: return "1";
    case Source::Test: return "test";
  }
  return "?";
}

std::optional<Source> parse_source(std::string_view text) noexcept {
  if (text == "0" || text == "reference") return Source::Reference;
  if (text == "1" || text == "contaminant") return Source::Contaminant;
  if (text == "test") return Source::Test;
  return std::nullopt;
}

LabeledDataset::LabeledDataset(std::size_t dim) : points_(dim) {
  if (dim == 0) throw PreconditionError("dataset dimension must be positive");
}

LabeledDataset::LabeledDataset(PointMatrix points, std::vector<Source> sources)
    : points_(std::move(points)), sources_(std::move(sources)) {
  if (points_.dim() == 0) throw PreconditionError("dataset dimension must be positive");
  if (points_.rows() != sources_.size()) throw PreconditionError("one source tag per row is required");
  for (Source s : sources_) ++counts_[static_cast<std::size_t>(s)];
}

void LabeledDataset::add_row(std::span<const double> point, Source s) {
  points_.push_back(point);
  sources_.push_back(s);
  ++counts_[static_cast<std::size_t>(s)];
}

void LabeledDataset::append(const PointMatrix& points, Source s) {
  points_.append(points);
  sources_.insert(sources_.end(), points.rows(), s);
  counts_[static_cast<std::size_t>(s)] += points.rows();
}

std::vector<std::size_t> LabeledDataset::indices_of(Source s) const {
  std::vector<std::size_t> out;
  out.reserve(count(s));
  for (std::size_t i = 0; i < sources_.size(); ++i)
    if (sources_[i] == s) out.push_back(i);
  return out;
}

PointMatrix LabeledDataset::select(std::span<const std::size_t> indices) const {
  PointMatrix out(dim());
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(point(i));
  return out;
}

bool LabeledDataset::in_unit_cube() const noexcept {
  return std::all_of(points_.values().begin(), points_.values().end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

LabeledDataset parse_csv(std::string_view text, const CsvSchema& schema) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  std::string_view line;
  if (!next_line(line)) throw SchemaError("no rows");
  const auto header = split_fields(line);
  std::optional<std::size_t> source_col;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == schema.source_column) source_col = j;
  if (!source_col && !schema.file_source)
    throw SchemaError("missing label: no '" + schema.source_column + "' column and no per-file source tag");

  const std::size_t dim = header.size() - (source_col ? 1 : 0);
  if (dim == 0) throw SchemaError("no feature columns");

  PointMatrix points(dim);
  std::vector<Source> sources;
  std::vector<double> row(dim);
  while (next_line(line)) {
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()),
                       line_no);
    std::size_t k = 0;
    Source tag = schema.file_source.value_or(Source::Test);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (source_col && j == *source_col) {
        if (schema.file_source) continue;
        const auto parsed = parse_source(fields[j]);
        if (!parsed) throw ParseError("unknown source tag '" + std::string(fields[j]) + "'", line_no);
        tag = *parsed;
        continue;
      }
      if (!parse_double(fields[j], row[k]))
        throw ParseError("non-numeric value '" + std::string(fields[j]) + "' in column '" + std::string(header[j]) + "'",
                         line_no);
      ++k;
    }
    points.push_back(row);
    sources.push_back(tag);
  }
  if (sources.empty()) throw SchemaError("no rows");
  return LabeledDataset(std::move(points), std::move(sources));
}

LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema);
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t j = 0; j < ds.dim(); ++j) out << 'x' << j << ',';
  out << "source\n";
  char buf[32];
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (double v : ds.point(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out.write(buf, ptr - buf);
      out << ',';
    }
    out << to_string(ds.source(i)) << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

LabeledDataset preprocess(const LabeledDataset& raw) {
  const std::size_t n = raw.rows();
  const std::size_t d = raw.dim();
  if (n < 2) throw DegenerateAxisError("preprocessing needs at least two rows");
  std::vector<double> values = raw.points().values();
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += values[i * d + j];
    mean /= static_cast<double>(n);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      double& v = values[i * d + j];
      v = std::asinh(v - mean);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) throw DegenerateAxisError("coordinate " + std::to_string(j) + " is constant after transform");
    const double range = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
      double& v = values[i * d + j];
      v = (v - lo) / range;
    }
  }
  return LabeledDataset(PointMatrix(d, std::move(values)), raw.sources());
}

SampleSplit split_training(const LabeledDataset& ds, double frac_part, std::uint64_t seed) {
  if (!(frac_part > 0.0 && frac_part < 1.0)) throw PreconditionError("frac_part must lie in (0, 1)");
  auto split_one = [&](Source s, std::uint64_t stream, auto& part, auto& est) {
    auto idx = ds.indices_of(s);
    if (idx.size() < 2)
      throw PreconditionError(std::string("source ") + to_string(s) + " needs at least 2 rows to split");
    const auto n_part = static_cast<std::size_t>(std::floor(frac_part * static_cast<double>(idx.size())));
    if (n_part == 0 || n_part == idx.size())
      throw PreconditionError(std::string("split of source ") + to_string(s) + " leaves an empty side");
    Rng rng = make_rng(seed, {stream});
    // Fisher-Yates over the first n_part slots is enough to pick a uniform subset.
    for (std::size_t i = 0; i < n_part; ++i) {
      const auto j = i + uniform_index(rng, idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    part.indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_part));
    est.indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_part), idx.end());
    std::sort(part.indices.begin(), part.indices.end());
    std::sort(est.indices.begin(), est.indices.end());
  };
  SampleSplit split;
  split_one(Source::Reference, 0, split.part_reference, split.est_reference);
  split_one(Source::Contaminant, 1, split.part_contaminant, split.est_contaminant);
  return split;
}

}  // namespace drt
