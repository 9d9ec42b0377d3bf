#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drt/box.hpp"
#include "drt/dataset.hpp"

namespace drt {

// Binary tree of axis-aligned splits over [0,1]^d stored as an index arena.
//
// Nodes are only ever appended, two per split, so the tree with K leaves
// occupies the first 2K-1 nodes of any tree grown from it. Every node keeps
// the bin id it carried while it was a leaf; on a split the left child
// inherits that id and the right child takes id K. A prefix of the arena
// therefore reproduces each earlier partition of a nested sequence exactly.
class PartitionTree {
 public:
  struct Node {
    int split_dim = -1;  // -1 for leaves
    double split_value = 0.0;
    int left = -1;
    int right = -1;
    int bin = 0;

    bool is_leaf() const noexcept { return split_dim < 0; }
  };

  explicit PartitionTree(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t bin_count() const noexcept { return leaf_node_.size(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  int leaf_node(int bin) const { return leaf_node_.at(static_cast<std::size_t>(bin)); }

  // Leaf bin of x. Goes left when x[dim] < value, right otherwise.
  int locate(std::span<const double> x) const;
  // Same descent, reporting the arena index of the leaf.
  int locate_node(std::span<const double> x) const;

  Box bin_box(int bin) const;
  Box node_box(int node) const;

  // Copy of the tree with `bin` split at `value` along `dim`.
  PartitionTree split_leaf(int bin, std::size_t dim, double value) const;
  void split_leaf_in_place(int bin, std::size_t dim, double value);

  // The partition this tree had when it held `k` leaves. Only defined for
  // trees whose arena reflects their growth order (see is_sequential()).
  PartitionTree prefix(std::size_t k) const;
  bool is_sequential() const noexcept { return sequential_; }

  // Nested {"dim","value","left","right"} / {"bin"} JSON document.
  std::string to_json() const;
  static PartitionTree from_json(const std::string& text);

  friend bool operator==(const PartitionTree& a, const PartitionTree& b);

 private:
  std::size_t dim_;
  std::vector<Node> nodes_;
  std::vector<int> leaf_node_;  // bin id -> node index
  bool sequential_ = true;
};

bool operator==(const PartitionTree::Node& a, const PartitionTree::Node& b);

// Per-bin counts for the reference, contaminant and test samples.
struct BinTable {
  std::vector<std::int64_t> n0;
  std::vector<std::int64_t> n1;
  std::vector<std::int64_t> n_test;

  std::size_t bins() const noexcept { return n0.size(); }
  std::int64_t total0() const noexcept;
  std::int64_t total1() const noexcept;
  std::int64_t total_test() const noexcept;
};

// Bin id of each listed row.
std::vector<int> locate_all(const PartitionTree& tree, const PointMatrix& points);
std::vector<int> locate_all(const PartitionTree& tree, const LabeledDataset& ds, std::span<const std::size_t> rows);

// Number of listed rows falling in each bin.
std::vector<std::int64_t> count_bins(const PartitionTree& tree, const LabeledDataset& ds,
                                     std::span<const std::size_t> rows);
std::vector<std::int64_t> count_bins(const PartitionTree& tree, const PointMatrix& points);
// Rows are restricted to those tagged with `source`.
std::vector<std::int64_t> count_bins(const PartitionTree& tree, const LabeledDataset& ds,
                                     std::span<const std::size_t> rows, Source source);

std::vector<std::int64_t> histogram_of(std::span<const int> bins, std::size_t bin_count);

}  // namespace drt
