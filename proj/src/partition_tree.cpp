#include "drt/partition_tree.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <numeric>

#include "drt/error.hpp"
#include "json.hpp"

namespace drt {

using nlohmann::json;

PartitionTree::PartitionTree(std::size_t dim) : dim_(dim), nodes_(1), leaf_node_{0} {
  if (dim == 0) throw PreconditionError("tree dimension must be positive");
}

int PartitionTree::locate_node(std::span<const double> x) const {
  if (x.size() != dim_) throw PreconditionError("point dimension " + std::to_string(x.size()) +
                                                " does not match tree dimension " + std::to_string(dim_));
  int v = 0;
  while (!nodes_[v].is_leaf()) {
    const Node& n = nodes_[v];
    v = x[n.split_dim] < n.split_value ? n.left : n.right;
  }
  return v;
}

int PartitionTree::locate(std::span<const double> x) const { return nodes_[locate_node(x)].bin; }

Box PartitionTree::node_box(int node) const {
  if (node < 0 || static_cast<std::size_t>(node) >= nodes_.size()) throw PreconditionError("node index out of range");
  // Walk down from the root; the arena has no parent links.
  Box box = Box::unit(dim_);
  std::vector<int> path;
  std::function<bool(int)> find = [&](int v) {
    path.push_back(v);
    if (v == node) return true;
    if (!nodes_[v].is_leaf() && (find(nodes_[v].left) || find(nodes_[v].right))) return true;
    path.pop_back();
    return false;
  };
  find(0);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Node& n = nodes_[path[i]];
    if (path[i + 1] == n.left)
      box.hi[n.split_dim] = n.split_value;
    else
      box.lo[n.split_dim] = n.split_value;
  }
  return box;
}

Box PartitionTree::bin_box(int bin) const {
  if (bin < 0 || static_cast<std::size_t>(bin) >= leaf_node_.size()) throw PreconditionError("bin id out of range");
  return node_box(leaf_node_[bin]);
}

void PartitionTree::split_leaf_in_place(int bin, std::size_t dim, double value) {
  if (bin < 0 || static_cast<std::size_t>(bin) >= leaf_node_.size()) throw PreconditionError("bin id out of range");
  if (dim >= dim_) throw PreconditionError("split dimension out of range");
  const int leaf = leaf_node_[bin];
  const Box box = node_box(leaf);
  if (!(value > box.lo[dim] && value < box.hi[dim]))
    throw PreconditionError("split value " + std::to_string(value) + " is not strictly inside the bin extent [" +
                            std::to_string(box.lo[dim]) + ", " + std::to_string(box.hi[dim]) + ")");
  const int left = static_cast<int>(nodes_.size());
  const int right = left + 1;
  const int new_bin = static_cast<int>(leaf_node_.size());
  nodes_.push_back(Node{-1, 0.0, -1, -1, bin});
  nodes_.push_back(Node{-1, 0.0, -1, -1, new_bin});
  Node& parent = nodes_[leaf];
  parent.split_dim = static_cast<int>(dim);
  parent.split_value = value;
  parent.left = left;
  parent.right = right;
  leaf_node_[bin] = left;
  leaf_node_.push_back(right);
}

PartitionTree PartitionTree::split_leaf(int bin, std::size_t dim, double value) const {
  PartitionTree copy = *this;
  copy.split_leaf_in_place(bin, dim, value);
  return copy;
}

PartitionTree PartitionTree::prefix(std::size_t k) const {
  if (!sequential_) throw PreconditionError("tree arena does not record a growth order");
  if (k == 0 || k > bin_count()) throw PreconditionError("prefix size out of range");
  PartitionTree out(dim_);
  const std::size_t keep = 2 * k - 1;
  out.nodes_.assign(nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(keep));
  out.leaf_node_.assign(k, -1);
  for (std::size_t v = 0; v < keep; ++v) {
    Node& n = out.nodes_[v];
    if (!n.is_leaf() && static_cast<std::size_t>(n.left) >= keep) n = Node{-1, 0.0, -1, -1, n.bin};
    if (n.is_leaf()) out.leaf_node_[static_cast<std::size_t>(n.bin)] = static_cast<int>(v);
  }
  return out;
}

namespace {

json node_to_json(const std::vector<PartitionTree::Node>& nodes, int v) {
  const auto& n = nodes[v];
  if (n.is_leaf()) return json{{"bin", n.bin}};
  return json{{"dim", n.split_dim},
              {"value", n.split_value},
              {"left", node_to_json(nodes, n.left)},
              {"right", node_to_json(nodes, n.right)}};
}

struct ParsedNode {
  int dim = -1;
  double value = 0.0;
  std::unique_ptr<ParsedNode> left, right;
  int bin = -1;
  int leftmost = -1;  // smallest-position leaf bin reached by always going left
};

std::unique_ptr<ParsedNode> parse_node(const json& j, std::size_t dim, std::size_t depth) {
  if (depth > 10000) throw SchemaError("partition tree is too deep");
  if (!j.is_object()) throw SchemaError("tree node must be an object");
  auto node = std::make_unique<ParsedNode>();
  if (j.contains("bin")) {
    node->bin = j.at("bin").get<int>();
    node->leftmost = node->bin;
    return node;
  }
  if (!j.contains("dim") || !j.contains("value") || !j.contains("left") || !j.contains("right"))
    throw SchemaError("internal node needs dim, value, left and right");
  node->dim = j.at("dim").get<int>();
  node->value = j.at("value").get<double>();
  if (node->dim < 0 || static_cast<std::size_t>(node->dim) >= dim) throw SchemaError("split dim out of range");
  node->left = parse_node(j.at("left"), dim, depth + 1);
  node->right = parse_node(j.at("right"), dim, depth + 1);
  node->leftmost = node->left->leftmost;
  return node;
}

}  // namespace

std::string PartitionTree::to_json() const {
  json doc{{"dim", dim_}, {"bins", bin_count()}, {"root", node_to_json(nodes_, 0)}};
  return doc.dump();
}

PartitionTree PartitionTree::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid tree JSON: ") + e.what());
  }
  try {
    const auto dim = doc.at("dim").get<std::size_t>();
    const auto root = parse_node(doc.at("root"), dim, 0);

    std::vector<const ParsedNode*> leaves;
    std::function<void(const ParsedNode*)> collect = [&](const ParsedNode* n) {
      if (n->dim < 0)
        leaves.push_back(n);
      else {
        collect(n->left.get());
        collect(n->right.get());
      }
    };
    collect(root.get());
    std::vector<int> seen(leaves.size(), 0);
    for (const auto* leaf : leaves) {
      if (leaf->bin < 0 || static_cast<std::size_t>(leaf->bin) >= leaves.size() || seen[leaf->bin]++)
        throw SchemaError("leaf bin ids must be 0..K-1 without gaps or repeats");
    }

    // Replay the splits in growth order: the split of node v happened when
    // the tree held `v.right.leftmost` leaves.
    PartitionTree tree(dim);
    std::map<const ParsedNode*, int> arena_of{{root.get(), 0}};
    std::vector<const ParsedNode*> frontier{root.get()};
    bool sequential = true;
    for (std::size_t k = 1; k < leaves.size() && sequential; ++k) {
      auto it = std::find_if(frontier.begin(), frontier.end(), [&](const ParsedNode* n) {
        return n->dim >= 0 && static_cast<std::size_t>(n->right->leftmost) == k;
      });
      if (it == frontier.end()) {
        sequential = false;
        break;
      }
      const ParsedNode* n = *it;
      frontier.erase(it);
      const int bin = tree.nodes_[arena_of.at(n)].bin;
      if (bin != n->leftmost) {
        sequential = false;
        break;
      }
      tree.split_leaf_in_place(bin, static_cast<std::size_t>(n->dim), n->value);
      const Node& placed = tree.nodes_[arena_of.at(n)];
      arena_of[n->left.get()] = placed.left;
      arena_of[n->right.get()] = placed.right;
      frontier.push_back(n->left.get());
      frontier.push_back(n->right.get());
    }
    if (sequential) return tree;

    // Fallback: lay the nodes out depth-first; the partition is intact but
    // earlier members of a nested sequence cannot be recovered from it.
    PartitionTree flat(dim);
    flat.nodes_.clear();
    flat.leaf_node_.assign(leaves.size(), -1);
    flat.sequential_ = false;
    std::function<int(const ParsedNode*)> build = [&](const ParsedNode* n) -> int {
      const int idx = static_cast<int>(flat.nodes_.size());
      flat.nodes_.push_back(Node{n->dim, n->value, -1, -1, n->leftmost});
      if (n->dim < 0) {
        flat.leaf_node_[static_cast<std::size_t>(n->bin)] = idx;
        return idx;
      }
      const int l = build(n->left.get());
      const int r = build(n->right.get());
      flat.nodes_[idx].left = l;
      flat.nodes_[idx].right = r;
      return idx;
    };
    build(root.get());
    return flat;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("invalid tree JSON: ") + e.what());
  }
}

bool operator==(const PartitionTree::Node& a, const PartitionTree::Node& b) {
  return a.split_dim == b.split_dim && a.split_value == b.split_value && a.left == b.left && a.right == b.right &&
         a.bin == b.bin;
}

bool operator==(const PartitionTree& a, const PartitionTree& b) {
  return a.dim_ == b.dim_ && a.nodes_ == b.nodes_ && a.leaf_node_ == b.leaf_node_;
}

std::int64_t BinTable::total0() const noexcept { return std::accumulate(n0.begin(), n0.end(), std::int64_t{0}); }
std::int64_t BinTable::total1() const noexcept { return std::accumulate(n1.begin(), n1.end(), std::int64_t{0}); }
std::int64_t BinTable::total_test() const noexcept {
  return std::accumulate(n_test.begin(), n_test.end(), std::int64_t{0});
}

std::vector<int> locate_all(const PartitionTree& tree, const PointMatrix& points) {
  std::vector<int> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) out[i] = tree.locate(points.row(i));
  return out;
}

std::vector<int> locate_all(const PartitionTree& tree, const LabeledDataset& ds, std::span<const std::size_t> rows) {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = tree.locate(ds.point(rows[i]));
  return out;
}

std::vector<std::int64_t> histogram_of(std::span<const int> bins, std::size_t bin_count) {
  std::vector<std::int64_t> out(bin_count, 0);
  for (int b : bins) ++out[static_cast<std::size_t>(b)];
  return out;
}

std::vector<std::int64_t> count_bins(const PartitionTree& tree, const LabeledDataset& ds,
                                     std::span<const std::size_t> rows) {
  std::vector<std::int64_t> out(tree.bin_count(), 0);
  for (std::size_t i : rows) ++out[static_cast<std::size_t>(tree.locate(ds.point(i)))];
  return out;
}

std::vector<std::int64_t> count_bins(const PartitionTree& tree, const PointMatrix& points) {
  std::vector<std::int64_t> out(tree.bin_count(), 0);
  for (std::size_t i = 0; i < points.rows(); ++i) ++out[static_cast<std::size_t>(tree.locate(points.row(i)))];
  return out;
}

std::vector<std::int64_t> count_bins(const PartitionTree& tree, const LabeledDataset& ds,
                                     std::span<const std::size_t> rows, Source source) {
  std::vector<std::int64_t> out(tree.bin_count(), 0);
  for (std::size_t i : rows)
    if (ds.source(i) == source) ++out[static_cast<std::size_t>(tree.locate(ds.point(i)))];
  return out;
}

}  // namespace drt
