#include "rrhoc/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace rrhoc {

namespace {

// Plain union-find, path halving.
class UnionFind {
public:
  explicit UnionFind(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  void unite(int a, int b) { parent_[find(a)] = find(b); }

private:
  std::vector<int> parent_;
};

} // namespace

DirectedGraph::DirectedGraph(int node_count, std::vector<Edge> edges,
                             bool require_weakly_connected)
    : node_count_(node_count), edges_(std::move(edges)) {
  if (node_count_ < 1) {
    throw std::invalid_argument("graph needs at least one node, got " +
                                std::to_string(node_count_));
  }
  std::set<Edge> seen;
  for (const auto& [src, dst] : edges_) {
    if (src < 1 || src > node_count_ || dst < 1 || dst > node_count_) {
      throw std::invalid_argument("edge (" + std::to_string(src) + ", " +
                                  std::to_string(dst) +
                                  ") references a node outside 1.." +
                                  std::to_string(node_count_));
    }
    if (src == dst) {
      throw std::invalid_argument("self-loop at node " + std::to_string(src));
    }
    if (!seen.insert({src, dst}).second) {
      throw std::invalid_argument("duplicate edge (" + std::to_string(src) +
                                  ", " + std::to_string(dst) + ")");
    }
  }

  in_neighbors_.assign(node_count_ + 1, {});
  out_neighbors_.assign(node_count_ + 1, {});
  for (const auto& [src, dst] : edges_) {
    in_neighbors_[dst].push_back(src);
    out_neighbors_[src].push_back(dst);
  }
  for (int i = 1; i <= node_count_; ++i) {
    std::sort(in_neighbors_[i].begin(), in_neighbors_[i].end());
    std::sort(out_neighbors_[i].begin(), out_neighbors_[i].end());
    max_in_degree_ =
        std::max(max_in_degree_, static_cast<int>(in_neighbors_[i].size()));
  }

  weakly_connected_ = is_weakly_connected(node_count_, edges_);
  if (require_weakly_connected && !weakly_connected_) {
    throw std::invalid_argument(
        "graph is not weakly connected; pass require_weakly_connected=false "
        "to allow this");
  }
}

void DirectedGraph::check_node(int node) const {
  if (node < 1 || node > node_count_) {
    throw std::out_of_range("node " + std::to_string(node) +
                            " outside 1.." + std::to_string(node_count_));
  }
}

const std::vector<int>& DirectedGraph::neighborhood(int node) const {
  check_node(node);
  return in_neighbors_[node];
}

int DirectedGraph::in_degree(int node) const {
  check_node(node);
  return static_cast<int>(in_neighbors_[node].size());
}

int DirectedGraph::out_degree(int node) const {
  check_node(node);
  return static_cast<int>(out_neighbors_[node].size());
}

const std::vector<int>& DirectedGraph::out_neighbors(int node) const {
  check_node(node);
  return out_neighbors_[node];
}

DirectedGraph build_graph(int node_count,
                          const std::vector<std::pair<int, int>>& edges,
                          bool require_weakly_connected) {
  return DirectedGraph(node_count, edges, require_weakly_connected);
}

std::vector<int> shift_permutation(const std::vector<int>& s) {
  if (s.empty()) {
    throw std::invalid_argument("cannot shift an empty permutation");
  }
  std::vector<int> out(s.size());
  out[0] = s.back();
  std::copy(s.begin(), s.end() - 1, out.begin() + 1);
  return out;
}

std::vector<int> permutation_power(const DirectedGraph& g, int node, long k) {
  const auto& base = g.neighborhood(node);
  const long p = static_cast<long>(base.size());
  if (p == 0) {
    throw std::invalid_argument("node " + std::to_string(node) +
                                " has no neighbours to permute");
  }
  if (k < 0) {
    throw std::invalid_argument("permutation power index must be >= 0");
  }
  // One shift moves every element one slot to the right (cyclically), so
  // after k shifts the element starting at position m sits at (m + k) mod p.
  std::vector<int> out(base.size());
  for (long m = 0; m < p; ++m) {
    out[(m + k) % p] = base[m];
  }
  return out;
}

int index_in_permutation(const DirectedGraph& g, int node, long k,
                         int neighbor) {
  const auto& base = g.neighborhood(node);
  const long p = static_cast<long>(base.size());
  if (p == 0) {
    throw std::invalid_argument("node " + std::to_string(node) +
                                " has no neighbours");
  }
  if (k < 0) {
    throw std::invalid_argument("permutation power index must be >= 0");
  }
  auto it = std::lower_bound(base.begin(), base.end(), neighbor);
  if (it == base.end() || *it != neighbor) {
    throw std::invalid_argument("node " + std::to_string(neighbor) +
                                " is not a neighbour of node " +
                                std::to_string(node));
  }
  const long m = static_cast<long>(it - base.begin());
  return static_cast<int>((m + k) % p) + 1;
}

bool is_weakly_connected(int node_count,
                         const std::vector<std::pair<int, int>>& edges) {
  if (node_count <= 1) {
    return true;
  }
  UnionFind uf(node_count + 1);
  for (const auto& [src, dst] : edges) {
    uf.unite(src, dst);
  }
  const int root = uf.find(1);
  for (int i = 2; i <= node_count; ++i) {
    if (uf.find(i) != root) {
      return false;
    }
  }
  return true;
}

bool is_weakly_connected(const DirectedGraph& g) {
  return g.weakly_connected();
}

} // namespace rrhoc
