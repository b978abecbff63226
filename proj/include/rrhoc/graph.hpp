#pragma once

#include <utility>
#include <vector>

namespace rrhoc {

/// Directed communication topology of the observer network.
///
/// Node indices are 1-based in the public interface. Edges are ordered
/// pairs (source, target); the neighbourhood V_i of node i collects the
/// sources of its incoming edges, kept in ascending order. Instances are
/// immutable after construction and safe to share across threads.
class DirectedGraph {
public:
  using Edge = std::pair<int, int>;

  /// Builds and validates a graph. Throws std::invalid_argument on
  /// self-loops, duplicate edges, out-of-range node indices and (unless
  /// require_weakly_connected is false) on graphs whose undirected
  /// version is disconnected.
  DirectedGraph(int node_count, std::vector<Edge> edges,
                bool require_weakly_connected = true);

  int node_count() const { return node_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Ordered neighbourhood V_i (ascending source ids), 1-based node id.
  const std::vector<int>& neighborhood(int node) const;
  /// In-degree p_i.
  int in_degree(int node) const;
  /// Out-degree q_i.
  int out_degree(int node) const;
  /// Nodes j with node ∈ V_j, ascending.
  const std::vector<int>& out_neighbors(int node) const;
  /// max_i p_i.
  int max_in_degree() const { return max_in_degree_; }
  bool weakly_connected() const { return weakly_connected_; }

private:
  void check_node(int node) const;

  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> in_neighbors_;
  std::vector<std::vector<int>> out_neighbors_;
  int max_in_degree_ = 0;
  bool weakly_connected_ = false;
};

/// Convenience factory mirroring the config-file representation.
DirectedGraph build_graph(int node_count,
                          const std::vector<std::pair<int, int>>& edges,
                          bool require_weakly_connected = true);

/// One cyclic shift: {j_1,...,j_{p-1},j_p} -> {j_p,j_1,...,j_{p-1}}.
/// Throws on an empty list.
std::vector<int> shift_permutation(const std::vector<int>& s);

/// k consecutive shifts applied to V_i; reduces k modulo p_i.
/// Throws if node has no neighbours.
std::vector<int> permutation_power(const DirectedGraph& g, int node, long k);

/// 1-based position of `neighbor` inside permutation_power(g, node, k).
/// Computed directly from the shift arithmetic rather than by searching
/// the permuted list. Throws if neighbor is not in V_i.
int index_in_permutation(const DirectedGraph& g, int node, long k,
                         int neighbor);

/// True iff the undirected version of the edge set connects all nodes.
bool is_weakly_connected(int node_count,
                         const std::vector<std::pair<int, int>>& edges);
bool is_weakly_connected(const DirectedGraph& g);

} // namespace rrhoc
