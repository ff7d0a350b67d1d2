// Stage 1: k-NN graph construction, graph Laplacian, component counting via
// the zero-eigenvalue multiplicity, and the agglomerative split into
// non-intersecting components.
#pragma once

#include "acev/geometry.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

namespace acev {

/// How the directional k-NN relation is symmetrized into an undirected graph.
enum class GraphSymmetrization {
  kUnion,   // edge if either endpoint lists the other (default)
  kMutual,  // edge only if both do
};

/// Undirected, loop-free adjacency stored as sorted neighbour lists.
struct NeighborGraph {
  int n = 0;
  std::vector<std::vector<int>> adjacency;

  int degree(int v) const { return static_cast<int>(adjacency[v].size()); }
};

/// Dense graph Laplacian: degree on the diagonal, -1 for adjacent pairs.
struct Laplacian {
  Eigen::MatrixXd matrix;
};

/// Partition of the dataset into components, ids dense in [0, count).
struct ComponentLabels {
  std::vector<int> labels;
  int count = 0;
};

inline NeighborGraph build_knn_graph(const PointMatrix& points, int k,
                                     GraphSymmetrization mode = GraphSymmetrization::kUnion) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) throw std::invalid_argument("build_knn_graph: need at least 2 points");
  if (k < 1) throw std::invalid_argument("build_knn_graph: k must be positive");

  std::vector<std::vector<int>> lists(n);
  for (int i = 0; i < n; ++i) lists[i] = knn_query(points, i, k).neighbors;

  NeighborGraph graph;
  graph.n = n;
  graph.adjacency.resize(n);
  if (mode == GraphSymmetrization::kUnion) {
    for (int i = 0; i < n; ++i) {
      for (int j : lists[i]) {
        graph.adjacency[i].push_back(j);
        graph.adjacency[j].push_back(i);
      }
    }
  } else {
    for (int i = 0; i < n; ++i) std::sort(lists[i].begin(), lists[i].end());
    for (int i = 0; i < n; ++i) {
      for (int j : lists[i]) {
        if (j > i && std::binary_search(lists[j].begin(), lists[j].end(), i)) {
          graph.adjacency[i].push_back(j);
          graph.adjacency[j].push_back(i);
        }
      }
    }
  }
  for (auto& adj : graph.adjacency) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return graph;
}

inline Laplacian laplacian(const NeighborGraph& g) {
  Laplacian result;
  result.matrix = Eigen::MatrixXd::Zero(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    result.matrix(i, i) = static_cast<double>(g.degree(i));
    for (int j : g.adjacency[i]) result.matrix(i, j) = -1.0;
  }
  return result;
}

/// Component count = multiplicity of the (numerically) zero eigenvalue of
/// the Laplacian spectrum.
inline int count_components(const Laplacian& laplacian, double zero_tol = 1e-8) {
  const Eigen::VectorXd spectrum = sym_eigenvalues(laplacian.matrix);
  const double cutoff = zero_tol * std::max(spectrum.maxCoeff(), 1.0);
  int zeros = 0;
  for (int i = 0; i < spectrum.size(); ++i) {
    if (spectrum[i] < cutoff) ++zeros;
  }
  return std::max(zeros, 1);
}

namespace detail {

/// Relabel so component ids ascend with each component's smallest member.
inline ComponentLabels renumber_by_first_member(std::vector<int> raw, int count) {
  std::vector<int> remap(count, -1);
  int next = 0;
  for (int id : raw) {
    if (remap[id] < 0) remap[id] = next++;
  }
  for (int& id : raw) id = remap[id];
  return ComponentLabels{std::move(raw), next};
}

}  // namespace detail

/// Connected components of the graph by breadth-first search.
inline ComponentLabels connected_components(const NeighborGraph& g) {
  std::vector<int> labels(g.n, -1);
  int count = 0;
  std::queue<int> frontier;
  for (int start = 0; start < g.n; ++start) {
    if (labels[start] >= 0) continue;
    labels[start] = count;
    frontier.push(start);
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int w : g.adjacency[v]) {
        if (labels[w] < 0) {
          labels[w] = count;
          frontier.push(w);
        }
      }
    }
    ++count;
  }
  return ComponentLabels{std::move(labels), count};
}

/// Single-linkage agglomerative clustering cut at m clusters, computed as
/// the Euclidean minimum spanning tree with its m-1 heaviest edges removed.
/// Ties are broken on (weight, endpoint indices) for determinism.
inline ComponentLabels single_linkage_split(const PointMatrix& points, int m) {
  const int n = static_cast<int>(points.rows());
  if (m < 1) throw std::invalid_argument("split_components: m must be positive");
  if (m > n) throw std::invalid_argument("split_components: m exceeds point count");

  struct Edge {
    double weight;
    int a, b;
  };

  // Prim's algorithm, O(n^2).
  std::vector<Edge> mst;
  mst.reserve(n > 0 ? n - 1 : 0);
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<int> best_from(n, 0);
  in_tree[0] = 1;
  for (int j = 1; j < n; ++j) {
    best[j] = (points.row(j) - points.row(0)).squaredNorm();
  }
  for (int step = 1; step < n; ++step) {
    int pick = -1;
    double pick_weight = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (!in_tree[j] && best[j] < pick_weight) {
        pick_weight = best[j];
        pick = j;
      }
    }
    in_tree[pick] = 1;
    mst.push_back(Edge{pick_weight, std::min(pick, best_from[pick]), std::max(pick, best_from[pick])});
    for (int j = 0; j < n; ++j) {
      if (!in_tree[j]) {
        const double w = (points.row(j) - points.row(pick)).squaredNorm();
        if (w < best[j]) {
          best[j] = w;
          best_from[j] = pick;
        }
      }
    }
  }

  // Cutting the m-1 largest merge distances yields the single-linkage
  // partition into m clusters.
  std::sort(mst.begin(), mst.end(), [](const Edge& x, const Edge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  const int keep = n - m;  // all but the m-1 heaviest MST edges
  for (int e = 0; e < keep; ++e) {
    parent[find(mst[e].a)] = find(mst[e].b);
  }

  std::vector<int> raw(n);
  std::vector<int> root_id(n, -1);
  int count = 0;
  for (int v = 0; v < n; ++v) {
    const int r = find(v);
    if (root_id[r] < 0) root_id[r] = count++;
    raw[v] = root_id[r];
  }
  return detail::renumber_by_first_member(std::move(raw), count);
}

/// Split the dataset into m component clusters. The default route is
/// single-linkage clustering over Euclidean distances; with `by_graph` set,
/// the graph's connected components are returned directly and their count
/// is authoritative (it may differ from a spectral m under borderline zero
/// tolerances).
inline ComponentLabels split_components(const PointMatrix& points, const NeighborGraph& g, int m,
                                        bool by_graph = false) {
  if (by_graph) {
    ComponentLabels cc = connected_components(g);
    return detail::renumber_by_first_member(std::move(cc.labels), cc.count);
  }
  return single_linkage_split(points, m);
}

}  // namespace acev
