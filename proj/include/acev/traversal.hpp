// Stage 2: grow intersecting manifolds inside each component by depth-first
// traversal. Inclusion of a candidate is gated by the gap between its
// observed eigenvector-angle profile and an exponential moving average
// prediction carried along the tree path; rejected candidates get their
// neighbourhood filtered by the eigenvalue/distance score mod_dis and are
// retried on the reduced neighbourhood.
#pragma once

#include "acev/components.hpp"
#include "acev/geometry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace acev {

/// Per-direction predicted angular gap, one entry per ambient dimension.
using EmaVector = Eigen::VectorXd;

struct AcevConfig {
  int k = 25;                   // neighbourhood size
  double alpha = 0.6;           // EMA smoothing factor, in (0,1)
  double angle_tol = 0.15;      // inclusion tolerance, radians
  double var_thresh = 0.01;     // variance fraction counting a direction as non-zero
  double gap_thresh = 0.35;     // relative eigengap below which a direction is unidentifiable
  double dist_tol = 2.5;        // candidate residual from the parent tangent frame, in noise sigmas
  double subspace_tol = 0.4;    // max principal angle of child vs parent tangent span, radians
  double zero_tol = 1e-8;       // relative tolerance for zero Laplacian eigenvalues
  double warmup_frac = 0.0005;  // fraction of unlabelled points included unconditionally
  int min_neigh = 5;            // filtration floor on neighbourhood size
  std::uint64_t seed = 0;       // generators only; segmentation is deterministic
  GraphSymmetrization graph_mode = GraphSymmetrization::kUnion;
  bool components_by_graph = false;

  void validate() const {
    if (k < 1) throw std::invalid_argument("config: k must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha must be in (0,1)");
    if (!(angle_tol > 0.0)) throw std::invalid_argument("config: angle-tol must be positive");
    if (!(var_thresh >= 0.0)) throw std::invalid_argument("config: var-thresh must be non-negative");
    if (!(gap_thresh >= 0.0)) throw std::invalid_argument("config: gap-thresh must be non-negative");
    if (!(dist_tol > 0.0)) throw std::invalid_argument("config: dist-tol must be positive");
    if (!(subspace_tol > 0.0)) throw std::invalid_argument("config: subspace-tol must be positive");
    if (!(zero_tol > 0.0)) throw std::invalid_argument("config: zero-tol must be positive");
    if (!(warmup_frac >= 0.0 && warmup_frac < 1.0)) {
      throw std::invalid_argument("config: warmup-frac must be in [0,1)");
    }
    if (min_neigh < 2) throw std::invalid_argument("config: min-neigh must be at least 2");
    if (k < min_neigh) throw std::invalid_argument("config: k must be at least min-neigh");
  }
};

/// One node of a traversal tree. The EMA state is unseeded until the node's
/// first child edge observes an angle profile (or, for non-roots, is set at
/// inclusion time). The geometry may be computed over a filtered
/// neighbourhood; child enumeration always uses the full component k-NN set.
struct TraversalNode {
  int point = -1;
  int parent = -1;  // -1 for roots
  std::optional<EmaVector> ema;
  LocalGeometry geometry;  // over the possibly-filtered neighbourhood
  int depth = 0;
};

/// One EMA step: alpha * observed + (1 - alpha) * previous.
inline EmaVector ema_update(const EmaVector& prev, const Eigen::VectorXd& observed, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ema_update: alpha must be in (0,1)");
  return alpha * observed + (1.0 - alpha) * prev;
}

struct InclusionResult {
  bool accepted = false;
  Eigen::VectorXd observed;
  EmaVector ema;
  int effective_dim = 0;  // candidate dimension counted at the shared variance scale
};

/// Residual of a point against a node's local tangent frame: the norm of its
/// offset from the neighbourhood centroid projected onto the noise
/// directions (ranks above the intrinsic dimension). Zero when the geometry
/// is full rank.
inline double tangent_residual(const Eigen::VectorXd& position, const LocalGeometry& geometry) {
  const int dim = static_cast<int>(geometry.eigenvalues.size());
  if (geometry.intrinsic_dim >= dim) return 0.0;
  const Eigen::VectorXd offset = position - geometry.centroid;
  double residual2 = 0.0;
  for (int w = geometry.intrinsic_dim; w < dim; ++w) {
    const double along = offset.dot(geometry.eigenvectors.col(w));
    residual2 += along * along;
  }
  return std::sqrt(residual2);
}

/// Gate a candidate against its prospective parent. Five conditions:
///
///  - the candidate's dimension, counted against the shared variance scale
///    (the larger of the two neighbourhood totals, so estimates at
///    different neighbourhood sizes stay commensurable), must not exceed
///    the parent's (growth marks the intersection region and sends the
///    candidate to neighbourhood filtration);
///  - the candidate's spectrum must split sharply at that dimension cut,
///    so accepted nodes always carry a well-defined tangent frame;
///  - the candidate's tangent span must lie inside the parent's tangent
///    span to within subspace_tol (largest principal angle) -- this is the
///    orientation test that stays meaningful when individual directions
///    degenerate;
///  - the candidate point must lie close to the parent's tangent frame:
///    its residual along the parent's noise directions may not exceed
///    dist_tol noise sigmas (off-frame points belong to another manifold
///    however well their angles align);
///  - for every direction identifiable in both spectra (relative eigengap
///    at least gap_thresh on both sides), the updated EMA must stay within
///    angle_tol of the observed angle. Directions inside a near-degenerate
///    eigenvalue cluster have arbitrary orientation and are not gated.
///
/// An unseeded parent EMA is seeded with the raw observed profile, which
/// makes the first edge of a tree pass the angle gate by construction.
inline InclusionResult inclusion_test(const TraversalNode& parent, const LocalGeometry& candidate,
                                      const Eigen::VectorXd& candidate_position,
                                      const AcevConfig& cfg) {
  InclusionResult result;
  result.observed = angle_profile(parent.geometry, candidate);
  if (parent.ema.has_value()) {
    result.ema = ema_update(*parent.ema, result.observed, cfg.alpha);
  } else {
    result.ema = result.observed;
  }

  const double scale =
      std::max(parent.geometry.eigenvalues.sum(), candidate.eigenvalues.sum());
  int candidate_dim = 0;
  if (scale > 0.0) {
    for (int w = 0; w < candidate.eigenvalues.size(); ++w) {
      if (candidate.eigenvalues[w] / scale > cfg.var_thresh) ++candidate_dim;
    }
    // Any spread at all orients at least the leading direction; a zero count
    // would leave the node without a tangent frame to gate its own children.
    if (candidate.eigenvalues[0] > 0.0) candidate_dim = std::max(candidate_dim, 1);
  }
  result.effective_dim = candidate_dim;

  if (candidate_dim > parent.geometry.intrinsic_dim ||
      !dimension_cut_identifiable(candidate.eigenvalues, candidate_dim, cfg.gap_thresh)) {
    result.accepted = false;
    return result;
  }

  const int parent_dim = parent.geometry.intrinsic_dim;
  const int ambient = static_cast<int>(parent.geometry.eigenvalues.size());
  if (candidate_dim > 0 && parent_dim < ambient) {
    const double tangent_tilt = subspace_angle(candidate.eigenvectors.leftCols(candidate_dim),
                                               parent.geometry.eigenvectors.leftCols(parent_dim));
    if (tangent_tilt > cfg.subspace_tol) {
      result.accepted = false;
      return result;
    }
  }

  if (parent_dim > 0 && parent_dim < ambient) {
    // Noise scale: the first noise eigenvalue, floored at a sliver of the
    // leading one so exactly flat parents still admit their own points.
    const double noise_sigma =
        std::sqrt(std::max(parent.geometry.eigenvalues[parent_dim],
                           1e-4 * parent.geometry.eigenvalues[0]));
    if (tangent_residual(candidate_position, parent.geometry) > cfg.dist_tol * noise_sigma) {
      result.accepted = false;
      return result;
    }
  }

  result.accepted = true;
  for (int g = 0; g < result.observed.size(); ++g) {
    if (!direction_identifiable(parent.geometry.eigenvalues, g, cfg.gap_thresh)) continue;
    if (!direction_identifiable(candidate.eigenvalues, g, cfg.gap_thresh)) continue;
    if (std::abs(result.ema[g] - result.observed[g]) > cfg.angle_tol) {
      result.accepted = false;
      break;
    }
  }
  return result;
}

/// Distance from a point to the line through `anchor` with direction `dir`.
inline double line_distance(const Eigen::VectorXd& point, const Eigen::VectorXd& anchor,
                            const Eigen::VectorXd& dir) {
  const Eigen::VectorXd offset = point - anchor;
  const double norm2 = dir.squaredNorm();
  if (norm2 == 0.0) return offset.norm();
  const Eigen::VectorXd along = (offset.dot(dir) / norm2) * dir;
  return (offset - along).norm();
}

/// Filtration score of a neighbour r against a parent node: line distance to
/// each parent eigen-direction (anchored at the parent's neighbourhood
/// centroid) weighted by the neighbour/parent eigenvalue dissimilarity.
/// Same-manifold neighbours have per-direction ratios near 1; neighbours
/// imported from another manifold deviate -- upward when they carry extra
/// variance (a crossing of higher spread), downward when they carry less (a
/// lower-dimensional structure inside the neighbourhood) -- so the weight is
/// the larger of the two ratio directions. Eigenvalues below 1e-12 times the
/// parent's largest are floored so exact zeros compare as equal rather than
/// blowing up.
inline double mod_dis(const Eigen::VectorXd& r_position, const LocalGeometry& parent_geometry,
                      const Eigen::VectorXd& r_eigenvalues) {
  const int dim = static_cast<int>(parent_geometry.eigenvalues.size());
  const double eps_eig = 1e-12 * std::max(parent_geometry.eigenvalues[0], 1e-300);
  double score = 0.0;
  for (int w = 0; w < dim; ++w) {
    const double parent_value = std::max(parent_geometry.eigenvalues[w], eps_eig);
    const double r_value = std::max(r_eigenvalues[w], eps_eig);
    const double ratio = std::max(r_value / parent_value, parent_value / r_value);
    score += line_distance(r_position, parent_geometry.centroid, parent_geometry.eigenvectors.col(w)) * ratio;
  }
  return score;
}

/// Per-component working state: the member list plus lazily computed
/// unfiltered neighbourhoods and local geometries, all indexed by global
/// point index. Neighbour queries run over the component's own points only.
class ComponentContext {
 public:
  ComponentContext(const PointMatrix& points, std::vector<int> members, const AcevConfig& cfg)
      : points_(points), members_(std::move(members)), cfg_(cfg) {
    std::sort(members_.begin(), members_.end());
    slot_.resize(points.rows(), -1);
    for (int s = 0; s < static_cast<int>(members_.size()); ++s) slot_[members_[s]] = s;
    neighborhoods_.resize(members_.size());
    geometries_.resize(members_.size());
  }

  const std::vector<int>& members() const { return members_; }
  const PointMatrix& points() const { return points_; }
  const AcevConfig& config() const { return cfg_; }

  /// k nearest neighbours of `point` among the component's members.
  const NeighborSet& neighborhood(int point) {
    auto& cached = neighborhoods_[slot_of(point)];
    if (!cached.has_value()) cached = component_knn(point);
    return *cached;
  }

  /// Local geometry of `point` over its unfiltered component neighbourhood.
  const LocalGeometry& geometry(int point) {
    auto& cached = geometries_[slot_of(point)];
    if (!cached.has_value()) {
      cached = local_geometry(points_, point, neighborhood(point), cfg_.var_thresh);
    }
    return *cached;
  }

 private:
  int slot_of(int point) const {
    const int s = slot_[point];
    if (s < 0) throw std::logic_error("traversal: point is not a member of this component");
    return s;
  }

  NeighborSet component_knn(int point) const {
    std::vector<std::pair<double, int>> order;
    order.reserve(members_.size() - 1);
    for (int j : members_) {
      if (j == point) continue;
      order.emplace_back((points_.row(j) - points_.row(point)).squaredNorm(), j);
    }
    const int count = std::min<std::size_t>(cfg_.k, order.size());
    std::partial_sort(order.begin(), order.begin() + count, order.end());
    NeighborSet result;
    result.center = point;
    for (int r = 0; r < count; ++r) {
      result.neighbors.push_back(order[r].second);
      result.distances.push_back(std::sqrt(order[r].first));
    }
    return result;
  }

  const PointMatrix& points_;
  std::vector<int> members_;
  AcevConfig cfg_;
  std::vector<int> slot_;
  std::vector<std::optional<NeighborSet>> neighborhoods_;
  std::vector<std::optional<LocalGeometry>> geometries_;
};

struct FiltrationResult {
  NeighborSet filtered;
  bool accepted = false;
  LocalGeometry geometry;
  Eigen::VectorXd observed;
  EmaVector ema;
  int removed = 0;
};

/// Retry a failed inclusion by peeling neighbours off the candidate's
/// neighbourhood in decreasing mod_dis order, recomputing the candidate's
/// geometry each time. Scores are computed once on the incoming
/// neighbourhood (the parent side of the score does not change). The
/// candidate's three nearest neighbours are never removed, so the filtered
/// geometry always contains the candidate's own local structure. Gives up
/// once the neighbourhood would drop below the floor.
inline FiltrationResult filter_neighborhood(ComponentContext& ctx, int candidate,
                                            const NeighborSet& neigh, const TraversalNode& parent,
                                            const AcevConfig& cfg) {
  const int floor = std::max(cfg.min_neigh, parent.geometry.intrinsic_dim + 1);

  // Removal order: descending mod_dis over the non-protected neighbours,
  // ties broken by list position (ascending distance).
  const int protected_core = std::min(3, floor);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(neigh.neighbors.size());
  for (int pos = protected_core; pos < neigh.size(); ++pos) {
    const int r = neigh.neighbors[pos];
    scored.emplace_back(mod_dis(ctx.points().row(r).transpose(), parent.geometry, ctx.geometry(r).eigenvalues),
                        r);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });

  FiltrationResult result;
  result.filtered = neigh;
  std::size_t next_removal = 0;
  while (true) {
    result.geometry = local_geometry(ctx.points(), candidate, result.filtered, cfg.var_thresh);
    const InclusionResult inc =
        inclusion_test(parent, result.geometry, ctx.points().row(candidate).transpose(), cfg);
    result.observed = inc.observed;
    result.ema = inc.ema;
    if (inc.accepted) {
      result.accepted = true;
      // The node's parental gating must use the dimension the gate
      // validated, not the raw own-scale count.
      result.geometry.intrinsic_dim = inc.effective_dim;
      return result;
    }
    if (result.filtered.size() - 1 < floor || next_removal >= scored.size()) {
      result.accepted = false;
      return result;
    }
    const int victim = scored[next_removal++].second;
    for (int pos = 0; pos < result.filtered.size(); ++pos) {
      if (result.filtered.neighbors[pos] == victim) {
        result.filtered.neighbors.erase(result.filtered.neighbors.begin() + pos);
        result.filtered.distances.erase(result.filtered.distances.begin() + pos);
        break;
      }
    }
    ++result.removed;
  }
}

/// Root choice: the unlabelled point with the smallest first coordinate,
/// ties broken lexicographically over the remaining coordinates, then by
/// index.
inline int select_root(const PointMatrix& points, const std::vector<int>& unlabelled) {
  if (unlabelled.empty()) throw std::invalid_argument("select_root: no unlabelled points");
  const int dim = static_cast<int>(points.cols());
  const auto precedes = [&](int i, int j) {
    for (int d = 0; d < dim; ++d) {
      if (points(i, d) < points(j, d)) return true;
      if (points(i, d) > points(j, d)) return false;
    }
    return i < j;
  };
  int best = unlabelled.front();
  for (std::size_t c = 1; c < unlabelled.size(); ++c) {
    if (precedes(unlabelled[c], best)) best = unlabelled[c];
  }
  return best;
}

/// Outcome of segmenting one component.
struct ComponentSegmentation {
  std::vector<int> manifold_of;       // per global point index; -1 for non-members
  int manifold_count = 0;
  std::vector<std::vector<int>> manifold_members;
  std::vector<int> manifold_dims;     // mode of members' intrinsic dims
  std::vector<int> parent_of;         // traversal tree edges; -1 for roots
  std::vector<std::optional<TraversalNode>> nodes;  // final state per labelled point
};

/// Grow manifolds inside one component until every member is labelled.
/// Each pass roots a tree at select_root, includes a warm-up quota of
/// points unconditionally, then extends depth-first under the EMA gate
/// with mod_dis filtration on failure.
inline ComponentSegmentation segment_component(const PointMatrix& points, const std::vector<int>& members,
                                               const AcevConfig& cfg) {
  if (members.empty()) throw std::invalid_argument("segment_component: empty member set");
  ComponentContext ctx(points, members, cfg);

  const int n_total = static_cast<int>(points.rows());
  ComponentSegmentation out;
  out.manifold_of.assign(n_total, -1);
  out.parent_of.assign(n_total, -1);

  std::vector<char> labelled(n_total, 0);
  int unlabelled_count = static_cast<int>(ctx.members().size());
  // Per-node final intrinsic dimension, recorded at inclusion time.
  std::vector<int> node_dim(n_total, 0);

  // Final node state of every labelled point; parents for later attachments.
  out.nodes.resize(n_total);
  auto& node_state = out.nodes;

  auto include = [&](int point, int parent, TraversalNode node, int manifold_id) {
    labelled[point] = 1;
    --unlabelled_count;
    out.manifold_of[point] = manifold_id;
    out.parent_of[point] = parent;
    out.manifold_members[manifold_id].push_back(point);
    node_dim[point] = node.geometry.intrinsic_dim;
    node_state[point] = std::move(node);
  };

  auto collect_unlabelled = [&]() {
    std::vector<int> result;
    result.reserve(unlabelled_count);
    for (int i : ctx.members()) {
      if (!labelled[i]) result.push_back(i);
    }
    return result;
  };

  // Retry leftovers against the already-grown trees. With other manifolds
  // labelled, a leftover's neighbourhood can be cleaned of known-foreign
  // points before the gates run, which resolves intersection-region points
  // that defeated mod_dis ordering during the first pass. Repeats until no
  // sweep attaches anything.
  auto attach_leftovers = [&]() {
    bool attached_any = true;
    while (attached_any && unlabelled_count > 0) {
      attached_any = false;
      for (int u : collect_unlabelled()) {
        const NeighborSet& full = ctx.neighborhood(u);
        for (int pos = 0; pos < full.size(); ++pos) {
          const int v = full.neighbors[pos];
          if (!labelled[v] || !node_state[v].has_value()) continue;
          const TraversalNode& parent = *node_state[v];
          const int target = out.manifold_of[v];

          // Keep own-manifold and unlabelled neighbours only.
          NeighborSet cleaned;
          cleaned.center = u;
          for (int q = 0; q < full.size(); ++q) {
            const int w = full.neighbors[q];
            if (!labelled[w] || out.manifold_of[w] == target) {
              cleaned.neighbors.push_back(w);
              cleaned.distances.push_back(full.distances[q]);
            }
          }
          if (cleaned.size() < std::max(cfg.min_neigh, parent.geometry.intrinsic_dim + 1)) continue;

          FiltrationResult res = filter_neighborhood(ctx, u, cleaned, parent, cfg);
          if (!res.accepted) continue;

          TraversalNode node;
          node.point = u;
          node.parent = v;
          node.depth = parent.depth + 1;
          node.ema = res.ema;
          node.geometry = std::move(res.geometry);
          include(u, v, std::move(node), target);
          attached_any = true;
          break;
        }
      }
    }
  };

  while (unlabelled_count > 0) {
    if (out.manifold_count > 0) {
      attach_leftovers();
      if (unlabelled_count == 0) break;
    }

    const std::vector<int> unlabelled = collect_unlabelled();
    const int root = select_root(points, unlabelled);
    const NeighborSet& root_neigh = ctx.neighborhood(root);

    // A root must be able to grow a neighbourhood of its own kind. When too
    // few unlabelled points remain around it, the point is terminal residue
    // of the gates: it joins its nearest labelled neighbour's manifold
    // rather than seeding one that could never reach a valid geometry.
    int unlabelled_nearby = 0;
    int nearest_labelled = -1;
    for (int v : root_neigh.neighbors) {
      if (labelled[v]) {
        if (nearest_labelled < 0) nearest_labelled = v;
      } else {
        ++unlabelled_nearby;
      }
    }
    if (unlabelled_nearby + 1 < cfg.min_neigh && nearest_labelled >= 0) {
      TraversalNode node;
      node.point = root;
      node.parent = nearest_labelled;
      node.geometry = ctx.geometry(root);
      node.depth = node_state[nearest_labelled] ? node_state[nearest_labelled]->depth + 1 : 1;
      include(root, nearest_labelled, std::move(node), out.manifold_of[nearest_labelled]);
      continue;
    }

    const int manifold_id = out.manifold_count++;
    const int warmup_quota =
        std::max(1, static_cast<int>(std::ceil(cfg.warmup_frac * static_cast<double>(unlabelled.size()))));
    out.manifold_members.emplace_back();

    if (root_neigh.size() < cfg.min_neigh) {
      // Component too small to estimate geometry; the root becomes a
      // singleton manifold.
      TraversalNode stub;
      stub.point = root;
      if (root_neigh.size() >= 1) stub.geometry = ctx.geometry(root);
      include(root, -1, std::move(stub), manifold_id);
      continue;
    }

    struct StackEntry {
      TraversalNode node;
      std::size_t next_child = 0;  // cursor into the node's component k-NN list
    };
    std::vector<StackEntry> stack;

    TraversalNode root_node;
    root_node.point = root;
    root_node.geometry = ctx.geometry(root);
    include(root, -1, root_node, manifold_id);
    int included = 1;
    stack.push_back(StackEntry{std::move(root_node), 0});

    while (!stack.empty()) {
      StackEntry& top = stack.back();

      // Next unlabelled child in ascending-distance order.
      const NeighborSet& frontier_neigh = ctx.neighborhood(top.node.point);
      int child = -1;
      while (top.next_child < frontier_neigh.neighbors.size()) {
        const int cand = frontier_neigh.neighbors[top.next_child];
        ++top.next_child;
        if (!labelled[cand]) {
          child = cand;
          break;
        }
      }
      if (child < 0) {
        node_state[top.node.point] = top.node;  // keep the final EMA state
        stack.pop_back();
        continue;
      }

      const LocalGeometry& child_geom = ctx.geometry(child);
      TraversalNode child_node;
      child_node.point = child;
      child_node.parent = top.node.point;
      child_node.depth = top.node.depth + 1;
      bool accepted = false;
      Eigen::VectorXd observed;

      if (included < warmup_quota) {
        // Warm-up: unconditional inclusion, EMA seeded with the raw profile.
        observed = angle_profile(top.node.geometry, child_geom);
        child_node.ema = observed;
        child_node.geometry = child_geom;
        accepted = true;
      } else {
        const InclusionResult inc =
            inclusion_test(top.node, child_geom, points.row(child).transpose(), cfg);
        if (inc.accepted) {
          observed = inc.observed;
          child_node.ema = inc.ema;
          child_node.geometry = child_geom;
          child_node.geometry.intrinsic_dim = inc.effective_dim;
          accepted = true;
        } else {
          FiltrationResult filt =
              filter_neighborhood(ctx, child, ctx.neighborhood(child), top.node, cfg);
          if (filt.accepted) {
            observed = filt.observed;
            child_node.ema = filt.ema;
            child_node.geometry = std::move(filt.geometry);
            accepted = true;
          }
        }
      }

      if (!accepted) continue;  // unlabelled until another frontier reaches it

      if (!top.node.ema.has_value()) top.node.ema = observed;
      include(child, top.node.point, child_node, manifold_id);
      ++included;
      stack.push_back(StackEntry{std::move(child_node), 0});
    }
  }

  // Manifold intrinsic dimension: mode of member dims, smallest on ties.
  for (int m = 0; m < out.manifold_count; ++m) {
    std::map<int, int> dim_votes;
    for (int p : out.manifold_members[m]) ++dim_votes[node_dim[p]];
    int best_dim = 0, best_votes = -1;
    for (const auto& [dim, votes] : dim_votes) {
      if (votes > best_votes) {
        best_votes = votes;
        best_dim = dim;
      }
    }
    out.manifold_dims.push_back(best_dim);
  }

  return out;
}

/// Final assignment for the whole dataset.
struct ManifoldSummary {
  int component = 0;
  int local_id = 0;  // manifold id within its component
  std::vector<int> members;
  int intrinsic_dim = 0;
};

struct ManifoldLabeling {
  std::vector<int> component_of;  // per point
  std::vector<int> manifold_of;   // per point, id local to its component
  std::vector<int> parent_of;     // traversal forest, -1 for roots
  int component_count = 0;
  std::vector<ManifoldSummary> manifolds;

  int manifold_total() const { return static_cast<int>(manifolds.size()); }

  /// Flatten (component, manifold) pairs to dense global cluster ids.
  std::vector<int> flat_labels() const {
    std::vector<int> flat(component_of.size(), -1);
    int next = 0;
    std::map<std::pair<int, int>, int> ids;
    for (std::size_t i = 0; i < component_of.size(); ++i) {
      const auto key = std::make_pair(component_of[i], manifold_of[i]);
      auto [it, inserted] = ids.try_emplace(key, next);
      if (inserted) ++next;
      flat[i] = it->second;
    }
    return flat;
  }
};

/// Wall-clock seconds per pipeline stage.
struct StageTimings {
  double graph_seconds = 0.0;
  double spectrum_seconds = 0.0;
  double split_seconds = 0.0;
  double traversal_seconds = 0.0;
};

struct SegmentationResult {
  ManifoldLabeling labeling;
  StageTimings timings;
};

/// Full two-stage pipeline: k-NN graph, Laplacian spectrum component count,
/// component split, then per-component manifold traversal. Deterministic for
/// fixed input and config.
inline SegmentationResult segment(const PointMatrix& points, const AcevConfig& cfg) {
  validate_points(points);
  cfg.validate();

  const int n = static_cast<int>(points.rows());
  SegmentationResult result;
  ManifoldLabeling& labeling = result.labeling;
  labeling.component_of.assign(n, 0);
  labeling.manifold_of.assign(n, 0);
  labeling.parent_of.assign(n, -1);

  using Clock = std::chrono::steady_clock;
  const auto elapsed = [](Clock::time_point from) {
    return std::chrono::duration<double>(Clock::now() - from).count();
  };

  ComponentLabels components;
  if (n == 1) {
    components = ComponentLabels{{0}, 1};
  } else {
    auto t0 = Clock::now();
    const NeighborGraph graph = build_knn_graph(points, cfg.k, cfg.graph_mode);
    result.timings.graph_seconds = elapsed(t0);

    t0 = Clock::now();
    const int m = count_components(laplacian(graph), cfg.zero_tol);
    result.timings.spectrum_seconds = elapsed(t0);

    t0 = Clock::now();
    components = split_components(points, graph, m, cfg.components_by_graph);
    result.timings.split_seconds = elapsed(t0);
  }
  labeling.component_of = components.labels;
  labeling.component_count = components.count;

  std::vector<std::vector<int>> member_lists(components.count);
  for (int i = 0; i < n; ++i) member_lists[components.labels[i]].push_back(i);

  const auto t0 = Clock::now();
  for (int c = 0; c < components.count; ++c) {
    const ComponentSegmentation seg = segment_component(points, member_lists[c], cfg);
    for (int i : member_lists[c]) {
      labeling.manifold_of[i] = seg.manifold_of[i];
      labeling.parent_of[i] = seg.parent_of[i];
    }
    for (int m_id = 0; m_id < seg.manifold_count; ++m_id) {
      ManifoldSummary summary;
      summary.component = c;
      summary.local_id = m_id;
      summary.members = seg.manifold_members[m_id];
      summary.intrinsic_dim = seg.manifold_dims[m_id];
      labeling.manifolds.push_back(std::move(summary));
    }
  }
  result.timings.traversal_seconds = elapsed(t0);
  return result;
}

}  // namespace acev
