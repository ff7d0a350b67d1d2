// Clustering evaluation (ARI, NMI) and seeded synthetic intersecting-manifold
// scenes: planes, s-curves and lines in 3-D ambient space, composable with
// rigid placements and analytic intersection masks.
#pragma once

#include "acev/geometry.hpp"
#include "acev/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace acev {

using Labeling = std::vector<int>;

namespace detail {

/// Map arbitrary ids to dense 0..K-1 by first appearance.
inline std::vector<int> densify(const Labeling& labels, int* class_count) {
  std::vector<int> dense(labels.size());
  std::map<int, int> ids;
  int next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(labels[i], next);
    if (inserted) ++next;
    dense[i] = it->second;
  }
  *class_count = next;
  return dense;
}

struct Contingency {
  std::vector<std::vector<long long>> counts;  // rows: a classes, cols: b classes
  std::vector<long long> row_sums;
  std::vector<long long> col_sums;
  long long n = 0;
};

inline Contingency contingency_table(const Labeling& a, const Labeling& b) {
  if (a.size() != b.size()) throw std::invalid_argument("labelings have different lengths");
  if (a.empty()) throw std::invalid_argument("labelings are empty");
  int ka = 0, kb = 0;
  const std::vector<int> da = densify(a, &ka);
  const std::vector<int> db = densify(b, &kb);
  Contingency table;
  table.counts.assign(ka, std::vector<long long>(kb, 0));
  table.row_sums.assign(ka, 0);
  table.col_sums.assign(kb, 0);
  table.n = static_cast<long long>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++table.counts[da[i]][db[i]];
    ++table.row_sums[da[i]];
    ++table.col_sums[db[i]];
  }
  return table;
}

inline bool same_partition(const Labeling& a, const Labeling& b) {
  if (a.size() != b.size()) return false;
  int ka = 0, kb = 0;
  return densify(a, &ka) == densify(b, &kb);
}

inline double comb2(long long m) { return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1); }

}  // namespace detail

/// Adjusted Rand index in [-1, 1]; 1 for identical partitions. Partitions
/// that are identical up to renaming score exactly 1.
inline double ari(const Labeling& a, const Labeling& b) {
  const detail::Contingency t = detail::contingency_table(a, b);
  if (detail::same_partition(a, b)) return 1.0;

  double index = 0.0;
  for (const auto& row : t.counts) {
    for (long long cell : row) index += detail::comb2(cell);
  }
  double sum_a = 0.0, sum_b = 0.0;
  for (long long r : t.row_sums) sum_a += detail::comb2(r);
  for (long long c : t.col_sums) sum_b += detail::comb2(c);

  const double pairs = detail::comb2(t.n);
  const double expected = pairs > 0.0 ? sum_a * sum_b / pairs : 0.0;
  const double maximum = 0.5 * (sum_a + sum_b);
  const double denom = maximum - expected;
  if (denom == 0.0) return index == maximum ? 1.0 : 0.0;
  return (index - expected) / denom;
}

/// Normalized mutual information in [0, 1], normalized by the arithmetic
/// mean of the two entropies. Identical partitions score exactly 1; if
/// exactly one side is a single class, the score is 0.
inline double nmi(const Labeling& a, const Labeling& b) {
  const detail::Contingency t = detail::contingency_table(a, b);
  if (detail::same_partition(a, b)) return 1.0;

  const double n = static_cast<double>(t.n);
  double h_a = 0.0, h_b = 0.0;
  for (long long r : t.row_sums) {
    if (r > 0) h_a -= (r / n) * std::log(r / n);
  }
  for (long long c : t.col_sums) {
    if (c > 0) h_b -= (c / n) * std::log(c / n);
  }
  if (h_a == 0.0 && h_b == 0.0) return 1.0;  // both single-class
  if (h_a == 0.0 || h_b == 0.0) return 0.0;

  double mi = 0.0;
  for (std::size_t i = 0; i < t.counts.size(); ++i) {
    for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
      const long long cell = t.counts[i][j];
      if (cell > 0) {
        mi += (cell / n) * std::log(n * cell / (static_cast<double>(t.row_sums[i]) *
                                                static_cast<double>(t.col_sums[j])));
      }
    }
  }
  return std::clamp(mi / (0.5 * (h_a + h_b)), 0.0, 1.0);
}

/// Analytic intersection locus of a composed scene: a line or a point.
struct Locus {
  enum class Kind { kLine, kPoint } kind = Kind::kPoint;
  Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();  // lines only

  double distance(const Eigen::Vector3d& p) const {
    if (kind == Kind::kPoint) return (p - anchor).norm();
    const Eigen::Vector3d offset = p - anchor;
    return (offset - offset.dot(direction.normalized()) * direction.normalized()).norm();
  }

  static Locus line(const Eigen::Vector3d& anchor, const Eigen::Vector3d& direction) {
    return Locus{Kind::kLine, anchor, direction};
  }
  static Locus point(const Eigen::Vector3d& anchor) {
    return Locus{Kind::kPoint, anchor, Eigen::Vector3d::UnitX()};
  }
};

struct SyntheticScene {
  PointMatrix points;
  Labeling truth;
  std::vector<char> intersection_mask;
  std::string descriptor;
  std::vector<Locus> loci;  // analytic loci the mask was derived from, if any
};

namespace detail {

inline std::string describe(const std::string& name, int n, double sigma, std::uint64_t seed,
                            const std::string& extra = "") {
  std::ostringstream out;
  out << name << "(n=" << n << ",sigma=" << sigma << ",seed=" << seed;
  if (!extra.empty()) out << "," << extra;
  out << ")";
  return out.str();
}

inline void add_noise(PointMatrix& points, double sigma, Rng& rng) {
  if (sigma <= 0.0) return;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index d = 0; d < points.cols(); ++d) points(i, d) += sigma * rng.gaussian();
  }
}

}  // namespace detail

/// Uniform samples on an axis-aligned square plane (z = 0) of side `extent`
/// centred at the origin, plus isotropic Gaussian noise.
inline SyntheticScene gen_plane(int n, double extent, double sigma, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_plane: n must be positive");
  if (sigma < 0.0) throw std::invalid_argument("gen_plane: sigma must be non-negative");
  Rng rng(seed);
  SyntheticScene scene;
  scene.points.resize(n, 3);
  const double half = extent / 2.0;
  for (int i = 0; i < n; ++i) {
    scene.points(i, 0) = rng.uniform(-half, half);
    scene.points(i, 1) = rng.uniform(-half, half);
    scene.points(i, 2) = 0.0;
  }
  detail::add_noise(scene.points, sigma, rng);
  scene.truth.assign(n, 0);
  scene.intersection_mask.assign(n, 0);
  std::ostringstream extra;
  extra << "extent=" << extent;
  scene.descriptor = detail::describe("plane", n, sigma, seed, extra.str());
  return scene;
}

/// The standard s-curve sheet: (sin t, u, sign(t) * (cos t - 1)) with
/// t in [-3pi/2, 3pi/2] and width u in [0, 2], plus Gaussian noise.
inline SyntheticScene gen_scurve(int n, double sigma, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_scurve: n must be positive");
  if (sigma < 0.0) throw std::invalid_argument("gen_scurve: sigma must be non-negative");
  Rng rng(seed);
  SyntheticScene scene;
  scene.points.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const double t = rng.uniform(-1.5 * M_PI, 1.5 * M_PI);
    const double u = rng.uniform(0.0, 2.0);
    const double sign = t >= 0.0 ? 1.0 : -1.0;
    scene.points(i, 0) = std::sin(t);
    scene.points(i, 1) = u;
    scene.points(i, 2) = sign * (std::cos(t) - 1.0);
  }
  detail::add_noise(scene.points, sigma, rng);
  scene.truth.assign(n, 0);
  scene.intersection_mask.assign(n, 0);
  scene.descriptor = detail::describe("scurve", n, sigma, seed);
  return scene;
}

/// Uniform samples on a segment of length `extent` along the x axis centred
/// at the origin, plus Gaussian noise.
inline SyntheticScene gen_line(int n, double sigma, std::uint64_t seed, double extent = 5.0) {
  if (n < 1) throw std::invalid_argument("gen_line: n must be positive");
  if (sigma < 0.0) throw std::invalid_argument("gen_line: sigma must be non-negative");
  Rng rng(seed);
  SyntheticScene scene;
  scene.points.resize(n, 3);
  const double half = extent / 2.0;
  for (int i = 0; i < n; ++i) {
    scene.points(i, 0) = rng.uniform(-half, half);
    scene.points(i, 1) = 0.0;
    scene.points(i, 2) = 0.0;
  }
  detail::add_noise(scene.points, sigma, rng);
  scene.truth.assign(n, 0);
  scene.intersection_mask.assign(n, 0);
  std::ostringstream extra;
  extra << "extent=" << extent;
  scene.descriptor = detail::describe("line", n, sigma, seed, extra.str());
  return scene;
}

/// Rigid placement applied to a scene part before composition.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
};

/// Concatenate transformed parts into one scene. Truth is the part index.
/// The intersection mask marks points within `delta` of an analytic locus
/// when loci are supplied, and otherwise points within `delta` of some point
/// of another part.
inline SyntheticScene compose_scene(const std::vector<SyntheticScene>& parts,
                                    const std::vector<RigidTransform>& placements, double delta,
                                    std::vector<Locus> loci = {}) {
  if (parts.empty()) throw std::invalid_argument("compose_scene: no parts");
  if (parts.size() != placements.size()) {
    throw std::invalid_argument("compose_scene: parts and placements differ in length");
  }
  const Eigen::Index dim = parts.front().points.cols();
  int total = 0;
  for (const auto& part : parts) {
    if (part.points.cols() != dim) throw std::invalid_argument("compose_scene: ambient dimension mismatch");
    total += static_cast<int>(part.points.rows());
  }

  SyntheticScene scene;
  scene.points.resize(total, dim);
  scene.truth.resize(total);
  scene.intersection_mask.assign(total, 0);
  scene.loci = loci;

  std::vector<int> part_of(total);
  int row = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (Eigen::Index i = 0; i < parts[p].points.rows(); ++i, ++row) {
      scene.points.row(row) = placements[p].apply(parts[p].points.row(i).transpose()).transpose();
      scene.truth[row] = static_cast<int>(p);
      part_of[row] = static_cast<int>(p);
    }
  }

  if (!loci.empty()) {
    for (int i = 0; i < total; ++i) {
      const Eigen::Vector3d p = scene.points.row(i).transpose();
      for (const Locus& locus : loci) {
        if (locus.distance(p) <= delta) {
          scene.intersection_mask[i] = 1;
          break;
        }
      }
    }
  } else {
    for (int i = 0; i < total; ++i) {
      for (int j = 0; j < total; ++j) {
        if (part_of[i] != part_of[j] &&
            (scene.points.row(i) - scene.points.row(j)).norm() < delta) {
          scene.intersection_mask[i] = 1;
          break;
        }
      }
    }
  }

  std::ostringstream desc;
  desc << "compose(delta=" << delta;
  for (const auto& part : parts) desc << "," << part.descriptor;
  desc << ")";
  scene.descriptor = desc.str();
  return scene;
}

/// Mask band width used by the canned scenes: three noise sigmas plus one
/// percent of the scene extent.
inline double default_band(double sigma, double extent) { return 3.0 * sigma + 0.01 * extent; }

/// Two square planes of side 2 crossing along the y axis at the given
/// dihedral angle (degrees).
inline SyntheticScene scene_plane_plane(int n, double sigma, std::uint64_t seed,
                                        double angle_deg = 90.0) {
  const int n_a = n / 2;
  const int n_b = n - n_a;
  std::vector<SyntheticScene> parts;
  parts.push_back(gen_plane(n_a, 2.0, sigma, seed));
  parts.push_back(gen_plane(n_b, 2.0, sigma, seed + 1));

  const double theta = angle_deg * M_PI / 180.0;
  RigidTransform identity;
  RigidTransform tilt;
  tilt.rotation = Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitY()).toRotationMatrix();

  SyntheticScene scene = compose_scene(parts, {identity, tilt}, default_band(sigma, 2.0),
                                       {Locus::line(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitY())});
  std::ostringstream desc;
  desc << "plane_plane(n=" << n << ",sigma=" << sigma << ",seed=" << seed << ",angle=" << angle_deg << ")";
  scene.descriptor = desc.str();
  return scene;
}

/// An s-curve sheet sliced by a square plane at x = 0. The plane meets the
/// sheet along three lines parallel to the y axis (t = 0, +-pi).
inline SyntheticScene scene_plane_scurve(int n, double sigma, std::uint64_t seed) {
  const int n_s = n / 2;
  const int n_p = n - n_s;
  std::vector<SyntheticScene> parts;
  parts.push_back(gen_scurve(n_s, sigma, seed));
  parts.push_back(gen_plane(n_p, 5.0, sigma, seed + 1));

  RigidTransform identity;
  RigidTransform upright;  // x-y plane -> y-z plane (x = 0), centred on the sheet
  upright.rotation.col(0) = Eigen::Vector3d::UnitY();
  upright.rotation.col(1) = Eigen::Vector3d::UnitZ();
  upright.rotation.col(2) = Eigen::Vector3d::UnitX();
  upright.translation = Eigen::Vector3d(0.0, 1.0, 0.0);

  const std::vector<Locus> loci = {
      Locus::line(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d::UnitY()),
      Locus::line(Eigen::Vector3d(0, 0, -2), Eigen::Vector3d::UnitY()),
      Locus::line(Eigen::Vector3d(0, 0, 2), Eigen::Vector3d::UnitY()),
  };
  SyntheticScene scene = compose_scene(parts, {identity, upright}, default_band(sigma, 5.0), loci);
  std::ostringstream desc;
  desc << "plane_scurve(n=" << n << ",sigma=" << sigma << ",seed=" << seed << ")";
  scene.descriptor = desc.str();
  return scene;
}

/// An s-curve sheet pierced by a vertical line at (x, y) = (0.5, 1), which
/// crosses it at three points (t = pi/6, 5pi/6, -7pi/6).
inline SyntheticScene scene_scurve_line(int n, double sigma, std::uint64_t seed) {
  const int n_s = (4 * n) / 5;
  const int n_l = n - n_s;
  std::vector<SyntheticScene> parts;
  parts.push_back(gen_scurve(n_s, sigma, seed));
  parts.push_back(gen_line(n_l, sigma, seed + 1, 5.0));

  RigidTransform identity;
  RigidTransform vertical;  // x axis -> z axis
  vertical.rotation.col(0) = Eigen::Vector3d::UnitZ();
  vertical.rotation.col(1) = Eigen::Vector3d::UnitX();
  vertical.rotation.col(2) = Eigen::Vector3d::UnitY();
  vertical.translation = Eigen::Vector3d(0.5, 1.0, 0.0);

  const double c6 = std::cos(M_PI / 6.0);
  const std::vector<Locus> loci = {
      Locus::point(Eigen::Vector3d(0.5, 1.0, c6 - 1.0)),
      Locus::point(Eigen::Vector3d(0.5, 1.0, -c6 - 1.0)),
      Locus::point(Eigen::Vector3d(0.5, 1.0, 1.0 + c6)),
  };
  SyntheticScene scene = compose_scene(parts, {identity, vertical}, default_band(sigma, 5.0), loci);
  std::ostringstream desc;
  desc << "scurve_line(n=" << n << ",sigma=" << sigma << ",seed=" << seed << ")";
  scene.descriptor = desc.str();
  return scene;
}

/// Four intersecting manifolds in two well-separated groups: a plane-plane
/// cross at the origin and an s-curve pierced by a line shifted +12 in x.
/// Truth ids: 0,1 planes; 2 s-curve; 3 line.
inline SyntheticScene scene_quad(int n, double sigma, std::uint64_t seed) {
  const int half = n / 2;
  SyntheticScene planes = scene_plane_plane(half, sigma, seed);
  SyntheticScene curve = scene_scurve_line(n - half, sigma, seed + 100);

  const Eigen::Vector3d shift(12.0, 0.0, 0.0);
  const int n_total = static_cast<int>(planes.points.rows() + curve.points.rows());
  SyntheticScene scene;
  scene.points.resize(n_total, 3);
  scene.truth.resize(n_total);
  scene.intersection_mask.resize(n_total);

  int row = 0;
  for (Eigen::Index i = 0; i < planes.points.rows(); ++i, ++row) {
    scene.points.row(row) = planes.points.row(i);
    scene.truth[row] = planes.truth[i];
    scene.intersection_mask[row] = planes.intersection_mask[i];
  }
  for (Eigen::Index i = 0; i < curve.points.rows(); ++i, ++row) {
    scene.points.row(row) = curve.points.row(i).transpose() + shift;
    scene.truth[row] = 2 + curve.truth[i];
    scene.intersection_mask[row] = curve.intersection_mask[i];
  }
  scene.loci = planes.loci;
  for (Locus locus : curve.loci) {
    locus.anchor += shift;
    scene.loci.push_back(locus);
  }
  std::ostringstream desc;
  desc << "quad(n=" << n << ",sigma=" << sigma << ",seed=" << seed << ")";
  scene.descriptor = desc.str();
  return scene;
}

}  // namespace acev
