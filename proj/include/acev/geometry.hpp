// Per-point geometric primitives: exact k-nearest-neighbour queries, local
// covariance eigenstructure, angular gaps between corresponding principal
// directions, and variance-based intrinsic dimension estimation.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace acev {

/// Row-major dataset: one point per row, D coordinates per point.
using PointMatrix = Eigen::MatrixXd;

/// Throws std::invalid_argument if the dataset is empty or contains
/// non-finite coordinates.
inline void validate_points(const PointMatrix& points) {
  if (points.rows() < 1 || points.cols() < 1) {
    throw std::invalid_argument("dataset must contain at least one point with at least one coordinate");
  }
  if (!points.allFinite()) {
    throw std::invalid_argument("dataset contains NaN or infinite coordinates");
  }
}

/// The k nearest neighbours of one point, ordered by ascending Euclidean
/// distance with ties broken by ascending index. The centre itself is
/// excluded.
struct NeighborSet {
  int center = -1;
  std::vector<int> neighbors;
  std::vector<double> distances;

  int size() const { return static_cast<int>(neighbors.size()); }
};

/// Eigenstructure of one point's neighbourhood covariance. Eigenvalues are
/// descending and clamped non-negative; eigenvector column w is the rank-w
/// principal direction. intrinsic_dim counts the directions carrying more
/// than the variance fraction threshold used to build the object.
struct LocalGeometry {
  int center = -1;
  Eigen::VectorXd centroid;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  int intrinsic_dim = 0;
};

/// Exact k-NN by brute force: fine at the dataset sizes this library
/// targets. Returns min(k, n-1) neighbours.
inline NeighborSet knn_query(const PointMatrix& points, int i, int k) {
  const int n = static_cast<int>(points.rows());
  if (n == 0) throw std::invalid_argument("knn_query: empty dataset");
  if (i < 0 || i >= n) throw std::invalid_argument("knn_query: point index out of range");
  if (k < 1) throw std::invalid_argument("knn_query: k must be positive");

  std::vector<std::pair<double, int>> order;
  order.reserve(n - 1);
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    order.emplace_back((points.row(j) - points.row(i)).squaredNorm(), j);
  }
  const int count = std::min<int>(k, n - 1);
  std::partial_sort(order.begin(), order.begin() + count, order.end());

  NeighborSet result;
  result.center = i;
  result.neighbors.reserve(count);
  result.distances.reserve(count);
  for (int r = 0; r < count; ++r) {
    result.neighbors.push_back(order[r].second);
    result.distances.push_back(std::sqrt(order[r].first));
  }
  return result;
}

/// Mean of the neighbourhood including its centre point.
inline Eigen::VectorXd neighborhood_centroid(const PointMatrix& points, const NeighborSet& neigh) {
  Eigen::VectorXd centroid = points.row(neigh.center).transpose();
  for (int j : neigh.neighbors) centroid += points.row(j).transpose();
  return centroid / static_cast<double>(neigh.size() + 1);
}

/// Sample covariance (divisor m-1) of the centre point together with its
/// neighbours, centred at their mean. Optionally returns that mean through
/// `centroid_out`. Throws if fewer than two points are available.
inline Eigen::MatrixXd local_covariance(const PointMatrix& points, const NeighborSet& neigh,
                                        Eigen::VectorXd* centroid_out = nullptr) {
  const int m = neigh.size() + 1;
  if (m < 2) throw std::invalid_argument("local_covariance: degenerate neighbourhood (fewer than 2 points)");

  const int dim = static_cast<int>(points.cols());
  Eigen::MatrixXd gathered(m, dim);
  gathered.row(0) = points.row(neigh.center);
  for (int r = 0; r < neigh.size(); ++r) gathered.row(r + 1) = points.row(neigh.neighbors[r]);

  const Eigen::RowVectorXd mean = gathered.colwise().mean();
  gathered.rowwise() -= mean;
  if (centroid_out) *centroid_out = mean.transpose();
  return (gathered.transpose() * gathered) / static_cast<double>(m - 1);
}

struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, matching order
};

/// Dense symmetric eigendecomposition with descending eigenvalues.
/// Rejects matrices that are asymmetric beyond 1e-8 relative tolerance.
inline EigenDecomposition eig_sym(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eig_sym: matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument("eig_sym: matrix is not symmetric within tolerance");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_sym: eigensolver did not converge");
  }

  // Eigen reports ascending order; flip to descending.
  EigenDecomposition result;
  result.eigenvalues = solver.eigenvalues().reverse();
  result.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return result;
}

/// Eigenvalues only, descending. Same solver as eig_sym without the
/// eigenvector computation; used where spectra of large matrices are needed.
inline Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("sym_eigenvalues: matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument("sym_eigenvalues: matrix is not symmetric within tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sym_eigenvalues: eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

/// Angle in [0, pi/2] between the lines spanned by two vectors. Eigenvector
/// signs are arbitrary, so the cosine is taken in absolute value.
inline double angle_differ(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("angle_differ: zero-norm vector");
  const double cosine = std::min(1.0, std::abs(a.dot(b)) / (na * nb));
  return std::acos(cosine);
}

/// Angular gap per rank between the principal directions of two local
/// geometries; entry g compares the rank-g eigenvectors.
inline Eigen::VectorXd angle_profile(const LocalGeometry& g1, const LocalGeometry& g2) {
  if (g1.eigenvectors.rows() != g2.eigenvectors.rows() || g1.eigenvectors.cols() != g2.eigenvectors.cols()) {
    throw std::invalid_argument("angle_profile: dimension mismatch");
  }
  const int dim = static_cast<int>(g1.eigenvectors.cols());
  Eigen::VectorXd profile(dim);
  for (int g = 0; g < dim; ++g) {
    profile[g] = angle_differ(g1.eigenvectors.col(g), g2.eigenvectors.col(g));
  }
  return profile;
}

/// Relative separation of two adjacent eigenvalues, in [0, 1].
inline double relative_gap(double larger, double smaller) {
  const double denom = larger + smaller;
  if (denom <= 0.0) return 0.0;
  return (larger - smaller) / denom;
}

/// Whether the rank-g principal direction is identifiable: its eigenvalue
/// must be separated from both spectral neighbours by a relative gap of at
/// least `gap_thresh`. Directions inside a near-degenerate cluster are
/// arbitrary rotations of each other and carry no comparable orientation.
inline bool direction_identifiable(const Eigen::VectorXd& eigenvalues, int g, double gap_thresh) {
  if (eigenvalues[0] <= 0.0) return false;
  if (g > 0 && relative_gap(eigenvalues[g - 1], eigenvalues[g]) < gap_thresh) return false;
  if (g + 1 < eigenvalues.size() &&
      relative_gap(eigenvalues[g], eigenvalues[g + 1]) < gap_thresh) {
    return false;
  }
  return true;
}

/// Whether a geometry's split into signal and noise directions is sharp: the
/// eigengap at its intrinsic-dimension cut must clear `gap_thresh`. Spectra
/// with no cut (dimension 0 or full rank) count as sharp.
inline bool dimension_cut_identifiable(const Eigen::VectorXd& eigenvalues, int intrinsic_dim,
                                       double gap_thresh) {
  if (intrinsic_dim <= 0 || intrinsic_dim >= eigenvalues.size()) return true;
  return relative_gap(eigenvalues[intrinsic_dim - 1], eigenvalues[intrinsic_dim]) >= gap_thresh;
}

/// Largest principal angle between the spans of two orthonormal column
/// blocks, i.e. how far the first subspace sticks out of the second. Zero
/// for an empty first block; requires matching ambient dimension.
inline double subspace_angle(const Eigen::MatrixXd& sub, const Eigen::MatrixXd& within) {
  if (sub.cols() == 0) return 0.0;
  if (within.cols() == 0) return M_PI / 2;
  if (sub.rows() != within.rows()) throw std::invalid_argument("subspace_angle: dimension mismatch");
  const Eigen::MatrixXd overlap = within.transpose() * sub;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(overlap);
  const double smallest = svd.singularValues().minCoeff();
  return std::acos(std::clamp(smallest, 0.0, 1.0));
}

/// Number of directions whose eigenvalue exceeds the fraction `var_thresh`
/// of the total variance. An all-zero spectrum has dimension 0.
inline int intrinsic_dimension(const Eigen::VectorXd& eigenvalues, double var_thresh) {
  const double total = eigenvalues.sum();
  if (total <= 0.0) return 0;
  int dim = 0;
  for (int w = 0; w < eigenvalues.size(); ++w) {
    if (eigenvalues[w] / total > var_thresh) ++dim;
  }
  return dim;
}

/// Full local analysis of one neighbourhood: covariance, eigenstructure and
/// intrinsic dimension. Tiny negative eigenvalues from round-off are clamped
/// to zero before the dimension count.
inline LocalGeometry local_geometry(const PointMatrix& points, int i, const NeighborSet& neigh,
                                    double var_thresh) {
  LocalGeometry geom;
  geom.center = i;
  const Eigen::MatrixXd cov = local_covariance(points, neigh, &geom.centroid);
  EigenDecomposition eig = eig_sym(cov);
  geom.eigenvalues = eig.eigenvalues.cwiseMax(0.0);
  geom.eigenvectors = std::move(eig.eigenvectors);
  geom.intrinsic_dim = intrinsic_dimension(geom.eigenvalues, var_thresh);
  return geom;
}

}  // namespace acev
