// Dataset ingestion and result serialization: delimited text loading with
// optional header/label/mask columns, labels CSV output, scene CSV export,
// JSON run reports, and a content digest for reproducibility tracking.
#pragma once

#include "acev/evalkit.hpp"
#include "acev/geometry.hpp"
#include "acev/traversal.hpp"
#include "acev/version.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace acev {

/// How to read a delimited dataset file. Label and mask columns are
/// addressed by header name or by zero-based index rendered as text.
struct DatasetFile {
  std::string path;
  char delimiter = ',';
  bool has_header = false;
  std::optional<std::string> label_column;
  std::optional<std::string> mask_column;
};

struct LoadedDataset {
  PointMatrix points;
  std::optional<Labeling> labels;
  std::optional<std::vector<char>> mask;
  std::vector<std::string> coordinate_names;
};

namespace detail {

inline std::vector<std::string> split_row(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, delimiter)) cells.push_back(cell);
  if (!line.empty() && line.back() == delimiter) cells.emplace_back();
  return cells;
}

inline std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

/// Resolve a column given either its header name or its index as text.
inline int resolve_column(const std::string& wanted, const std::vector<std::string>& header,
                          int column_count) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == wanted) return static_cast<int>(c);
  }
  try {
    std::size_t used = 0;
    const int index = std::stoi(wanted, &used);
    if (used == wanted.size() && index >= 0 && index < column_count) return index;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("column '" + wanted + "' not found in dataset");
}

inline double parse_coordinate(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string text = trimmed(cell);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-numeric cell '" << cell << "' at row " << row + 1 << ", column " << col + 1;
    throw std::invalid_argument(msg.str());
  }
  return value;
}

}  // namespace detail

/// Parse a delimited dataset. Coordinate cells must be finite numbers; the
/// label column, if any, may hold arbitrary class tags which are densified
/// into integer ids by sorted order. Mask cells must be 0/1.
inline LoadedDataset load_dataset(const DatasetFile& file) {
  std::ifstream in(file.path);
  if (!in) throw std::invalid_argument("cannot open dataset file: " + file.path);

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(detail::split_row(line, file.delimiter));
  }
  if (rows.empty()) throw std::invalid_argument("dataset file is empty: " + file.path);

  std::vector<std::string> header;
  std::size_t first_data = 0;
  if (file.has_header) {
    for (auto& cell : rows[0]) header.push_back(detail::trimmed(cell));
    first_data = 1;
    if (rows.size() == 1) throw std::invalid_argument("dataset has a header but no data rows");
  }

  const std::size_t column_count = rows[first_data].size();
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    if (rows[r].size() != column_count) {
      std::ostringstream msg;
      msg << "ragged row " << r + 1 << ": expected " << column_count << " columns, found "
          << rows[r].size();
      throw std::invalid_argument(msg.str());
    }
  }

  int label_col = -1, mask_col = -1;
  if (file.label_column) label_col = detail::resolve_column(*file.label_column, header, column_count);
  if (file.mask_column) mask_col = detail::resolve_column(*file.mask_column, header, column_count);
  if (label_col >= 0 && label_col == mask_col) {
    throw std::invalid_argument("label and mask columns coincide");
  }

  std::vector<int> coord_cols;
  for (std::size_t c = 0; c < column_count; ++c) {
    if (static_cast<int>(c) != label_col && static_cast<int>(c) != mask_col) {
      coord_cols.push_back(static_cast<int>(c));
    }
  }
  if (coord_cols.empty()) throw std::invalid_argument("dataset has no coordinate columns");

  const std::size_t n = rows.size() - first_data;
  LoadedDataset out;
  out.points.resize(n, coord_cols.size());
  for (std::size_t c = 0; c < coord_cols.size(); ++c) {
    out.coordinate_names.push_back(file.has_header ? header[coord_cols[c]]
                                                   : "x" + std::to_string(c));
  }

  std::vector<std::string> label_cells;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& cells = rows[r + first_data];
    for (std::size_t c = 0; c < coord_cols.size(); ++c) {
      out.points(r, c) = detail::parse_coordinate(cells[coord_cols[c]], r + first_data, coord_cols[c]);
    }
    if (label_col >= 0) label_cells.push_back(detail::trimmed(cells[label_col]));
    if (mask_col >= 0) {
      const std::string cell = detail::trimmed(cells[mask_col]);
      if (cell != "0" && cell != "1") {
        std::ostringstream msg;
        msg << "mask cell '" << cell << "' at row " << r + first_data + 1 << " is not 0 or 1";
        throw std::invalid_argument(msg.str());
      }
      if (!out.mask) out.mask.emplace();
      out.mask->push_back(cell == "1" ? 1 : 0);
    }
  }

  if (label_col >= 0) {
    // Class tags sorted, then densified, so ids do not depend on row order.
    std::vector<std::string> sorted = label_cells;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    Labeling labels(n);
    for (std::size_t r = 0; r < n; ++r) {
      labels[r] = static_cast<int>(
          std::lower_bound(sorted.begin(), sorted.end(), label_cells[r]) - sorted.begin());
    }
    out.labels = std::move(labels);
  }
  return out;
}

/// Whole-file atomic write: content goes to a sibling temp file which is
/// then renamed over the target.
inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

/// Shortest-exact decimal rendering of a double (17 significant digits).
inline std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file for digest: " + path);
  std::uint64_t hash = 1469598103934665603ULL;
  char chunk[4096];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(chunk[i]);
      hash *= 1099511628211ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

/// Labels CSV: one row per point, stable column order.
inline std::string labels_csv(const ManifoldLabeling& labeling) {
  std::ostringstream out;
  out << "index,component,manifold\n";
  for (std::size_t i = 0; i < labeling.component_of.size(); ++i) {
    out << i << ',' << labeling.component_of[i] << ',' << labeling.manifold_of[i] << '\n';
  }
  return out.str();
}

/// Component labels CSV (stage 1 only).
inline std::string components_csv(const ComponentLabels& components) {
  std::ostringstream out;
  out << "index,component\n";
  for (std::size_t i = 0; i < components.labels.size(); ++i) {
    out << i << ',' << components.labels[i] << '\n';
  }
  return out.str();
}

/// Scene CSV: coordinates at full precision plus truth and mask columns.
inline std::string scene_csv(const SyntheticScene& scene) {
  std::ostringstream out;
  for (Eigen::Index d = 0; d < scene.points.cols(); ++d) out << 'x' << d << ',';
  out << "truth,mask\n";
  for (Eigen::Index i = 0; i < scene.points.rows(); ++i) {
    for (Eigen::Index d = 0; d < scene.points.cols(); ++d) {
      out << format_double(scene.points(i, d)) << ',';
    }
    out << scene.truth[i] << ',' << static_cast<int>(scene.intersection_mask[i]) << '\n';
  }
  return out.str();
}

struct MetricPair {
  double ari = 0.0;
  double nmi = 0.0;
};

/// Everything needed to reproduce and interpret one segmentation run.
struct RunReport {
  AcevConfig config;
  std::string input_path;
  std::string input_digest;
  int n = 0;
  int dimension = 0;
  int component_count = 0;
  std::vector<int> manifolds_per_component;
  ManifoldLabeling labeling;  // manifold summaries feed the report
  std::optional<MetricPair> metrics_overall;
  std::optional<MetricPair> metrics_off_mask;
  StageTimings timings;
};

inline nlohmann::ordered_json report_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["tool"] = "acev";
  j["version"] = kVersion;
  j["input"] = {{"path", report.input_path},
                {"digest", report.input_digest},
                {"n", report.n},
                {"dimension", report.dimension}};
  j["config"] = {{"k", report.config.k},
                 {"alpha", report.config.alpha},
                 {"angle_tol", report.config.angle_tol},
                 {"var_thresh", report.config.var_thresh},
                 {"gap_thresh", report.config.gap_thresh},
                 {"dist_tol", report.config.dist_tol},
                 {"subspace_tol", report.config.subspace_tol},
                 {"zero_tol", report.config.zero_tol},
                 {"warmup_frac", report.config.warmup_frac},
                 {"min_neigh", report.config.min_neigh},
                 {"seed", report.config.seed},
                 {"graph_mode", report.config.graph_mode == GraphSymmetrization::kUnion ? "union" : "mutual"},
                 {"components_by_graph", report.config.components_by_graph}};
  j["components"] = report.component_count;
  j["manifolds_per_component"] = report.manifolds_per_component;
  j["manifold_total"] = report.labeling.manifold_total();

  nlohmann::ordered_json manifolds = nlohmann::ordered_json::array();
  for (const ManifoldSummary& m : report.labeling.manifolds) {
    manifolds.push_back({{"component", m.component},
                         {"manifold", m.local_id},
                         {"size", static_cast<int>(m.members.size())},
                         {"intrinsic_dim", m.intrinsic_dim}});
  }
  j["manifolds"] = manifolds;

  if (report.metrics_overall) {
    j["metrics"] = {{"ari", report.metrics_overall->ari}, {"nmi", report.metrics_overall->nmi}};
  }
  if (report.metrics_off_mask) {
    j["metrics_off_mask"] = {{"ari", report.metrics_off_mask->ari},
                             {"nmi", report.metrics_off_mask->nmi}};
  }
  j["timings_seconds"] = {{"graph", report.timings.graph_seconds},
                          {"spectrum", report.timings.spectrum_seconds},
                          {"split", report.timings.split_seconds},
                          {"traversal", report.timings.traversal_seconds}};
  return j;
}

}  // namespace acev
