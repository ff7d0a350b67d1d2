// Command implementations behind the acev tool: segment, components, eval,
// gen and sweep. Kept as library functions so they can be exercised directly
// by tests; the binary itself only parses flags and dispatches.
#pragma once

#include "acev/io.hpp"

#include <chrono>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace acev {

namespace detail {

/// Shared error handling: user and data problems exit 1, internal invariant
/// violations exit 2. invalid_argument is a user error even though the
/// standard derives it from logic_error.
template <typename Fn>
int run_command(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::logic_error& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline MetricPair compute_metrics(const Labeling& truth, const Labeling& predicted) {
  return MetricPair{ari(truth, predicted), nmi(truth, predicted)};
}

inline MetricPair compute_metrics_masked(const Labeling& truth, const Labeling& predicted,
                                         const std::vector<char>& mask) {
  Labeling t, p;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!mask[i]) {
      t.push_back(truth[i]);
      p.push_back(predicted[i]);
    }
  }
  if (t.empty()) return MetricPair{0.0, 0.0};
  return compute_metrics(t, p);
}

}  // namespace detail

struct SegmentOptions {
  DatasetFile input;
  AcevConfig config;
  std::string out_labels = "labels.csv";
  std::string out_report = "report.json";
};

inline int cmd_segment(const SegmentOptions& opt, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  return detail::run_command(err, [&]() {
    const LoadedDataset data = load_dataset(opt.input);
    validate_points(data.points);
    opt.config.validate();

    const SegmentationResult result = segment(data.points, opt.config);

    RunReport report;
    report.config = opt.config;
    report.input_path = opt.input.path;
    report.input_digest = file_digest(opt.input.path);
    report.n = static_cast<int>(data.points.rows());
    report.dimension = static_cast<int>(data.points.cols());
    report.component_count = result.labeling.component_count;
    report.manifolds_per_component.assign(result.labeling.component_count, 0);
    for (const ManifoldSummary& m : result.labeling.manifolds) {
      ++report.manifolds_per_component[m.component];
    }
    report.labeling = result.labeling;
    report.timings = result.timings;

    if (data.labels) {
      const Labeling predicted = result.labeling.flat_labels();
      report.metrics_overall = detail::compute_metrics(*data.labels, predicted);
      if (data.mask) {
        report.metrics_off_mask = detail::compute_metrics_masked(*data.labels, predicted, *data.mask);
      }
    }

    atomic_write(opt.out_labels, labels_csv(result.labeling));
    atomic_write(opt.out_report, report_json(report).dump(2) + "\n");

    out << "components: " << report.component_count << "\n";
    out << "manifolds: " << result.labeling.manifold_total() << "\n";
    if (report.metrics_overall) {
      out << "ari: " << report.metrics_overall->ari << "  nmi: " << report.metrics_overall->nmi << "\n";
    }
    out << "labels: " << opt.out_labels << "\nreport: " << opt.out_report << "\n";
    return 0;
  });
}

struct ComponentsOptions {
  DatasetFile input;
  int k = 25;
  double zero_tol = 1e-8;
  GraphSymmetrization graph_mode = GraphSymmetrization::kUnion;
  bool by_graph = false;
  std::string out_labels;
};

inline int cmd_components(const ComponentsOptions& opt, std::ostream& out = std::cout,
                          std::ostream& err = std::cerr) {
  return detail::run_command(err, [&]() {
    const LoadedDataset data = load_dataset(opt.input);
    validate_points(data.points);
    if (data.points.rows() < 2) throw std::invalid_argument("need at least 2 points");

    const NeighborGraph graph = build_knn_graph(data.points, opt.k, opt.graph_mode);
    int m = count_components(laplacian(graph), opt.zero_tol);
    const ComponentLabels labels = split_components(data.points, graph, m, opt.by_graph);
    if (opt.by_graph) m = labels.count;

    out << "components: " << m << "\n";
    if (!opt.out_labels.empty()) {
      atomic_write(opt.out_labels, components_csv(labels));
      out << "labels: " << opt.out_labels << "\n";
    }
    return 0;
  });
}

namespace detail {

/// Read a labels file for evaluation: the tool's own labels CSV (component
/// and manifold columns combined), or any delimited file whose last column
/// holds class tags.
inline Labeling read_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open labels file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_row(line, ','));
  }
  if (rows.empty()) throw std::invalid_argument("labels file is empty: " + path);

  std::size_t first = 0;
  bool is_own_format = false;
  if (!rows[0].empty() && rows[0][0] == "index") {
    is_own_format = rows[0].size() >= 3 && rows[0][1] == "component" && rows[0][2] == "manifold";
    first = 1;
  }

  std::vector<std::string> tags;
  for (std::size_t r = first; r < rows.size(); ++r) {
    if (rows[r].empty()) continue;
    if (is_own_format) {
      if (rows[r].size() < 3) throw std::invalid_argument("short row in labels file: " + path);
      tags.push_back(rows[r][1] + ":" + rows[r][2]);
    } else {
      tags.push_back(trimmed(rows[r].back()));
    }
  }

  std::vector<std::string> sorted = tags;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  Labeling labels(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) {
    labels[i] =
        static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), tags[i]) - sorted.begin());
  }
  return labels;
}

}  // namespace detail

inline int cmd_eval(const std::string& labels_a, const std::string& labels_b,
                    std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::run_command(err, [&]() {
    const Labeling a = detail::read_labels_file(labels_a);
    const Labeling b = detail::read_labels_file(labels_b);
    if (a.size() != b.size()) throw std::invalid_argument("label files have different lengths");
    nlohmann::ordered_json j;
    j["ari"] = ari(a, b);
    j["nmi"] = nmi(a, b);
    out << j.dump() << "\n";
    return 0;
  });
}

struct GenOptions {
  std::string scene;
  int n = 1000;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double extent = 2.0;     // plane/line scenes
  double angle_deg = 90.0; // plane_plane dihedral
  std::string out = "scene.csv";
};

inline SyntheticScene make_scene(const GenOptions& opt) {
  if (opt.scene == "plane") return gen_plane(opt.n, opt.extent, opt.sigma, opt.seed);
  if (opt.scene == "scurve") return gen_scurve(opt.n, opt.sigma, opt.seed);
  if (opt.scene == "line") return gen_line(opt.n, opt.sigma, opt.seed, opt.extent);
  if (opt.scene == "plane_plane") return scene_plane_plane(opt.n, opt.sigma, opt.seed, opt.angle_deg);
  if (opt.scene == "plane_scurve") return scene_plane_scurve(opt.n, opt.sigma, opt.seed);
  if (opt.scene == "scurve_line") return scene_scurve_line(opt.n, opt.sigma, opt.seed);
  if (opt.scene == "quad") return scene_quad(opt.n, opt.sigma, opt.seed);
  throw std::invalid_argument("unknown scene '" + opt.scene +
                              "' (expected plane, scurve, line, plane_plane, plane_scurve, "
                              "scurve_line or quad)");
}

inline int cmd_gen(const GenOptions& opt, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  return detail::run_command(err, [&]() {
    const SyntheticScene scene = make_scene(opt);
    atomic_write(opt.out, scene_csv(scene));
    out << scene.descriptor << " -> " << opt.out << " (" << scene.points.rows() << " points)\n";
    return 0;
  });
}

struct SweepOptions {
  DatasetFile input;
  AcevConfig base;
  std::vector<int> k_grid;
  std::vector<double> alpha_grid;
  std::vector<double> warmup_grid;
  std::vector<double> angle_tol_grid;
  std::string out = "sweep.csv";
};

/// Cartesian sweep over the four tuned parameters. Each row reports the grid
/// point, ARI/NMI against the dataset's truth column (overall and off-mask
/// when a mask is present) and the wall-clock runtime of that run.
inline int cmd_sweep(const SweepOptions& opt, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  return detail::run_command(err, [&]() {
    SweepOptions grid = opt;
    if (grid.k_grid.empty()) grid.k_grid = {opt.base.k};
    if (grid.alpha_grid.empty()) grid.alpha_grid = {opt.base.alpha};
    if (grid.warmup_grid.empty()) grid.warmup_grid = {opt.base.warmup_frac};
    if (grid.angle_tol_grid.empty()) grid.angle_tol_grid = {opt.base.angle_tol};

    const LoadedDataset data = load_dataset(opt.input);
    validate_points(data.points);
    if (!data.labels) {
      throw std::invalid_argument("sweep requires a ground-truth label column (--label-col)");
    }

    std::ostringstream csv;
    csv << "k,alpha,warmup_frac,angle_tol,ari,nmi,ari_off_mask,nmi_off_mask,seconds\n";
    for (int k : grid.k_grid) {
      for (double alpha : grid.alpha_grid) {
        for (double warmup : grid.warmup_grid) {
          for (double angle_tol : grid.angle_tol_grid) {
            AcevConfig cfg = opt.base;
            cfg.k = k;
            cfg.alpha = alpha;
            cfg.warmup_frac = warmup;
            cfg.angle_tol = angle_tol;
            cfg.validate();

            const auto start = std::chrono::steady_clock::now();
            const SegmentationResult result = segment(data.points, cfg);
            const double seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

            const Labeling predicted = result.labeling.flat_labels();
            const MetricPair overall = detail::compute_metrics(*data.labels, predicted);
            csv << k << ',' << format_double(alpha) << ',' << format_double(warmup) << ','
                << format_double(angle_tol) << ',' << format_double(overall.ari) << ','
                << format_double(overall.nmi) << ',';
            if (data.mask) {
              const MetricPair off =
                  detail::compute_metrics_masked(*data.labels, predicted, *data.mask);
              csv << format_double(off.ari) << ',' << format_double(off.nmi);
            } else {
              csv << ',';
            }
            csv << ',' << format_double(seconds) << '\n';
          }
        }
      }
    }

    atomic_write(grid.out, csv.str());
    out << "sweep: " << grid.out << "\n";
    return 0;
  });
}

}  // namespace acev
