// acev command-line tool: two-stage segmentation of point clouds into
// intersecting manifolds, plus scene generation, component counting,
// clustering metrics and parameter sweeps.
#include "acev/cli.hpp"
#include "acev/version.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace {

struct DatasetFlags {
  std::string path;
  std::string delimiter = ",";
  bool has_header = false;
  std::string label_column;
  std::string mask_column;

  acev::DatasetFile to_file() const {
    acev::DatasetFile file;
    file.path = path;
    if (delimiter.empty()) throw CLI::ValidationError("--delimiter must be one character");
    file.delimiter = delimiter[0];
    file.has_header = has_header;
    if (!label_column.empty()) file.label_column = label_column;
    if (!mask_column.empty()) file.mask_column = mask_column;
    return file;
  }
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags* flags) {
  cmd->add_option("input", flags->path, "Input CSV dataset")->required();
  cmd->add_option("--delimiter", flags->delimiter, "Cell delimiter (default ',')");
  cmd->add_flag("--has-header", flags->has_header, "First row is a header");
  cmd->add_option("--label-col", flags->label_column, "Ground-truth column (name or index)");
  cmd->add_option("--mask-col", flags->mask_column, "Intersection mask column (name or index)");
}

void add_config_flags(CLI::App* cmd, acev::AcevConfig* cfg, std::string* graph_mode) {
  cmd->add_option("--k", cfg->k, "Neighbourhood size");
  cmd->add_option("--alpha", cfg->alpha, "EMA smoothing factor in (0,1)");
  cmd->add_option("--angle-tol", cfg->angle_tol, "Inclusion tolerance in radians");
  cmd->add_option("--var-thresh", cfg->var_thresh, "Variance fraction counting a direction as non-zero");
  cmd->add_option("--gap-thresh", cfg->gap_thresh,
                  "Relative eigengap below which a direction is not angle-gated");
  cmd->add_option("--dist-tol", cfg->dist_tol,
                  "Candidate residual from the parent tangent frame, in noise sigmas");
  cmd->add_option("--subspace-tol", cfg->subspace_tol,
                  "Max principal angle between child and parent tangent spans (radians)");
  cmd->add_option("--zero-tol", cfg->zero_tol, "Relative zero tolerance for Laplacian eigenvalues");
  cmd->add_option("--warmup-frac", cfg->warmup_frac, "Fraction of points included unconditionally");
  cmd->add_option("--min-neigh", cfg->min_neigh, "Filtration floor on neighbourhood size");
  cmd->add_option("--seed", cfg->seed, "Seed (generators only)");
  cmd->add_option("--graph-mode", *graph_mode, "k-NN symmetrization: union or mutual")
      ->check(CLI::IsMember({"union", "mutual"}));
  cmd->add_flag("--components-by-graph", cfg->components_by_graph,
                "Split components by graph connectivity instead of clustering");
}

acev::GraphSymmetrization parse_graph_mode(const std::string& name) {
  return name == "mutual" ? acev::GraphSymmetrization::kMutual : acev::GraphSymmetrization::kUnion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ACEV: unsupervised segmentation of intersecting manifolds"};
  app.set_version_flag("--version", std::string("acev ") + acev::kVersion);
  app.set_config("--config", "", "Read defaults from a key=value config file");
  app.require_subcommand(1);

  // segment
  acev::SegmentOptions seg;
  DatasetFlags seg_input;
  std::string seg_graph_mode = "union";
  auto* seg_cmd = app.add_subcommand("segment", "Run the full two-stage segmentation");
  add_dataset_flags(seg_cmd, &seg_input);
  add_config_flags(seg_cmd, &seg.config, &seg_graph_mode);
  seg_cmd->add_option("--out-labels", seg.out_labels, "Labels CSV output path");
  seg_cmd->add_option("--out-report", seg.out_report, "JSON report output path");

  // components
  acev::ComponentsOptions comp;
  DatasetFlags comp_input;
  std::string comp_graph_mode = "union";
  auto* comp_cmd = app.add_subcommand("components", "Count and label non-intersecting components");
  add_dataset_flags(comp_cmd, &comp_input);
  comp_cmd->add_option("--k", comp.k, "Neighbourhood size");
  comp_cmd->add_option("--zero-tol", comp.zero_tol, "Relative zero tolerance for Laplacian eigenvalues");
  comp_cmd->add_option("--graph-mode", comp_graph_mode, "k-NN symmetrization: union or mutual")
      ->check(CLI::IsMember({"union", "mutual"}));
  comp_cmd->add_flag("--components-by-graph", comp.by_graph,
                     "Label by graph connectivity instead of clustering");
  comp_cmd->add_option("--out-labels", comp.out_labels, "Component labels CSV output path");

  // eval
  std::string eval_a, eval_b;
  auto* eval_cmd = app.add_subcommand("eval", "ARI and NMI between two labelings");
  eval_cmd->add_option("labels_a", eval_a, "First labels CSV")->required();
  eval_cmd->add_option("labels_b", eval_b, "Second labels CSV")->required();

  // gen
  acev::GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic scene CSV");
  gen_cmd->add_option("scene", gen.scene,
                      "Scene: plane, scurve, line, plane_plane, plane_scurve, scurve_line, quad")
      ->required();
  gen_cmd->add_option("--n", gen.n, "Number of points");
  gen_cmd->add_option("--sigma", gen.sigma, "Gaussian noise standard deviation");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--extent", gen.extent, "Plane side / line length");
  gen_cmd->add_option("--angle", gen.angle_deg, "Dihedral angle for plane_plane (degrees)");
  gen_cmd->add_option("--out", gen.out, "Output CSV path");

  // sweep
  acev::SweepOptions sweep;
  DatasetFlags sweep_input;
  std::string sweep_graph_mode = "union";
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid sweep over k / alpha / warmup / angle-tol");
  add_dataset_flags(sweep_cmd, &sweep_input);
  add_config_flags(sweep_cmd, &sweep.base, &sweep_graph_mode);
  sweep_cmd->add_option("--k-grid", sweep.k_grid, "k values to sweep")->delimiter(',');
  sweep_cmd->add_option("--alpha-grid", sweep.alpha_grid, "alpha values to sweep")->delimiter(',');
  sweep_cmd->add_option("--warmup-grid", sweep.warmup_grid, "warmup fractions to sweep")->delimiter(',');
  sweep_cmd->add_option("--angle-tol-grid", sweep.angle_tol_grid, "angle tolerances to sweep")
      ->delimiter(',');
  sweep_cmd->add_option("--out", sweep.out, "Sweep CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit cleanly; any parse problem is a user error
  }

  if (seg_cmd->parsed()) {
    seg.input = seg_input.to_file();
    seg.config.graph_mode = parse_graph_mode(seg_graph_mode);
    return acev::cmd_segment(seg);
  }
  if (comp_cmd->parsed()) {
    comp.input = comp_input.to_file();
    comp.graph_mode = parse_graph_mode(comp_graph_mode);
    return acev::cmd_components(comp);
  }
  if (eval_cmd->parsed()) return acev::cmd_eval(eval_a, eval_b);
  if (gen_cmd->parsed()) return acev::cmd_gen(gen);
  if (sweep_cmd->parsed()) {
    sweep.input = sweep_input.to_file();
    sweep.base.graph_mode = parse_graph_mode(sweep_graph_mode);
    return acev::cmd_sweep(sweep);
  }
  return 1;
}
