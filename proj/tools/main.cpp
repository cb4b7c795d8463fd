// conceptsig: command-line front end for the signature library.
//
// Exit codes: 0 success, 1 failed repro check, 2 malformed input,
// 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conceptsig/algebra.hpp"
#include "conceptsig/error.hpp"
#include "conceptsig/experiments.hpp"
#include "conceptsig/generators.hpp"
#include "conceptsig/hierarchy.hpp"
#include "conceptsig/io.hpp"
#include "conceptsig/projection.hpp"
#include "conceptsig/random_mlp.hpp"
#include "conceptsig/rng.hpp"
#include "conceptsig/signature.hpp"
#include "conceptsig/stream.hpp"

namespace fs = std::filesystem;
using namespace conceptsig;
using nlohmann::json;

namespace {

constexpr int kExitRepro = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

Eigen::VectorXd parse_point(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InputError("--point: not a number '" + cell + "'");
    }
  }
  if (values.empty()) throw InputError("--point: empty");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(6) << v;
  return s.str();
}

// Divides every point by the largest point norm; returns the factor applied.
double rescale_to_unit_ball(PointCloud& cloud) {
  const double r = cloud.points.rowwise().norm().maxCoeff();
  if (r <= 0.0) return 1.0;
  cloud.points /= r;
  return 1.0 / r;
}

struct Options {
  std::uint64_t seed = 0;

  std::string spec, output, input, config, report, dict_dir, sigs_dir, point;
  std::vector<std::string> files;
  int n = 200;
  int degree = 2;
  double epsilon = -1.0;
  bool homogeneous = false;
  bool rescale = false;
  bool use_eps = false;
  int proj_dim = 0;
  int level2_proj = 40;
  std::string source = "T";
  int d = 5;
  int units = 100000;
  int k = 1;
  double delta = 0.05;
  double jl_eps = 0.5;
  double c_jl = 8.0;
  std::string experiment;
  std::string repro_json;
};

int cmd_gen(const Options& o) {
  const ManifoldSpec spec = [&] {
    try {
      return spec_from_json(read_json_file(o.spec));
    } catch (const InputError& e) {
      throw InputError(o.spec + ": " + e.what());
    }
  }();
  const PointCloud cloud = sample(spec, o.n, o.seed);
  if (o.output.empty())
    std::cout << format_csv(cloud);
  else
    write_csv(o.output, cloud);
  return 0;
}

int cmd_fit(const Options& o, const Tolerances& tol) {
  PointCloud cloud = read_csv(o.input);
  double scale = 1.0;
  if (o.rescale) scale = rescale_to_unit_ball(cloud);
  FitConfig cfg;
  cfg.degree = o.degree;
  cfg.epsilon = o.epsilon >= 0.0 ? o.epsilon : tol.epsilon;
  cfg.include_constant = !o.homogeneous;
  cfg.rank = tol.rank;
  if (o.proj_dim > 0) cfg.projection = ProjectionConfig{o.proj_dim, derive_seed(o.seed, 1)};
  const Signature sig = fit(cloud, cfg);
  json j = signature_to_json(sig);
  if (o.rescale) j["input_scale"] = scale;
  if (o.output.empty())
    print_json(j);
  else
    write_json_file(o.output, j);
  std::cerr << "null_rank " << sig.null_rank << ", eps_rank " << sig.eps_rank << ", basis size "
            << sig.feature_dim() << '\n';
  return 0;
}

int cmd_score(const Options& o) {
  const json j = read_json_file(o.files.at(0));
  const Signature sig = read_signature(o.files.at(0));
  const double scale = j.contains("input_scale") ? j.at("input_scale").get<double>() : 1.0;
  if (!o.point.empty()) {
    std::cout << sci(membership_score(sig, parse_point(o.point) * scale, o.use_eps)) << '\n';
    return 0;
  }
  if (o.input.empty()) throw InputError("score: give --point or --input");
  const PointCloud cloud = read_csv(o.input);
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    std::cout << sci(membership_score(sig, cloud.point(i) * scale, o.use_eps)) << '\n';
  return 0;
}

int cmd_intersect(const Options& o, const Tolerances& tol) {
  const Signature a = read_signature(o.files.at(0));
  const Signature b = read_signature(o.files.at(1));
  const Intersection cap = intersect(a, b, tol.intersect);
  if (cap.ill_separated)
    std::cerr << "warning: ill-separated intersection (eigenvalue in (0.2, 0.8))\n";
  json j = signature_to_json(cap.signature);
  j["iterations"] = cap.iterations;
  j["residual"] = cap.residual;
  if (o.output.empty())
    print_json(j);
  else
    write_json_file(o.output, j);
  return 0;
}

int cmd_sim(const Options& o) {
  const Signature a = read_signature(o.files.at(0));
  const Signature b = read_signature(o.files.at(1));
  const Similarity s = similarity(a, b);
  json j = {{"t_overlap", s.t_overlap}, {"f_overlap", s.f_overlap}};
  if (a.null_rank == 1 && b.null_rank == 1)
    j["coefficient_similarity"] = coefficient_similarity(a, b);
  else
    j["coefficient_similarity"] = nullptr;
  print_json(j);
  return 0;
}

int cmd_dict(const Options& o, const Tolerances& tol) {
  std::vector<Signature> sigs;
  for (const auto& f : o.files) sigs.push_back(read_signature(f));
  DictionaryOptions opts;
  opts.intersect = tol.intersect;
  opts.dedup_threshold = tol.dedup;
  opts.subset_tol = tol.subset_tol;
  const DictionaryResult res = discover_dictionary(sigs, opts);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& [a, b] : res.skipped)
    std::cerr << "skipped pair: " << o.files[a] << " x " << o.files[b] << '\n';
  const fs::path dir = o.output.empty() ? fs::path("atoms") : fs::path(o.output);
  fs::create_directories(dir);
  json index = json::array();
  for (std::size_t i = 0; i < res.atoms.size(); ++i) {
    std::ostringstream name;
    name << "atom_" << std::setw(3) << std::setfill('0') << i << ".json";
    write_signature(dir / name.str(), res.atoms[i]);
    index.push_back({{"id", i}, {"file", name.str()}, {"null_rank", res.atoms[i].null_rank}});
  }
  write_json_file(dir / "index.json", index);
  print_json({{"atoms", res.atoms.size()}, {"closure_size", res.closure_size}, {"dir", dir.string()}});
  return 0;
}

Level2Config level2_from(const Options& o) {
  Level2Config cfg;
  cfg.degree = o.degree;
  if (o.epsilon >= 0.0) cfg.epsilon = o.epsilon;
  cfg.projection_dim = o.level2_proj;
  cfg.seed = derive_seed(o.seed, 2);
  cfg.use_eps = o.use_eps;
  if (o.source == "T")
    cfg.source = FlatSource::kNull;
  else if (o.source == "F")
    cfg.source = FlatSource::kComplement;
  else
    throw InputError("--source must be T or F");
  return cfg;
}

int cmd_hier(const Options& o) {
  std::vector<fs::path> files;
  if (!fs::is_directory(o.sigs_dir)) throw InputError(o.sigs_dir + ": not a directory");
  for (const auto& e : fs::directory_iterator(o.sigs_dir))
    if (e.path().extension() == ".json" && e.path().filename() != "index.json")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError(o.sigs_dir + ": no signature files");
  std::vector<Signature> sigs;
  for (const auto& f : files) sigs.push_back(read_signature(f));
  const Level2Config cfg = level2_from(o);
  const Signature level2 = signature_of_signatures(sigs, cfg);
  json j = signature_to_json(level2);
  j["level2"] = {{"source", o.source}, {"use_eps", cfg.use_eps}, {"members", files.size()}};
  if (o.output.empty())
    print_json(j);
  else
    write_json_file(o.output, j);
  return 0;
}

int cmd_hier_score(const Options& o) {
  const json j = read_json_file(o.files.at(0));
  const Signature level2 = read_signature(o.files.at(0));
  const Signature candidate = read_signature(o.files.at(1));
  Level2Config cfg;
  if (j.contains("level2")) {
    const json& l2 = j.at("level2");
    cfg.source = l2.value("source", std::string("T")) == "F" ? FlatSource::kComplement
                                                               : FlatSource::kNull;
    cfg.use_eps = l2.value("use_eps", false);
  }
  if (o.use_eps) cfg.use_eps = true;
  std::cout << sci(level2_score(level2, candidate, cfg)) << '\n';
  return 0;
}

int cmd_stream(const Options& o) {
  StreamConfig cfg;
  if (!o.config.empty()) {
    try {
      cfg = stream_config_from_json(read_json_file(o.config));
    } catch (const InputError& e) {
      throw InputError(o.config + ": " + e.what());
    }
  } else {
    cfg.seed = o.seed;
  }
  const PointCloud cloud = read_csv(o.input);
  StreamArchitecture net(cfg);
  std::ofstream report;
  if (!o.report.empty()) {
    report.open(o.report);
    if (!report) throw InputError(o.report + ": cannot write");
  }
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    for (const auto& r : net.step(cloud.point(i)))
      if (report) report << report_to_json(r).dump() << '\n';
  json summary = json::array();
  for (const auto& layer : net.layers()) {
    summary.push_back({{"layer", layer.index + 1},
                       {"buffer", layer.buffer.size()},
                       {"dictionary", layer.dictionary.size()}});
    if (!o.dict_dir.empty())
      write_dictionary(fs::path(o.dict_dir) / ("layer" + std::to_string(layer.index + 1)),
                       layer.dictionary);
  }
  print_json({{"steps", net.steps()}, {"layers", summary}});
  return 0;
}

int cmd_project(const Options& o) {
  const PointCloud cloud = read_csv(o.input);
  const int out_dim = o.proj_dim > 0 ? o.proj_dim : target_dim(o.k, o.delta, o.jl_eps, o.c_jl);
  const RandomProjection proj(cloud.dim(), out_dim, derive_seed(o.seed, 1));
  const PointCloud img = proj.project(cloud);
  if (o.output.empty())
    std::cout << format_csv(img);
  else
    write_csv(o.output, img);
  std::cerr << "projected " << cloud.dim() << " -> " << out_dim << " (seed "
            << proj.seed() << ")\n";
  return 0;
}

int cmd_mlp_check(const Options& o) {
  const PointCloud cloud = read_csv(o.input);
  if (cloud.dim() != o.d) {
    std::ostringstream msg;
    msg << o.input << ": cloud has dimension " << cloud.dim() << ", --d is " << o.d;
    throw InputError(msg.str());
  }
  const MlpCalibration cal = calibrate(o.d, derive_seed(o.seed, 3));
  RandomMLP net(o.d, o.units, o.seed);
  net.set_calibration(cal);
  const Eigen::MatrixXd m = raw_moment(cloud);
  const Eigen::MatrixXd m2 = m * m;
  auto rel = [](const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
    const double n = truth.norm();
    return n > 0.0 ? (est - truth).norm() / n : (est - truth).norm();
  };
  print_json({{"d", o.d},
              {"units", o.units},
              {"seed", o.seed},
              {"calibration", calibration_to_json(cal)},
              {"moment_error", rel(net.recover_moment(cloud), m)},
              {"moment_squared_error", rel(net.recover_moment_squared(cloud), m2)},
              {"reference_moment_error", rel(net.recover_moment_reference(cloud), m)},
              {"reference_moment_squared_error",
               rel(net.recover_moment_squared_reference(cloud), m2)}});
  return 0;
}

int cmd_repro(const Options& o) {
  std::vector<std::string> ids;
  if (o.experiment == "all")
    ids = experiment_ids();
  else
    ids.push_back(o.experiment);
  bool all_ok = true;
  json results = json::array();
  for (const auto& id : ids) {
    const ExperimentResult r = run_experiment(id, o.seed);
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.id << " - " << r.title << '\n';
    for (const auto& m : r.measurements) {
      std::cout << "  " << (m.ok ? "  " : "! ") << m.name << " = " << m.value;
      if (!m.bound.empty()) std::cout << "  (" << m.bound << ")";
      std::cout << '\n';
    }
    for (const auto& n : r.notes) std::cout << "  note: " << n << '\n';
    all_ok = all_ok && r.passed;
    results.push_back(experiment_to_json(r));
  }
  if (!o.repro_json.empty()) write_json_file(o.repro_json, results);
  return all_ok ? 0 : kExitRepro;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moment-signature toolkit for sampled algebraic concepts"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--seed", o.seed, "Seed threaded to every stochastic step");

  auto* gen = app.add_subcommand("gen", "Sample points from a manifold spec");
  gen->add_option("--spec", o.spec, "Spec JSON")->required();
  gen->add_option("--n", o.n, "Number of points")->check(CLI::PositiveNumber);
  gen->add_option("-o,--output", o.output, "Output CSV (stdout if omitted)");

  auto* fitc = app.add_subcommand("fit", "Fit a signature to a point cloud");
  fitc->add_option("--input", o.input, "Point cloud CSV")->required();
  fitc->add_option("--degree", o.degree, "Feature degree")->check(CLI::PositiveNumber);
  fitc->add_option("--epsilon", o.epsilon, "Threshold for T_eps");
  fitc->add_flag("--homogeneous", o.homogeneous, "Omit the constant monomial");
  fitc->add_flag("--rescale", o.rescale, "Scale inputs into the unit ball");
  fitc->add_option("--proj", o.proj_dim, "Randomly project inputs to this dimension first");
  fitc->add_option("-o,--output", o.output, "Output signature JSON");

  auto* score = app.add_subcommand("score", "Membership score of points");
  score->add_option("signature", o.files, "Signature JSON")->required()->expected(1);
  score->add_option("--point", o.point, "Comma-separated coordinates");
  score->add_option("--input", o.input, "Score every row of a CSV");
  score->add_flag("--eps", o.use_eps, "Use T_eps instead of T");

  auto* inter = app.add_subcommand("intersect", "Intersect two concepts");
  inter->add_option("signatures", o.files, "Two signature JSON files")->required()->expected(2);
  inter->add_option("-o,--output", o.output, "Output signature JSON");

  auto* sim = app.add_subcommand("sim", "Similarity of two concepts");
  sim->add_option("signatures", o.files, "Two signature JSON files")->required()->expected(2);

  auto* dict = app.add_subcommand("dict", "Discover atomic concepts");
  dict->add_option("signatures", o.files, "Signature JSON files")->required()->expected(1, -1);
  dict->add_option("-o,--output", o.output, "Output directory");

  auto* hier = app.add_subcommand("hier", "Fit a level-2 signature over signatures");
  hier->add_option("--sigs", o.sigs_dir, "Directory of signature JSON files")->required();
  hier->add_option("--degree", o.degree, "Level-2 feature degree")->check(CLI::PositiveNumber);
  hier->add_option("--proj", o.level2_proj, "Project flats longer than this");
  hier->add_option("--epsilon", o.epsilon, "Level-2 T_eps threshold");
  hier->add_option("--source", o.source, "Flatten T or F")->check(CLI::IsMember({"T", "F"}));
  hier->add_flag("--eps", o.use_eps, "Score against T_eps by default");
  hier->add_option("-o,--output", o.output, "Output JSON");

  auto* hscore = app.add_subcommand("hier-score", "Score a signature against a level-2 concept");
  hscore->add_option("files", o.files, "Concept JSON and candidate JSON")->required()->expected(2);
  hscore->add_flag("--eps", o.use_eps, "Use T_eps instead of T");

  auto* stream = app.add_subcommand("stream", "Run the layered stream architecture");
  stream->add_option("--config", o.config, "Architecture JSON");
  stream->add_option("--input", o.input, "Point cloud CSV, one step per row")->required();
  stream->add_option("--report", o.report, "Per-step JSONL report");
  stream->add_option("--dict-dir", o.dict_dir, "Write each layer's dictionary here");

  auto* project = app.add_subcommand("project", "Random Gaussian projection of a cloud");
  project->add_option("--input", o.input, "Point cloud CSV")->required();
  project->add_option("--dim", o.proj_dim, "Output dimension (default: from --k/--delta/--eps)");
  project->add_option("--k", o.k, "Manifold dimension");
  project->add_option("--delta", o.delta, "Failure probability");
  project->add_option("--eps", o.jl_eps, "Distortion");
  project->add_option("--c-jl", o.c_jl, "Constant in the dimension formula");
  project->add_option("-o,--output", o.output, "Output CSV");

  auto* mlp = app.add_subcommand("mlp-check", "Moment recovery through a random square network");
  mlp->add_option("--d", o.d, "Input dimension")->check(CLI::PositiveNumber);
  mlp->add_option("--units", o.units, "Hidden units")->check(CLI::PositiveNumber);
  mlp->add_option("--input", o.input, "Point cloud CSV")->required();

  auto* repro = app.add_subcommand("repro", "Run an acceptance experiment");
  repro->add_option("experiment", o.experiment, "Experiment id or 'all'")->required();
  repro->add_option("--json", o.repro_json, "Write results as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    const Tolerances tol = tolerances_from_env();
    if (*gen) return cmd_gen(o);
    if (*fitc) return cmd_fit(o, tol);
    if (*score) return cmd_score(o);
    if (*inter) return cmd_intersect(o, tol);
    if (*sim) return cmd_sim(o);
    if (*dict) return cmd_dict(o, tol);
    if (*hier) return cmd_hier(o);
    if (*hscore) return cmd_hier_score(o);
    if (*stream) return cmd_stream(o);
    if (*project) return cmd_project(o);
    if (*mlp) return cmd_mlp_check(o);
    if (*repro) return cmd_repro(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
