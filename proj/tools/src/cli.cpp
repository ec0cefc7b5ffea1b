#include "klish/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "klish/baselines.hpp"
#include "klish/error.hpp"
#include "klish/io.hpp"
#include "klish/klish.hpp"
#include "klish/metrics.hpp"
#include "klish/render.hpp"
#include "klish/rng.hpp"
#include "klish/serialize.hpp"
#include "klish/synth.hpp"

namespace klish::cli {

namespace fs = std::filesystem;

namespace {

struct Log {
  std::ostream& err;
  bool quiet = false;

  void operator()(const std::string& msg) const {
    if (!quiet) err << "klish: " << msg << '\n';
  }
};

struct InputFlags {
  std::string path;
  std::string format;
  std::vector<std::size_t> shape;
  bool labels_last = false;
};

void add_input(CLI::App* cmd, InputFlags& f, const std::string& flag, bool required) {
  auto* opt = cmd->add_option(flag, f.path, "Feature file (.npy, .csv or raw float32)");
  if (required) opt->required();
  cmd->add_option("--format", f.format, "Override the format guessed from the extension")
      ->check(CLI::IsMember({"npy", "csv", "raw-f32"}));
  cmd->add_option("--shape", f.shape, "Shape of a raw-f32 file, e.g. --shape 1000 64")->expected(2, 4);
  cmd->add_flag("--labels-last", f.labels_last, "CSV: last column holds integer labels");
}

io::ArrayFile array_file(const InputFlags& f) {
  io::ArrayFile a = io::array_file(f.path);
  if (f.format == "npy") a.format = io::Format::kNpy;
  if (f.format == "csv") a.format = io::Format::kCsv;
  if (f.format == "raw-f32") a.format = io::Format::kRawF32;
  a.shape = f.shape;
  a.labels_last = f.labels_last;
  return a;
}

Json counts_json(const ClusterAssignment& a) {
  Json j = Json::array();
  for (auto c : cluster_census(a)) j.push_back(c);
  return j;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

/// Cluster maps for a pixel grid, or a scatter plot for 2-D points.
std::vector<fs::path> render_any(const FeatureDataset& d, const ClusterAssignment& a, const fs::path& dir,
                                 const std::string& prefix, const Log& log) {
  ensure_dir(dir);
  const auto palette = io::Palette::for_clusters(a.k);
  if (d.spatial) return io::render_cluster_map(a, *d.spatial, palette, dir, prefix);
  if (d.dim() == 2) {
    const fs::path path = dir / (prefix + ".ppm");
    io::write_ppm(path, io::render_scatter(d.data, a, palette));
    return {path};
  }
  log("no pixel grid and D != 2; nothing rendered for " + prefix);
  return {};
}

Json paths_json(const std::vector<fs::path>& paths) {
  Json j = Json::array();
  for (const auto& p : paths) j.push_back(p.string());
  return j;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string kind = "fig2";
  int n = 500;
  int k = 3;
  int d = 2;
  double sep = 10.0;
  double noise = 0.05;
  double gap = 1.5;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  bool render = false;
};

Json cmd_synth(const SynthArgs& s, const Log& log) {
  const fs::path dir = s.out;
  ensure_dir(dir);
  Json report;
  report["command"] = "synth";
  report["kind"] = s.kind;
  report["seed"] = s.seed;

  synth::Labeled set;
  if (s.kind == "fig2") {
    auto toy = synth::gen_fig2_toy(s.n, s.seed, s.threads);
    report["certificate"] = toy.certificate;
    report["certified"] = toy.certified;
    if (!toy.certified) log("warning: separability certificate failed for this seed");
    set = std::move(toy.set);
  } else if (s.kind == "blobs") {
    set = synth::gen_blobs(s.k, s.n, s.d, s.sep, s.seed);
  } else if (s.kind == "moons") {
    set = synth::gen_two_moons(s.n, s.noise, s.gap, s.seed);
  } else {
    auto st = synth::gen_straddle(s.seed, s.n);
    const fs::path centroids = dir / "centroids.npy";
    FeatureDataset c{st.centroids, std::nullopt};
    io::save_features(centroids, c, npy::Dtype::kF8);
    report["centroids"] = centroids.string();
    report["pinned"] = st.pinned;
    set = std::move(st.set);
  }

  const fs::path features = dir / "features.npy", labels = dir / "labels.npy";
  io::save_features(features, set.data, npy::Dtype::kF8);
  io::save_labels(labels, set.labels);
  report["n"] = set.data.size();
  report["d"] = set.data.dim();
  report["k"] = set.labels.k;
  report["features"] = features.string();
  report["labels"] = labels.string();
  if (s.render) report["render"] = paths_json(render_any(set.data, set.labels, dir, "groundtruth", log));
  log("wrote " + std::to_string(set.data.size()) + " samples to " + dir.string());
  return report;
}

// ---------------------------------------------------------------- cluster

struct ClusterArgs {
  InputFlags input;
  RunConfig cfg;
  std::optional<double> stop_iou;
  std::string svm_init = "zeros";
  std::string out;
  std::string render_dir;
};

Json cmd_cluster(ClusterArgs& c, const Log& log) {
  auto loaded = io::load_features(array_file(c.input));
  const auto& d = loaded.dataset;
  c.cfg.stop_iou = c.stop_iou;
  c.cfg.svm_init = c.svm_init == "centroids" ? SvmInit::kCentroids : SvmInit::kZeros;
  log("clustering N=" + std::to_string(d.size()) + " D=" + std::to_string(d.dim()) +
      " with k0=" + std::to_string(c.cfg.k0));

  const auto history = klish_run(d, c.cfg, [&](const MergeRecord& r, const TrainDiagnostics& diag) {
    log("step " + std::to_string(r.step) + ": K=" + std::to_string(r.cluster_count) +
        " min IoU=" + std::to_string(r.min_iou) + " merge " + std::to_string(r.merged_from) + " -> " +
        std::to_string(r.merged_into) + " (" + std::to_string(diag.iterations) + " L-BFGS iterations" +
        (diag.converged ? "" : ", not converged") + ")");
  });

  ensure_parent(c.out);
  Json hj = history;
  write_json_file(c.out, hj);

  Json report;
  report["command"] = "cluster";
  report["history"] = c.out;
  report["initial_k"] = history.initial_k;
  report["kept"] = history.filter_report.kept;
  report["dropped"] = history.filter_report.dropped;
  report["records"] = history.records.size();
  Json counts = Json::array(), ious = Json::array();
  for (const auto& r : history.records) {
    counts.push_back(r.cluster_count);
    ious.push_back(r.min_iou);
  }
  report["cluster_counts"] = counts;
  report["min_iou"] = ious;

  if (!c.render_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& r : history.records) {
      const auto a = r.classifier.predict(d.data);
      auto written = render_any(d, a, c.render_dir, "k" + std::to_string(r.cluster_count), log);
      files.insert(files.end(), written.begin(), written.end());
    }
    report["render"] = paths_json(files);
  }
  return report;
}

// ---------------------------------------------------------------- select

struct SelectArgs {
  std::string history;
  std::optional<int> k;
  std::optional<double> stop_iou;
  std::string out;
  InputFlags input;
  std::string labels_out;
};

Json cmd_select(const SelectArgs& s, const Log& log) {
  MergeHistory h = read_json_file(s.history).get<MergeHistory>();
  SelectCriterion criterion = s.k ? SelectCriterion{SelectByCount{*s.k}} : SelectCriterion{SelectByIou{*s.stop_iou}};
  const MergeRecord& rec = find_record(h, criterion);
  ensure_parent(s.out);
  io::save_classifier(s.out, rec.classifier);

  Json report;
  report["command"] = "select";
  report["step"] = rec.step;
  report["k"] = rec.cluster_count;
  report["min_iou"] = rec.min_iou;
  report["classifier"] = s.out;
  if (!s.input.path.empty()) {
    auto loaded = io::load_features(array_file(s.input));
    const auto sel = select_model(h, loaded.dataset.data, criterion);
    const fs::path labels = s.labels_out.empty() ? fs::path(s.out).replace_extension(".labels.npy") : fs::path(s.labels_out);
    ensure_parent(labels);
    io::save_labels(labels, sel.assignment, loaded.dataset.spatial);
    report["labels"] = labels.string();
    report["counts"] = counts_json(sel.assignment);
  }
  log("selected step " + std::to_string(rec.step) + " with K=" + std::to_string(rec.cluster_count));
  return report;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string classifier;
  InputFlags input;
  std::string out;
};

Json cmd_predict(const PredictArgs& p, const Log& log) {
  const auto c = io::load_classifier(p.classifier);
  auto loaded = io::load_features(array_file(p.input));
  if (loaded.dataset.dim() != c.dim())
    throw InvalidArgument("classifier has D=" + std::to_string(c.dim()) + " but features have D=" +
                          std::to_string(loaded.dataset.dim()));
  const auto a = c.predict(loaded.dataset.data);
  ensure_parent(p.out);
  io::save_labels(p.out, a, loaded.dataset.spatial);
  log("labeled " + std::to_string(a.size()) + " samples");
  Json report;
  report["command"] = "predict";
  report["n"] = a.size();
  report["k"] = a.k;
  report["labels"] = p.out;
  report["counts"] = counts_json(a);
  return report;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string gt;
  std::string pred;
  bool exhaustive = false;
  std::string out;
};

Json cmd_eval(const EvalArgs& e, const Log& log) {
  const auto gt = io::load_labels(io::array_file(e.gt)).assignment;
  const auto pred = io::load_labels(io::array_file(e.pred)).assignment;
  if (gt.size() != pred.size())
    throw InvalidArgument("gt has " + std::to_string(gt.size()) + " labels but pred has " + std::to_string(pred.size()));
  if (gt.k != pred.k)
    log("warning: K=" + std::to_string(pred.k) + " clusters vs M=" + std::to_string(gt.k) +
        " classes; MIoU is only comparable between runs with the same K");
  const auto t = metrics::contingency(pred, gt);
  const auto m = e.exhaustive ? metrics::miou_exhaustive(t) : metrics::miou_greedy(t);

  Json report;
  report["ami"] = metrics::ami(t);
  report["ari"] = metrics::ari(t);
  report["miou"] = m.miou;
  report["match_vector"] = m.match;
  report["per_class_iou"] = metrics::per_class_iou(m.match, t);
  report["j_trace"] = m.j_trace;
  report["k"] = pred.k;
  report["m"] = gt.k;
  if (!e.out.empty()) {
    ensure_parent(e.out);
    write_json_file(e.out, report, 2);
  }
  return report;
}

// ---------------------------------------------------------------- baseline

struct BaselineArgs {
  std::string method = "kmeans";
  InputFlags input;
  int k = 0;
  int k0 = 50;
  std::uint64_t seed = 0;
  int threads = 0;
  std::size_t ahc_cap = 20000;
  std::size_t ahc_train = 0;
  double lambda1 = 5000.0;
  std::string out;
};

Json cmd_baseline(const BaselineArgs& b, const Log& log) {
  auto loaded = io::load_features(array_file(b.input));
  const auto& d = loaded.dataset;
  Json report;
  report["command"] = "baseline";
  report["method"] = b.method;
  ClusterAssignment a;

  if (b.method == "kmeans") {
    KMeansOptions opts;
    opts.threads = b.threads;
    auto res = kmeans(d, b.k, b.seed, opts);
    report["iterations"] = res.iterations;
    report["wcss"] = res.wcss_trace.empty() ? 0.0 : res.wcss_trace.back();
    a = std::move(res.assignment);
  } else if (b.method == "kasp") {
    KMeansOptions opts;
    opts.threads = b.threads;
    auto res = kasp(d, b.k, b.k0, b.seed, opts);
    report["k0"] = b.k0;
    report["sigma"] = res.sigma;
    a = std::move(res.assignment);
  } else {
    const Linkage linkage = parse_linkage(b.method.substr(4));
    AhcOptions opts;
    opts.max_samples = b.ahc_cap;
    opts.threads = b.threads;
    const auto n = static_cast<std::size_t>(d.size());
    const std::size_t train_n = b.ahc_train == 0 ? n : std::min(b.ahc_train, n);
    if (train_n == n) {
      a = ahc(d, b.k, linkage, opts);
    } else {
      // Seeded subset for the agglomeration, the rest labeled by a linear predictor.
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      Rng rng(b.seed);
      for (std::size_t i = 0; i < train_n; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
      idx.resize(train_n);
      std::sort(idx.begin(), idx.end());
      FeatureDataset train{Matrix(static_cast<Eigen::Index>(train_n), d.dim()), std::nullopt};
      for (std::size_t i = 0; i < train_n; ++i)
        train.data.row(static_cast<Eigen::Index>(i)) = d.data.row(static_cast<Eigen::Index>(idx[i]));
      log("AHC on " + std::to_string(train_n) + " of " + std::to_string(n) + " samples");
      const auto train_labels = ahc(train, b.k, linkage, opts);
      TrainOptions topts;
      topts.lambda1 = b.lambda1;
      topts.threads = b.threads;
      a = ahc_predictor(train, train_labels, topts).predict(d.data);
      a.k = b.k;
    }
    report["train_samples"] = train_n;
  }

  ensure_parent(b.out);
  io::save_labels(b.out, a, d.spatial);
  report["k"] = a.k;
  report["labels"] = b.out;
  report["counts"] = counts_json(a);
  return report;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string labels;
  InputFlags features;
  std::string out;
  std::string prefix = "clusters";
};

Json cmd_render(const RenderArgs& r, const Log& log) {
  auto lf = io::load_labels(io::array_file(r.labels));
  FeatureDataset d;
  if (!r.features.path.empty()) {
    d = io::load_features(array_file(r.features)).dataset;
    if (static_cast<std::size_t>(d.size()) != lf.assignment.size())
      throw InvalidArgument("features and labels differ in N");
  }
  if (lf.spatial) d.spatial = lf.spatial;
  if (!d.spatial && d.dim() != 2)
    throw InvalidArgument("render needs (B,H,W) labels, spatial features, or 2-D features");
  Json report;
  report["command"] = "render";
  report["files"] = paths_json(render_any(d, lf.assignment, r.out, r.prefix, log));
  return report;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"KLiSH: clustering by merging K-means clusters according to linear separability", "klish"};
  app.set_version_flag("--version", "klish 0.1.0");
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages on stderr");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--kind", synth_args.kind, "fig2, blobs, moons or straddle")
      ->check(CLI::IsMember({"fig2", "blobs", "moons", "straddle"}))
      ->capture_default_str();
  synth->add_option("-n,--n", synth_args.n, "Samples per class (per lobe for straddle)")->capture_default_str();
  synth->add_option("--k", synth_args.k, "blobs: number of blobs")->capture_default_str();
  synth->add_option("--d", synth_args.d, "blobs: dimension")->capture_default_str();
  synth->add_option("--sep", synth_args.sep, "blobs: minimum center distance in units of sigma")->capture_default_str();
  synth->add_option("--noise", synth_args.noise, "moons: noise standard deviation")->capture_default_str();
  synth->add_option("--gap", synth_args.gap, "moons: vertical offset of the second moon")->capture_default_str();
  synth->add_option("--seed", synth_args.seed)->envname("KLISH_SEED")->capture_default_str();
  synth->add_option("--threads", synth_args.threads)->envname("KLISH_THREADS");
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_flag("--render", synth_args.render, "Also write a scatter plot (2-D data)");

  ClusterArgs cluster_args;
  auto* cluster = app.add_subcommand("cluster", "Run KLiSH and write the merge history");
  add_input(cluster, cluster_args.input, "--input", true);
  auto& cfg = cluster_args.cfg;
  cluster->add_option("--k0", cfg.k0, "Initial K-means cluster count")->capture_default_str();
  cluster->add_option("--lambda1", cfg.lambda1, "Data-term weight of the SVM objective")->capture_default_str();
  cluster->add_option("--svm-tol", cfg.svm_tol)->capture_default_str();
  cluster->add_option("--svm-max-iter", cfg.svm_max_iter)->capture_default_str();
  cluster->add_option("--kmeans-tol", cfg.kmeans_tol)->capture_default_str();
  cluster->add_option("--kmeans-max-iter", cfg.kmeans_max_iter)->capture_default_str();
  cluster->add_option("--stop-iou", cluster_args.stop_iou, "Stop once the minimum IoU reaches this value");
  cluster->add_option("--svm-init", cluster_args.svm_init, "zeros or centroids")
      ->check(CLI::IsMember({"zeros", "centroids"}))
      ->capture_default_str();
  cluster->add_option("--seed", cfg.seed)->envname("KLISH_SEED")->capture_default_str();
  cluster->add_option("--threads", cfg.threads, "Worker threads, 0 = all cores")->envname("KLISH_THREADS");
  cluster->add_flag("--deterministic,!--no-deterministic", cfg.deterministic,
                    "Fixed reduction order (results independent of --threads)");
  cluster->add_option("--out", cluster_args.out, "MergeHistory JSON path")->required();
  cluster->add_option("--render-dir", cluster_args.render_dir, "Write a cluster map for every K");

  SelectArgs select_args;
  auto* select = app.add_subcommand("select", "Pick a classifier from a merge history");
  select->add_option("--history", select_args.history)->required();
  auto* sel_k = select->add_option("--k", select_args.k, "Cluster count to select");
  auto* sel_iou = select->add_option("--stop-iou", select_args.stop_iou, "First step whose min IoU reaches this");
  sel_k->excludes(sel_iou);
  select->add_option("--out", select_args.out, "Classifier JSON path")->required();
  add_input(select, select_args.input, "--input", false);
  select->add_option("--labels-out", select_args.labels_out, "Labels for --input (default: next to --out)");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Label features with a classifier");
  predict->add_option("--classifier", predict_args.classifier)->required();
  add_input(predict, predict_args.input, "--input", true);
  predict->add_option("--out", predict_args.out, "Labels NPY path")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Compare predicted labels with groundtruth");
  eval->add_option("--gt", eval_args.gt)->required();
  eval->add_option("--pred", eval_args.pred)->required();
  eval->add_flag("--exhaustive", eval_args.exhaustive, "Exact MIoU by enumeration (small K and M only)");
  eval->add_option("--out", eval_args.out, "Also write the report here");

  BaselineArgs baseline_args;
  auto* baseline = app.add_subcommand("baseline", "Run a comparison clusterer");
  baseline->add_option("--method", baseline_args.method)
      ->check(CLI::IsMember({"kmeans", "ahc-ward", "ahc-arccos", "kasp"}))
      ->capture_default_str();
  add_input(baseline, baseline_args.input, "--input", true);
  baseline->add_option("--k", baseline_args.k)->required();
  baseline->add_option("--k0", baseline_args.k0, "kasp: intermediate K-means count")->capture_default_str();
  baseline->add_option("--seed", baseline_args.seed)->envname("KLISH_SEED")->capture_default_str();
  baseline->add_option("--threads", baseline_args.threads)->envname("KLISH_THREADS");
  baseline->add_option("--ahc-cap", baseline_args.ahc_cap, "Largest N accepted by AHC")->capture_default_str();
  baseline->add_option("--ahc-train", baseline_args.ahc_train,
                       "AHC on this many random samples, the rest labeled by a softmax classifier");
  baseline->add_option("--lambda1", baseline_args.lambda1, "Softmax predictor data weight")->capture_default_str();
  baseline->add_option("--out", baseline_args.out, "Labels NPY path")->required();

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "Draw cluster maps (pixel grid) or a scatter plot (2-D)");
  render->add_option("--labels", render_args.labels)->required();
  add_input(render, render_args.features, "--features", false);
  render->add_option("--out", render_args.out, "Output directory")->required();
  render->add_option("--prefix", render_args.prefix)->capture_default_str();

  std::vector<const char*> argv{"klish"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (*select && !select_args.k && !select_args.stop_iou) {
    err << "klish select: one of --k or --stop-iou is required\n";
    return kUsage;
  }

  const Log log{err, quiet};
  try {
    Json report;
    if (*synth) report = cmd_synth(synth_args, log);
    else if (*cluster) report = cmd_cluster(cluster_args, log);
    else if (*select) report = cmd_select(select_args, log);
    else if (*predict) report = cmd_predict(predict_args, log);
    else if (*eval) report = cmd_eval(eval_args, log);
    else if (*baseline) report = cmd_baseline(baseline_args, log);
    else report = cmd_render(render_args, log);
    out << report.dump() << '\n';
    return kOk;
  } catch (const NumericError& e) {
    err << "klish: numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    err << "klish: " << e.what() << '\n';
    return kIo;
  } catch (const nlohmann::json::exception& e) {
    err << "klish: malformed JSON: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "klish: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace klish::cli
