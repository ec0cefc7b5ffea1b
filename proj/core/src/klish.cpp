#include "klish/klish.hpp"

#include <algorithm>
#include <cmath>

#include "klish/error.hpp"

namespace klish {

namespace {

LinearClassifier centroid_classifier(const Matrix& centroids) {
  // Nearest-centroid rule written as a linear classifier.
  LinearClassifier c{centroids, Vector(centroids.rows())};
  for (Eigen::Index k = 0; k < centroids.rows(); ++k) c.biases(k) = -0.5 * centroids.row(k).squaredNorm();
  return c;
}

int argmin_lowest(const std::vector<double>& v) {
  return static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

double inverse_sigmoid(double m) {
  const double p = std::clamp(m, kLogitEpsilon, 1.0 - kLogitEpsilon);
  return std::log(p / (1.0 - p));
}

FilterResult filter_initial(const FeatureDataset& d, const Matrix& centroids0, const ClusterAssignment& a0,
                            const RunConfig& cfg) {
  const int k0 = static_cast<int>(centroids0.rows());
  if (k0 != a0.k) throw InvalidArgument("filter_initial: centroid count != assignment k");
  FilterResult out;
  out.report.pre_filter_k = k0;
  if (k0 == 1) {
    out.centroids = centroids0;
    out.assignment = a0;
    out.report.kept = {0};
    out.report.iou_logits = {inverse_sigmoid(1.0)};
    out.report.mean = out.report.iou_logits.front();
    return out;
  }

  out.svm = train_svm(LinearClassifier::zeros(k0, d.dim()), d, a0, TrainOptions::from(cfg));
  const auto ious = iou_per_cluster(out.svm->first, d, a0, cfg.threads);
  auto& r = out.report;
  r.iou_logits.reserve(ious.size());
  for (double v : ious) r.iou_logits.push_back(inverse_sigmoid(v));
  // Shifted by the first logit so identical values give exactly zero spread.
  const double shift = r.iou_logits.front();
  double offset = 0.0;
  for (double v : r.iou_logits) offset += v - shift;
  r.mean = shift + offset / k0;
  double var = 0.0;
  for (double v : r.iou_logits) var += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(var / k0);

  // Identical logits give a zero spread; the strict threshold would then drop everything.
  const bool degenerate = r.std <= 1e-12 * std::max(1.0, std::fabs(r.mean));
  const double threshold = r.mean - r.std;
  for (int i = 0; i < k0; ++i) {
    if (degenerate || r.iou_logits[static_cast<std::size_t>(i)] > threshold) r.kept.push_back(i);
    else r.dropped.push_back(i);
  }
  if (r.kept.empty()) throw NumericError("filter_initial: every cluster was dropped");

  Matrix kept(static_cast<Eigen::Index>(r.kept.size()), centroids0.cols());
  for (std::size_t i = 0; i < r.kept.size(); ++i) kept.row(static_cast<Eigen::Index>(i)) = centroids0.row(r.kept[i]);
  auto km = kmeans_restart_with(d, kept, KMeansOptions::from(cfg));
  out.centroids = std::move(km.centroids);
  out.assignment = std::move(km.assignment);
  return out;
}

MergeHistory klish_run(const FeatureDataset& d, const RunConfig& cfg, const MergeObserver& observer) {
  validate_config(cfg);
  require_valid(d);
  if (cfg.k0 > d.size()) throw InvalidArgument("k0 > N");

  const auto kopts = KMeansOptions::from(cfg);
  const auto topts = TrainOptions::from(cfg);
  auto initial = kmeans(d, cfg.k0, cfg.seed, kopts);
  auto filtered = filter_initial(d, initial.centroids, initial.assignment, cfg);

  MergeHistory history;
  history.filter_report = std::move(filtered.report);
  ClusterAssignment labels = std::move(filtered.assignment);
  history.initial_k = labels.k;

  LinearClassifier classifier = cfg.svm_init == SvmInit::kCentroids ? centroid_classifier(filtered.centroids)
                                                                    : LinearClassifier::zeros(labels.k, d.dim());
  // When filtering changed nothing, the first training problem is the one the
  // filter already solved.
  std::optional<std::pair<LinearClassifier, TrainDiagnostics>> reuse;
  if (cfg.svm_init == SvmInit::kZeros && filtered.svm && labels == initial.assignment) reuse = std::move(filtered.svm);

  for (int step = 1; labels.k >= 2; ++step) {
    auto [trained, diag] = reuse ? std::move(*reuse) : train_svm(classifier, d, labels, topts);
    reuse.reset();
    const Matrix scores = decision_scores(trained, d.data, cfg.threads);
    MergeRecord rec;
    rec.step = step;
    rec.cluster_count = labels.k;
    rec.per_cluster_iou = iou_from_scores(scores, labels);
    const int p = argmin_lowest(rec.per_cluster_iou);
    rec.merged_from = p;
    rec.min_iou = rec.per_cluster_iou[static_cast<std::size_t>(p)];

    const auto similarity = ecos_row(confidence_from_scores(scores), p);
    int q = -1;
    for (int j = 0; j < labels.k; ++j) {
      if (j == p) continue;
      if (q < 0 || similarity[static_cast<std::size_t>(j)] > similarity[static_cast<std::size_t>(q)]) q = j;
    }
    rec.merged_into = q;
    rec.ecos = similarity[static_cast<std::size_t>(q)];
    rec.classifier = trained;
    history.records.push_back(rec);
    if (observer) observer(history.records.back(), diag);

    if (cfg.stop_iou && rec.min_iou >= *cfg.stop_iou) break;

    for (int& l : labels.labels) {
      if (l == p) l = q;
      if (l > p) --l;
    }
    --labels.k;
    classifier = trained.without_row(p);
  }
  return history;
}

const MergeRecord& find_record(const MergeHistory& h, const SelectCriterion& criterion) {
  if (const auto* by_k = std::get_if<SelectByCount>(&criterion)) {
    for (const auto& r : h.records)
      if (r.cluster_count == by_k->k) return r;
    int lo = h.records.empty() ? 0 : h.records.back().cluster_count;
    int hi = h.records.empty() ? 0 : h.records.front().cluster_count;
    throw InvalidArgument("k=" + std::to_string(by_k->k) + " not in history range [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
  }
  const double threshold = std::get<SelectByIou>(criterion).threshold;
  for (const auto& r : h.records)
    if (r.min_iou >= threshold) return r;
  throw InvalidArgument("threshold never reached");
}

Selection select_model(const MergeHistory& h, const Matrix& x, const SelectCriterion& criterion) {
  const auto& rec = find_record(h, criterion);
  Selection s;
  s.classifier = rec.classifier;
  s.step = rec.step;
  if (x.rows() > 0) s.assignment = rec.classifier.predict(x);
  else s.assignment.k = rec.classifier.clusters();
  return s;
}

}  // namespace klish
