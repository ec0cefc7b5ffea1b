#include "klish/serialize.hpp"

#include <fstream>

#include "klish/error.hpp"

namespace klish {

namespace {

void check_classifier_shape(const LinearClassifier& c) {
  if (c.weights.rows() == 0) throw InvalidArgument("classifier has no rows");
  if (c.weights.rows() != c.biases.size())
    throw InvalidArgument("classifier has " + std::to_string(c.weights.rows()) + " weight rows but " +
                          std::to_string(c.biases.size()) + " biases");
}

}  // namespace

void to_json(Json& j, const LinearClassifier& c) {
  Json rows = Json::array();
  for (Eigen::Index k = 0; k < c.weights.rows(); ++k) {
    Json row = Json::array();
    for (Eigen::Index d = 0; d < c.weights.cols(); ++d) row.push_back(c.weights(k, d));
    rows.push_back(std::move(row));
  }
  Json biases = Json::array();
  for (Eigen::Index k = 0; k < c.biases.size(); ++k) biases.push_back(c.biases(k));
  j = Json{{"weights", std::move(rows)}, {"biases", std::move(biases)}};
}

void from_json(const Json& j, LinearClassifier& c) {
  const auto& rows = j.at("weights");
  const auto& biases = j.at("biases");
  if (!rows.is_array() || !biases.is_array()) throw InvalidArgument("classifier fields must be arrays");
  const auto k = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = k > 0 ? static_cast<Eigen::Index>(rows.front().size()) : 0;
  c.weights.resize(k, d);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != d) throw InvalidArgument("ragged weight rows");
    for (Eigen::Index col = 0; col < d; ++col) c.weights(r, col) = row[static_cast<std::size_t>(col)].get<double>();
  }
  c.biases.resize(static_cast<Eigen::Index>(biases.size()));
  for (std::size_t r = 0; r < biases.size(); ++r) c.biases(static_cast<Eigen::Index>(r)) = biases[r].get<double>();
  check_classifier_shape(c);
}

void to_json(Json& j, const ClusterAssignment& a) { j = Json{{"k", a.k}, {"labels", a.labels}}; }

void from_json(const Json& j, ClusterAssignment& a) {
  a.k = j.at("k").get<int>();
  a.labels = j.at("labels").get<std::vector<int>>();
  require_valid(a);
}

void to_json(Json& j, const FilterReport& r) {
  j = Json{{"pre_filter_k", r.pre_filter_k}, {"iou_logits", r.iou_logits}, {"mean", r.mean},
           {"std", r.std},                   {"kept", r.kept},             {"dropped", r.dropped}};
}

void from_json(const Json& j, FilterReport& r) {
  r.pre_filter_k = j.at("pre_filter_k").get<int>();
  r.iou_logits = j.at("iou_logits").get<std::vector<double>>();
  r.mean = j.at("mean").get<double>();
  r.std = j.at("std").get<double>();
  r.kept = j.at("kept").get<std::vector<int>>();
  r.dropped = j.at("dropped").get<std::vector<int>>();
}

void to_json(Json& j, const MergeRecord& r) {
  j = Json{{"step", r.step},
           {"cluster_count", r.cluster_count},
           {"merged_from", r.merged_from},
           {"merged_into", r.merged_into},
           {"min_iou", r.min_iou},
           {"ecos", r.ecos},
           {"per_cluster_iou", r.per_cluster_iou},
           {"classifier", r.classifier}};
}

void from_json(const Json& j, MergeRecord& r) {
  r.step = j.at("step").get<int>();
  r.cluster_count = j.at("cluster_count").get<int>();
  r.merged_from = j.at("merged_from").get<int>();
  r.merged_into = j.at("merged_into").get<int>();
  r.min_iou = j.at("min_iou").get<double>();
  r.ecos = j.at("ecos").get<double>();
  r.per_cluster_iou = j.at("per_cluster_iou").get<std::vector<double>>();
  r.classifier = j.at("classifier").get<LinearClassifier>();
  if (r.classifier.clusters() != r.cluster_count)
    throw InvalidArgument("merge record classifier rows != cluster_count");
}

void to_json(Json& j, const MergeHistory& h) {
  j = Json{{"initial_k", h.initial_k}, {"filter_report", h.filter_report}, {"records", h.records}};
}

void from_json(const Json& j, MergeHistory& h) {
  h.initial_k = j.at("initial_k").get<int>();
  h.filter_report = j.at("filter_report").get<FilterReport>();
  h.records = j.at("records").get<std::vector<MergeRecord>>();
}

void to_json(Json& j, const RunConfig& c) {
  j = Json{{"k0", c.k0},
           {"lambda1", c.lambda1},
           {"svm_tol", c.svm_tol},
           {"svm_max_iter", c.svm_max_iter},
           {"kmeans_tol", c.kmeans_tol},
           {"kmeans_max_iter", c.kmeans_max_iter},
           {"stop_iou", c.stop_iou ? Json(*c.stop_iou) : Json(nullptr)},
           {"seed", c.seed},
           {"threads", c.threads},
           {"deterministic", c.deterministic},
           {"svm_init", c.svm_init == SvmInit::kZeros ? "zeros" : "centroids"}};
}

void from_json(const Json& j, RunConfig& c) {
  c = RunConfig{};
  c.k0 = j.at("k0").get<int>();
  c.lambda1 = j.at("lambda1").get<double>();
  c.svm_tol = j.at("svm_tol").get<double>();
  c.svm_max_iter = j.at("svm_max_iter").get<int>();
  c.kmeans_tol = j.at("kmeans_tol").get<double>();
  c.kmeans_max_iter = j.at("kmeans_max_iter").get<int>();
  if (const auto& s = j.at("stop_iou"); !s.is_null()) c.stop_iou = s.get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threads = j.at("threads").get<int>();
  c.deterministic = j.at("deterministic").get<bool>();
  if (j.contains("svm_init")) {
    const auto init = j.at("svm_init").get<std::string>();
    if (init == "zeros") c.svm_init = SvmInit::kZeros;
    else if (init == "centroids") c.svm_init = SvmInit::kCentroids;
    else throw InvalidArgument("unknown svm_init '" + init + "'");
  }
  validate_config(c);
}

void write_json_file(const std::filesystem::path& path, const Json& j, int indent) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(indent) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace klish
