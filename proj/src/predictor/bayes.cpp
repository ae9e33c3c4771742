#include <algorithm>
#include <cmath>
#include <limits>

#include "buyflow/common/error.hpp"
#include "buyflow/common/stats.hpp"
#include "buyflow/predictor.hpp"

namespace buyflow::predict {

std::vector<double> fit_quantile_edges(std::span<const double> values, int k) {
  if (values.empty()) throw Error("cannot fit bins on an empty column");
  if (k < 1) throw Error("bins per feature must be positive");
  std::vector<double> sorted(values.begin(), values.end());
  std::ranges::sort(sorted);
  std::vector<double> edges;
  for (int i = 1; i < k; ++i) {
    const double q = stats::quantile_sorted(sorted, static_cast<double>(i) / k);
    if (q > sorted.front() && (edges.empty() || q > edges.back())) edges.push_back(q);
  }
  return edges;
}

int FeatureBins::bin_count() const {
  return 1 + static_cast<int>(kind == FeatureKind::Continuous ? edges.size() + 1 : values.size());
}

int FeatureBins::bin_of(const FeatureValue& v) const {
  if (!v) return 0;
  if (kind == FeatureKind::Categorical) {
    auto it = std::ranges::lower_bound(values, *v);
    if (it == values.end() || *it != *v) return 0;
    return 1 + static_cast<int>(it - values.begin());
  }
  // Half-open bins [e_{i-1}, e_i).
  return 1 + static_cast<int>(std::ranges::upper_bound(edges, *v) - edges.begin());
}

FeatureBins fit_bins(FeatureKind kind, std::span<const double> values, int k) {
  FeatureBins b;
  b.kind = kind;
  if (kind == FeatureKind::Categorical) {
    b.values.assign(values.begin(), values.end());
    std::ranges::sort(b.values);
    b.values.erase(std::unique(b.values.begin(), b.values.end()), b.values.end());
  } else if (!values.empty()) {
    b.edges = fit_quantile_edges(values, k);
  }
  return b;
}

Posterior NaiveBayes::posterior(std::span<const int> bins) const {
  if (bins.size() != cardinality.size()) throw Error("feature count does not match the model");
  std::vector<double> logp(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) {
    double s = std::log(priors[static_cast<std::size_t>(c)]);
    for (std::size_t f = 0; f < bins.size(); ++f) {
      if (bins[f] < 0 || bins[f] >= cardinality[f]) throw Error("bin index out of range");
      s += log_cpt[f][static_cast<std::size_t>(c * cardinality[f] + bins[f])];
    }
    logp[static_cast<std::size_t>(c)] = s;
  }
  Posterior p;
  p.predicted = static_cast<int>(std::ranges::max_element(logp) - logp.begin());
  const double top = logp[static_cast<std::size_t>(p.predicted)];
  double z = 0.0;
  p.probabilities.resize(logp.size());
  for (std::size_t c = 0; c < logp.size(); ++c) z += p.probabilities[c] = std::exp(logp[c] - top);
  for (auto& x : p.probabilities) x /= z;
  return p;
}

namespace {

NaiveBayes prepare(const DiscreteMatrix& x, std::span<const int> labels, int n_classes, double alpha) {
  if (labels.size() != x.rows) throw Error("label count does not match the matrix");
  if (x.rows == 0) throw Error("cannot train on an empty instance set");
  if (!(alpha > 0.0)) throw Error("smoothing constant must be positive");
  NaiveBayes nb;
  nb.alpha = alpha;
  nb.n_classes = n_classes;
  nb.cardinality = x.cardinality;
  nb.class_counts.assign(static_cast<std::size_t>(n_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw Error("label out of range");
    ++nb.class_counts[static_cast<std::size_t>(y)];
  }
  const double n = static_cast<double>(x.rows);
  for (int c = 0; c < n_classes; ++c) {
    nb.priors.push_back((static_cast<double>(nb.class_counts[static_cast<std::size_t>(c)]) + alpha) /
                        (n + alpha * n_classes));
  }
  nb.cpt.resize(x.cols);
  nb.log_cpt.resize(x.cols);
  return nb;
}

void fit_feature(NaiveBayes& nb, const DiscreteMatrix& x, std::span<const int> labels, std::size_t f) {
  const int v = nb.cardinality[f];
  std::vector<double> counts(static_cast<std::size_t>(nb.n_classes * v), 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    counts[static_cast<std::size_t>(labels[r] * v + x.at(r, f))] += 1.0;
  }
  auto& cpt = nb.cpt[f];
  auto& log_cpt = nb.log_cpt[f];
  cpt.resize(counts.size());
  log_cpt.resize(counts.size());
  for (int c = 0; c < nb.n_classes; ++c) {
    const double denom = static_cast<double>(nb.class_counts[static_cast<std::size_t>(c)]) + nb.alpha * v;
    for (int b = 0; b < v; ++b) {
      const auto i = static_cast<std::size_t>(c * v + b);
      cpt[i] = (counts[i] + nb.alpha) / denom;
      log_cpt[i] = std::log(cpt[i]);
    }
  }
}

}  // namespace

NaiveBayes fit_naive_bayes_serial(const DiscreteMatrix& x, std::span<const int> labels, int n_classes,
                                  double alpha) {
  auto nb = prepare(x, labels, n_classes, alpha);
  for (std::size_t f = 0; f < x.cols; ++f) fit_feature(nb, x, labels, f);
  return nb;
}

NaiveBayes fit_naive_bayes(const DiscreteMatrix& x, std::span<const int> labels, int n_classes, double alpha) {
  auto nb = prepare(x, labels, n_classes, alpha);
  const auto cols = static_cast<std::int64_t>(x.cols);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t f = 0; f < cols; ++f) fit_feature(nb, x, labels, static_cast<std::size_t>(f));
  return nb;
}

std::vector<int> NBModel::discretize(const FeatureVector& fv) const {
  std::vector<int> out(bins.size());
  for (std::size_t f = 0; f < bins.size(); ++f) out[f] = bins[f].bin_of(fv[f]);
  return out;
}

Posterior NBModel::predict(const FeatureVector& fv) const { return classifier.posterior(discretize(fv)); }

DiscreteMatrix discretize_all(const NBModel& model, std::span<const Instance> instances) {
  DiscreteMatrix m;
  m.rows = instances.size();
  m.cols = model.bins.size();
  for (const auto& b : model.bins) m.cardinality.push_back(b.bin_count());
  m.cells.resize(m.rows * m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t f = 0; f < m.cols; ++f) m.cells[r * m.cols + f] = model.bins[f].bin_of(instances[r].features[f]);
  }
  return m;
}

NBModel train(std::span<const Instance> instances, Target target, const TrainOptions& options) {
  if (instances.empty()) throw Error("no training instances");
  NBModel model;
  model.target = target;
  model.features = feature_specs(target);
  std::vector<double> column;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    column.clear();
    for (const auto& inst : instances) {
      if (inst.features[f]) column.push_back(*inst.features[f]);
    }
    model.bins.push_back(fit_bins(model.features[f].kind, column, options.bins_per_feature));
  }
  std::vector<int> labels;
  labels.reserve(instances.size());
  for (const auto& inst : instances) labels.push_back(inst.label);
  model.classifier = fit_naive_bayes(discretize_all(model, instances), labels, kClassCount, options.alpha);
  return model;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
constexpr const char* kModelFormat = "buyflow-naive-bayes/1";
}

nlohmann::ordered_json NBModel::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["target"] = std::string(target_name(target));
  j["alpha"] = classifier.alpha;
  auto& classes = j["classes"] = nlohmann::ordered_json::array();
  for (int c = 0; c < classifier.n_classes; ++c) classes.push_back(class_label(target, c));
  j["class_counts"] = classifier.class_counts;
  j["priors"] = classifier.priors;
  auto& fs = j["features"] = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < features.size(); ++f) {
    nlohmann::ordered_json e;
    e["name"] = features[f].name;
    e["kind"] = features[f].kind == FeatureKind::Categorical ? "categorical" : "continuous";
    if (features[f].kind == FeatureKind::Categorical) {
      e["values"] = bins[f].values;
    } else {
      e["edges"] = bins[f].edges;
    }
    auto& cpt = e["cpt"] = nlohmann::ordered_json::array();
    const int v = classifier.cardinality[f];
    for (int c = 0; c < classifier.n_classes; ++c) {
      auto row = nlohmann::ordered_json::array();
      for (int b = 0; b < v; ++b) row.push_back(classifier.conditional(f, c, b));
      cpt.push_back(std::move(row));
    }
    fs.push_back(std::move(e));
  }
  return j;
}

NBModel NBModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw Error("unsupported model format");
    NBModel m;
    m.target = parse_target(j.at("target").get<std::string>());
    auto& nb = m.classifier;
    nb.alpha = j.at("alpha").get<double>();
    nb.n_classes = static_cast<int>(j.at("classes").size());
    nb.class_counts = j.at("class_counts").get<std::vector<std::size_t>>();
    nb.priors = j.at("priors").get<std::vector<double>>();
    if (nb.priors.size() != static_cast<std::size_t>(nb.n_classes) || nb.class_counts.size() != nb.priors.size()) {
      throw Error("prior count does not match class count");
    }
    const auto& expected = feature_specs(m.target);
    const auto& fs = j.at("features");
    if (fs.size() != expected.size()) throw Error("model has " + std::to_string(fs.size()) + " features");
    for (std::size_t f = 0; f < fs.size(); ++f) {
      const auto& e = fs[f];
      FeatureSpec spec{e.at("name").get<std::string>(), e.at("kind").get<std::string>() == "categorical"
                                                            ? FeatureKind::Categorical
                                                            : FeatureKind::Continuous};
      if (spec.name != expected[f].name || spec.kind != expected[f].kind) {
        throw Error("unexpected feature '" + spec.name + "' at position " + std::to_string(f));
      }
      FeatureBins b;
      b.kind = spec.kind;
      if (spec.kind == FeatureKind::Categorical) {
        b.values = e.at("values").get<std::vector<double>>();
      } else {
        b.edges = e.at("edges").get<std::vector<double>>();
      }
      const int v = b.bin_count();
      const auto& cpt = e.at("cpt");
      if (cpt.size() != static_cast<std::size_t>(nb.n_classes)) throw Error("bad table for " + spec.name);
      std::vector<double> flat, logs;
      for (const auto& row : cpt) {
        if (row.size() != static_cast<std::size_t>(v)) throw Error("bad table width for " + spec.name);
        for (const auto& x : row) {
          flat.push_back(x.get<double>());
          logs.push_back(std::log(flat.back()));
        }
      }
      m.features.push_back(std::move(spec));
      m.bins.push_back(std::move(b));
      nb.cardinality.push_back(v);
      nb.cpt.push_back(std::move(flat));
      nb.log_cpt.push_back(std::move(logs));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model: ") + e.what());
  }
}

}  // namespace buyflow::predict
