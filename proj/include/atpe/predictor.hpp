#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "atpe/gbdt.hpp"
#include "atpe/parallel.hpp"
#include "atpe/params.hpp"
#include "atpe/session.hpp"
#include "atpe/statistics.hpp"
#include "atpe/surrogate.hpp"

// Cascaded prediction of AtpeParams from the statistics vector. Field j is
// predicted from the statistics followed by fields 0..j-1 (class indices
// for categoricals), so its input width is kFeatureCount + j.

namespace atpe::predictor {

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::size_t kMinTrainingExamples = 50;

struct ModelLoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One ensemble for a real field; one one-vs-rest ensemble per class for a
/// categorical field.
struct FieldModel {
  std::vector<gbdt::Ensemble> ensembles;

  friend bool operator==(const FieldModel&, const FieldModel&) = default;
};

inline std::size_t input_width(std::size_t field) { return stats::kFeatureCount + field; }

class ParamModel final : public ParamController {
 public:
  /// The static-defaults model: no trained artifacts required.
  static ParamModel fallback() { return ParamModel(); }

  ParamModel(std::vector<FieldModel> fields, Variant trained_for)
      : fields_(std::move(fields)), trained_for_(trained_for) {
    if (fields_.size() != kFieldCount) throw std::invalid_argument("param model: wrong field count");
  }

  bool is_fallback() const noexcept { return fields_.empty(); }
  Variant trained_for() const noexcept { return trained_for_; }
  const std::vector<FieldModel>& fields() const noexcept { return fields_; }

  AtpeParams choose(const stats::StatisticsVector& s, const VariantTraits& t, RngStream& rng) const override {
    return predict(s, t, rng);
  }

  /// Categorical fields are sampled in proportion to their one-vs-rest
  /// probabilities (restricted to the variant's filter menu); real fields
  /// are clipped to their ranges.
  AtpeParams predict(const stats::StatisticsVector& s, const VariantTraits& t, RngStream& rng) const {
    AtpeParams p = default_params(t);
    if (is_fallback()) return p;
    std::vector<double> input(s.begin(), s.end());
    input.reserve(stats::kFeatureCount + kFieldCount);
    for (std::size_t j = 0; j < kFieldCount; ++j) {
      const auto& spec = kParamFields[j];
      const auto& fm = fields_[j];
      double value = 0.0;
      if (spec.kind == FieldKind::real) {
        value = fm.ensembles[0].raw(input);
      } else {
        std::vector<double> prob(spec.classes, 0.0);
        double total = 0.0;
        for (std::size_t k = 0; k < spec.classes; ++k) {
          if (j == 0 && !t.filter_menu[k]) continue;
          prob[k] = gbdt::sigmoid(fm.ensembles[k].raw(input));
          total += prob[k];
        }
        double u = rng.uniform() * total;
        std::size_t chosen = spec.classes;
        for (std::size_t k = 0; k < spec.classes; ++k) {
          if (prob[k] <= 0.0) continue;
          chosen = k;
          if (u < prob[k]) break;
          u -= prob[k];
        }
        value = static_cast<double>(chosen == spec.classes ? 0 : chosen);
      }
      set_field(p, j, value);
      input.push_back(get_field(p, j));
    }
    return p;
  }

  friend bool operator==(const ParamModel& a, const ParamModel& b) {
    return a.fields_ == b.fields_ && a.trained_for_ == b.trained_for_;
  }

 private:
  ParamModel() = default;

  std::vector<FieldModel> fields_;
  Variant trained_for_ = Variant::atpe;
};

inline AtpeParams predict(const stats::StatisticsVector& s, const ParamModel& model, const VariantTraits& t,
                          RngStream& rng) {
  return model.predict(s, t, rng);
}

// ---------------------------------------------------------------------------
// Training data

struct TrainingExample {
  stats::StatisticsVector features{};
  AtpeParams target;
  double quality = 0.0;
};

struct TrainingSetConfig {
  std::size_t runs = 8;
  std::size_t steps = 50;
  Variant variant = Variant::atpe;
  std::size_t threads = 1;
  /// Every run of a function shares one seed (used to check tie-breaking).
  bool identical_run_seeds = false;
};

inline SearchSpace unit_space(std::size_t dims) {
  std::vector<HyperparameterSpec> specs;
  for (std::size_t d = 0; d < dims; ++d) specs.push_back(HyperparameterSpec::continuous("h" + std::to_string(d), 0, 1));
  return SearchSpace(std::move(specs));
}

struct RunRecord {
  double final_loss = 0.0;
  std::vector<TrainingExample> pairs;
};

/// One exploratory run on a surrogate with uniformly random parameters.
inline RunRecord exploratory_run(const surrogate::SurrogateFunction& f, Variant variant, std::size_t steps,
                                 std::uint64_t seed) {
  static const auto controller = std::make_shared<RandomController>();
  OptimizerSession session(unit_space(f.dims), variant, seed, controller);
  RunRecord rec;
  std::vector<double> point(f.dims);
  for (std::size_t s = 0; s < steps; ++s) {
    auto config = session.ask();
    if (session.last_decision().adaptive)
      rec.pairs.push_back({session.last_decision().statistics, session.last_decision().params, 0.0});
    for (std::size_t d = 0; d < f.dims; ++d) point[d] = std::get<double>(config[d]);
    session.tell(config, surrogate::evaluate_surrogate(f, point));
  }
  rec.final_loss = session.incumbent()->loss;
  return rec;
}

/// Runs R exploratory optimisations per function and keeps the
/// (statistics, parameters) pairs of the best quarter of runs by final
/// incumbent; quality = 1 - rank / (R - 1).
inline std::vector<TrainingExample> build_training_set(const std::vector<surrogate::SurrogateFunction>& corpus,
                                                       const TrainingSetConfig& cfg, std::uint64_t seed) {
  if (corpus.empty()) throw std::invalid_argument("training set: empty corpus");
  if (cfg.runs < 4) throw std::invalid_argument("training set: need at least 4 runs per function");
  if (!traits(cfg.variant).adaptive) throw std::invalid_argument("training set: variant must be adaptive");

  std::vector<std::vector<TrainingExample>> per_function(corpus.size());
  parallel_for(corpus.size(), cfg.threads, [&](std::size_t fi) {
    const auto fseed = hash_combine(seed, fi);
    std::vector<RunRecord> runs;
    for (std::size_t r = 0; r < cfg.runs; ++r)
      runs.push_back(exploratory_run(corpus[fi], cfg.variant, cfg.steps,
                                     cfg.identical_run_seeds ? fseed : hash_combine(fseed, r)));
    std::vector<std::size_t> order(runs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return runs[a].final_loss < runs[b].final_loss; });
    const std::size_t keep = std::max<std::size_t>(1, cfg.runs / 4);
    for (std::size_t rank = 0; rank < keep; ++rank) {
      const double quality = 1.0 - static_cast<double>(rank) / static_cast<double>(cfg.runs - 1);
      for (auto ex : runs[order[rank]].pairs) {
        ex.quality = quality;
        per_function[fi].push_back(std::move(ex));
      }
    }
  });
  std::vector<TrainingExample> out;
  for (auto& v : per_function) std::move(v.begin(), v.end(), std::back_inserter(out));
  return out;
}

// ---------------------------------------------------------------------------
// Training

/// Fits one ensemble set per field, teacher-forcing earlier fields from
/// the targets. Deterministic for a given example order.
inline ParamModel train(const std::vector<TrainingExample>& examples, Variant trained_for = Variant::atpe,
                        const gbdt::Options& opt = {}, std::size_t threads = 1) {
  if (examples.size() < kMinTrainingExamples)
    throw TrainingError("train: need at least " + std::to_string(kMinTrainingExamples) +
                        " examples; use the fallback model instead");
  const std::size_t n = examples.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = examples[i].quality;

  std::vector<FieldModel> fields(kFieldCount);
  parallel_for(kFieldCount, threads, [&](std::size_t j) {
    gbdt::Dataset data(n, input_width(j));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < stats::kFeatureCount; ++c) data.at(i, c) = examples[i].features[c];
      for (std::size_t k = 0; k < j; ++k) data.at(i, stats::kFeatureCount + k) = get_field(examples[i].target, k);
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = get_field(examples[i].target, j);
    const auto& spec = kParamFields[j];
    if (spec.kind == FieldKind::real) {
      fields[j].ensembles.push_back(gbdt::fit_regression(data, y, w, opt));
    } else {
      for (std::size_t k = 0; k < spec.classes; ++k) {
        std::vector<double> yk(n);
        for (std::size_t i = 0; i < n; ++i) yk[i] = y[i] == static_cast<double>(k) ? 1.0 : 0.0;
        fields[j].ensembles.push_back(gbdt::fit_logistic(data, yk, w, opt));
      }
    }
  });
  return ParamModel(std::move(fields), trained_for);
}

// ---------------------------------------------------------------------------
// Persistence

inline std::string checksum_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline nlohmann::json model_to_json(const ParamModel& model) {
  nlohmann::json fields = nlohmann::json::array();
  for (std::size_t j = 0; j < model.fields().size(); ++j) {
    nlohmann::json ensembles = nlohmann::json::array();
    for (const auto& e : model.fields()[j].ensembles) {
      nlohmann::json trees = nlohmann::json::array();
      for (const auto& t : e.trees) {
        nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                       left = nlohmann::json::array(), right = nlohmann::json::array(),
                       value = nlohmann::json::array();
        for (const auto& nd : t.nodes) {
          feature.push_back(nd.feature);
          threshold.push_back(nd.threshold);
          left.push_back(nd.left);
          right.push_back(nd.right);
          value.push_back(nd.value);
        }
        trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
                         {"value", value}});
      }
      ensembles.push_back({{"base", e.base}, {"trees", trees}});
    }
    fields.push_back({{"name", kParamFields[j].name}, {"ensembles", ensembles}});
  }
  return {{"format", "atpe-param-model"},
          {"version", kModelFormatVersion},
          {"layout_checksum", checksum_hex(layout_checksum())},
          {"trained_for", to_string(model.trained_for())},
          {"fallback", model.is_fallback()},
          {"fields", fields}};
}

inline ParamModel model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "atpe-param-model") throw ModelLoadError("model: not a parameter model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ModelLoadError("model: version mismatch (file " + std::to_string(version) + ", expected " +
                           std::to_string(kModelFormatVersion) + ")");
    if (doc.at("layout_checksum").get<std::string>() != checksum_hex(layout_checksum()))
      throw ModelLoadError("model: feature/cascade layout checksum mismatch");
    if (doc.at("fallback").get<bool>()) return ParamModel::fallback();
    const auto variant = variant_from_string(doc.at("trained_for").get<std::string>());
    const auto& fj = doc.at("fields");
    if (fj.size() != kFieldCount) throw ModelLoadError("model: wrong number of fields");
    std::vector<FieldModel> fields(kFieldCount);
    for (std::size_t j = 0; j < kFieldCount; ++j) {
      const auto& spec = kParamFields[j];
      if (fj[j].at("name") != spec.name) throw ModelLoadError("model: field order mismatch");
      const auto& ej = fj[j].at("ensembles");
      const std::size_t expected = spec.kind == FieldKind::real ? 1 : spec.classes;
      if (ej.size() != expected) throw ModelLoadError("model: wrong ensemble count for " + std::string(spec.name));
      for (const auto& e : ej) {
        gbdt::Ensemble ens;
        ens.base = e.at("base").get<double>();
        for (const auto& t : e.at("trees")) {
          const auto feature = t.at("feature").get<std::vector<int>>();
          const auto threshold = t.at("threshold").get<std::vector<double>>();
          const auto left = t.at("left").get<std::vector<int>>();
          const auto right = t.at("right").get<std::vector<int>>();
          const auto value = t.at("value").get<std::vector<double>>();
          const std::size_t m = feature.size();
          if (m == 0 || threshold.size() != m || left.size() != m || right.size() != m || value.size() != m)
            throw ModelLoadError("model: malformed tree");
          gbdt::Tree tree;
          for (std::size_t i = 0; i < m; ++i) {
            gbdt::Node nd{feature[i], threshold[i], left[i], right[i], value[i]};
            if (nd.feature >= 0) {
              const auto ii = static_cast<int>(i);
              if (static_cast<std::size_t>(nd.feature) >= input_width(j) || nd.left <= ii || nd.right <= ii ||
                  static_cast<std::size_t>(nd.left) >= m || static_cast<std::size_t>(nd.right) >= m)
                throw ModelLoadError("model: malformed tree node");
            }
            tree.nodes.push_back(nd);
          }
          ens.trees.push_back(std::move(tree));
        }
        fields[j].ensembles.push_back(std::move(ens));
      }
    }
    return ParamModel(std::move(fields), variant);
  } catch (const ModelLoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelLoadError(std::string("model: corrupt file: ") + e.what());
  }
}

inline void save_model(const ParamModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out << model_to_json(model).dump() << '\n';
  if (!out) throw std::runtime_error("failed writing model file " + path.string());
}

inline ParamModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelLoadError("cannot open model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const std::exception& e) {
    throw ModelLoadError(std::string("model: corrupt file: ") + e.what());
  }
  return model_from_json(doc);
}

/// Feature manifest: one name per line in input order, then the cascade.
inline std::string feature_manifest() {
  std::string out = "# statistics features (" + std::to_string(stats::kFeatureCount) + ")\n";
  for (const auto& n : stats::feature_names()) out += n + "\n";
  out += "# cascade order (" + std::to_string(kFieldCount) + ")\n";
  for (const auto& f : kParamFields) out += std::string(f.name) + "\n";
  out += "# layout checksum " + checksum_hex(layout_checksum()) + "\n";
  return out;
}

}  // namespace atpe::predictor
