#include "pnd/model_io.hpp"

#include <istream>
#include <iterator>
#include <ostream>

#include <nlohmann/json.hpp>

namespace pnd {

namespace {

using json = nlohmann::ordered_json;

template <class T, std::size_t N>
std::array<T, N> to_array(const json& j, const char* key) {
    auto v = j.at(key).get<std::vector<T>>();
    if (v.size() != N) throw ModelError(std::string("field '") + key + "' has wrong length");
    std::array<T, N> a{};
    std::copy(v.begin(), v.end(), a.begin());
    return a;
}

json forest_body(const Forest& f) {
    json j;
    j["kind"] = "random_forest";
    j["format_version"] = kModelFormatVersion;
    j["feature_names"] = feature_names();
    const auto& c = f.config;
    j["config"] = {{"n_true_per_tree", c.n_true_per_tree},
                   {"n_false_per_tree", c.n_false_per_tree},
                   {"n_trees", c.n_trees},
                   {"mtry", c.mtry},
                   {"min_leaf", c.min_leaf},
                   {"max_depth", c.max_depth ? json(*c.max_depth) : json()},
                   {"seed", c.seed}};
    j["imputation_values"] = f.imputation_values;
    j["impurity_decrease_sums"] = f.impurity_decrease_sums;
    json trees = json::array();
    for (const auto& t : f.trees) {
        trees.push_back({{"feature", t.feature},
                         {"threshold", t.threshold},
                         {"left", t.left},
                         {"right", t.right},
                         {"n_true", t.n_true},
                         {"n_false", t.n_false}});
    }
    j["trees"] = std::move(trees);
    return j;
}

json glm_body(const GlmModel& m) {
    json j;
    j["kind"] = "lasso_logit";
    j["format_version"] = kModelFormatVersion;
    j["feature_names"] = feature_names();
    j["config"] = {{"lambda", m.config.lambda},
                   {"tolerance", m.config.tolerance},
                   {"max_iterations", m.config.max_iterations},
                   {"seed", m.config.seed}};
    j["imputation_values"] = m.imputation_values;
    j["intercept"] = m.intercept;
    j["coefficients"] = m.coefficients;
    j["std_intercept"] = m.std_intercept;
    j["std_coefficients"] = m.std_coefficients;
    j["means"] = m.means;
    j["scales"] = m.scales;
    j["active_set"] = m.active_set;
    j["iterations"] = m.iterations;
    return j;
}

Forest forest_from(const json& j) {
    Forest f;
    const auto& c = j.at("config");
    f.config.n_true_per_tree = c.at("n_true_per_tree").get<std::size_t>();
    f.config.n_false_per_tree = c.at("n_false_per_tree").get<std::size_t>();
    f.config.n_trees = c.at("n_trees").get<std::size_t>();
    f.config.mtry = c.at("mtry").get<std::size_t>();
    f.config.min_leaf = c.at("min_leaf").get<std::size_t>();
    if (!c.at("max_depth").is_null()) f.config.max_depth = c.at("max_depth").get<int>();
    f.config.seed = c.at("seed").get<std::uint64_t>();
    f.imputation_values = to_array<double, kFeatureCount>(j, "imputation_values");
    f.impurity_decrease_sums = to_array<double, kFeatureCount>(j, "impurity_decrease_sums");
    for (const auto& t : j.at("trees")) {
        DecisionTree tree;
        tree.feature = t.at("feature").get<std::vector<std::int32_t>>();
        tree.threshold = t.at("threshold").get<std::vector<double>>();
        tree.left = t.at("left").get<std::vector<std::int32_t>>();
        tree.right = t.at("right").get<std::vector<std::int32_t>>();
        tree.n_true = t.at("n_true").get<std::vector<double>>();
        tree.n_false = t.at("n_false").get<std::vector<double>>();
        std::size_t n = tree.feature.size();
        if (n == 0 || tree.threshold.size() != n || tree.left.size() != n ||
            tree.right.size() != n || tree.n_true.size() != n || tree.n_false.size() != n)
            throw ModelError("malformed tree node arrays");
        for (std::size_t k = 0; k < n; ++k) {
            if (tree.feature[k] < 0) continue;
            auto in_range = [n, k](std::int32_t c) {
                return c > static_cast<std::int32_t>(k) && static_cast<std::size_t>(c) < n;
            };
            if (tree.feature[k] >= static_cast<std::int32_t>(kFeatureCount) ||
                !in_range(tree.left[k]) || !in_range(tree.right[k]))
                throw ModelError("malformed tree node " + std::to_string(k));
        }
        f.trees.push_back(std::move(tree));
    }
    if (f.trees.size() != f.config.n_trees) throw ModelError("tree count does not match config");
    return f;
}

GlmModel glm_from(const json& j) {
    GlmModel m;
    const auto& c = j.at("config");
    m.config.lambda = c.at("lambda").get<double>();
    m.config.tolerance = c.at("tolerance").get<double>();
    m.config.max_iterations = c.at("max_iterations").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.imputation_values = to_array<double, kFeatureCount>(j, "imputation_values");
    m.intercept = j.at("intercept").get<double>();
    m.coefficients = to_array<double, kFeatureCount>(j, "coefficients");
    m.std_intercept = j.at("std_intercept").get<double>();
    m.std_coefficients = to_array<double, kFeatureCount>(j, "std_coefficients");
    m.means = to_array<double, kFeatureCount>(j, "means");
    m.scales = to_array<double, kFeatureCount>(j, "scales");
    m.active_set = j.at("active_set").get<std::vector<std::size_t>>();
    m.iterations = j.at("iterations").get<int>();
    return m;
}

}  // namespace

std::string serialize_model(const Model& model) {
    json body = std::visit(
        [](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Forest>)
                return forest_body(m);
            else
                return glm_body(m);
        },
        model);
    std::string payload = body.dump();
    body["checksum"] = hex64(fnv1a64(payload));
    return body.dump() + "\n";
}

Model deserialize_model(const std::string& text) {
    try {
        json j = json::parse(text);
        if (!j.is_object()) throw ModelError("model file is not a JSON object");
        if (j.value("format_version", -1) != kModelFormatVersion)
            throw ModelError("unsupported model format version");
        auto stored = j.at("checksum").get<std::string>();
        j.erase("checksum");
        if (hex64(fnv1a64(j.dump())) != stored) throw ModelError("model checksum mismatch");
        auto names = j.at("feature_names").get<std::vector<std::string>>();
        if (names.size() != kFeatureCount ||
            !std::equal(names.begin(), names.end(), feature_names().begin()))
            throw ModelError("model feature list does not match this build's feature ordering");
        auto kind = j.at("kind").get<std::string>();
        if (kind == "random_forest") return forest_from(j);
        if (kind == "lasso_logit") return glm_from(j);
        throw ModelError("unknown model kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed model file: ") + e.what());
    }
}

void write_model(std::ostream& out, const Model& model) { out << serialize_model(model); }

Model read_model(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(text);
}

double predict(const Model& model, const FeatureVector& fv) {
    return std::visit(
        [&](const auto& m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Forest>)
                return predict_vote(m, fv);
            else
                return predict_prob(m, fv);
        },
        model);
}

std::vector<double> predict_all(const Model& model, const Dataset& dataset, unsigned threads) {
    if (const auto* f = std::get_if<Forest>(&model)) return predict_votes(*f, dataset, threads);
    return predict_probs(std::get<GlmModel>(model), dataset);
}

}  // namespace pnd
