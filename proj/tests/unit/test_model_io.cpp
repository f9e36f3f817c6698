#include <doctest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "datasets.hpp"
#include "pnd/model_io.hpp"

using namespace pnd;
using nlohmann::json;

namespace {

std::string reseal(json j) {
    j.erase("checksum");
    std::string body = j.dump();
    j["checksum"] = hex64(fnv1a64(body));
    return j.dump();
}

Forest small_forest(const Dataset& ds) {
    auto cfg = RFConfig::preset(10, 60, 9);
    cfg.max_depth = 6;
    return train_forest(ds, cfg);
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("forest round-trip predicts identically") {
    Rng rng(1);
    auto ds = test::synthetic_dataset(rng, 20, 8, 1.5);
    Forest f = small_forest(ds);
    std::string text = serialize_model(f);
    Model back = deserialize_model(text);
    REQUIRE(std::holds_alternative<Forest>(back));
    const auto& g = std::get<Forest>(back);
    CHECK(g.trees == f.trees);
    CHECK(g.imputation_values == f.imputation_values);
    CHECK(g.config.max_depth == 6);
    CHECK(predict_all(back, ds) == predict_votes(f, ds));
    CHECK(serialize_model(back) == text);
}

TEST_CASE("glm round-trip predicts identically") {
    Rng rng(2);
    auto ds = test::synthetic_dataset(rng, 20, 8, 1.5);
    GlmModel m = fit_lasso_logit(ds, GlmConfig::glm2());
    std::stringstream io;
    write_model(io, m);
    Model back = read_model(io);
    REQUIRE(std::holds_alternative<GlmModel>(back));
    CHECK(std::get<GlmModel>(back).coefficients == m.coefficients);
    CHECK(std::get<GlmModel>(back).active_set == m.active_set);
    CHECK(predict_all(back, ds) == predict_probs(m, ds));
}

TEST_CASE("corrupted model files are rejected") {
    Rng rng(3);
    auto ds = test::synthetic_dataset(rng, 10, 6, 1.5);
    json j = json::parse(serialize_model(small_forest(ds)));

    auto tampered = j;
    tampered["trees"][0]["threshold"][0] = 123.0;
    CHECK_THROWS_WITH_AS(deserialize_model(tampered.dump()), doctest::Contains("checksum"), ModelError);

    auto renamed = j;
    renamed["feature_names"][1] = "return2h";
    CHECK_THROWS_WITH_AS(deserialize_model(reseal(renamed)), doctest::Contains("feature"), ModelError);

    auto reordered = j;
    std::swap(reordered["feature_names"][1], reordered["feature_names"][2]);
    CHECK_THROWS_AS(deserialize_model(reseal(reordered)), ModelError);

    auto version = j;
    version["format_version"] = 99;
    CHECK_THROWS_WITH_AS(deserialize_model(reseal(version)), doctest::Contains("version"), ModelError);

    auto kind = j;
    kind["kind"] = "svm";
    CHECK_THROWS_AS(deserialize_model(reseal(kind)), ModelError);

    auto node = j;
    node["trees"][0]["left"][0] = 0;
    CHECK_THROWS_AS(deserialize_model(reseal(node)), ModelError);

    auto count = j;
    count["config"]["n_trees"] = 10;
    CHECK_THROWS_AS(deserialize_model(reseal(count)), ModelError);

    CHECK_THROWS_AS(deserialize_model("{not json"), ModelError);
    CHECK_THROWS_AS(deserialize_model("[1,2]"), ModelError);
    CHECK_NOTHROW(deserialize_model(reseal(j)));
}
