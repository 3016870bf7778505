#include "doctest.h"

#include "crsir/errors.hpp"
#include "crsir/model_io.hpp"
#include "support/oracles.hpp"

#include "json.hpp"

#include <filesystem>

using namespace crsir;

namespace {

CrsirModel fitted(Rng& rng) {
    Matrix x = oracle::random_matrix(rng, 120, 6);
    x.col(1) += x.col(0);
    x.col(4) += 0.5 * x.col(3);
    std::vector<double> y(120);
    for (Eigen::Index i = 0; i < 120; ++i) {
        y[static_cast<std::size_t>(i)] = x(i, 0) - x(i, 3) + 0.1 * x(i, 5) * x(i, 5) + 0.2 * rng.normal();
    }
    DataMatrix d(std::move(x), {"a", "b", "c", "d", "e", "f"});
    return crsir_fit(d, y, {3, 0.4, 8, 0.05});
}

}  // namespace

TEST_CASE("model JSON round-trips every field exactly") {
    Rng rng(1);
    const CrsirModel model = fitted(rng);
    const std::string text = model_to_json(model, {"gdp", 4});
    ModelMetadata meta;
    const CrsirModel back = model_from_json(text, &meta);
    CHECK(meta.target == "gdp");
    CHECK(meta.horizon == 4);
    CHECK(back.column_names == model.column_names);
    CHECK(back.standardization.mean == model.standardization.mean);
    CHECK(back.standardization.sd == model.standardization.sd);
    CHECK(back.assignment.labels == model.assignment.labels);
    CHECK(back.assignment.order == model.assignment.order);
    CHECK(back.orthogonalizer == model.orthogonalizer);
    CHECK(back.block_dims == model.block_dims);
    CHECK(back.lambda == model.lambda);
    CHECK(back.gamma == model.gamma);
    CHECK(back.head == model.head);
    CHECK(back.tau == model.tau);
    CHECK(back.clusters == model.clusters);
    CHECK(back.slices == model.slices);
    CHECK(back.alpha == model.alpha);

    const Matrix fresh = oracle::random_matrix(rng, 10, 6);
    CHECK(back.predict(fresh) == model.predict(fresh));

    const nlohmann::json j = nlohmann::json::parse(text);
    CHECK(j.at("format") == "crsir-model");
    CHECK(j.at("version") == 1);
}

TEST_CASE("model files on disk") {
    Rng rng(2);
    const CrsirModel model = fitted(rng);
    const auto path = std::filesystem::temp_directory_path() / "crsir_model_io_test.json";
    save_model(path, model);
    const CrsirModel back = load_model(path);
    CHECK(back.head == model.head);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), ParseError);
}

TEST_CASE("malformed model documents are rejected as data errors") {
    Rng rng(3);
    const CrsirModel model = fitted(rng);
    nlohmann::json j = nlohmann::json::parse(model_to_json(model));

    CHECK_THROWS_AS(model_from_json("{"), ParseError);

    nlohmann::json wrong_format = j;
    wrong_format["format"] = "something-else";
    CHECK_THROWS_AS(model_from_json(wrong_format.dump()), ParseError);

    nlohmann::json future = j;
    future["version"] = 2;
    CHECK_THROWS_AS(model_from_json(future.dump()), ParseError);

    nlohmann::json missing = j;
    missing.erase("gamma");
    CHECK_THROWS_AS(model_from_json(missing.dump()), ParseError);

    nlohmann::json ragged = j;
    ragged["lambda"]["data"][0].push_back(1.0);
    CHECK_THROWS_AS(model_from_json(ragged.dump()), ParseError);

    nlohmann::json short_head = j;
    short_head["head"].erase(0);
    CHECK_THROWS_AS(model_from_json(short_head.dump()), ParseError);

    try {
        model_from_json(future.dump());
    } catch (const Error& e) {
        CHECK(e.category() == Error::Category::Data);
    }
}
