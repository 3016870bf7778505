#include "crsir/model_io.hpp"

#include "crsir/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace crsir {

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix json_matrix(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const json& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) throw ParseError("matrix row count mismatch in model file", 0, 0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = data.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("matrix column count mismatch in model file", 0, 0);
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = row.at(static_cast<std::size_t>(j2)).get<double>();
    }
    return m;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_vector(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string model_to_json(const CrsirModel& model, const ModelMetadata& meta) {
    json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["target"] = meta.target;
    j["horizon"] = meta.horizon;
    j["column_names"] = model.column_names;
    j["standardization"] = {{"mean", vector_json(model.standardization.mean)},
                            {"sd", vector_json(model.standardization.sd)}};
    j["assignment"] = {{"labels", model.assignment.labels}, {"order", model.assignment.order}};
    j["orthogonalizer"] = matrix_json(model.orthogonalizer);
    j["block_dims"] = model.block_dims;
    j["lambda"] = matrix_json(model.lambda);
    j["gamma"] = matrix_json(model.gamma);
    j["head"] = vector_json(model.head);
    j["tau"] = model.tau;
    j["clusters"] = model.clusters;
    j["slices"] = model.slices;
    j["alpha"] = model.alpha;
    return j.dump(1);
}

CrsirModel model_from_json(const std::string& text, ModelMetadata* meta) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what(), 0, 0);
    }
    try {
        if (j.at("format").get<std::string>() != kModelFormat) throw ParseError("not a CRSIR model file", 0, 0);
        const int version = j.at("version").get<int>();
        if (version != kModelVersion) throw ParseError("unsupported model version " + std::to_string(version), 0, 0);

        CrsirModel m;
        m.column_names = j.at("column_names").get<std::vector<std::string>>();
        m.standardization.mean = json_vector(j.at("standardization").at("mean"));
        m.standardization.sd = json_vector(j.at("standardization").at("sd"));
        m.assignment.labels = j.at("assignment").at("labels").get<std::vector<int>>();
        m.assignment.order = j.at("assignment").at("order").get<std::vector<int>>();
        m.orthogonalizer = json_matrix(j.at("orthogonalizer"));
        m.block_dims = j.at("block_dims").get<std::vector<int>>();
        m.lambda = json_matrix(j.at("lambda"));
        m.gamma = json_matrix(j.at("gamma"));
        m.head = json_vector(j.at("head"));
        m.tau = j.at("tau").get<double>();
        m.clusters = j.at("clusters").get<int>();
        m.slices = j.at("slices").get<int>();
        m.alpha = j.at("alpha").get<double>();

        const Eigen::Index n = m.standardization.mean.size();
        if (m.standardization.sd.size() != n || m.orthogonalizer.rows() != n || m.orthogonalizer.cols() != n ||
            m.lambda.rows() != n || m.gamma.rows() != m.lambda.cols() || m.head.size() != m.gamma.cols() + 1 ||
            static_cast<Eigen::Index>(m.column_names.size()) != n) {
            throw ParseError("inconsistent matrix shapes in model file", 0, 0);
        }
        if (meta != nullptr) {
            meta->target = j.value("target", std::string{});
            meta->horizon = j.value("horizon", 0);
        }
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what(), 0, 0);
    }
}

void save_model(const std::filesystem::path& path, const CrsirModel& model, const ModelMetadata& meta) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path.string());
    out << model_to_json(model, meta) << '\n';
}

CrsirModel load_model(const std::filesystem::path& path, ModelMetadata* meta) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str(), meta);
}

}  // namespace crsir
