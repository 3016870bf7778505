#pragma once

#include "crsir/crsir.hpp"

#include <filesystem>
#include <string>

namespace crsir {

inline constexpr const char* kModelFormat = "crsir-model";
inline constexpr int kModelVersion = 1;

/// Optional context saved with a model so the forecast stage can align its input.
struct ModelMetadata {
    std::string target;
    int horizon = 0;
};

/// JSON document with a format tag and version, then standardization, assignment,
/// orthogonalizer, Lambda, Gamma and head. Doubles round-trip exactly.
std::string model_to_json(const CrsirModel& model, const ModelMetadata& meta = {});
CrsirModel model_from_json(const std::string& text, ModelMetadata* meta = nullptr);

void save_model(const std::filesystem::path& path, const CrsirModel& model, const ModelMetadata& meta = {});
CrsirModel load_model(const std::filesystem::path& path, ModelMetadata* meta = nullptr);

}  // namespace crsir
