#pragma once

#include "crsir/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace crsir {

enum class TransformCode { None, Log, Diff, Diff2, LogDiff, LogDiff2 };

TransformCode parse_transform_code(const std::string& code);
std::string to_string(TransformCode code);

struct CvGrid {
    std::vector<int> clusters{1, 5, 10, 20, 30};
    std::vector<double> taus{0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};

    [[nodiscard]] std::size_t size() const noexcept { return clusters.size() * taus.size(); }
};

/// Everything the rolling evaluation needs. Loaded from a JSON config file.
struct PanelConfig {
    std::filesystem::path data_path;
    /// Series name -> transform; series not listed are left untransformed.
    std::map<std::string, TransformCode> transform_codes;
    /// Series to forecast; empty means every series.
    std::vector<std::string> forecast_targets;
    /// Predictor series; empty means every series except the current target.
    std::vector<std::string> predictors;
    std::vector<int> horizons{1, 2, 4};
    int window_length = 100;
    CvGrid cv_grid;
    /// 0 picks min(10, floor(T / 4)) per fit.
    int slices = 0;
    double alpha = 0.05;
    std::uint64_t seed = 20240101;
    /// First forecast origin (0-based row of the transformed panel); negative means the
    /// earliest row with a full window plus four lags behind it.
    int eval_start = -1;
    /// Last forecast origin; negative means every origin whose target is observed.
    int eval_end = -1;
    /// Winsorize each transformed series at median +- k * IQR; 0 disables.
    double winsorize_iqr = 0.0;
    /// Worker threads for the rolling evaluation; results do not depend on it.
    int threads = 1;

    /// Throws DomainError on inconsistent settings.
    void validate() const;
};

PanelConfig load_config(const std::filesystem::path& path);
PanelConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});

/// Transformed panel on its common sample.
struct Panel {
    DataMatrix series;
    std::size_t dropped_rows = 0;

    [[nodiscard]] Eigen::Index column(const std::string& name) const;
    [[nodiscard]] std::vector<double> target(const std::string& name) const;
};

/// Raw CSV table: header names plus values with NaN for missing fields.
struct RawTable {
    std::vector<std::string> names;
    Matrix values;
};

RawTable read_csv(const std::filesystem::path& path);
RawTable parse_csv(const std::string& text);

/// Applies one transform to a series; leading entries without enough history become NaN.
/// `column` only labels errors (1-based).
std::vector<double> apply_transform(const std::vector<double>& raw, TransformCode code, std::size_t column = 0);

/// Transforms every series, optionally winsorizes, and drops rows with any missing value.
Panel build_panel(const RawTable& raw, const PanelConfig& config);

Panel load_panel(const PanelConfig& config);

void write_csv(const std::filesystem::path& path, const DataMatrix& data);

}  // namespace crsir
