#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcac/scenario.hpp"

namespace pcac {

/// Per-step table layout version; bump when columns change.
inline constexpr int kTableSchemaVersion = 1;

/// 17 significant digits; "nan"/"inf"/"-inf" for non-finite values.
std::string format_double(double x);

std::vector<std::string> table_header(Eigen::Index p, Eigen::Index m, Eigen::Index theta_size);

void write_table(std::ostream& os, const std::vector<StepRecord>& rows);
nlohmann::json summary_json(const RunSummary& s);
void write_roa_csv(std::ostream& os, const RoaResult& roa);

/// Writes steps.csv, summary.json and config.json into dir (created if needed).
void write_artifacts(const std::filesystem::path& dir, const RunArtifacts& art, const ScenarioConfig& cfg);

/// Column-major view of a CSV written by write_table.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    /// Index of `name`, or -1.
    int column(const std::string& name) const;
    /// Columns whose name starts with `prefix` followed only by digits.
    std::vector<int> indexed(const std::string& prefix) const;
};

Table read_table(const std::filesystem::path& path);

/// Renders the output/parameter chart and the criterion trace chart from
/// dir/steps.csv. Returns the files written (none for an empty table).
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir);

}  // namespace pcac
