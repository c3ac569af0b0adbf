#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dqtrack/sim.hpp"

namespace dqtrack {

/// Parsed trajectory CSV in the fixed column schema
/// t, qerr_0..7, werr_0..5, norm_x, V0, V, f_0..2, tau_0..2, h_min, fuel_kg.
struct CsvTrajectory {
    std::vector<TrajectoryRow> rows;

    std::vector<NormSample> norm_samples() const {
        std::vector<NormSample> ns;
        ns.reserve(rows.size());
        for (const auto& r : rows) ns.push_back({r.t, r.norm_x});
        return ns;
    }
};

std::string trajectory_csv_string(const TrajectoryRecord& rec);
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& rec);
CsvTrajectory read_trajectory_csv(const std::filesystem::path& path);

std::string summary_json_string(const ScenarioResult& result,
                                const std::vector<std::string>& files);
void write_summary_json(const std::filesystem::path& path, const ScenarioResult& result,
                        const std::vector<std::string>& files);

/// What cmd_check needs back from a summary file.
struct SummaryInfo {
    StabilityEnvelope envelope{};
    bool has_envelope{false};
    IssBound iss{};
    bool has_iss{false};
    double settle_fraction{0.2};
    bool check_envelope_flag{false};
    bool check_iss_flag{false};
    bool check_safety_flag{false};
    double terminal_axial_limit{0.0};
    double pose_error_limit{0.0};
    std::vector<bool> stored_verdicts;
    bool all_pass{false};
};

SummaryInfo read_summary_json(const std::filesystem::path& path);

/// Writes the full scenario artifact set (one CSV per trajectory plus
/// summary.json) and returns the summary path.
std::filesystem::path write_scenario_artifacts(const std::filesystem::path& out_dir,
                                               const ScenarioResult& result);

std::string constants_json_string(const ScenarioParams& params);

/// Loads a flat key=value config.  `.json` files may hold strings, numbers,
/// booleans and numeric arrays (joined with commas); anything else is a
/// TOML subset: comments, cosmetic [sections], scalar key = value lines.
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);
std::map<std::string, std::string> parse_config_text(const std::string& text, bool json);

}  // namespace dqtrack
