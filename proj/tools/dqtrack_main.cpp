#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dqtrack/io.hpp"

namespace fs = std::filesystem;
using dqtrack::ConfigError;
using dqtrack::ParseError;

namespace {

// Exit-code contract: 0 = all verdicts pass, 2 = verdict failure,
// 1 = operational error.
constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitVerdictFail = 2;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

void apply_set_flags(const std::vector<std::string>& sets,
                     std::map<std::string, std::string>& overrides) {
    for (const auto& kv : sets) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        overrides[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }
}

struct CommonArgs {
    std::string scenario;
    std::string config_path;
    std::vector<std::string> sets;
    std::string seed, n, dt, t_final;

    // file < explicit flags < --set
    std::map<std::string, std::string> resolve_overrides() {
        std::map<std::string, std::string> ov;
        if (!config_path.empty()) ov = dqtrack::load_config_file(config_path);
        if (auto it = ov.find("scenario"); it != ov.end()) {
            if (scenario.empty()) scenario = it->second;
            ov.erase(it);
        }
        if (!seed.empty()) ov["seed"] = seed;
        if (!n.empty()) ov["n"] = n;
        if (!dt.empty()) ov["dt"] = dt;
        if (!t_final.empty()) ov["t_final"] = t_final;
        apply_set_flags(sets, ov);
        if (scenario.empty()) throw ConfigError("no scenario given (--scenario or config key)");
        return ov;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario, "Scenario name");
    cmd->add_option("--config", args.config_path, "TOML or JSON config file");
    cmd->add_option("--seed", args.seed, "RNG seed");
    cmd->add_option("--n", args.n, "Number of Monte-Carlo trajectories");
    cmd->add_option("--dt", args.dt, "Integration step, s");
    cmd->add_option("--t-final", args.t_final, "Horizon, s");
    cmd->add_option("--set", args.sets, "key=value override (repeatable)");
}

int cmd_run(CommonArgs& args, const std::string& out_dir_flag) {
    auto overrides = args.resolve_overrides();
    dqtrack::ScenarioParams params = dqtrack::resolve_scenario(args.scenario, overrides);
    dqtrack::ScenarioResult result = dqtrack::run_scenario(params);

    fs::path out_dir = out_dir_flag.empty() ? fs::path("out") / params.name : fs::path(out_dir_flag);
    fs::path summary = dqtrack::write_scenario_artifacts(out_dir, result);

    int passed = 0;
    for (const auto& v : result.verdicts) passed += v.pass ? 1 : 0;
    std::cout << "scenario=" << params.name << " trajectories=" << result.verdicts.size()
              << " passed=" << passed << " all_pass=" << (result.all_pass ? "true" : "false")
              << " summary=" << summary.string() << "\n";
    return result.all_pass ? kExitPass : kExitVerdictFail;
}

int cmd_constants(CommonArgs& args) {
    auto overrides = args.resolve_overrides();
    dqtrack::ScenarioParams params = dqtrack::resolve_scenario(args.scenario, overrides);
    std::cout << dqtrack::constants_json_string(params);
    return kExitPass;
}

int cmd_check(const std::string& csv_path, const std::string& summary_path) {
    dqtrack::SummaryInfo info = dqtrack::read_summary_json(summary_path);
    dqtrack::CsvTrajectory traj = dqtrack::read_trajectory_csv(csv_path);
    auto ns = traj.norm_samples();

    bool pass = true;
    if (info.check_envelope_flag) {
        if (!info.has_envelope) throw ParseError("summary lacks envelope constants");
        dqtrack::EnvelopeVerdict v = dqtrack::check_envelope(ns, info.envelope);
        std::cout << "envelope: " << (v.pass ? "pass" : "FAIL") << " margin=" << v.margin;
        if (!v.pass) std::cout << " first_violation=" << v.first_violation;
        std::cout << "\n";
        pass = pass && v.pass;
    }
    if (info.check_iss_flag) {
        if (!info.has_iss) throw ParseError("summary lacks ISS constants");
        dqtrack::IssVerdict v = dqtrack::check_iss(ns, info.iss, info.settle_fraction);
        std::cout << "iss: " << (v.pass ? "pass" : "FAIL") << " margin=" << v.margin;
        if (!v.pass) std::cout << " first_violation=" << v.first_violation;
        std::cout << "\n";
        pass = pass && v.pass;
    }
    if (info.check_safety_flag) {
        double h_min = std::numeric_limits<double>::infinity();
        for (const auto& r : traj.rows)
            if (std::isfinite(r.h_min)) h_min = std::min(h_min, r.h_min);
        bool ok = h_min >= -1e-6;
        std::cout << "safety: " << (ok ? "pass" : "FAIL") << " h_min=" << h_min << "\n";
        pass = pass && ok;
    }
    if (info.terminal_axial_limit > 0.0) {
        const auto& last = traj.rows.back();
        dqtrack::Vec3 r_d = (2.0 * (last.q_err.dual * dqtrack::conj(last.q_err.real))).vec;
        bool ok = std::abs(r_d.x()) <= info.terminal_axial_limit;
        std::cout << "axial: " << (ok ? "pass" : "FAIL") << " terminal=" << std::abs(r_d.x())
                  << "\n";
        pass = pass && ok;
    }
    if (info.pose_error_limit > 0.0) {
        const auto& last = traj.rows.back();
        double err = dqtrack::norm(last.q_err - dqtrack::DualQuaternion::one());
        bool ok = err < info.pose_error_limit;
        std::cout << "pose: " << (ok ? "pass" : "FAIL") << " final_error=" << err << "\n";
        pass = pass && ok;
    }
    {
        // fuel is a record invariant: the consumed-mass column never decreases
        bool monotone = true;
        for (std::size_t i = 1; i < traj.rows.size(); ++i)
            if (traj.rows[i].fuel_kg < traj.rows[i - 1].fuel_kg) monotone = false;
        if (!monotone) std::cout << "fuel: FAIL (series decreases)\n";
        pass = pass && monotone;
    }
    std::cout << "verdict: " << (pass ? "pass" : "FAIL") << "\n";
    return pass ? kExitPass : kExitVerdictFail;
}

int cmd_export(const std::string& summary_path, const std::string& out_dir_flag) {
    dqtrack::SummaryInfo info = dqtrack::read_summary_json(summary_path);
    fs::path dir = fs::path(summary_path).parent_path();
    fs::path out_dir = out_dir_flag.empty() ? dir : fs::path(out_dir_flag);
    fs::create_directories(out_dir);

    std::ifstream f(summary_path);
    nlohmann::json j;
    f >> j;
    std::vector<std::string> files = j.value("files", std::vector<std::string>{});
    if (files.empty()) throw ParseError("summary lists no trajectory files");

    std::vector<dqtrack::CsvTrajectory> trajs;
    for (const auto& name : files) trajs.push_back(dqtrack::read_trajectory_csv(dir / name));

    std::ofstream norms(out_dir / "plot_norms.csv");
    norms << "t";
    for (std::size_t i = 0; i < trajs.size(); ++i) norms << ",norm_" << i;
    if (info.has_envelope) norms << ",envelope_bound";
    norms << "\n";
    const auto& grid = trajs.front().rows;
    char buf[32];
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", grid[k].t);
        norms << buf;
        for (const auto& tr : trajs) {
            double v = k < tr.rows.size() ? tr.rows[k].norm_x
                                          : std::numeric_limits<double>::quiet_NaN();
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            norms << ',' << buf;
        }
        if (info.has_envelope) {
            const auto& e = info.envelope;
            double bound = std::isfinite(e.m_env)
                               ? e.m_env * std::exp(-e.alpha * grid[k].t) * e.R
                               : std::exp(e.log_m_env - e.alpha * grid[k].t) * e.R;
            std::snprintf(buf, sizeof(buf), "%.17g", bound);
            norms << ',' << buf;
        }
        norms << "\n";
    }
    std::cout << "wrote " << (out_dir / "plot_norms.csv").string() << "\n";
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dqtrack: dual-quaternion 6-DOF tracking control toolkit"};
    app.require_subcommand(1);

    CommonArgs run_args, const_args;
    std::string run_out, check_csv, check_summary, export_summary, export_out;

    CLI::App* run = app.add_subcommand("run", "Run a scenario and write CSV/JSON artifacts");
    add_common(run, run_args);
    run->add_option("--out", run_out, "Output directory");

    CLI::App* constants = app.add_subcommand("constants", "Print envelope/ISS constants as JSON");
    add_common(constants, const_args);

    CLI::App* check = app.add_subcommand("check", "Re-verify verdicts from saved artifacts");
    check->add_option("--trajectory", check_csv, "Trajectory CSV")->required();
    check->add_option("--summary", check_summary, "Scenario summary JSON")->required();

    CLI::App* exp = app.add_subcommand("export", "Write plot-ready CSV from saved artifacts");
    exp->add_option("--summary", export_summary, "Scenario summary JSON")->required();
    exp->add_option("--out", export_out, "Output directory");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(run_args, run_out);
        if (constants->parsed()) return cmd_constants(const_args);
        if (check->parsed()) return cmd_check(check_csv, check_summary);
        if (exp->parsed()) return cmd_export(export_summary, export_out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
