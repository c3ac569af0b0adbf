#include "dqtrack/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dqtrack {

namespace {

using ordered_json = nlohmann::ordered_json;

const char* kCsvHeader =
    "t,qerr_0,qerr_1,qerr_2,qerr_3,qerr_4,qerr_5,qerr_6,qerr_7,"
    "werr_0,werr_1,werr_2,werr_3,werr_4,werr_5,"
    "norm_x,V0,V,f_0,f_1,f_2,tau_0,tau_1,tau_2,h_min,fuel_kg";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ordered_json envelope_json(const StabilityEnvelope& e) {
    ordered_json j;
    j["R"] = e.R;
    j["delta"] = e.delta;
    j["k0"] = e.k0;
    j["c"] = e.c;
    j["beta"] = e.beta;
    j["alpha"] = e.alpha;
    j["k1"] = e.k1;
    if (std::isfinite(e.m_env)) j["m_env"] = e.m_env;
    j["log_m_env"] = e.log_m_env;
    return j;
}

ordered_json iss_json(const IssBound& b, double settle_fraction) {
    ordered_json j;
    j["psi"] = b.psi;
    j["d_m"] = b.d_m;
    j["ball_radius"] = b.ball_radius;
    j["settle_fraction"] = settle_fraction;
    return j;
}

ordered_json body_json(const ScenarioParams& p) {
    DualInertia J(p.mass, p.inertia);
    ordered_json j;
    j["mass"] = p.mass;
    std::vector<double> iv;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) iv.push_back(p.inertia(r, c));
    j["inertia"] = iv;
    j["J_max"] = J.j_max();
    j["J_min"] = J.j_min();
    return j;
}

}  // namespace

std::string trajectory_csv_string(const TrajectoryRecord& rec) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rec.rows) {
        Vec8 q = r.q_err.to_vec8();
        out += fmt(r.t);
        for (int i = 0; i < 8; ++i) { out += ','; out += fmt(q[i]); }
        for (int i = 0; i < 3; ++i) { out += ','; out += fmt(r.w_err.real_vec()[i]); }
        for (int i = 0; i < 3; ++i) { out += ','; out += fmt(r.w_err.dual_vec()[i]); }
        out += ','; out += fmt(r.norm_x);
        out += ','; out += fmt(r.v0);
        out += ','; out += fmt(r.v);
        for (int i = 0; i < 3; ++i) { out += ','; out += fmt(r.force[i]); }
        for (int i = 0; i < 3; ++i) { out += ','; out += fmt(r.torque[i]); }
        out += ','; out += fmt(r.h_min);
        out += ','; out += fmt(r.fuel_kg);
        out += '\n';
    }
    return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& rec) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open for writing: " + path.string());
    f << trajectory_csv_string(rec);
}

CsvTrajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open: " + path.string());
    auto strip_cr = [](std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    };
    std::string line;
    if (!std::getline(f, line)) throw DomainError("empty CSV: " + path.string());
    strip_cr(line);
    if (line != kCsvHeader) throw ParseError("CSV header does not match the trajectory schema");

    CsvTrajectory traj;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw ParseError("bad number at line " + std::to_string(lineno));
            vals.push_back(v);
        }
        if (vals.size() != 26)
            throw ParseError("wrong column count at line " + std::to_string(lineno));
        TrajectoryRow r;
        r.t = vals[0];
        Vec8 q;
        for (int i = 0; i < 8; ++i) q[i] = vals[static_cast<std::size_t>(1 + i)];
        r.q_err = DualQuaternion::from_vec8(q);
        r.w_err = DualVector(Vec3(vals[9], vals[10], vals[11]), Vec3(vals[12], vals[13], vals[14]));
        r.norm_x = vals[15];
        r.v0 = vals[16];
        r.v = vals[17];
        r.force = Vec3(vals[18], vals[19], vals[20]);
        r.torque = Vec3(vals[21], vals[22], vals[23]);
        r.h_min = vals[24];
        r.fuel_kg = vals[25];
        traj.rows.push_back(r);
    }
    if (traj.rows.empty()) throw DomainError("CSV has no data rows: " + path.string());
    return traj;
}

std::string summary_json_string(const ScenarioResult& result,
                                const std::vector<std::string>& files) {
    const ScenarioParams& p = result.params;
    ordered_json j;
    j["scenario"] = p.name;
    j["seed"] = p.seed;
    j["n"] = p.n;
    j["dt"] = p.dt;
    j["t_final"] = p.t_final;
    j["record_every"] = p.record_every;
    j["renormalize_every"] = p.renormalize_every;
    j["controller"] = p.use_baseline ? "baseline" : "proposed";
    j["gains"] = {{"kp", p.kp}, {"kd", p.kd}};
    j["body"] = body_json(p);
    j["envelope"] = envelope_json(result.envelope);
    if (result.iss) j["iss"] = iss_json(*result.iss, p.settle_fraction);

    std::vector<std::string> checks;
    if (p.verdict_envelope) checks.push_back("envelope");
    if (p.verdict_iss) checks.push_back("iss");
    if (p.verdict_safety) checks.push_back("safety");
    if (p.terminal_axial_limit > 0.0) checks.push_back("axial");
    if (p.pose_error_limit > 0.0) checks.push_back("pose");
    j["checks"] = checks;
    if (p.terminal_axial_limit > 0.0) j["terminal_axial_limit"] = p.terminal_axial_limit;
    if (p.pose_error_limit > 0.0) j["pose_error_limit"] = p.pose_error_limit;

    if (!p.barriers.empty()) {
        ordered_json s;
        s["a1"] = p.poles->a1;
        s["a2"] = p.poles->a2;
        if (p.input_box) {
            s["box_lo"] = {p.input_box->lo[0], p.input_box->lo[1], p.input_box->lo[2]};
            s["box_hi"] = {p.input_box->hi[0], p.input_box->hi[1], p.input_box->hi[2]};
        }
        ordered_json barriers = ordered_json::array();
        for (const auto& b : p.barriers) {
            ordered_json bj;
            switch (b.variant) {
                case BarrierSpec::Variant::corridor:
                    bj["variant"] = "corridor";
                    bj["r1"] = b.r1;
                    bj["r2"] = b.r2;
                    bj["r3"] = b.r3;
                    bj["theta"] = b.theta;
                    bj["r_star"] = b.r_star;
                    bj["origin"] = {b.origin[0], b.origin[1], b.origin[2]};
                    break;
                case BarrierSpec::Variant::half_space:
                    bj["variant"] = "half_space";
                    bj["normal"] = {b.normal[0], b.normal[1], b.normal[2]};
                    bj["offset"] = b.offset;
                    break;
                case BarrierSpec::Variant::ceiling:
                    bj["variant"] = "ceiling";
                    bj["height"] = b.height;
                    break;
                case BarrierSpec::Variant::sphere_keepout:
                    bj["variant"] = "sphere_keepout";
                    bj["center"] = {b.center[0], b.center[1], b.center[2]};
                    bj["radius"] = b.radius;
                    break;
            }
            barriers.push_back(bj);
        }
        s["barriers"] = barriers;
        j["safety"] = s;
    }

    if (!result.fuel_at_milestones.empty()) {
        ordered_json fj;
        fj["c1"] = p.fuel.c1;
        fj["m0"] = p.fuel.m0;
        ordered_json ms = ordered_json::array();
        for (std::size_t i = 0; i < result.fuel_at_milestones.size(); ++i)
            ms.push_back({{"t", result.fuel_milestone_times[i]},
                          {"fuel_kg", result.fuel_at_milestones[i]}});
        fj["milestones"] = ms;
        j["fuel"] = fj;
    }

    j["max_unit_drift"] = result.max_unit_drift;

    ordered_json verdicts = ordered_json::array();
    for (const auto& v : result.verdicts) {
        ordered_json vj;
        vj["index"] = v.index;
        vj["pass"] = v.pass;
        if (!v.detail.empty()) vj["detail"] = v.detail;
        if (std::isfinite(v.envelope_margin)) vj["envelope_margin"] = v.envelope_margin;
        if (std::isfinite(v.iss_margin)) vj["iss_margin"] = v.iss_margin;
        if (std::isfinite(v.h_min)) vj["h_min"] = v.h_min;
        if (v.kkt_max > 0.0) vj["kkt_max"] = v.kkt_max;
        vj["terminal_axial"] = v.terminal_axial;
        vj["final_pose_error"] = v.final_pose_error;
        verdicts.push_back(vj);
    }
    j["verdicts"] = verdicts;
    j["all_pass"] = result.all_pass;
    j["files"] = files;
    return j.dump(2) + "\n";
}

void write_summary_json(const std::filesystem::path& path, const ScenarioResult& result,
                        const std::vector<std::string>& files) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open for writing: " + path.string());
    f << summary_json_string(result, files);
}

SummaryInfo read_summary_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open: " + path.string());
    ordered_json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ParseError("summary JSON parse failure: " + std::string(e.what()));
    }

    SummaryInfo info;
    if (j.contains("envelope")) {
        const auto& e = j["envelope"];
        info.envelope.R = e.at("R").get<double>();
        info.envelope.delta = e.value("delta", 0.0);
        info.envelope.k0 = e.value("k0", 0.0);
        info.envelope.c = e.value("c", 0.0);
        info.envelope.beta = e.value("beta", 0.0);
        info.envelope.alpha = e.at("alpha").get<double>();
        info.envelope.k1 = e.value("k1", 0.0);
        info.envelope.log_m_env = e.at("log_m_env").get<double>();
        info.envelope.m_env = e.contains("m_env") ? e["m_env"].get<double>()
                                                  : std::numeric_limits<double>::infinity();
        info.has_envelope = true;
    }
    if (j.contains("iss")) {
        const auto& b = j["iss"];
        info.iss.psi = b.at("psi").get<double>();
        info.iss.d_m = b.at("d_m").get<double>();
        info.iss.ball_radius = b.at("ball_radius").get<double>();
        info.settle_fraction = b.value("settle_fraction", 0.2);
        info.has_iss = true;
    }
    for (const auto& c : j.value("checks", std::vector<std::string>{})) {
        if (c == "envelope") info.check_envelope_flag = true;
        if (c == "iss") info.check_iss_flag = true;
        if (c == "safety") info.check_safety_flag = true;
    }
    info.terminal_axial_limit = j.value("terminal_axial_limit", 0.0);
    info.pose_error_limit = j.value("pose_error_limit", 0.0);
    if (j.contains("verdicts"))
        for (const auto& v : j["verdicts"]) info.stored_verdicts.push_back(v.at("pass").get<bool>());
    info.all_pass = j.value("all_pass", false);
    return info;
}

std::filesystem::path write_scenario_artifacts(const std::filesystem::path& out_dir,
                                               const ScenarioResult& result) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> files;
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "traj_%03zu.csv", i);
        write_trajectory_csv(out_dir / name, result.records[i]);
        files.emplace_back(name);
    }
    std::filesystem::path summary = out_dir / "summary.json";
    write_summary_json(summary, result, files);
    return summary;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text, bool json) {
    std::map<std::string, std::string> out;
    if (json) {
        ordered_json j;
        try {
            j = ordered_json::parse(text);
        } catch (const std::exception& e) {
            throw ParseError("config JSON parse failure: " + std::string(e.what()));
        }
        if (!j.is_object()) throw ParseError("config JSON root must be an object");
        for (const auto& [key, value] : j.items()) {
            if (value.is_string()) out[key] = value.get<std::string>();
            else if (value.is_boolean()) out[key] = value.get<bool>() ? "true" : "false";
            else if (value.is_number()) out[key] = value.dump();
            else if (value.is_array()) {
                std::string joined;
                for (const auto& item : value) {
                    if (!item.is_number()) throw ParseError("config array values must be numeric");
                    if (!joined.empty()) joined += ',';
                    joined += item.dump();
                }
                out[key] = joined;
            } else {
                throw ParseError("unsupported config value for key '" + key + "'");
            }
        }
        return out;
    }

    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        bool in_quote = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quote = !in_quote;
            else if (line[i] == '#' && !in_quote) { line.resize(i); break; }
        }
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("config line missing '=': " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty()) throw ParseError("config line with empty key");
        out[key] = value;
    }
    return out;
}

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str(), path.extension() == ".json");
}

std::string constants_json_string(const ScenarioParams& p) {
    DualInertia J(p.mass, p.inertia);
    Gains g(p.kp, p.kd);
    RestReference ref;
    double r_env = p.R;
    if (p.has_fixed_x0) {
        r_env = 0.0;
        for (const auto& x : p.fixed_x0) r_env = std::max(r_env, x.norm());
        if (!(r_env > 0.0)) r_env = 1.0;   // all-equilibrium starts
    }
    StabilityEnvelope env =
        make_envelope(r_env, J, g, ref.twist_sup(p.t_final), p.envelope_overrides);

    ordered_json j;
    j["scenario"] = p.name;
    j["gains"] = {{"kp", p.kp}, {"kd", p.kd}};
    j["body"] = body_json(p);
    j["envelope"] = envelope_json(env);
    if (p.dist_box > 0.0) {
        IssBound b = make_iss_bound(env, g, p.dist_box * std::sqrt(6.0));
        j["iss"] = iss_json(b, p.settle_fraction);
    }
    return j.dump(2) + "\n";
}

}  // namespace dqtrack
