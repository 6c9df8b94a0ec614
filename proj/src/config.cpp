#include "hpfc/config.hpp"

#include <cstdio>
#include <ctime>
#include <initializer_list>
#include <set>
#include <string>

#include "hpfc/errors.hpp"

namespace hpfc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError("config: " + path + " " + what);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "must be an object");
    for (const auto& kv : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (kv.key() == k) { ok = true; break; }
        if (!ok) fail(path, "has unknown key '" + kv.key() + "'");
    }
}

void get_num(const json& j, const std::string& path, const char* key, double& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number()) fail(path + "." + key, "must be a number");
    out = v.get<double>();
}

void get_int(const json& j, const std::string& path, const char* key, int& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(path + "." + key, "must be an integer");
    out = v.get<int>();
}

void get_u64(const json& j, const std::string& path, const char* key, uint64_t& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
        fail(path + "." + key, "must be a non-negative integer");
    out = v.get<uint64_t>();
}

void get_bool(const json& j, const std::string& path, const char* key, bool& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(path + "." + key, "must be a boolean");
    out = v.get<bool>();
}

void parse_gain(const json& j, const std::string& path, GainVector& g) {
    check_keys(j, path, {"k1", "k2", "k3", "k4", "ki"});
    get_num(j, path, "k1", g.k1);
    get_num(j, path, "k2", g.k2);
    get_num(j, path, "k3", g.k3);
    get_num(j, path, "k4", g.k4);
    get_num(j, path, "ki", g.ki);
}

void parse_operating(const json& j, const std::string& path, OperatingPoint& op) {
    check_keys(j, path, {"omega", "k_w", "d_w", "stiffness"});
    get_num(j, path, "omega", op.omega);
    get_num(j, path, "k_w", op.k_w);
    get_num(j, path, "d_w", op.d_w);
    get_num(j, path, "stiffness", op.stiffness);
}

void parse_weights(const json& j, const std::string& path, LyapunovWeights& w) {
    if (!j.is_array() || j.size() != 3) fail(path, "must be an array [w1, w2, w3]");
    for (int i = 0; i < 3; ++i)
        if (!j[i].is_number()) fail(path, "must hold three numbers");
    w.w1 = j[0].get<double>();
    w.w2 = j[1].get<double>();
    w.w3 = j[2].get<double>();
}

CVec parse_poles(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "must be a non-empty array");
    CVec out;
    for (size_t i = 0; i < j.size(); ++i) {
        const json& e = j[i];
        std::string p = path + "[" + std::to_string(i) + "]";
        if (e.is_number()) {
            out.emplace_back(e.get<double>(), 0.0);
        } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
            out.emplace_back(e[0].get<double>(), e[1].get<double>());
        } else {
            fail(p, "must be a number or [re, im] pair");
        }
    }
    return out;
}

json dump_poles(const CVec& poles) {
    json out = json::array();
    for (const Cplx& z : poles) out.push_back({z.real(), z.imag()});
    return out;
}

}  // namespace

AppConfig config_from_json(const json& j) {
    AppConfig app;
    ScenarioConfig& cfg = app.scenario;
    check_keys(j, "(root)",
               {"scenario", "plant", "friction", "environment", "gains", "operating",
                "hysteresis", "reference", "control", "noise", "lyapunov",
                "desired_poles"});

    if (j.contains("scenario")) {
        const json& s = j.at("scenario");
        check_keys(s, "scenario",
                   {"variant", "duration", "dt", "log_decimation", "seed", "run_count"});
        if (s.contains("variant")) {
            std::string v = s.at("variant").is_string() ? s.at("variant").get<std::string>()
                                                        : std::string();
            if (v == "hard_stop")
                cfg.variant = ScenarioConfig::Variant::hard_stop;
            else if (v == "dynamic_env")
                cfg.variant = ScenarioConfig::Variant::dynamic_env;
            else
                fail("scenario.variant", "must be \"hard_stop\" or \"dynamic_env\"");
        }
        get_num(s, "scenario", "duration", cfg.duration);
        get_num(s, "scenario", "dt", cfg.dt);
        get_int(s, "scenario", "log_decimation", cfg.log_decimation);
        get_u64(s, "scenario", "seed", cfg.seed);
        get_int(s, "scenario", "run_count", cfg.run_count);
    }

    if (j.contains("plant")) {
        const json& p = j.at("plant");
        check_keys(p, "plant",
                   {"a_bar", "mass", "bulk", "v_t", "k_valve", "p_supply", "stroke",
                    "cq_hat", "cqp_hat", "k_g", "d_g", "delta", "u_max",
                    "supply_flow_lpm"});
        get_num(p, "plant", "a_bar", cfg.plant.a_bar);
        get_num(p, "plant", "mass", cfg.plant.mass);
        get_num(p, "plant", "bulk", cfg.plant.bulk);
        get_num(p, "plant", "v_t", cfg.plant.v_t);
        get_num(p, "plant", "k_valve", cfg.plant.k_valve);
        get_num(p, "plant", "p_supply", cfg.plant.p_supply);
        get_num(p, "plant", "stroke", cfg.plant.stroke);
        get_num(p, "plant", "cq_hat", cfg.plant.cq_hat);
        get_num(p, "plant", "cqp_hat", cfg.plant.cqp_hat);
        get_num(p, "plant", "k_g", cfg.plant.k_g);
        get_num(p, "plant", "d_g", cfg.plant.d_g);
        get_num(p, "plant", "delta", cfg.plant.delta);
        get_num(p, "plant", "u_max", cfg.plant.u_max);
        get_num(p, "plant", "supply_flow_lpm", app.supply_flow_lpm);
    }

    if (j.contains("friction")) {
        const json& f = j.at("friction");
        check_keys(f, "friction",
                   {"variant", "k_w_position", "d_w_position", "k_w_force", "d_w_force",
                    "f_coulomb", "f_static", "v_stribeck", "sigma"});
        if (f.contains("variant")) {
            std::string v = f.at("variant").is_string() ? f.at("variant").get<std::string>()
                                                        : std::string();
            if (v == "affine")
                cfg.friction.variant = FrictionModel::Variant::affine;
            else if (v == "stribeck")
                cfg.friction.variant = FrictionModel::Variant::stribeck;
            else
                fail("friction.variant", "must be \"affine\" or \"stribeck\"");
        }
        get_num(f, "friction", "k_w_position", cfg.friction.k_w_position);
        get_num(f, "friction", "d_w_position", cfg.friction.d_w_position);
        get_num(f, "friction", "k_w_force", cfg.friction.k_w_force);
        get_num(f, "friction", "d_w_force", cfg.friction.d_w_force);
        get_num(f, "friction", "f_coulomb", cfg.friction.f_coulomb);
        get_num(f, "friction", "f_static", cfg.friction.f_static);
        get_num(f, "friction", "v_stribeck", cfg.friction.v_stribeck);
        get_num(f, "friction", "sigma", cfg.friction.sigma);
    }

    if (j.contains("environment")) {
        const json& e = j.at("environment");
        check_keys(e, "environment",
                   {"variant", "stiffness", "contact_pos", "passive_load", "standoff",
                    "track_rate", "release_speed", "pulse"});
        if (e.contains("variant")) {
            std::string v = e.at("variant").is_string() ? e.at("variant").get<std::string>()
                                                        : std::string();
            if (v == "hard_stop")
                cfg.environment.variant = Environment::Variant::hard_stop;
            else if (v == "dynamic_load")
                cfg.environment.variant = Environment::Variant::dynamic_load;
            else
                fail("environment.variant", "must be \"hard_stop\" or \"dynamic_load\"");
        }
        get_num(e, "environment", "stiffness", cfg.environment.stiffness);
        get_num(e, "environment", "contact_pos", cfg.environment.contact_pos);
        get_num(e, "environment", "passive_load", cfg.environment.passive_load);
        get_num(e, "environment", "standoff", cfg.environment.standoff);
        get_num(e, "environment", "track_rate", cfg.environment.track_rate);
        get_num(e, "environment", "release_speed", cfg.environment.release_speed);
        if (e.contains("pulse")) {
            const json& pu = e.at("pulse");
            check_keys(pu, "environment.pulse", {"start", "period", "width", "high", "low"});
            get_num(pu, "environment.pulse", "start", cfg.environment.pulse.start);
            get_num(pu, "environment.pulse", "period", cfg.environment.pulse.period);
            get_num(pu, "environment.pulse", "width", cfg.environment.pulse.width);
            get_num(pu, "environment.pulse", "high", cfg.environment.pulse.high);
            get_num(pu, "environment.pulse", "low", cfg.environment.pulse.low);
        }
    }

    if (j.contains("gains")) {
        const json& g = j.at("gains");
        check_keys(g, "gains", {"position", "force"});
        if (g.contains("position")) parse_gain(g.at("position"), "gains.position", cfg.gains_position);
        if (g.contains("force")) parse_gain(g.at("force"), "gains.force", cfg.gains_force);
    }

    // operating-point defaults chain off friction and environment, so resolve
    // them after those sections regardless of key order in the file
    cfg.op_position.k_w = cfg.friction.k_w_position;
    cfg.op_position.d_w = cfg.friction.d_w_position;
    cfg.op_position.stiffness = cfg.environment.stiffness;
    cfg.op_force.k_w = cfg.friction.k_w_force;
    cfg.op_force.d_w = cfg.friction.d_w_force;
    cfg.op_force.stiffness = cfg.environment.stiffness;
    if (j.contains("operating")) {
        const json& o = j.at("operating");
        check_keys(o, "operating", {"position", "force"});
        if (o.contains("position"))
            parse_operating(o.at("position"), "operating.position", cfg.op_position);
        if (o.contains("force"))
            parse_operating(o.at("force"), "operating.force", cfg.op_force);
    }

    if (j.contains("hysteresis")) {
        const json& h = j.at("hysteresis");
        check_keys(h, "hysteresis", {"t_hi", "t_lo", "min_dwell"});
        get_num(h, "hysteresis", "t_hi", cfg.control.hysteresis.t_hi);
        get_num(h, "hysteresis", "t_lo", cfg.control.hysteresis.t_lo);
        get_num(h, "hysteresis", "min_dwell", cfg.control.hysteresis.min_dwell);
    }

    if (j.contains("reference")) {
        const json& r = j.at("reference");
        check_keys(r, "reference", {"position", "force"});
        if (r.contains("position")) {
            const json& rp = r.at("position");
            check_keys(rp, "reference.position",
                       {"ramp_rate", "ramp_target", "sin_amp", "sin_freq_hz", "sin_start",
                        "return_to_zero", "return_rate"});
            PositionRef& pr = cfg.control.reference.position;
            get_num(rp, "reference.position", "ramp_rate", pr.ramp_rate);
            get_num(rp, "reference.position", "ramp_target", pr.ramp_target);
            get_num(rp, "reference.position", "sin_amp", pr.sin_amp);
            get_num(rp, "reference.position", "sin_freq_hz", pr.sin_freq_hz);
            get_num(rp, "reference.position", "sin_start", pr.sin_start);
            get_bool(rp, "reference.position", "return_to_zero", pr.return_to_zero);
            get_num(rp, "reference.position", "return_rate", pr.return_rate);
        }
        if (r.contains("force")) {
            const json& rf = r.at("force");
            check_keys(rf, "reference.force",
                       {"shape", "hold_value", "hold_s", "release_s", "steps"});
            ForceRef& fr = cfg.control.reference.force;
            if (rf.contains("shape")) {
                std::string v = rf.at("shape").is_string()
                                    ? rf.at("shape").get<std::string>()
                                    : std::string();
                if (v == "hold_release")
                    fr.shape = ForceRef::Shape::hold_release;
                else if (v == "steps")
                    fr.shape = ForceRef::Shape::steps;
                else
                    fail("reference.force.shape", "must be \"hold_release\" or \"steps\"");
            }
            get_num(rf, "reference.force", "hold_value", fr.hold_value);
            get_num(rf, "reference.force", "hold_s", fr.hold_s);
            get_num(rf, "reference.force", "release_s", fr.release_s);
            if (rf.contains("steps")) {
                const json& st = rf.at("steps");
                if (!st.is_array()) fail("reference.force.steps", "must be an array");
                fr.steps.clear();
                for (size_t i = 0; i < st.size(); ++i) {
                    const json& e = st[i];
                    if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
                        !e[1].is_number())
                        fail("reference.force.steps[" + std::to_string(i) + "]",
                             "must be a [duration, level] pair");
                    fr.steps.emplace_back(e[0].get<double>(), e[1].get<double>());
                }
            }
        }
    }

    if (j.contains("control")) {
        const json& c = j.at("control");
        check_keys(c, "control", {"lpf_cutoff_hz", "e_max", "decimation"});
        get_num(c, "control", "lpf_cutoff_hz", cfg.control.lpf_cutoff_hz);
        get_num(c, "control", "e_max", cfg.control.e_max);
        get_int(c, "control", "decimation", cfg.control.decimation);
    }

    if (j.contains("noise")) {
        const json& n = j.at("noise");
        check_keys(n, "noise", {"enabled", "position", "pressure", "force"});
        get_bool(n, "noise", "enabled", cfg.noise.enabled);
        get_num(n, "noise", "position", cfg.noise.position);
        get_num(n, "noise", "pressure", cfg.noise.pressure);
        get_num(n, "noise", "force", cfg.noise.force);
    }

    if (j.contains("lyapunov")) {
        const json& l = j.at("lyapunov");
        check_keys(l, "lyapunov", {"position", "force"});
        if (l.contains("position"))
            parse_weights(l.at("position"), "lyapunov.position", cfg.weights_position);
        if (l.contains("force"))
            parse_weights(l.at("force"), "lyapunov.force", cfg.weights_force);
        app.weights_given = l.contains("position") || l.contains("force");
    }

    if (j.contains("desired_poles")) {
        const json& d = j.at("desired_poles");
        check_keys(d, "desired_poles", {"position", "force"});
        if (d.contains("position"))
            app.desired_position = parse_poles(d.at("position"), "desired_poles.position");
        if (d.contains("force"))
            app.desired_force = parse_poles(d.at("force"), "desired_poles.force");
        app.desired_given = !app.desired_position.empty() || !app.desired_force.empty();
    }

    cfg.validate();
    return app;
}

AppConfig load_config(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "r");
    if (!f) throw ValidationError("config: cannot open " + path);
    std::string text;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
    std::fclose(f);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ValidationError("config: " + path + " is not valid JSON");
    return config_from_json(j);
}

json snapshot(const AppConfig& app) {
    const ScenarioConfig& cfg = app.scenario;
    json j;
    j["scenario"] = {
        {"variant",
         cfg.variant == ScenarioConfig::Variant::hard_stop ? "hard_stop" : "dynamic_env"},
        {"duration", cfg.duration},
        {"dt", cfg.dt},
        {"log_decimation", cfg.log_decimation},
        {"seed", cfg.seed},
        {"run_count", cfg.run_count}};
    j["plant"] = {{"a_bar", cfg.plant.a_bar},
                  {"mass", cfg.plant.mass},
                  {"bulk", cfg.plant.bulk},
                  {"v_t", cfg.plant.v_t},
                  {"k_valve", cfg.plant.k_valve},
                  {"p_supply", cfg.plant.p_supply},
                  {"stroke", cfg.plant.stroke},
                  {"cq_hat", cfg.plant.cq_hat},
                  {"cqp_hat", cfg.plant.cqp_hat},
                  {"k_g", cfg.plant.k_g},
                  {"d_g", cfg.plant.d_g},
                  {"delta", cfg.plant.delta},
                  {"u_max", cfg.plant.u_max},
                  {"supply_flow_lpm", app.supply_flow_lpm}};
    j["friction"] = {
        {"variant",
         cfg.friction.variant == FrictionModel::Variant::affine ? "affine" : "stribeck"},
        {"k_w_position", cfg.friction.k_w_position},
        {"d_w_position", cfg.friction.d_w_position},
        {"k_w_force", cfg.friction.k_w_force},
        {"d_w_force", cfg.friction.d_w_force},
        {"f_coulomb", cfg.friction.f_coulomb},
        {"f_static", cfg.friction.f_static},
        {"v_stribeck", cfg.friction.v_stribeck},
        {"sigma", cfg.friction.sigma}};
    j["environment"] = {
        {"variant", cfg.environment.variant == Environment::Variant::hard_stop
                        ? "hard_stop"
                        : "dynamic_load"},
        {"stiffness", cfg.environment.stiffness},
        {"contact_pos", cfg.environment.contact_pos},
        {"passive_load", cfg.environment.passive_load},
        {"standoff", cfg.environment.standoff},
        {"track_rate", cfg.environment.track_rate},
        {"release_speed", cfg.environment.release_speed},
        {"pulse",
         {{"start", cfg.environment.pulse.start},
          {"period", cfg.environment.pulse.period},
          {"width", cfg.environment.pulse.width},
          {"high", cfg.environment.pulse.high},
          {"low", cfg.environment.pulse.low}}}};
    auto gain_json = [](const GainVector& g) {
        return json{{"k1", g.k1}, {"k2", g.k2}, {"k3", g.k3}, {"k4", g.k4}, {"ki", g.ki}};
    };
    j["gains"] = {{"position", gain_json(cfg.gains_position)},
                  {"force", gain_json(cfg.gains_force)}};
    auto op_json = [](const OperatingPoint& op) {
        return json{{"omega", op.omega},
                    {"k_w", op.k_w},
                    {"d_w", op.d_w},
                    {"stiffness", op.stiffness}};
    };
    j["operating"] = {{"position", op_json(cfg.op_position)},
                      {"force", op_json(cfg.op_force)}};
    j["hysteresis"] = {{"t_hi", cfg.control.hysteresis.t_hi},
                       {"t_lo", cfg.control.hysteresis.t_lo},
                       {"min_dwell", cfg.control.hysteresis.min_dwell}};
    const PositionRef& pr = cfg.control.reference.position;
    const ForceRef& fr = cfg.control.reference.force;
    json steps = json::array();
    for (const auto& s : fr.steps) steps.push_back({s.first, s.second});
    j["reference"] = {
        {"position",
         {{"ramp_rate", pr.ramp_rate},
          {"ramp_target", pr.ramp_target},
          {"sin_amp", pr.sin_amp},
          {"sin_freq_hz", pr.sin_freq_hz},
          {"sin_start", pr.sin_start},
          {"return_to_zero", pr.return_to_zero},
          {"return_rate", pr.return_rate}}},
        {"force",
         {{"shape", fr.shape == ForceRef::Shape::hold_release ? "hold_release" : "steps"},
          {"hold_value", fr.hold_value},
          {"hold_s", fr.hold_s},
          {"release_s", fr.release_s},
          {"steps", steps}}}};
    j["control"] = {{"lpf_cutoff_hz", cfg.control.lpf_cutoff_hz},
                    {"e_max", cfg.control.e_max},
                    {"decimation", cfg.control.decimation}};
    j["noise"] = {{"enabled", cfg.noise.enabled},
                  {"position", cfg.noise.position},
                  {"pressure", cfg.noise.pressure},
                  {"force", cfg.noise.force}};
    j["lyapunov"] = {
        {"position",
         {cfg.weights_position.w1, cfg.weights_position.w2, cfg.weights_position.w3}},
        {"force", {cfg.weights_force.w1, cfg.weights_force.w2, cfg.weights_force.w3}}};
    if (app.desired_given) {
        json d;
        if (!app.desired_position.empty()) d["position"] = dump_poles(app.desired_position);
        if (!app.desired_force.empty()) d["force"] = dump_poles(app.desired_force);
        j["desired_poles"] = d;
    }
    return j;
}

void write_manifest(const AppConfig& cfg, const std::string& config_path,
                    const std::string& out_dir) {
    json m;
    m["config_path"] = config_path;
    m["config"] = snapshot(cfg);
    m["version"] = kVersion;
    m["seed"] = cfg.scenario.seed;
    m["output_dir"] = out_dir;
    std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["generated_at"] = stamp;
    std::string path = out_dir + "/manifest.json";
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ValidationError("manifest: cannot open " + path);
    std::string dump = m.dump(2);
    std::fwrite(dump.data(), 1, dump.size(), f);
    std::fputc('\n', f);
    std::fclose(f);
}

}  // namespace hpfc
