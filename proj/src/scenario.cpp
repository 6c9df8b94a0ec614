#include "hpfc/scenario.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hpfc/errors.hpp"
#include "hpfc/gain_synthesis.hpp"
#include "hpfc/numerics.hpp"
#include "hpfc/rng.hpp"

namespace hpfc {

void NoiseConfig::validate() const {
    if (!(position >= 0.0 && pressure >= 0.0 && force >= 0.0))
        throw ValidationError("noise stds must be >= 0");
}

void ScenarioConfig::validate() const {
    if (!(duration > 0.0)) throw ValidationError("scenario.duration must be > 0");
    if (!(dt > 0.0)) throw ValidationError("scenario.dt must be > 0");
    if (log_decimation < 1) throw ValidationError("scenario.log_decimation must be >= 1");
    if (run_count < 1) throw ValidationError("scenario.run_count must be >= 1");
    plant.validate();
    friction.validate();
    environment.validate(plant.stroke);
    bool env_dynamic = environment.variant == Environment::Variant::dynamic_load;
    if ((variant == Variant::dynamic_env) != env_dynamic)
        throw ValidationError("scenario.variant inconsistent with environment.variant");
    gains_position.validate(Mode::position);
    gains_force.validate(Mode::force);
    control.validate(dt);
    weights_position.validate();
    weights_force.validate();
    noise.validate();
}

static void require_stable_gains(const ScenarioConfig& cfg) {
    for (Mode h : {Mode::position, Mode::force}) {
        GainReport rep = verify_gains(cfg.gains(h), h, cfg.plant, cfg.op(h));
        if (!rep.all_stable)
            throw ValidationError(std::string("gains: ") + mode_name(h) +
                                  " closed loop is not stable; refusing to simulate");
    }
}

TrajectoryLog run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    require_stable_gains(cfg);

    const double dt = cfg.dt;
    const long steps = static_cast<long>(std::llround(cfg.duration / dt));
    const Environment& env = cfg.environment;
    bool dynamic = env.variant == Environment::Variant::dynamic_load;

    TrajectoryLog log;
    log.rows.reserve(static_cast<size_t>(steps / cfg.log_decimation) + 2);

    PlantState s;
    double x_w = dynamic ? env.standoff : 0.0;
    ControllerState ctrl;
    GaussianGen noise_gen(cfg.seed);
    const bool noisy = cfg.noise.active();
    const double p_cap = 0.999 * cfg.plant.p_supply;
    bool clamp_warned = false;
    int activations_pos = 0, activations_force = 0;

    for (long i = 0; i < steps; ++i) {
        double t = static_cast<double>(i) * dt;
        s.f_l = env_force(env, s.x, x_w);

        PlantState meas = s;
        if (noisy) {
            meas.x += cfg.noise.position * noise_gen.next();
            meas.p_l += cfg.noise.pressure * noise_gen.next();
            meas.f_l += cfg.noise.force * noise_gen.next();
        }

        StepResult sr = controller_step(meas, t, dt, cfg.gains_position, cfg.gains_force,
                                        cfg.plant, cfg.control, ctrl);
        if (sr.switched) {
            SwitchEvent ev;
            ev.t = t;
            ev.from = sr.from;
            ev.to = sr.to;
            double y = sr.to == Mode::position ? s.x : s.f_l;
            ev.level = lyapunov_value(s, sr.r, y, cfg.weights(sr.to), sr.to);
            ev.activation_index =
                sr.to == Mode::position ? activations_pos++ : activations_force++;
            log.events.push_back(ev);
        }

        if (i % cfg.log_decimation == 0) {
            double y = ctrl.h == Mode::position ? s.x : s.f_l;
            LogRow row{t,    s.x,  s.v,      s.p_l,       s.f_l,
                       sr.e, mode_sign(ctrl.h), sr.r, sr.u_raw, sr.u_valve,
                       lyapunov_value(s, sr.r, y, cfg.weights(ctrl.h), ctrl.h)};
            log.rows.push_back(row);
        }

        Vec y4 = {s.x, s.v, s.p_l, x_w};
        auto deriv = [&](const Vec& yv, double tt) -> Vec {
            PlantState ps{yv[0], yv[1], yv[2], 0.0};
            Vec pd = plant_derivative(ps, sr.u_valve, env, cfg.plant, cfg.friction,
                                      ctrl.h, yv[3]);
            double wall = dynamic
                              ? env_wall_rate(env, tt, yv[3], env_force(env, yv[0], yv[3]))
                              : 0.0;
            return {pd[0], pd[1], pd[2], wall};
        };
        try {
            y4 = integrate_rk4(deriv, y4, t, dt);
        } catch (const IntegrationError& e) {
            log.partial = true;
            log.error = e.what();
            break;
        } catch (const PressureLimitError& e) {
            log.partial = true;
            log.error = e.what();
            break;
        }
        s.x = y4[0];
        s.v = y4[1];
        s.p_l = y4[2];
        x_w = y4[3];
        if (std::fabs(s.p_l) > p_cap) {  // relief-valve bound on load pressure
            s.p_l = std::copysign(p_cap, s.p_l);
            ++log.pressure_clamps;
            if (!clamp_warned) {
                log_warning("run_scenario: load pressure clamped to relief bound at t=" +
                            std::to_string(t));
                clamp_warned = true;
            }
        }
    }
    return log;
}

// ---------------------------------------------------------------------------
// statistics across repeated runs
// ---------------------------------------------------------------------------

Biquad::Biquad(double f_c, double f_s) {
    if (!(f_c > 0.0) || !(f_s > 2.0 * f_c))
        throw ValidationError("Biquad: need 0 < f_c < f_s/2");
    double k = std::tan(std::numbers::pi * f_c / f_s);
    const double q = 1.0 / std::sqrt(2.0);
    double norm = 1.0 / (1.0 + k / q + k * k);
    b0_ = k * k * norm;
    b1_ = 2.0 * b0_;
    b2_ = b0_;
    a1_ = 2.0 * (k * k - 1.0) * norm;
    a2_ = (1.0 - k / q + k * k) * norm;
}

void Biquad::reset(double steady_input) {
    // state such that a constant input passes through unchanged (unity DC gain)
    double y = steady_input;
    s2_ = b2_ * steady_input - a2_ * y;
    s1_ = b1_ * steady_input - a1_ * y + s2_;
}

double Biquad::step(double x) {
    double y = b0_ * x + s1_;
    s1_ = b1_ * x - a1_ * y + s2_;
    s2_ = b2_ * x - a2_ * y;
    return y;
}

RepeatResult repeat_runs(const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.run_count < 2)
        throw ValidationError("repeat_runs: run_count must be >= 2 for deviations");

    std::vector<std::future<TrajectoryLog>> futs;
    futs.reserve(static_cast<size_t>(cfg.run_count));
    for (int rix = 0; rix < cfg.run_count; ++rix) {
        ScenarioConfig sub = cfg;
        sub.seed = derive_run_seed(cfg.seed, static_cast<uint64_t>(rix));
        sub.run_count = 1;
        futs.push_back(std::async(std::launch::async,
                                  [sub]() { return run_scenario(sub); }));
    }
    std::vector<TrajectoryLog> logs;
    logs.reserve(futs.size());
    for (auto& f : futs) logs.push_back(f.get());

    RepeatResult out;
    size_t n_samples = std::numeric_limits<size_t>::max();
    for (const TrajectoryLog& lg : logs) {
        if (lg.partial) {
            out.partial = true;
            ++out.failed_runs;
        }
        n_samples = std::min(n_samples, lg.rows.size());
    }
    if (n_samples == 0 || n_samples == std::numeric_limits<size_t>::max())
        throw NumericError("repeat_runs: no complete samples to aggregate");

    const double f_s = 1.0 / (cfg.dt * cfg.log_decimation);
    const double f_c = 100.0;  // statistics filter cutoff [Hz]

    // filtered error per run, plus the run's mode at each sample
    size_t n_runs = logs.size();
    std::vector<Vec> err(n_runs, Vec(n_samples));
    std::vector<std::vector<int>> mode(n_runs, std::vector<int>(n_samples));
    for (size_t rix = 0; rix < n_runs; ++rix) {
        Biquad filt(f_c, f_s);
        int prev_h = 0;
        for (size_t i = 0; i < n_samples; ++i) {
            const LogRow& row = logs[rix].rows[i];
            double y = row.h == -1 ? row.x : row.f_l;
            double e_raw = row.r - y;
            if (row.h != prev_h) {  // new mode segment: restart the filter settled
                filt.reset(e_raw);
                prev_h = row.h;
            }
            err[rix][i] = filt.step(e_raw);
            mode[rix][i] = row.h;
        }
    }

    auto aggregate = [&](int want_h) {
        ErrorStats st;
        st.t.resize(n_samples);
        st.mean_abs.resize(n_samples);
        st.stddev.resize(n_samples);
        st.count.resize(n_samples);
        for (size_t i = 0; i < n_samples; ++i) {
            st.t[i] = logs[0].rows[i].t;
            // Welford update: identical samples must report exactly zero
            // spread, which the sum-of-squares form cannot guarantee
            double sum_abs = 0.0, mean = 0.0, m2 = 0.0;
            int n = 0;
            for (size_t rix = 0; rix < n_runs; ++rix) {
                if (mode[rix][i] != want_h) continue;
                double v = err[rix][i];
                sum_abs += std::fabs(v);
                ++n;
                double d = v - mean;
                mean += d / n;
                m2 += d * (v - mean);
            }
            st.count[i] = n;
            if (n == 0) {
                st.mean_abs[i] = std::numeric_limits<double>::quiet_NaN();
                st.stddev[i] = std::numeric_limits<double>::quiet_NaN();
            } else {
                st.mean_abs[i] = sum_abs / n;
                st.stddev[i] = n >= 2 ? std::sqrt(std::max(m2, 0.0) / (n - 1)) : 0.0;
            }
        }
        return st;
    };
    out.position = aggregate(-1);
    out.force = aggregate(+1);
    return out;
}

// ---------------------------------------------------------------------------
// CSV / JSON persistence
// ---------------------------------------------------------------------------

static const char* kHeader = "t,x,v,P_L,F_L,e,h,r,u_raw,u_valve,L";

static std::string events_path_for(const std::string& csv_path) {
    std::string base = csv_path;
    if (base.size() > 4 && base.compare(base.size() - 4, 4, ".csv") == 0)
        base.resize(base.size() - 4);
    return base + "_events.json";
}

void export_log(const TrajectoryLog& log, const std::string& csv_path) {
    FILE* f = std::fopen(csv_path.c_str(), "w");
    if (!f) throw ValidationError("export_log: cannot open " + csv_path);
    std::fprintf(f, "%s\n", kHeader);
    for (const LogRow& r : log.rows)
        std::fprintf(f,
                     "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n",
                     r.t, r.x, r.v, r.p_l, r.f_l, r.e, r.h, r.r, r.u_raw, r.u_valve,
                     r.lyap);
    if (std::ferror(f)) {
        std::fclose(f);
        throw ValidationError("export_log: write failed for " + csv_path);
    }
    std::fclose(f);

    nlohmann::json j;
    j["events"] = nlohmann::json::array();
    for (const SwitchEvent& ev : log.events)
        j["events"].push_back({{"t", ev.t},
                               {"from", mode_sign(ev.from)},
                               {"to", mode_sign(ev.to)},
                               {"level", ev.level},
                               {"activation_index", ev.activation_index}});
    j["partial"] = log.partial;
    j["error"] = log.error;
    j["pressure_clamps"] = log.pressure_clamps;
    std::string epath = events_path_for(csv_path);
    FILE* fe = std::fopen(epath.c_str(), "w");
    if (!fe) throw ValidationError("export_log: cannot open " + epath);
    std::string dump = j.dump(2);
    std::fwrite(dump.data(), 1, dump.size(), fe);
    std::fputc('\n', fe);
    std::fclose(fe);
}

TrajectoryLog import_log(const std::string& csv_path) {
    FILE* f = std::fopen(csv_path.c_str(), "r");
    if (!f) throw ValidationError("import_log: cannot open " + csv_path);
    TrajectoryLog log;
    char line[1024];
    if (!std::fgets(line, sizeof line, f)) {
        std::fclose(f);
        throw ValidationError("import_log: empty file " + csv_path);
    }
    line[std::strcspn(line, "\r\n")] = '\0';
    if (std::strcmp(line, kHeader) != 0) {
        std::fclose(f);
        throw ValidationError("import_log: unexpected header in " + csv_path);
    }
    while (std::fgets(line, sizeof line, f)) {
        LogRow r;
        int got = std::sscanf(line, "%lf,%lf,%lf,%lf,%lf,%lf,%d,%lf,%lf,%lf,%lf", &r.t,
                              &r.x, &r.v, &r.p_l, &r.f_l, &r.e, &r.h, &r.r, &r.u_raw,
                              &r.u_valve, &r.lyap);
        if (got != 11) {
            std::fclose(f);
            throw ValidationError("import_log: malformed row in " + csv_path);
        }
        log.rows.push_back(r);
    }
    std::fclose(f);

    std::string epath = events_path_for(csv_path);
    FILE* fe = std::fopen(epath.c_str(), "r");
    if (fe) {
        std::string text;
        char buf[4096];
        size_t n;
        while ((n = std::fread(buf, 1, sizeof buf, fe)) > 0) text.append(buf, n);
        std::fclose(fe);
        nlohmann::json j = nlohmann::json::parse(text);
        for (const auto& je : j.at("events")) {
            SwitchEvent ev;
            ev.t = je.at("t").get<double>();
            ev.from = mode_from_sign(je.at("from").get<int>());
            ev.to = mode_from_sign(je.at("to").get<int>());
            ev.level = je.at("level").get<double>();
            ev.activation_index = je.at("activation_index").get<int>();
            log.events.push_back(ev);
        }
        log.partial = j.value("partial", false);
        log.error = j.value("error", std::string());
        log.pressure_clamps = j.value("pressure_clamps", 0);
        return log;
    }

    // no sibling events file: reconstruct from mode transitions in the rows
    int act_pos = 0, act_force = 0;
    for (size_t i = 1; i < log.rows.size(); ++i) {
        if (log.rows[i].h != log.rows[i - 1].h) {
            SwitchEvent ev;
            ev.t = log.rows[i].t;
            ev.from = mode_from_sign(log.rows[i - 1].h);
            ev.to = mode_from_sign(log.rows[i].h);
            ev.level = log.rows[i].lyap;
            ev.activation_index = log.rows[i].h == -1 ? act_pos++ : act_force++;
            log.events.push_back(ev);
        }
    }
    return log;
}

void export_stats(const RepeatResult& stats, const std::string& dir) {
    auto write_one = [&](const ErrorStats& st, const std::string& name) {
        std::string path = dir + "/" + name;
        FILE* f = std::fopen(path.c_str(), "w");
        if (!f) throw ValidationError("export_stats: cannot open " + path);
        std::fprintf(f, "t,mean_abs,std\n");
        for (size_t i = 0; i < st.t.size(); ++i)
            std::fprintf(f, "%.17g,%.17g,%.17g\n", st.t[i], st.mean_abs[i], st.stddev[i]);
        std::fclose(f);
    };
    write_one(stats.position, "stats_position.csv");
    write_one(stats.force, "stats_force.csv");
}

}  // namespace hpfc
