#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hpfc/config.hpp"
#include "hpfc/errors.hpp"
#include "hpfc/gain_synthesis.hpp"
#include "hpfc/lyapunov.hpp"
#include "hpfc/scenario.hpp"

namespace {

using hpfc::Mode;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIntegration = 4;
constexpr int kExitVerdict = 5;

json poles_json(const hpfc::CVec& poles) {
    json out = json::array();
    for (const auto& z : poles) out.push_back({z.real(), z.imag()});
    return out;
}

json report_json(const hpfc::GainVector& g, const hpfc::GainReport& rep) {
    return json{{"gains", {{"k1", g.k1}, {"k2", g.k2}, {"k3", g.k3}, {"k4", g.k4}, {"ki", g.ki}}},
                {"poles", poles_json(rep.poles)},
                {"poles_dynamic", poles_json(rep.poles_dynamic)},
                {"all_stable", rep.all_stable},
                {"dc_gain", rep.dc_gain},
                {"bandwidth_hz", rep.bandwidth},
                {"structural_zero", rep.structural_zero},
                {"slow_complex_pair", rep.slow_complex_pair}};
}

void print_report(const char* name, const hpfc::GainVector& g, const hpfc::GainReport& rep) {
    std::printf("[%s] gains k1=%g k2=%g k3=%g k4=%g ki=%g\n", name, g.k1, g.k2, g.k3,
                g.k4, g.ki);
    std::printf("[%s] poles:", name);
    for (const auto& z : rep.poles) std::printf(" (%.6g%+.6gj)", z.real(), z.imag());
    std::printf("\n[%s] stable=%s dc_gain=%.9g bandwidth=%.4g Hz\n", name,
                rep.all_stable ? "yes" : "no", rep.dc_gain, rep.bandwidth);
    if (rep.slow_complex_pair)
        std::printf("[%s] warning: dominant pole pair is oscillatory\n", name);
}

int cmd_gains(const std::string& config_path, const std::string& out_dir) {
    hpfc::AppConfig app = hpfc::load_config(config_path);
    const hpfc::ScenarioConfig& cfg = app.scenario;
    json out;
    for (Mode h : {Mode::position, Mode::force}) {
        const char* name = hpfc::mode_name(h);
        hpfc::GainVector g = cfg.gains(h);
        const hpfc::CVec& desired =
            h == Mode::position ? app.desired_position : app.desired_force;
        if (!desired.empty()) {
            hpfc::OpenLoopAug ol = hpfc::open_loop_augmented(cfg.plant, cfg.op(h), h);
            g = hpfc::synthesize_gains(ol, desired, h);
            std::printf("[%s] synthesized from %zu requested poles\n", name,
                        desired.size());
        }
        hpfc::GainReport rep = hpfc::verify_gains(g, h, cfg.plant, cfg.op(h));
        print_report(name, g, rep);
        out[name] = report_json(g, rep);
    }
    std::printf("%s\n", out.dump(2).c_str());
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::string path = out_dir + "/gains.json";
        FILE* f = std::fopen(path.c_str(), "w");
        if (!f) throw hpfc::ValidationError("cannot open " + path);
        std::string dump = out.dump(2);
        std::fwrite(dump.data(), 1, dump.size(), f);
        std::fputc('\n', f);
        std::fclose(f);
        hpfc::write_manifest(app, config_path, out_dir);
    }
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 uint64_t seed, bool seed_given, int runs, bool runs_given) {
    hpfc::AppConfig app = hpfc::load_config(config_path);
    hpfc::ScenarioConfig& cfg = app.scenario;
    if (seed_given) cfg.seed = seed;
    if (runs_given) cfg.run_count = runs;
    std::filesystem::create_directories(out_dir);
    hpfc::write_manifest(app, config_path, out_dir);

    if (cfg.run_count == 1) {
        hpfc::TrajectoryLog log = hpfc::run_scenario(cfg);
        hpfc::export_log(log, out_dir + "/trajectory.csv");
        std::printf("simulated %.6g s, %zu samples, %zu switch events\n", cfg.duration,
                    log.rows.size(), log.events.size());
        for (const auto& ev : log.events)
            std::printf("  t=%.4f s: %s -> %s (entry level %.6g)\n", ev.t,
                        hpfc::mode_name(ev.from), hpfc::mode_name(ev.to), ev.level);
        if (!log.rows.empty()) {
            const auto& last = log.rows.back();
            std::printf("final: x=%.6g m, F_L=%.6g N, mode=%+d\n", last.x, last.f_l,
                        last.h);
        }
        if (log.pressure_clamps > 0)
            std::printf("load pressure clamped %d times\n", log.pressure_clamps);
        if (log.partial) {
            std::fprintf(stderr, "integration stopped early: %s\n", log.error.c_str());
            return kExitIntegration;
        }
        return kExitOk;
    }

    hpfc::RepeatResult stats = hpfc::repeat_runs(cfg);
    hpfc::export_stats(stats, out_dir);
    std::printf("aggregated %d runs (%d failed)\n", cfg.run_count, stats.failed_runs);
    if (stats.partial) {
        std::fprintf(stderr, "some runs stopped early; statistics are partial\n");
        return kExitIntegration;
    }
    return kExitOk;
}

int cmd_lyapunov(const std::string& log_path, const std::string& config_path,
                 const std::string& weights_str, const std::string& out_dir) {
    hpfc::TrajectoryLog log = hpfc::import_log(log_path);
    hpfc::AppConfig app = hpfc::load_config(config_path);
    const hpfc::ScenarioConfig& cfg = app.scenario;

    hpfc::SequenceVerdict verdict = hpfc::check_mode_sequence(log.events);

    json out;
    out["nonincreasing"] = verdict.nonincreasing;
    out["position_levels"] = verdict.position_levels;
    out["force_levels"] = verdict.force_levels;
    if (!verdict.nonincreasing) {
        out["violation_mode"] = hpfc::mode_name(verdict.violation_mode);
        out["violation_index"] = verdict.violation_index;
    }

    for (Mode h : {Mode::position, Mode::force}) {
        const char* name = hpfc::mode_name(h);
        hpfc::ModeSystem sys =
            hpfc::build_closed_loop(cfg.plant, cfg.gains(h), h, cfg.op(h));
        hpfc::LyapunovWeights w;
        std::string source;
        if (!weights_str.empty()) {
            double w1, w2, w3;
            if (std::sscanf(weights_str.c_str(), "%lf,%lf,%lf", &w1, &w2, &w3) != 3)
                throw hpfc::ValidationError("--weights must be \"w1,w2,w3\"");
            w = {w1, w2, w3};
            w.validate();
            source = "flag";
        } else if (app.weights_given) {
            w = cfg.weights(h);
            source = "config";
        } else {
            hpfc::WeightSearchResult sr = hpfc::search_weights(sys.a_bar, h);
            w = sr.weights;
            source = "searched";
        }
        hpfc::DecreaseReport rep = hpfc::verify_decrease(w, sys.a_bar, h, 4000);
        out[name] = {{"weights", {w.w1, w.w2, w.w3}},
                     {"weights_source", source},
                     {"fraction_decreasing", rep.fraction_decreasing},
                     {"worst_dLdt", rep.worst},
                     {"samples", rep.samples}};
        std::printf("[%s] weights (%s): %.6g %.6g %.6g; decreasing fraction %.4f\n", name,
                    source.c_str(), w.w1, w.w2, w.w3, rep.fraction_decreasing);
    }

    std::printf("switch-level sequences nonincreasing: %s\n",
                verdict.nonincreasing ? "yes" : "NO");
    std::printf("%s\n", out.dump(2).c_str());
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::string path = out_dir + "/verdict.json";
        FILE* f = std::fopen(path.c_str(), "w");
        if (!f) throw hpfc::ValidationError("cannot open " + path);
        std::string dump = out.dump(2);
        std::fwrite(dump.data(), 1, dump.size(), f);
        std::fputc('\n', f);
        std::fclose(f);
    }
    return verdict.nonincreasing ? kExitOk : kExitVerdict;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hydraulic position/force control: synthesis, simulation, analysis"};
    app.require_subcommand(1);

    std::string config_path, out_dir, log_path, weights_str;
    uint64_t seed = 0;
    int runs = 0;

    CLI::App* sc_gains = app.add_subcommand("gains", "verify or synthesize feedback gains");
    sc_gains->add_option("--config", config_path, "JSON configuration")->required();
    sc_gains->add_option("--out", out_dir, "directory for gains.json + manifest");

    CLI::App* sc_sim = app.add_subcommand("simulate", "run the switched closed loop");
    sc_sim->add_option("--config", config_path, "JSON configuration")->required();
    sc_sim->add_option("--out", out_dir, "output directory")->required();
    CLI::Option* opt_seed = sc_sim->add_option("--seed", seed, "master seed override");
    CLI::Option* opt_runs = sc_sim->add_option("--runs", runs, "run count override");

    CLI::App* sc_lyap = app.add_subcommand("lyapunov", "switching-stability verdict on a log");
    sc_lyap->add_option("--log", log_path, "trajectory CSV")->required();
    sc_lyap->add_option("--config", config_path, "JSON configuration")->required();
    sc_lyap->add_option("--weights", weights_str, "fixed weights \"w1,w2,w3\"");
    sc_lyap->add_option("--out", out_dir, "directory for verdict.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (sc_gains->parsed()) return cmd_gains(config_path, out_dir);
        if (sc_sim->parsed())
            return cmd_simulate(config_path, out_dir, seed, opt_seed->count() > 0, runs,
                                opt_runs->count() > 0);
        if (sc_lyap->parsed())
            return cmd_lyapunov(log_path, config_path, weights_str, out_dir);
    } catch (const hpfc::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const hpfc::IntegrationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIntegration;
    } catch (const hpfc::NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return kExitValidation;
}
