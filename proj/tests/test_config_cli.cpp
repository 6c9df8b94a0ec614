#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include <json.hpp>

#include "hpfc/config.hpp"
#include "hpfc/errors.hpp"
#include "hpfc/scenario.hpp"

using namespace hpfc;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(HPFC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& text) {
    FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

bool file_exists(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "r");
    if (!f) return false;
    std::fclose(f);
    return true;
}

void wipe_dir(const std::string& path) {
    int rc = std::system(("rm -rf " + path).c_str());
    (void)rc;
}

// short free-motion setup: keeps CLI simulate invocations fast
json quick_sim_json() {
    json j;
    j["scenario"] = {{"duration", 0.05}, {"log_decimation", 10}};
    j["gains"] = {
        {"position",
         {{"k1", 190.0}, {"k2", 9.019e-4}, {"k3", 30.539e-9}, {"ki", 5000.0}}},
        {"force", {{"k2", 2.5e-4}, {"k3", 5.9e-8}, {"k4", 5e-5}, {"ki", 1.2e-3}}}};
    return j;
}

}  // namespace

TEST_CASE("an empty document materializes every default") {
    AppConfig app = config_from_json(json::object());
    const ScenarioConfig& cfg = app.scenario;

    CHECK(cfg.variant == ScenarioConfig::Variant::hard_stop);
    CHECK(cfg.duration == 10.0);
    CHECK(cfg.dt == 1e-5);
    CHECK(cfg.log_decimation == 100);
    CHECK(cfg.seed == 1);
    CHECK(cfg.run_count == 1);
    CHECK(cfg.plant.a_bar == 0.001);
    CHECK(cfg.plant.p_supply == 1e7);
    CHECK(cfg.control.lpf_cutoff_hz == 50.0);
    CHECK(cfg.control.hysteresis.t_hi == 3300.0);

    // operating points chain off friction and environment defaults
    CHECK(cfg.op_position.omega == 2230.0);
    CHECK(cfg.op_position.k_w == cfg.friction.k_w_position);
    CHECK(cfg.op_position.d_w == cfg.friction.d_w_position);
    CHECK(cfg.op_force.k_w == cfg.friction.k_w_force);
    CHECK(cfg.op_position.stiffness == cfg.environment.stiffness);

    CHECK_FALSE(app.weights_given);
    CHECK_FALSE(app.desired_given);
    CHECK(app.supply_flow_lpm == 40.0);
}

TEST_CASE("operating points follow explicit friction sections") {
    json j;
    j["friction"] = {{"k_w_position", 2000.0}, {"d_w_position", 11.0}};
    AppConfig app = config_from_json(j);
    CHECK(app.scenario.op_position.k_w == 2000.0);
    CHECK(app.scenario.op_position.d_w == 11.0);

    // an explicit operating section overrides the chained default
    j["operating"] = {{"position", {{"k_w", 1234.0}}}};
    app = config_from_json(j);
    CHECK(app.scenario.op_position.k_w == 1234.0);
    CHECK(app.scenario.op_position.d_w == 11.0);
}

TEST_CASE("snapshot reproduces the configuration exactly") {
    AppConfig a = load_config(HPFC_CONFIG_DIR "/scenario_a.json");
    json snap1 = snapshot(a);
    AppConfig b = config_from_json(snap1);
    json snap2 = snapshot(b);
    CHECK(snap1 == snap2);

    CHECK(b.scenario.gains_position.k1 == 190.0);
    CHECK(b.scenario.weights_position.w1 == a.scenario.weights_position.w1);
    CHECK(b.weights_given);

    // defaults survive the same loop
    AppConfig d = config_from_json(json::object());
    CHECK(snapshot(config_from_json(snapshot(d))) == snapshot(d));
}

TEST_CASE("the shipped scenarios parse to their distinct setups") {
    AppConfig a = load_config(HPFC_CONFIG_DIR "/scenario_a.json");
    CHECK(a.scenario.variant == ScenarioConfig::Variant::hard_stop);
    CHECK(a.scenario.environment.contact_pos == 0.06);
    CHECK(a.weights_given);
    CHECK(a.scenario.control.reference.force.shape == ForceRef::Shape::hold_release);

    AppConfig b = load_config(HPFC_CONFIG_DIR "/scenario_b.json");
    CHECK(b.scenario.variant == ScenarioConfig::Variant::dynamic_env);
    CHECK(b.scenario.environment.variant == Environment::Variant::dynamic_load);
    CHECK(b.scenario.control.reference.force.shape == ForceRef::Shape::steps);
    REQUIRE(b.scenario.control.reference.force.steps.size() == 3);
    CHECK(b.scenario.control.reference.force.steps[1].second == 4500.0);
    CHECK(b.scenario.control.hysteresis.min_dwell == 0.6);
}

TEST_CASE("unknown keys are rejected with their dotted path") {
    CHECK_THROWS_WITH_AS(config_from_json({{"bogus", json::object()}}),
                         doctest::Contains("(root) has unknown key 'bogus'"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(config_from_json({{"plant", {{"masss", 1.0}}}}),
                         doctest::Contains("plant has unknown key 'masss'"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(
        config_from_json({{"environment", {{"pulse", {{"hi", 1.0}}}}}}),
        doctest::Contains("environment.pulse has unknown key 'hi'"), ValidationError);
    CHECK_THROWS_WITH_AS(
        config_from_json({{"reference", {{"position", {{"rate", 1.0}}}}}}),
        doctest::Contains("reference.position has unknown key 'rate'"), ValidationError);
}

TEST_CASE("type mismatches name the offending field") {
    CHECK_THROWS_WITH_AS(config_from_json({{"scenario", {{"duration", "long"}}}}),
                         doctest::Contains("scenario.duration must be a number"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(config_from_json({{"scenario", {{"log_decimation", 2.5}}}}),
                         doctest::Contains("must be an integer"), ValidationError);
    CHECK_THROWS_WITH_AS(config_from_json({{"scenario", {{"seed", -3}}}}),
                         doctest::Contains("non-negative"), ValidationError);
    CHECK_THROWS_WITH_AS(config_from_json({{"noise", {{"enabled", 1}}}}),
                         doctest::Contains("must be a boolean"), ValidationError);
    CHECK_THROWS_WITH_AS(config_from_json({{"lyapunov", {{"position", {1.0, 2.0}}}}}),
                         doctest::Contains("[w1, w2, w3]"), ValidationError);
    CHECK_THROWS_WITH_AS(
        config_from_json({{"desired_poles", {{"position", {"fast"}}}}}),
        doctest::Contains("must be a number or [re, im] pair"), ValidationError);
}

TEST_CASE("enumerated variants are spelled out") {
    CHECK_THROWS_WITH_AS(config_from_json({{"scenario", {{"variant", "soft_stop"}}}}),
                         doctest::Contains("hard_stop"), ValidationError);
    CHECK_THROWS_WITH_AS(config_from_json({{"friction", {{"variant", "coulomb"}}}}),
                         doctest::Contains("stribeck"), ValidationError);
    CHECK_THROWS_WITH_AS(
        config_from_json({{"reference", {{"force", {{"shape", "spike"}}}}}}),
        doctest::Contains("hold_release"), ValidationError);

    // cross-field consistency still applies after parsing
    CHECK_THROWS_WITH_AS(config_from_json({{"scenario", {{"variant", "dynamic_env"}}}}),
                         doctest::Contains("inconsistent"), ValidationError);
}

TEST_CASE("desired poles accept scalars and pairs") {
    json j;
    j["desired_poles"] = {
        {"position", {-10.0, json::array({-5.0, 3.0}), json::array({-5.0, -3.0}), -20.0}}};
    AppConfig app = config_from_json(j);
    CHECK(app.desired_given);
    REQUIRE(app.desired_position.size() == 4);
    CHECK(app.desired_position[0] == Cplx(-10.0, 0.0));
    CHECK(app.desired_position[1] == Cplx(-5.0, 3.0));
    CHECK(app.desired_force.empty());

    // snapshot carries them through the loop
    AppConfig back = config_from_json(snapshot(app));
    CHECK(back.desired_position == app.desired_position);
}

TEST_CASE("the manifest records version, seed, and the full snapshot") {
    AppConfig app = load_config(HPFC_CONFIG_DIR "/scenario_a.json");
    write_manifest(app, "somewhere/config.json", "/tmp");

    FILE* f = std::fopen("/tmp/manifest.json", "r");
    REQUIRE(f != nullptr);
    std::string text;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
    std::fclose(f);

    json m = json::parse(text);
    CHECK(m.at("version").get<std::string>() == kVersion);
    CHECK(m.at("config_path").get<std::string>() == "somewhere/config.json");
    CHECK(m.at("seed").get<uint64_t>() == 1);
    CHECK_FALSE(m.at("generated_at").get<std::string>().empty());
    // the embedded snapshot is a loadable configuration
    AppConfig back = config_from_json(m.at("config"));
    CHECK(back.scenario.environment.contact_pos == 0.06);

    std::remove("/tmp/manifest.json");
}

TEST_CASE("cli: help and argument errors") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("gains --help") == 0);
    CHECK(run_cli("") == 2);                       // subcommand required
    CHECK(run_cli("gains") == 2);                  // --config required
    CHECK(run_cli("frobnicate --config x") == 2);  // unknown subcommand
}

TEST_CASE("cli: config errors exit with the validation code") {
    CHECK(run_cli("gains --config /nonexistent/nope.json") == 2);

    write_file("/tmp/hpfc_cli_bad.json", "{ not json at all");
    CHECK(run_cli("gains --config /tmp/hpfc_cli_bad.json") == 2);

    json j = quick_sim_json();
    j["control"] = {{"lpf_cutoff_hz", 9000.0}};  // dt*2*pi*f_c >= 0.5
    write_file("/tmp/hpfc_cli_filter.json", j.dump());
    CHECK(run_cli("gains --config /tmp/hpfc_cli_filter.json") == 2);

    std::remove("/tmp/hpfc_cli_bad.json");
    std::remove("/tmp/hpfc_cli_filter.json");
}

TEST_CASE("cli: gains reports without failing on poor gains") {
    // all-zero gains are structurally valid; the report carries the verdict
    write_file("/tmp/hpfc_cli_zero.json", "{}");
    CHECK(run_cli("gains --config /tmp/hpfc_cli_zero.json") == 0);
    std::remove("/tmp/hpfc_cli_zero.json");

    CHECK(run_cli("gains --config " HPFC_CONFIG_DIR "/scenario_a.json") == 0);
}

TEST_CASE("cli: gains synthesizes and writes artifacts when asked") {
    json j = quick_sim_json();
    j["desired_poles"] = {{"position", {-120.0, json::array({-80.0, 60.0}),
                                        json::array({-80.0, -60.0}), -160.0}}};
    write_file("/tmp/hpfc_cli_synth.json", j.dump());
    wipe_dir("/tmp/hpfc_cli_synth_out");
    CHECK(run_cli("gains --config /tmp/hpfc_cli_synth.json --out /tmp/hpfc_cli_synth_out") ==
          0);
    CHECK(file_exists("/tmp/hpfc_cli_synth_out/gains.json"));
    CHECK(file_exists("/tmp/hpfc_cli_synth_out/manifest.json"));

    std::remove("/tmp/hpfc_cli_synth.json");
    wipe_dir("/tmp/hpfc_cli_synth_out");
}

TEST_CASE("cli: simulate writes the trajectory artifacts") {
    write_file("/tmp/hpfc_cli_sim.json", quick_sim_json().dump());
    wipe_dir("/tmp/hpfc_cli_sim_out");

    CHECK(run_cli("simulate --config /tmp/hpfc_cli_sim.json --out /tmp/hpfc_cli_sim_out") ==
          0);
    CHECK(file_exists("/tmp/hpfc_cli_sim_out/trajectory.csv"));
    CHECK(file_exists("/tmp/hpfc_cli_sim_out/trajectory_events.json"));
    CHECK(file_exists("/tmp/hpfc_cli_sim_out/manifest.json"));

    TrajectoryLog log = import_log("/tmp/hpfc_cli_sim_out/trajectory.csv");
    CHECK(log.rows.size() == 500);

    std::remove("/tmp/hpfc_cli_sim.json");
    wipe_dir("/tmp/hpfc_cli_sim_out");
}

TEST_CASE("cli: simulate aggregates repeated runs") {
    write_file("/tmp/hpfc_cli_rep.json", quick_sim_json().dump());
    wipe_dir("/tmp/hpfc_cli_rep_out");

    CHECK(run_cli("simulate --config /tmp/hpfc_cli_rep.json --out /tmp/hpfc_cli_rep_out"
                  " --runs 3") == 0);
    CHECK(file_exists("/tmp/hpfc_cli_rep_out/stats_position.csv"));
    CHECK(file_exists("/tmp/hpfc_cli_rep_out/stats_force.csv"));

    std::remove("/tmp/hpfc_cli_rep.json");
    wipe_dir("/tmp/hpfc_cli_rep_out");
}

TEST_CASE("cli: lyapunov verdict drives the exit code") {
    // two force-mode entry levels: decreasing passes, increasing fails
    auto craft = [](double second_level, const std::string& path) {
        TrajectoryLog log;
        log.rows.push_back({0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1, 0.0, 0.0, 0.0, 1.0});
        log.rows.push_back({0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 1, 0.0, 0.0, 0.0, 1.0});
        SwitchEvent a;
        a.t = 0.05;
        a.from = Mode::position;
        a.to = Mode::force;
        a.level = 10.0;
        SwitchEvent b1;
        b1.t = 0.06;
        b1.from = Mode::force;
        b1.to = Mode::position;
        b1.level = 5.0;
        SwitchEvent c;
        c.t = 0.07;
        c.from = Mode::position;
        c.to = Mode::force;
        c.level = second_level;
        c.activation_index = 1;
        log.events = {a, b1, c};
        export_log(log, path);
    };

    craft(9.0, "/tmp/hpfc_cli_ok.csv");
    CHECK(run_cli("lyapunov --log /tmp/hpfc_cli_ok.csv --config " HPFC_CONFIG_DIR
                  "/scenario_a.json") == 0);

    craft(11.0, "/tmp/hpfc_cli_viol.csv");
    wipe_dir("/tmp/hpfc_cli_viol_out");
    CHECK(run_cli("lyapunov --log /tmp/hpfc_cli_viol.csv --config " HPFC_CONFIG_DIR
                  "/scenario_a.json --out /tmp/hpfc_cli_viol_out") == 5);
    CHECK(file_exists("/tmp/hpfc_cli_viol_out/verdict.json"));

    // a fixed --weights triple overrides the config weights
    CHECK(run_cli("lyapunov --log /tmp/hpfc_cli_ok.csv --config " HPFC_CONFIG_DIR
                  "/scenario_a.json --weights 1,1,1") == 0);
    CHECK(run_cli("lyapunov --log /tmp/hpfc_cli_ok.csv --config " HPFC_CONFIG_DIR
                  "/scenario_a.json --weights nope") == 2);

    std::remove("/tmp/hpfc_cli_ok.csv");
    std::remove("/tmp/hpfc_cli_ok_events.json");
    std::remove("/tmp/hpfc_cli_viol.csv");
    std::remove("/tmp/hpfc_cli_viol_events.json");
    wipe_dir("/tmp/hpfc_cli_viol_out");
}

TEST_CASE("cli: a missing log is a validation error") {
    CHECK(run_cli("lyapunov --log /tmp/does_not_exist.csv --config " HPFC_CONFIG_DIR
                  "/scenario_a.json") == 2);
}
