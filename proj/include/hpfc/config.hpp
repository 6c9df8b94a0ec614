#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hpfc/matrix.hpp"
#include "hpfc/scenario.hpp"

namespace hpfc {

inline constexpr const char* kVersion = "1.0.0";

// Fully resolved run setup: the scenario plus synthesis inputs and metadata
// that ride along in the config file but are not consumed by the simulator.
struct AppConfig {
    ScenarioConfig scenario;
    CVec desired_position;     // optional pole targets for synthesis
    CVec desired_force;
    bool desired_given = false;
    bool weights_given = false;       // lyapunov section present in the file
    double supply_flow_lpm = 40.0;    // pump rating, metadata only
};

// Strict parse: unknown keys are rejected with a dotted field path; every
// absent field takes its documented default.
AppConfig config_from_json(const nlohmann::json& j);

AppConfig load_config(const std::string& path);

// Inverse of config_from_json with every default materialized; feeding the
// snapshot back through config_from_json reproduces the same AppConfig.
nlohmann::json snapshot(const AppConfig& cfg);

// manifest.json in out_dir: config path + resolved snapshot + version + seed
// + timestamps; enough to reproduce the artifacts bit-exactly.
void write_manifest(const AppConfig& cfg, const std::string& config_path,
                    const std::string& out_dir);

}  // namespace hpfc
