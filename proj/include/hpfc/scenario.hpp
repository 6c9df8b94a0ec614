#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpfc/controller.hpp"
#include "hpfc/linear_system.hpp"
#include "hpfc/lyapunov.hpp"
#include "hpfc/plant.hpp"
#include "hpfc/types.hpp"

namespace hpfc {

// Measurement noise standard deviations fed to the controller (never to the
// logged plant state).
struct NoiseConfig {
    bool enabled = false;
    double position = 1e-5;  // [m]
    double pressure = 1e4;   // [Pa]
    double force = 5.0;      // [N]
    bool active() const { return enabled && (position > 0 || pressure > 0 || force > 0); }
    void validate() const;
};

struct ScenarioConfig {
    enum class Variant { hard_stop, dynamic_env };
    Variant variant = Variant::hard_stop;
    double duration = 10.0;  // [s]
    double dt = 1e-5;        // integrator step [s]
    int log_decimation = 100;
    uint64_t seed = 1;
    int run_count = 1;

    PlantParams plant;
    FrictionModel friction;
    Environment environment;
    GainVector gains_position;
    GainVector gains_force;
    ControlConfig control;
    OperatingPoint op_position{2230.0, 1.0151e3, 30.755, 1.2e8};
    OperatingPoint op_force{2012.5, 6.2499e3, 0.0, 1.2e8};
    LyapunovWeights weights_position;
    LyapunovWeights weights_force;
    NoiseConfig noise;

    const GainVector& gains(Mode h) const {
        return h == Mode::position ? gains_position : gains_force;
    }
    const OperatingPoint& op(Mode h) const {
        return h == Mode::position ? op_position : op_force;
    }
    const LyapunovWeights& weights(Mode h) const {
        return h == Mode::position ? weights_position : weights_force;
    }
    void validate() const;
};

struct LogRow {
    double t, x, v, p_l, f_l, e;
    int h;
    double r, u_raw, u_valve, lyap;
};

struct TrajectoryLog {
    std::vector<LogRow> rows;
    std::vector<SwitchEvent> events;
    bool partial = false;    // integration aborted early
    std::string error;       // failure description when partial
    int pressure_clamps = 0; // samples where |P_L| was pulled back inside the supply
};

// Integrate the nonlinear plant with the hybrid controller in lockstep.
// Deterministic per (config, seed).  Gains must verify stable in both modes.
TrajectoryLog run_scenario(const ScenarioConfig& cfg);

// Per-sample statistics across runs, one mode segment at a time.  Samples
// where no run was in the segment's mode carry NaN.
struct ErrorStats {
    Vec t;
    Vec mean_abs;
    Vec stddev;
    std::vector<int> count;  // runs contributing per sample
};

struct RepeatResult {
    ErrorStats position;
    ErrorStats force;
    bool partial = false;
    int failed_runs = 0;
};

// N runs under derived sub-seeds (run_count >= 2); control errors pass a
// second-order 100 Hz low-pass before aggregation.
RepeatResult repeat_runs(const ScenarioConfig& cfg);

// CSV with header t,x,v,P_L,F_L,e,h,r,u_raw,u_valve,L; switch events land in
// a sibling <base>_events.json.
void export_log(const TrajectoryLog& log, const std::string& csv_path);

// Reads a CSV written by export_log; restores events from the sibling JSON
// when present, otherwise reconstructs them from mode transitions.
TrajectoryLog import_log(const std::string& csv_path);

// stats_position.csv / stats_force.csv under dir, header t,mean_abs,std.
void export_stats(const RepeatResult& stats, const std::string& dir);

// Discrete second-order unity-DC low-pass (bilinear transform, Butterworth
// damping) used by the statistics pipeline at the log sample rate.
class Biquad {
public:
    Biquad(double f_c, double f_s);
    void reset(double steady_input);  // settle at a constant input level
    double step(double x);

private:
    double b0_, b1_, b2_, a1_, a2_;
    double s1_ = 0.0, s2_ = 0.0;  // transposed direct form II state
};

}  // namespace hpfc
