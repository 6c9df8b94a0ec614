#pragma once

#include <utility>
#include <vector>

#include "hpfc/linear_system.hpp"
#include "hpfc/plant.hpp"
#include "hpfc/types.hpp"

namespace hpfc {

// Mode-switch thresholds on measured load force, with a dwell guard.
struct HysteresisConfig {
    double t_hi = 3300.0;    // position -> force at F_L >= t_hi [N]
    double t_lo = 500.0;     // force -> position at F_L <= t_lo [N]
    double min_dwell = 0.05; // minimum time between switches [s]
    void validate() const;
};

// Position profile: ramp to a target with an optional superimposed sinusoid;
// after a switch-back either returns to zero on a ramp or resumes the profile
// offset so the reference is continuous from the measured position.
struct PositionRef {
    double ramp_rate = 0.03;   // [m/s]
    double ramp_target = 0.2;  // [m]
    double sin_amp = 0.0;      // [m]
    double sin_freq_hz = 0.0;
    double sin_start = 0.0;    // sinusoid onset [s]
    bool return_to_zero = true;
    double return_rate = 0.03; // [m/s]
};

// Force profile measured from the switch instant: either a constant hold
// followed by a cosine release to zero, or a staircase of (duration, level)
// segments whose last level persists.
struct ForceRef {
    enum class Shape { hold_release, steps };
    Shape shape = Shape::hold_release;
    double hold_value = 3500.0;  // [N]
    double hold_s = 1.5;         // [s]
    double release_s = 4.0;      // [s]
    std::vector<std::pair<double, double>> steps;  // (duration s, level N)
};

struct ReferenceSpec {
    PositionRef position;
    ForceRef force;
    void validate() const;
};

// Everything the per-tick control computation needs besides the gains.
struct ControlConfig {
    HysteresisConfig hysteresis;
    ReferenceSpec reference;
    double lpf_cutoff_hz = 50.0;  // control low-pass cutoff
    double e_max = 1e9;           // integral clamp
    int decimation = 1;           // control period in integrator steps
    void validate(double dt) const;
};

struct LpfState {
    double z1 = 0.0;  // output state
    double z2 = 0.0;  // output rate
};

// Reference bookkeeping across switches.
struct SwitchContext {
    double t_switch = 0.0;     // instant the current mode was entered [s]
    double x_at_switch = 0.0;  // measured position then [m]
    double profile_offset = 0.0;  // re-seed shift applied to the position profile [m]
    bool returned = false;     // a force -> position switch has happened
};

struct ControllerState {
    Mode h = Mode::position;
    double e = 0.0;  // integral error [m*s or N*s]
    LpfState lpf;
    double last_switch_time = -1e18;  // effectively "never"
    SwitchContext ctx;
    // held outputs for control-period decimation
    double held_u_valve = 0.0;
    double held_u_raw = 0.0;
    double held_r = 0.0;
    long tick = 0;
};

struct StepResult {
    double u_raw = 0.0;    // control law output before shaping
    double u_valve = 0.0;  // after compensation, filtering, saturation
    double r = 0.0;        // active reference
    double e = 0.0;        // integral state used this tick (0 on a switch tick)
    bool switched = false;
    Mode from = Mode::position;
    Mode to = Mode::position;
};

// u_c = FF*r - (K1 x + K2 dx + K3 P_L + K4 F_L) + Ki e.
double control_law(double r, const Vec& x_e, const GainVector& gains, Mode h);

// Rectangle-rule integral of (r - y); frozen while the anti-windup condition
// holds, clamped to |e| <= e_max.
double integrator_step(double e, double r, double y, double dt, bool freeze, double e_max);

// Dead-band pre-compensator gamma(u) = u + delta*sign(u), gamma(0) = 0,
// nudged by ulps so dead_zone(gamma(u)) == u bit-exactly whenever a double
// preimage exists (|u| below the saturation headroom).
double dz_compensator(double u, double delta, double u_max);

// Critically damped second-order unity-DC low-pass, advanced one RK4 step.
// Requires dt*2*pi*f_c < 0.5.
double lpf_step(LpfState& st, double u_in, double dt, double f_c);

// Threshold/dwell switching logic; returns the (possibly new) mode and, on a
// switch, zeroes the integral state and stamps last_switch_time.
Mode hysteresis_update(Mode h, double f_l, double t, const HysteresisConfig& cfg,
                       ControllerState& ctrl);

double reference_value(double t, Mode h, const ReferenceSpec& spec, const SwitchContext& ctx);

// One controller tick: hysteresis -> reference -> control law -> dead-zone
// compensation -> low-pass -> saturation, then the integrator update.
StepResult controller_step(const PlantState& meas, double t, double dt,
                           const GainVector& gains_pos, const GainVector& gains_force,
                           const PlantParams& p, const ControlConfig& cfg,
                           ControllerState& ctrl);

}  // namespace hpfc
