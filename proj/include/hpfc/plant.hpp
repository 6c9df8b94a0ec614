#pragma once

#include "hpfc/matrix.hpp"
#include "hpfc/types.hpp"

namespace hpfc {

// Reduced single-rod cylinder: piston motion + load-pressure continuity,
// driven through a dead-banded, saturated valve.
struct PlantParams {
    double a_bar = 0.001;       // mean piston area [m^2]
    double mass = 1.7026;       // lumped moving mass [kg]
    double bulk = 1e9;          // oil bulk modulus [Pa]
    double v_t = 0.0014;        // combined line volume [m^3]
    double k_valve = 0.252e-6;  // valve flow coefficient [m^3/(s*sqrt(Pa))]
    double p_supply = 1e7;      // supply pressure [Pa]
    double stroke = 0.2;        // usable stroke [m]
    double cq_hat = 0.0;        // linearized orifice input coeff; 0 = derive k_valve*Omega
    double cqp_hat = -1e-11;    // linearized orifice pressure coeff [m^3/(s*Pa)]
    double k_g = 1.0;           // linearized dead-zone slope
    double d_g = 0.0;           // linearized dead-zone offset
    double delta = 0.05;        // dead-band half-width, normalized input
    double u_max = 1.0;         // input saturation, normalized

    double pressure_gain() const { return 4.0 * bulk / v_t; }  // 4E/V_t [Pa/m^3]
    void validate() const;  // throws ValidationError naming the offending field
};

// Friction on the piston.  The affine variant carries one (slope, offset)
// pair per control mode; the stribeck variant is mode-independent.
struct FrictionModel {
    enum class Variant { affine, stribeck };
    Variant variant = Variant::affine;
    double k_w_position = 1.0151e3;  // [N*s/m]
    double d_w_position = 30.755;    // [N]
    double k_w_force = 6.2499e3;     // [N*s/m]
    double d_w_force = 0.0;          // [N]
    double f_coulomb = 25.0;         // [N]
    double f_static = 40.0;          // [N]
    double v_stribeck = 0.01;        // [m/s]
    double sigma = 900.0;            // viscous coefficient [N*s/m]

    double k_w(Mode h) const { return h == Mode::position ? k_w_position : k_w_force; }
    double d_w(Mode h) const { return h == Mode::position ? d_w_position : d_w_force; }
    void validate() const;
};

// Counter-force pulse train emulating a relief-valve-regulated load cylinder.
struct PulseProfile {
    double start = 4.0;    // first rising edge [s]
    double period = 10.0;  // [s]
    double width = 0.6;    // duty fraction of the period spent high
    double high = 4500.0;  // [N]
    double low = 0.0;      // [N]
};

// What the rod pushes against.  hard_stop: rigid frame behind a one-sided
// spring at contact_pos.  dynamic_load: a second cylinder emulated as a
// one-sided spring whose root x_w regulates toward the commanded counter
// force while pressurized and retreats freely when vented.
struct Environment {
    enum class Variant { hard_stop, dynamic_load };
    Variant variant = Variant::hard_stop;
    double stiffness = 1.2e8;     // contact/coupling stiffness [N/m]
    double contact_pos = 0.2;     // hard-stop location [m]
    double passive_load = 0.0;    // constant drag during free motion [N]
    double standoff = 0.0465;     // dynamic_load: wall rest position [m]
    double track_rate = 90.0;     // dynamic_load: force regulation rate [1/s]
    double release_speed = 0.05;  // dynamic_load: vented retreat speed [m/s]
    PulseProfile pulse;

    void validate(double stroke) const;
};

struct PlantState {
    double x = 0.0;    // piston position [m]
    double v = 0.0;    // piston velocity [m/s]
    double p_l = 0.0;  // load pressure [Pa]
    double f_l = 0.0;  // external load force [N], algebraic copy of env_force
};

// Valve dead band: zero inside (-delta, delta), unit slope shifted toward
// zero outside, clamped at +-(u_max - delta).
double dead_zone(double z, double delta, double u_max);

// Turbulent orifice flow Q = z*K*sqrt(0.5*(P_S - sign(z)*P_L)); radicand
// clamped at zero.  |P_L| >= P_S throws PressureLimitError.
double orifice_flow(double z_eff, double p_l, const PlantParams& p);

double friction_force(double v, const FrictionModel& fric, Mode h);

// Commanded counter force at time t (dynamic_load only).
double env_F_ext(const Environment& env, double t);

// Load force for piston at x against wall at x_w (x_w ignored by hard_stop).
double env_force(const Environment& env, double x, double x_w);

// Wall-root velocity: pressurized -> first-order force tracking toward
// F_ext(t); vented -> retreat at release_speed until the standoff is reached.
double env_wall_rate(const Environment& env, double t, double x_w, double f_l);

// Time derivative {dx, dv, dP_L, dF_L} of the plant state; dF_L is zero
// (the load force is exogenous, its stored copy is refreshed by the caller
// from env_force).  x_w is the dynamic_load wall position, unused otherwise.
Vec plant_derivative(const PlantState& s, double u_valve, const Environment& env,
                     const PlantParams& p, const FrictionModel& fric, Mode h,
                     double x_w = 0.0);

// Piecewise-affine model dx = A x + b u + f, y = c x around (s0, u0).
struct Linearization {
    Matrix a;  // 4x4
    Vec b;     // 4
    Vec f;     // 4, affine offset
    Vec c;     // 4, position output row
};

// Warns (non-fatally) when s0 is not a steady point within steady_tol.
Linearization linearize_at(const PlantState& s0, double u0, const PlantParams& p,
                           const FrictionModel& fric, Mode h, double steady_tol = 1e-3);

}  // namespace hpfc
