#include "hpfc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hpfc/errors.hpp"

namespace hpfc {

void PlantParams::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0))
            throw ValidationError(std::string("plant.") + name + " must be > 0");
    };
    pos(a_bar, "a_bar");
    pos(mass, "mass");
    pos(bulk, "bulk");
    pos(v_t, "v_t");
    pos(k_valve, "k_valve");
    pos(p_supply, "p_supply");
    pos(stroke, "stroke");
    if (!(delta >= 0.0)) throw ValidationError("plant.delta must be >= 0");
    if (!(u_max > delta)) throw ValidationError("plant.u_max must be > plant.delta");
}

void FrictionModel::validate() const {
    if (variant == Variant::affine) {
        if (!(k_w_position >= 0.0) || !(k_w_force >= 0.0))
            throw ValidationError("friction.k_w must be >= 0");
    } else {
        if (!(f_static >= f_coulomb && f_coulomb >= 0.0))
            throw ValidationError("friction: F_s >= F_c >= 0 required");
        if (!(v_stribeck > 0.0)) throw ValidationError("friction.v_s must be > 0");
        if (!(sigma >= 0.0)) throw ValidationError("friction.sigma must be >= 0");
    }
}

void Environment::validate(double stroke) const {
    if (!(stiffness > 0.0)) throw ValidationError("environment.stiffness must be > 0");
    if (variant == Variant::hard_stop) {
        if (!(contact_pos > 0.0 && contact_pos <= stroke))
            throw ValidationError("environment.contact_pos must lie in (0, stroke]");
    } else {
        if (!(standoff > 0.0 && standoff <= stroke))
            throw ValidationError("environment.standoff must lie in (0, stroke]");
        if (!(track_rate > 0.0)) throw ValidationError("environment.track_rate must be > 0");
        if (!(release_speed >= 0.0))
            throw ValidationError("environment.release_speed must be >= 0");
        if (!(pulse.period > 0.0)) throw ValidationError("environment.pulse.period must be > 0");
        if (!(pulse.width >= 0.0 && pulse.width <= 1.0))
            throw ValidationError("environment.pulse.width must lie in [0, 1]");
    }
}

double dead_zone(double z, double delta, double u_max) {
    double az = std::fabs(z);
    if (az <= delta) return 0.0;
    double out = std::min(az - delta, u_max - delta);
    return std::copysign(out, z);
}

double orifice_flow(double z_eff, double p_l, const PlantParams& p) {
    if (z_eff == 0.0) return 0.0;
    if (std::fabs(p_l) >= p.p_supply)
        throw PressureLimitError("load pressure " + std::to_string(p_l) +
                                 " Pa at/beyond supply " + std::to_string(p.p_supply) + " Pa");
    double rad = 0.5 * (p.p_supply - std::copysign(1.0, z_eff) * p_l);
    if (rad < 0.0) rad = 0.0;
    return z_eff * p.k_valve * std::sqrt(rad);
}

static double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double friction_force(double v, const FrictionModel& fric, Mode h) {
    if (fric.variant == FrictionModel::Variant::affine)
        return fric.k_w(h) * v + fric.d_w(h) * sgn(v);
    double r = v / fric.v_stribeck;
    return fric.sigma * v +
           sgn(v) * (fric.f_coulomb + (fric.f_static - fric.f_coulomb) * std::exp(-r * r));
}

double env_F_ext(const Environment& env, double t) {
    const PulseProfile& p = env.pulse;
    if (t < p.start) return p.low;
    double phase = std::fmod(t - p.start, p.period);
    return phase < p.width * p.period ? p.high : p.low;
}

double env_force(const Environment& env, double x, double x_w) {
    if (env.variant == Environment::Variant::hard_stop) {
        double pen = x - env.contact_pos;
        return pen > 0.0 ? env.stiffness * pen + env.passive_load : env.passive_load;
    }
    double pen = x - x_w;
    return pen > 0.0 ? env.stiffness * pen : 0.0;
}

double env_wall_rate(const Environment& env, double t, double x_w, double f_l) {
    if (env.variant == Environment::Variant::hard_stop) return 0.0;
    double f_ext = env_F_ext(env, t);
    if (f_ext > 0.0)
        return -(env.track_rate / env.stiffness) * (f_ext - f_l);
    return x_w < env.standoff ? env.release_speed : 0.0;
}

Vec plant_derivative(const PlantState& s, double u_valve, const Environment& env,
                     const PlantParams& p, const FrictionModel& fric, Mode h, double x_w) {
    double f_l = env_force(env, s.x, x_w);
    double z = dead_zone(u_valve, p.delta, p.u_max);
    double q = orifice_flow(z, s.p_l, p);
    double dv = (p.a_bar * s.p_l - friction_force(s.v, fric, h) - f_l) / p.mass;
    double dp = p.pressure_gain() * (q - p.a_bar * s.v);
    return {s.v, dv, dp, 0.0};
}

Linearization linearize_at(const PlantState& s0, double u0, const PlantParams& p,
                           const FrictionModel& fric, Mode h, double steady_tol) {
    // operating-point orifice slope: K*Omega unless overridden via cq_hat
    double z0 = dead_zone(u0, p.delta, p.u_max);
    double sign_z = z0 != 0.0 ? std::copysign(1.0, z0) : 1.0;
    double omega0 = std::sqrt(std::max(0.5 * (p.p_supply - sign_z * s0.p_l), 0.0));
    double cq = p.cq_hat != 0.0 ? p.cq_hat : p.k_valve * omega0;

    double k_w, d_w;
    if (fric.variant == FrictionModel::Variant::affine) {
        k_w = fric.k_w(h);
        d_w = fric.d_w(h);
    } else {
        // tangent slope/offset of the stribeck curve at v0 (positive branch)
        double v0 = s0.v;
        double r = v0 / fric.v_stribeck;
        double fr = friction_force(v0, fric, h);
        k_w = fric.sigma - sgn(v0) * 2.0 * (fric.f_static - fric.f_coulomb) *
                               (v0 / (fric.v_stribeck * fric.v_stribeck)) * std::exp(-r * r);
        d_w = fr - k_w * v0;
    }

    double g4 = p.pressure_gain();
    Linearization lin;
    lin.a = Matrix(4, 4);
    lin.a(0, 1) = 1.0;
    lin.a(1, 1) = -k_w / p.mass;
    lin.a(1, 2) = p.a_bar / p.mass;
    lin.a(1, 3) = -1.0 / p.mass;
    lin.a(2, 1) = -g4 * p.a_bar;
    lin.a(2, 2) = g4 * p.cqp_hat;
    lin.b = {0.0, 0.0, g4 * cq * p.k_g, 0.0};
    lin.f = {0.0, -d_w / p.mass, g4 * cq * p.d_g, 0.0};
    lin.c = {1.0, 0.0, 0.0, 0.0};

    double dv = (p.a_bar * s0.p_l - friction_force(s0.v, fric, h) - s0.f_l) / p.mass;
    double dp = g4 * (orifice_flow(z0, s0.p_l, p) - p.a_bar * s0.v);
    double resid = std::max(std::fabs(dv), std::fabs(dp) / p.p_supply);
    if (resid > steady_tol)
        log_warning("linearize_at: operating point not steady (residual " +
                    std::to_string(resid) + ")");
    return lin;
}

}  // namespace hpfc
