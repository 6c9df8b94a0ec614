#include "hpfc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hpfc/errors.hpp"

namespace hpfc {

void HysteresisConfig::validate() const {
    if (!(t_hi > t_lo)) throw ValidationError("hysteresis.t_hi must be > t_lo");
    if (!(t_lo >= 0.0)) throw ValidationError("hysteresis.t_lo must be >= 0");
    if (!(min_dwell >= 0.0)) throw ValidationError("hysteresis.min_dwell must be >= 0");
}

void ReferenceSpec::validate() const {
    if (!(position.ramp_rate >= 0.0))
        throw ValidationError("reference.position.ramp_rate must be >= 0");
    if (!(position.ramp_target >= 0.0))
        throw ValidationError("reference.position.ramp_target must be >= 0");
    if (!(position.sin_amp >= 0.0))
        throw ValidationError("reference.position.sin_amp must be >= 0");
    if (position.sin_amp > 0.0 && !(position.sin_freq_hz > 0.0))
        throw ValidationError("reference.position.sin_freq_hz must be > 0 with sin_amp set");
    if (position.return_to_zero && !(position.return_rate > 0.0))
        throw ValidationError("reference.position.return_rate must be > 0");
    if (force.shape == ForceRef::Shape::hold_release) {
        if (!(force.hold_s >= 0.0)) throw ValidationError("reference.force.hold_s must be >= 0");
        if (!(force.release_s > 0.0))
            throw ValidationError("reference.force.release_s must be > 0");
    } else {
        if (force.steps.empty())
            throw ValidationError("reference.force.steps must not be empty");
        for (size_t i = 0; i + 1 < force.steps.size(); ++i)
            if (!(force.steps[i].first > 0.0))
                throw ValidationError("reference.force.steps: only the last duration may be <= 0");
    }
}

void ControlConfig::validate(double dt) const {
    hysteresis.validate();
    reference.validate();
    if (!(lpf_cutoff_hz > 0.0)) throw ValidationError("control.lpf_cutoff_hz must be > 0");
    if (!(e_max > 0.0)) throw ValidationError("control.e_max must be > 0");
    if (decimation < 1) throw ValidationError("control.decimation must be >= 1");
    double w = dt * decimation * 2.0 * std::numbers::pi * lpf_cutoff_hz;
    if (!(w < 0.5))
        throw ValidationError("control: dt*2*pi*lpf_cutoff_hz = " + std::to_string(w) +
                              " >= 0.5, filter discretization unstable");
}

double control_law(double r, const Vec& x_e, const GainVector& g, Mode h) {
    if (x_e.size() != 5) throw ValidationError("control_law: expected 5-entry state");
    double ff = g.feed_forward(h);
    return ff * r - (g.k1 * x_e[0] + g.k2 * x_e[1] + g.k3 * x_e[2] + g.k4 * x_e[3]) +
           g.ki * x_e[4];
}

double integrator_step(double e, double r, double y, double dt, bool freeze, double e_max) {
    if (!(dt > 0.0)) throw ValidationError("integrator_step: dt must be > 0");
    if (freeze) return e;
    return std::clamp(e + (r - y) * dt, -e_max, e_max);
}

double dz_compensator(double u, double delta, double u_max) {
    if (u == 0.0) return 0.0;
    double au = std::fabs(u);
    double z = au + delta;
    if (au <= u_max - delta) {
        // fl(fl(u+delta)-delta) can land an ulp off; walk toward the exact
        // preimage, stopping if the map jumps past u (no preimage exists)
        int dir = 0;
        for (int i = 0; i < 16; ++i) {
            double back = dead_zone(z, delta, u_max);
            if (back == au) break;
            int d = back < au ? +1 : -1;
            if (dir != 0 && d != dir) break;
            dir = d;
            z = std::nextafter(z, d > 0 ? HUGE_VAL : -HUGE_VAL);
        }
    }
    return std::copysign(z, u);
}

double lpf_step(LpfState& st, double u_in, double dt, double f_c) {
    double w = 2.0 * std::numbers::pi * f_c;
    if (!(dt > 0.0) || !(f_c > 0.0) || !(dt * w < 0.5))
        throw ValidationError("lpf_step: requires dt > 0, f_c > 0, dt*2*pi*f_c < 0.5");
    // dz1 = z2; dz2 = w^2 (u - z1) - 2w z2  (double pole at -w, unity DC gain)
    double w2 = w * w;
    auto f1 = [](double, double z2) { return z2; };
    auto f2 = [&](double z1, double z2) { return w2 * (u_in - z1) - 2.0 * w * z2; };
    double a1 = f1(st.z1, st.z2), a2 = f2(st.z1, st.z2);
    double b1 = f1(st.z1 + 0.5 * dt * a1, st.z2 + 0.5 * dt * a2);
    double b2 = f2(st.z1 + 0.5 * dt * a1, st.z2 + 0.5 * dt * a2);
    double c1 = f1(st.z1 + 0.5 * dt * b1, st.z2 + 0.5 * dt * b2);
    double c2 = f2(st.z1 + 0.5 * dt * b1, st.z2 + 0.5 * dt * b2);
    double d1 = f1(st.z1 + dt * c1, st.z2 + dt * c2);
    double d2 = f2(st.z1 + dt * c1, st.z2 + dt * c2);
    st.z1 += (dt / 6.0) * (a1 + 2.0 * b1 + 2.0 * c1 + d1);
    st.z2 += (dt / 6.0) * (a2 + 2.0 * b2 + 2.0 * c2 + d2);
    return st.z1;
}

Mode hysteresis_update(Mode h, double f_l, double t, const HysteresisConfig& cfg,
                       ControllerState& ctrl) {
    bool dwell_ok = t - ctrl.last_switch_time >= cfg.min_dwell;
    Mode out = h;
    if (h == Mode::position && f_l >= cfg.t_hi && dwell_ok)
        out = Mode::force;
    else if (h == Mode::force && f_l <= cfg.t_lo && dwell_ok)
        out = Mode::position;
    if (out != h) {
        ctrl.e = 0.0;  // integral carries the wrong units across modes
        ctrl.last_switch_time = t;
    }
    return out;
}

static double position_profile(double t, const PositionRef& p) {
    double r = std::min(p.ramp_rate * t, p.ramp_target);
    if (p.sin_amp > 0.0 && t >= p.sin_start)
        r += p.sin_amp * std::sin(2.0 * std::numbers::pi * p.sin_freq_hz * (t - p.sin_start));
    return r;
}

double reference_value(double t, Mode h, const ReferenceSpec& spec, const SwitchContext& ctx) {
    if (h == Mode::position) {
        const PositionRef& p = spec.position;
        if (!ctx.returned) return position_profile(t, p);
        if (p.return_to_zero)
            return std::max(ctx.x_at_switch - p.return_rate * (t - ctx.t_switch), 0.0);
        return position_profile(t, p) + ctx.profile_offset;
    }
    const ForceRef& f = spec.force;
    double tau = t - ctx.t_switch;
    if (f.shape == ForceRef::Shape::hold_release) {
        if (tau < f.hold_s) return f.hold_value;
        double tr = tau - f.hold_s;
        if (tr < f.release_s)
            return f.hold_value * 0.5 * (1.0 + std::cos(std::numbers::pi * tr / f.release_s));
        return 0.0;
    }
    double acc = 0.0;
    for (size_t i = 0; i < f.steps.size(); ++i) {
        double dur = f.steps[i].first;
        if (dur <= 0.0 || i + 1 == f.steps.size()) return f.steps[i].second;
        if (tau < acc + dur) return f.steps[i].second;
        acc += dur;
    }
    return f.steps.back().second;
}

StepResult controller_step(const PlantState& meas, double t, double dt,
                           const GainVector& gains_pos, const GainVector& gains_force,
                           const PlantParams& p, const ControlConfig& cfg,
                           ControllerState& ctrl) {
    StepResult res;
    bool update = cfg.decimation <= 1 || (ctrl.tick % cfg.decimation) == 0;
    ++ctrl.tick;
    if (!update) {  // hold the last command between control periods
        res.u_raw = ctrl.held_u_raw;
        res.u_valve = ctrl.held_u_valve;
        res.r = ctrl.held_r;
        res.e = ctrl.e;
        res.from = res.to = ctrl.h;
        return res;
    }
    double dte = dt * cfg.decimation;

    res.from = ctrl.h;
    Mode h_new = hysteresis_update(ctrl.h, meas.f_l, t, cfg.hysteresis, ctrl);
    if (h_new != ctrl.h) {
        res.switched = true;
        ctrl.ctx.t_switch = t;
        ctrl.ctx.x_at_switch = meas.x;
        if (h_new == Mode::position) {
            ctrl.ctx.returned = true;
            ctrl.ctx.profile_offset = meas.x - position_profile(t, cfg.reference.position);
        }
        ctrl.h = h_new;
    }
    res.to = ctrl.h;

    double r = reference_value(t, ctrl.h, cfg.reference, ctrl.ctx);
    double y = ctrl.h == Mode::position ? meas.x : meas.f_l;
    const GainVector& g = ctrl.h == Mode::position ? gains_pos : gains_force;
    res.e = ctrl.e;
    double u_raw = control_law(r, {meas.x, meas.v, meas.p_l, meas.f_l, ctrl.e}, g, ctrl.h);
    double u_c = dz_compensator(u_raw, p.delta, p.u_max);
    double u_f = lpf_step(ctrl.lpf, u_c, dte, cfg.lpf_cutoff_hz);
    double u_valve = std::clamp(u_f, -p.u_max, p.u_max);

    bool freeze = std::fabs(u_f) > p.u_max && u_f * (r - y) * g.ki > 0.0;
    ctrl.e = integrator_step(ctrl.e, r, y, dte, freeze, cfg.e_max);

    res.r = r;
    res.u_raw = u_raw;
    res.u_valve = u_valve;
    ctrl.held_u_raw = u_raw;
    ctrl.held_u_valve = u_valve;
    ctrl.held_r = r;
    return res;
}

}  // namespace hpfc
