#include "hpfc/linear_system.hpp"

#include <cmath>

#include "hpfc/errors.hpp"

namespace hpfc {

void GainVector::validate(Mode h) const {
    if (h == Mode::position && k4 != 0.0)
        throw ValidationError("gains: position mode requires K4 = 0");
    if (h == Mode::force && k1 != 0.0)
        throw ValidationError("gains: force mode requires K1 = 0");
    for (double g : {k1, k2, k3, k4, ki})
        if (!std::isfinite(g)) throw ValidationError("gains: non-finite entry");
}

Vec feedback_row(const GainVector& g) { return {g.k1, g.k2, g.k3, g.k4, -g.ki}; }

std::vector<int> dynamic_state_indices(Mode h) {
    return h == Mode::position ? std::vector<int>{0, 1, 2, 4} : std::vector<int>{1, 2, 3, 4};
}

static void check_op(const OperatingPoint& op, Mode h) {
    if (!(op.omega > 0.0)) throw ValidationError("operating point: omega must be > 0");
    if (!(op.k_w >= 0.0)) throw ValidationError("operating point: k_w must be >= 0");
    if (h == Mode::force && !(op.stiffness > 0.0))
        throw ValidationError("operating point: stiffness must be > 0 in force mode");
}

OpenLoopAug open_loop_augmented(const PlantParams& p, const OperatingPoint& op, Mode h) {
    check_op(op, h);
    double g4 = p.pressure_gain();
    double cq = p.cq_hat != 0.0 ? p.cq_hat : p.k_valve * op.omega;

    OpenLoopAug ol;
    ol.h = h;
    ol.a_e = Matrix(5, 5);
    Matrix& a = ol.a_e;
    a(0, 1) = 1.0;
    a(1, 1) = -op.k_w / p.mass;
    a(1, 2) = p.a_bar / p.mass;
    a(2, 1) = -g4 * p.a_bar;
    a(2, 2) = g4 * p.cqp_hat;
    if (h == Mode::position) {
        // load force frozen: no coupling into dv, no own dynamics
        ol.c_e = {1.0, 0.0, 0.0, 0.0, 0.0};
    } else {
        a(1, 3) = -1.0 / p.mass;
        a(3, 1) = op.stiffness;  // dF_L = c * dx in contact
        ol.c_e = {0.0, 0.0, 0.0, 1.0, 0.0};
    }
    for (int j = 0; j < 5; ++j) a(4, j) = -ol.c_e[j];  // d(e) = r - y

    ol.b_e = {0.0, 0.0, g4 * cq * p.k_g, 0.0, 0.0};
    ol.f_e = {0.0, -op.d_w / p.mass, g4 * cq * p.d_g, 0.0, 0.0};
    return ol;
}

ModeSystem build_closed_loop(const PlantParams& p, const GainVector& gains, Mode h,
                             const OperatingPoint& op) {
    gains.validate(h);
    check_op(op, h);
    double g4 = p.pressure_gain();
    // valve-path gain; reduces to K*Omega at default cq_hat = 0, k_g = 1
    double cq = p.cq_hat != 0.0 ? p.cq_hat : p.k_valve * op.omega;
    double ko = cq * p.k_g;

    ModeSystem sys;
    sys.h = h;
    sys.op = op;
    sys.a_bar = Matrix(6, 6);
    Matrix& a = sys.a_bar;

    a(0, 1) = 1.0;
    a(1, 1) = -op.k_w / p.mass;
    a(1, 2) = p.a_bar / p.mass;
    a(1, 5) = -op.d_w / p.mass;  // affine friction offset via the constant state
    // pressure row: open-loop terms plus the fed-back valve command
    a(2, 0) = -g4 * ko * gains.k1;
    a(2, 1) = -g4 * (ko * gains.k2 + p.a_bar);
    a(2, 2) = g4 * p.cqp_hat - g4 * ko * gains.k3;
    a(2, 3) = -g4 * ko * gains.k4;
    a(2, 4) = g4 * ko * gains.ki;
    a(2, 5) = g4 * cq * p.d_g;  // dead-zone offset feed-through (0 at defaults)
    if (h == Mode::force) {
        a(1, 3) = -1.0 / p.mass;
        a(3, 1) = op.stiffness;
        a(4, 3) = -1.0;  // d(e) = r - F_L
        sys.c_bar = {0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
    } else {
        a(4, 0) = -1.0;  // d(e) = r - x
        sys.c_bar = {1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    }
    // row 5 (e) reference part and row 6 (constant) live in b_bar/zeros

    sys.b_bar = {0.0, 0.0, g4 * ko * gains.feed_forward(h), 0.0, 1.0, 0.0};
    return sys;
}

}  // namespace hpfc
