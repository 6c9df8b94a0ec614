#pragma once

#include <vector>

#include "hpfc/matrix.hpp"
#include "hpfc/plant.hpp"
#include "hpfc/types.hpp"

namespace hpfc {

// Full-state feedback gains with integral action.  Position mode must keep
// K4 = 0 and force mode K1 = 0 (the respective state is not fed back).
struct GainVector {
    double k1 = 0.0;  // position gain [input/m]
    double k2 = 0.0;  // velocity gain [input*s/m]
    double k3 = 0.0;  // pressure gain [input/Pa]
    double k4 = 0.0;  // force gain [input/N]
    double ki = 0.0;  // integral gain

    double feed_forward(Mode h) const { return h == Mode::position ? k1 : k4; }
    void validate(Mode h) const;
};

// Linearization constants at the per-mode operating point.
struct OperatingPoint {
    double omega = 0.0;      // orifice pressure root sqrt(0.5(P_S - P_L0)) [sqrt(Pa)]
    double k_w = 0.0;        // friction slope [N*s/m]
    double d_w = 0.0;        // friction offset [N]
    double stiffness = 0.0;  // environment stiffness [N/m], force mode only
};

// One mode of the switched affine closed loop.  State order
// (x, dx, P_L, F_L, e, 1): five physical/error states plus a constant-1
// augmentation carrying the affine friction offset.
struct ModeSystem {
    Matrix a_bar;  // 6x6
    Vec b_bar;     // 6, reference input column
    Vec c_bar;     // 6, controlled output row
    Mode h = Mode::position;
    OperatingPoint op;
};

// Augmented open loop (x, dx, P_L, F_L, e) before feedback, mode-wired:
// position mode freezes F_L (no load coupling, zero row), force mode couples
// dF_L = c*dx; error row is d(e) = -y so that closing the loop adds r.
struct OpenLoopAug {
    Matrix a_e;  // 5x5
    Vec b_e;     // 5
    Vec f_e;     // 5, affine offset
    Vec c_e;     // 5
    Mode h = Mode::position;
};

ModeSystem build_closed_loop(const PlantParams& p, const GainVector& gains, Mode h,
                             const OperatingPoint& op);

OpenLoopAug open_loop_augmented(const PlantParams& p, const OperatingPoint& op, Mode h);

// Feedback row k = (K1, K2, K3, K4, -Ki) matching the open-loop state order.
Vec feedback_row(const GainVector& gains);

// Indices of the four dynamically active states within the 5-state block:
// position mode (x, dx, P_L, e), force mode (dx, P_L, F_L, e).  The excluded
// state is frozen by the mode's gain structure and contributes an exact zero
// eigenvalue.
std::vector<int> dynamic_state_indices(Mode h);

}  // namespace hpfc
