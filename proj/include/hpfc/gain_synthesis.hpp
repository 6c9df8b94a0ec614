#pragma once

#include "hpfc/linear_system.hpp"
#include "hpfc/matrix.hpp"
#include "hpfc/types.hpp"

namespace hpfc {

// Closed-loop health report for one mode.  poles covers the full 5-state
// block and always contains one structural zero (the mode's frozen state);
// all_stable, dc_gain and bandwidth are evaluated on the four dynamically
// active states, where the loop is a proper SISO system.
struct GainReport {
    CVec poles;                  // 5-state block eigenvalues
    CVec poles_dynamic;          // 4 active-state eigenvalues
    bool all_stable = false;     // every active pole strictly left of the axis
    double dc_gain = 0.0;        // |H(0)| reference -> controlled output
    double bandwidth = 0.0;      // -3 dB frequency [Hz]; NaN when unstable
    double structural_zero = 0.0;  // modulus of the frozen-state eigenvalue
    bool slow_complex_pair = false;  // dominant pair with |Im/Re| > 1
};

// Pole placement on the mode's reduced 4-state subsystem; the frozen state's
// gain (K4 in position mode, K1 in force mode) is forced to zero.  `desired`
// may carry 4 poles, or 5 including one (near-)zero for the frozen state.
GainVector synthesize_gains(const OpenLoopAug& ol, const CVec& desired, Mode h);

GainReport verify_gains(const GainVector& gains, Mode h, const PlantParams& p,
                        const OperatingPoint& op);

}  // namespace hpfc
