#include "hpfc/gain_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hpfc/errors.hpp"
#include "hpfc/numerics.hpp"

namespace hpfc {

GainVector synthesize_gains(const OpenLoopAug& ol, const CVec& desired_in, Mode h) {
    if (ol.h != h) throw ValidationError("synthesize_gains: open loop built for other mode");
    if (ol.a_e.rows != 5) throw ValidationError("synthesize_gains: expected 5-state open loop");

    // accept 4 poles, or 5 with one (near-)zero entry for the frozen state
    CVec desired = desired_in;
    if (desired.size() == 5) {
        double maxabs = 0.0;
        for (const Cplx& z : desired) maxabs = std::max(maxabs, std::abs(z));
        size_t imin = 0;
        for (size_t i = 1; i < desired.size(); ++i)
            if (std::abs(desired[i]) < std::abs(desired[imin])) imin = i;
        if (std::abs(desired[imin]) > 1e-6 * std::max(1.0, maxabs))
            throw ValidationError(
                "synthesize_gains: 5 desired poles must include the structural zero");
        desired.erase(desired.begin() + static_cast<long>(imin));
    }
    if (desired.size() != 4)
        throw ValidationError("synthesize_gains: need 4 desired poles (or 5 with a zero)");

    std::vector<int> idx = dynamic_state_indices(h);
    Matrix a4 = submatrix(ol.a_e, idx);
    Vec b4 = subvector(ol.b_e, idx);

    Vec k4;
    try {
        k4 = place_poles(a4, b4, desired);
    } catch (const UncontrollableError& e) {
        const char* state = h == Mode::position ? "position subsystem (x, dx, P_L, e)"
                                                : "force subsystem (dx, P_L, F_L, e)";
        throw UncontrollableError(std::string("synthesize_gains: reduced ") + state +
                                      " uncontrollable: " + e.what(),
                                  e.rank, e.n);
    }

    GainVector g;
    Vec full(5, 0.0);
    for (size_t i = 0; i < idx.size(); ++i) full[idx[i]] = k4[i];
    g.k1 = full[0];
    g.k2 = full[1];
    g.k3 = full[2];
    g.k4 = full[3];
    g.ki = -full[4];  // feedback row carries -Ki in the error slot
    g.validate(h);
    return g;
}

GainReport verify_gains(const GainVector& gains, Mode h, const PlantParams& p,
                        const OperatingPoint& op) {
    ModeSystem sys = build_closed_loop(p, gains, h, op);

    Matrix a5(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) a5(i, j) = sys.a_bar(i, j);

    GainReport rep;
    rep.poles = eigenvalues(a5);
    double zero_mod = std::numeric_limits<double>::infinity();
    for (const Cplx& z : rep.poles) zero_mod = std::min(zero_mod, std::abs(z));
    rep.structural_zero = zero_mod;

    std::vector<int> idx = dynamic_state_indices(h);
    Matrix a4 = submatrix(a5, idx);
    Vec b4 = subvector(sys.b_bar, idx);
    Vec c4 = subvector(sys.c_bar, idx);

    rep.poles_dynamic = eigenvalues(a4);
    rep.all_stable = true;
    for (const Cplx& z : rep.poles_dynamic)
        if (!(z.real() < 0.0)) rep.all_stable = false;

    try {
        rep.dc_gain = std::abs(frequency_response(a4, b4, c4, 0.0));
    } catch (const NumericError&) {
        rep.dc_gain = std::numeric_limits<double>::quiet_NaN();  // loop has no DC path
    }
    if (rep.all_stable) {
        try {
            rep.bandwidth = bandwidth_hz(a4, b4, c4);
        } catch (const NumericError&) {
            rep.bandwidth = std::numeric_limits<double>::quiet_NaN();
        }
    } else {
        rep.bandwidth = std::numeric_limits<double>::quiet_NaN();
    }

    // design guideline: flag an oscillatory dominant pair near the origin
    CVec sorted = rep.poles_dynamic;
    std::sort(sorted.begin(), sorted.end(), [](const Cplx& x, const Cplx& y) {
        return std::fabs(x.real()) < std::fabs(y.real());
    });
    if (sorted.size() >= 2) {
        const Cplx& s0 = sorted[0];
        const Cplx& s1 = sorted[1];
        bool pair = std::fabs(s0.real() - s1.real()) <=
                        1e-9 * (1.0 + std::fabs(s0.real())) &&
                    std::fabs(s0.imag() + s1.imag()) <= 1e-9 * (1.0 + std::fabs(s0.imag())) &&
                    s0.imag() != 0.0;
        if (pair && s0.real() != 0.0 &&
            std::fabs(s0.imag()) > std::fabs(s0.real()))
            rep.slow_complex_pair = true;
    }
    return rep;
}

}  // namespace hpfc
