#include "hpfc/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hpfc/errors.hpp"
#include "hpfc/rng.hpp"

namespace hpfc {

void LyapunovWeights::validate() const {
    if (!(w1 > 0.0 && w2 > 0.0 && w3 > 0.0))
        throw ValidationError("lyapunov weights must all be > 0");
}

double lyapunov_value(const PlantState& s, double r, double y, const LyapunovWeights& w,
                      Mode /*h*/) {
    w.validate();
    double err = r - y;
    return w.w1 * s.v * s.v + w.w2 * s.p_l * s.p_l + w.w3 * err * err;
}

SequenceVerdict check_mode_sequence(const std::vector<SwitchEvent>& events) {
    for (size_t i = 1; i < events.size(); ++i)
        if (!(events[i].t > events[i - 1].t))
            throw ValidationError("check_mode_sequence: events must be time-ordered");

    SequenceVerdict v;
    for (const SwitchEvent& ev : events)
        (ev.to == Mode::position ? v.position_levels : v.force_levels).push_back(ev.level);

    auto scan = [&](const std::vector<double>& levels, Mode m) {
        for (size_t i = 1; i < levels.size(); ++i) {
            if (levels[i] > levels[i - 1] + 1e-9 * std::fabs(levels[i - 1])) {
                if (v.nonincreasing) {
                    v.nonincreasing = false;
                    v.violation_mode = m;
                    v.violation_index = static_cast<int>(i);
                }
            }
        }
    };
    scan(v.position_levels, Mode::position);
    scan(v.force_levels, Mode::force);
    return v;
}

// Gradient weight matrix Q of L over the 5-state block (x, dx, P_L, F_L, e):
// position mode reads the error from x, force mode from F_L.  The reference
// enters only the error term, which vanishes on homogeneous samples r = 0.
static Matrix weight_matrix(const LyapunovWeights& w, Mode h) {
    Matrix q(5, 5);
    q(1, 1) = w.w1;
    q(2, 2) = w.w2;
    if (h == Mode::position)
        q(0, 0) = w.w3;
    else
        q(3, 3) = w.w3;
    return q;
}

DecreaseReport verify_decrease(const LyapunovWeights& w, const Matrix& a_bar, Mode h,
                               int samples, uint64_t seed) {
    w.validate();
    if (samples < 100) throw ValidationError("verify_decrease: samples must be >= 100");
    if (a_bar.rows != a_bar.cols || (a_bar.rows != 5 && a_bar.rows != 6))
        throw ValidationError("verify_decrease: expected a 5x5 or 6x6 mode matrix");

    Matrix a5(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) a5(i, j) = a_bar(i, j);
    Matrix q = weight_matrix(w, h);
    Matrix m = q * a5 + transpose(a5) * q;  // dL/dt = x^T M x

    GaussianGen gen(seed);
    DecreaseReport rep;
    rep.samples = samples;
    rep.worst = -std::numeric_limits<double>::infinity();
    int dec = 0;
    Vec x(5);
    for (int s = 0; s < samples; ++s) {
        double n2 = 0.0;
        for (int i = 0; i < 5; ++i) {
            x[i] = gen.next();
            n2 += x[i] * x[i];
        }
        double inv = 1.0 / std::sqrt(n2);  // quadratic sign is radius-invariant
        for (int i = 0; i < 5; ++i) x[i] *= inv;
        double d = 0.0;
        for (int i = 0; i < 5; ++i) {
            double row = 0.0;
            for (int j = 0; j < 5; ++j) row += m(i, j) * x[j];
            d += x[i] * row;
        }
        if (d <= 0.0) ++dec;
        if (d > rep.worst) rep.worst = d;
    }
    rep.fraction_decreasing = static_cast<double>(dec) / samples;
    return rep;
}

WeightSearchResult search_weights(const Matrix& a_bar, Mode h, int iters, int samples,
                                  uint64_t seed) {
    if (iters < 1) throw ValidationError("search_weights: iters must be >= 1");
    WeightSearchResult best;
    best.report.fraction_decreasing = -1.0;

    std::mt19937_64 eng(seed);
    for (int it = 0; it < iters; ++it) {
        LyapunovWeights w;
        if (it > 0) {  // iteration 0 probes the unit weights
            w.w1 = std::pow(10.0, -12.0 + 24.0 * uniform01(eng));
            w.w2 = std::pow(10.0, -12.0 + 24.0 * uniform01(eng));
            w.w3 = std::pow(10.0, -12.0 + 24.0 * uniform01(eng));
        }
        DecreaseReport rep = verify_decrease(w, a_bar, h, samples, seed ^ 0x9e3779b9ull);
        if (rep.fraction_decreasing > best.report.fraction_decreasing) {
            best.weights = w;
            best.report = rep;
        }
    }
    // firmer estimate for the winner
    best.report = verify_decrease(best.weights, a_bar, h, samples * 5, seed ^ 0xbeefull);
    best.success = best.report.fraction_decreasing >= 0.99;
    return best;
}

}  // namespace hpfc
