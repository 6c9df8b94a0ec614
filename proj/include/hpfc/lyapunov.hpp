#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpfc/matrix.hpp"
#include "hpfc/plant.hpp"
#include "hpfc/types.hpp"

namespace hpfc {

// Diagonal quadratic energy weights: L = W1 dx^2 + W2 P_L^2 + W3 (r - y)^2.
struct LyapunovWeights {
    double w1 = 1.0;
    double w2 = 1.0;
    double w3 = 1.0;
    void validate() const;
};

struct SwitchEvent {
    double t = 0.0;
    Mode from = Mode::position;
    Mode to = Mode::position;
    double level = 0.0;        // L evaluated at entry into `to`
    int activation_index = 0;  // per-mode activation counter, 0-based
};

// Per-mode entry-level sequences and the non-increase verdict.
struct SequenceVerdict {
    std::vector<double> position_levels;
    std::vector<double> force_levels;
    bool nonincreasing = true;
    Mode violation_mode = Mode::position;  // valid when !nonincreasing
    int violation_index = -1;              // index of the first offending level
};

// Sampled-derivative falsification result over unit-sphere states.
struct DecreaseReport {
    double fraction_decreasing = 0.0;  // share of samples with dL/dt <= 0
    double worst = 0.0;                // max dL/dt observed
    int samples = 0;
};

struct WeightSearchResult {
    LyapunovWeights weights;
    DecreaseReport report;
    bool success = false;  // fraction reached 0.99
};

// Exact quadratic form; y is the mode's controlled output.
double lyapunov_value(const PlantState& s, double r, double y, const LyapunovWeights& w,
                      Mode h);

// Groups entry levels per mode and checks each sequence is nonincreasing
// within 1e-9 relative tolerance.  Events must be time-ordered.
SequenceVerdict check_mode_sequence(const std::vector<SwitchEvent>& events);

// Monte Carlo over the 5-state block of a_bar (5x5 or 6x6 input; the
// constant state is excluded): dL/dt = x^T (Q A + A^T Q) x on unit-sphere
// samples.  A falsification probe, not a proof.
DecreaseReport verify_decrease(const LyapunovWeights& w, const Matrix& a_bar, Mode h,
                               int samples, uint64_t seed = 0x5eed1e5);

// Log-random search over [1e-12, 1e12]^3 maximizing the decreasing fraction;
// deterministic per seed.  success = best fraction >= 0.99 (non-fatal).
WeightSearchResult search_weights(const Matrix& a_bar, Mode h, int iters = 400,
                                  int samples = 2000, uint64_t seed = 0x5eedf00d);

}  // namespace hpfc
