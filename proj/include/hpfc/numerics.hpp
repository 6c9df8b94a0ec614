#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hpfc/errors.hpp"
#include "hpfc/matrix.hpp"

namespace hpfc {

// One classical Runge-Kutta step of dy/dt = f(y, t).  Every stage and the
// result are checked component-wise; the first non-finite entry aborts with
// IntegrationError carrying (t, component).
template <class F>
Vec integrate_rk4(F&& f, const Vec& y, double t, double dt) {
    const size_t n = y.size();
    auto check = [&](const Vec& v, double ts) {
        if (v.size() != n)
            throw ValidationError("integrate_rk4: derivative dimension mismatch");
        for (size_t i = 0; i < n; ++i)
            if (!std::isfinite(v[i]))
                throw IntegrationError("non-finite derivative component " +
                                           std::to_string(i) + " at t=" + std::to_string(ts),
                                       ts, static_cast<int>(i));
    };
    Vec k1 = f(y, t);
    check(k1, t);
    Vec y2(n), y3(n), y4(n);
    for (size_t i = 0; i < n; ++i) y2[i] = y[i] + 0.5 * dt * k1[i];
    Vec k2 = f(y2, t + 0.5 * dt);
    check(k2, t + 0.5 * dt);
    for (size_t i = 0; i < n; ++i) y3[i] = y[i] + 0.5 * dt * k2[i];
    Vec k3 = f(y3, t + 0.5 * dt);
    check(k3, t + 0.5 * dt);
    for (size_t i = 0; i < n; ++i) y4[i] = y[i] + dt * k3[i];
    Vec k4 = f(y4, t + dt);
    check(k4, t + dt);
    Vec out(n);
    for (size_t i = 0; i < n; ++i) {
        out[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(out[i]))
            throw IntegrationError("non-finite state component " + std::to_string(i) +
                                       " at t=" + std::to_string(t + dt),
                                   t + dt, static_cast<int>(i));
    }
    return out;
}

// Eigenvalues of a real square matrix (n <= 12): balance, reduce to upper
// Hessenberg, Francis double-shift QR.  Throws NumericError if QR stalls.
CVec eigenvalues(const Matrix& a);

// State feedback k so that eig(a - b k^T) equals `desired` (Ackermann).
// `desired` must be closed under conjugation.  Rank-deficient controllability
// throws UncontrollableError; condition above 1e12 only logs a warning.
Vec place_poles(const Matrix& a, const Vec& b, const CVec& desired);

// c^T (jw I - a)^{-1} b for a SISO realization; w in rad/s.
Cplx frequency_response(const Matrix& a, const Vec& b, const Vec& c, double w);

// First -3 dB crossing of |H(j 2 pi f)| relative to |H(0)|, searched on a log
// grid up to 10 kHz then bisected to <= 1 % relative width.  No crossing
// throws NumericError; zero or non-finite DC gain throws ValidationError.
double bandwidth_hz(const Matrix& a, const Vec& b, const Vec& c);

}  // namespace hpfc
