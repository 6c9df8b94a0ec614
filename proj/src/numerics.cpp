#include "hpfc/numerics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace hpfc {

// ---------------------------------------------------------------------------
// eigenvalues: balance -> Hessenberg -> Francis double-shift QR
// ---------------------------------------------------------------------------

// Iterative diagonal scaling by powers of 2 (exact in binary) until row and
// column norms agree; scale[i] accumulates the applied factors.
static void balance_in_place(Matrix& a, Vec& scale) {
    const double radix = 2.0;
    const int n = a.rows;
    scale.assign(n, 1.0);
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) {
                    c += std::fabs(a(j, i));
                    r += std::fabs(a(i, j));
                }
            if (c != 0.0 && r != 0.0) {
                double g = r / radix;
                double f = 1.0;
                double s = c + r;
                while (c < g) {
                    f *= radix;
                    c *= radix * radix;
                }
                g = r * radix;
                while (c > g) {
                    f /= radix;
                    c /= radix * radix;
                }
                if ((c + r) / f < 0.95 * s) {
                    done = false;
                    g = 1.0 / f;
                    scale[i] *= f;
                    for (int j = 0; j < n; ++j) a(i, j) *= g;
                    for (int j = 0; j < n; ++j) a(j, i) *= f;
                }
            }
        }
    }
}

// Reduce to upper Hessenberg by stabilized elementary similarity transforms.
static void hessenberg_in_place(Matrix& a) {
    const int n = a.rows;
    for (int m = 1; m < n - 1; ++m) {
        double x = 0.0;
        int piv = m;
        for (int j = m; j < n; ++j)
            if (std::fabs(a(j, m - 1)) > std::fabs(x)) {
                x = a(j, m - 1);
                piv = j;
            }
        if (piv != m) {
            for (int j = m - 1; j < n; ++j) std::swap(a(piv, j), a(m, j));
            for (int j = 0; j < n; ++j) std::swap(a(j, piv), a(j, m));
        }
        if (x != 0.0) {
            for (int i = m + 1; i < n; ++i) {
                double y = a(i, m - 1);
                if (y != 0.0) {
                    y /= x;
                    a(i, m - 1) = y;
                    for (int j = m; j < n; ++j) a(i, j) -= y * a(m, j);
                    for (int j = 0; j < n; ++j) a(j, m) += y * a(j, i);
                }
            }
        }
    }
    // multipliers were parked below the subdiagonal; wipe them
    for (int i = 2; i < n; ++i)
        for (int j = 0; j < i - 1; ++j) a(i, j) = 0.0;
}

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
static void hqr_in_place(Matrix& a, Vec& wr, Vec& wi) {
    const int n = a.rows;
    wr.assign(n, 0.0);
    wi.assign(n, 0.0);
    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::fabs(a(i, j));
    if (anorm == 0.0) return;  // all-zero matrix

    int nn = n - 1;
    double t = 0.0;
    double p = 0.0, q = 0.0, r = 0.0;  // live across the shift and sweep loops
    while (nn >= 0) {
        int its = 0;
        int l;
        do {
            // deflation scan: negligible subdiagonal splits the problem
            for (l = nn; l >= 1; --l) {
                double s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::fabs(a(l, l - 1)) <= DBL_EPSILON * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = a(nn, nn);
            if (l == nn) {  // one real root
                wr[nn] = x + t;
                wi[nn] = 0.0;
                --nn;
            } else {
                double y = a(nn - 1, nn - 1);
                double w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {  // 2x2 trailing block: real pair or complex pair
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    double z = std::sqrt(std::fabs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + std::copysign(z, p);
                        wr[nn - 1] = wr[nn] = x + z;
                        if (z != 0.0) wr[nn] = x - w / z;
                        wi[nn - 1] = wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = wr[nn] = x + p;
                        wi[nn] = z;
                        wi[nn - 1] = -z;
                    }
                    nn -= 2;
                } else {
                    if (its == 30)
                        throw NumericError("eigenvalue QR iteration failed to converge");
                    if (its == 10 || its == 20) {  // exceptional shift
                        t += x;
                        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                        double s = std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m;
                    for (m = nn - 2; m >= l; --m) {
                        double z = a(m, m);
                        r = x - z;
                        double s = y - z;
                        p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::fabs(p) + std::fabs(q) + std::fabs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        double u = std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
                        double v = std::fabs(p) *
                                   (std::fabs(a(m - 1, m - 1)) + std::fabs(z) +
                                    std::fabs(a(m + 1, m + 1)));
                        if (u <= DBL_EPSILON * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }
                    // double QR sweep: chase the bulge from m to nn
                    for (int k = m; k <= nn - 1; ++k) {
                        double xk = 0.0;
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
                            xk = std::fabs(p) + std::fabs(q) + std::fabs(r);
                            if (xk != 0.0) {
                                p /= xk;
                                q /= xk;
                                r /= xk;
                            }
                        }
                        double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
                        if (s != 0.0) {
                            if (k == m) {
                                if (l != m) a(k, k - 1) = -a(k, k - 1);
                            } else {
                                a(k, k - 1) = -s * xk;
                            }
                            p += s;
                            double hx = p / s;
                            double hy = q / s;
                            double hz = r / s;
                            q /= p;
                            r /= p;
                            for (int j = k; j <= nn; ++j) {
                                double pj = a(k, j) + q * a(k + 1, j);
                                if (k != nn - 1) {
                                    pj += r * a(k + 2, j);
                                    a(k + 2, j) -= pj * hz;
                                }
                                a(k + 1, j) -= pj * hy;
                                a(k, j) -= pj * hx;
                            }
                            int mmin = nn < k + 3 ? nn : k + 3;
                            for (int i = l; i <= mmin; ++i) {
                                double pi = hx * a(i, k) + hy * a(i, k + 1);
                                if (k != nn - 1) {
                                    pi += hz * a(i, k + 2);
                                    a(i, k + 2) -= pi * r;
                                }
                                a(i, k + 1) -= pi * q;
                                a(i, k) -= pi;
                            }
                        }
                    }
                }
            }
        } while (nn >= 0 && l + 1 < nn);
    }
}

CVec eigenvalues(const Matrix& a_in) {
    if (a_in.rows != a_in.cols) throw ValidationError("eigenvalues: matrix must be square");
    const int n = a_in.rows;
    if (n > 12) throw ValidationError("eigenvalues: dimension > 12 unsupported");
    if (!a_in.is_finite()) throw ValidationError("eigenvalues: non-finite entries");
    if (n == 0) return {};
    if (n == 1) return {Cplx(a_in(0, 0), 0.0)};

    Matrix a = a_in;
    Vec scale;
    balance_in_place(a, scale);
    hessenberg_in_place(a);
    Vec wr, wi;
    hqr_in_place(a, wr, wi);

    CVec ev(n);
    for (int i = 0; i < n; ++i) ev[i] = Cplx(wr[i], wi[i]);
    std::sort(ev.begin(), ev.end(), [](const Cplx& x, const Cplx& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return ev;
}

// ---------------------------------------------------------------------------
// pole placement (Ackermann on the balanced pair)
// ---------------------------------------------------------------------------

// Gaussian elimination with full pivoting; counts pivots above tol.
static int rank_estimate(Matrix c, double rel_tol) {
    const int n = c.rows;
    double scale = 0.0;
    for (double v : c.a) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) return 0;
    const double tol = rel_tol * scale;
    int rank = 0;
    std::vector<bool> used_row(n, false), used_col(n, false);
    for (int step = 0; step < n; ++step) {
        int pi = -1, pj = -1;
        double best = tol;
        for (int i = 0; i < n; ++i) {
            if (used_row[i]) continue;
            for (int j = 0; j < n; ++j) {
                if (used_col[j]) continue;
                if (std::fabs(c(i, j)) > best) {
                    best = std::fabs(c(i, j));
                    pi = i;
                    pj = j;
                }
            }
        }
        if (pi < 0) break;
        used_row[pi] = true;
        used_col[pj] = true;
        ++rank;
        for (int i = 0; i < n; ++i) {
            if (used_row[i] || c(i, pj) == 0.0) continue;
            double f = c(i, pj) / c(pi, pj);
            for (int j = 0; j < n; ++j)
                if (!used_col[j]) c(i, j) -= f * c(pi, j);
            c(i, pj) = 0.0;
        }
    }
    return rank;
}

static void check_conjugate_closed(const CVec& desired) {
    const double tol = 1e-9;
    std::vector<bool> matched(desired.size(), false);
    for (size_t i = 0; i < desired.size(); ++i) {
        if (matched[i] || desired[i].imag() == 0.0) continue;
        bool found = false;
        for (size_t j = 0; j < desired.size(); ++j) {
            if (j == i || matched[j]) continue;
            double s = 1.0 + std::abs(desired[i]);
            if (std::abs(desired[j] - std::conj(desired[i])) <= tol * s) {
                matched[i] = matched[j] = true;
                found = true;
                break;
            }
        }
        if (!found)
            throw ValidationError("place_poles: desired set not closed under conjugation");
    }
}

Vec place_poles(const Matrix& a_in, const Vec& b_in, const CVec& desired) {
    if (a_in.rows != a_in.cols) throw ValidationError("place_poles: matrix must be square");
    const int n = a_in.rows;
    if (static_cast<int>(b_in.size()) != n)
        throw ValidationError("place_poles: input vector length mismatch");
    if (static_cast<int>(desired.size()) != n)
        throw ValidationError("place_poles: need exactly n desired poles");
    check_conjugate_closed(desired);

    // balance the pair: Ab = D^-1 A D, bb = D^-1 b; gains map back as k/D
    Matrix ab = a_in;
    Vec scale;
    balance_in_place(ab, scale);
    Vec bb(n);
    for (int i = 0; i < n; ++i) bb[i] = b_in[i] / scale[i];

    // controllability matrix [b, Ab b, ..., Ab^{n-1} b]
    Matrix ctrb(n, n);
    Vec col = bb;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) ctrb(i, j) = col[i];
        if (j + 1 < n) col = matvec(ab, col);
    }
    // equilibrate the state rows to unit max: mixed physical units (meters
    // against pascals) must not masquerade as rank deficiency.  The solve
    // below restores the scale through y.
    Vec rs(n, 1.0);
    for (int i = 0; i < n; ++i) {
        double m = 0.0;
        for (int j = 0; j < n; ++j) m = std::max(m, std::fabs(ctrb(i, j)));
        if (m > 0.0) rs[i] = m;
        for (int j = 0; j < n; ++j) ctrb(i, j) /= rs[i];
    }
    int rank = rank_estimate(ctrb, 1e-10);
    if (rank < n)
        throw UncontrollableError("place_poles: controllability matrix rank " +
                                      std::to_string(rank) + " of " + std::to_string(n) +
                                      "; some states are unreachable from the input",
                                  rank, n);
    double cnd = cond_1(ctrb);
    if (cnd > 1e12)
        log_warning("place_poles: controllability matrix condition " + std::to_string(cnd) +
                    "; placed gains may be inaccurate");

    // phi(Ab): real characteristic polynomial assembled from real roots and
    // conjugate pairs to stay in real arithmetic
    std::vector<bool> used(desired.size(), false);
    Matrix phi = Matrix::identity(n);
    for (size_t i = 0; i < desired.size(); ++i) {
        if (used[i]) continue;
        const Cplx& lam = desired[i];
        if (lam.imag() == 0.0) {
            Matrix m = ab;
            for (int d = 0; d < n; ++d) m(d, d) -= lam.real();
            phi = phi * m;
            used[i] = true;
        } else {
            size_t jmatch = i;
            double bestd = std::numeric_limits<double>::infinity();
            for (size_t j = i + 1; j < desired.size(); ++j) {
                if (used[j]) continue;
                double d = std::abs(desired[j] - std::conj(lam));
                if (d < bestd) {
                    bestd = d;
                    jmatch = j;
                }
            }
            Matrix m = ab * ab;
            double tr = 2.0 * lam.real();
            double sq = std::norm(lam);
            for (int r2 = 0; r2 < n; ++r2) {
                for (int c2 = 0; c2 < n; ++c2) m(r2, c2) -= tr * ab(r2, c2);
                m(r2, r2) += sq;
            }
            phi = phi * m;
            used[i] = true;
            used[jmatch] = true;
        }
    }

    // k = e_n^T ctrb^-1 phi  ->  solve ctrb^T y = e_n, then k = phi^T y
    Vec en(n, 0.0);
    en[n - 1] = 1.0;
    Vec y;
    try {
        y = lu_solve(transpose(ctrb), en);
    } catch (const NumericError&) {
        throw UncontrollableError(
            "place_poles: controllability matrix numerically singular", rank, n);
    }
    for (int i = 0; i < n; ++i) y[i] /= rs[i];
    Vec k = matvec(transpose(phi), y);
    for (int i = 0; i < n; ++i) k[i] /= scale[i];
    return k;
}

// ---------------------------------------------------------------------------
// frequency response and bandwidth
// ---------------------------------------------------------------------------

Cplx frequency_response(const Matrix& a, const Vec& b, const Vec& c, double w) {
    if (a.rows != a.cols) throw ValidationError("frequency_response: matrix must be square");
    const int n = a.rows;
    if (static_cast<int>(b.size()) != n || static_cast<int>(c.size()) != n)
        throw ValidationError("frequency_response: vector length mismatch");
    std::vector<CVec> m(n, CVec(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m[i][j] = Cplx(-a(i, j), 0.0);
        m[i][i] += Cplx(0.0, w);
    }
    CVec rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = Cplx(b[i], 0.0);
    CVec x = lu_solve(std::move(m), std::move(rhs));
    Cplx h(0.0, 0.0);
    for (int i = 0; i < n; ++i) h += c[i] * x[i];
    return h;
}

double bandwidth_hz(const Matrix& a, const Vec& b, const Vec& c) {
    double h0 = std::abs(frequency_response(a, b, c, 0.0));
    if (!(h0 > 0.0) || !std::isfinite(h0))
        throw ValidationError("bandwidth_hz: DC gain is zero or not finite");
    const double target = h0 / std::sqrt(2.0);
    auto mag = [&](double f_hz) {
        return std::abs(frequency_response(a, b, c, 2.0 * std::numbers::pi * f_hz));
    };
    const double f_min = 1e-4, f_max = 1e4;
    const int per_decade = 25;
    double f_prev = f_min;
    if (mag(f_min) < target)
        throw NumericError("bandwidth_hz: response already below -3 dB at " +
                           std::to_string(f_min) + " Hz");
    const double step = std::pow(10.0, 1.0 / per_decade);
    for (double f = f_min * step; f <= f_max * step; f *= step) {
        if (mag(f) < target) {
            double lo = f_prev, hi = f;
            while ((hi - lo) / lo > 1e-3) {
                double mid = std::sqrt(lo * hi);
                if (mag(mid) < target)
                    hi = mid;
                else
                    lo = mid;
            }
            return std::sqrt(lo * hi);
        }
        f_prev = f;
    }
    throw NumericError("bandwidth_hz: no -3 dB crossing found below 10 kHz");
}

}  // namespace hpfc
