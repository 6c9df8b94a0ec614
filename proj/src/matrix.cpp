#include "hpfc/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <utility>

#include "hpfc/errors.hpp"

namespace hpfc {

Matrix::Matrix(int r, int c, std::initializer_list<double> vals) : Matrix(r, c) {
    if (static_cast<int>(vals.size()) != r * c)
        throw ValidationError("matrix initializer size mismatch");
    int k = 0;
    for (double v : vals) a[k++] = v;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::is_finite() const {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

static void check_same_shape(const Matrix& x, const Matrix& y) {
    if (x.rows != y.rows || x.cols != y.cols)
        throw ValidationError("matrix shape mismatch");
}

Matrix operator+(const Matrix& x, const Matrix& y) {
    check_same_shape(x, y);
    Matrix r = x;
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
    return r;
}

Matrix operator-(const Matrix& x, const Matrix& y) {
    check_same_shape(x, y);
    Matrix r = x;
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
    return r;
}

Matrix operator*(const Matrix& x, const Matrix& y) {
    if (x.cols != y.rows) throw ValidationError("matrix product shape mismatch");
    Matrix r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            double xik = x(i, k);
            if (xik == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}

Matrix operator*(double s, const Matrix& x) {
    Matrix r = x;
    for (double& v : r.a) v *= s;
    return r;
}

Matrix transpose(const Matrix& x) {
    Matrix r(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) r(j, i) = x(i, j);
    return r;
}

Vec matvec(const Matrix& x, const Vec& v) {
    if (x.cols != static_cast<int>(v.size()))
        throw ValidationError("matvec shape mismatch");
    Vec r(x.rows, 0.0);
    for (int i = 0; i < x.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < x.cols; ++j) s += x(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

double dot(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw ValidationError("dot shape mismatch");
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double norm_inf(const Matrix& x) {
    double best = 0.0;
    for (int i = 0; i < x.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < x.cols; ++j) s += std::fabs(x(i, j));
        if (s > best) best = s;
    }
    return best;
}

Matrix submatrix(const Matrix& x, const std::vector<int>& idx) {
    Matrix r(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = 0; j < idx.size(); ++j)
            r(static_cast<int>(i), static_cast<int>(j)) = x(idx[i], idx[j]);
    return r;
}

Vec subvector(const Vec& v, const std::vector<int>& idx) {
    Vec r(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) r[i] = v[idx[i]];
    return r;
}

// In-place LU with partial pivoting; perm holds the row order.
static void lu_factor(Matrix& a, std::vector<int>& perm) {
    if (a.rows != a.cols) throw ValidationError("lu: matrix must be square");
    const int n = a.rows;
    perm.resize(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double scale = 0.0;
    for (double v : a.a) scale = std::max(scale, std::fabs(v));
    const double tiny = scale * 1e-300 + 1e-300;
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::fabs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            double v = std::fabs(a(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best <= tiny) throw NumericError("singular matrix in LU solve");
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(perm[k], perm[p]);
        }
        for (int i = k + 1; i < n; ++i) {
            double f = a(i, k) / a(k, k);
            a(i, k) = f;
            for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
}

static Vec lu_backsolve(const Matrix& lu, const std::vector<int>& perm, const Vec& b) {
    const int n = lu.rows;
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
        x[i] /= lu(i, i);
    }
    return x;
}

Vec lu_solve(Matrix a, Vec b) {
    if (a.rows != static_cast<int>(b.size()))
        throw ValidationError("lu_solve shape mismatch");
    std::vector<int> perm;
    lu_factor(a, perm);
    return lu_backsolve(a, perm, b);
}

Matrix lu_solve_multi(Matrix a, Matrix b) {
    if (a.rows != b.rows) throw ValidationError("lu_solve_multi shape mismatch");
    std::vector<int> perm;
    lu_factor(a, perm);
    Matrix x(b.rows, b.cols);
    Vec col(b.rows);
    for (int j = 0; j < b.cols; ++j) {
        for (int i = 0; i < b.rows; ++i) col[i] = b(i, j);
        Vec s = lu_backsolve(a, perm, col);
        for (int i = 0; i < b.rows; ++i) x(i, j) = s[i];
    }
    return x;
}

CVec lu_solve(std::vector<CVec> a, CVec b) {
    const int n = static_cast<int>(b.size());
    if (static_cast<int>(a.size()) != n) throw ValidationError("complex lu shape mismatch");
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    double scale = 0.0;
    for (const auto& row : a)
        for (const Cplx& v : row) scale = std::max(scale, std::abs(v));
    const double tiny = scale * 1e-300 + 1e-300;
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(a[k][k]);
        for (int i = k + 1; i < n; ++i) {
            double v = std::abs(a[i][k]);
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best <= tiny) throw NumericError("singular matrix in complex LU solve");
        if (p != k) {
            std::swap(a[k], a[p]);
            std::swap(perm[k], perm[p]);
        }
        for (int i = k + 1; i < n; ++i) {
            Cplx f = a[i][k] / a[k][k];
            a[i][k] = f;
            for (int j = k + 1; j < n; ++j) a[i][j] -= f * a[k][j];
        }
    }
    CVec x(n);
    for (int i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) x[i] -= a[i][j] * x[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[i] -= a[i][j] * x[j];
        x[i] /= a[i][i];
    }
    return x;
}

double cond_1(const Matrix& a) {
    if (a.rows != a.cols) throw ValidationError("cond_1: matrix must be square");
    Matrix inv;
    try {
        inv = lu_solve_multi(a, Matrix::identity(a.rows));
    } catch (const NumericError&) {
        return std::numeric_limits<double>::infinity();
    }
    auto norm1 = [](const Matrix& m) {
        double best = 0.0;
        for (int j = 0; j < m.cols; ++j) {
            double s = 0.0;
            for (int i = 0; i < m.rows; ++i) s += std::fabs(m(i, j));
            best = std::max(best, s);
        }
        return best;
    };
    return norm1(a) * norm1(inv);
}

}  // namespace hpfc
