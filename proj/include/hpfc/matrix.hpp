#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace hpfc {

using Vec = std::vector<double>;
using Cplx = std::complex<double>;
using CVec = std::vector<Cplx>;

// Dense row-major matrix.  Sized for control-design work (n <= a few dozen),
// no attempt at sparsity or blocking.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
    Matrix(int r, int c, std::initializer_list<double> vals);

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Matrix identity(int n);
    bool is_finite() const;
};

Matrix operator+(const Matrix& x, const Matrix& y);
Matrix operator-(const Matrix& x, const Matrix& y);
Matrix operator*(const Matrix& x, const Matrix& y);
Matrix operator*(double s, const Matrix& x);
Matrix transpose(const Matrix& x);

Vec matvec(const Matrix& x, const Vec& v);
double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double norm_inf(const Matrix& x);  // max row sum

// Rows/columns listed in `idx` extracted into a dense block, order preserved.
Matrix submatrix(const Matrix& x, const std::vector<int>& idx);
Vec subvector(const Vec& v, const std::vector<int>& idx);

// LU with partial pivoting.  Throws NumericError("singular matrix ...") when a
// pivot underflows the scale of the factorization.
Vec lu_solve(Matrix a, Vec b);
Matrix lu_solve_multi(Matrix a, Matrix b);
CVec lu_solve(std::vector<CVec> a, CVec b);  // dense complex variant

// 1-norm condition estimate via explicit inverse; fine at these sizes.
double cond_1(const Matrix& a);

}  // namespace hpfc
