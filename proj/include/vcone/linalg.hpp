#pragma once
#include <complex>
#include <vector>

namespace vcone {

using cplx = std::complex<double>;

// Small dense row-major complex matrix.
struct CMatrix {
    int dim = 0;
    std::vector<cplx> a;

    CMatrix() = default;
    explicit CMatrix(int n) : dim(n), a(static_cast<std::size_t>(n) * n) {}
    static CMatrix identity(int n);

    cplx& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * dim + j]; }
    const cplx& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * dim + j]; }

    CMatrix adjoint() const;
    double hermiticity_residual() const;
};

CMatrix operator*(const CMatrix& x, const CMatrix& y);
CMatrix operator+(const CMatrix& x, const CMatrix& y);
CMatrix operator-(const CMatrix& x, const CMatrix& y);
CMatrix operator*(cplx s, const CMatrix& x);
CMatrix kron(const CMatrix& x, const CMatrix& y);
std::vector<cplx> apply(const CMatrix& m, const std::vector<cplx>& v);
double norm(const std::vector<cplx>& v);

struct EigenResult {
    std::vector<double> values;  // ascending
    CMatrix vectors;             // column k pairs with values[k]
    int sweeps = 0;
};

// Cyclic Jacobi for Hermitian matrices: each sweep rotates away every
// off-diagonal pair in order until the off-diagonal norm drops below
// tol times the Frobenius norm.
EigenResult hermitian_eigen(const CMatrix& h, double tol = 1e-15, int max_sweeps = 100);

}  // namespace vcone
