#include "vcone/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vcone/error.hpp"

namespace vcone {

CMatrix CMatrix::identity(int n) {
    CMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::adjoint() const {
    CMatrix out(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) out(i, j) = std::conj((*this)(j, i));
    return out;
}

double CMatrix::hermiticity_residual() const {
    double r = 0;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r = std::max(r, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return r;
}

CMatrix operator*(const CMatrix& x, const CMatrix& y) {
    require(x.dim == y.dim, "matrix dimension mismatch");
    CMatrix out(x.dim);
    for (int i = 0; i < x.dim; ++i)
        for (int k = 0; k < x.dim; ++k) {
            const cplx xik = x(i, k);
            if (xik == cplx(0)) continue;
            for (int j = 0; j < x.dim; ++j) out(i, j) += xik * y(k, j);
        }
    return out;
}

CMatrix operator+(const CMatrix& x, const CMatrix& y) {
    require(x.dim == y.dim, "matrix dimension mismatch");
    CMatrix out = x;
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += y.a[i];
    return out;
}

CMatrix operator-(const CMatrix& x, const CMatrix& y) {
    require(x.dim == y.dim, "matrix dimension mismatch");
    CMatrix out = x;
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] -= y.a[i];
    return out;
}

CMatrix operator*(cplx s, const CMatrix& x) {
    CMatrix out = x;
    for (auto& v : out.a) v *= s;
    return out;
}

CMatrix kron(const CMatrix& x, const CMatrix& y) {
    CMatrix out(x.dim * y.dim);
    for (int i = 0; i < x.dim; ++i)
        for (int j = 0; j < x.dim; ++j)
            for (int k = 0; k < y.dim; ++k)
                for (int l = 0; l < y.dim; ++l) out(i * y.dim + k, j * y.dim + l) = x(i, j) * y(k, l);
    return out;
}

std::vector<cplx> apply(const CMatrix& m, const std::vector<cplx>& v) {
    require(static_cast<int>(v.size()) == m.dim, "vector dimension mismatch");
    std::vector<cplx> out(v.size());
    for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < m.dim; ++j) out[static_cast<std::size_t>(i)] += m(i, j) * v[static_cast<std::size_t>(j)];
    return out;
}

double norm(const std::vector<cplx>& v) {
    double s = 0;
    for (const auto& c : v) s += std::norm(c);
    return std::sqrt(s);
}

EigenResult hermitian_eigen(const CMatrix& h, double tol, int max_sweeps) {
    const int n = h.dim;
    require(n > 0, "empty matrix");
    double scale = 1.0;
    for (const auto& c : h.a) scale = std::max(scale, std::abs(c));
    require(h.hermiticity_residual() <= 1e-9 * scale, "hermitian_eigen needs a Hermitian matrix");
    CMatrix a = h;
    // Symmetrize away rounding so the rotations act on an exactly Hermitian matrix.
    for (int i = 0; i < n; ++i) {
        a(i, i) = a(i, i).real();
        for (int j = i + 1; j < n; ++j) {
            const cplx m = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = m;
            a(j, i) = std::conj(m);
        }
    }
    CMatrix v = CMatrix::identity(n);
    double frob = 0;
    for (const auto& c : a.a) frob += std::norm(c);
    frob = std::sqrt(frob);

    EigenResult res;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += std::norm(a(i, j));
        off = std::sqrt(2 * off);
        res.sweeps = sweep;
        if (off <= tol * frob || off == 0) break;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag == 0) continue;
                // Phase e^{i phi} makes the pivot real, then a real Jacobi
                // rotation annihilates it:  J = [[c, -s e^{i phi}], [s e^{-i phi}, c]].
                const cplx phase = apq / mag;
                const double app = a(p, p).real(), aqq = a(q, q).real();
                const double theta = 0.5 * std::atan2(2 * mag, aqq - app);
                const double c = std::cos(theta), s = std::sin(theta);
                const cplx sp = s * phase;  // s e^{i phi}
                // A <- J^H A J applied as column then row updates.
                for (int k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - std::conj(sp) * akq;
                    a(k, q) = sp * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sp * aqk;
                    a(q, k) = std::conj(sp) * apk + c * aqk;
                }
                a(p, q) = 0;
                a(q, p) = 0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (int k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - std::conj(sp) * vkq;
                    v(k, q) = sp * vkp + c * vkq;
                }
            }
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
    res.vectors = CMatrix(n);
    for (int k = 0; k < n; ++k) {
        res.values.push_back(a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real());
        for (int i = 0; i < n; ++i) res.vectors(i, k) = v(i, order[static_cast<std::size_t>(k)]);
    }
    return res;
}

}  // namespace vcone
