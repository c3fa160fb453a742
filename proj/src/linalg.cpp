#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "callias/error.hpp"
#include "callias/linalg.hpp"

extern "C" void openblas_set_num_threads(int);

namespace callias {

RealEigResult tridiagonal_eig(const rvec& diag, const rvec& off, bool vectors)
{
    const lapack_int n = static_cast<lapack_int>(diag.size());
    RealEigResult out;
    if (n == 0)
        return out;
    std::vector<double> d(diag.data(), diag.data() + n);
    std::vector<double> e(static_cast<size_t>(n), 0.0);
    for (lapack_int i = 0; i + 1 < n; ++i)
        e[static_cast<size_t>(i)] = off(i);
    if (vectors) {
        // Divide and conquer gives eigenvectors orthogonal to working precision; MRRR drifts by O(n eps).
        out.vectors.resize(n, n);
        lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', n, d.data(), e.data(), out.vectors.data(), n);
        if (info != 0)
            fail(ErrorKind::ConvergenceFailure, "tridiagonal eigensolver failed, info=" + std::to_string(info));
        out.values = Eigen::Map<rvec>(d.data(), n);
        return out;
    }
    std::vector<double> w(static_cast<size_t>(n));
    std::vector<lapack_int> isuppz(2 * static_cast<size_t>(n));
    lapack_int m = 0;
    lapack_logical tryrac = 1;
    lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'N', 'A', n, d.data(), e.data(), 0.0, 0.0, 0, 0, &m,
                                     w.data(), nullptr, n, n, isuppz.data(), &tryrac);
    if (info != 0 || m != n)
        fail(ErrorKind::ConvergenceFailure, "tridiagonal eigensolver failed, info=" + std::to_string(info));
    out.values = Eigen::Map<rvec>(w.data(), n);
    return out;
}

EigResult hermitian_eig(const cmat& a, bool vectors)
{
    const lapack_int n = static_cast<lapack_int>(a.rows());
    EigResult out;
    if (n == 0)
        return out;
    cmat work = a;
    out.values.resize(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'U', n, work.data(), n,
                                     out.values.data());
    if (info != 0)
        fail(ErrorKind::ConvergenceFailure, "Hermitian eigensolver failed, info=" + std::to_string(info));
    if (vectors)
        out.vectors = std::move(work);
    return out;
}

cmat tridiagonal_inverse(const cvec& lower, const cvec& diag, const cvec& upper)
{
    const lapack_int n = static_cast<lapack_int>(diag.size());
    cmat b = cmat::Identity(n, n);
    if (n == 0)
        return b;
    cvec dl = lower, d = diag, du = upper;
    lapack_int info = LAPACKE_zgtsv(LAPACK_COL_MAJOR, n, n, dl.data(), d.data(), du.data(), b.data(), n);
    if (info != 0)
        fail(ErrorKind::ConvergenceFailure, "tridiagonal solve hit a singular pivot, info=" + std::to_string(info));
    return b;
}

rvec singular_values(const cmat& a)
{
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    const lapack_int k = std::min(m, n);
    rvec s(k);
    if (k == 0)
        return s;
    cmat work = a;
    lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m, s.data(), nullptr, 1,
                                     nullptr, 1);
    if (info != 0)
        fail(ErrorKind::ConvergenceFailure, "SVD failed, info=" + std::to_string(info));
    return s;
}

SvdResult svd_full(const cmat& a)
{
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    SvdResult out;
    out.s.resize(std::min(m, n));
    out.u = cmat::Identity(m, m);
    out.v = cmat::Identity(n, n);
    if (m == 0 || n == 0)
        return out;
    cmat work = a;
    cmat vt(n, n);
    lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'A', m, n, work.data(), m, out.s.data(),
                                     out.u.data(), m, vt.data(), n);
    if (info != 0)
        fail(ErrorKind::ConvergenceFailure, "SVD failed, info=" + std::to_string(info));
    out.v = vt.adjoint();
    return out;
}

double norm2(const cmat& a)
{
    if (a.size() == 0)
        return 0.0;
    if (std::min(a.rows(), a.cols()) <= 400)
        return singular_values(a)(0);
    cvec x = cvec::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
    double est = 0.0;
    for (int it = 0; it < 300; ++it) {
        cvec y = a.adjoint() * (a * x);
        double ny = y.norm();
        if (ny == 0.0)
            return 0.0;
        double next = std::sqrt(ny);
        x = y / ny;
        if (std::abs(next - est) <= 1e-12 * next) {
            est = next;
            break;
        }
        est = next;
    }
    return est;
}

double unitarity_defect(const cmat& q)
{
    cmat g = q.adjoint() * q;
    g.diagonal().array() -= 1.0;
    return norm2(g);
}

void fix_phases(cmat& v)
{
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index best = 0;
        double bmag = -1.0;
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            double m = std::abs(v(i, j));
            // ties resolved toward the lower index so the choice is reproducible
            if (m > bmag * (1.0 + 1e-12)) {
                bmag = m;
                best = i;
            }
        }
        if (bmag > 0.0) {
            cd ph = std::conj(v(best, j)) / bmag;
            v.col(j) *= ph;
            v(best, j) = cd(std::abs(v(best, j)), 0.0);
        }
    }
}

void pin_blas_threads()
{
    openblas_set_num_threads(1);
}

}  // namespace callias
