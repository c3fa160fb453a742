#pragma once

#include <complex>

#include <Eigen/Dense>

namespace callias {

using cd = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rmat = Eigen::MatrixXd;
using rvec = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;

struct EigResult {
    rvec values;   // ascending
    cmat vectors;  // columns; empty when not requested
};

struct RealEigResult {
    rvec values;
    rmat vectors;
};

// Real symmetric tridiagonal eigenproblem (MRRR).
RealEigResult tridiagonal_eig(const rvec& diag, const rvec& off, bool vectors);

// Dense Hermitian eigenproblem (divide and conquer).
EigResult hermitian_eig(const cmat& a, bool vectors);

// Inverse of a complex tridiagonal matrix (partial pivoting), O(d^2).
cmat tridiagonal_inverse(const cvec& lower, const cvec& diag, const cvec& upper);

rvec singular_values(const cmat& a);

struct SvdResult {
    rvec s;
    cmat u;   // rows x rows
    cmat v;   // cols x cols
};
SvdResult svd_full(const cmat& a);

// Largest singular value by power iteration on a*a (deterministic start).
double norm2(const cmat& a);

// ||Q*Q - I||_2
double unitarity_defect(const cmat& q);

// Multiply each eigenvector column so its largest-magnitude entry is real positive.
void fix_phases(cmat& v);

// Pin the BLAS backend to one thread so reductions are reproducible.
void pin_blas_threads();

}  // namespace callias
