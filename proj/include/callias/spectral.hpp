#pragma once

#include <functional>
#include <vector>

#include "callias/discretize.hpp"
#include "callias/linalg.hpp"

namespace callias {

struct SpectralOptions {
    double zero_tol_rel = 1e-6;  // zero_tol = zero_tol_rel * ||A||
    bool vectors = true;
};

struct SpectralData {
    rvec eigenvalues;  // ascending
    cmat eigenvectors; // empty when computed without vectors
    double zero_tol = 0.0;
    double op_norm = 0.0;
    double reliable_max = 0.0;  // |lambda| range trusted for eta windows
    double t = 0.0;
    int dim = 0;

    bool has_vectors() const { return eigenvectors.cols() == dim && dim > 0; }
};

SpectralData eigendecompose(const HermitianOperator& op, const SpectralOptions& opts = {});

double orthonormality_defect(const SpectralData& spec);
double eigen_residual(const HermitianOperator& op, const SpectralData& spec);

enum class Interval { NonNegative, Negative, Positive, NonPositive };
const char* interval_name(Interval iv);

// Throws AmbiguousKernel if some |lambda| lies in (zero_tol, 10 zero_tol].
void check_kernel_gap(const SpectralData& spec);
std::vector<int> interval_indices(const SpectralData& spec, Interval iv);

struct Projection {
    cmat matrix;
    Interval interval = Interval::NonNegative;
    int rank = 0;
};

Projection spectral_projection(const SpectralData& spec, Interval iv);

struct Contour {
    enum class Kind { Circle, Keyhole };
    Kind kind = Kind::Circle;
    double center = 0.0;  // on the real axis
    double radius = 1.0;
    double eps = 0.0;     // keyhole inner radius
    double angle = 0.0;   // keyhole half-opening around the negative direction

    static Contour circle(double c, double r) { return {Kind::Circle, c, r, 0.0, 0.0}; }
    static Contour keyhole(double c, double r, double eps, double angle) { return {Kind::Keyhole, c, r, eps, angle}; }
    bool encloses(double lambda) const;
    double distance(double lambda) const;
};

struct RieszOptions {
    int nodes = 64;
    double tol = 1e-8;
    int max_nodes = 1 << 16;
};

struct RieszResult {
    cmat matrix;
    int nodes_used = 0;
    double last_change = 0.0;
};

RieszResult riesz_projection(const HermitianOperator& op, const Contour& contour, const RieszOptions& opts = {});

// d/dt of the Riesz projection given dA = dA/dt.
RieszResult riesz_projection_derivative(const HermitianOperator& op, const Contour& contour, const cmat& dA,
                                        const RieszOptions& opts = {});

// (z - A)^{-1}; O(d^2) for tridiagonal operators.
cmat resolvent(const HermitianOperator& op, cd z);

double sobolev_norm(const SpectralData& spec, const cvec& u, double s);
cmat functional_calculus(const SpectralData& spec, const std::function<double(double)>& f);

int kernel_dim(const SpectralData& spec);

}  // namespace callias
