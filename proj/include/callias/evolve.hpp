#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "callias/discretize.hpp"
#include "callias/linalg.hpp"

namespace callias {

// Eigendecomposition of one generator, used to apply exp(i tau A).
struct GeneratorEig {
    bool real = false;  // line operators have real orthogonal eigenvectors
    rmat vr;
    cmat vc;
    rvec lambda;

    void apply(double tau, cmat& q) const;  // q <- exp(i tau A) q
    void apply(double tau, cvec& u) const;
    // u <- exp(i tau A) u + tau phi1(i tau A) f  with phi1(z) = (e^z - 1)/z
    void apply_forced(double tau, cvec& u, const cvec& f) const;
};

GeneratorEig generator_eig(const HermitianOperator& op);

struct EvolveOptions {
    double richardson_tol = 1e-6;
    bool richardson = true;  // also propagate with 2*steps and compare
};

struct UnitaryPropagator {
    cmat matrix;
    double t0 = 0.0;
    double t1 = 0.0;
    int steps = 0;
    double unitarity_defect = 0.0;
    double richardson_change = 0.0;  // ||Q(steps) - Q(2 steps)||_2, 0 when skipped
    bool static_family = false;
};

constexpr int kMinSteps = 16;

// Q = prod_k exp(i dt A(t_k + dt/2)), leftmost factor last.
UnitaryPropagator propagate(const CalliasModel& model, const SpatialGrid& grid, double t0, double t1, int steps,
                            const EvolveOptions& opts = {});

using Forcing = std::function<cvec(double)>;

struct Trajectory {
    std::vector<double> times;  // ascending over [0, 1]
    cmat states;                // column k is u(times[k])
    double t0 = 0.0;
    double max_residual = 0.0;  // relative Crank-Nicolson residual of consecutive states
};

// du/dt = i A_t u + f(t), u(t0) = u0, solved on [0, 1] by exponential midpoint stepping.
// steps is the number of steps per unit time; f may be empty.
Trajectory solve_cauchy(const CalliasModel& model, const SpatialGrid& grid, double t0, const cvec& u0,
                        const Forcing& f, int steps);

struct PropagationReport {
    double max_excess = -std::numeric_limits<double>::infinity();  // -inf when u0 has empty support
    double initial_radius = 0.0;
    double threshold = 0.0;
    int samples = 0;
    bool empty_support = true;
    std::vector<double> times;
    std::vector<double> excess;
};

// Light-cone excess of the amplitude support {|u_i| > eps * max|u0|}.
PropagationReport check_propagation(const CalliasModel& model, const SpatialGrid& grid, const cvec& u0, double t0,
                                    double t1, double eps, int samples = 64);

}  // namespace callias
