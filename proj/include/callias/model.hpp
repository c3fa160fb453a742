#pragma once

#include <string>

#include "callias/json_util.hpp"
#include "callias/linalg.hpp"
#include "callias/profiles.hpp"

namespace callias {

struct SpatialDomain {
    enum class Kind { Circle, Line };
    Kind kind = Kind::Line;
    double size = 1.0;  // circumference (circle) or half-width L (line)

    bool is_circle() const { return kind == Kind::Circle; }
    static SpatialDomain circle(double c) { return {Kind::Circle, c}; }
    static SpatialDomain line(double half_width) { return {Kind::Line, half_width}; }
};

enum class Direction { Sigma2, Sigma3 };

// Matrices are written in the standard Pauli basis.
struct CliffordModule {
    int dim = 2;
    cmat gamma_space;
    cmat beta;
    cmat phi_matrix;
    cmat perturbation_matrix;

    static CliffordModule canonical(int dim, Direction dir);
    bool is_canonical(Direction dir) const;
};

struct Perturbation {
    bool present = false;
    SpatialProfile spatial;
    TimeProfile time;
    Direction direction = Direction::Sigma2;
    double support_radius = 0.0;  // declared r_K
};

// Circle connection coefficient a(t,x) = c(t) s(x).
struct Gauge {
    bool present = false;
    SpatialProfile spatial = SpatialProfile::constant(1.0);
    TimeProfile time;
};

struct CalliasModel {
    std::string name;
    SpatialDomain domain;
    CliffordModule clifford;
    SpatialProfile potential;  // phi(x) along phi_matrix (line)
    double mass = 0.0;         // static offset along sigma2 (line)
    Perturbation perturbation;
    Gauge gauge;
    double collar_delta = 0.1;
    double lapse = 1.0;
    std::string metric = "flat";

    // Family coefficient c(t) and its rate; the operator depends on t only through it.
    double coefficient(double t) const;
    double coefficient_rate(double t) const;
    bool static_on(double t0, double t1) const;

    // Line: A = gamma_space d/dx + S(x,t) sigma3 + M(x,t) sigma2.
    double sigma3_part(double x, double t) const;
    double sigma3_part_dx(double x, double t) const;
    double sigma2_part(double x, double t) const;
    double sigma2_part_dx(double x, double t) const;

    // Circle: a(t,x).
    double gauge_value(double t, double x) const;
    double gauge_rate(double t, double x) const;
};

// Parse without checking assumptions (lets callers probe invalid models).
CalliasModel parse_model(const json& j);
void validate_model(const CalliasModel& m);
CalliasModel build_model(const json& j);

struct EssentialSupport {
    double R = 0.0;
    double x_R = 0.0;  // interval [-x_R, x_R]
    bool whole_domain = false;
    std::string warning;
};

// Pointwise Callias margin Phi^2 - |[A,Phi]_+| at (x,t).
double callias_margin(const CalliasModel& m, double x, double t);

EssentialSupport essential_support(const CalliasModel& m, double R, double t);

json model_summary(const CalliasModel& m);

}  // namespace callias
