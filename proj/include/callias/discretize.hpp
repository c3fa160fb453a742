#pragma once

#include <vector>

#include "callias/linalg.hpp"
#include "callias/model.hpp"

namespace callias {

// Line grids are staggered: in the chiral basis e+ = (1, i)/sqrt2, e- = (1, -i)/sqrt2 the
// e+ component lives on the n nodes x_j = -L + j h and the e- component on the n-1
// midpoints between them. Unknowns are interleaved (v_1, w_3/2, v_2, ..., v_n), so the
// unknown with index i sits at x = -L + h + i h/2 and d = 2n - 1.
struct SpatialGrid {
    enum class Kind { FourierCircle, UniformLine };
    Kind kind = Kind::UniformLine;
    int resolution = 0;  // K (circle) or n (line)
    double extent = 0.0; // circumference or half-width
    double h = 0.0;

    bool is_circle() const { return kind == Kind::FourierCircle; }
    int dim() const { return is_circle() ? 2 * resolution + 1 : 2 * resolution - 1; }
    int mode(int i) const { return i - resolution; }
    double wavenumber(int i) const { return 2.0 * kPi * mode(i) / extent; }
    double position(int i) const { return -extent + h + 0.5 * h * i; }
    bool on_node(int i) const { return i % 2 == 0; }
    std::vector<double> positions() const;
};

SpatialGrid make_grid(const SpatialDomain& domain, int resolution);

struct HermitianOperator {
    SpatialGrid grid;
    CalliasModel model;
    double t = 0.0;
    bool tridiagonal = false;
    rvec diag;  // real symmetric tridiagonal form (line)
    rvec off;
    cmat matrix;  // dense form (circle)

    int dim() const { return grid.dim(); }
    cmat dense() const;
    double hermiticity_defect() const;
};

HermitianOperator assemble_operator(const CalliasModel& model, const SpatialGrid& grid, double t);

// Exact derivative dA/dt at t (the family is linear in its coefficient).
cmat operator_rate(const CalliasModel& model, const SpatialGrid& grid, double t);

double max_metric_distance(const CalliasModel& model, double x, double y);

// Standard-basis spinor samples (n x 2) at the line nodes; e- values are averaged onto nodes.
cmat node_spinor(const SpatialGrid& grid, const cvec& u);

// Diagonal window matrix: 1 on unknowns with |x| <= radius, 0 elsewhere (line only).
rvec indicator(const SpatialGrid& grid, double radius);

}  // namespace callias
