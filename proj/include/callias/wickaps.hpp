#pragma once

#include <string>
#include <vector>

#include "callias/qblocks.hpp"

namespace callias {

enum class WickForm { Lorentzian, Euclidean };
WickForm parse_wick_form(const std::string& s);
const char* wick_form_name(WickForm f);

// Block bidiagonal Crank-Nicolson system on t_0..t_N; row block k reads
// (u_{k+1} - u_k) - i dt A_k (u_{k+1} + u_k)/2 (Lorentzian), or + dt A_k (...)/2 (Euclidean),
// with A_k = A(t_k + dt/2). Rows are scaled by dt.
struct WickSystem {
    int time_steps = 0;
    int dim = 0;
    WickForm form = WickForm::Lorentzian;
    std::vector<cmat> lower;  // coefficient of u_k in row block k
    std::vector<cmat> upper;  // coefficient of u_{k+1} in row block k

    int rows() const { return time_steps * dim; }
    int unconstrained_cols() const { return (time_steps + 1) * dim; }
    // u_0 = v0 a and u_N = vN b; the interior states stay in ambient coordinates.
    cmat reduced(const cmat& v0, const cmat& vN) const;
};

constexpr int kMinWickSteps = 16;

WickSystem assemble_wick(const CalliasModel& model, const SpatialGrid& grid, int time_steps,
                         WickForm form = WickForm::Lorentzian);

struct WickIndex {
    int ind = 0;
    int dim_ker = 0;
    int dim_coker = 0;
    int rows = 0;
    int cols = 0;
    int rank = 0;
    double sv_tol = 0.0;
    double smallest_kept = 0.0;    // smallest singular value above sv_tol
    double largest_dropped = 0.0;  // largest singular value at or below sv_tol
    std::string warning;
};

struct WickOptions {
    double sv_tol_rel = 1e-8;
    int max_columns = 4000;
};

// Index of the system with no boundary constraints (free data at both ends).
WickIndex unconstrained_index(const WickSystem& sys, const WickOptions& opts = {});

// P0_[0,inf) u_0 = 0 and P1_(-inf,0] u_N = 0.
WickIndex aps_index(const WickSystem& sys, const BoundarySplitting& split, const WickOptions& opts = {});

// P0_(-inf,0) u_0 = 0 and P1_(0,inf) u_N = 0.
WickIndex anti_aps_index(const WickSystem& sys, const BoundarySplitting& split, const WickOptions& opts = {});

}  // namespace callias
