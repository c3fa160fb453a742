#pragma once

#include <string>
#include <vector>

#include "callias/evolve.hpp"
#include "callias/spectral.hpp"

namespace callias {

// t=0 splits as [0,inf) + (-inf,0); t=1 splits as (0,inf) + (-inf,0].
struct BoundarySplitting {
    SpectralData spec0;
    SpectralData spec1;
    std::vector<int> pos0;  // [0,inf) at t=0
    std::vector<int> neg0;  // (-inf,0) at t=0
    std::vector<int> pos1;  // (0,inf) at t=1
    std::vector<int> neg1;  // (-inf,0] at t=1

    int n_pos0() const { return static_cast<int>(pos0.size()); }
    int n_neg0() const { return static_cast<int>(neg0.size()); }
    int n_pos1() const { return static_cast<int>(pos1.size()); }
    int n_neg1() const { return static_cast<int>(neg1.size()); }
    // Eigenvector columns for an index set.
    cmat basis0(const std::vector<int>& idx) const;
    cmat basis1(const std::vector<int>& idx) const;
};

BoundarySplitting split_boundary_spaces(const SpectralData& spec0, const SpectralData& spec1);

// Rows are t=1 eigenbasis coordinates, columns t=0 eigenbasis coordinates.
struct QBlocks {
    cmat Qpp;  // n_pos1 x n_pos0
    cmat Qpm;  // n_pos1 x n_neg0
    cmat Qmp;  // n_neg1 x n_pos0
    cmat Qmm;  // n_neg1 x n_neg0
    double reassembly_defect = 0.0;
};

QBlocks q_blocks(const cmat& q, const BoundarySplitting& split);

struct BlockIndex {
    int ind = 0;
    int dim_ker = 0;
    int dim_coker = 0;
    int rows = 0;
    int cols = 0;
    int rank = 0;
    double sv_tol = 0.0;
    rvec singular_values;
    std::string warning;  // SingularValueGapWarning text, empty when clean
};

// sv_tol = sv_tol_rel * sigma_1 of the block.
BlockIndex block_index(const cmat& block, double sv_tol_rel = 1e-8);

struct KernelPairing {
    int dim_ker_mm = 0;
    int dim_ker_pp = 0;    // literal kernel of Qpp
    int dim_coker_pp = 0;  // kernel of Qpp*, the target of Qpm on ker Qmm
    int dim_coker_mm = 0;
    bool dims_match = true;    // dim ker Qmm == dim coker Qpp and dim ker Qpp == dim coker Qmm
    double iso_defect = 0.0;   // max |sigma - 1| over both pairings
    rvec pairing_sv;           // singular values of Qpm : ker Qmm -> ker Qpp*
    rvec reverse_sv;           // singular values of Qmp : ker Qpp -> ker Qmm*
};

KernelPairing kernel_pairing_check(const QBlocks& blocks, double sv_tol_rel = 1e-8);

// Orthonormal basis (columns) of the numerical kernel of a block.
cmat kernel_basis(const cmat& block, double sv_tol_rel = 1e-8);

struct KernelRegularity {
    bool empty = true;
    std::vector<double> exponents;  // one per kernel vector
    double min_exponent = 0.0;
};

// Fits |c_j| ~ (1 + lambda_j^2)^(-p) on coefficients above floor_rel * max|c|; returns p.
double fit_decay_exponent(const rvec& lambda, const cvec& coeffs, double floor_rel = 1e-12);

KernelRegularity kernel_regularity_check(const QBlocks& blocks, const BoundarySplitting& split,
                                         double sv_tol_rel = 1e-8);

struct DecayRow {
    int resolution = 0;
    std::vector<int> k;        // 1-based singular value index
    std::vector<double> sigma;
    double rho = 0.0;          // smoothing ratio, maximised over the test bank
};

struct DecayOptions {
    double s = 0.0;
    int time_steps = 256;
    double zero_tol_rel = 1e-6;
    double window_R = 3.0;     // essential-support constant for the localisation window
    double richardson_tol = 1e-6;
    int workers = 1;
};

// sigma_k(Qmp) for k = 1, 4, 16, 64 and the H^{s+1}/H^s smoothing ratio per resolution.
std::vector<DecayRow> offdiag_decay(const CalliasModel& model, const std::vector<int>& ladder,
                                    const DecayOptions& opts);

// Smoothing ratio for a single resolution given its boundary data.
double smoothing_ratio(const CalliasModel& model, const SpatialGrid& grid, const QBlocks& blocks,
                       const BoundarySplitting& split, double s, double window_R);

}  // namespace callias
