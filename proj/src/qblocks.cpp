#include "callias/qblocks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "callias/error.hpp"
#include "callias/parallel.hpp"

namespace callias {

namespace {

cmat columns(const cmat& v, const std::vector<int>& idx)
{
    cmat out(v.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = v.col(idx[k]);
    return out;
}

int numerical_rank(const rvec& s, double tol)
{
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol)
            ++r;
    return r;
}

double block_tol(const rvec& s, double rel)
{
    return s.size() ? rel * s(0) : 0.0;
}

// Bump of unit height supported on [c - w, c + w].
double bump(double x, double c, double w)
{
    double y = (x - c) / w;
    if (std::abs(y) >= 1.0)
        return 0.0;
    return std::exp(1.0 + 1.0 / (y * y - 1.0));
}

std::vector<cvec> test_bank(const SpatialGrid& grid)
{
    std::vector<cvec> bank;
    const double centers[] = {-1.0, 0.0, 1.0};
    const double widths[] = {0.5, 1.0};
    const int d = grid.dim();
    for (double c : centers) {
        for (double w : widths) {
            if (grid.is_circle()) {
                // Fourier coefficients of the bump placed at c on the circle
                const int m = 512;
                cvec u = cvec::Zero(d);
                for (int q = 0; q < m; ++q) {
                    double x = grid.extent * q / m - 0.5 * grid.extent;
                    double b = bump(x, c, w);
                    if (b == 0.0)
                        continue;
                    for (int i = 0; i < d; ++i)
                        u(i) += b * std::polar(1.0, -grid.wavenumber(i) * x);
                }
                bank.push_back(u);
                continue;
            }
            for (int comp = 0; comp < 2; ++comp) {
                cvec u = cvec::Zero(d);
                for (int i = 0; i < d; ++i)
                    if (grid.on_node(i) == (comp == 0))
                        u(i) = bump(grid.position(i), c, w);
                bank.push_back(u);
            }
        }
    }
    return bank;
}

}  // namespace

cmat BoundarySplitting::basis0(const std::vector<int>& idx) const
{
    return columns(spec0.eigenvectors, idx);
}

cmat BoundarySplitting::basis1(const std::vector<int>& idx) const
{
    return columns(spec1.eigenvectors, idx);
}

BoundarySplitting split_boundary_spaces(const SpectralData& spec0, const SpectralData& spec1)
{
    if (spec0.dim != spec1.dim)
        fail(ErrorKind::DimensionMismatch, "boundary spectra have different dimensions");
    if (!spec0.has_vectors() || !spec1.has_vectors())
        fail(ErrorKind::Config, "boundary splitting needs eigenvectors");
    check_kernel_gap(spec0);
    check_kernel_gap(spec1);
    BoundarySplitting s;
    s.spec0 = spec0;
    s.spec1 = spec1;
    s.pos0 = interval_indices(spec0, Interval::NonNegative);
    s.neg0 = interval_indices(spec0, Interval::Negative);
    s.pos1 = interval_indices(spec1, Interval::Positive);
    s.neg1 = interval_indices(spec1, Interval::NonPositive);
    return s;
}

QBlocks q_blocks(const cmat& q, const BoundarySplitting& split)
{
    const int d = split.spec0.dim;
    if (q.rows() != d || q.cols() != d)
        fail(ErrorKind::DimensionMismatch, "Q is " + std::to_string(q.rows()) + "x" + std::to_string(q.cols()) +
                                               " but the boundary spaces have dimension " + std::to_string(d));
    cmat p0 = split.basis0(split.pos0), m0 = split.basis0(split.neg0);
    cmat p1 = split.basis1(split.pos1), m1 = split.basis1(split.neg1);
    cmat qp0 = q * p0;
    cmat qm0 = q * m0;
    QBlocks b;
    b.Qpp = p1.adjoint() * qp0;
    b.Qpm = p1.adjoint() * qm0;
    b.Qmp = m1.adjoint() * qp0;
    b.Qmm = m1.adjoint() * qm0;
    cmat full(d, d);
    const int np1 = split.n_pos1(), np0 = split.n_pos0();
    full.topLeftCorner(np1, np0) = b.Qpp;
    full.topRightCorner(np1, d - np0) = b.Qpm;
    full.bottomLeftCorner(d - np1, np0) = b.Qmp;
    full.bottomRightCorner(d - np1, d - np0) = b.Qmm;
    b.reassembly_defect = unitarity_defect(full);
    return b;
}

BlockIndex block_index(const cmat& block, double sv_tol_rel)
{
    BlockIndex r;
    r.rows = static_cast<int>(block.rows());
    r.cols = static_cast<int>(block.cols());
    r.singular_values = singular_values(block);
    r.sv_tol = block_tol(r.singular_values, sv_tol_rel);
    r.rank = numerical_rank(r.singular_values, r.sv_tol);
    r.dim_ker = r.cols - r.rank;
    r.dim_coker = r.rows - r.rank;
    r.ind = r.dim_ker - r.dim_coker;
    for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) {
        double s = r.singular_values(i);
        if (s > r.sv_tol && s <= 10.0 * r.sv_tol) {
            std::ostringstream os;
            os << "SingularValueGapWarning: sigma " << s << " within 10x of sv_tol " << r.sv_tol;
            r.warning = os.str();
        }
    }
    return r;
}

cmat kernel_basis(const cmat& block, double sv_tol_rel)
{
    if (block.cols() == 0)
        return cmat(0, 0);
    if (block.rows() == 0)
        return cmat::Identity(block.cols(), block.cols());
    SvdResult s = svd_full(block);
    int rank = numerical_rank(s.s, block_tol(s.s, sv_tol_rel));
    return s.v.rightCols(block.cols() - rank);
}

KernelPairing kernel_pairing_check(const QBlocks& b, double sv_tol_rel)
{
    KernelPairing p;
    cmat ker_mm = kernel_basis(b.Qmm, sv_tol_rel);
    cmat ker_pp = kernel_basis(b.Qpp, sv_tol_rel);
    cmat coker_pp = kernel_basis(cmat(b.Qpp.adjoint()), sv_tol_rel);
    cmat coker_mm = kernel_basis(cmat(b.Qmm.adjoint()), sv_tol_rel);
    p.dim_ker_mm = static_cast<int>(ker_mm.cols());
    p.dim_ker_pp = static_cast<int>(ker_pp.cols());
    p.dim_coker_pp = static_cast<int>(coker_pp.cols());
    p.dim_coker_mm = static_cast<int>(coker_mm.cols());
    p.dims_match = p.dim_ker_mm == p.dim_coker_pp && p.dim_ker_pp == p.dim_coker_mm;
    if (!p.dims_match)
        return p;
    if (p.dim_ker_mm > 0) {
        p.pairing_sv = singular_values(coker_pp.adjoint() * b.Qpm * ker_mm);
        for (Eigen::Index i = 0; i < p.pairing_sv.size(); ++i)
            p.iso_defect = std::max(p.iso_defect, std::abs(p.pairing_sv(i) - 1.0));
    }
    if (p.dim_ker_pp > 0) {
        p.reverse_sv = singular_values(coker_mm.adjoint() * b.Qmp * ker_pp);
        for (Eigen::Index i = 0; i < p.reverse_sv.size(); ++i)
            p.iso_defect = std::max(p.iso_defect, std::abs(p.reverse_sv(i) - 1.0));
    }
    return p;
}

double fit_decay_exponent(const rvec& lambda, const cvec& coeffs, double floor_rel)
{
    if (lambda.size() != coeffs.size())
        fail(ErrorKind::DimensionMismatch, "decay fit needs one coefficient per eigenvalue");
    double peak = coeffs.cwiseAbs().maxCoeff();
    std::vector<double> xs, ys;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        double a = std::abs(coeffs(i));
        if (a > floor_rel * peak && a > 0.0) {
            xs.push_back(std::log1p(lambda(i) * lambda(i)));
            ys.push_back(std::log(a));
        }
    }
    if (xs.size() < 2)
        return 0.0;
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxx > 0.0 ? -sxy / sxx : 0.0;
}

KernelRegularity kernel_regularity_check(const QBlocks& blocks, const BoundarySplitting& split, double sv_tol_rel)
{
    KernelRegularity r;
    cmat ker = kernel_basis(blocks.Qmm, sv_tol_rel);
    if (ker.cols() == 0)
        return r;
    r.empty = false;
    // kernel vectors are already coefficients in the t=0 negative eigenbasis
    rvec lam(split.n_neg0());
    for (int k = 0; k < split.n_neg0(); ++k)
        lam(k) = split.spec0.eigenvalues(split.neg0[static_cast<size_t>(k)]);
    r.min_exponent = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < ker.cols(); ++j) {
        double p = fit_decay_exponent(lam, ker.col(j));
        r.exponents.push_back(p);
        r.min_exponent = std::min(r.min_exponent, p);
    }
    return r;
}

double smoothing_ratio(const CalliasModel& model, const SpatialGrid& grid, const QBlocks& blocks,
                       const BoundarySplitting& split, double s, double window_R)
{
    rvec window = rvec::Ones(grid.dim());
    if (!grid.is_circle()) {
        EssentialSupport es = essential_support(model, window_R, 1.0);
        window = indicator(grid, es.x_R);
    }
    cmat p0 = split.basis0(split.pos0);
    cmat m1 = split.basis1(split.neg1);
    double rho = 0.0;
    for (const cvec& u : test_bank(grid)) {
        double den = sobolev_norm(split.spec0, u, s);
        if (den == 0.0)
            continue;
        cvec w = m1 * (blocks.Qmp * (p0.adjoint() * u));
        cvec loc = window.cast<cd>().cwiseProduct(w);
        rho = std::max(rho, sobolev_norm(split.spec1, loc, s + 1.0) / den);
    }
    return rho;
}

std::vector<DecayRow> offdiag_decay(const CalliasModel& model, const std::vector<int>& ladder,
                                    const DecayOptions& opts)
{
    if (ladder.size() < 3)
        fail(ErrorKind::Config, "offdiag_decay needs a ladder of at least 3 resolutions");
    std::vector<DecayRow> rows(ladder.size());
    parallel_for(static_cast<int>(ladder.size()), opts.workers, [&](int i) {
        SpatialGrid grid = make_grid(model.domain, ladder[static_cast<size_t>(i)]);
        SpectralOptions so{opts.zero_tol_rel, true};
        SpectralData s0 = eigendecompose(assemble_operator(model, grid, 0.0), so);
        SpectralData s1 = eigendecompose(assemble_operator(model, grid, 1.0), so);
        BoundarySplitting split = split_boundary_spaces(s0, s1);
        EvolveOptions eo;
        eo.richardson_tol = opts.richardson_tol;
        UnitaryPropagator q = propagate(model, grid, 0.0, 1.0, opts.time_steps, eo);
        QBlocks b = q_blocks(q.matrix, split);
        DecayRow row;
        row.resolution = grid.resolution;
        rvec sv = singular_values(b.Qmp);
        for (int k : {1, 4, 16, 64}) {
            if (k <= sv.size()) {
                row.k.push_back(k);
                row.sigma.push_back(sv(k - 1));
            }
        }
        row.rho = smoothing_ratio(model, grid, b, split, opts.s, opts.window_R);
        rows[static_cast<size_t>(i)] = row;
    });
    return rows;
}

}  // namespace callias
