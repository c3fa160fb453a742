#include <doctest.h>

#include <cmath>
#include <random>

#include "callias/error.hpp"
#include "callias/qblocks.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace callias;

namespace {

struct Fixture {
    BoundarySplitting split;
    UnitaryPropagator q;
    QBlocks blocks;
};

Fixture blocks_for(const CalliasModel& m, int resolution, int steps)
{
    SpatialGrid g = make_grid(m.domain, resolution);
    Fixture f;
    f.split = split_boundary_spaces(eigendecompose(assemble_operator(m, g, 0.0)),
                                    eigendecompose(assemble_operator(m, g, 1.0)));
    f.q = propagate(m, g, 0.0, 1.0, steps);
    f.blocks = q_blocks(f.q.matrix, f.split);
    return f;
}

cmat haar_unitary(int d, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    cmat z(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            z(i, j) = cd(nd(rng), nd(rng)) / std::sqrt(2.0);
    Eigen::HouseholderQR<cmat> qr(z);
    cmat q = qr.householderQ() * cmat::Identity(d, d);
    cmat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i)
        q.col(i) *= r(i, i) / std::abs(r(i, i));
    return q;
}

// Blocks of a unitary in the standard basis with rows split (pos1 | neg1) and columns (pos0 | neg0).
QBlocks slice(const cmat& q, int n_pos1, int n_pos0)
{
    const Eigen::Index d = q.rows();
    QBlocks b;
    b.Qpp = q.topLeftCorner(n_pos1, n_pos0);
    b.Qpm = q.topRightCorner(n_pos1, d - n_pos0);
    b.Qmp = q.bottomLeftCorner(d - n_pos1, n_pos0);
    b.Qmm = q.bottomRightCorner(d - n_pos1, d - n_pos0);
    return b;
}

}  // namespace

TEST_CASE("boundary splitting dimensions on the circle")
{
    CalliasModel st = fixtures::circle(0.3, 0.3);
    SpatialGrid g = make_grid(st.domain, 8);
    BoundarySplitting s = split_boundary_spaces(eigendecompose(assemble_operator(st, g, 0.0)),
                                                eigendecompose(assemble_operator(st, g, 1.0)));
    CHECK(s.n_neg0() == 8);
    CHECK(s.n_neg1() == 8);

    CalliasModel w = fixtures::circle(0.0, 1.0);
    BoundarySplitting sw = split_boundary_spaces(eigendecompose(assemble_operator(w, g, 0.0)),
                                                 eigendecompose(assemble_operator(w, g, 1.0)));
    CHECK(sw.n_pos0() == 9);
    CHECK(sw.n_neg0() == 8);
    CHECK(sw.n_neg1() == 8);
    CHECK(sw.n_pos1() == 9);
    CHECK(sw.n_pos0() + sw.n_neg0() == 17);
    CHECK(sw.n_pos1() + sw.n_neg1() == 17);
}

TEST_CASE("boundary splitting on a kernel-free static line model")
{
    CalliasModel m = fixtures::line(7.0, 1.0, 0.0, 1.0, 0.7, 0.7);
    SpatialGrid g = make_grid(m.domain, 48);
    SpectralData s = eigendecompose(assemble_operator(m, g, 0.0));
    CHECK(kernel_dim(s) == 0);
    BoundarySplitting b = split_boundary_spaces(s, s);
    CHECK(b.n_pos0() + b.n_neg0() == g.dim());
    CHECK(b.n_pos1() + b.n_neg1() == g.dim());
    CHECK(b.n_pos0() == b.n_pos1());
}

TEST_CASE("static circle: off-diagonal blocks vanish")
{
    Fixture f = blocks_for(fixtures::circle(0.3, 0.3), 8, 64);
    CHECK(f.blocks.Qpm.norm() == 0.0);
    CHECK(f.blocks.Qmp.norm() == 0.0);
    CHECK(f.blocks.reassembly_defect <= 1e-12);
}

TEST_CASE("identity propagator with equal endpoint spectra")
{
    CalliasModel m = fixtures::circle(0.3, 0.3);
    SpatialGrid g = make_grid(m.domain, 8);
    SpectralData s = eigendecompose(assemble_operator(m, g, 0.0));
    BoundarySplitting sp = split_boundary_spaces(s, s);
    QBlocks b = q_blocks(cmat::Identity(17, 17), sp);
    CHECK((b.Qpp - cmat::Identity(9, 9)).norm() <= 1e-14);
    CHECK((b.Qmm - cmat::Identity(8, 8)).norm() <= 1e-14);
    CHECK(b.Qpm.norm() <= 1e-14);
    CHECK(b.Qmp.norm() <= 1e-14);
    CHECK_THROWS_AS(q_blocks(cmat::Identity(5, 5), sp), Error);
}

TEST_CASE("winding circle blocks and the crossing mode")
{
    Fixture f = blocks_for(fixtures::circle(0.0, 1.0), 8, 256);
    CHECK(f.blocks.Qmp.norm() <= 1e-8);
    CHECK(f.blocks.Qpm.norm() <= 1e-8);
    // crossing mode n = -1: lambda(t) = -1 + a(t); scalar phase exp(i int_0^1 (-1 + a))
    cd want = std::exp(cd(0.0, -1.0 + 0.5));
    int col = static_cast<int>(f.split.neg0.size()) - 1;  // largest negative eigenvalue at t=0
    int row = static_cast<int>(f.split.neg1.size()) - 1;  // the zero eigenvalue at t=1
    CHECK(f.split.spec0.eigenvalues(f.split.neg0.back()) == doctest::Approx(-1.0));
    CHECK(std::abs(f.split.spec1.eigenvalues(f.split.neg1.back())) <= 1e-12);
    CHECK(std::abs(std::abs(f.blocks.Qmm(row, col)) - 1.0) <= 1e-10);
    // eigenvector phases are fixed to be real positive, so the entry is the phase itself
    CHECK(std::abs(f.blocks.Qmm(row, col) - want) <= 1e-6);

    BlockIndex mm = block_index(f.blocks.Qmm);
    CHECK(mm.rows == 8);
    CHECK(mm.cols == 8);
    CHECK(mm.ind == 0);
    CHECK(mm.dim_ker == 0);
    CHECK(mm.dim_coker == 0);
}

TEST_CASE("block index of simple blocks")
{
    BlockIndex id = block_index(cmat::Identity(4, 4));
    CHECK(id.ind == 0);
    CHECK(id.dim_ker == 0);
    CHECK(id.dim_coker == 0);
    CHECK(id.warning.empty());

    cmat a = cmat::Zero(3, 4);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0;
    BlockIndex r = block_index(a);
    CHECK(r.rank == 2);
    CHECK(r.dim_ker == 2);
    CHECK(r.dim_coker == 1);
    CHECK(r.ind == 1);

    cmat w = cmat::Identity(2, 2);
    w(1, 1) = 5e-8;  // inside (sv_tol, 10 sv_tol]
    BlockIndex g = block_index(w);
    CHECK(g.warning.find("SingularValueGapWarning") == 0);
}

TEST_CASE("crossing family: indices, pairing and regularity")
{
    Fixture f = blocks_for(fixtures::line_crossing(), 48, 512);
    CHECK(f.blocks.reassembly_defect <= 1e-10);
    CHECK(f.split.n_neg0() == f.split.n_neg1() + 1);
    BlockIndex mm = block_index(f.blocks.Qmm);
    BlockIndex pp = block_index(f.blocks.Qpp);
    CHECK(mm.ind == 1);
    CHECK(mm.dim_ker == 1);
    CHECK(mm.dim_coker == 0);
    CHECK(pp.ind == -1);
    CHECK(pp.ind + mm.ind == 0);

    KernelPairing kp = kernel_pairing_check(f.blocks);
    CHECK(kp.dims_match);
    CHECK(kp.dim_ker_mm == 1);
    CHECK(kp.dim_coker_pp == 1);
    REQUIRE(kp.pairing_sv.size() == 1);
    CHECK(std::abs(kp.pairing_sv(0) - 1.0) <= 1e-8);
    CHECK(kp.iso_defect <= 1e-8);

    KernelRegularity kr = kernel_regularity_check(f.blocks, f.split);
    CHECK_FALSE(kr.empty);
    CHECK(kr.min_exponent >= 2.0);
}

TEST_CASE("static model: empty kernels")
{
    Fixture f = blocks_for(fixtures::line(7.0, 1.0, 0.0, 1.0, 0.7, 0.7), 32, 64);
    KernelPairing kp = kernel_pairing_check(f.blocks);
    CHECK(kp.dim_ker_mm == 0);
    CHECK(kp.dim_ker_pp == 0);
    CHECK(kp.dims_match);
    CHECK(kp.iso_defect == 0.0);
    CHECK(kernel_regularity_check(f.blocks, f.split).empty);
}

TEST_CASE("Haar unitary with engineered block shapes")
{
    for (unsigned seed : {1u, 2u, 3u}) {
        const int d = 24;
        cmat q = haar_unitary(d, seed);
        CHECK(unitarity_defect(q) <= 1e-13);
        // pos1 has 14 rows, pos0 has 11 columns: Qmm is 10 x 13 and Qpp 14 x 11
        QBlocks b = slice(q, 14, 11);
        KernelPairing kp = kernel_pairing_check(b);
        CHECK(kp.dim_ker_mm == 3);
        CHECK(kp.dim_coker_pp == 3);
        CHECK(kp.dim_ker_pp == 0);
        CHECK(kp.dims_match);
        REQUIRE(kp.pairing_sv.size() == 3);
        for (Eigen::Index i = 0; i < 3; ++i)
            CHECK(std::abs(kp.pairing_sv(i) - 1.0) <= 1e-10);
        CHECK(block_index(b.Qmm).ind == 3);
        CHECK(block_index(b.Qpp).ind == -3);

        // square blocks with a planted kernel: block-diagonal Haar factors around a row swap that
        // sends one positive direction to the negative side and back
        cmat left = cmat::Zero(d, d), right = cmat::Zero(d, d);
        left.topLeftCorner(12, 12) = haar_unitary(12, seed + 10);
        left.bottomRightCorner(12, 12) = haar_unitary(12, seed + 20);
        right.topLeftCorner(12, 12) = haar_unitary(12, seed + 30);
        right.bottomRightCorner(12, 12) = haar_unitary(12, seed + 40);
        cmat swap = cmat::Identity(d, d);
        swap.row(0).swap(swap.row(d - 1));
        QBlocks c = slice(left * swap * right, 12, 12);
        KernelPairing kc = kernel_pairing_check(c);
        CHECK(kc.dim_ker_mm == 1);
        CHECK(kc.dim_ker_pp == 1);
        CHECK(kc.dims_match);
        CHECK(block_index(c.Qmm).ind == 0);
        CHECK(kc.iso_defect <= 1e-10);
    }
}

TEST_CASE("decay exponent fit")
{
    rvec lambda(40);
    cvec c(40);
    for (int i = 0; i < 40; ++i) {
        lambda(i) = 0.25 * (i - 20) + 0.1;
        c(i) = std::pow(1.0 + lambda(i) * lambda(i), -3.0) * std::exp(cd(0.0, 0.3 * i));
    }
    CHECK(fit_decay_exponent(lambda, c) == doctest::Approx(3.0).epsilon(0.1 / 3.0));
}

TEST_CASE("off-diagonal decay on a static circle")
{
    DecayOptions o;
    o.time_steps = 64;
    std::vector<DecayRow> rows = offdiag_decay(fixtures::circle(0.3, 0.3), {8, 12, 16}, o);
    REQUIRE(rows.size() == 3);
    for (const DecayRow& r : rows)
        for (double s : r.sigma)
            CHECK(s <= 1e-10);
    CHECK_THROWS_AS(offdiag_decay(fixtures::circle(0.3, 0.3), {8, 12}, o), Error);
}

TEST_CASE("off-diagonal decay on the crossing family")
{
    DecayOptions o;
    o.time_steps = 512;
    o.workers = 3;
    std::vector<DecayRow> rows = offdiag_decay(fixtures::line_crossing(), oracles::kDecayLadder, o);
    REQUIRE(rows.size() == 3);
    for (size_t i = 0; i < rows.size(); ++i) {
        const DecayRow& r = rows[i];
        CHECK(r.resolution == oracles::kDecayLadder[i]);
        REQUIRE(r.k.size() >= 3);
        CHECK(r.k[0] == 1);
        CHECK(r.k[2] == 16);
        CHECK(r.sigma[2] / r.sigma[0] <= 0.1);
        CHECK(std::abs(r.sigma[0] - oracles::kFrozenSigma1[i]) <= oracles::kRegressionSlack * oracles::kFrozenSigma1[i]);
        CHECK(std::abs(r.rho - oracles::kFrozenRho[i]) <= oracles::kRegressionSlack * oracles::kFrozenRho[i]);
    }
}
