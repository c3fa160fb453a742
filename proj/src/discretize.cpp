#include "callias/discretize.hpp"

#include <cmath>
#include <string>

#include "callias/error.hpp"

namespace callias {

namespace {

constexpr int kGaugeQuadrature = 4096;

// Fourier coefficients s_m = (1/C) int_0^C s(x) e^{-2 pi i m x / C} dx for |m| <= 2K.
cvec gauge_fourier(const CalliasModel& model, int K)
{
    const double C = model.domain.size;
    const SpatialProfile& s = model.gauge.spatial;
    cvec out = cvec::Zero(4 * K + 1);
    if (s.kind == SpatialProfile::Kind::Constant) {
        out(2 * K) = s.amplitude;
        return out;
    }
    std::vector<double> samples(kGaugeQuadrature);
    for (int q = 0; q < kGaugeQuadrature; ++q) {
        double x = C * q / kGaugeQuadrature;
        // evaluate the periodic extension nearest to the profile centre
        double y = x - C * std::round((x - s.center) / C);
        samples[static_cast<size_t>(q)] = s.value(y);
    }
    for (int m = -2 * K; m <= 2 * K; ++m) {
        cd acc = 0.0;
        for (int q = 0; q < kGaugeQuadrature; ++q) {
            double ang = -2.0 * kPi * m * static_cast<double>(q) / kGaugeQuadrature;
            acc += samples[static_cast<size_t>(q)] * cd(std::cos(ang), std::sin(ang));
        }
        out(m + 2 * K) = acc / static_cast<double>(kGaugeQuadrature);
    }
    return out;
}

cmat circle_matrix(const CalliasModel& model, const SpatialGrid& grid, double derivative_weight,
                   double coefficient)
{
    const int K = grid.resolution;
    const int d = grid.dim();
    cmat a = cmat::Zero(d, d);
    for (int i = 0; i < d; ++i)
        a(i, i) = derivative_weight * grid.wavenumber(i);
    if (model.gauge.present && coefficient != 0.0) {
        cvec s = gauge_fourier(model, K);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                a(i, j) += coefficient * s(i - j + 2 * K);
    }
    cmat h = 0.5 * (a + a.adjoint());
    return h;
}

void check_kind(const CalliasModel& model, const SpatialGrid& grid)
{
    if (model.domain.is_circle() != grid.is_circle())
        fail(ErrorKind::GridModelMismatch, "grid kind does not match the model domain");
    if (grid.extent != model.domain.size)
        fail(ErrorKind::GridModelMismatch, "grid extent does not match the model domain size");
}

}  // namespace

std::vector<double> SpatialGrid::positions() const
{
    std::vector<double> xs(static_cast<size_t>(dim()));
    for (int i = 0; i < dim(); ++i)
        xs[static_cast<size_t>(i)] = is_circle() ? static_cast<double>(mode(i)) : position(i);
    return xs;
}

SpatialGrid make_grid(const SpatialDomain& domain, int resolution)
{
    if (resolution < 8)
        fail(ErrorKind::ResolutionTooLow, "resolution " + std::to_string(resolution) + " is below the minimum of 8");
    SpatialGrid g;
    g.resolution = resolution;
    g.extent = domain.size;
    if (domain.is_circle()) {
        g.kind = SpatialGrid::Kind::FourierCircle;
    } else {
        g.kind = SpatialGrid::Kind::UniformLine;
        g.h = 2.0 * domain.size / (resolution + 1);
    }
    return g;
}

cmat HermitianOperator::dense() const
{
    if (!tridiagonal)
        return matrix;
    const int d = dim();
    cmat a = cmat::Zero(d, d);
    for (int i = 0; i < d; ++i)
        a(i, i) = diag(i);
    for (int i = 0; i + 1 < d; ++i) {
        a(i, i + 1) = off(i);
        a(i + 1, i) = off(i);
    }
    return a;
}

double HermitianOperator::hermiticity_defect() const
{
    if (tridiagonal)
        return 0.0;  // a real symmetric tridiagonal form is Hermitian by construction
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

HermitianOperator assemble_operator(const CalliasModel& model, const SpatialGrid& grid, double t)
{
    check_kind(model, grid);
    HermitianOperator op;
    op.grid = grid;
    op.model = model;
    op.t = t;
    if (grid.is_circle()) {
        op.matrix = circle_matrix(model, grid, 1.0, model.coefficient(t));
        return op;
    }
    const int n = grid.resolution;
    const int d = grid.dim();
    const double h = grid.h;
    op.tridiagonal = true;
    op.diag.resize(d);
    op.off.resize(d - 1);
    for (int j = 0; j < n; ++j) {
        double x = grid.position(2 * j);
        op.diag(2 * j) = model.sigma2_part(x, t);
        if (j + 1 < n) {
            double xm = grid.position(2 * j + 1);
            double s = 0.5 * model.sigma3_part(xm, t);
            op.diag(2 * j + 1) = -model.sigma2_part(xm, t);
            op.off(2 * j) = -1.0 / h + s;
            op.off(2 * j + 1) = 1.0 / h + s;
        }
    }
    return op;
}

cmat operator_rate(const CalliasModel& model, const SpatialGrid& grid, double t)
{
    check_kind(model, grid);
    const double rate = model.coefficient_rate(t);
    const int d = grid.dim();
    if (grid.is_circle())
        return circle_matrix(model, grid, 0.0, rate);
    cmat r = cmat::Zero(d, d);
    if (!model.perturbation.present || rate == 0.0)
        return r;
    const SpatialProfile& b = model.perturbation.spatial;
    for (int i = 0; i < d; ++i) {
        double x = grid.position(i);
        if (model.perturbation.direction == Direction::Sigma2) {
            r(i, i) = (grid.on_node(i) ? 1.0 : -1.0) * rate * b.value(x);
        } else if (!grid.on_node(i)) {
            double v = 0.5 * rate * b.value(x);
            r(i, i - 1) = v;
            r(i - 1, i) = v;
            r(i, i + 1) = v;
            r(i + 1, i) = v;
        }
    }
    return r;
}

double max_metric_distance(const CalliasModel& model, double x, double y)
{
    double d = std::abs(x - y);
    if (model.domain.is_circle()) {
        const double C = model.domain.size;
        d = std::fmod(d, C);
        d = std::min(d, C - d);
    }
    return d;
}

cmat node_spinor(const SpatialGrid& grid, const cvec& u)
{
    const int n = grid.resolution;
    cmat out(n, 2);
    const double r = 1.0 / std::sqrt(2.0);
    const cd I(0.0, 1.0);
    for (int j = 0; j < n; ++j) {
        cd v = u(2 * j);
        cd wl = j > 0 ? u(2 * j - 1) : cd(0.0);
        cd wr = j + 1 < n ? u(2 * j + 1) : cd(0.0);
        cd w = 0.5 * (wl + wr);
        out(j, 0) = r * (v + w);
        out(j, 1) = r * I * (v - w);
    }
    return out;
}

rvec indicator(const SpatialGrid& grid, double radius)
{
    rvec m = rvec::Zero(grid.dim());
    for (int i = 0; i < grid.dim(); ++i)
        if (std::abs(grid.position(i)) <= radius)
            m(i) = 1.0;
    return m;
}

}  // namespace callias
