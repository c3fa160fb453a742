#include "callias/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "callias/error.hpp"

namespace callias {

namespace {

const cd I(0.0, 1.0);

double reliable_range(const HermitianOperator& op)
{
    const SpatialGrid& g = op.grid;
    if (g.is_circle())
        return 2.0 * kPi * std::max(g.resolution - 2, 1) / g.extent;
    const CalliasModel& m = op.model;
    double edge = std::min(std::abs(m.sigma3_part(-g.extent, op.t)), std::abs(m.sigma3_part(g.extent, op.t)));
    return std::min(0.5 * edge, 1.0 / g.h);
}

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(static_cast<size_t>(n), 0.0);
    w.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = n == 0 ? 1.0 : p1;
            double pm = n == 1 ? 1.0 : p0;
            dp = n * (z * pn - pm) / (z * z - 1.0);
            double dz = pn / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        x[static_cast<size_t>(i)] = z;
        w[static_cast<size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

struct Node {
    cd z;
    cd weight;  // includes dz/ds and the 1/(2 pi i) prefactor
};

// Quadrature for a keyhole contour: outer arc, two rays along the slit, inner arc.
std::vector<Node> keyhole_nodes(const Contour& c, int n)
{
    std::vector<double> gx, gw;
    gauss_legendre(n, gx, gw);
    std::vector<Node> out;
    const double beta = kPi - c.angle;
    const cd pref = 1.0 / (2.0 * kPi * I);
    auto arc = [&](double radius, double th0, double th1) {
        for (int k = 0; k < n; ++k) {
            double th = 0.5 * (th0 + th1) + 0.5 * (th1 - th0) * gx[static_cast<size_t>(k)];
            cd e = std::polar(1.0, th);
            cd dz = I * radius * e * 0.5 * (th1 - th0) * gw[static_cast<size_t>(k)];
            out.push_back({c.center + radius * e, pref * dz});
        }
    };
    auto ray = [&](double ang, double r0, double r1) {
        cd e = std::polar(1.0, ang);
        for (int k = 0; k < n; ++k) {
            double r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * gx[static_cast<size_t>(k)];
            cd dz = e * 0.5 * (r1 - r0) * gw[static_cast<size_t>(k)];
            out.push_back({c.center + r * e, pref * dz});
        }
    };
    arc(c.radius, -beta, beta);
    ray(beta, c.radius, c.eps);
    arc(c.eps, beta, -beta);
    ray(-beta, c.eps, c.radius);
    return out;
}

void check_contour(const HermitianOperator& op, const Contour& c)
{
    if (c.kind == Contour::Kind::Keyhole && !(c.eps > 0.0 && c.eps < c.radius && c.angle > 0.0 && c.angle < kPi))
        fail(ErrorKind::Config, "keyhole contour needs 0 < eps < radius and 0 < angle < pi");
    if (!(c.radius > 0.0))
        fail(ErrorKind::Config, "contour radius must be positive");
    SpectralData s = eigendecompose(op, {1e-6, false});
    double scale = std::max(1.0, s.op_norm);
    for (int i = 0; i < s.dim; ++i) {
        if (c.distance(s.eigenvalues(i)) <= 1e-9 * scale) {
            std::ostringstream os;
            os << "contour passes through eigenvalue " << s.eigenvalues(i);
            fail(ErrorKind::ContourHitsSpectrum, os.str());
        }
    }
}

template <class Integrand>
RieszResult contour_integral(const Contour& c, const RieszOptions& opts, int dim, Integrand f)
{
    RieszResult out;
    if (c.kind == Contour::Kind::Circle) {
        // trapezoid rule on theta_k = 2 pi k / N; doubling reuses every previous node
        int n = std::max(opts.nodes, 4);
        cmat sum = cmat::Zero(dim, dim);
        auto add = [&](int k, int total) {
            cd e = std::polar(1.0, 2.0 * kPi * k / total);
            sum += (c.radius * e) * f(c.center + c.radius * e);
        };
        for (int k = 0; k < n; ++k)
            add(k, n);
        cmat prev = sum / static_cast<double>(n);
        while (true) {
            if (2 * n > opts.max_nodes)
                fail(ErrorKind::QuadratureNotConverged, "Riesz quadrature did not converge within the node budget");
            for (int k = 1; k < 2 * n; k += 2)
                add(k, 2 * n);
            n *= 2;
            cmat cur = sum / static_cast<double>(n);
            double change = (cur - prev).cwiseAbs().maxCoeff();
            prev = cur;
            if (change <= opts.tol) {
                out.matrix = cur;
                out.nodes_used = n;
                out.last_change = change;
                return out;
            }
        }
    }
    int n = std::max(opts.nodes / 4, 8);
    auto eval = [&](int m) {
        cmat acc = cmat::Zero(dim, dim);
        for (const Node& node : keyhole_nodes(c, m))
            acc += node.weight * f(node.z);
        return acc;
    };
    cmat prev = eval(n);
    while (true) {
        if (8 * n > opts.max_nodes)
            fail(ErrorKind::QuadratureNotConverged, "keyhole quadrature did not converge within the node budget");
        n *= 2;
        cmat cur = eval(n);
        double change = (cur - prev).cwiseAbs().maxCoeff();
        prev = cur;
        if (change <= opts.tol) {
            out.matrix = cur;
            out.nodes_used = 4 * n;
            out.last_change = change;
            return out;
        }
    }
}

}  // namespace

SpectralData eigendecompose(const HermitianOperator& op, const SpectralOptions& opts)
{
    SpectralData s;
    s.dim = op.dim();
    s.t = op.t;
    if (op.tridiagonal) {
        RealEigResult r = tridiagonal_eig(op.diag, op.off, opts.vectors);
        s.eigenvalues = r.values;
        if (opts.vectors)
            s.eigenvectors = r.vectors.cast<cd>();
    } else {
        EigResult r = hermitian_eig(op.matrix, opts.vectors);
        s.eigenvalues = r.values;
        if (opts.vectors)
            s.eigenvectors = std::move(r.vectors);
    }
    if (opts.vectors)
        fix_phases(s.eigenvectors);
    s.op_norm = s.dim ? std::max(std::abs(s.eigenvalues(0)), std::abs(s.eigenvalues(s.dim - 1))) : 0.0;
    s.zero_tol = opts.zero_tol_rel * s.op_norm;
    s.reliable_max = reliable_range(op);
    return s;
}

double orthonormality_defect(const SpectralData& spec)
{
    cmat g = spec.eigenvectors.adjoint() * spec.eigenvectors;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
}

double eigen_residual(const HermitianOperator& op, const SpectralData& spec)
{
    cmat a = op.dense();
    cmat r = a * spec.eigenvectors - spec.eigenvectors * spec.eigenvalues.cast<cd>().asDiagonal();
    return r.cwiseAbs().maxCoeff();
}

const char* interval_name(Interval iv)
{
    switch (iv) {
    case Interval::NonNegative: return "[0,inf)";
    case Interval::Negative: return "(-inf,0)";
    case Interval::Positive: return "(0,inf)";
    case Interval::NonPositive: return "(-inf,0]";
    }
    return "?";
}

void check_kernel_gap(const SpectralData& spec)
{
    for (int i = 0; i < spec.dim; ++i) {
        double a = std::abs(spec.eigenvalues(i));
        if (a > spec.zero_tol && a <= 10.0 * spec.zero_tol) {
            std::ostringstream os;
            os << "eigenvalue " << spec.eigenvalues(i) << " lies in the guard band (" << spec.zero_tol << ", "
               << 10.0 * spec.zero_tol << "]";
            fail(ErrorKind::AmbiguousKernel, os.str());
        }
    }
}

std::vector<int> interval_indices(const SpectralData& spec, Interval iv)
{
    std::vector<int> idx;
    for (int i = 0; i < spec.dim; ++i) {
        double l = spec.eigenvalues(i);
        bool zero = std::abs(l) <= spec.zero_tol;
        bool in = false;
        switch (iv) {
        case Interval::NonNegative: in = zero || l > 0.0; break;
        case Interval::Negative: in = !zero && l < 0.0; break;
        case Interval::Positive: in = !zero && l > 0.0; break;
        case Interval::NonPositive: in = zero || l < 0.0; break;
        }
        if (in)
            idx.push_back(i);
    }
    return idx;
}

Projection spectral_projection(const SpectralData& spec, Interval iv)
{
    check_kernel_gap(spec);
    if (!spec.has_vectors())
        fail(ErrorKind::Config, "spectral_projection needs eigenvectors");
    std::vector<int> idx = interval_indices(spec, iv);
    cmat v(spec.dim, static_cast<Eigen::Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k)
        v.col(static_cast<Eigen::Index>(k)) = spec.eigenvectors.col(idx[k]);
    Projection p;
    p.matrix = v * v.adjoint();
    p.interval = iv;
    p.rank = static_cast<int>(idx.size());
    return p;
}

bool Contour::encloses(double lambda) const
{
    double r = lambda - center;
    if (kind == Kind::Circle)
        return std::abs(r) < radius;
    return r > eps && r < radius;
}

double Contour::distance(double lambda) const
{
    double r = lambda - center;
    if (kind == Kind::Circle)
        return std::abs(std::abs(r) - radius);
    // real points: the outer arc meets the axis at +radius, the inner arc at +eps
    double d = std::min(std::abs(r - radius), std::abs(r - eps));
    if (r < 0.0) {
        // distance to the slit rays at angle +-(pi - angle)
        double beta = kPi - angle;
        cd e = std::polar(1.0, beta);
        double proj = std::clamp(r * e.real(), eps, radius);
        d = std::min(d, std::abs(cd(r, 0.0) - proj * e));
    }
    return d;
}

cmat resolvent(const HermitianOperator& op, cd z)
{
    const int d = op.dim();
    if (op.tridiagonal) {
        cvec lo = -op.off.cast<cd>();
        cvec up = lo;
        cvec di = cvec::Constant(d, z) - op.diag.cast<cd>();
        return tridiagonal_inverse(lo, di, up);
    }
    cmat m = -op.matrix;
    m.diagonal().array() += z;
    return m.partialPivLu().inverse();
}

RieszResult riesz_projection(const HermitianOperator& op, const Contour& contour, const RieszOptions& opts)
{
    check_contour(op, contour);
    RieszResult r = contour_integral(contour, opts, op.dim(), [&](cd z) { return resolvent(op, z); });
    if (contour.kind == Contour::Kind::Circle)
        return r;
    return r;
}

RieszResult riesz_projection_derivative(const HermitianOperator& op, const Contour& contour, const cmat& dA,
                                        const RieszOptions& opts)
{
    check_contour(op, contour);
    if (dA.rows() != op.dim() || dA.cols() != op.dim())
        fail(ErrorKind::DimensionMismatch, "dA has the wrong shape");
    return contour_integral(contour, opts, op.dim(), [&](cd z) {
        cmat r = resolvent(op, z);
        return cmat(r * dA * r);
    });
}

double sobolev_norm(const SpectralData& spec, const cvec& u, double s)
{
    if (u.size() != spec.dim)
        fail(ErrorKind::DimensionMismatch, "state has the wrong dimension");
    cvec c = spec.eigenvectors.adjoint() * u;
    double acc = 0.0;
    for (int i = 0; i < spec.dim; ++i) {
        double l = spec.eigenvalues(i);
        acc += std::pow(1.0 + l * l, s) * std::norm(c(i));
    }
    return std::sqrt(acc);
}

cmat functional_calculus(const SpectralData& spec, const std::function<double(double)>& f)
{
    rvec fl(spec.dim);
    for (int i = 0; i < spec.dim; ++i)
        fl(i) = f(spec.eigenvalues(i));
    return spec.eigenvectors * fl.cast<cd>().asDiagonal() * spec.eigenvectors.adjoint();
}

int kernel_dim(const SpectralData& spec)
{
    check_kernel_gap(spec);
    int k = 0;
    for (int i = 0; i < spec.dim; ++i)
        if (std::abs(spec.eigenvalues(i)) <= spec.zero_tol)
            ++k;
    return k;
}

}  // namespace callias
