#include "callias/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "callias/error.hpp"
#include "callias/spectral.hpp"

namespace callias {

namespace {

const cd I(0.0, 1.0);

cd phi1(cd z)
{
    if (std::abs(z) < 1e-5)
        return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
    return (std::exp(z) - 1.0) / z;
}

cvec phases(const rvec& lambda, double tau)
{
    cvec p(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        p(i) = std::polar(1.0, tau * lambda(i));
    return p;
}

void check_steps(int steps, double t0, double t1)
{
    if (t0 == t1)
        return;
    if (steps < kMinSteps)
        fail(ErrorKind::StepCountTooLow,
             "time_steps " + std::to_string(steps) + " is below the minimum of " + std::to_string(kMinSteps));
}

void check_times(double t0, double t1)
{
    if (!(t0 >= 0.0 && t1 <= 1.0 && t0 <= t1))
        fail(ErrorKind::Config, "propagation needs 0 <= t0 <= t1 <= 1");
}

// Caches the decomposition keyed on the family coefficient; collars and static families reuse it.
class StepCache {
public:
    StepCache(const CalliasModel& model, const SpatialGrid& grid) : model_(model), grid_(grid) {}

    const GeneratorEig& at(double t)
    {
        double c = model_.coefficient(t);
        if (!valid_ || c != coeff_) {
            eig_ = generator_eig(assemble_operator(model_, grid_, t));
            coeff_ = c;
            valid_ = true;
        }
        return eig_;
    }

private:
    const CalliasModel& model_;
    const SpatialGrid& grid_;
    GeneratorEig eig_;
    double coeff_ = 0.0;
    bool valid_ = false;
};

cmat raw_propagate(const CalliasModel& model, const SpatialGrid& grid, double t0, double t1, int steps)
{
    const int d = grid.dim();
    cmat q = cmat::Identity(d, d);
    if (t0 == t1)
        return q;
    if (model.static_on(t0, t1)) {
        generator_eig(assemble_operator(model, grid, t0)).apply(t1 - t0, q);
        return q;
    }
    StepCache cache(model, grid);
    const double dt = (t1 - t0) / steps;
    for (int k = 0; k < steps; ++k)
        cache.at(t0 + (k + 0.5) * dt).apply(dt, q);
    return q;
}

}  // namespace

void GeneratorEig::apply(double tau, cmat& q) const
{
    cvec p = phases(lambda, tau);
    if (real) {
        cmat c = vr.transpose() * q;
        c = p.asDiagonal() * c;
        q.noalias() = vr * c;
    } else {
        cmat c = vc.adjoint() * q;
        c = p.asDiagonal() * c;
        q.noalias() = vc * c;
    }
}

void GeneratorEig::apply(double tau, cvec& u) const
{
    cvec p = phases(lambda, tau);
    if (real) {
        cvec c = p.cwiseProduct(vr.transpose() * u);
        u.noalias() = vr * c;
    } else {
        cvec c = p.cwiseProduct(vc.adjoint() * u);
        u.noalias() = vc * c;
    }
}

void GeneratorEig::apply_forced(double tau, cvec& u, const cvec& f) const
{
    cvec cu = real ? cvec(vr.transpose() * u) : cvec(vc.adjoint() * u);
    cvec cf = real ? cvec(vr.transpose() * f) : cvec(vc.adjoint() * f);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        cd z = I * tau * lambda(i);
        cu(i) = std::exp(z) * cu(i) + tau * phi1(z) * cf(i);
    }
    u = real ? cvec(vr * cu) : cvec(vc * cu);
}

GeneratorEig generator_eig(const HermitianOperator& op)
{
    GeneratorEig g;
    if (op.tridiagonal) {
        RealEigResult r = tridiagonal_eig(op.diag, op.off, true);
        g.real = true;
        g.vr = std::move(r.vectors);
        // one Newton-Schulz sweep pulls V^T V back to I; the error otherwise compounds over the steps
        rmat gram = g.vr.transpose() * g.vr;
        g.vr = g.vr * (1.5 * rmat::Identity(gram.rows(), gram.cols()) - 0.5 * gram);
        g.lambda = std::move(r.values);
    } else {
        EigResult r = hermitian_eig(op.matrix, true);
        g.vc = std::move(r.vectors);
        g.lambda = std::move(r.values);
    }
    return g;
}

UnitaryPropagator propagate(const CalliasModel& model, const SpatialGrid& grid, double t0, double t1, int steps,
                            const EvolveOptions& opts)
{
    check_times(t0, t1);
    check_steps(steps, t0, t1);
    UnitaryPropagator out;
    out.t0 = t0;
    out.t1 = t1;
    out.steps = t0 == t1 ? 0 : steps;
    out.static_family = model.static_on(t0, t1);
    out.matrix = raw_propagate(model, grid, t0, t1, steps);
    out.unitarity_defect = unitarity_defect(out.matrix);
    if (opts.richardson && t0 != t1 && !out.static_family) {
        cmat fine = raw_propagate(model, grid, t0, t1, 2 * steps);
        out.richardson_change = norm2(out.matrix - fine);
        if (out.richardson_change > opts.richardson_tol)
            fail(ErrorKind::NotConverged, "doubling time_steps from " + std::to_string(steps) + " changes Q by " +
                                              std::to_string(out.richardson_change) + " (tolerance " +
                                              std::to_string(opts.richardson_tol) + ")");
    }
    return out;
}

Trajectory solve_cauchy(const CalliasModel& model, const SpatialGrid& grid, double t0, const cvec& u0,
                        const Forcing& f, int steps)
{
    if (!(t0 >= 0.0 && t0 <= 1.0))
        fail(ErrorKind::Config, "Cauchy time t0 must lie in [0, 1]");
    if (steps < kMinSteps)
        fail(ErrorKind::StepCountTooLow,
             "time_steps " + std::to_string(steps) + " is below the minimum of " + std::to_string(kMinSteps));
    const int d = grid.dim();
    if (u0.size() != d)
        fail(ErrorKind::DimensionMismatch, "initial state has dimension " + std::to_string(u0.size()) +
                                               ", expected " + std::to_string(d));
    auto forcing = [&](double t) -> cvec {
        if (!f)
            return cvec::Zero(d);
        cvec v = f(t);
        if (v.size() != d)
            fail(ErrorKind::DimensionMismatch, "forcing has the wrong dimension");
        return v;
    };

    const int nf = static_cast<int>(std::ceil(steps * (1.0 - t0) - 1e-9));
    const int nb = static_cast<int>(std::ceil(steps * t0 - 1e-9));
    Trajectory tr;
    tr.t0 = t0;
    tr.times.resize(static_cast<size_t>(nf + nb + 1));
    tr.states.resize(d, nf + nb + 1);
    tr.times[static_cast<size_t>(nb)] = t0;
    tr.states.col(nb) = u0;

    StepCache cache(model, grid);
    auto sweep = [&](int count, double t_end, int dir) {
        if (count == 0)
            return;
        const double dt = (t_end - t0) / count;  // negative when stepping backward
        cvec u = u0;
        for (int k = 0; k < count; ++k) {
            double tm = t0 + (k + 0.5) * dt;
            const GeneratorEig& g = cache.at(tm);
            g.apply_forced(dt, u, forcing(tm));
            int col = nb + dir * (k + 1);
            tr.times[static_cast<size_t>(col)] = t0 + (k + 1) * dt;
            tr.states.col(col) = u;
        }
    };
    sweep(nf, 1.0, 1);
    sweep(nb, 0.0, -1);

    // Crank-Nicolson residual of each step, relative to the local state and forcing size
    for (int k = 0; k + 1 < static_cast<int>(tr.times.size()); ++k) {
        double ta = tr.times[static_cast<size_t>(k)];
        double tb = tr.times[static_cast<size_t>(k + 1)];
        double dt = tb - ta;
        double tm = 0.5 * (ta + tb);
        HermitianOperator op = assemble_operator(model, grid, tm);
        cvec ua = tr.states.col(k);
        cvec ub = tr.states.col(k + 1);
        cvec fm = forcing(tm);
        cvec r = (ub - ua) / dt - I * (op.dense() * (0.5 * (ua + ub))) - fm;
        double scale = ua.norm() + fm.norm();
        if (scale > 0.0)
            tr.max_residual = std::max(tr.max_residual, r.norm() / scale);
    }
    return tr;
}

namespace {

// Points and magnitudes used to read off the support of a state.
struct SupportSamples {
    std::vector<double> x;
    std::vector<double> mag;
};

SupportSamples sample_support(const SpatialGrid& grid, const cvec& u)
{
    SupportSamples s;
    if (!grid.is_circle()) {
        for (int i = 0; i < grid.dim(); ++i) {
            s.x.push_back(grid.position(i));
            s.mag.push_back(std::abs(u(i)));
        }
        return s;
    }
    // circle: synthesise u(x) on a fine periodic grid
    const int m = 4 * grid.dim();
    for (int q = 0; q < m; ++q) {
        double x = grid.extent * q / m;
        cd acc = 0.0;
        for (int i = 0; i < grid.dim(); ++i)
            acc += u(i) * std::polar(1.0, grid.wavenumber(i) * x);
        s.x.push_back(x);
        s.mag.push_back(std::abs(acc) / std::sqrt(grid.extent));
    }
    return s;
}

}  // namespace

PropagationReport check_propagation(const CalliasModel& model, const SpatialGrid& grid, const cvec& u0, double t0,
                                    double t1, double eps, int samples)
{
    check_times(t0, t1);
    PropagationReport rep;
    rep.threshold = eps;
    rep.samples = samples;
    if (u0.size() != grid.dim())
        fail(ErrorKind::DimensionMismatch, "initial state has the wrong dimension");
    SupportSamples s0 = sample_support(grid, u0);
    double peak = 0.0;
    for (double m : s0.mag)
        peak = std::max(peak, m);
    if (peak == 0.0)
        return rep;
    const double cut = eps * peak;
    std::vector<double> supp;
    for (size_t i = 0; i < s0.x.size(); ++i)
        if (s0.mag[i] > cut)
            supp.push_back(s0.x[i]);
    rep.empty_support = false;
    const double lo = *std::min_element(supp.begin(), supp.end());
    const double hi = *std::max_element(supp.begin(), supp.end());
    rep.initial_radius = 0.5 * (hi - lo);

    auto dist_to_hull = [&](double x) {
        if (model.domain.is_circle()) {
            double best = std::numeric_limits<double>::infinity();
            for (double y : supp)
                best = std::min(best, max_metric_distance(model, x, y));
            return best;
        }
        if (x < lo)
            return lo - x;
        if (x > hi)
            return x - hi;
        return 0.0;
    };

    const bool is_static = model.static_on(t0, t1);
    GeneratorEig g0;
    if (is_static)
        g0 = generator_eig(assemble_operator(model, grid, t0));
    StepCache cache(model, grid);
    const int sub = std::max(1, 256 / std::max(samples, 1));
    cvec u = u0;
    double t = t0;
    for (int k = 1; k <= samples; ++k) {
        double tk = t0 + (t1 - t0) * k / samples;
        if (is_static) {
            u = u0;
            g0.apply(tk - t0, u);
        } else {
            double dt = (tk - t) / sub;
            for (int j = 0; j < sub; ++j)
                cache.at(t + (j + 0.5) * dt).apply(dt, u);
        }
        t = tk;
        SupportSamples sk = sample_support(grid, u);
        double reach = 0.0;
        for (size_t i = 0; i < sk.x.size(); ++i)
            if (sk.mag[i] > cut)
                reach = std::max(reach, dist_to_hull(sk.x[i]));
        double ex = reach - std::abs(tk - t0);
        rep.times.push_back(tk);
        rep.excess.push_back(ex);
        rep.max_excess = std::max(rep.max_excess, ex);
    }
    return rep;
}

}  // namespace callias
