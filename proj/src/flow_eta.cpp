#include "callias/flow_eta.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>

#include "callias/error.hpp"
#include "callias/discretize.hpp"
#include "callias/parallel.hpp"

namespace callias {

namespace {

struct Sample {
    double t = 0.0;
    HermitianOperator op;
    rvec lambda;
    double zero_tol = 0.0;
};

Sample make_sample(const CalliasModel& model, const SpatialGrid& grid, double t, double zero_tol_rel)
{
    Sample s;
    s.t = t;
    s.op = assemble_operator(model, grid, t);
    SpectralData d = eigendecompose(s.op, {zero_tol_rel, false});
    s.lambda = d.eigenvalues;
    s.zero_tol = d.zero_tol;
    return s;
}

// Max absolute row sum of A - B; bounds every eigenvalue displacement.
double difference_bound(const HermitianOperator& a, const HermitianOperator& b)
{
    const int d = a.dim();
    if (a.tridiagonal && b.tridiagonal) {
        double best = 0.0;
        for (int i = 0; i < d; ++i) {
            double r = std::abs(a.diag(i) - b.diag(i));
            if (i > 0)
                r += std::abs(a.off(i - 1) - b.off(i - 1));
            if (i + 1 < d)
                r += std::abs(a.off(i) - b.off(i));
            best = std::max(best, r);
        }
        return best;
    }
    return (a.dense() - b.dense()).cwiseAbs().rowwise().sum().maxCoeff();
}

bool negative(double l, double tol)
{
    return l < -tol;
}

bool ambiguous(const Sample& a, const Sample& b, double beta)
{
    const double band = 3.0 * beta;
    const Eigen::Index d = a.lambda.size();
    for (Eigen::Index k = 0; k < d; ++k) {
        if (std::min(std::abs(a.lambda(k)), std::abs(b.lambda(k))) > band)
            continue;
        for (const Sample* s : {&a, &b}) {
            if (k > 0 && s->lambda(k) - s->lambda(k - 1) < band)
                return true;
            if (k + 1 < d && s->lambda(k + 1) - s->lambda(k) < band)
                return true;
        }
    }
    return false;
}

double erfc_sum(const rvec& lambda, double zero_tol, double t)
{
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        double l = lambda(i);
        if (std::abs(l) <= zero_tol)
            continue;
        acc += (l > 0.0 ? 1.0 : -1.0) * std::erfc(std::sqrt(t) * std::abs(l));
    }
    return acc;
}

// Least-squares intercept of e(t) ~ c0 + c1 t + c2 t^2 on six geometric samples in [t_min, 8 t_min].
double heat_intercept(const std::function<double(double)>& e, double t_min)
{
    const int m = 6;
    Eigen::MatrixXd x(m, 3);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        double t = t_min * std::pow(8.0, static_cast<double>(i) / (m - 1));
        x(i, 0) = 1.0;
        x(i, 1) = t;
        x(i, 2) = t * t;
        y(i) = e(t);
    }
    Eigen::VectorXd c = x.colPivHouseholderQr().solve(y);
    return c(0);
}

int count_kernel(const SpectralData& s)
{
    int k = 0;
    for (int i = 0; i < s.dim; ++i)
        if (std::abs(s.eigenvalues(i)) <= s.zero_tol)
            ++k;
    return k;
}

EtaResult symmetric_window(const SpectralData& spec, const EtaOptions& opts)
{
    EtaResult r;
    r.method = eta_method_name(EtaMethod::SymmetricWindow);
    r.dim = spec.dim;
    r.kernel_excluded = count_kernel(spec);
    double lam = opts.window > 0.0 ? opts.window : spec.reliable_max;
    r.window = lam;
    if (lam > spec.reliable_max * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "eta window " << lam << " exceeds the reliable spectral range " << spec.reliable_max;
        fail(ErrorKind::WindowUnreliable, os.str());
    }
    std::vector<double> pos, neg, mags;
    for (int i = 0; i < spec.dim; ++i) {
        double l = spec.eigenvalues(i);
        if (std::abs(l) <= spec.zero_tol)
            continue;
        (l > 0.0 ? pos : neg).push_back(std::abs(l));
        mags.push_back(std::abs(l));
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    std::sort(mags.begin(), mags.end());
    const double cluster = 1e-9 * std::max(1.0, spec.op_norm);
    std::vector<double> values;
    for (size_t i = 0; i + 1 < mags.size(); ++i) {
        if (mags[i + 1] - mags[i] <= cluster)
            continue;
        double mid = 0.5 * (mags[i] + mags[i + 1]);
        if (mid < 0.5 * lam || mid > lam)
            continue;
        auto above = [&](const std::vector<double>& v) {
            return static_cast<size_t>(std::upper_bound(v.begin(), v.end(), mid) - v.begin());
        };
        size_t ip = above(pos), im = above(neg);
        if (ip + 1 >= pos.size() || im + 1 >= neg.size())
            continue;
        double sharp = static_cast<double>(ip) - static_cast<double>(im);
        // Hurwitz-type tail: each side treated as locally equally spaced beyond the cut
        double tp = 0.5 - (pos[ip] - mid) / (pos[ip + 1] - pos[ip]);
        double tm = 0.5 - (neg[im] - mid) / (neg[im + 1] - neg[im]);
        values.push_back(sharp + tp - tm);
    }
    if (values.empty())
        fail(ErrorKind::WindowUnreliable, "no spectral gap found in the eta window");
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values)
        var += (v - mean) * (v - mean);
    r.value = mean;
    r.error = std::sqrt(var / static_cast<double>(values.size()));
    r.windows_used = static_cast<int>(values.size());
    return r;
}

EtaResult heat_single(const SpectralData& spec, const EtaOptions& opts)
{
    EtaResult r;
    r.method = eta_method_name(EtaMethod::HeatKernel);
    r.dim = spec.dim;
    r.kernel_excluded = count_kernel(spec);
    r.t_min = opts.heat_t_min;
    if (std::erfc(std::sqrt(opts.heat_t_min) * spec.op_norm) > 1e-3)
        fail(ErrorKind::WindowUnreliable, "heat kernel window: spectrum too short for t_min");
    auto e = [&](double t) { return erfc_sum(spec.eigenvalues, spec.zero_tol, t); };
    r.value = heat_intercept(e, opts.heat_t_min);
    r.error = std::abs(heat_intercept(e, 2.0 * opts.heat_t_min) - r.value);
    return r;
}

EtaResult hurwitz(const SpectralData& spec, const SpatialGrid& grid)
{
    if (!grid.is_circle())
        fail(ErrorKind::Config, "hurwitz_oracle is only available on circle models");
    EtaResult r;
    r.method = eta_method_name(EtaMethod::HurwitzOracle);
    r.dim = spec.dim;
    Eigen::Index best = 0;
    for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
        if (std::abs(spec.eigenvalues(i)) < std::abs(spec.eigenvalues(best)))
            best = i;
    double x = spec.eigenvalues(best) * grid.extent / (2.0 * kPi);
    double theta = x - std::floor(x);
    if (theta < 1e-12 || theta > 1.0 - 1e-12) {
        r.value = 0.0;
        r.kernel_excluded = 1;
    } else {
        r.value = 1.0 - 2.0 * theta;
    }
    return r;
}

}  // namespace

SpectralFlowResult spectral_flow(const CalliasModel& model, const SpatialGrid& grid, int time_steps,
                                 const FlowOptions& opts)
{
    if (time_steps < kMinFlowSteps)
        fail(ErrorKind::StepCountTooLow, "flow_steps " + std::to_string(time_steps) + " is below the minimum of " +
                                             std::to_string(kMinFlowSteps));
    std::vector<Sample> base(static_cast<size_t>(time_steps + 1));
    parallel_for(time_steps + 1, opts.workers, [&](int j) {
        base[static_cast<size_t>(j)] = make_sample(model, grid, static_cast<double>(j) / time_steps, opts.zero_tol_rel);
    });

    SpectralFlowResult out;
    std::vector<const Sample*> order;
    std::vector<std::unique_ptr<Sample>> refined;

    auto record_interval = [&](const Sample& a, const Sample& b) {
        for (Eigen::Index k = 0; k < a.lambda.size(); ++k) {
            bool na = negative(a.lambda(k), a.zero_tol);
            bool nb = negative(b.lambda(k), b.zero_tol);
            if (na == nb)
                continue;
            Crossing c;
            c.track = static_cast<int>(k);
            c.direction = na ? 1 : -1;
            double la = a.lambda(k), lb = b.lambda(k);
            double f = lb != la ? -la / (lb - la) : 0.5;
            c.t = a.t + std::clamp(f, 0.0, 1.0) * (b.t - a.t);
            out.crossings.push_back(c);
            (c.direction > 0 ? out.up : out.down) += 1;
        }
    };

    std::function<void(const Sample&, const Sample&, int)> walk = [&](const Sample& a, const Sample& b, int depth) {
        double beta = difference_bound(a.op, b.op);
        out.max_motion = std::max(out.max_motion, beta);
        if (beta > 0.0 && ambiguous(a, b, beta)) {
            if (depth >= opts.max_depth) {
                std::ostringstream os;
                os << "eigenvalue tracks near zero stay within 3x the motion bound on [" << a.t << ", " << b.t
                   << "] after " << depth << " refinements";
                fail(ErrorKind::TrackMatchingAmbiguous, os.str());
            }
            refined.push_back(std::make_unique<Sample>(make_sample(model, grid, 0.5 * (a.t + b.t), opts.zero_tol_rel)));
            const Sample& m = *refined.back();
            ++out.refinements;
            walk(a, m, depth + 1);
            walk(m, b, depth + 1);
            return;
        }
        record_interval(a, b);
        order.push_back(&b);
    };

    order.push_back(&base[0]);
    for (int j = 0; j < time_steps; ++j)
        walk(base[static_cast<size_t>(j)], base[static_cast<size_t>(j + 1)], 0);

    const int d = grid.dim();
    out.tracks.resize(d, static_cast<Eigen::Index>(order.size()));
    for (size_t j = 0; j < order.size(); ++j) {
        out.times.push_back(order[j]->t);
        out.tracks.col(static_cast<Eigen::Index>(j)) = order[j]->lambda;
    }
    out.net = out.up - out.down;
    return out;
}

const char* eta_method_name(EtaMethod m)
{
    switch (m) {
    case EtaMethod::SymmetricWindow: return "symmetric_window";
    case EtaMethod::HeatKernel: return "heat_kernel";
    case EtaMethod::HurwitzOracle: return "hurwitz_oracle";
    }
    return "?";
}

EtaMethod parse_eta_method(const std::string& s)
{
    if (s == "symmetric_window")
        return EtaMethod::SymmetricWindow;
    if (s == "heat_kernel")
        return EtaMethod::HeatKernel;
    if (s == "hurwitz_oracle")
        return EtaMethod::HurwitzOracle;
    fail(ErrorKind::Config, "schema: unknown eta_method '" + s + "'");
}

EtaResult eta_invariant(const SpectralData& spec, const SpatialGrid& grid, const EtaOptions& opts)
{
    switch (opts.method) {
    case EtaMethod::SymmetricWindow: return symmetric_window(spec, opts);
    case EtaMethod::HeatKernel: return heat_single(spec, opts);
    case EtaMethod::HurwitzOracle: return hurwitz(spec, grid);
    }
    fail(ErrorKind::Config, "unknown eta method");
}

EtaResult relative_eta(const SpectralData& spec0, const SpectralData& spec1, const EtaOptions& opts)
{
    if (spec0.dim != spec1.dim)
        fail(ErrorKind::DimensionMismatch, "relative eta needs spectra of equal dimension");
    EtaResult r;
    r.method = eta_method_name(EtaMethod::HeatKernel);
    r.dim = spec0.dim;
    r.t_min = opts.heat_t_min;
    double top = std::min(spec0.op_norm, spec1.op_norm);
    if (top * std::sqrt(opts.heat_t_min) < 1.0) {
        std::ostringstream os;
        os << "relative eta: largest eigenvalue " << top << " is too small for heat_t_min " << opts.heat_t_min;
        fail(ErrorKind::WindowUnreliable, os.str());
    }
    auto e = [&](double t) {
        return erfc_sum(spec1.eigenvalues, spec1.zero_tol, t) - erfc_sum(spec0.eigenvalues, spec0.zero_tol, t);
    };
    r.value = heat_intercept(e, opts.heat_t_min);
    r.error = std::abs(heat_intercept(e, 2.0 * opts.heat_t_min) - r.value);
    r.kernel_excluded = count_kernel(spec0) + count_kernel(spec1);
    return r;
}

LocalTerm as_integral(const CalliasModel& model, int time_steps, int space_resolution)
{
    LocalTerm lt;
    if (!model.domain.is_circle()) {
        lt.marker = "flat local term";
        return lt;
    }
    if (!model.gauge.present) {
        lt.marker = "no gauge family";
        return lt;
    }
    const double C = model.domain.size;
    const double dx = C / space_resolution;
    double acc = 0.0;
    for (int i = 0; i < space_resolution; ++i) {
        double x = (i + 0.5) * dx;
        double col = 0.0;
        // d_t a dt evaluated as the cell increment, so the time sum telescopes exactly
        for (int k = 0; k < time_steps; ++k) {
            double ta = static_cast<double>(k) / time_steps;
            double tb = static_cast<double>(k + 1) / time_steps;
            col += model.gauge_value(tb, x) - model.gauge_value(ta, x);
        }
        acc += col * dx;
    }
    lt.value = acc / (2.0 * kPi);
    return lt;
}

SfEtaCheck sf_eta_relation_check(const CalliasModel& model, const SpatialGrid& grid, int samples,
                                 const EtaOptions& eta, const FlowOptions& flow)
{
    if (samples < 2)
        fail(ErrorKind::Config, "sf-eta check needs at least 2 samples");
    SfEtaCheck out;
    SpectralFlowResult sf = spectral_flow(model, grid, std::max(samples, kMinFlowSteps), flow);
    out.sf = sf.net;
    out.lhs = 2.0 * sf.net;
    std::vector<SpectralData> specs(static_cast<size_t>(samples + 1));
    std::vector<double> rate(static_cast<size_t>(samples + 1), 0.0);
    const double t_min = eta.heat_t_min;
    parallel_for(samples + 1, flow.workers, [&](int j) {
        const double s = static_cast<double>(j) / samples;
        SpectralData sp = eigendecompose(assemble_operator(model, grid, s), {flow.zero_tol_rel, true});
        // Hellmann-Feynman eigenvalue velocities, then the s-derivative of the regularized sum.
        cmat da = operator_rate(model, grid, s);
        rvec vel(sp.dim);
        for (int i = 0; i < sp.dim; ++i)
            vel(i) = sp.eigenvectors.col(i).dot(da * sp.eigenvectors.col(i)).real();
        auto de = [&](double t) {
            double acc = 0.0;
            for (int i = 0; i < sp.dim; ++i) {
                double l = sp.eigenvalues(i);
                acc -= 2.0 / std::sqrt(M_PI) * std::sqrt(t) * std::exp(-t * l * l) * vel(i);
            }
            return acc;
        };
        rate[static_cast<size_t>(j)] = heat_intercept(de, t_min);
        sp.eigenvectors.resize(0, 0);
        specs[static_cast<size_t>(j)] = std::move(sp);
    });
    for (int j = 0; j <= samples; ++j) {
        out.s.push_back(static_cast<double>(j) / samples);
        out.eta_bar.push_back(relative_eta(specs[0], specs[static_cast<size_t>(j)], eta).value);
    }
    auto signature = [](const SpectralData& sp) {
        int sig = 0;
        for (int i = 0; i < sp.dim; ++i) {
            double l = sp.eigenvalues(i);
            if (std::abs(l) > sp.zero_tol)
                sig += l > 0.0 ? 1 : -1;
        }
        return sig;
    };
    // Smooth part: trapezoid integral of the regularized derivative. Jumps: signature changes.
    for (int j = 0; j < samples; ++j) {
        out.jump_total += signature(specs[static_cast<size_t>(j + 1)]) - signature(specs[static_cast<size_t>(j)]);
        out.smooth_integral += 0.5 * (rate[static_cast<size_t>(j)] + rate[static_cast<size_t>(j + 1)]) / samples;
    }
    out.rhs = out.eta_bar.back() - out.eta_bar.front() - out.smooth_integral;
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

void IndexReport::evaluate()
{
    integer_residuals.clear();
    real_residuals.clear();
    integer_residuals["indQmm_eq_sf_minus_k1"] = static_cast<long>(ind_Qmm) - (sf - dim_ker_A1);
    integer_residuals["indQpp_plus_indQmm"] = static_cast<long>(ind_Qpp) + ind_Qmm;
    integer_residuals["indQpp_eq_minus_sf_plus_k1"] = static_cast<long>(ind_Qpp) + (sf - dim_ker_A1);
    integer_residuals["indQmm_eq_eta_formula"] = static_cast<long>(ind_Qmm) - std::lround(eta_rhs);
    real_residuals["eta_formula_prerounding"] = std::abs(eta_rhs - ind_Qmm);
    if (wick_aps_index)
        integer_residuals["indQmm_eq_wick_aps"] = static_cast<long>(ind_Qmm) - *wick_aps_index;
    if (wick_anti_aps_index)
        integer_residuals["indQpp_eq_wick_anti_aps"] = static_cast<long>(ind_Qpp) - *wick_anti_aps_index;
    if (sf_eta_residual)
        real_residuals["sf_eta_relation"] = *sf_eta_residual;
}

std::vector<std::string> IndexReport::violations() const
{
    std::vector<std::string> v;
    for (const auto& [name, r] : integer_residuals)
        if (r != 0)
            v.push_back(name);
    return v;
}

}  // namespace callias
