#include "callias/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "callias/error.hpp"

namespace callias {

namespace {

const cd I(0.0, 1.0);

cmat pauli(int k)
{
    cmat s(2, 2);
    switch (k) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -I, I, 0; break;
    default: s << 1, 0, 0, -1; break;
    }
    return s;
}

cmat parse_matrix(const json& j, const std::string& path)
{
    if (!j.is_array() || j.empty())
        fail(ErrorKind::Config, "schema: '" + path + "' must be a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    cmat m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const json& row = j[static_cast<size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            fail(ErrorKind::Config, "schema: '" + path + "' must be square");
        for (Eigen::Index c = 0; c < n; ++c) {
            const json& e = row[static_cast<size_t>(c)];
            if (e.is_number())
                m(r, c) = cd(e.get<double>(), 0.0);
            else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
                m(r, c) = cd(e[0].get<double>(), e[1].get<double>());
            else
                fail(ErrorKind::Config, "schema: entries of '" + path + "' must be numbers or [re, im]");
        }
    }
    return m;
}

SpatialProfile parse_spatial(const json& j, const std::string& path)
{
    StrictObject o(j, path);
    std::string kind = o.string("kind");
    SpatialProfile p;
    if (kind == "zero") {
        p = SpatialProfile::zero();
    } else if (kind == "constant") {
        p = SpatialProfile::constant(o.number("value"));
    } else if (kind == "linear") {
        p = SpatialProfile::linear(o.number("slope"));
    } else if (kind == "tanh") {
        p = SpatialProfile::tanh(o.number_or("amplitude", 1.0), o.number_or("scale", 1.0));
    } else if (kind == "bump") {
        p = SpatialProfile::bump(o.number("height"), o.number_or("center", 0.0), o.number("width"));
    } else if (kind == "gaussian") {
        p = SpatialProfile::gaussian(o.number("height"), o.number_or("center", 0.0), o.number("width"));
    } else {
        fail(ErrorKind::Config, "schema: unknown profile kind '" + kind + "' at '" + path + "'");
    }
    if ((p.kind == SpatialProfile::Kind::Bump || p.kind == SpatialProfile::Kind::Gaussian ||
         p.kind == SpatialProfile::Kind::Tanh) && !(p.width > 0.0))
        fail(ErrorKind::Config, "schema: '" + path + "' width/scale must be positive");
    o.finish();
    return p;
}

TimeProfile parse_time(const json& j, const std::string& path, double collar_delta)
{
    StrictObject o(j, path);
    std::string kind = o.string("kind");
    TimeProfile p;
    if (kind == "constant") {
        p = TimeProfile::constant(o.number("value"));
    } else if (kind == "linear") {
        p = TimeProfile::linear(o.number("from"), o.number("to"));
    } else if (kind == "collar_ramp") {
        double a = o.number("from");
        double b = o.number("to");
        p = TimeProfile::collar_ramp(a, b, o.number_or("delta", collar_delta));
        if (!(p.delta > 0.0 && p.delta < 0.5))
            fail(ErrorKind::Config, "schema: '" + path + ".delta' must lie in (0, 1/2)");
    } else {
        fail(ErrorKind::Config, "schema: unknown time profile kind '" + kind + "' at '" + path + "'");
    }
    o.finish();
    return p;
}

std::string describe(const cmat& m)
{
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

double rel_defect(const cmat& a)
{
    return a.cwiseAbs().maxCoeff();
}

void check_clifford(const CalliasModel& m)
{
    const CliffordModule& c = m.clifford;
    const int want = m.domain.is_circle() ? 1 : 2;
    const Eigen::Index d = c.dim;
    if (c.dim != want)
        fail(ErrorKind::AssumptionViolation, "A3: Clifford module dimension " + std::to_string(c.dim) +
                                                 " does not match the domain (expected " + std::to_string(want) + ")");
    for (const cmat* mat : {&c.gamma_space, &c.beta, &c.phi_matrix, &c.perturbation_matrix}) {
        if (mat->rows() != d || mat->cols() != d)
            fail(ErrorKind::AssumptionViolation, "A3: Clifford matrix of shape " + describe(*mat) +
                                                     " in a module of dimension " + std::to_string(c.dim));
    }
    const double tol = 1e-12;
    const cmat id = cmat::Identity(d, d);
    if (rel_defect(c.beta * c.beta - id) > tol)
        fail(ErrorKind::AssumptionViolation, "A3: beta^2 != identity");
    if (rel_defect(c.gamma_space + c.gamma_space.adjoint()) > tol)
        fail(ErrorKind::AssumptionViolation, "A3: gamma_space is not skew-Hermitian");
    if (rel_defect(c.gamma_space * c.gamma_space + id) > tol)
        fail(ErrorKind::AssumptionViolation, "A3: gamma_space^2 != -identity");
    if (rel_defect(c.phi_matrix - c.phi_matrix.adjoint()) > tol)
        fail(ErrorKind::AssumptionViolation, "A3: phi_matrix is not Hermitian");
    if (rel_defect(c.gamma_space * c.phi_matrix + c.phi_matrix * c.gamma_space) > tol)
        fail(ErrorKind::AssumptionViolation, "A3: phi_matrix does not anticommute with gamma_space");
    if (rel_defect(c.perturbation_matrix - c.perturbation_matrix.adjoint()) > tol)
        fail(ErrorKind::AssumptionViolation, "A3: perturbation matrix is not Hermitian");
    if (rel_defect(c.gamma_space * c.perturbation_matrix + c.perturbation_matrix * c.gamma_space) > tol)
        fail(ErrorKind::AssumptionViolation, "A3: perturbation matrix does not anticommute with gamma_space");
}

const TimeProfile* family_profile(const CalliasModel& m)
{
    if (m.domain.is_circle())
        return m.gauge.present ? &m.gauge.time : nullptr;
    return m.perturbation.present ? &m.perturbation.time : nullptr;
}

void check_collar(const CalliasModel& m)
{
    const TimeProfile* p = family_profile(m);
    if (!p)
        return;
    const double d = m.collar_delta;
    const double v0 = p->value(0.0), v1 = p->value(1.0);
    for (int k = 0; k <= 64; ++k) {
        double s = d * k / 64.0;
        if (p->value(s) != v0 || p->value(1.0 - s) != v1) {
            std::ostringstream os;
            os << "family varies inside the temporal collar of width " << d << " (time profile '"
               << p->kind_name() << "')";
            fail(ErrorKind::CollarViolation, os.str());
        }
    }
}

}  // namespace

CliffordModule CliffordModule::canonical(int dim, Direction dir)
{
    CliffordModule c;
    c.dim = dim;
    if (dim == 1) {
        c.gamma_space = cmat::Constant(1, 1, -I);
        c.beta = cmat::Identity(1, 1);
        c.phi_matrix = cmat::Zero(1, 1);
        c.perturbation_matrix = cmat::Zero(1, 1);
    } else {
        c.gamma_space = -I * pauli(1);
        c.beta = pauli(2);
        c.phi_matrix = pauli(3);
        c.perturbation_matrix = dir == Direction::Sigma2 ? pauli(2) : pauli(3);
    }
    return c;
}

bool CliffordModule::is_canonical(Direction dir) const
{
    CliffordModule ref = canonical(dim, dir);
    return gamma_space.isApprox(ref.gamma_space, 0.0) && phi_matrix.isApprox(ref.phi_matrix, 0.0) &&
           perturbation_matrix.isApprox(ref.perturbation_matrix, 0.0);
}

double CalliasModel::coefficient(double t) const
{
    if (domain.is_circle())
        return gauge.present ? gauge.time.value(t) : 0.0;
    return perturbation.present ? perturbation.time.value(t) : 0.0;
}

double CalliasModel::coefficient_rate(double t) const
{
    if (domain.is_circle())
        return gauge.present ? gauge.time.derivative(t) : 0.0;
    return perturbation.present ? perturbation.time.derivative(t) : 0.0;
}

bool CalliasModel::static_on(double t0, double t1) const
{
    const TimeProfile* p = family_profile(*this);
    if (!p || t0 == t1)
        return true;
    switch (p->kind) {
    case TimeProfile::Kind::Constant: return true;
    case TimeProfile::Kind::Linear: return p->from == p->to;
    case TimeProfile::Kind::CollarRamp:
        return p->from == p->to || std::max(t0, t1) <= p->delta || std::min(t0, t1) >= 1.0 - p->delta;
    }
    return false;
}

double CalliasModel::sigma3_part(double x, double t) const
{
    double v = potential.value(x);
    if (perturbation.present && perturbation.direction == Direction::Sigma3)
        v += perturbation.time.value(t) * perturbation.spatial.value(x);
    return v;
}

double CalliasModel::sigma3_part_dx(double x, double t) const
{
    double v = potential.derivative(x);
    if (perturbation.present && perturbation.direction == Direction::Sigma3)
        v += perturbation.time.value(t) * perturbation.spatial.derivative(x);
    return v;
}

double CalliasModel::sigma2_part(double x, double t) const
{
    double v = mass;
    if (perturbation.present && perturbation.direction == Direction::Sigma2)
        v += perturbation.time.value(t) * perturbation.spatial.value(x);
    return v;
}

double CalliasModel::sigma2_part_dx(double x, double t) const
{
    if (perturbation.present && perturbation.direction == Direction::Sigma2)
        return perturbation.time.value(t) * perturbation.spatial.derivative(x);
    return 0.0;
}

double CalliasModel::gauge_value(double t, double x) const
{
    return gauge.present ? gauge.time.value(t) * gauge.spatial.value(x) : 0.0;
}

double CalliasModel::gauge_rate(double t, double x) const
{
    return gauge.present ? gauge.time.derivative(t) * gauge.spatial.value(x) : 0.0;
}

CalliasModel parse_model(const json& j)
{
    StrictObject o(j, "model");
    CalliasModel m;
    m.name = o.string_or("name", "");
    m.collar_delta = o.number_or("collar_delta", 0.1);
    if (!(m.collar_delta > 0.0 && m.collar_delta < 0.5))
        fail(ErrorKind::Config, "schema: 'model.collar_delta' must lie in (0, 1/2)");
    m.lapse = o.number_or("lapse", 1.0);
    m.metric = o.string_or("metric", "flat");

    {
        StrictObject d(o.at("domain"), "model.domain");
        std::string kind = d.string("kind");
        if (kind == "circle") {
            m.domain = SpatialDomain::circle(d.number_or("circumference", 2.0 * kPi));
        } else if (kind == "line") {
            m.domain = SpatialDomain::line(d.number("half_width"));
        } else {
            fail(ErrorKind::Config, "schema: unknown domain kind '" + kind + "'");
        }
        if (!(m.domain.size > 0.0))
            fail(ErrorKind::Config, "schema: domain size must be positive");
        d.finish();
    }
    const bool circle = m.domain.is_circle();

    Direction dir = Direction::Sigma2;
    if (o.has("perturbation")) {
        StrictObject p(o.at("perturbation"), "model.perturbation");
        std::string ds = p.string_or("direction", "sigma2");
        if (ds == "sigma2")
            dir = Direction::Sigma2;
        else if (ds == "sigma3")
            dir = Direction::Sigma3;
        else
            fail(ErrorKind::Config, "schema: perturbation direction must be 'sigma2' or 'sigma3'");
        m.perturbation.present = true;
        m.perturbation.direction = dir;
        m.perturbation.spatial = parse_spatial(p.at("spatial"), "model.perturbation.spatial");
        m.perturbation.time = parse_time(p.at("time"), "model.perturbation.time", m.collar_delta);
        double natural = m.perturbation.spatial.support_radius();
        m.perturbation.support_radius = p.number_or("support_radius", natural);
        p.finish();
        if (circle)
            fail(ErrorKind::Config, "schema: circle models take a 'gauge' family, not a 'perturbation'");
    }

    m.clifford = CliffordModule::canonical(circle ? 1 : 2, dir);
    if (o.has("clifford")) {
        StrictObject c(o.at("clifford"), "model.clifford");
        if (c.has("gamma_space"))
            m.clifford.gamma_space = parse_matrix(c.at("gamma_space"), "model.clifford.gamma_space");
        if (c.has("beta"))
            m.clifford.beta = parse_matrix(c.at("beta"), "model.clifford.beta");
        if (c.has("phi_matrix"))
            m.clifford.phi_matrix = parse_matrix(c.at("phi_matrix"), "model.clifford.phi_matrix");
        m.clifford.dim = static_cast<int>(m.clifford.gamma_space.rows());
        c.finish();
    }

    if (o.has("potential")) {
        m.potential = parse_spatial(o.at("potential"), "model.potential");
        if (circle && m.potential.kind != SpatialProfile::Kind::Zero)
            fail(ErrorKind::Config, "schema: circle models carry no Callias potential");
    } else if (!circle) {
        m.potential = SpatialProfile::linear(1.0);
    }
    m.mass = o.number_or("mass", 0.0);
    if (circle && m.mass != 0.0)
        fail(ErrorKind::Config, "schema: 'model.mass' applies to line models only");

    if (o.has("gauge")) {
        if (!circle)
            fail(ErrorKind::Config, "schema: 'model.gauge' applies to circle models only");
        StrictObject g(o.at("gauge"), "model.gauge");
        m.gauge.present = true;
        if (g.has("spatial"))
            m.gauge.spatial = parse_spatial(g.at("spatial"), "model.gauge.spatial");
        m.gauge.time = parse_time(g.at("time"), "model.gauge.time", m.collar_delta);
        g.finish();
    }
    o.finish();
    return m;
}

void validate_model(const CalliasModel& m)
{
    if (m.metric != "flat")
        fail(ErrorKind::AssumptionViolation, "A1: spatial metric '" + m.metric + "' is not the static flat metric");
    if (m.lapse != 1.0)
        fail(ErrorKind::AssumptionViolation, "A2: lapse must be identically 1");
    check_clifford(m);

    if (!m.domain.is_circle() && m.perturbation.present) {
        const Perturbation& p = m.perturbation;
        if (!p.spatial.compact())
            fail(ErrorKind::AssumptionViolation, "A4: perturbation profile '" + p.spatial.kind_name() +
                                                     "' is not compactly supported, so Phi_t varies in t at infinity");
        std::ostringstream os;
        if (p.spatial.support_radius() > p.support_radius) {
            os << "perturbation support radius " << p.spatial.support_radius() << " exceeds declared r_K = "
               << p.support_radius;
            fail(ErrorKind::SupportViolation, os.str());
        }
        if (m.domain.size < p.support_radius + 4.0) {
            os << "half_width " << m.domain.size << " must exceed r_K = " << p.support_radius << " by at least 4";
            fail(ErrorKind::SupportViolation, os.str());
        }
    }
    if (m.domain.is_circle() && m.gauge.present && m.gauge.spatial.kind == SpatialProfile::Kind::Gaussian)
        fail(ErrorKind::Config, "schema: gauge profile must be periodic (constant or bump)");
    check_collar(m);

    if (!m.domain.is_circle()) {
        if (!m.clifford.is_canonical(m.perturbation.direction))
            fail(ErrorKind::Config, "line models are discretized only for the canonical Clifford module");
        try {
            essential_support(m, 0.0, 0.0);
        } catch (const Error& e) {
            fail(ErrorKind::AssumptionViolation, std::string("A5: A_0 is not strongly Callias (") + e.what() + ")");
        }
    } else if (!m.clifford.is_canonical(Direction::Sigma2)) {
        fail(ErrorKind::Config, "circle models are discretized only for the canonical Clifford module");
    }
}

CalliasModel build_model(const json& j)
{
    CalliasModel m = parse_model(j);
    validate_model(m);
    return m;
}

double callias_margin(const CalliasModel& m, double x, double t)
{
    double a = m.sigma3_part(x, t), b = m.sigma2_part(x, t);
    double da = m.sigma3_part_dx(x, t), db = m.sigma2_part_dx(x, t);
    return a * a + b * b - std::sqrt(da * da + db * db);
}

EssentialSupport essential_support(const CalliasModel& m, double R, double t)
{
    EssentialSupport out;
    out.R = R;
    if (m.domain.is_circle()) {
        out.whole_domain = true;
        out.x_R = m.domain.size / 2.0;
        out.warning = "CompactDomain: the Callias condition is vacuous on a circle; whole domain returned";
        return out;
    }
    if (!m.potential.unbounded())
        fail(ErrorKind::NotCallias, "potential '" + m.potential.kind_name() +
                                        "' is bounded, so Phi^2 cannot exceed every R outside a compact set");
    const double L = m.domain.size;
    auto bad = [&](double x) { return callias_margin(m, x, t) < R; };
    if (bad(L) || bad(-L)) {
        std::ostringstream os;
        os << "no interval inside [-" << L << ", " << L << "] satisfies the Callias bound with R = " << R;
        fail(ErrorKind::NotCallias, os.str());
    }
    const int samples = 20000;
    const double step = L / samples;
    double xr = 0.0;
    for (int sgn : {1, -1}) {
        // scan inward from the edge for the first failing sample, then bisect the crossing
        for (int i = samples - 1; i >= 0; --i) {
            double x = sgn * i * step;
            if (bad(x)) {
                double lo = i * step, hi = (i + 1) * step;
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (bad(sgn * mid))
                        lo = mid;
                    else
                        hi = mid;
                }
                xr = std::max(xr, hi);
                break;
            }
        }
    }
    out.x_R = xr;
    return out;
}

json model_summary(const CalliasModel& m)
{
    json j;
    j["name"] = m.name;
    j["domain"] = m.domain.is_circle() ? "circle" : "line";
    j["domain_size"] = m.domain.size;
    j["clifford_dim"] = m.clifford.dim;
    j["collar_delta"] = m.collar_delta;
    if (!m.domain.is_circle()) {
        j["potential"] = m.potential.kind_name();
        j["mass"] = m.mass;
        if (m.perturbation.present) {
            j["perturbation"] = {
                {"direction", m.perturbation.direction == Direction::Sigma2 ? "sigma2" : "sigma3"},
                {"profile", m.perturbation.spatial.kind_name()},
                {"height", m.perturbation.spatial.amplitude},
                {"center", m.perturbation.spatial.center},
                {"width", m.perturbation.spatial.width},
                {"support_radius", m.perturbation.support_radius},
                {"from", m.perturbation.time.from},
                {"to", m.perturbation.time.to},
            };
        }
    } else if (m.gauge.present) {
        j["gauge"] = {{"profile", m.gauge.spatial.kind_name()},
                      {"from", m.gauge.time.value(0.0)},
                      {"to", m.gauge.time.value(1.0)}};
    }
    return j;
}

}  // namespace callias
