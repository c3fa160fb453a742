#include "callias/wickaps.hpp"

#include <sstream>

#include "callias/error.hpp"

namespace callias {

namespace {

const cd I(0.0, 1.0);

WickIndex index_of(const cmat& m, const WickOptions& opts)
{
    if (m.cols() > opts.max_columns)
        fail(ErrorKind::SystemTooLarge, "Wick system has " + std::to_string(m.cols()) + " columns, limit is " +
                                            std::to_string(opts.max_columns));
    WickIndex w;
    w.rows = static_cast<int>(m.rows());
    w.cols = static_cast<int>(m.cols());
    rvec s = singular_values(m);
    w.sv_tol = s.size() ? opts.sv_tol_rel * s(0) : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > w.sv_tol) {
            ++w.rank;
            w.smallest_kept = s(i);
        } else {
            w.largest_dropped = std::max(w.largest_dropped, s(i));
        }
    }
    w.dim_ker = w.cols - w.rank;
    w.dim_coker = w.rows - w.rank;
    w.ind = w.dim_ker - w.dim_coker;
    if (w.rank > 0 && w.smallest_kept <= 10.0 * w.sv_tol) {
        std::ostringstream os;
        os << "SingularValueGapWarning: sigma " << w.smallest_kept << " within 10x of sv_tol " << w.sv_tol;
        w.warning = os.str();
    }
    return w;
}

cmat gather(const cmat& v, const std::vector<int>& idx)
{
    cmat out(v.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = v.col(idx[k]);
    return out;
}

void check_split(const WickSystem& sys, const BoundarySplitting& split)
{
    if (split.spec0.dim != sys.dim)
        fail(ErrorKind::DimensionMismatch, "boundary splitting does not match the Wick system dimension");
}

}  // namespace

WickForm parse_wick_form(const std::string& s)
{
    if (s == "lorentzian")
        return WickForm::Lorentzian;
    if (s == "euclidean")
        return WickForm::Euclidean;
    fail(ErrorKind::Config, "schema: unknown wick_form '" + s + "'");
}

const char* wick_form_name(WickForm f)
{
    return f == WickForm::Lorentzian ? "lorentzian" : "euclidean";
}

cmat WickSystem::reduced(const cmat& v0, const cmat& vN) const
{
    const int d = dim;
    const int n = time_steps;
    const Eigen::Index c0 = v0.cols(), cN = vN.cols();
    const Eigen::Index cols = c0 + static_cast<Eigen::Index>(n - 1) * d + cN;
    cmat m = cmat::Zero(rows(), cols);
    auto col_of = [&](int k) -> Eigen::Index { return c0 + static_cast<Eigen::Index>(k - 1) * d; };
    for (int k = 0; k < n; ++k) {
        const Eigen::Index r = static_cast<Eigen::Index>(k) * d;
        if (k == 0)
            m.block(r, 0, d, c0) = lower[0] * v0;
        else
            m.block(r, col_of(k), d, d) = lower[static_cast<size_t>(k)];
        if (k + 1 == n)
            m.block(r, cols - cN, d, cN) = upper[static_cast<size_t>(k)] * vN;
        else
            m.block(r, col_of(k + 1), d, d) = upper[static_cast<size_t>(k)];
    }
    return m;
}

WickSystem assemble_wick(const CalliasModel& model, const SpatialGrid& grid, int time_steps, WickForm form)
{
    if (time_steps < kMinWickSteps)
        fail(ErrorKind::StepCountTooLow, "wick_time_steps " + std::to_string(time_steps) +
                                             " is below the minimum of " + std::to_string(kMinWickSteps));
    WickSystem s;
    s.time_steps = time_steps;
    s.dim = grid.dim();
    s.form = form;
    const double dt = 1.0 / time_steps;
    const cd coupling = form == WickForm::Lorentzian ? -I * (0.5 * dt) : cd(0.5 * dt);
    const cmat id = cmat::Identity(s.dim, s.dim);
    for (int k = 0; k < time_steps; ++k) {
        cmat a = assemble_operator(model, grid, (k + 0.5) * dt).dense();
        s.lower.push_back(-id + coupling * a);
        s.upper.push_back(id + coupling * a);
    }
    return s;
}

WickIndex unconstrained_index(const WickSystem& sys, const WickOptions& opts)
{
    cmat id = cmat::Identity(sys.dim, sys.dim);
    return index_of(sys.reduced(id, id), opts);
}

WickIndex aps_index(const WickSystem& sys, const BoundarySplitting& split, const WickOptions& opts)
{
    check_split(sys, split);
    cmat v0 = gather(split.spec0.eigenvectors, split.neg0);
    cmat vN = gather(split.spec1.eigenvectors, split.pos1);
    return index_of(sys.reduced(v0, vN), opts);
}

WickIndex anti_aps_index(const WickSystem& sys, const BoundarySplitting& split, const WickOptions& opts)
{
    check_split(sys, split);
    cmat v0 = gather(split.spec0.eigenvectors, split.pos0);
    cmat vN = gather(split.spec1.eigenvectors, split.neg1);
    return index_of(sys.reduced(v0, vN), opts);
}

}  // namespace callias
