#include "callias/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "callias/error.hpp"
#include "callias/evolve.hpp"
#include "callias/io.hpp"
#include "callias/linalg.hpp"
#include "callias/parallel.hpp"
#include "callias/qblocks.hpp"
#include "callias/spectral.hpp"
#include "callias/wickaps.hpp"

namespace fs = std::filesystem;

namespace callias {

const char* const kArtifactVersion = "0.1.0";

namespace {

json num(double v)
{
    if (!std::isfinite(v))
        return nullptr;
    return v;
}

json vec_json(const rvec& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(num(v(i)));
    return a;
}

json header(const std::string& kind, const ExperimentConfig& cfg, const std::string& hash)
{
    return json{{"schema", kReportSchema}, {"kind", kind}, {"name", cfg.name}, {"config_hash", hash},
                {"seed", cfg.seed}};
}

json grid_json(const SpatialGrid& g)
{
    return json{{"kind", g.is_circle() ? "fourier_circle" : "staggered_line"},
                {"resolution", g.resolution},
                {"dim", g.dim()},
                {"extent", g.extent},
                {"h", num(g.h)}};
}

json block_json(const BlockIndex& b)
{
    json j{{"rows", b.rows},   {"cols", b.cols},     {"ind", b.ind},
           {"rank", b.rank},   {"dim_ker", b.dim_ker}, {"dim_coker", b.dim_coker},
           {"sv_tol", b.sv_tol}};
    j["sigma_max"] = b.singular_values.size() ? num(b.singular_values(0)) : json(nullptr);
    j["sigma_min"] = b.singular_values.size() ? num(b.singular_values(b.singular_values.size() - 1)) : json(nullptr);
    j["warning"] = b.warning.empty() ? json(nullptr) : json(b.warning);
    return j;
}

json eta_json(const EtaResult& e)
{
    return json{{"value", num(e.value)},         {"error", num(e.error)},   {"method", e.method},
                {"window", num(e.window)},       {"windows_used", e.windows_used},
                {"t_min", num(e.t_min)},         {"dim", e.dim},            {"kernel_excluded", e.kernel_excluded}};
}

json wick_json(const WickIndex& w)
{
    return json{{"ind", w.ind},
                {"dim_ker", w.dim_ker},
                {"dim_coker", w.dim_coker},
                {"rows", w.rows},
                {"cols", w.cols},
                {"rank", w.rank},
                {"sv_tol", num(w.sv_tol)},
                {"smallest_kept", num(w.smallest_kept)},
                {"largest_dropped", num(w.largest_dropped)},
                {"warning", w.warning.empty() ? json(nullptr) : json(w.warning)}};
}

json report_json(const IndexReport& r)
{
    json j{{"ind_Qmm", r.ind_Qmm},
           {"ind_Qpp", r.ind_Qpp},
           {"sf", r.sf},
           {"dim_ker_A0", r.dim_ker_A0},
           {"dim_ker_A1", r.dim_ker_A1},
           {"eta_rel", num(r.eta_rel)},
           {"as_integral", num(r.as_integral)},
           {"as_marker", r.as_marker.empty() ? json(nullptr) : json(r.as_marker)},
           {"eta_formula_rhs", num(r.eta_rhs)},
           {"wick_aps_index", r.wick_aps_index ? json(*r.wick_aps_index) : json(nullptr)},
           {"wick_anti_aps_index", r.wick_anti_aps_index ? json(*r.wick_anti_aps_index) : json(nullptr)},
           {"incomplete", r.incomplete},
           {"failure", r.failure.empty() ? json(nullptr) : json(r.failure)}};
    json res = json::object();
    for (const auto& [k, v] : r.integer_residuals)
        res[k] = v;
    for (const auto& [k, v] : r.real_residuals)
        res[k] = num(v);
    j["residuals"] = res;
    j["violations"] = r.violations();
    return j;
}

// Lazily computed quantities shared between tasks.
class Pipeline {
public:
    Pipeline(const ExperimentConfig& cfg, int workers)
        : cfg_(cfg), workers_(workers), grid_(make_grid(cfg.model.domain, cfg.numerics.resolution))
    {
        hash_ = config_hash(cfg.raw);
    }

    const SpatialGrid& grid() const { return grid_; }
    const std::string& hash() const { return hash_; }
    const ExperimentConfig& cfg() const { return cfg_; }

    const SpectralData& spec(int end)
    {
        auto& slot = end == 0 ? spec0_ : spec1_;
        if (!slot) {
            HermitianOperator op = assemble_operator(cfg_.model, grid_, end == 0 ? 0.0 : 1.0);
            slot = std::make_unique<SpectralData>(eigendecompose(op, {cfg_.numerics.zero_tol_rel, true}));
        }
        return *slot;
    }

    const UnitaryPropagator& propagator()
    {
        if (!q_) {
            EvolveOptions eo;
            eo.richardson_tol = cfg_.numerics.richardson_tol;
            q_ = std::make_unique<UnitaryPropagator>(
                propagate(cfg_.model, grid_, 0.0, 1.0, cfg_.numerics.time_steps, eo));
            if (q_->unitarity_defect > cfg_.numerics.unitarity_tol) {
                std::ostringstream os;
                os << "unitarity defect " << q_->unitarity_defect << " exceeds unitarity_tol "
                   << cfg_.numerics.unitarity_tol;
                fail(ErrorKind::InvariantViolation, os.str());
            }
        }
        return *q_;
    }

    const BoundarySplitting& split()
    {
        if (!split_)
            split_ = std::make_unique<BoundarySplitting>(split_boundary_spaces(spec(0), spec(1)));
        return *split_;
    }

    const QBlocks& blocks()
    {
        if (!blocks_) {
            blocks_ = std::make_unique<QBlocks>(q_blocks(propagator().matrix, split()));
            if (blocks_->reassembly_defect > cfg_.numerics.unitarity_tol) {
                std::ostringstream os;
                os << "block reassembly defect " << blocks_->reassembly_defect << " exceeds unitarity_tol";
                fail(ErrorKind::InvariantViolation, os.str());
            }
            qmm_ = block_index(blocks_->Qmm, cfg_.numerics.sv_tol_rel);
            qpp_ = block_index(blocks_->Qpp, cfg_.numerics.sv_tol_rel);
        }
        return *blocks_;
    }
    const BlockIndex& qmm()
    {
        blocks();
        return qmm_;
    }
    const BlockIndex& qpp()
    {
        blocks();
        return qpp_;
    }

    FlowOptions flow_options() const { return {cfg_.numerics.zero_tol_rel, 10, workers_}; }

    const SpectralFlowResult& flow()
    {
        if (!flow_)
            flow_ = std::make_unique<SpectralFlowResult>(
                spectral_flow(cfg_.model, grid_, cfg_.numerics.flow_steps, flow_options()));
        return *flow_;
    }

    EtaOptions eta_options() const
    {
        EtaOptions e;
        e.method = cfg_.numerics.eta_method;
        e.window = cfg_.numerics.eta_window;
        e.heat_t_min = cfg_.numerics.heat_t_min;
        return e;
    }

    const EtaResult& eta_rel()
    {
        if (!eta_rel_)
            eta_rel_ = std::make_unique<EtaResult>(relative_eta(spec(0), spec(1), eta_options()));
        return *eta_rel_;
    }

    bool endpoints_kernel_free() { return kernel_dim(spec(0)) == 0 && kernel_dim(spec(1)) == 0; }

    const SfEtaCheck* sf_eta()
    {
        if (!sf_eta_done_) {
            sf_eta_done_ = true;
            if (endpoints_kernel_free())
                sf_eta_ = std::make_unique<SfEtaCheck>(sf_eta_relation_check(
                    cfg_.model, grid_, cfg_.numerics.sf_eta_samples, eta_options(), flow_options()));
        }
        return sf_eta_.get();
    }

    LocalTerm local_term() const { return as_integral(cfg_.model, cfg_.numerics.flow_steps, 256); }

    const std::pair<WickIndex, WickIndex>& wick()
    {
        if (!wick_) {
            WickSystem sys = assemble_wick(cfg_.model, grid_, cfg_.numerics.wick_time_steps, cfg_.numerics.wick_form);
            WickOptions wo;
            wo.sv_tol_rel = cfg_.numerics.sv_tol_rel;
            const BoundarySplitting& s = split();
            WickIndex aps, anti;
            // the two reduced systems are independent
            parallel_for(2, workers_, [&](int i) {
                if (i == 0)
                    aps = aps_index(sys, s, wo);
                else
                    anti = anti_aps_index(sys, s, wo);
            });
            wick_ = std::make_unique<std::pair<WickIndex, WickIndex>>(aps, anti);
        }
        return *wick_;
    }

    int workers() const { return workers_; }

private:
    const ExperimentConfig& cfg_;
    int workers_;
    SpatialGrid grid_;
    std::string hash_;
    std::unique_ptr<SpectralData> spec0_, spec1_;
    std::unique_ptr<UnitaryPropagator> q_;
    std::unique_ptr<BoundarySplitting> split_;
    std::unique_ptr<QBlocks> blocks_;
    BlockIndex qmm_, qpp_;
    std::unique_ptr<SpectralFlowResult> flow_;
    std::unique_ptr<EtaResult> eta_rel_;
    std::unique_ptr<SfEtaCheck> sf_eta_;
    bool sf_eta_done_ = false;
    std::unique_ptr<std::pair<WickIndex, WickIndex>> wick_;
};

class TaskRunner {
public:
    TaskRunner(const ExperimentConfig& cfg, const std::string& dir, int workers)
        : cfg_(cfg), dir_(dir), p_(cfg, workers)
    {
    }

    void write_json(const std::string& file, const json& j) { write_file((fs::path(dir_) / file).string(), dump_json(j)); }
    void write_csv(const std::string& file, const CsvTable& t) { write_file((fs::path(dir_) / file).string(), t.str()); }

    void spectrum()
    {
        json j = header("spectrum", cfg_, p_.hash());
        j["model"] = model_summary(cfg_.model);
        j["grid"] = grid_json(p_.grid());
        CsvTable csv({"t", "index", "lambda"});
        json ends = json::array();
        for (int e = 0; e < 2; ++e) {
            const SpectralData& s = p_.spec(e);
            HermitianOperator op = assemble_operator(cfg_.model, p_.grid(), s.t);
            double min_abs = s.dim ? s.eigenvalues.cwiseAbs().minCoeff() : 0.0;
            ends.push_back(json{{"t", s.t},
                                {"dim", s.dim},
                                {"zero_tol", s.zero_tol},
                                {"op_norm", s.op_norm},
                                {"reliable_max", s.reliable_max},
                                {"kernel_dim", kernel_dim(s)},
                                {"n_negative", interval_indices(s, Interval::Negative).size()},
                                {"n_positive", interval_indices(s, Interval::Positive).size()},
                                {"min_abs_eigenvalue", min_abs},
                                {"orthonormality_defect", orthonormality_defect(s)},
                                {"eigen_residual", eigen_residual(op, s)},
                                {"hermiticity_defect", op.hermiticity_defect()}});
            for (int i = 0; i < s.dim; ++i)
                csv.add_row({fmt_double(s.t), std::to_string(i), fmt_double(s.eigenvalues(i))});
        }
        j["endpoints"] = ends;
        EssentialSupport es = essential_support(cfg_.model, cfg_.numerics.window_R, 0.0);
        j["essential_support"] = json{{"R", es.R},
                                      {"x_R", num(es.x_R)},
                                      {"whole_domain", es.whole_domain},
                                      {"warning", es.warning.empty() ? json(nullptr) : json(es.warning)}};
        write_json("spectrum.json", j);
        write_csv("eigenvalues.csv", csv);
    }

    void evolve()
    {
        const UnitaryPropagator& q = p_.propagator();
        json j = header("evolve", cfg_, p_.hash());
        j["grid"] = grid_json(p_.grid());
        j["propagator"] = json{{"t0", q.t0},
                               {"t1", q.t1},
                               {"steps", q.steps},
                               {"static_family", q.static_family},
                               {"unitarity_defect", q.unitarity_defect},
                               {"unitarity_tol", cfg_.numerics.unitarity_tol},
                               {"richardson_change", q.richardson_change},
                               {"richardson_tol", cfg_.numerics.richardson_tol}};

        const WavePacket& wp = cfg_.packet;
        cvec u0 = wave_packet(p_.grid(), wp);
        Trajectory tr = solve_cauchy(cfg_.model, p_.grid(), wp.t0, u0, {}, cfg_.numerics.time_steps);
        double drift = 0.0;
        for (Eigen::Index k = 0; k < tr.states.cols(); ++k)
            drift = std::max(drift, std::abs(tr.states.col(k).norm() - 1.0));
        j["cauchy"] = json{{"t0", wp.t0},
                           {"steps", tr.times.size() - 1},
                           {"max_cn_residual", tr.max_residual},
                           {"max_norm_drift", drift}};
        write_json("evolve.json", j);

        CsvTable csv({"t", "index", "coord", "re", "im"});
        const int total = static_cast<int>(tr.times.size()) - 1;
        const int stride = std::max(1, total / wp.trajectory_samples);
        for (int k = 0; k <= total; k += stride) {
            for (int i = 0; i < p_.grid().dim(); ++i) {
                double coord = p_.grid().is_circle() ? p_.grid().mode(i) : p_.grid().position(i);
                cd v = tr.states(i, k);
                csv.add_row({fmt_double(tr.times[static_cast<size_t>(k)]), std::to_string(i), fmt_double(coord),
                             fmt_double(v.real()), fmt_double(v.imag())});
            }
        }
        write_csv("trajectory.csv", csv);

        json pr = header("propagation", cfg_, p_.hash());
        auto one = [&](const SpatialGrid& g) {
            PropagationReport r = check_propagation(cfg_.model, g, wave_packet(g, wp), wp.t0, wp.t1,
                                                    cfg_.numerics.propagation_threshold, wp.samples);
            json e{{"resolution", g.resolution},
                   {"max_excess", num(r.max_excess)},
                   {"marker", r.empty_support ? json("empty support") : json(nullptr)},
                   {"initial_radius", r.initial_radius}};
            return std::make_pair(e, r);
        };
        auto [main_entry, main_rep] = one(p_.grid());
        pr["threshold"] = cfg_.numerics.propagation_threshold;
        pr["t0"] = wp.t0;
        pr["t1"] = wp.t1;
        pr["result"] = main_entry;
        json series = json::array();
        for (size_t k = 0; k < main_rep.times.size(); ++k)
            series.push_back(json{{"t", main_rep.times[k]}, {"excess", num(main_rep.excess[k])}});
        pr["series"] = series;
        if (!cfg_.numerics.ladder.empty()) {
            std::vector<json> rows(cfg_.numerics.ladder.size());
            std::vector<double> ex(cfg_.numerics.ladder.size());
            parallel_for(static_cast<int>(rows.size()), p_.workers(), [&](int i) {
                SpatialGrid g = make_grid(cfg_.model.domain, cfg_.numerics.ladder[static_cast<size_t>(i)]);
                auto [e, r] = one(g);
                rows[static_cast<size_t>(i)] = e;
                ex[static_cast<size_t>(i)] = r.max_excess;
            });
            bool mono = true;
            for (size_t i = 1; i < ex.size(); ++i)
                mono = mono && ex[i] < ex[i - 1];
            pr["ladder"] = rows;
            pr["ladder_strictly_decreasing"] = mono;
        }
        write_json("propagation.json", pr);
    }

    void qblocks()
    {
        const QBlocks& b = p_.blocks();
        const BoundarySplitting& s = p_.split();
        json j = header("qblocks", cfg_, p_.hash());
        j["grid"] = grid_json(p_.grid());
        j["split"] = json{{"n_pos0", s.n_pos0()}, {"n_neg0", s.n_neg0()}, {"n_pos1", s.n_pos1()},
                          {"n_neg1", s.n_neg1()}, {"dim", s.spec0.dim}};
        j["reassembly_defect"] = b.reassembly_defect;
        j["unitarity_defect"] = p_.propagator().unitarity_defect;
        j["blocks"] = json{{"Qpp", block_json(p_.qpp())},
                           {"Qmm", block_json(p_.qmm())},
                           {"Qpm", block_json(block_index(b.Qpm, cfg_.numerics.sv_tol_rel))},
                           {"Qmp", block_json(block_index(b.Qmp, cfg_.numerics.sv_tol_rel))}};
        KernelPairing kp = kernel_pairing_check(b, cfg_.numerics.sv_tol_rel);
        j["kernel_pairing"] = json{{"dim_ker_Qmm", kp.dim_ker_mm},
                                   {"dim_ker_Qpp", kp.dim_ker_pp},
                                   {"dim_coker_Qpp", kp.dim_coker_pp},
                                   {"dim_coker_Qmm", kp.dim_coker_mm},
                                   {"dims_match", kp.dims_match},
                                   {"iso_defect", kp.iso_defect},
                                   {"pairing_singular_values", vec_json(kp.pairing_sv)},
                                   {"reverse_singular_values", vec_json(kp.reverse_sv)}};
        if (!kp.dims_match)
            fail(ErrorKind::InvariantViolation, "kernel pairing dimensions differ for a unitary Q");
        KernelRegularity kr = kernel_regularity_check(b, s, cfg_.numerics.sv_tol_rel);
        j["kernel_regularity"] = kr.empty ? json{{"marker", "EmptyKernel"}}
                                          : json{{"exponents", kr.exponents}, {"min_exponent", num(kr.min_exponent)}};
        if (cfg_.numerics.ladder.size() >= 3) {
            DecayOptions d;
            d.s = cfg_.numerics.sobolev_s;
            d.time_steps = cfg_.numerics.time_steps;
            d.zero_tol_rel = cfg_.numerics.zero_tol_rel;
            d.window_R = cfg_.numerics.window_R;
            d.richardson_tol = cfg_.numerics.richardson_tol;
            d.workers = p_.workers();
            std::vector<DecayRow> rows = offdiag_decay(cfg_.model, cfg_.numerics.ladder, d);
            CsvTable csv({"resolution", "k", "sigma_k", "rho"});
            json jr = json::array();
            for (const DecayRow& r : rows) {
                for (size_t i = 0; i < r.k.size(); ++i)
                    csv.add_row({std::to_string(r.resolution), std::to_string(r.k[i]), fmt_double(r.sigma[i]),
                                 fmt_double(r.rho)});
                jr.push_back(json{{"resolution", r.resolution}, {"k", r.k}, {"sigma", r.sigma}, {"rho", num(r.rho)}});
            }
            j["decay"] = jr;
            j["sobolev_s"] = cfg_.numerics.sobolev_s;
            write_csv("decay_table.csv", csv);
        }
        write_json("qblocks.json", j);
    }

    void flow()
    {
        const SpectralFlowResult& f = p_.flow();
        json j = header("flow", cfg_, p_.hash());
        j["grid"] = grid_json(p_.grid());
        j["net"] = f.net;
        j["up"] = f.up;
        j["down"] = f.down;
        j["base_steps"] = cfg_.numerics.flow_steps;
        j["samples"] = f.times.size();
        j["refinements"] = f.refinements;
        j["max_motion"] = f.max_motion;
        json cr = json::array();
        for (const Crossing& c : f.crossings)
            cr.push_back(json{{"t", c.t}, {"direction", c.direction}, {"track", c.track}});
        j["crossings"] = cr;
        write_json("flow.json", j);
        CsvTable csv({"s", "track", "lambda"});
        for (size_t k = 0; k < f.times.size(); ++k)
            for (Eigen::Index i = 0; i < f.tracks.rows(); ++i)
                csv.add_row({fmt_double(f.times[k]), std::to_string(i),
                             fmt_double(f.tracks(i, static_cast<Eigen::Index>(k)))});
        write_csv("tracks.csv", csv);
    }

    void eta()
    {
        json j = header("eta", cfg_, p_.hash());
        EtaOptions eo = p_.eta_options();
        j["method"] = eta_method_name(eo.method);
        j["eta_A0"] = eta_json(eta_invariant(p_.spec(0), p_.grid(), eo));
        j["eta_A1"] = eta_json(eta_invariant(p_.spec(1), p_.grid(), eo));
        j["relative"] = eta_json(p_.eta_rel());
        LocalTerm lt = p_.local_term();
        j["as_integral"] = json{{"value", lt.value}, {"marker", lt.marker.empty() ? json(nullptr) : json(lt.marker)}};
        const SfEtaCheck* c = p_.sf_eta();
        if (c) {
            j["sf_eta"] = json{{"sf", c->sf},
                               {"lhs", c->lhs},
                               {"rhs", num(c->rhs)},
                               {"residual", num(c->residual)},
                               {"smooth_integral", num(c->smooth_integral)},
                               {"jump_total", c->jump_total},
                               {"samples", c->s.size() - 1},
                               {"s", c->s},
                               {"eta_bar", c->eta_bar}};
        } else {
            j["sf_eta"] = json{{"marker", "skipped: endpoint kernel present"}};
        }
        write_json("eta.json", j);
    }

    void wick()
    {
        const auto& w = p_.wick();
        json j = header("wick", cfg_, p_.hash());
        j["grid"] = grid_json(p_.grid());
        j["time_steps"] = cfg_.numerics.wick_time_steps;
        j["form"] = wick_form_name(cfg_.numerics.wick_form);
        j["aps"] = wick_json(w.first);
        j["anti_aps"] = wick_json(w.second);
        write_json("wick.json", j);
    }

    IndexReport index()
    {
        IndexReport r;
        r.ind_Qmm = p_.qmm().ind;
        r.ind_Qpp = p_.qpp().ind;
        r.sf = p_.flow().net;
        r.dim_ker_A0 = kernel_dim(p_.spec(0));
        r.dim_ker_A1 = kernel_dim(p_.spec(1));
        r.eta_rel = p_.eta_rel().value;
        LocalTerm lt = p_.local_term();
        r.as_integral = lt.value;
        r.as_marker = lt.marker;
        r.eta_rhs = r.as_integral + (r.eta_rel - r.dim_ker_A0 - r.dim_ker_A1) / 2.0;
        if (cfg_.has_task("wick")) {
            r.wick_aps_index = p_.wick().first.ind;
            r.wick_anti_aps_index = p_.wick().second.ind;
        }
        if (cfg_.has_task("eta")) {
            if (const SfEtaCheck* c = p_.sf_eta())
                r.sf_eta_residual = c->residual;
        }
        r.evaluate();
        write_index(r);
        return r;
    }

    void write_index(const IndexReport& r)
    {
        json j = header("index_report", cfg_, p_.hash());
        j["report"] = report_json(r);
        j["resolution"] = cfg_.numerics.resolution;
        j["grid"] = grid_json(p_.grid());
        j["numerics"] = cfg_.raw.contains("numerics") ? cfg_.raw["numerics"] : json::object();
        j["effective_numerics"] = json{{"time_steps", cfg_.numerics.time_steps},
                                       {"flow_steps", cfg_.numerics.flow_steps},
                                       {"wick_time_steps", cfg_.numerics.wick_time_steps},
                                       {"zero_tol_rel", cfg_.numerics.zero_tol_rel},
                                       {"sv_tol_rel", cfg_.numerics.sv_tol_rel},
                                       {"richardson_tol", cfg_.numerics.richardson_tol},
                                       {"heat_t_min", cfg_.numerics.heat_t_min},
                                       {"eta_method", eta_method_name(cfg_.numerics.eta_method)}};
        write_json("index_report.json", j);
    }

    const ExperimentConfig& cfg_;
    std::string dir_;
    Pipeline p_;
};

std::string describe(const Error& e)
{
    return std::string(kind_name(e.kind())) + ": " + e.what();
}

}  // namespace

cvec wave_packet(const SpatialGrid& grid, const WavePacket& p)
{
    const int d = grid.dim();
    cvec u = cvec::Zero(d);
    if (grid.is_circle()) {
        for (int i = 0; i < d; ++i) {
            double k = grid.wavenumber(i);
            u(i) = std::exp(-0.5 * k * k * p.width * p.width) * std::polar(1.0, -k * p.center);
        }
    } else {
        const bool plus = p.component == "plus";
        for (int i = 0; i < d; ++i) {
            if (grid.on_node(i) != plus)
                continue;
            double y = (grid.position(i) - p.center) / p.width;
            u(i) = std::exp(-0.5 * y * y);
        }
    }
    double n = u.norm();
    if (n > 0.0)
        u /= n;
    return u;
}

void write_manifest(const std::string& dir, const json& extra)
{
    json files = json::array();
    std::vector<fs::path> paths;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            paths.push_back(fs::relative(e.path(), dir));
    std::sort(paths.begin(), paths.end());
    for (const fs::path& rel : paths) {
        if (rel == "manifest.json")
            continue;
        std::string full = (fs::path(dir) / rel).string();
        files.push_back(json{{"path", rel.generic_string()},
                             {"sha256", sha256_file(full)},
                             {"bytes", fs::file_size(full)}});
    }
    json m = extra;
    m["schema"] = kReportSchema;
    m["kind"] = "manifest";
    m["artifact_version"] = kArtifactVersion;
    m["files"] = files;
    write_file((fs::path(dir) / "manifest.json").string(), dump_json(m));
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts)
{
    pin_blas_threads();
    RunOutcome out;
    out.out_dir = opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
    fs::create_directories(out.out_dir);
    TaskRunner tr(cfg, out.out_dir, std::max(1, opts.workers));

    static const std::vector<std::string> order = {"spectrum", "evolve", "qblocks", "flow", "eta", "wick", "index", "sweep"};
    json status = json::object();
    json walls = json::object();
    for (const std::string& task : order) {
        if (!cfg.has_task(task))
            continue;
        auto start = std::chrono::steady_clock::now();
        try {
            if (task == "spectrum")
                tr.spectrum();
            else if (task == "evolve")
                tr.evolve();
            else if (task == "qblocks")
                tr.qblocks();
            else if (task == "flow")
                tr.flow();
            else if (task == "eta")
                tr.eta();
            else if (task == "wick")
                tr.wick();
            else if (task == "index")
                out.report = tr.index();
            else if (task == "sweep") {
                RunOptions so;
                so.out_dir = (fs::path(out.out_dir) / "sweep").string();
                so.workers = opts.workers;
                json doc = cfg.raw;
                RunOutcome sw = run_sweep(doc, *cfg.sweep, so);
                if (sw.exit_code != 0)
                    fail(ErrorKind::InvariantViolation, "sweep failed: " + sw.message);
            }
            status[task] = "ok";
        } catch (const Error& e) {
            status[task] = "failed";
            out.exit_code = exit_code(e.kind());
            out.message = describe(e);
        } catch (const std::exception& e) {
            status[task] = "failed";
            out.exit_code = 2;
            out.message = std::string("InternalError: ") + e.what();
        }
        walls[task] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (out.exit_code != 0)
            break;
    }
    if (out.exit_code != 0 && cfg.has_task("index") && !out.report) {
        IndexReport r;
        r.incomplete = true;
        r.failure = out.message;
        try {
            tr.write_index(r);
        } catch (const std::exception&) {
        }
    }
    if (out.exit_code == 0 && out.report) {
        auto v = out.report->violations();
        if (!v.empty()) {
            std::string names;
            for (const auto& n : v)
                names += (names.empty() ? "" : ", ") + n + "=" + std::to_string(out.report->integer_residuals.at(n));
            out.exit_code = exit_code(ErrorKind::IdentityViolation);
            out.message = std::string(kind_name(ErrorKind::IdentityViolation)) + ": " + names;
        }
    }
    json extra{{"config_hash", config_hash(cfg.raw)},
               {"name", cfg.name},
               {"seed", cfg.seed},
               {"task_status", status},
               {"wall_seconds", walls},
               {"exit_code", out.exit_code},
               {"message", out.message.empty() ? json(nullptr) : json(out.message)}};
    write_manifest(out.out_dir, extra);
    return out;
}

RunOutcome run_sweep(const json& doc, const SweepSpec& sweep, const RunOptions& opts)
{
    pin_blas_threads();
    RunOutcome out;
    out.out_dir = opts.out_dir;
    if (sweep.values.empty()) {
        out.exit_code = 1;
        out.message = "Config: empty value list";
        return out;
    }
    // the parameter must address an existing numeric leaf
    {
        json::json_pointer ptr("/" + [&] {
            std::string s = sweep.param;
            std::replace(s.begin(), s.end(), '.', '/');
            return s;
        }());
        if (!doc.contains(ptr) || !doc.at(ptr).is_number()) {
            out.exit_code = 1;
            out.message = "Config: sweep parameter '" + sweep.param + "' does not address a numeric config leaf";
            return out;
        }
    }
    const size_t n = sweep.values.size();
    std::vector<RunOutcome> runs(n);
    parallel_for(static_cast<int>(n), opts.workers, [&](int i) {
        RunOutcome& r = runs[static_cast<size_t>(i)];
        r.out_dir = (fs::path(opts.out_dir) / ("value_" + std::to_string(i))).string();
        try {
            json d = doc;
            set_path(d, sweep.param, sweep.values[static_cast<size_t>(i)]);
            d.erase("sweep");
            json tasks = json::array();
            bool has_index = false;
            for (const json& t : d.at("tasks")) {
                if (t == "sweep")
                    continue;
                has_index = has_index || t == "index";
                tasks.push_back(t);
            }
            if (!has_index)
                tasks.push_back("index");
            d["tasks"] = tasks;
            ExperimentConfig c = parse_config(d);
            RunOptions ro;
            ro.out_dir = r.out_dir;
            ro.workers = 1;
            r = run_experiment(c, ro);
        } catch (const Error& e) {
            r.exit_code = exit_code(e.kind());
            r.message = describe(e);
            fs::create_directories(r.out_dir);
        }
    });

    CsvTable csv({"value", "exit_code", "ind_Qmm", "ind_Qpp", "sf", "k0", "k1", "eta_rel", "eta_formula_rhs",
                  "wick_aps", "wick_anti_aps", "max_abs_integer_residual", "eta_prerounding_residual",
                  "sf_eta_residual", "message"});
    for (size_t i = 0; i < n; ++i) {
        const RunOutcome& r = runs[i];
        std::vector<std::string> row(15);
        row[0] = fmt_double(sweep.values[i]);
        row[1] = std::to_string(r.exit_code);
        if (r.report) {
            const IndexReport& x = *r.report;
            row[2] = std::to_string(x.ind_Qmm);
            row[3] = std::to_string(x.ind_Qpp);
            row[4] = std::to_string(x.sf);
            row[5] = std::to_string(x.dim_ker_A0);
            row[6] = std::to_string(x.dim_ker_A1);
            row[7] = fmt_double(x.eta_rel);
            row[8] = fmt_double(x.eta_rhs);
            row[9] = x.wick_aps_index ? std::to_string(*x.wick_aps_index) : "";
            row[10] = x.wick_anti_aps_index ? std::to_string(*x.wick_anti_aps_index) : "";
            long worst = 0;
            for (const auto& [k, v] : x.integer_residuals)
                worst = std::max(worst, std::labs(v));
            row[11] = std::to_string(worst);
            row[12] = fmt_double(x.real_residuals.at("eta_formula_prerounding"));
            row[13] = x.sf_eta_residual ? fmt_double(*x.sf_eta_residual) : "";
        }
        row[14] = r.message;
        csv.add_row(row);
        if (r.exit_code > out.exit_code) {
            out.exit_code = r.exit_code;
            out.message = "value " + fmt_double(sweep.values[i]) + ": " + r.message;
        }
    }
    fs::create_directories(opts.out_dir);
    write_file((fs::path(opts.out_dir) / "sweep.csv").string(), csv.str());
    json extra{{"config_hash", config_hash(doc)},
               {"sweep_param", sweep.param},
               {"sweep_values", sweep.values},
               {"exit_code", out.exit_code},
               {"message", out.message.empty() ? json(nullptr) : json(out.message)}};
    write_manifest(opts.out_dir, extra);
    return out;
}

int run_command(const std::string& config_path, const std::optional<std::string>& out, int workers,
                const std::vector<std::string>& overrides, std::ostream& err)
{
    try {
        ExperimentConfig cfg = load_config(config_path, overrides);
        RunOptions ro;
        ro.out_dir = out.value_or("");
        ro.workers = workers;
        RunOutcome r = run_experiment(cfg, ro);
        if (r.exit_code != 0)
            err << r.message << "\n";
        return r.exit_code;
    } catch (const Error& e) {
        err << describe(e) << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "Config: " << e.what() << "\n";
        return 1;
    }
}

int sweep_command(const std::string& config_path, const std::string& param, const std::string& values,
                  const std::optional<std::string>& out, int workers, const std::vector<std::string>& overrides,
                  std::ostream& err)
{
    try {
        json doc = load_json_file(config_path);
        for (const auto& a : overrides)
            apply_override(doc, a);
        if (param.empty() != values.empty())
            fail(ErrorKind::Config, "--param and --values must be given together");
        if (param.empty()) {
            ExperimentConfig base = parse_config(doc);
            if (!base.sweep)
                fail(ErrorKind::Config, "no --param given and the config has no sweep section");
            RunOptions ro;
            ro.out_dir = out.value_or((fs::path(base.output_dir) / "sweep").string());
            ro.workers = workers;
            RunOutcome r = run_sweep(doc, *base.sweep, ro);
            if (r.exit_code != 0)
                err << r.message << "\n";
            return r.exit_code;
        }
        SweepSpec s;
        s.param = param;
        std::stringstream ss(values);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty())
                continue;
            size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != item.size())
                fail(ErrorKind::Config, "sweep value '" + item + "' is not a number");
            s.values.push_back(v);
        }
        if (s.values.empty())
            fail(ErrorKind::Config, "empty value list");
        // validate the base document once so schema errors surface before any sub-run
        ExperimentConfig base = parse_config(doc);
        RunOptions ro;
        ro.out_dir = out.value_or((fs::path(base.output_dir) / "sweep").string());
        ro.workers = workers;
        RunOutcome r = run_sweep(doc, s, ro);
        if (r.exit_code != 0)
            err << r.message << "\n";
        return r.exit_code;
    } catch (const Error& e) {
        err << describe(e) << "\n";
        return exit_code(e.kind());
    }
}

}  // namespace callias
