#include "callias/config.hpp"

#include <algorithm>

#include "callias/error.hpp"
#include "callias/io.hpp"

namespace callias {

const std::vector<std::string> kTaskNames = {"spectrum", "evolve", "qblocks", "flow", "eta", "index", "wick", "sweep"};

namespace {

void positive(double v, const std::string& key)
{
    if (!(v > 0.0))
        fail(ErrorKind::Config, "schema: 'numerics." + key + "' must be positive");
}

int int_field(StrictObject& o, const std::string& key, int fallback)
{
    long v = o.integer_or(key, fallback);
    if (v < 0 || v > 1000000)
        fail(ErrorKind::Config, "schema: '" + o.child_path(key) + "' is out of range");
    return static_cast<int>(v);
}

Numerics parse_numerics(const json& j, bool circle)
{
    StrictObject o(j, "numerics");
    Numerics n;
    n.resolution = int_field(o, "resolution", circle ? 16 : 48);
    n.time_steps = int_field(o, "time_steps", n.time_steps);
    n.flow_steps = int_field(o, "flow_steps", n.flow_steps);
    n.wick_time_steps = int_field(o, "wick_time_steps", n.wick_time_steps);
    if (o.has("ladder")) {
        const json& l = o.at("ladder");
        if (!l.is_array())
            fail(ErrorKind::Config, "schema: 'numerics.ladder' must be an array of integers");
        for (const json& v : l) {
            if (!v.is_number_integer() || v.get<long>() < 1)
                fail(ErrorKind::Config, "schema: 'numerics.ladder' must be an array of positive integers");
            n.ladder.push_back(v.get<int>());
        }
    }
    n.richardson_tol = o.number_or("richardson_tol", n.richardson_tol);
    n.zero_tol_rel = o.number_or("zero_tol_rel", n.zero_tol_rel);
    n.sv_tol_rel = o.number_or("sv_tol_rel", n.sv_tol_rel);
    n.eta_method = parse_eta_method(o.string_or("eta_method", "symmetric_window"));
    n.eta_window = o.number_or("eta_window", 0.0);
    n.heat_t_min = o.number_or("heat_t_min", n.heat_t_min);
    n.sobolev_s = o.number_or("sobolev_s", n.sobolev_s);
    n.wick_form = parse_wick_form(o.string_or("wick_form", "lorentzian"));
    n.propagation_threshold = o.number_or("propagation_threshold", n.propagation_threshold);
    n.unitarity_tol = o.number_or("unitarity_tol", n.unitarity_tol);
    n.sf_eta_samples = int_field(o, "sf_eta_samples", n.sf_eta_samples);
    n.window_R = o.number_or("window_R", n.window_R);
    o.finish();

    positive(n.richardson_tol, "richardson_tol");
    positive(n.zero_tol_rel, "zero_tol_rel");
    positive(n.sv_tol_rel, "sv_tol_rel");
    positive(n.heat_t_min, "heat_t_min");
    positive(n.propagation_threshold, "propagation_threshold");
    positive(n.unitarity_tol, "unitarity_tol");
    if (n.eta_window < 0.0)
        fail(ErrorKind::Config, "schema: 'numerics.eta_window' must be non-negative");
    if (n.sobolev_s < 0.0)
        fail(ErrorKind::Config, "schema: 'numerics.sobolev_s' must be non-negative");
    if (n.time_steps < 16)
        fail(ErrorKind::StepCountTooLow, "numerics.time_steps " + std::to_string(n.time_steps) +
                                             " is below the minimum of 16");
    if (n.flow_steps < 32)
        fail(ErrorKind::StepCountTooLow, "numerics.flow_steps " + std::to_string(n.flow_steps) +
                                             " is below the minimum of 32");
    if (n.wick_time_steps < 16)
        fail(ErrorKind::StepCountTooLow, "numerics.wick_time_steps " + std::to_string(n.wick_time_steps) +
                                             " is below the minimum of 16");
    if (n.sf_eta_samples < 2)
        fail(ErrorKind::Config, "schema: 'numerics.sf_eta_samples' must be at least 2");
    if (n.resolution < 8)
        fail(ErrorKind::ResolutionTooLow, "numerics.resolution " + std::to_string(n.resolution) +
                                              " is below the minimum of 8");
    return n;
}

WavePacket parse_packet(const json& j)
{
    StrictObject o(j, "initial_state");
    WavePacket p;
    p.center = o.number_or("center", p.center);
    p.width = o.number_or("width", p.width);
    p.component = o.string_or("component", p.component);
    p.t0 = o.number_or("t0", p.t0);
    p.t1 = o.number_or("t1", p.t1);
    p.samples = static_cast<int>(o.integer_or("samples", p.samples));
    p.trajectory_samples = static_cast<int>(o.integer_or("trajectory_samples", p.trajectory_samples));
    o.finish();
    if (!(p.width > 0.0))
        fail(ErrorKind::Config, "schema: 'initial_state.width' must be positive");
    if (p.component != "plus" && p.component != "minus")
        fail(ErrorKind::Config, "schema: 'initial_state.component' must be 'plus' or 'minus'");
    if (!(p.t0 >= 0.0 && p.t0 <= p.t1 && p.t1 <= 1.0))
        fail(ErrorKind::Config, "schema: 'initial_state' needs 0 <= t0 <= t1 <= 1");
    if (p.samples < 1 || p.trajectory_samples < 1)
        fail(ErrorKind::Config, "schema: 'initial_state' sample counts must be positive");
    return p;
}

SweepSpec parse_sweep(const json& j)
{
    StrictObject o(j, "sweep");
    SweepSpec s;
    s.param = o.string("param");
    const json& v = o.at("values");
    if (!v.is_array())
        fail(ErrorKind::Config, "schema: 'sweep.values' must be an array of numbers");
    for (const json& x : v) {
        if (!x.is_number())
            fail(ErrorKind::Config, "schema: 'sweep.values' must be an array of numbers");
        s.values.push_back(x.get<double>());
    }
    o.finish();
    return s;
}

}  // namespace

bool ExperimentConfig::has_task(const std::string& t) const
{
    return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
}

void set_path(json& doc, const std::string& path, const json& value)
{
    if (path.empty())
        fail(ErrorKind::Config, "override needs a key");
    json* cur = &doc;
    size_t start = 0;
    while (true) {
        size_t dot = path.find('.', start);
        std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty())
            fail(ErrorKind::Config, "override key '" + path + "' has an empty component");
        if (!cur->is_object())
            fail(ErrorKind::Config, "override key '" + path + "' does not address an object member");
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        cur = &(*cur)[key];
        if (cur->is_null())
            *cur = json::object();
        start = dot + 1;
    }
}

void apply_override(json& doc, const std::string& assignment)
{
    size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        fail(ErrorKind::Config, "override '" + assignment + "' is not of the form key=value");
    std::string key = assignment.substr(0, eq);
    std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;
    set_path(doc, key, value);
}

ExperimentConfig parse_config(const json& doc)
{
    StrictObject o(doc, "");
    ExperimentConfig c;
    c.raw = doc;
    c.name = o.string_or("name", "experiment");
    if (o.has("seed")) {
        const json& s = o.at("seed");
        if (!s.is_number_integer() || s.get<long long>() < 0)
            fail(ErrorKind::Config, "schema: 'seed' must be a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }
    c.output_dir = o.string_or("output_dir", "out/" + c.name);
    c.model = build_model(o.at("model"));
    c.numerics = parse_numerics(o.has("numerics") ? o.at("numerics") : json::object(), c.model.domain.is_circle());
    const json& tasks = o.at("tasks");
    if (!tasks.is_array() || tasks.empty())
        fail(ErrorKind::Config, "schema: 'tasks' must be a non-empty array");
    for (const json& t : tasks) {
        if (!t.is_string())
            fail(ErrorKind::Config, "schema: 'tasks' entries must be strings");
        std::string name = t.get<std::string>();
        if (std::find(kTaskNames.begin(), kTaskNames.end(), name) == kTaskNames.end())
            fail(ErrorKind::Config, "schema: unknown task '" + name + "'");
        c.tasks.push_back(name);
    }
    if (o.has("sweep"))
        c.sweep = parse_sweep(o.at("sweep"));
    if (c.has_task("sweep") && !c.sweep)
        fail(ErrorKind::Config, "schema: task 'sweep' needs a 'sweep' section");
    if (o.has("initial_state"))
        c.packet = parse_packet(o.at("initial_state"));
    o.finish();
    return c;
}

json load_json_file(const std::string& path)
{
    std::string text = read_file(path);
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
        fail(ErrorKind::Config, "'" + path + "' is not valid JSON");
    return doc;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides)
{
    json doc = load_json_file(path);
    for (const auto& a : overrides)
        apply_override(doc, a);
    return parse_config(doc);
}

std::string config_hash(const json& doc)
{
    return sha256_hex(doc.dump());
}

}  // namespace callias
