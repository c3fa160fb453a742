#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "callias/flow_eta.hpp"
#include "callias/json_util.hpp"
#include "callias/model.hpp"
#include "callias/wickaps.hpp"

namespace callias {

struct Numerics {
    int resolution = 0;          // K (circle) or n (line)
    int time_steps = 512;        // propagate
    int flow_steps = 128;        // spectral flow samples
    int wick_time_steps = 16;
    std::vector<int> ladder;     // decay table and causality ladder
    double richardson_tol = 1e-6;
    double zero_tol_rel = 1e-6;
    double sv_tol_rel = 1e-8;
    EtaMethod eta_method = EtaMethod::SymmetricWindow;
    double eta_window = 0.0;     // 0 = reliable range
    double heat_t_min = 0.04;
    double sobolev_s = 0.0;
    WickForm wick_form = WickForm::Lorentzian;
    double propagation_threshold = 1e-5;
    double unitarity_tol = 1e-10;
    int sf_eta_samples = 128;
    double window_R = 3.0;
};

// Initial state for the evolve task: a Gaussian on one chiral component.
struct WavePacket {
    double center = 0.0;
    double width = 0.3;
    std::string component = "plus";  // plus (nodes) or minus (midpoints); ignored on the circle
    double t0 = 0.0;
    double t1 = 1.0;
    int samples = 64;
    int trajectory_samples = 16;
};

struct SweepSpec {
    std::string param;
    std::vector<double> values;
};

extern const std::vector<std::string> kTaskNames;

struct ExperimentConfig {
    std::string name;
    std::uint64_t seed = 0;
    std::string output_dir;
    CalliasModel model;
    Numerics numerics;
    std::vector<std::string> tasks;
    std::optional<SweepSpec> sweep;
    WavePacket packet;
    json raw;  // document after overrides

    bool has_task(const std::string& t) const;
};

// Sets a dotted path ("numerics.time_steps") to a JSON-parsed value (bare strings allowed).
void apply_override(json& doc, const std::string& assignment);
void set_path(json& doc, const std::string& path, const json& value);

ExperimentConfig parse_config(const json& doc);
json load_json_file(const std::string& path);
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// sha256 of the canonical (sorted-key, compact) dump.
std::string config_hash(const json& doc);

}  // namespace callias
