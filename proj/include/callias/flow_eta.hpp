#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "callias/discretize.hpp"
#include "callias/spectral.hpp"

namespace callias {

struct Crossing {
    double t = 0.0;
    int direction = 0;  // +1 from (-inf,0) into [0,inf), -1 back
    int track = 0;      // sorted-index track id
};

struct SpectralFlowResult {
    std::vector<double> times;  // every sample, including refinements
    rmat tracks;                // tracks(k, j) = lambda_k(times[j])
    std::vector<Crossing> crossings;
    int net = 0;
    int up = 0;
    int down = 0;
    int refinements = 0;
    double max_motion = 0.0;  // largest per-interval bound ||A(t_{j+1}) - A(t_j)||
};

struct FlowOptions {
    double zero_tol_rel = 1e-6;
    int max_depth = 10;  // bisection depth for ambiguous intervals
    int workers = 1;
};

constexpr int kMinFlowSteps = 32;

// Tracks are sorted-index eigenvalue curves; Weyl's inequality bounds their motion per interval.
SpectralFlowResult spectral_flow(const CalliasModel& model, const SpatialGrid& grid, int time_steps,
                                 const FlowOptions& opts = {});

enum class EtaMethod { SymmetricWindow, HeatKernel, HurwitzOracle };
const char* eta_method_name(EtaMethod m);
EtaMethod parse_eta_method(const std::string& s);

struct EtaOptions {
    EtaMethod method = EtaMethod::SymmetricWindow;
    double window = 0.0;      // Lambda; 0 picks the reliable range of the spectrum
    double heat_t_min = 0.04;
};

struct EtaResult {
    double value = 0.0;
    double error = 0.0;
    std::string method;
    double window = 0.0;   // Lambda used (symmetric_window)
    int windows_used = 0;  // number of midpoint gaps averaged
    double t_min = 0.0;    // heat kernel
    int dim = 0;
    int kernel_excluded = 0;
};

EtaResult eta_invariant(const SpectralData& spec, const SpatialGrid& grid, const EtaOptions& opts = {});

// Difference-first heat-trace relative eta, antisymmetric in its arguments.
EtaResult relative_eta(const SpectralData& spec0, const SpectralData& spec1, const EtaOptions& opts = {});

struct LocalTerm {
    double value = 0.0;
    std::string marker;  // "flat local term" for line models
};

// (1/2pi) sum over space-time cells of d_t a dt dx.
LocalTerm as_integral(const CalliasModel& model, int time_steps, int space_resolution);

struct SfEtaCheck {
    int sf = 0;
    double lhs = 0.0;  // 2 sf
    double rhs = 0.0;
    double residual = 0.0;
    double smooth_integral = 0.0;
    int jump_total = 0;
    std::vector<double> s;
    std::vector<double> eta_bar;
};

SfEtaCheck sf_eta_relation_check(const CalliasModel& model, const SpatialGrid& grid, int samples,
                                 const EtaOptions& eta, const FlowOptions& flow);

struct IndexReport {
    int ind_Qmm = 0;
    int ind_Qpp = 0;
    int sf = 0;
    int dim_ker_A0 = 0;
    int dim_ker_A1 = 0;
    double eta_rel = 0.0;
    double as_integral = 0.0;
    std::string as_marker;
    double eta_rhs = 0.0;  // as_integral + (eta_rel - k0 - k1)/2 before rounding
    std::optional<int> wick_aps_index;
    std::optional<int> wick_anti_aps_index;
    std::optional<double> sf_eta_residual;
    std::map<std::string, long> integer_residuals;
    std::map<std::string, double> real_residuals;
    bool incomplete = false;
    std::string failure;

    // Fills the residual maps from the headline quantities.
    void evaluate();
    std::vector<std::string> violations() const;
};

}  // namespace callias
