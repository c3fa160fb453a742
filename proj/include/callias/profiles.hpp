#pragma once

#include <string>

namespace callias {

// C-infinity step: 0 for u <= 0, 1 for u >= 1.
double smoothstep(double u);
double smoothstep_derivative(double u);

struct SpatialProfile {
    enum class Kind { Zero, Constant, Linear, Tanh, Bump, Gaussian };
    Kind kind = Kind::Zero;
    double amplitude = 0.0;  // height, slope or constant value
    double center = 0.0;
    double width = 1.0;

    double value(double x) const;
    double derivative(double x) const;
    bool compact() const { return kind == Kind::Zero || kind == Kind::Bump; }
    bool unbounded() const { return kind == Kind::Linear && amplitude != 0.0; }
    // Radius of the smallest centred interval containing the support (infinite when not compact).
    double support_radius() const;
    std::string kind_name() const;

    static SpatialProfile zero() { return {}; }
    static SpatialProfile constant(double v) { return {Kind::Constant, v, 0.0, 1.0}; }
    static SpatialProfile linear(double slope) { return {Kind::Linear, slope, 0.0, 1.0}; }
    static SpatialProfile tanh(double amp, double scale) { return {Kind::Tanh, amp, 0.0, scale}; }
    static SpatialProfile bump(double height, double center, double width) { return {Kind::Bump, height, center, width}; }
    static SpatialProfile gaussian(double height, double center, double width) { return {Kind::Gaussian, height, center, width}; }
};

struct TimeProfile {
    enum class Kind { Constant, Linear, CollarRamp };
    Kind kind = Kind::Constant;
    double from = 0.0;   // constant value for Kind::Constant
    double to = 0.0;
    double delta = 0.1;  // collar width for CollarRamp

    double value(double t) const;
    double derivative(double t) const;
    std::string kind_name() const;

    static TimeProfile constant(double v) { return {Kind::Constant, v, v, 0.0}; }
    static TimeProfile linear(double a, double b) { return {Kind::Linear, a, b, 0.0}; }
    static TimeProfile collar_ramp(double a, double b, double delta) { return {Kind::CollarRamp, a, b, delta}; }
};

}  // namespace callias
