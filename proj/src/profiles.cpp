#include "callias/profiles.hpp"

#include <cmath>
#include <limits>

namespace callias {

namespace {

double psi(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double dpsi(double u) { return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0; }

}  // namespace

double smoothstep(double u)
{
    if (u <= 0.0)
        return 0.0;
    if (u >= 1.0)
        return 1.0;
    double a = psi(u), b = psi(1.0 - u);
    return a / (a + b);
}

double smoothstep_derivative(double u)
{
    if (u <= 0.0 || u >= 1.0)
        return 0.0;
    double a = psi(u), b = psi(1.0 - u);
    double s = a + b;
    return (dpsi(u) * b + a * dpsi(1.0 - u)) / (s * s);
}

double SpatialProfile::value(double x) const
{
    switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return amplitude;
    case Kind::Linear: return amplitude * x;
    case Kind::Tanh: return amplitude * std::tanh(x / width);
    case Kind::Bump: {
        double y = (x - center) / width;
        if (std::abs(y) >= 1.0)
            return 0.0;
        return amplitude * std::exp(1.0 + 1.0 / (y * y - 1.0));
    }
    case Kind::Gaussian: {
        double y = (x - center) / width;
        return amplitude * std::exp(-0.5 * y * y);
    }
    }
    return 0.0;
}

double SpatialProfile::derivative(double x) const
{
    switch (kind) {
    case Kind::Zero:
    case Kind::Constant: return 0.0;
    case Kind::Linear: return amplitude;
    case Kind::Tanh: {
        double c = std::cosh(x / width);
        return amplitude / (width * c * c);
    }
    case Kind::Bump: {
        double y = (x - center) / width;
        if (std::abs(y) >= 1.0)
            return 0.0;
        double q = y * y - 1.0;
        return value(x) * (-2.0 * y / (q * q)) / width;
    }
    case Kind::Gaussian: {
        double y = (x - center) / width;
        return -value(x) * y / width;
    }
    }
    return 0.0;
}

double SpatialProfile::support_radius() const
{
    if (kind == Kind::Zero)
        return 0.0;
    if (kind == Kind::Bump)
        return std::abs(center) + width;
    return std::numeric_limits<double>::infinity();
}

std::string SpatialProfile::kind_name() const
{
    switch (kind) {
    case Kind::Zero: return "zero";
    case Kind::Constant: return "constant";
    case Kind::Linear: return "linear";
    case Kind::Tanh: return "tanh";
    case Kind::Bump: return "bump";
    case Kind::Gaussian: return "gaussian";
    }
    return "?";
}

double TimeProfile::value(double t) const
{
    switch (kind) {
    case Kind::Constant: return from;
    case Kind::Linear: return from + (to - from) * t;
    case Kind::CollarRamp: return from + (to - from) * smoothstep((t - delta) / (1.0 - 2.0 * delta));
    }
    return 0.0;
}

double TimeProfile::derivative(double t) const
{
    switch (kind) {
    case Kind::Constant: return 0.0;
    case Kind::Linear: return to - from;
    case Kind::CollarRamp: {
        double span = 1.0 - 2.0 * delta;
        return (to - from) * smoothstep_derivative((t - delta) / span) / span;
    }
    }
    return 0.0;
}

std::string TimeProfile::kind_name() const
{
    switch (kind) {
    case Kind::Constant: return "constant";
    case Kind::Linear: return "linear";
    case Kind::CollarRamp: return "collar_ramp";
    }
    return "?";
}

}  // namespace callias
