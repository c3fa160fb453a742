#pragma once

#include <string>

#include "callias/model.hpp"

namespace fixtures {

using callias::json;

// Circle model with spatially constant gauge a(t) = collar ramp from -> to (constant when equal).
inline json circle_json(double from, double to)
{
    json time = from == to ? json{{"kind", "constant"}, {"value", from}}
                           : json{{"kind", "collar_ramp"}, {"from", from}, {"to", to}};
    return json{{"domain", {{"kind", "circle"}}},
                {"gauge", {{"spatial", {{"kind", "constant"}, {"value", 1.0}}}, {"time", time}}}};
}

inline callias::CalliasModel circle(double from, double to)
{
    return callias::build_model(circle_json(from, to));
}

// Line model phi(x) = x with a sigma2 bump perturbation c(t) b(x).
inline json line_json(double half_width, double height, double center, double width, double c_from, double c_to,
                      double mass = 0.0)
{
    json m{{"domain", {{"kind", "line"}, {"half_width", half_width}}},
           {"potential", {{"kind", "linear"}, {"slope", 1.0}}}};
    if (height != 0.0) {
        json time = c_from == c_to ? json{{"kind", "constant"}, {"value", c_from}}
                                   : json{{"kind", "collar_ramp"}, {"from", c_from}, {"to", c_to}};
        m["perturbation"] = {{"direction", "sigma2"},
                             {"spatial", {{"kind", "bump"}, {"height", height}, {"center", center}, {"width", width}}},
                             {"time", time}};
    }
    if (mass != 0.0)
        m["mass"] = mass;
    return m;
}

inline callias::CalliasModel line(double half_width, double height, double center, double width, double c_from,
                                  double c_to, double mass = 0.0)
{
    return callias::build_model(line_json(half_width, height, center, width, c_from, c_to, mass));
}

// Unperturbed phi(x) = x on [-L, L].
inline callias::CalliasModel line_free(double half_width)
{
    return callias::build_model(line_json(half_width, 0.0, 0.0, 1.0, 0.0, 0.0));
}

// The crossing family used throughout: unit bump at 0, c from -1 to 1, L = 7.
inline callias::CalliasModel line_crossing()
{
    return line(7.0, 1.0, 0.0, 1.0, -1.0, 1.0);
}

}  // namespace fixtures
