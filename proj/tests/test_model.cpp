#include <doctest.h>

#include <cmath>

#include "callias/discretize.hpp"
#include "callias/error.hpp"
#include "callias/model.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace callias;

namespace {

ErrorKind kind_of(const json& j)
{
    try {
        build_model(j);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("model was accepted");
    return ErrorKind::Config;
}

}  // namespace

TEST_CASE("circle winding model builds")
{
    CalliasModel m = fixtures::circle(0.0, 1.0);
    CHECK(m.domain.is_circle());
    CHECK(m.clifford.dim == 1);
    CHECK(m.coefficient(0.0) == 0.0);
    CHECK(m.coefficient(1.0) == 1.0);
    CHECK(m.gauge_value(0.5, 1.3) == doctest::Approx(m.coefficient(0.5)));
}

TEST_CASE("line bump model builds with canonical Clifford data")
{
    CalliasModel m = fixtures::line(12.0, 1.0, 0.0, 1.0, -1.0, 1.0);
    CHECK_FALSE(m.domain.is_circle());
    CHECK(m.clifford.dim == 2);
    CHECK(m.clifford.is_canonical(Direction::Sigma2));
    const cmat& g = m.clifford.gamma_space;
    const cmat& p = m.clifford.phi_matrix;
    CHECK((g * p + p * g).norm() == 0.0);
    CHECK((m.clifford.beta * m.clifford.beta - cmat::Identity(2, 2)).norm() == 0.0);
    const cmat& q = m.clifford.perturbation_matrix;
    CHECK((g * q + q * g).norm() == 0.0);
    CHECK((p * q + q * p).norm() == 0.0);
}

TEST_CASE("noncompact perturbation violates A4")
{
    json j = fixtures::line_json(12.0, 1.0, 0.0, 1.0, 0.0, 1.0);
    j["perturbation"]["spatial"] = {{"kind", "linear"}, {"slope", 1.0}};
    j["perturbation"]["time"] = {{"kind", "linear"}, {"from", 0.0}, {"to", 1.0}};
    try {
        build_model(j);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AssumptionViolation);
        CHECK(std::string(e.what()).find("A4") != std::string::npos);
    }
}

TEST_CASE("declared support radius smaller than the bump is a SupportViolation")
{
    json j = fixtures::line_json(12.0, 1.0, 0.0, 1.0, -1.0, 1.0);
    j["perturbation"]["support_radius"] = 0.5;
    CHECK(kind_of(j) == ErrorKind::SupportViolation);
}

TEST_CASE("time profile varying inside the collar is rejected")
{
    json j = fixtures::line_json(12.0, 1.0, 0.0, 1.0, 0.0, 1.0);
    j["perturbation"]["time"] = {{"kind", "linear"}, {"from", 0.0}, {"to", 1.0}};
    CHECK(kind_of(j) == ErrorKind::CollarViolation);
}

TEST_CASE("non-unit lapse and curved metric are rejected")
{
    json j = fixtures::line_json(12.0, 1.0, 0.0, 1.0, -1.0, 1.0);
    j["lapse"] = 2.0;
    CHECK(kind_of(j) == ErrorKind::AssumptionViolation);
    j["lapse"] = 1.0;
    j["metric"] = "warped";
    CHECK(kind_of(j) == ErrorKind::AssumptionViolation);
}

TEST_CASE("unknown keys are rejected")
{
    json j = fixtures::circle_json(0.0, 1.0);
    j["gauge"]["spatail"] = {{"kind", "zero"}};
    CHECK(kind_of(j) == ErrorKind::Config);
}

TEST_CASE("bounded potential is not Callias")
{
    json j = fixtures::line_json(12.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    j["potential"] = {{"kind", "tanh"}, {"amplitude", 1.0}, {"scale", 1.0}};
    CHECK(kind_of(j) == ErrorKind::AssumptionViolation);
    CalliasModel m = parse_model(j);
    CHECK_THROWS_AS(essential_support(m, 3.0, 0.0), Error);
    try {
        essential_support(m, 3.0, 0.0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotCallias);
    }
}

TEST_CASE("essential support of phi(x) = x")
{
    CalliasModel m = fixtures::line_free(12.0);
    EssentialSupport r3 = essential_support(m, 3.0, 0.0);
    CHECK(r3.x_R == doctest::Approx(2.0).epsilon(1e-9));
    EssentialSupport r0 = essential_support(m, 0.0, 0.0);
    CHECK(r0.x_R == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r3.warning.empty());
}

TEST_CASE("essential support grows with R")
{
    CalliasModel m = fixtures::line(12.0, 1.5, 0.3, 1.2, -1.0, 1.0);
    double prev = 0.0;
    for (double R : {0.0, 0.5, 1.0, 3.0, 10.0, 40.0}) {
        for (double t : {0.0, 0.5, 1.0}) {
            EssentialSupport e = essential_support(m, R, t);
            CHECK(e.x_R >= prev - 1e-12);
            if (t == 0.0 || t == 1.0)
                CHECK(e.x_R >= oracles::linear_essential_radius(R) - 1e-9);
            for (double x : {e.x_R + 1e-3, e.x_R + 0.5, 11.9})
                CHECK(callias_margin(m, x, t) >= R - 1e-9);
        }
        prev = essential_support(m, R, 0.5).x_R;
    }
}

TEST_CASE("circle essential support is the whole domain with a warning")
{
    EssentialSupport e = essential_support(fixtures::circle(0.0, 1.0), 3.0, 0.0);
    CHECK(e.whole_domain);
    CHECK(e.warning.find("CompactDomain") == 0);
}

TEST_CASE("collar: coefficient constant near both ends")
{
    CalliasModel m = fixtures::line(12.0, 1.0, 0.0, 1.0, -1.0, 1.0);
    for (double t : {0.0, 0.03, 0.07, 0.1}) {
        CHECK(m.coefficient(t) == m.coefficient(0.0));
        CHECK(m.coefficient(1.0 - t) == m.coefficient(1.0));
        CHECK(m.coefficient_rate(t) == 0.0);
    }
    CHECK(m.coefficient(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(m.static_on(0.0, 1.0));
    CHECK(m.static_on(0.0, 0.1));
}

TEST_CASE("model summary names the domain")
{
    json s = model_summary(fixtures::circle(0.0, 1.0));
    CHECK(s.dump().find("circle") != std::string::npos);
}
