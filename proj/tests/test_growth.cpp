#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "growcoag/growth.hpp"

using namespace growcoag;

TEST_CASE("growth rates of the built-in families") {
    const auto zero = make_growth_field(ZeroGrowth{}, 1.0, 1.0);
    CHECK(growth_rate(zero, 0.7, 3.0) == 0.0);
    CHECK(growth_rate(zero, 0.7, 0.0) == 0.0);

    const auto lin = make_growth_field(LinearGrowth{0.5}, 1.0, 1.0);
    CHECK(growth_rate(lin, 0.0, 3.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(growth_rate(lin, 2.0, 0.0) == 0.0);

    const auto sat = make_growth_field(SaturatingGrowth{1.0, 1.0}, 1.0, 2.0);
    CHECK(growth_rate(sat, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(growth_rate(sat, 0.0, 0.0) == 0.0);
}

TEST_CASE("zero field freezes the flow") {
    const auto zero = make_growth_field(ZeroGrowth{}, 1.0, 1.0);
    const auto r = flow(zero, 5.0, 1.0, 3.0);
    CHECK(r.y == 3.0);
    CHECK(r.jac == 1.0);
}

TEST_CASE("linear field has the closed-form flow") {
    const auto lin = make_growth_field(LinearGrowth{0.5}, 0.5, 1.0);

    const auto forward = flow(lin, 2.0, 0.0, 1.0);
    CHECK(forward.y == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
    CHECK(forward.jac == doctest::Approx(std::exp(1.0)).epsilon(1e-10));

    const auto backward = flow(lin, 0.0, 2.0, 1.0);
    CHECK(backward.y == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    CHECK(backward.jac == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

    // inverse identity: forward then backward returns the start
    const auto roundtrip = flow(lin, 0.0, 2.0, forward.y);
    CHECK(std::abs(roundtrip.y - 1.0) <= 1e-8);
}

TEST_CASE("semigroup identity holds on random draws") {
    const auto sat = make_growth_field(SaturatingGrowth{0.8, 2.0}, 1.0, 2.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(0.0, 3.0);
    std::uniform_real_distribution<double> ulogv(std::log(1e-3), std::log(1e3));
    for (int i = 0; i < 200; ++i) {
        const double t = ut(rng), s = ut(rng), v = std::exp(ulogv(rng));
        const double y = flow(sat, s, t, v).y;
        const double back = flow(sat, t, s, y).y;
        CHECK(std::abs(back - v) <= 1e-8 * std::max(v, 1.0));
    }
}

TEST_CASE("jacobian agrees with a centered finite difference") {
    const std::vector<GrowthField> fields = {
        make_growth_field(LinearGrowth{0.4}, 0.5, 1.0),
        make_growth_field(SaturatingGrowth{0.9, 1.5}, 1.0, 2.0),
    };
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ut(0.0, 2.0);
    std::uniform_real_distribution<double> ulogv(std::log(1e-2), std::log(1e2));
    for (const auto& field : fields) {
        for (int i = 0; i < 100; ++i) {
            const double t = ut(rng), s = ut(rng), v = std::exp(ulogv(rng));
            const double h = 1e-6 * v;
            const double yp = flow(field, s, t, v + h).y;
            const double ym = flow(field, s, t, v - h).y;
            const double fd = (yp - ym) / (2.0 * h);
            const double jac = flow(field, s, t, v).jac;
            CHECK(std::abs(fd - jac) <= 1e-5 * std::abs(jac));
        }
    }
}

TEST_CASE("flow preserves positivity") {
    const auto sat = make_growth_field(SaturatingGrowth{1.0, 1.0}, 1.0, 2.0);
    for (double v : {1e-8, 1e-3, 1.0, 1e3}) {
        for (double s : {0.0, 0.5, 4.0}) {
            const auto r = flow(sat, s, 2.0, v);
            CHECK(r.y > 0.0);
            CHECK(r.jac > 0.0);
        }
    }
}

TEST_CASE("flow rejects nonpositive volumes") {
    const auto lin = make_growth_field(LinearGrowth{0.1}, 0.5, 1.0);
    CHECK_THROWS_AS(flow(lin, 1.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(flow(lin, 1.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("assumption checker accepts admissible fields") {
    const auto samples = growth_sample_grid();

    const auto lin = make_growth_field(LinearGrowth{0.5}, 1.0, 1.0);
    const auto ok = verify_growth_assumptions(lin, samples);
    CHECK(ok.ok);
    CHECK(ok.worst_slope == doctest::Approx(0.5).epsilon(1e-6));

    // slope approaches a = 1 only at v = 0; sampled slopes stay strictly below
    const auto sat = make_growth_field(SaturatingGrowth{1.0, 1.0}, 1.0, 2.0);
    const auto satrep = verify_growth_assumptions(sat, samples);
    CHECK(satrep.ok);
    CHECK(satrep.worst_slope < 1.0);
    CHECK(satrep.worst_curvature < 2.0);
}

TEST_CASE("assumption checker rejects slope >= A") {
    const auto samples = growth_sample_grid();

    // constructed directly: the factory would refuse a > A
    const GrowthField steep{LinearGrowth{2.0}, 1.0, 1.0};
    const auto rep = verify_growth_assumptions(steep, samples);
    CHECK_FALSE(rep.ok);
    CHECK(rep.worst_slope == doctest::Approx(2.0).epsilon(1e-6));

    // boundary case: slope exactly A is rejected, the bound being strict
    const auto tight = make_growth_field(LinearGrowth{1.0}, 1.0, 1.0);
    CHECK_FALSE(verify_growth_assumptions(tight, samples).ok);
}

TEST_CASE("assumption checker flags g(t,0) != 0") {
    const GrowthField off{UserGrowth{[](double, double) { return 1.0; }}, 2.0, 1.0};
    const auto rep = verify_growth_assumptions(off, growth_sample_grid());
    CHECK_FALSE(rep.origin_ok);
    CHECK_FALSE(rep.ok);
}

TEST_CASE("flow property suite") {
    SUBCASE("zero field holds with equality") {
        const auto zero = make_growth_field(ZeroGrowth{}, 0.1, 0.1);
        const auto rep = flow_property_suite(zero, 200);
        CHECK(rep.ok);
        CHECK(rep.worst_excess <= 1e-12);
    }
    SUBCASE("linear field with a = A is tight") {
        const auto lin = make_growth_field(LinearGrowth{0.5}, 0.5, 1.0);
        const auto rep = flow_property_suite(lin, 500);
        CHECK(rep.ok);
        // forward bound attained: Y = v e^{A(s-t)} exactly
        const auto r = flow(lin, 1.7, 0.3, 2.0);
        CHECK(r.y == doctest::Approx(2.0 * std::exp(0.5 * 1.4)).epsilon(1e-9));
    }
    SUBCASE("saturating field passes a thousand trials") {
        const auto sat = make_growth_field(SaturatingGrowth{1.0, 1.0}, 1.0, 2.0);
        const auto rep = flow_property_suite(sat, 1000);
        CHECK(rep.ok);
        CHECK(rep.failures == 0);
    }
}

TEST_CASE("growth report serializes to a flat text block") {
    const auto lin = make_growth_field(LinearGrowth{0.5}, 1.0, 1.0);
    const std::string text = to_text(verify_growth_assumptions(lin, growth_sample_grid()));
    CHECK(text.find("ok = true") != std::string::npos);
    CHECK(text.find("worst_slope = ") != std::string::npos);
}
