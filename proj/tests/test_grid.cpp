#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "growcoag/grid.hpp"

using namespace growcoag;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << content;
    return path.string();
}

} // namespace

TEST_CASE("geometric grid construction") {
    const auto grid = SizeGrid::geometric(1.0, 4.0, 2);
    CHECK(grid->edges()[0] == 1.0);
    CHECK(grid->edges()[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(grid->edges()[2] == 4.0);
    CHECK(grid->center(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(grid->center(1) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));

    const auto fine = SizeGrid::geometric(1e-4, 1e4, 256);
    const double expected_ratio = std::pow(10.0, 8.0 / 256.0);
    for (int i = 0; i + 1 < 257; ++i) {
        const double ratio = fine->edges()[i + 1] / fine->edges()[i];
        CHECK(ratio == doctest::Approx(expected_ratio).epsilon(1e-12));
    }
}

TEST_CASE("grid rejects bad parameters") {
    CHECK_THROWS_AS(SizeGrid::geometric(1.0, 1.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(SizeGrid::geometric(2.0, 1.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(SizeGrid::geometric(0.0, 1.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(SizeGrid::geometric(1.0, 2.0, 1), std::invalid_argument);
}

TEST_CASE("moments against closed forms") {
    SUBCASE("first moment of an indicator") {
        const auto grid = SizeGrid::geometric(1.0, 2.0, 256);
        auto state = project_initial(TruncatedPowerLaw{0.0, 1.0, 2.0}, grid);
        CHECK(moment(state, 1.0) == doctest::Approx(1.5).epsilon(1e-5));
        CHECK(moment(state, 0.0) == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("number of the unit exponential") {
        const auto grid = SizeGrid::geometric(1e-4, 1e2, 512);
        auto state = project_initial(Exponential{1.0}, grid);
        CHECK(moment(state, 0.0) == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(moment(state, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(moment(state, 2.0) == doctest::Approx(2.0).epsilon(1e-3));
    }
    SUBCASE("singular moment hits the gamma function") {
        const auto grid = SizeGrid::geometric(1e-6, 1e2, 1024);
        auto state = project_initial(Exponential{1.0}, grid);
        const double gamma_half = std::sqrt(M_PI);
        CHECK(moment(state, -0.5) == doctest::Approx(gamma_half).epsilon(1e-2));
    }
}

TEST_CASE("weighted norm") {
    const auto grid = SizeGrid::geometric(1.0, 4.0, 256);
    auto a = project_initial(TruncatedPowerLaw{0.0, 1.0, 4.0}, grid);
    auto b = zero_state(grid);

    SUBCASE("identical states have distance zero") {
        CHECK(weighted_norm(a, a, 0.5) == 0.0);
    }
    SUBCASE("hand-integrated weight of an indicator") {
        // integral of v^-1/2 + v over [1,4] = 2 + 7.5
        CHECK(weighted_norm(a, b, 0.5) == doctest::Approx(9.5).epsilon(1e-4));
    }
    SUBCASE("homogeneity") {
        auto twice = a;
        for (auto& v : twice.values)
            v *= 2.0;
        CHECK(weighted_norm(twice, b, 0.5) == 2.0 * weighted_norm(a, b, 0.5));
    }
    SUBCASE("triangle inequality on random triples") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            DensityState x = zero_state(grid), y = zero_state(grid), z = zero_state(grid);
            for (int i = 0; i < grid->cells(); ++i) {
                x.values[i] = u(rng);
                y.values[i] = u(rng);
                z.values[i] = u(rng);
            }
            const double xy = weighted_norm(x, y, 0.3);
            const double yz = weighted_norm(y, z, 0.3);
            const double xz = weighted_norm(x, z, 0.3);
            CHECK(xz <= xy + yz + 1e-12 * (xy + yz));
        }
    }
    SUBCASE("grid mismatch is an error") {
        const auto other = SizeGrid::geometric(1.0, 4.0, 256);
        auto c = zero_state(other);
        CHECK_THROWS_AS(weighted_norm(a, c, 0.5), std::invalid_argument);
    }
}

TEST_CASE("initial projections") {
    const auto grid = SizeGrid::geometric(1e-4, 1e2, 512);

    SUBCASE("exponential cell averages track the density") {
        auto state = project_initial(Exponential{1.0}, grid);
        for (int i = 100; i < 400; i += 50) {
            const double expect = std::exp(-grid->center(i));
            CHECK(state.values[i] == doctest::Approx(expect).epsilon(1e-4));
        }
    }
    SUBCASE("power law with zero exponent is an indicator") {
        auto state = project_initial(TruncatedPowerLaw{0.0, 1.0, 2.0}, grid);
        for (int i = 0; i < grid->cells(); ++i) {
            const double c = grid->center(i);
            if (c > 1.02 && c < 1.96)
                CHECK(state.values[i] == doctest::Approx(1.0).epsilon(1e-12));
            if (c < 0.98 || c > 2.04)
                CHECK(state.values[i] <= 1e-12);
        }
    }
    SUBCASE("tabulated data round trip") {
        const auto path = write_temp("growcoag_tab_ok.txt",
                                     "# volume density\n"
                                     "0.01 0.0\n"
                                     "1.0 2.0\n"
                                     "10.0 2.0   # flat stretch\n"
                                     "100.0 0.0\n");
        auto state = project_initial(Tabulated{path}, grid);
        CHECK(sample_density(state, 3.0) == doctest::Approx(2.0).epsilon(1e-3));
        CHECK(moment(state, 0.0) > 0.0);
        std::remove(path.c_str());
    }
    SUBCASE("tabulated negative entries are rejected") {
        const auto path =
            write_temp("growcoag_tab_neg.txt", "0.1 1.0\n1.0 -0.5\n10.0 1.0\n");
        CHECK_THROWS(project_initial(Tabulated{path}, grid));
        std::remove(path.c_str());
    }
    SUBCASE("tabulated volumes must increase") {
        const auto path =
            write_temp("growcoag_tab_dec.txt", "0.1 1.0\n1.0 0.5\n0.5 1.0\n");
        CHECK_THROWS(project_initial(Tabulated{path}, grid));
        std::remove(path.c_str());
    }
}

TEST_CASE("density sampling") {
    const auto grid = SizeGrid::geometric(1e-2, 1e2, 64);
    auto state = project_initial(Exponential{1.0}, grid);

    SUBCASE("interpolation nodes are exact") {
        for (int i = 0; i < grid->cells(); i += 7)
            CHECK(sample_density(state, grid->center(i)) == state.values[i]);
    }
    SUBCASE("zero outside the grid") {
        CHECK(sample_density(state, 1e-3) == 0.0);
        CHECK(sample_density(state, 1e3) == 0.0);
        CHECK(sample_density(state, -1.0) == 0.0);
    }
    SUBCASE("log-midpoint of equal neighbors") {
        auto flat = zero_state(grid);
        flat.values[10] = 0.7;
        flat.values[11] = 0.7;
        const double mid = std::sqrt(grid->center(10) * grid->center(11));
        CHECK(sample_density(flat, mid) == doctest::Approx(0.7).epsilon(1e-14));
    }
    SUBCASE("sampling at centers reproduces the number moment") {
        double sum = 0.0;
        for (int i = 0; i < grid->cells(); ++i)
            sum += sample_density(state, grid->center(i)) * grid->width(i);
        CHECK(sum == doctest::Approx(moment(state, 0.0)).epsilon(1e-10));
    }
}

TEST_CASE("quadrature refines at first order or better") {
    auto m_at = [](int cells, double order) {
        const auto grid = SizeGrid::geometric(1e-4, 1e2, cells);
        return moment(project_initial(Exponential{1.0}, grid), order);
    };
    SUBCASE("number moment changes stay within the refinement envelope") {
        // cell averages integrate exactly, so both changes sit at roundoff;
        // the floor keeps the ratio test meaningful
        const double d1 = std::abs(m_at(512, 0.0) - m_at(256, 0.0));
        const double d2 = std::abs(m_at(1024, 0.0) - m_at(512, 0.0));
        CHECK(d1 <= std::max(4.0 * d2, 1e-12));
    }
    SUBCASE("a genuinely quadrature-limited moment converges") {
        const double d1 = std::abs(m_at(512, -0.5) - m_at(256, -0.5));
        const double d2 = std::abs(m_at(1024, -0.5) - m_at(512, -0.5));
        CHECK(d2 <= 0.6 * d1); // at least first-order decay of the changes
    }
}
