#include <vector>

#include "doctest.h"

#include "calib/binning.hpp"
#include "calib/error.hpp"

using namespace calib;

TEST_CASE("equal-width edges") {
    CHECK(BinningScheme::equal_width(2).edges() == std::vector<double>{0, 0.5, 1});
    const auto k15 = BinningScheme::equal_width(15);
    REQUIRE(k15.size() == 15);
    CHECK(k15.edges()[1] == doctest::Approx(1.0 / 15));
    CHECK(k15.edges().back() == 1.0);
    const auto k5 = BinningScheme::equal_width(5);
    CHECK(k5.edges()[1] == doctest::Approx(0.2));
    CHECK(k5.edges()[4] == doctest::Approx(0.8));
    CHECK_THROWS_AS(BinningScheme::equal_width(0), ArgumentError);
}

TEST_CASE("equal-mass edges") {
    const std::vector<double> c{0.1, 0.2, 0.8, 0.9};
    const auto s = BinningScheme::equal_mass(2, c);
    REQUIRE(s.size() == 2);
    CHECK(s.edges()[1] == doctest::Approx(0.5));

    const std::vector<double> same{0.7, 0.7, 0.7};
    CHECK(BinningScheme::equal_mass(2, same).edges() == std::vector<double>{0, 1});
    CHECK(BinningScheme::equal_mass(1, c).edges() == std::vector<double>{0, 1});
    CHECK(BinningScheme::equal_mass(15, same).size() == 1);
}

TEST_CASE("bin_index edge conventions") {
    const auto k15 = BinningScheme::equal_width(15);
    CHECK(k15.bin_index(1.0) == 14);
    CHECK(k15.bin_index(0.5) == 7);
    CHECK(k15.bin_index(0.0) == 0);
    CHECK(BinningScheme::equal_width(2).bin_index(0.5) == 1);
    CHECK_THROWS_AS(k15.bin_index(1.5), ArgumentError);
    CHECK_THROWS_AS(k15.bin_index(-0.1), ArgumentError);
}

TEST_CASE("explicit edges are validated") {
    CHECK_THROWS_AS(BinningScheme(BinKind::EqualWidth, {0.0, 0.5, 0.5, 1.0}), ArgumentError);
    CHECK_THROWS_AS(BinningScheme(BinKind::EqualWidth, {0.1, 1.0}), ArgumentError);
    CHECK_NOTHROW(BinningScheme(BinKind::EqualMass, {0.0, 0.3, 1.0}));
}

TEST_CASE("bin kind names") {
    CHECK(parse_bin_kind(to_string(BinKind::EqualMass)) == BinKind::EqualMass);
    CHECK(parse_bin_kind("equal-width") == BinKind::EqualWidth);
    CHECK_THROWS_AS(parse_bin_kind("quantile-ish"), ArgumentError);
}
