#include <doctest.h>

#include <random>

#include "treemend/rational.hpp"

using treemend::Rational;

TEST_CASE("normalization and comparison") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-2, -4) == Rational(1, 2));
    CHECK(Rational(2, -4) == Rational(-1, 2));
    CHECK(Rational(0, 5) == Rational(0));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(7, 14) == Rational(1, 2));
    CHECK(Rational(3, 8) > Rational(1, 3));
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("arithmetic stays exact") {
    Rational sum = Rational(1, 3) + Rational(1, 4) + Rational(1, 3);
    CHECK(sum == Rational(11, 12));
    CHECK(Rational(1, 6) * Rational(1, 4) == Rational(1, 24));
    CHECK(Rational(1, 2) - Rational(1, 3) == Rational(1, 6));
    CHECK(Rational(3, 8) / Rational(3, 4) == Rational(1, 2));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        long long n1 = (long long)(rng() % 2000) - 1000;
        long long n2 = (long long)(rng() % 2000) - 1000;
        long long d1 = 1 + (long long)(rng() % 999);
        long long d2 = 1 + (long long)(rng() % 999);
        Rational a(n1, d1), b(n2, d2);
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
        CHECK((a - b) + b == a);
    }
}

TEST_CASE("text forms") {
    CHECK(Rational(3, 8).str() == "3/8");
    CHECK(Rational(7).str() == "7");
    CHECK(Rational(3, 8).decimal_str() == "0.375");
    CHECK(Rational(1).decimal_str() == "1");
    CHECK(Rational(1, 3).decimal_str(6) == "0.333333");
    CHECK(Rational(2, 3).decimal_str(6) == "0.666667");
    CHECK(Rational(-3, 8).decimal_str() == "-0.375");
    CHECK(Rational(999999, 1000000).decimal_str(3) == "1");
}

TEST_CASE("percent rendering rounds half-up at two decimals") {
    CHECK(Rational(1454, 1466).percent_str() == "99.18%");
    CHECK(Rational(1454, 1496).percent_str() == "97.19%");
    CHECK(Rational(2908, 2962).percent_str() == "98.18%");
    CHECK(Rational(1356, 1448).percent_str() == "93.65%");
    CHECK(Rational(1356, 1496).percent_str() == "90.64%");
    CHECK(Rational(1, 2).percent_str() == "50.00%");
    CHECK(Rational(1).percent_str() == "100.00%");
    CHECK(Rational(1, 800).percent_str() == "0.13%");   // 0.125% rounds up
    CHECK(Rational(1, 3).percent_str() == "33.33%");
}

TEST_CASE("parsing accepts fractions, decimals and integers") {
    CHECK(*Rational::parse("17/20") == Rational(17, 20));
    CHECK(*Rational::parse("0.85") == Rational(17, 20));
    CHECK(*Rational::parse(".5") == Rational(1, 2));
    CHECK(*Rational::parse("1") == Rational(1));
    CHECK(*Rational::parse("-0.25") == Rational(-1, 4));
    CHECK(!Rational::parse(""));
    CHECK(!Rational::parse("x"));
    CHECK(!Rational::parse("1/0"));
    CHECK(!Rational::parse("1.2.3"));
}

TEST_CASE("overflow is detected, not wrapped") {
    Rational big(INT64_MAX / 2, 1);
    CHECK_THROWS_AS(big * big, std::overflow_error);
}
