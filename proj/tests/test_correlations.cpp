#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "vcone/correlations.hpp"
#include "vcone/error.hpp"
#include "vcone/expressions.hpp"

using namespace vcone;

namespace {

Behavior pr_box() {
    Behavior b(2);
    for (unsigned o = 0; o < 4; ++o)
        for (unsigned s = 0; s < 4; ++s) {
            const unsigned a = o >> 1, bb = o & 1, x = s >> 1, y = s & 1;
            b.at(o, s) = ((a ^ bb) == (x & y)) ? 0.5 : 0.0;
        }
    return b;
}

// Random local behavior: mixture of deterministic 4-party strategies.
Behavior random_local4(std::mt19937_64& rng) {
    Behavior b(4);
    std::uniform_int_distribution<int> bit(0, 1);
    const int k = 5;
    for (int m = 0; m < k; ++m) {
        int f[4][2];
        for (auto& p : f)
            for (auto& v : p) v = bit(rng);
        for (unsigned s = 0; s < 16; ++s) {
            unsigned o = 0;
            for (int p = 0; p < 4; ++p) o = with_bit(o, p, 4, static_cast<unsigned>(f[p][bit_of(s, p, 4)]));
            b.at(o, s) += 1.0 / k;
        }
    }
    return b;
}

}  // namespace

TEST_CASE("table layout puts party A in the most significant bit") {
    CHECK(Behavior::index(4, 0b1000, 0b0001) == 0b10000001);
    CHECK(Behavior::index(2, 0b01, 0b10) == 0b0110);
    CHECK(bit_of(0b1000, 0, 4) == 1);
    CHECK(bit_of(0b1000, 3, 4) == 0);
    CHECK(with_bit(0, 3, 4, 1) == 1);
}

TEST_CASE("behavior validation") {
    Behavior::uniform(4).validate();
    pr_box().validate();
    Behavior bad = Behavior::uniform(2);
    bad.at(0, 0) += 0.1;
    CHECK_THROWS_AS(bad.validate(), invalid_input);
    Behavior neg = Behavior::uniform(2);
    neg.at(0, 0) = -0.25;
    neg.at(1, 0) = 0.75;
    CHECK_THROWS_AS(neg.validate(), invalid_input);
    CHECK_THROWS_AS(Behavior(2, std::vector<double>(15, 0.0)), invalid_input);
}

TEST_CASE("marginals of a local behavior sum correctly") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const Behavior b = random_local4(rng);
        const Behavior abd = marginal(b, {0, 1, 3}, {0, 0, 1, 0});
        abd.validate(1e-12);
        for (unsigned o = 0; o < 8; ++o)
            for (unsigned s = 0; s < 8; ++s) {
                double expect = 0;
                const unsigned full_s = ((s >> 2) << 3) | (((s >> 1) & 1) << 2) | (1u << 1) | (s & 1);
                for (unsigned c = 0; c < 2; ++c) {
                    const unsigned full_o = ((o >> 2) << 3) | (((o >> 1) & 1) << 2) | (c << 1) | (o & 1);
                    expect += b.at(full_o, full_s);
                }
                CHECK(abd.at(o, s) == doctest::Approx(expect).epsilon(1e-14));
            }
    }
}

TEST_CASE("local and uniform behaviors are no-signalling") {
    CHECK(is_no_signalling(Behavior::uniform(4)).pass);
    CHECK(is_no_signalling(pr_box()).pass);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) CHECK(is_no_signalling(random_local4(rng)).pass);
}

TEST_CASE("a hand-built signalling table is caught with its witness") {
    // B outputs A's setting.
    Behavior b(2);
    for (unsigned s = 0; s < 4; ++s) b.at(s >> 1, s) = 1.0;
    const auto r = is_no_signalling(b);
    CHECK_FALSE(r.pass);
    REQUIRE(r.report.worst >= 0);
    const auto& w = r.report.entries[static_cast<std::size_t>(r.report.worst)];
    CHECK(w.name == "B-on-x");
    CHECK(w.variation == doctest::Approx(1.0));
    CHECK(r.report.to_json()["worst"] == "B-on-x");
}

TEST_CASE("BC|AD conditionals of a product behavior are the BC factor") {
    // P(abcd|xyzw) = P_AD(ad|xw) P_BC(bc|yz) with P_BC a PR box.
    const Behavior pr = pr_box();
    Behavior b(4);
    for (unsigned o = 0; o < 16; ++o)
        for (unsigned s = 0; s < 16; ++s) {
            const unsigned a = bit_of(o, 0, 4), d = bit_of(o, 3, 4), x = bit_of(s, 0, 4), w = bit_of(s, 3, 4);
            const double pad = (a == (x ^ w)) ? 0.5 : 0.0;  // d uniform, a = x xor w
            b.at(o, s) = pad * pr.at((bit_of(o, 1, 4) << 1) | bit_of(o, 2, 4), (bit_of(s, 1, 4) << 1) | bit_of(s, 2, 4));
        }
    b.validate();
    const auto c = conditional_bc_given_ad(b);
    for (int a = 0; a < 2; ++a)
        for (int x = 0; x < 2; ++x)
            for (int d = 0; d < 2; ++d)
                for (int w = 0; w < 2; ++w) {
                    const auto& cb = c[static_cast<std::size_t>(axdw_index(a, x, d, w))];
                    CHECK(cb.present == (a == (x ^ w)));
                    if (!cb.present) continue;
                    CHECK(cb.weight == doctest::Approx(0.5));
                    for (std::size_t i = 0; i < 16; ++i) CHECK(cb.bc.table()[i] == doctest::Approx(pr.table()[i]));
                }
}

TEST_CASE("CHSH values: PR box 4, local deterministic 2") {
    const auto chsh = expression_chsh();
    CHECK(evaluate_bell(chsh, pr_box()) == doctest::Approx(4.0));
    CHECK(evaluate_bell(chsh, Behavior::uniform(2)) == doctest::Approx(0.0));
    Behavior det(2);
    for (unsigned s = 0; s < 4; ++s) det.at(0, s) = 1.0;
    CHECK(evaluate_bell(chsh, det) == doctest::Approx(2.0));
}

TEST_CASE("S involves only ABD and ACD marginals") {
    CHECK(supports_only_ABD_ACD(expression_S()));
    CHECK_FALSE(supports_only_ABD_ACD(expression_abcd()));
    const auto s = expression_S();
    CHECK(s.classical_bound == 7.0);
    REQUIRE(s.exact.has_value());
    for (std::size_t i = 0; i < 256; ++i) CHECK(s.coefficients[i] == doctest::Approx((*s.exact)[i].get_d()));
}

TEST_CASE("S on the uniform behavior matches a direct sum") {
    const auto s = expression_S();
    double direct = 0;
    for (double c : s.coefficients) direct += c / 16.0;
    CHECK(evaluate_bell(s, Behavior::uniform(4)) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("behavior and expression JSON round trips") {
    std::mt19937_64 rng(9);
    const Behavior b = random_local4(rng);
    const Behavior back = behavior_from_json(to_json(b));
    CHECK(back.table() == b.table());

    const auto s = expression_S();
    const auto e = expression_from_json(to_json(s));
    REQUIRE(e.exact.has_value());
    CHECK(*e.exact == *s.exact);
    CHECK(e.classical_bound == s.classical_bound);

    CHECK_THROWS_AS(behavior_from_json(nlohmann::json{{"n_parties", 2}, {"table", {1, 2}}}), invalid_input);
    CHECK_THROWS_AS(expression_from_json(nlohmann::json{{"n_parties", 4}}), invalid_input);
}
