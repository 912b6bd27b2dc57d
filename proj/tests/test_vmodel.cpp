#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "vcone/error.hpp"
#include "vcone/expressions.hpp"
#include "vcone/polytope.hpp"
#include "vcone/quantum.hpp"
#include "vcone/vmodel.hpp"

using namespace vcone;

namespace {

double max_diff(const Behavior& x, const Behavior& y) {
    double m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::fabs(x.table()[i] - y.table()[i]));
    return m;
}

Geometry two_party(bool a_before_b) {
    Geometry g;
    g.speed_ratio = 2;
    g.events = {{"A", 0, 0}, {"B", 0.1, a_before_b ? 1.0 : 0.0}};
    return g;
}

}  // namespace

TEST_CASE("trivial sequential model reproduces bipartite quantum behaviors") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Behavior target = behavior_from_quantum(random_setup(2, seed));
        const VStrategy s = trivial_sequential_model(target, {0, 1});
        const auto out = simulate(s, two_party(true));
        CHECK(out.ordering == "A<B");
        CHECK(max_diff(out.behavior, target) <= 1e-9);
    }
}

TEST_CASE("trivial sequential model reproduces four-party quantum behaviors along a chain") {
    const auto g = figure3_geometry(2.0);
    const auto sched = randomized_schedule(g, 0.01);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Behavior target = behavior_from_quantum(random_setup(4, seed));
        CHECK(max_diff(simulate(trivial_sequential_model(target, {0, 3, 1, 2}), sched[0]).behavior, target) <= 1e-9);
        CHECK(max_diff(simulate(trivial_sequential_model(target, {0, 3, 2, 1}), sched[1]).behavior, target) <= 1e-9);
    }
}

TEST_CASE("spacelike parties cannot correlate beyond shared randomness") {
    // With A~B a strategy sees no transcript, so the result is local.
    const auto s = random_strategy(2, 3, 5);
    const auto out = simulate(s, two_party(false));
    CHECK(out.ordering == "A~B");
    CHECK(is_no_signalling(out.behavior).pass);
    CHECK(local_membership(out.behavior).member);
}

TEST_CASE("simulation outputs valid behaviors; serial and parallel agree") {
    const auto g = figure3_geometry(2.0);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto s = random_strategy(4, 4, seed);
        const auto a = simulate(s, g);
        const auto b = simulate_serial(s, g);
        a.behavior.validate(1e-12);
        CHECK(a.behavior.table() == b.behavior.table());
        CHECK(a.ordering == "A<B A<C A<D B~C B>D C>D");
    }
}

TEST_CASE("conditional BC|AD behaviors under A<D<(B~C) are local") {
    const auto g = figure3_geometry(2.0);
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const auto b = simulate(random_strategy(4, 3, seed), g).behavior;
        for (const auto& c : conditional_bc_given_ad(b, 1e-15))
            if (c.present) CHECK(local_membership(c.bc).member);
    }
}

TEST_CASE("ABD and ACD marginals agree between sequential and simultaneous configurations") {
    const auto g = figure3_geometry(2.0);
    const auto sched = randomized_schedule(g, 0.01);
    for (std::uint64_t seed = 200; seed < 220; ++seed) {
        const auto s = random_strategy(4, 3, seed);
        const auto abd = marginal_consistency_check(s, sched[0], g, "C");
        CHECK(abd.agree);
        CHECK(abd.max_deviation <= 1e-12);
        const auto acd = marginal_consistency_check(s, sched[1], g, "B");
        CHECK(acd.agree);
    }
    const auto s = random_strategy(4, 2, 1);
    CHECK_THROWS_AS(marginal_consistency_check(s, g, g, "C"), invalid_input);
    CHECK_THROWS_AS(marginal_consistency_check(s, sched[0], g, "D"), invalid_input);
}

TEST_CASE("undefined responses on realizable transcripts are reported") {
    VStrategy s(2, 1);
    const auto g = two_party(true);
    // A is defined, B only for the transcript where A saw setting 0.
    for (unsigned x = 0; x < 2; ++x) s.response[0][s.table_index(0, x, 0, 0, 0)] = 0.5;
    const unsigned a_mask = 0b10;
    for (unsigned y = 0; y < 2; ++y)
        for (unsigned o = 0; o < 4; o += 2) s.response[1][s.table_index(0, y, a_mask, 0, o)] = 1.0;
    CHECK_THROWS_AS(simulate(s, g), totality_error);
    try {
        simulate_serial(s, g);
    } catch (const totality_error& ex) {
        CHECK(std::string(ex.what()).find("party B") != std::string::npos);
    }
    // Filling the gap makes the strategy total.
    VStrategy fill(2, 1);
    for (auto& t : fill.response)
        for (auto& v : t) v = 0.25;
    CHECK_NOTHROW(simulate(merge_strategies(s, fill), g));
}

TEST_CASE("strategy validation") {
    VStrategy s = random_strategy(2, 2, 3);
    s.q = {0.7, 0.7};
    CHECK_THROWS_AS(s.validate(), invalid_input);
    CHECK_THROWS_AS(VStrategy(5, 1), invalid_input);
    CHECK_THROWS_AS(trivial_sequential_model(Behavior::uniform(2), {0, 0}), invalid_input);
}

TEST_CASE("demo on a local target forces no signalling") {
    const auto rep = signalling_demo(mpq_class(2), Behavior::uniform(4), expression_S());
    CHECK_FALSE(rep.signalling_forced);
    CHECK_FALSE(rep.all_certified);
    CHECK(rep.conclusion.find("no signalling forced") != std::string::npos);
    CHECK_THROWS_AS(signalling_demo(mpq_class(1, 2), Behavior::uniform(4), expression_S()), invalid_input);
}

TEST_CASE("demo on a see-saw target certifies every step") {
    SeesawOptions opt;
    opt.restarts = 8;
    const auto e = expression_S();
    const auto q = seesaw_maximize(e, opt);
    REQUIRE(q.value > 7 + 1e-6);
    const auto rep = signalling_demo(mpq_class(2), behavior_from_quantum(q.setup), e);
    REQUIRE(rep.steps.size() == 6);
    for (const auto& s : rep.steps) CHECK_MESSAGE(s.certified, s.name);
    CHECK(rep.signalling_forced);
    CHECK(rep.steps[4].detail["witness"] == "BCD-on-x");
    CHECK(rep.steps[5].detail["effective_speed_exact"] == "37/35");
    const auto again = signalling_demo(mpq_class(2), behavior_from_quantum(q.setup), e);
    CHECK(again.to_json().dump() == rep.to_json().dump());
}
