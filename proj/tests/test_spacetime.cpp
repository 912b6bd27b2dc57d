#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "vcone/error.hpp"
#include "vcone/spacetime.hpp"

using namespace vcone;

namespace {

// Earliest time at which the future light cones of the given events share a
// point, found by bisection on the interval intersection; independent of the
// library's candidate enumeration.
std::pair<double, double> earliest_common_point(const std::vector<Event>& evs) {
    auto gap = [&](double t) {
        double lo = -1e300, hi = 1e300;
        for (const auto& e : evs) {
            if (t < e.time) return -1.0;
            lo = std::max(lo, e.position - (t - e.time));
            hi = std::min(hi, e.position + (t - e.time));
        }
        return hi - lo;
    };
    double a = 0, b = 10;
    for (int k = 0; k < 200; ++k) {
        const double m = (a + b) / 2;
        (gap(m) >= 0 ? b : a) = m;
    }
    double lo = -1e300;
    for (const auto& e : evs) lo = std::max(lo, e.position - (b - e.time));
    return {lo, b};
}

}  // namespace

TEST_CASE("geometry at r = 2 has the stated rational coordinates") {
    const auto g = figure3_geometry(mpq_class(2));
    CHECK(g.at("A").position == 0);
    CHECK(g.at("A").time == 0);
    CHECK(g.at("B").position == mpq_class(17, 24));
    CHECK(g.at("B").time == mpq_class(2, 3));
    CHECK(g.at("C").position == mpq_class(19, 24));
    CHECK(g.at("C").time == mpq_class(2, 3));
    CHECK(g.at("D").position == 1);
    CHECK(g.at("D").time == mpq_class(1, 2));
    CHECK(matches(g, "A<D<(B∼C)"));
    CHECK(matches(g, "A<D<(B~C)"));
    CHECK_FALSE(matches(g, "A<D<B<C"));
}

TEST_CASE("geometry realizes A<D<(B~C) over a range of r") {
    for (const char* r : {"1.001", "1.1", "1.5", "2", "3.7", "10", "100", "1000"}) {
        const auto g = figure3_geometry(parse_rational(r));
        CHECK_MESSAGE(matches(g, "A<D<(B~C)"), r);
        const auto gd = figure3_geometry(parse_rational(r).get_d());
        CHECK_MESSAGE(matches(gd, "A<D<(B~C)"), r);
    }
}

TEST_CASE("geometry rejects r <= 1") {
    CHECK_THROWS_AS(figure3_geometry(mpq_class(1)), invalid_input);
    CHECK_THROWS_AS(figure3_geometry(mpq_class(1, 2)), invalid_input);
    CHECK_THROWS_AS(figure3_geometry(0.9), invalid_input);
}

TEST_CASE("v-cone boundary counts as inside") {
    const ExactEvent a{"A", 0, 0};
    const ExactEvent on{"X", 2, 1};
    const ExactEvent off{"Y", mpq_class(2) + mpq_class(1, 1000000), 1};
    CHECK(causal_relation(a, on, mpq_class(2)) == CausalRelation::Before);
    CHECK(causal_relation(on, a, mpq_class(2)) == CausalRelation::After);
    CHECK(causal_relation(a, off, mpq_class(2)) == CausalRelation::Unrelated);
}

TEST_CASE("causal relation is antisymmetric on random events") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 1000; ++k) {
        const Event e1{"P", u(rng), u(rng)};
        const Event e2{"Q", u(rng), u(rng)};
        const double r = 1 + 5 * (u(rng) + 1);
        const auto r12 = causal_relation(e1, e2, r);
        const auto r21 = causal_relation(e2, e1, r);
        if (r12 == CausalRelation::Before) CHECK(r21 == CausalRelation::After);
        if (r12 == CausalRelation::After) CHECK(r21 == CausalRelation::Before);
        if (r12 == CausalRelation::Unrelated) CHECK(r21 == CausalRelation::Unrelated);
    }
}

TEST_CASE("broadcast meeting point at r = 2") {
    const auto g = figure3_geometry(mpq_class(2));
    const auto m = broadcast_meeting_events(g);
    CHECK(m.d_prime.position == mpq_class(37, 48));
    CHECK(m.d_prime.time == mpq_class(35, 48));
    CHECK(m.a_prime.position == mpq_class(35, 48));
    CHECK(m.a_prime.time == mpq_class(35, 48));
    CHECK(effective_speed(g.at("A"), m.d_prime) == mpq_class(37, 35));
}

TEST_CASE("meeting point agrees with a bisection oracle and stays superluminal") {
    for (double r : {1.1, 1.5, 2.0, 3.0, 10.0, 100.0}) {
        const auto g = figure3_geometry(r);
        const auto m = broadcast_meeting_events(g);
        const auto [x, t] = earliest_common_point({g.at("B"), g.at("C"), g.at("D")});
        CHECK(m.d_prime.time == doctest::Approx(t).epsilon(1e-9));
        CHECK(m.d_prime.position == doctest::Approx(x).epsilon(1e-9));
        CHECK(effective_speed(g.at("A"), m.d_prime) > 1);
        const auto ge = figure3_geometry(parse_rational(std::to_string(r)));
        CHECK(effective_speed(ge.at("A"), broadcast_meeting_events(ge).d_prime) > 1);
    }
}

TEST_CASE("randomized schedule realizes the three orderings") {
    const auto g = figure3_geometry(mpq_class(2));
    const auto s = randomized_schedule(g, mpq_class(1, 100));
    REQUIRE(s.size() == 3);
    CHECK(matches(s[0], "A<D<B<C"));
    CHECK(matches(s[1], "A<D<C<B"));
    CHECK(matches(s[2], "A<D<(B~C)"));
    const auto z = randomized_schedule(g, mpq_class(0));
    REQUIRE(z.size() == 3);
    for (const auto& c : z) CHECK(c.at("B").time == g.at("B").time);
    CHECK_THROWS_AS(randomized_schedule(g, mpq_class(-1, 100)), invalid_input);
}

TEST_CASE("rational parsing") {
    CHECK(parse_rational("2") == 2);
    CHECK(parse_rational("-1.25") == mpq_class(-5, 4));
    CHECK(parse_rational("7/3") == mpq_class(7, 3));
    CHECK(parse_rational("1e-3") == mpq_class(1, 1000));
    CHECK(parse_rational("1.1") == mpq_class(11, 10));
    CHECK_THROWS_AS(parse_rational("abc"), invalid_input);
    CHECK_THROWS_AS(parse_rational("1/0"), invalid_input);
}

TEST_CASE("ordering patterns") {
    const auto groups = parse_ordering_pattern("A<D<(B∼C)");
    REQUIRE(groups.size() == 3);
    CHECK(groups[2] == std::vector<std::string>{"B", "C"});
    CHECK_THROWS_AS(parse_ordering_pattern("A<<B"), invalid_input);
    const auto ord = ordering(figure3_geometry(mpq_class(2)));
    CHECK(ord.at({"B", "C"}) == CausalRelation::Unrelated);
    CHECK(ord.at({"A", "D"}) == CausalRelation::Before);
}

TEST_CASE("geometry JSON round trip") {
    const auto g = to_double(figure3_geometry(mpq_class(3)));
    const auto back = geometry_from_json(to_json(g));
    CHECK(back.speed_ratio == g.speed_ratio);
    REQUIRE(back.events.size() == g.events.size());
    for (std::size_t k = 0; k < g.events.size(); ++k) {
        CHECK(back.events[k].label == g.events[k].label);
        CHECK(back.events[k].position == g.events[k].position);
        CHECK(back.events[k].time == g.events[k].time);
    }
    CHECK_THROWS(geometry_from_json(nlohmann::json{{"events", 3}}));
}
