#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "vcone/error.hpp"
#include "vcone/expressions.hpp"
#include "vcone/polytope.hpp"

using namespace vcone;

namespace {

Behavior pr_box_mixed(double t) {
    Behavior b(2);
    for (unsigned o = 0; o < 4; ++o)
        for (unsigned s = 0; s < 4; ++s) {
            const unsigned a = o >> 1, bb = o & 1, x = s >> 1, y = s & 1;
            b.at(o, s) = t * (((a ^ bb) == (x & y)) ? 0.5 : 0.0) + (1 - t) * 0.25;
        }
    return b;
}

// Local maximum over deterministic strategies of all n parties.
double brute_force_local(const BellExpression& e) {
    const int n = e.n_parties;
    double best = -1e300;
    for (unsigned f = 0; f < (1u << (2 * n)); ++f) {
        double v = 0;
        for (unsigned s = 0; s < (1u << n); ++s) {
            unsigned o = 0;
            for (int p = 0; p < n; ++p) o = with_bit(o, p, n, (f >> (2 * p + bit_of(s, p, n))) & 1u);
            v += e.coefficients[Behavior::index(n, o, s)];
        }
        best = std::max(best, v);
    }
    return best;
}

// Upper bound on the Lemma program: drop the no-signalling rows, so each
// (x,w) row independently picks its best (a, d, deterministic BC).
double relaxed_lemma(const BellExpression& e) {
    double total = 0;
    for (unsigned x = 0; x < 2; ++x)
        for (unsigned w = 0; w < 2; ++w) {
            double best = -1e300;
            for (unsigned a = 0; a < 2; ++a)
                for (unsigned d = 0; d < 2; ++d)
                    for (int l = 0; l < 16; ++l) {
                        const auto st = DeterministicStrategy::from_index(l);
                        double v = 0;
                        for (unsigned y = 0; y < 2; ++y)
                            for (unsigned z = 0; z < 2; ++z) {
                                const unsigned o = (a << 3) | (static_cast<unsigned>(st.b[y]) << 2) |
                                                   (static_cast<unsigned>(st.c[z]) << 1) | d;
                                const unsigned s = (x << 3) | (y << 2) | (z << 1) | w;
                                v += e.coefficients[Behavior::index(4, o, s)];
                            }
                        best = std::max(best, v);
                    }
            total += best;
        }
    return total;
}

}  // namespace

TEST_CASE("simplex on a small textbook problem") {
    // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
    LinearProgram<double> p;
    p.objective = {3, 5};
    p.le_rows = {{1, 0}, {0, 2}, {3, 2}};
    p.le_rhs = {4, 12, 18};
    const auto r = solve_lp(p);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.value == doctest::Approx(36));
    CHECK(r.primal[0] == doctest::Approx(2));
    CHECK(r.primal[1] == doctest::Approx(6));
    double dual_obj = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r.dual_le[i] >= -1e-12);
        dual_obj += r.dual_le[i] * p.le_rhs[i];
    }
    CHECK(dual_obj == doctest::Approx(36));

    const auto ex = solve_lp_exact(to_exact(p));
    REQUIRE(ex.status == LPStatus::Optimal);
    CHECK(ex.value == 36);
}

TEST_CASE("simplex with equalities, upper bounds and degenerate rows") {
    // max x + y + z, x + y + z = 1 (twice, redundant), x <= 1/3 upper, y - z <= 0
    LinearProgram<mpq_class> p;
    p.objective = {1, 1, 1};
    p.eq_rows = {{1, 1, 1}, {2, 2, 2}};
    p.eq_rhs = {1, 2};
    p.le_rows = {{0, 1, -1}};
    p.le_rhs = {0};
    p.upper = {mpq_class(1, 3), std::nullopt, std::nullopt};
    const auto r = solve_lp_exact(p);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.value == 1);
    CHECK(r.primal[0] <= mpq_class(1, 3));
}

TEST_CASE("simplex reports infeasible and unbounded problems") {
    LinearProgram<double> inf;
    inf.objective = {1};
    inf.eq_rows = {{1}};
    inf.eq_rhs = {-1};
    CHECK(solve_lp(inf).status == LPStatus::Infeasible);
    CHECK(solve_lp_exact(to_exact(inf)).status == LPStatus::Infeasible);

    LinearProgram<double> unb;
    unb.objective = {1, 0};
    unb.le_rows = {{-1, 1}};
    unb.le_rhs = {1};
    CHECK(solve_lp(unb).status == LPStatus::Unbounded);
    CHECK(solve_lp_exact(to_exact(unb)).status == LPStatus::Unbounded);

    LinearProgram<double> bad;
    bad.objective = {1, 2};
    bad.le_rows = {{1}};
    bad.le_rhs = {1};
    CHECK_THROWS_AS(solve_lp(bad), invalid_input);
}

TEST_CASE("random LPs: float and exact paths agree and certificates hold") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> coef(-5, 9);
    for (int t = 0; t < 30; ++t) {
        const int n = 6, m = 5;
        LinearProgram<double> p;
        for (int j = 0; j < n; ++j) p.objective.push_back(coef(rng));
        for (int i = 0; i < m; ++i) {
            std::vector<double> row;
            for (int j = 0; j < n; ++j) row.push_back(std::abs(coef(rng)) + 1);
            p.le_rows.push_back(row);
            p.le_rhs.push_back(10 + std::abs(coef(rng)));
        }
        p.eq_rows = {std::vector<double>(n, 1.0)};
        p.eq_rhs = {2};
        const auto f = solve_lp(p);
        const auto e = solve_lp_exact(to_exact(p));
        REQUIRE(f.status == e.status);
        if (f.status != LPStatus::Optimal) continue;
        CHECK(f.value == doctest::Approx(e.value.get_d()).epsilon(1e-9));
        // Weak duality with the exact certificate.
        mpq_class dual = e.dual_eq[0] * 2;
        for (int i = 0; i < m; ++i) {
            CHECK(e.dual_le[static_cast<std::size_t>(i)] >= 0);
            dual += e.dual_le[static_cast<std::size_t>(i)] * mpq_class(p.le_rhs[static_cast<std::size_t>(i)]);
        }
        CHECK(dual == e.value);
    }
}

TEST_CASE("deterministic strategies") {
    const auto all = enumerate_strategies();
    REQUIRE(all.size() == 16);
    std::set<std::vector<double>> tables;
    for (int l = 0; l < 16; ++l) {
        CHECK(all[static_cast<std::size_t>(l)].index() == l);
        CHECK(DeterministicStrategy::from_index(l).index() == l);
        const Behavior b = all[static_cast<std::size_t>(l)].behavior();
        b.validate();
        tables.insert(b.table());
    }
    CHECK(tables.size() == 16);
    const auto s = DeterministicStrategy::from_index(0b1001);
    CHECK(s.b[0] == 1);
    CHECK(s.b[1] == 0);
    CHECK(s.c[0] == 0);
    CHECK(s.c[1] == 1);
}

TEST_CASE("CHSH local bound is 2 by vertex enumeration") {
    const auto chsh = expression_chsh();
    CHECK(max_bell_local(chsh) == doctest::Approx(2.0));
    CHECK(brute_force_local(chsh) == doctest::Approx(2.0));
}

TEST_CASE("local membership: noisy PR box is local up to visibility 1/2") {
    for (double t : {0.0, 0.2, 0.49, 0.5}) {
        const auto m = local_membership(pr_box_mixed(t));
        CHECK_MESSAGE(m.member, t);
        double sum = 0;
        for (double q : m.weights) {
            CHECK(q >= -1e-12);
            sum += q;
        }
        CHECK(sum == doctest::Approx(1.0));
    }
    for (double t : {0.51, 0.8, 1.0}) {
        const auto m = local_membership(pr_box_mixed(t));
        CHECK_FALSE(m.member);
        CHECK(m.visibility == doctest::Approx(0.5 / t).epsilon(1e-7));
        CHECK(m.certificate_value > m.certificate_bound + 1e-9);
        CHECK(max_bell_local(m.certificate) == doctest::Approx(m.certificate_bound).epsilon(1e-7));
    }
    for (const auto& s : enumerate_strategies()) CHECK(local_membership(s.behavior()).member);
}

TEST_CASE("Lemma program: S is bounded by 7, exactly") {
    const auto s = expression_S();
    const auto f = lemma_polytope_max(s);
    REQUIRE(f.status == LPStatus::Optimal);
    CHECK(std::fabs(f.value - 7.0) <= 1e-6);
    const auto e = lemma_polytope_max_exact(s);
    REQUIRE(e.status == LPStatus::Optimal);
    CHECK(e.value == 7);

    // The optimizer is a valid, no-signalling behavior with S = 7.
    const Behavior b = behavior_from_u(f.primal);
    b.validate(1e-9);
    CHECK(is_no_signalling(b, 1e-9).pass);
    CHECK(evaluate_bell(s, b) == doctest::Approx(7.0).epsilon(1e-9));

    // Local deterministic strategies reach the bound too.
    CHECK(brute_force_local(s) == doctest::Approx(7.0));
    CHECK_THROWS_AS(max_bell_local(s), invalid_input);
}

TEST_CASE("Lemma program on the four-body correlator matches brute-force bounds") {
    const auto e = expression_abcd();
    const double lower = brute_force_local(e);
    const double upper = relaxed_lemma(e);
    REQUIRE(lower == doctest::Approx(upper));
    const auto f = lemma_polytope_max(e);
    REQUIRE(f.status == LPStatus::Optimal);
    CHECK(f.value == doctest::Approx(lower));
    CHECK(lemma_polytope_max_exact(e).value == mpq_class(static_cast<long>(std::lround(lower))));
}

TEST_CASE("Lemma program on the zero expression is 0") {
    const auto z = BellExpression::from_exact("zero", 4, std::vector<mpq_class>(256, 0));
    CHECK(lemma_polytope_max(z).value == doctest::Approx(0.0));
    CHECK(lemma_polytope_max_exact(z).value == 0);
}

TEST_CASE("Lemma program sits between the local and relaxed values on random expressions") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> c(-3, 3);
    for (int t = 0; t < 5; ++t) {
        std::vector<mpq_class> coefs(256);
        for (auto& v : coefs) v = c(rng);
        const auto e = BellExpression::from_exact("random", 4, coefs);
        const auto f = lemma_polytope_max(e);
        REQUIRE(f.status == LPStatus::Optimal);
        CHECK(f.value >= brute_force_local(e) - 1e-9);
        CHECK(f.value <= relaxed_lemma(e) + 1e-9);
        CHECK(lemma_polytope_max_exact(e).value.get_d() == doctest::Approx(f.value).epsilon(1e-9));
    }
}

TEST_CASE("v-causal configuration maxima") {
    const auto s = expression_S();
    CHECK(vcausal_config_max(s, "A<D<(B~C)", true) == doctest::Approx(7.0).epsilon(1e-9));
    const double seq = vcausal_config_max(s, "A<D<B<C");
    CHECK(seq >= 7.0 - 1e-9);
    CHECK_THROWS_AS(vcausal_config_max(s, "A<B<C<D", true), invalid_input);
}
