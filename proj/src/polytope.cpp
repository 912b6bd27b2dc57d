#include "vcone/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vcone/error.hpp"
#include "vcone/spacetime.hpp"

namespace vcone {

DeterministicStrategy DeterministicStrategy::from_index(int l) {
    require(l >= 0 && l < 16, "strategy index out of range");
    return {{(l >> 3) & 1, (l >> 2) & 1}, {(l >> 1) & 1, l & 1}};
}

int DeterministicStrategy::index() const { return (b[0] << 3) | (b[1] << 2) | (c[0] << 1) | c[1]; }

Behavior DeterministicStrategy::behavior() const {
    Behavior out(2);
    for (unsigned y = 0; y < 2; ++y)
        for (unsigned z = 0; z < 2; ++z)
            out.at((static_cast<unsigned>(b[y]) << 1) | static_cast<unsigned>(c[z]), (y << 1) | z) = 1.0;
    return out;
}

std::vector<DeterministicStrategy> enumerate_strategies() {
    std::vector<DeterministicStrategy> out;
    for (int l = 0; l < 16; ++l) out.push_back(DeterministicStrategy::from_index(l));
    return out;
}

MembershipResult local_membership(const Behavior& bc, double tol) {
    require(bc.n_parties() == 2, "local_membership needs a bipartite behavior");
    // maximize t  s.t.  sum_l q_l D_l - t (P - U) = U,  q >= 0,  0 <= t <= 1.
    // Rows sum to one per setting, so sum_l q_l = 1 is implied.
    const auto strategies = enumerate_strategies();
    LinearProgram<double> lp;
    lp.objective.assign(17, 0.0);
    lp.objective[16] = 1.0;
    lp.upper.assign(17, std::nullopt);
    lp.upper[16] = 1.0;
    for (std::size_t i = 0; i < 16; ++i) {
        std::vector<double> row(17, 0.0);
        for (int l = 0; l < 16; ++l) row[static_cast<std::size_t>(l)] = strategies[static_cast<std::size_t>(l)].behavior().table()[i];
        row[16] = -(bc.table()[i] - 0.25);
        lp.eq_rows.push_back(row);
        lp.eq_rhs.push_back(0.25);
    }
    const auto res = solve_lp(lp);
    if (res.status != LPStatus::Optimal)
        throw internal_inconsistency("local membership LP failed: " + to_string(res.status) + " " + res.message);

    MembershipResult out;
    out.visibility = res.value;
    out.member = res.value >= 1.0 - tol;
    if (out.member) {
        out.weights.assign(res.primal.begin(), res.primal.begin() + 16);
        return out;
    }
    // Separating inequality f = -y: f.D_l <= 0 for every vertex, f.P > 0.
    out.certificate.name = "local-separator";
    out.certificate.n_parties = 2;
    for (double y : res.dual_eq) out.certificate.coefficients.push_back(-y);
    out.certificate_bound = max_bell_local(out.certificate);
    out.certificate.classical_bound = out.certificate_bound;
    out.certificate_value = evaluate_bell(out.certificate, bc);
    return out;
}

double max_bell_local(const BellExpression& e) {
    require(e.n_parties == 2 && e.coefficients.size() == 16, "max_bell_local needs a bipartite expression");
    double best = -INFINITY;
    for (const auto& s : enumerate_strategies()) best = std::max(best, evaluate_bell(e, s.behavior()));
    return best;
}

// The lemma set (no-signalling behaviors with local BC|AD conditionals) as a
// linear program.
//
// Condition (a) asks for P(bc|yz,axdw) = sum_l q(l|axdw) D_l(b|y) D_l(c|z)
// whenever P(ad|xw) > 0, i.e.
//     P(abcd|xyzw) = P(ad|xw) sum_l q(l|axdw) D_l(b|y) D_l(c|z).
// The product P(ad|xw) q(l|axdw) is bilinear, but substituting
//     u(a,x,d,w,l) := P(ad|xw) q(l|axdw) >= 0
// makes P linear in u, and conversely any u >= 0 gives back
// P(ad|xw) = sum_l u and q = u / P(ad|xw) wherever that sum is positive
// (cells with zero weight are unconstrained by (a)).  Normalization of P
// becomes sum_{a,d,l} u = 1 for each (x,w).  Condition (b), no-signalling,
// is linear in P and so in u.  For parties B and C it holds identically
// (summing D_l(b|y) over b gives 1 for either y), which leaves the rows for
// A and D.  The Bell objective is linear in P and hence in u.
namespace {

template <class T>
LinearProgram<T> build_lemma(const std::vector<T>& coef) {
    require(coef.size() == 256, "lemma program needs a 4-party expression");
    const auto strategies = enumerate_strategies();
    auto d = [&](int l, int y, int z, int b, int c) {
        const auto& s = strategies[static_cast<std::size_t>(l)];
        return s.b[static_cast<std::size_t>(y)] == b && s.c[static_cast<std::size_t>(z)] == c;
    };
    LinearProgram<T> lp;
    lp.objective.assign(256, T(0));
    for (int a = 0; a < 2; ++a)
        for (int x = 0; x < 2; ++x)
            for (int dd = 0; dd < 2; ++dd)
                for (int w = 0; w < 2; ++w)
                    for (int l = 0; l < 16; ++l) {
                        T v(0);
                        for (int b = 0; b < 2; ++b)
                            for (int c = 0; c < 2; ++c)
                                for (int y = 0; y < 2; ++y)
                                    for (int z = 0; z < 2; ++z)
                                        if (d(l, y, z, b, c)) {
                                            const auto o = static_cast<unsigned>((a << 3) | (b << 2) | (c << 1) | dd);
                                            const auto s = static_cast<unsigned>((x << 3) | (y << 2) | (z << 1) | w);
                                            v += coef[Behavior::index(4, o, s)];
                                        }
                        lp.objective[static_cast<std::size_t>(u_index(a, x, dd, w, l))] = v;
                    }

    for (int x = 0; x < 2; ++x)
        for (int w = 0; w < 2; ++w) {
            std::vector<T> row(256, T(0));
            for (int a = 0; a < 2; ++a)
                for (int dd = 0; dd < 2; ++dd)
                    for (int l = 0; l < 16; ++l) row[static_cast<std::size_t>(u_index(a, x, dd, w, l))] = T(1);
            lp.eq_rows.push_back(row);
            lp.eq_rhs.push_back(T(1));
        }

    // sum_a P(abcd|0yzw) - sum_a P(abcd|1yzw) = 0 and the same for d.
    std::map<std::vector<int>, bool> seen;
    for (int party : {0, 3}) {
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int other = 0; other < 2; ++other)  // outcome of the other of A/D
                    for (int y = 0; y < 2; ++y)
                        for (int z = 0; z < 2; ++z)
                            for (int os = 0; os < 2; ++os) {  // setting of the other of A/D
                                std::vector<int> row(256, 0);
                                for (int o = 0; o < 2; ++o)
                                    for (int s = 0; s < 2; ++s)
                                        for (int l = 0; l < 16; ++l) {
                                            if (!d(l, y, z, b, c)) continue;
                                            const int a = party == 0 ? o : other, x = party == 0 ? s : os;
                                            const int dd = party == 0 ? other : o, w = party == 0 ? os : s;
                                            row[static_cast<std::size_t>(u_index(a, x, dd, w, l))] += s == 0 ? 1 : -1;
                                        }
                                // Identical rows arise for different (y,z) once
                                // strategies are summed; keep one copy.
                                if (seen.emplace(row, true).second) {
                                    std::vector<T> trow;
                                    for (int v : row) trow.push_back(T(v));
                                    lp.eq_rows.push_back(trow);
                                    lp.eq_rhs.push_back(T(0));
                                }
                            }
    }
    return lp;
}

}  // namespace

LinearProgram<double> lemma_program(const BellExpression& e) { return build_lemma<double>(e.coefficients); }

LinearProgram<mpq_class> lemma_program_exact(const BellExpression& e) {
    return build_lemma<mpq_class>(e.exact_coefficients());
}

Behavior behavior_from_u(const std::vector<double>& u) {
    require(u.size() == 256, "u-vector must have 256 entries");
    const auto strategies = enumerate_strategies();
    Behavior p(4);
    for (int a = 0; a < 2; ++a)
        for (int x = 0; x < 2; ++x)
            for (int d = 0; d < 2; ++d)
                for (int w = 0; w < 2; ++w)
                    for (int l = 0; l < 16; ++l) {
                        const double v = u[static_cast<std::size_t>(u_index(a, x, d, w, l))];
                        if (v == 0) continue;
                        const auto& s = strategies[static_cast<std::size_t>(l)];
                        for (int y = 0; y < 2; ++y)
                            for (int z = 0; z < 2; ++z) {
                                const auto o = static_cast<unsigned>((a << 3) | (s.b[static_cast<std::size_t>(y)] << 2) |
                                                                     (s.c[static_cast<std::size_t>(z)] << 1) | d);
                                const auto st = static_cast<unsigned>((x << 3) | (y << 2) | (z << 1) | w);
                                p.at(o, st) += v;
                            }
                    }
    return p;
}

LPResult<double> lemma_polytope_max(const BellExpression& e) { return solve_lp(lemma_program(e)); }

LPResult<mpq_class> lemma_polytope_max_exact(const BellExpression& e) {
    return solve_lp_exact(lemma_program_exact(e));
}

double vcausal_config_max(const BellExpression& e, const std::string& pattern, bool no_signalling) {
    const int n = e.n_parties;
    require(n >= 2 && n <= 4 && e.coefficients.size() == (std::size_t{1} << (2 * n)), "bad expression arity");
    const auto groups = parse_ordering_pattern(pattern);
    const auto labels = party_labels(n);

    std::vector<int> group_of(static_cast<std::size_t>(n), -1);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (const auto& label : groups[g]) {
            const auto it = std::find(labels.begin(), labels.end(), label);
            require(it != labels.end(), "pattern label " + label + " is not a party of the expression");
            const auto p = static_cast<std::size_t>(it - labels.begin());
            require(group_of[p] < 0, "party " + label + " appears twice in pattern");
            group_of[p] = static_cast<int>(g);
        }
    for (int p = 0; p < n; ++p)
        require(group_of[static_cast<std::size_t>(p)] >= 0, "pattern must mention every party");

    if (no_signalling) {
        const auto normalized = groups.size() == 3 && groups[0] == std::vector<std::string>{"A"} &&
                                groups[1] == std::vector<std::string>{"D"} && groups[2].size() == 2;
        require(n == 4 && normalized, "no-signalling maximization is supported for A<D<(B~C) only");
        const auto r = lemma_polytope_max(e);
        if (r.status != LPStatus::Optimal) throw internal_inconsistency("lemma LP failed: " + r.message);
        return r.value;
    }

    // Every party in an earlier group precedes every party in a later one.
    // Earlier parties are enumerated as deterministic functions of their own
    // setting and all predecessors' settings (predecessor outcomes are
    // themselves functions of those).  The last group sees everything before
    // it, so its members' responses are optimized block by block, one block
    // per assignment of the earlier settings.
    const int last = static_cast<int>(groups.size()) - 1;
    std::vector<int> early, final_group;
    for (int g = 0; g <= last; ++g)
        for (int p = 0; p < n; ++p)
            if (group_of[static_cast<std::size_t>(p)] == g) (g == last ? final_group : early).push_back(p);

    std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
    for (int p : early)
        for (int q : early)
            if (group_of[static_cast<std::size_t>(q)] < group_of[static_cast<std::size_t>(p)])
                preds[static_cast<std::size_t>(p)].push_back(q);

    std::vector<unsigned long> n_funcs;
    double total_combos = 1;
    for (int p : early) {
        const auto inputs = 1u << (1 + preds[static_cast<std::size_t>(p)].size());
        n_funcs.push_back(1ul << inputs);
        total_combos *= static_cast<double>(1ul << inputs);
    }
    require(total_combos <= 2e7, "pattern needs too many deterministic strategies to enumerate");

    unsigned early_mask = 0;
    for (int p : early) early_mask |= 1u << (n - 1 - p);
    const unsigned tuples = 1u << n;
    const int fsize = static_cast<int>(final_group.size());
    const unsigned final_combos = 1u << (2 * fsize);  // each final party: 4 response functions

    std::vector<unsigned long> func(early.size(), 0);
    double best = -INFINITY;
    for (;;) {
        double total = 0;
        // Block over earlier settings: settings tuples sharing the early bits.
        for (unsigned se = 0; se < tuples; ++se) {
            if ((se & ~early_mask) != 0) continue;
            unsigned early_out = 0;
            for (std::size_t k = 0; k < early.size(); ++k) {
                const int p = early[k];
                unsigned input = bit_of(se, p, n);
                for (int q : preds[static_cast<std::size_t>(p)]) input = (input << 1) | bit_of(se, q, n);
                early_out = with_bit(early_out, p, n, static_cast<unsigned>((func[k] >> input) & 1ul));
            }
            double block_best = -INFINITY;
            for (unsigned combo = 0; combo < final_combos; ++combo) {
                double v = 0;
                for (unsigned sf = 0; sf < tuples; ++sf) {
                    if ((sf & early_mask) != 0) continue;
                    unsigned out = early_out;
                    for (int k = 0; k < fsize; ++k) {
                        const int p = final_group[static_cast<std::size_t>(k)];
                        const unsigned resp = (combo >> (2 * k)) & 3u;  // bit s of resp = f_p(s)
                        out = with_bit(out, p, n, (resp >> bit_of(sf, p, n)) & 1u);
                    }
                    v += e.coefficients[Behavior::index(n, out, se | sf)];
                }
                block_best = std::max(block_best, v);
            }
            total += block_best;
        }
        best = std::max(best, total);
        std::size_t k = 0;
        while (k < func.size() && ++func[k] == n_funcs[k]) func[k++] = 0;
        if (k == func.size()) break;
    }
    return best;
}

}  // namespace vcone
