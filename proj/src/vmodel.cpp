#include "vcone/vmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "vcone/error.hpp"
#include "vcone/polytope.hpp"
#include "vcone/quantum.hpp"

namespace vcone {

namespace {

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

std::string describe_transcript(int party, unsigned setting, unsigned mask, unsigned settings, unsigned outcomes,
                                int n) {
    const auto labels = party_labels(n);
    std::ostringstream os;
    os << "party " << labels[static_cast<std::size_t>(party)] << " setting " << setting << " transcript {";
    bool first = true;
    for (int j = 0; j < n; ++j) {
        if (!bit_of(mask, j, n)) continue;
        os << (first ? "" : ", ") << "(" << labels[static_cast<std::size_t>(j)] << "," << bit_of(settings, j, n) << ","
           << bit_of(outcomes, j, n) << ")";
        first = false;
    }
    os << "}";
    return os.str();
}

struct CausalStructure {
    std::vector<int> order;         // parties sorted so that predecessors come first
    std::vector<unsigned> past;     // past v-cone mask per party
    std::string ordering;
};

CausalStructure causal_structure(int n, const Geometry& g) {
    const auto labels = party_labels(n);
    for (const auto& l : labels) require(g.has(l), "geometry lacks event " + l);
    CausalStructure cs;
    cs.past.assign(static_cast<std::size_t>(n), 0);
    std::ostringstream desc;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto rel = causal_relation(g.at(labels[static_cast<std::size_t>(j)]),
                                             g.at(labels[static_cast<std::size_t>(i)]), g.speed_ratio);
            if (rel == CausalRelation::Before) cs.past[static_cast<std::size_t>(i)] |= 1u << (n - 1 - j);
            if (j > i) {
                const auto r2 = causal_relation(g.at(labels[static_cast<std::size_t>(i)]),
                                                g.at(labels[static_cast<std::size_t>(j)]), g.speed_ratio);
                if (desc.tellp() > 0) desc << ' ';
                desc << labels[static_cast<std::size_t>(i)]
                     << (r2 == CausalRelation::Before ? "<" : r2 == CausalRelation::After ? ">" : "~")
                     << labels[static_cast<std::size_t>(j)];
            }
        }
    cs.ordering = desc.str();
    cs.order.resize(static_cast<std::size_t>(n));
    std::iota(cs.order.begin(), cs.order.end(), 0);
    // Being in the past v-cone implies an earlier time, so sorting by the
    // size of the past cone then index is a topological order.
    std::stable_sort(cs.order.begin(), cs.order.end(), [&](int a, int b) {
        return __builtin_popcount(cs.past[static_cast<std::size_t>(a)]) <
               __builtin_popcount(cs.past[static_cast<std::size_t>(b)]);
    });
    return cs;
}

// Adds the outcome distribution of one setting tuple into `table`.
void simulate_settings(const VStrategy& s, const CausalStructure& cs, unsigned settings, std::vector<double>& row) {
    const int n = s.n_parties;
    for (int lambda = 0; lambda < s.n_lambda(); ++lambda) {
        const double ql = s.q[static_cast<std::size_t>(lambda)];
        if (ql == 0) continue;
        // Depth-first over parties in causal order.
        struct Frame {
            int depth;
            unsigned outcomes;
            double p;
        };
        std::vector<Frame> stack{{0, 0u, ql}};
        while (!stack.empty()) {
            const Frame f = stack.back();
            stack.pop_back();
            if (f.depth == n) {
                row[f.outcomes] += f.p;
                continue;
            }
            const int party = cs.order[static_cast<std::size_t>(f.depth)];
            const unsigned mask = cs.past[static_cast<std::size_t>(party)];
            const unsigned own = bit_of(settings, party, n);
            const std::size_t idx = s.table_index(lambda, own, mask, settings & mask, f.outcomes & mask);
            const double p0 = s.response[static_cast<std::size_t>(party)][idx];
            if (std::isnan(p0))
                throw totality_error("strategy undefined on realizable transcript: " +
                                     describe_transcript(party, own, mask, settings, f.outcomes, n));
            if (f.p * (1 - p0) > 0) stack.push_back({f.depth + 1, with_bit(f.outcomes, party, n, 1), f.p * (1 - p0)});
            if (f.p * p0 > 0) stack.push_back({f.depth + 1, f.outcomes, f.p * p0});
        }
    }
}

SimulationOutcome run_simulation(const VStrategy& s, const Geometry& g, bool parallel) {
    s.validate();
    const int n = s.n_parties;
    const auto cs = causal_structure(n, g);
    SimulationOutcome out;
    out.behavior = Behavior(n);
    out.geometry = g;
    out.ordering = cs.ordering;
    out.past_masks = cs.past;
    const int tuples = 1 << n;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(tuples), std::vector<double>(static_cast<std::size_t>(tuples), 0.0));
    // An exception inside an OpenMP region must not escape it; carry the
    // first message out and rethrow.
    std::string error;
#pragma omp parallel for schedule(static) if (parallel)
    for (int st = 0; st < tuples; ++st) {
        try {
            simulate_settings(s, cs, static_cast<unsigned>(st), rows[static_cast<std::size_t>(st)]);
        } catch (const totality_error& ex) {
#pragma omp critical
            if (error.empty()) error = ex.what();
        }
    }
    if (!error.empty()) throw totality_error(error);
    for (int st = 0; st < tuples; ++st)
        for (int o = 0; o < tuples; ++o)
            out.behavior.at(static_cast<unsigned>(o), static_cast<unsigned>(st)) =
                rows[static_cast<std::size_t>(st)][static_cast<std::size_t>(o)];
    return out;
}

// Sum of P(o|settings) over outcomes of parties outside `keep_mask`,
// other parties' settings taken from `settings`.
double marginal_prob(const Behavior& b, unsigned keep_mask, unsigned outcomes, unsigned settings) {
    const int n = b.n_parties();
    double p = 0;
    for (unsigned o = 0; o < (1u << n); ++o)
        if ((o & keep_mask) == (outcomes & keep_mask)) p += b.at(o, settings);
    return p;
}

}  // namespace

VStrategy::VStrategy(int n, int n_lambda) : n_parties(n) {
    require(n >= 1 && n <= 4, "strategies support 1 to 4 parties");
    require(n_lambda >= 1, "need at least one lambda value");
    q.assign(static_cast<std::size_t>(n_lambda), 1.0 / n_lambda);
    const std::size_t m = std::size_t{1} << n;
    response.assign(static_cast<std::size_t>(n),
                    std::vector<double>(static_cast<std::size_t>(n_lambda) * 2 * m * m * m, kUndefined));
}

std::size_t VStrategy::table_index(int lambda, unsigned setting, unsigned past_mask, unsigned settings,
                                   unsigned outcomes) const {
    const std::size_t m = std::size_t{1} << n_parties;
    return (((static_cast<std::size_t>(lambda) * 2 + setting) * m + past_mask) * m + settings) * m + outcomes;
}

void VStrategy::validate() const {
    require(n_parties >= 1 && n_parties <= 4, "strategies support 1 to 4 parties");
    require(!q.empty(), "strategy needs a lambda support");
    double sum = 0;
    for (double v : q) {
        require(v >= 0 && std::isfinite(v), "lambda weights must be non-negative");
        sum += v;
    }
    require(std::fabs(sum - 1) <= kAlgebraicTol, "lambda weights must sum to 1");
    require(static_cast<int>(response.size()) == n_parties, "need one response table per party");
    for (const auto& t : response) {
        require(t.size() == table_index(n_lambda(), 0, 0, 0, 0), "response table has wrong size");
        for (double v : t) require(std::isnan(v) || (v >= -kAlgebraicTol && v <= 1 + kAlgebraicTol),
                                   "response probabilities must lie in [0,1]");
    }
}

SimulationOutcome simulate(const VStrategy& s, const Geometry& g) { return run_simulation(s, g, true); }

SimulationOutcome simulate_serial(const VStrategy& s, const Geometry& g) { return run_simulation(s, g, false); }

VStrategy trivial_sequential_model(const Behavior& b, const std::vector<int>& chain) {
    const int n = b.n_parties();
    require(static_cast<int>(chain.size()) == n, "chain must order every party");
    {
        auto sorted = chain;
        std::sort(sorted.begin(), sorted.end());
        for (int k = 0; k < n; ++k) require(sorted[static_cast<std::size_t>(k)] == k, "chain must be a permutation");
    }
    VStrategy s(n, 1);
    s.q = {1.0};
    unsigned mask = 0;
    for (int party : chain) {
        const unsigned bitp = 1u << (n - 1 - party);
        // Every transcript over `mask`: predecessor settings and outcomes.
        for (unsigned st = 0; st < (1u << n); ++st) {
            if (st & ~mask) continue;
            for (unsigned o = 0; o < (1u << n); ++o) {
                if (o & ~mask) continue;
                for (unsigned own = 0; own < 2; ++own) {
                    // Parties outside the transcript are marginalized at setting 0,
                    // which is harmless for no-signalling behaviors.
                    const unsigned settings = own ? (st | bitp) : st;
                    const double n0 = marginal_prob(b, mask | bitp, o, settings);
                    const double n1 = marginal_prob(b, mask | bitp, o | bitp, settings);
                    double p0 = 0.5;
                    if (n0 + n1 > 1e-14) {
                        p0 = std::clamp(n0 / (n0 + n1), 0.0, 1.0);
                    } else {
                        ++s.defaulted_entries;
                    }
                    s.response[static_cast<std::size_t>(party)][s.table_index(0, own, mask, st, o)] = p0;
                }
            }
        }
        mask |= bitp;
    }
    return s;
}

VStrategy merge_strategies(const VStrategy& primary, const VStrategy& fallback) {
    require(primary.n_parties == fallback.n_parties && primary.q == fallback.q,
            "merged strategies must share parties and lambda support");
    VStrategy out = primary;
    for (std::size_t p = 0; p < out.response.size(); ++p)
        for (std::size_t i = 0; i < out.response[p].size(); ++i)
            if (std::isnan(out.response[p][i])) out.response[p][i] = fallback.response[p][i];
    out.defaulted_entries = primary.defaulted_entries + fallback.defaulted_entries;
    return out;
}

VStrategy random_strategy(int n_parties, int n_lambda, std::uint64_t seed) {
    VStrategy s(n_parties, n_lambda);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double sum = 0;
    for (auto& v : s.q) sum += (v = u(rng) + 1e-3);
    for (auto& v : s.q) v /= sum;
    for (auto& table : s.response)
        for (auto& v : table) v = u(rng);
    return s;
}

ConsistencyResult marginal_consistency_check(const VStrategy& s, const Geometry& g_seq, const Geometry& g_sim,
                                             const std::string& dropped, double tol) {
    require(s.n_parties == 4, "marginal consistency needs a 4-party strategy");
    require(dropped == "C" || dropped == "B", "dropped party must be B or C");
    const std::string seq_pattern = dropped == "C" ? "A<D<B<C" : "A<D<C<B";
    require(matches(g_seq, seq_pattern), "sequential geometry must realize " + seq_pattern);
    require(matches(g_sim, "A<D<(B~C)"), "simultaneous geometry must realize A<D<(B~C)");

    const Behavior b_seq = simulate(s, g_seq).behavior;
    const Behavior b_sim = simulate(s, g_sim).behavior;
    const int drop = dropped == "C" ? 2 : 1;
    const std::vector<int> keep = dropped == "C" ? std::vector<int>{0, 1, 3} : std::vector<int>{0, 2, 3};

    ConsistencyResult res;
    std::vector<Behavior> seq_m, sim_m;
    for (int setting = 0; setting < 2; ++setting) {
        std::vector<int> fixed(4, 0);
        fixed[static_cast<std::size_t>(drop)] = setting;
        seq_m.push_back(marginal(b_seq, keep, fixed));
        sim_m.push_back(marginal(b_sim, keep, fixed));
        for (std::size_t i = 0; i < seq_m.back().size(); ++i)
            res.max_deviation =
                std::max(res.max_deviation, std::fabs(seq_m.back().table()[i] - sim_m.back().table()[i]));
    }
    for (std::size_t i = 0; i < seq_m[0].size(); ++i)
        res.setting_dependence = std::max({res.setting_dependence, std::fabs(seq_m[0].table()[i] - seq_m[1].table()[i]),
                                           std::fabs(sim_m[0].table()[i] - sim_m[1].table()[i])});
    res.agree = res.max_deviation <= tol && res.setting_dependence <= tol;
    return res;
}

nlohmann::json DemoReport::to_json() const {
    nlohmann::json steps_j = nlohmann::json::array();
    for (const auto& s : steps)
        steps_j.push_back({{"step", s.index}, {"name", s.name}, {"certified", s.certified}, {"detail", s.detail}});
    return {{"r", r},
            {"steps", steps_j},
            {"all_certified", all_certified},
            {"signalling_forced", signalling_forced},
            {"conclusion", conclusion}};
}

DemoReport signalling_demo(const mpq_class& r_exact, const Behavior& target, const BellExpression& expr) {
    require(r_exact > 1, "speed ratio r = v/c must exceed 1");
    require(target.n_parties() == 4 && expr.n_parties == 4, "the demonstration needs 4-party data");
    target.validate(1e-9);
    const double r = r_exact.get_d();
    const ExactGeometry g_exact = figure3_geometry(r_exact);
    const Geometry g = to_double(g_exact);
    const auto schedule = randomized_schedule(g, 0.01);
    const double bound = expr.classical_bound;

    DemoReport rep;
    rep.r = r;
    auto max_diff = [](const Behavior& x, const Behavior& y) {
        double m = 0;
        for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::fabs(x.table()[i] - y.table()[i]));
        return m;
    };

    // (1) B keeps its rule from the A<D<B<C model, C from the A<D<C<B model.
    const VStrategy seq_bc = trivial_sequential_model(target, {0, 3, 1, 2});
    const VStrategy seq_cb = trivial_sequential_model(target, {0, 3, 2, 1});
    const VStrategy strategy = merge_strategies(seq_bc, seq_cb);
    const double dev_bc = max_diff(simulate(strategy, schedule[0]).behavior, target);
    const double dev_cb = max_diff(simulate(strategy, schedule[1]).behavior, target);
    rep.steps.push_back({1, "sequential v-causal models reproduce the target under A<D<B<C and A<D<C<B",
                         dev_bc <= 1e-9 && dev_cb <= 1e-9,
                         {{"max_deviation_A<D<B<C", dev_bc},
                          {"max_deviation_A<D<C<B", dev_cb},
                          {"defaulted_entries", strategy.defaulted_entries}}});

    // (2) The same rules in the reference geometry, where B and C are unrelated.
    const SimulationOutcome sim = simulate(strategy, g);
    const bool fig_ok = matches(g, "A<D<(B~C)");
    rep.steps.push_back({2, "simulate the strategy in the geometry with A<D<(B~C)", fig_ok,
                         {{"ordering", sim.ordering}, {"geometry", to_json(g_exact)}}});

    // (3) ABD and ACD marginals cannot tell the configurations apart.
    const auto abd = marginal_consistency_check(strategy, schedule[0], g, "C");
    const auto acd = marginal_consistency_check(strategy, schedule[1], g, "B");
    const double s_sim = evaluate_bell(expr, sim.behavior);
    const double s_target = evaluate_bell(expr, target);
    const bool violates = s_sim > bound + kLpTol;
    rep.steps.push_back({3, "ABD and ACD marginals match the sequential ones, so S is unchanged",
                         abd.agree && acd.agree && violates,
                         {{"abd_max_deviation", abd.max_deviation},
                          {"acd_max_deviation", acd.max_deviation},
                          {"S_simulated", s_sim},
                          {"S_target", s_target},
                          {"bound", bound},
                          {"exceeds_bound", violates},
                          {"meets_quantum_band", s_sim >= 7.19}}});
    rep.signalling_forced = violates && abd.agree && acd.agree;

    // (4) BC|AD of the simulated behavior is local for every (a,x,d,w).
    const auto conds = conditional_bc_given_ad(sim.behavior, 1e-15);
    bool all_local = true;
    double worst_visibility = 1;
    int present = 0;
    for (const auto& c : conds) {
        if (!c.present) continue;
        ++present;
        const auto m = local_membership(c.bc);
        all_local &= m.member;
        worst_visibility = std::min(worst_visibility, m.visibility);
    }
    rep.steps.push_back({4, "conditional BC|AD correlations are local", all_local,
                         {{"present_conditionals", present}, {"min_visibility", worst_visibility}}});

    // (5) Lemma contrapositive: the simulated behavior must signal.
    const auto ns = is_no_signalling(sim.behavior, 1e-9);
    if (rep.signalling_forced && all_local && ns.pass)
        throw internal_inconsistency("S exceeds the lemma bound on a BC|AD-local behavior that does not signal");
    // The channel of interest runs from A to D', i.e. x changes the BCD
    // marginal; fall back to the largest violation otherwise.
    std::string witness;
    double witness_variation = 0;
    for (const auto& m : ns.report.entries)
        if (m.variation > 1e-9 && (witness.empty() || m.name == "BCD-on-x" ||
                                   (witness != "BCD-on-x" && m.variation > witness_variation))) {
            witness = m.name;
            witness_variation = m.variation;
        }
    const bool located = !ns.pass && !witness.empty();
    rep.steps.push_back({5, "no-signalling fails; violating marginal located",
                         rep.signalling_forced && !ns.pass && located,
                         {{"report", ns.report.to_json()}, {"witness", witness}, {"witness_variation", witness_variation}}});

    // (6) Outcomes of B, C, D meet at D' outside A's light cone.
    const auto meet = broadcast_meeting_events(g_exact);
    const mpq_class speed = effective_speed(g_exact.at("A"), meet.d_prime);
    rep.steps.push_back({6, "broadcast meeting point D' lies outside A's light cone", speed > 1,
                         {{"d_prime", {{"position", meet.d_prime.position.get_d()},
                                       {"time", meet.d_prime.time.get_d()},
                                       {"position_exact", meet.d_prime.position.get_str()},
                                       {"time_exact", meet.d_prime.time.get_str()}}},
                          {"a_prime", {{"position", meet.a_prime.position.get_d()},
                                       {"time", meet.a_prime.time.get_d()},
                                       {"position_exact", meet.a_prime.position.get_str()},
                                       {"time_exact", meet.a_prime.time.get_str()}}},
                          {"effective_speed", speed.get_d()},
                          {"effective_speed_exact", speed.get_str()}}});

    rep.all_certified = std::all_of(rep.steps.begin(), rep.steps.end(), [](const DemoStep& s) { return s.certified; });
    if (!rep.signalling_forced)
        rep.conclusion = "no signalling forced: the target does not exceed the lemma bound";
    else if (rep.all_certified)
        rep.conclusion = "superluminal signalling from A to D' at speed " + std::to_string(speed.get_d()) + " c";
    else
        rep.conclusion = "signalling forced but not every step certified";
    return rep;
}

nlohmann::json to_json(const VStrategy& s) {
    nlohmann::json tables = nlohmann::json::array();
    const auto labels = party_labels(s.n_parties);
    for (int p = 0; p < s.n_parties; ++p) {
        nlohmann::json entries = nlohmann::json::array();
        const unsigned m = 1u << s.n_parties;
        for (int l = 0; l < s.n_lambda(); ++l)
            for (unsigned own = 0; own < 2; ++own)
                for (unsigned mask = 0; mask < m; ++mask)
                    for (unsigned st = 0; st < m; ++st)
                        for (unsigned o = 0; o < m; ++o) {
                            if ((st & ~mask) || (o & ~mask)) continue;
                            const double v = s.response[static_cast<std::size_t>(p)][s.table_index(l, own, mask, st, o)];
                            if (std::isnan(v)) continue;
                            entries.push_back({{"lambda", l},
                                               {"setting", own},
                                               {"past_mask", mask},
                                               {"past_settings", st},
                                               {"past_outcomes", o},
                                               {"p_outcome0", v}});
                        }
        tables.push_back({{"party", labels[static_cast<std::size_t>(p)]}, {"entries", entries}});
    }
    return {{"n_parties", s.n_parties},
            {"q", s.q},
            {"defaulted_entries", s.defaulted_entries},
            {"responses", tables}};
}

}  // namespace vcone
