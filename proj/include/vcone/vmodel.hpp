#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "vcone/correlations.hpp"
#include "vcone/spacetime.hpp"

namespace vcone {

// A v-causal strategy: shared randomness lambda with weights q(lambda) and,
// per party, a response table giving P(own outcome = 0) as a function of
// (lambda, own setting, transcript).  A transcript is the set of parties in
// the responder's past v-cone together with their settings and outcomes; it
// is the only channel through which a rule can see other parties.  Entries
// that are NaN are undefined; reaching one during simulation is an error.
struct VStrategy {
    int n_parties = 0;
    std::vector<double> q;                      // lambda weights
    std::vector<std::vector<double>> response;  // [party][table_index(...)]
    std::size_t defaulted_entries = 0;          // zero-probability branches set to uniform

    VStrategy() = default;
    VStrategy(int n, int n_lambda);

    std::size_t table_index(int lambda, unsigned setting, unsigned past_mask, unsigned settings,
                            unsigned outcomes) const;
    int n_lambda() const { return static_cast<int>(q.size()); }
    void validate() const;
};

struct SimulationOutcome {
    Behavior behavior;
    Geometry geometry;
    std::string ordering;              // pairwise relations, e.g. "A<B A<C B~C"
    std::vector<unsigned> past_masks;  // per party, bitmask of its past v-cone
};

// Exact enumeration over lambda and outcomes in causal order.
SimulationOutcome simulate(const VStrategy& s, const Geometry& g);
// Serial reference of simulate (the default version splits setting tuples
// across OpenMP threads).
SimulationOutcome simulate_serial(const VStrategy& s, const Geometry& g);

// Party chain[k] answers with P(o | s, outcomes and settings of chain[0..k-1])
// computed from nested conditionals of the behavior.  Transcripts whose
// conditioning event has zero probability get the uniform response and are
// counted in defaulted_entries.
VStrategy trivial_sequential_model(const Behavior& b, const std::vector<int>& chain);

// Fills every undefined entry of `primary` from `fallback`.
VStrategy merge_strategies(const VStrategy& primary, const VStrategy& fallback);

VStrategy random_strategy(int n_parties, int n_lambda, std::uint64_t seed);

struct ConsistencyResult {
    bool agree = false;
    double max_deviation = 0;        // sequential vs simultaneous marginal
    double setting_dependence = 0;   // dependence of the kept marginal on the dropped party's setting
};

// Compares the marginal that drops `dropped` ("C": ABD, needs g_seq with
// A<D<B<C; "B": ACD, needs A<D<C<B) between g_seq and g_sim (A<D<(B~C)).
ConsistencyResult marginal_consistency_check(const VStrategy& s, const Geometry& g_seq, const Geometry& g_sim,
                                             const std::string& dropped = "C", double tol = kAlgebraicTol);

struct DemoStep {
    int index = 0;
    std::string name;
    bool certified = false;
    nlohmann::json detail;
};

struct DemoReport {
    double r = 0;
    std::vector<DemoStep> steps;
    bool all_certified = false;
    bool signalling_forced = false;
    std::string conclusion;
    nlohmann::json to_json() const;
};

// The six-step argument for a 4-party target behavior that is reproduced by
// sequential v-causal models under A<D<B<C and A<D<C<B.
DemoReport signalling_demo(const mpq_class& r, const Behavior& target, const BellExpression& s);

nlohmann::json to_json(const VStrategy& s);

}  // namespace vcone
