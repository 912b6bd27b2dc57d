#pragma once
#include <array>
#include <string>
#include <vector>

#include "vcone/correlations.hpp"
#include "vcone/lp.hpp"

namespace vcone {

// Deterministic local strategy of a (B,C) pair: bits (f_B(0), f_B(1), f_C(0), f_C(1)),
// packed with f_B(0) most significant, so index l in [0,16).
struct DeterministicStrategy {
    std::array<int, 2> b;
    std::array<int, 2> c;

    static DeterministicStrategy from_index(int l);
    int index() const;
    // D_l(b|y) D_l(c|z) as a bipartite behavior.
    Behavior behavior() const;
};

std::vector<DeterministicStrategy> enumerate_strategies();

struct MembershipResult {
    bool member = false;
    double visibility = 0;            // largest t with t P + (1-t) uniform local
    std::vector<double> weights;      // q(l) when member
    BellExpression certificate;       // separating inequality when not a member
    double certificate_value = 0;     // certificate on P
    double certificate_bound = 0;     // certificate's local maximum
};

MembershipResult local_membership(const Behavior& bc, double tol = 1e-9);

double max_bell_local(const BellExpression& e);

// The lemma linear program over u(a,x,d,w,l) >= 0; see polytope.cpp for the algebra.
LinearProgram<double> lemma_program(const BellExpression& e);
LinearProgram<mpq_class> lemma_program_exact(const BellExpression& e);
// Behavior induced by a u-vector: P(abcd|xyzw) = sum_l u(a,x,d,w,l) D_l(b|y) D_l(c|z).
Behavior behavior_from_u(const std::vector<double>& u);
inline int u_index(int a, int x, int d, int w, int l) { return axdw_index(a, x, d, w) * 16 + l; }

LPResult<double> lemma_polytope_max(const BellExpression& e);
LPResult<mpq_class> lemma_polytope_max_exact(const BellExpression& e);

// Maximum over deterministic v-causal strategies for an ordering pattern
// ("A<B", "A~B", "A<D<(B~C)", "A<D<B<C", "A<D<C<B", or any total chain).
// With no_signalling = true only "A<D<(B~C)" is supported, where the set is
// exactly the lemma set.
double vcausal_config_max(const BellExpression& e, const std::string& pattern, bool no_signalling = false);

}  // namespace vcone
