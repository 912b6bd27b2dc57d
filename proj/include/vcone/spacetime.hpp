#pragma once
#include <gmpxx.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace vcone {

enum class CausalRelation { Before, After, Unrelated };

std::string to_string(CausalRelation rel);

// Positions are 1-D, c = 1.  T is double or mpq_class; the exact type is used
// whenever the inputs are rational so that v-cone boundary cases are decided
// without rounding.
template <class T>
struct BasicEvent {
    std::string label;
    T position;
    T time;
};

template <class T>
struct BasicGeometry {
    std::vector<BasicEvent<T>> events;
    T speed_ratio;

    const BasicEvent<T>& at(const std::string& label) const;
    bool has(const std::string& label) const;
};

using Event = BasicEvent<double>;
using Geometry = BasicGeometry<double>;
using ExactEvent = BasicEvent<mpq_class>;
using ExactGeometry = BasicGeometry<mpq_class>;

inline constexpr double kCausalTol = 1e-12;

template <class T>
CausalRelation causal_relation(const BasicEvent<T>& e1, const BasicEvent<T>& e2, const T& r);

template <class T>
BasicGeometry<T> figure3_geometry(const T& r);

using OrderingTable = std::map<std::pair<std::string, std::string>, CausalRelation>;

template <class T>
OrderingTable ordering(const BasicGeometry<T>& g);

// Patterns: labels joined by '<' (chain) with '(X∼Y)' or '(X~Y)' groups of
// mutually unrelated events, e.g. "A<D<(B∼C)".  Every stated pair must hold
// and nothing else is implied; unrelated groups are pairwise Unrelated.
template <class T>
bool matches(const BasicGeometry<T>& g, const std::string& pattern);

// Splits a pattern into its '<'-ordered groups of labels.
std::vector<std::vector<std::string>> parse_ordering_pattern(const std::string& pattern);

template <class T>
struct MeetingEvents {
    BasicEvent<T> d_prime;
    BasicEvent<T> a_prime;
};

template <class T>
MeetingEvents<T> broadcast_meeting_events(const BasicGeometry<T>& g, double grid_step = 1e-4);

template <class T>
T effective_speed(const BasicEvent<T>& source, const BasicEvent<T>& target);

// Three geometries: A<D<B<C, A<D<C<B, A<D<(B∼C).  The later of B, C is
// delayed by the time needed for the earlier one's v-cone to reach it plus
// delta.  delta = 0 returns three copies of g.
template <class T>
std::vector<BasicGeometry<T>> randomized_schedule(const BasicGeometry<T>& g, const T& delta);

// Parses "2", "-1.25", "7/3" or "1e-3" into an exact rational.
mpq_class parse_rational(const std::string& text);
double to_double(const mpq_class& q);
Geometry to_double(const ExactGeometry& g);
Event to_double(const ExactEvent& e);

nlohmann::json to_json(const Geometry& g);
nlohmann::json to_json(const ExactGeometry& g);
Geometry geometry_from_json(const nlohmann::json& j);

// Parties of a 4-event geometry in the fixed index order A,B,C,D (or A,B).
std::vector<std::string> party_labels(int n_parties);

}  // namespace vcone
