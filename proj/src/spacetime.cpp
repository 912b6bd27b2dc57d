#include "vcone/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vcone/error.hpp"

namespace vcone {

namespace {

// Comparison helpers: exact for rationals, 1e-12 slack for doubles.
bool is_finite(double v) { return std::isfinite(v); }
bool is_finite(const mpq_class&) { return true; }

double abs_of(double v) { return std::fabs(v); }
mpq_class abs_of(const mpq_class& v) { return abs(v); }

bool positive(double v) { return v > kCausalTol; }
bool positive(const mpq_class& v) { return sgn(v) > 0; }

bool leq(double a, double b) { return a <= b + kCausalTol; }
bool leq(const mpq_class& a, const mpq_class& b) { return a <= b; }

bool less_strict(double a, double b) { return a < b - kCausalTol; }
bool less_strict(const mpq_class& a, const mpq_class& b) { return a < b; }

double as_double(double v) { return v; }
double as_double(const mpq_class& v) { return v.get_d(); }

std::string normalize_pattern(std::string s) {
    // "∼" (U+223C) is three bytes; accept it and ASCII '~'.
    const std::string tilde = "\xE2\x88\xBC";
    for (std::size_t pos; (pos = s.find(tilde)) != std::string::npos;) s.replace(pos, tilde.size(), "~");
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    return s;
}

std::vector<std::vector<std::string>> parse_pattern(const std::string& raw) {
    const std::string s = normalize_pattern(raw);
    std::vector<std::vector<std::string>> groups;
    std::size_t i = 0;
    while (i < s.size()) {
        std::vector<std::string> group;
        if (s[i] == '(') {
            const auto close = s.find(')', i);
            if (close == std::string::npos) throw invalid_input("unbalanced '(' in pattern: " + raw);
            std::stringstream inner(s.substr(i + 1, close - i - 1));
            for (std::string label; std::getline(inner, label, '~');) {
                if (label.empty()) throw invalid_input("empty label in pattern: " + raw);
                group.push_back(label);
            }
            i = close + 1;
        } else {
            const auto stop = s.find('<', i);
            group.push_back(s.substr(i, stop == std::string::npos ? std::string::npos : stop - i));
            i = stop == std::string::npos ? s.size() : stop;
        }
        if (group.empty() || group.front().empty()) throw invalid_input("malformed pattern: " + raw);
        groups.push_back(group);
        if (i < s.size()) {
            if (s[i] != '<') throw invalid_input("expected '<' in pattern: " + raw);
            ++i;
            if (i == s.size()) throw invalid_input("pattern ends with '<': " + raw);
        }
    }
    if (groups.empty()) throw invalid_input("empty pattern");
    return groups;
}

template <class T>
void check_geometry(const BasicGeometry<T>& g) {
    if constexpr (std::is_same_v<T, double>) {
        require(std::isfinite(g.speed_ratio), "speed ratio must be finite");
    }
    require(g.speed_ratio > 1, "speed ratio r = v/c must exceed 1");
    for (std::size_t i = 0; i < g.events.size(); ++i) {
        require(is_finite(g.events[i].position) && is_finite(g.events[i].time),
                "event " + g.events[i].label + " has non-finite coordinates");
        for (std::size_t j = 0; j < i; ++j)
            require(g.events[i].label != g.events[j].label, "duplicate event label " + g.events[i].label);
    }
}

// Time at which the light-speed broadcasts of all `events` are available at p.
template <class T>
T availability(const std::vector<const BasicEvent<T>*>& events, const T& p) {
    T best = events.front()->time + abs_of(p - events.front()->position);
    for (auto* e : events) {
        T t = e->time + abs_of(p - e->position);
        if (t > best) best = t;
    }
    return best;
}

// The availability function is convex and piecewise linear, so its minimum
// sits at an event position or where a rising cone edge of one event meets
// a falling edge of another.  The grid scan is only a cross-check.
template <class T>
BasicEvent<T> meeting_point(const std::vector<const BasicEvent<T>*>& events, const std::string& label,
                            double grid_step) {
    std::vector<T> candidates;
    for (auto* ei : events) {
        candidates.push_back(ei->position);
        for (auto* ej : events) {
            if (ei == ej) continue;
            candidates.push_back((ej->time - ei->time + ei->position + ej->position) / 2);
        }
    }
    T best_p = candidates.front();
    T best_t = availability(events, best_p);
    for (const T& p : candidates) {
        T t = availability(events, p);
        if (t < best_t || (t == best_t && p < best_p)) {
            best_t = t;
            best_p = p;
        }
    }

    if (grid_step > 0) {
        double lo = as_double(events.front()->position), hi = lo;
        for (auto* e : events) {
            lo = std::min(lo, as_double(e->position));
            hi = std::max(hi, as_double(e->position));
        }
        double grid_best = INFINITY;
        const long steps = static_cast<long>(std::ceil((hi - lo) / grid_step));
        for (long k = 0; k <= steps; ++k) {
            const double p = lo + grid_step * static_cast<double>(k);
            double t = -INFINITY;
            for (auto* e : events) t = std::max(t, as_double(e->time) + std::fabs(p - as_double(e->position)));
            grid_best = std::min(grid_best, t);
        }
        if (grid_best < as_double(best_t) - 1e-9)
            throw internal_inconsistency("grid scan found an earlier meeting point than the analytic refinement");
    }
    return {label, best_p, best_t};
}

}  // namespace

std::vector<std::vector<std::string>> parse_ordering_pattern(const std::string& pattern) {
    return parse_pattern(pattern);
}

std::string to_string(CausalRelation rel) {
    switch (rel) {
        case CausalRelation::Before: return "<";
        case CausalRelation::After: return ">";
        case CausalRelation::Unrelated: return "\xE2\x88\xBC";
    }
    return "?";
}

template <class T>
const BasicEvent<T>& BasicGeometry<T>::at(const std::string& label) const {
    for (const auto& e : events)
        if (e.label == label) return e;
    throw invalid_input("geometry has no event labelled " + label);
}

template <class T>
bool BasicGeometry<T>::has(const std::string& label) const {
    return std::any_of(events.begin(), events.end(), [&](const auto& e) { return e.label == label; });
}

template <class T>
CausalRelation causal_relation(const BasicEvent<T>& e1, const BasicEvent<T>& e2, const T& r) {
    if constexpr (std::is_same_v<T, double>) require(std::isfinite(r), "speed ratio must be finite");
    require(r > 1, "speed ratio r = v/c must exceed 1");
    require(is_finite(e1.position) && is_finite(e1.time) && is_finite(e2.position) && is_finite(e2.time),
            "non-finite event coordinates");
    const T dt = e2.time - e1.time;
    const T dx = abs_of(e2.position - e1.position);
    if (positive(dt) && leq(dx, r * dt)) return CausalRelation::Before;
    const T back = -dt;
    if (positive(back) && leq(dx, r * back)) return CausalRelation::After;
    return CausalRelation::Unrelated;
}

template <class T>
BasicGeometry<T> figure3_geometry(const T& r) {
    if constexpr (std::is_same_v<T, double>) require(std::isfinite(r), "speed ratio must be finite");
    require(r > 1, "speed ratio r = v/c must exceed 1");
    const T one = 1;
    const T d_b = (one + one / r) / 4 + one / (one + r);
    const T d_c = 3 * (one + one / r) / 4 - one / (one + r);
    const T t_bc = 2 / (one + r);
    BasicGeometry<T> g;
    g.speed_ratio = r;
    g.events = {{"A", T(0), T(0)}, {"B", d_b, t_bc}, {"C", d_c, t_bc}, {"D", one, one / r}};
    return g;
}

template <class T>
OrderingTable ordering(const BasicGeometry<T>& g) {
    check_geometry(g);
    OrderingTable table;
    for (const auto& e1 : g.events)
        for (const auto& e2 : g.events)
            if (e1.label != e2.label) table[{e1.label, e2.label}] = causal_relation(e1, e2, g.speed_ratio);
    return table;
}

template <class T>
bool matches(const BasicGeometry<T>& g, const std::string& pattern) {
    const auto groups = parse_pattern(pattern);
    const auto table = ordering(g);
    auto rel = [&](const std::string& a, const std::string& b) {
        auto it = table.find({a, b});
        if (it == table.end()) throw invalid_input("pattern label not in geometry: " + a + " or " + b);
        return it->second;
    };
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t p = 0; p < groups[i].size(); ++p)
            for (std::size_t q = p + 1; q < groups[i].size(); ++q)
                if (rel(groups[i][p], groups[i][q]) != CausalRelation::Unrelated) return false;
        for (std::size_t j = i + 1; j < groups.size(); ++j)
            for (const auto& a : groups[i])
                for (const auto& b : groups[j])
                    if (rel(a, b) != CausalRelation::Before) return false;
    }
    return true;
}

template <class T>
MeetingEvents<T> broadcast_meeting_events(const BasicGeometry<T>& g, double grid_step) {
    check_geometry(g);
    const auto &a = g.at("A"), &b = g.at("B"), &c = g.at("C"), &d = g.at("D");
    return {meeting_point<T>({&b, &c, &d}, "D'", grid_step), meeting_point<T>({&a, &b, &c}, "A'", grid_step)};
}

template <class T>
T effective_speed(const BasicEvent<T>& source, const BasicEvent<T>& target) {
    const T dt = target.time - source.time;
    require(is_finite(dt) && positive(dt), "effective_speed needs the target strictly after the source");
    return abs_of(target.position - source.position) / dt;
}

template <class T>
std::vector<BasicGeometry<T>> randomized_schedule(const BasicGeometry<T>& g, const T& delta) {
    check_geometry(g);
    require(is_finite(delta) && !less_strict(delta, T(0)), "schedule shift delta must be >= 0");
    require(matches(g, "A<D<(B~C)"), "randomized_schedule expects a geometry with A<D<(B~C)");
    if (!positive(delta)) return {g, g, g};

    auto delayed = [&](const std::string& first, const std::string& second) {
        BasicGeometry<T> out = g;
        const auto& e1 = g.at(first);
        const auto& e2 = g.at(second);
        for (auto& e : out.events)
            if (e.label == second)
                e.time = e1.time + abs_of(e2.position - e1.position) / g.speed_ratio + delta;
        return out;
    };
    std::vector<BasicGeometry<T>> out{delayed("B", "C"), delayed("C", "B"), g};
    if (!matches(out[0], "A<D<B<C") || !matches(out[1], "A<D<C<B"))
        throw invalid_input("schedule shift does not realize the sequential orderings");
    return out;
}

mpq_class parse_rational(const std::string& text) {
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    require(!s.empty(), "empty number");
    try {
        if (s.find('/') != std::string::npos) {
            mpq_class q(s, 10);
            require(q.get_den() != 0, "zero denominator in " + text);
            q.canonicalize();
            return q;
        }
        std::size_t e = s.find_first_of("eE");
        std::string mant = s.substr(0, e);
        long exponent = 0;
        if (e != std::string::npos) exponent = std::stol(s.substr(e + 1));
        bool neg = false;
        if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
            neg = mant[0] == '-';
            mant.erase(0, 1);
        }
        const auto dot = mant.find('.');
        std::string digits = mant;
        if (dot != std::string::npos) {
            digits = mant.substr(0, dot) + mant.substr(dot + 1);
            exponent -= static_cast<long>(mant.size() - dot - 1);
        }
        require(!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit), "not a number: " + text);
        require(exponent > -1000 && exponent < 1000, "exponent out of range: " + text);
        mpz_class num(digits, 10);
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
        mpq_class q = exponent < 0 ? mpq_class(num, scale) : mpq_class(num * scale);
        q.canonicalize();
        return neg ? mpq_class(-q) : q;
    } catch (const std::invalid_argument&) {
        throw invalid_input("not a number: " + text);
    } catch (const std::out_of_range&) {
        throw invalid_input("number out of range: " + text);
    }
}

double to_double(const mpq_class& q) { return q.get_d(); }

Event to_double(const ExactEvent& e) { return {e.label, e.position.get_d(), e.time.get_d()}; }

Geometry to_double(const ExactGeometry& g) {
    Geometry out;
    out.speed_ratio = g.speed_ratio.get_d();
    for (const auto& e : g.events) out.events.push_back(to_double(e));
    return out;
}

nlohmann::json to_json(const Geometry& g) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : g.events) events.push_back({{"label", e.label}, {"position", e.position}, {"time", e.time}});
    return {{"speed_ratio", g.speed_ratio}, {"events", events}};
}

nlohmann::json to_json(const ExactGeometry& g) {
    nlohmann::json j = to_json(to_double(g));
    j["speed_ratio_exact"] = g.speed_ratio.get_str();
    for (std::size_t i = 0; i < g.events.size(); ++i) {
        j["events"][i]["position_exact"] = g.events[i].position.get_str();
        j["events"][i]["time_exact"] = g.events[i].time.get_str();
    }
    return j;
}

Geometry geometry_from_json(const nlohmann::json& j) {
    try {
        Geometry g;
        g.speed_ratio = j.at("speed_ratio").get<double>();
        for (const auto& e : j.at("events"))
            g.events.push_back({e.at("label").get<std::string>(), e.at("position").get<double>(),
                                e.at("time").get<double>()});
        check_geometry(g);
        return g;
    } catch (const nlohmann::json::exception& ex) {
        throw invalid_input(std::string("malformed geometry JSON: ") + ex.what());
    }
}

std::vector<std::string> party_labels(int n_parties) {
    require(n_parties >= 1 && n_parties <= 4, "between 1 and 4 parties supported");
    static const std::vector<std::string> all{"A", "B", "C", "D"};
    return {all.begin(), all.begin() + n_parties};
}

#define VCONE_INSTANTIATE(T)                                                                        \
    template struct BasicGeometry<T>;                                                               \
    template CausalRelation causal_relation(const BasicEvent<T>&, const BasicEvent<T>&, const T&); \
    template BasicGeometry<T> figure3_geometry(const T&);                                           \
    template OrderingTable ordering(const BasicGeometry<T>&);                                       \
    template bool matches(const BasicGeometry<T>&, const std::string&);                             \
    template MeetingEvents<T> broadcast_meeting_events(const BasicGeometry<T>&, double);            \
    template T effective_speed(const BasicEvent<T>&, const BasicEvent<T>&);                         \
    template std::vector<BasicGeometry<T>> randomized_schedule(const BasicGeometry<T>&, const T&);

VCONE_INSTANTIATE(double)
VCONE_INSTANTIATE(mpq_class)

}  // namespace vcone
