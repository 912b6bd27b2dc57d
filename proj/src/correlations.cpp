#include "vcone/correlations.hpp"

#include <cmath>

#include "vcone/error.hpp"

namespace vcone {

namespace {

const char* kPartyNames = "ABCD";
const char* kSettingNames = "xyzw";

}  // namespace

Behavior::Behavior(int n_parties) : n_(n_parties) {
    require(n_parties >= 1 && n_parties <= 4, "behaviors support 1 to 4 parties");
    table_.assign(std::size_t{1} << (2 * n_parties), 0.0);
}

Behavior::Behavior(int n_parties, std::vector<double> table) : Behavior(n_parties) {
    require(table.size() == table_.size(), "behavior table has wrong length");
    table_ = std::move(table);
}

Behavior Behavior::uniform(int n_parties) {
    Behavior b(n_parties);
    for (auto& v : b.table_) v = 1.0 / (1 << n_parties);
    return b;
}

void Behavior::validate(double tol) const {
    for (unsigned s = 0; s < static_cast<unsigned>(n_tuples()); ++s) {
        double sum = 0;
        for (unsigned o = 0; o < static_cast<unsigned>(n_tuples()); ++o) {
            const double p = at(o, s);
            if (!std::isfinite(p) || p < -tol) throw invalid_input("behavior has a negative or non-finite entry");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > tol) throw invalid_input("behavior row for settings " + std::to_string(s) +
                                                            " sums to " + std::to_string(sum));
    }
}

Behavior marginal(const Behavior& b, const std::vector<int>& keep, const std::vector<int>& dropped_settings) {
    const int n = b.n_parties();
    require(!keep.empty(), "marginal needs at least one kept party");
    require(static_cast<int>(dropped_settings.size()) == n, "dropped_settings needs one entry per party");
    std::vector<bool> kept(n, false);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        require(keep[i] >= 0 && keep[i] < n, "kept party out of range");
        require(i == 0 || keep[i] > keep[i - 1], "kept parties must be ascending and distinct");
        kept[keep[i]] = true;
    }
    for (int k = 0; k < n; ++k)
        if (!kept[k]) require(dropped_settings[k] == 0 || dropped_settings[k] == 1, "settings are 0 or 1");

    const int m = static_cast<int>(keep.size());
    Behavior out(m);
    for (unsigned o = 0; o < static_cast<unsigned>(1 << n); ++o) {
        unsigned ko = 0;
        for (int i = 0; i < m; ++i) ko = with_bit(ko, i, m, bit_of(o, keep[i], n));
        for (unsigned ks = 0; ks < static_cast<unsigned>(1 << m); ++ks) {
            unsigned s = 0;
            for (int k = 0; k < n; ++k)
                if (!kept[k]) s = with_bit(s, k, n, static_cast<unsigned>(dropped_settings[k]));
            for (int i = 0; i < m; ++i) s = with_bit(s, keep[i], n, bit_of(ks, i, m));
            out.at(ko, ks) += b.at(o, s);
        }
    }
    return out;
}

NoSignallingResult is_no_signalling(const Behavior& b, double tol) {
    require(tol >= 0, "tolerance must be non-negative");
    const int n = b.n_parties();
    const unsigned tuples = 1u << n;
    NoSignallingResult res;
    for (int k = 0; k < n; ++k) {
        MarginalVariation mv;
        mv.dropped_party = k;
        for (int j = 0; j < n; ++j)
            if (j != k) mv.name += kPartyNames[j];
        mv.name += std::string("-on-") + kSettingNames[k];
        // Sum over party k's outcome; compare its two settings.
        for (unsigned o = 0; o < tuples; ++o) {
            if (bit_of(o, k, n)) continue;
            for (unsigned s = 0; s < tuples; ++s) {
                if (bit_of(s, k, n)) continue;
                const unsigned o1 = with_bit(o, k, n, 1), s1 = with_bit(s, k, n, 1);
                const double m0 = b.at(o, s) + b.at(o1, s);
                const double m1 = b.at(o, s1) + b.at(o1, s1);
                const double diff = std::fabs(m0 - m1);
                if (diff > mv.variation) {
                    mv.variation = diff;
                    mv.witness_outcomes = o;
                    mv.witness_settings = s;
                }
            }
        }
        if (mv.variation > res.report.max_variation) {
            res.report.max_variation = mv.variation;
            res.report.worst = k;
        }
        res.report.entries.push_back(mv);
    }
    res.pass = res.report.max_variation <= tol;
    return res;
}

nlohmann::json SignallingReport::to_json() const {
    nlohmann::json entries_j = nlohmann::json::array();
    for (const auto& e : entries)
        entries_j.push_back({{"marginal", e.name},
                             {"dropped_party", std::string(1, kPartyNames[e.dropped_party])},
                             {"variation", e.variation},
                             {"witness_outcomes", e.witness_outcomes},
                             {"witness_settings", e.witness_settings}});
    return {{"entries", entries_j},
            {"max_variation", max_variation},
            {"worst", worst >= 0 ? entries[static_cast<std::size_t>(worst)].name : std::string()}};
}

std::array<ConditionalBC, 16> conditional_bc_given_ad(const Behavior& b, double zero_tol) {
    require(b.n_parties() == 4, "conditional_bc_given_ad needs a 4-party behavior");
    std::array<ConditionalBC, 16> out;
    for (int a = 0; a < 2; ++a)
        for (int x = 0; x < 2; ++x)
            for (int d = 0; d < 2; ++d)
                for (int w = 0; w < 2; ++w) {
                    auto& cond = out[static_cast<std::size_t>(axdw_index(a, x, d, w))];
                    cond.bc = Behavior(2);
                    cond.present = true;
                    for (unsigned yz = 0; yz < 4; ++yz) {
                        const unsigned y = yz >> 1, z = yz & 1;
                        const unsigned s = (x << 3) | (y << 2) | (z << 1) | w;
                        // Each (y,z) row is renormalized on its own, which is
                        // P(abcd|xyzw)/P(ad|xw) whenever AD is no-signalling.
                        double norm = 0;
                        for (unsigned bc = 0; bc < 4; ++bc)
                            norm += b.at((a << 3) | ((bc >> 1) << 2) | ((bc & 1) << 1) | d, s);
                        if (yz == 0) cond.weight = norm;
                        if (norm <= zero_tol) {
                            cond.present = false;
                            continue;
                        }
                        for (unsigned bc = 0; bc < 4; ++bc)
                            cond.bc.at(bc, yz) = b.at((a << 3) | ((bc >> 1) << 2) | ((bc & 1) << 1) | d, s) / norm;
                    }
                    if (!cond.present) cond.bc = Behavior(2);
                }
    return out;
}

BellExpression BellExpression::from_exact(std::string name, int n, std::vector<mpq_class> coefs) {
    require(coefs.size() == (std::size_t{1} << (2 * n)), "expression has wrong number of coefficients");
    BellExpression e;
    e.name = std::move(name);
    e.n_parties = n;
    for (const auto& q : coefs) e.coefficients.push_back(q.get_d());
    e.exact = std::move(coefs);
    return e;
}

std::vector<mpq_class> BellExpression::exact_coefficients() const {
    if (exact) return *exact;
    // Doubles are dyadic rationals, so this conversion is itself exact.
    std::vector<mpq_class> out;
    for (double c : coefficients) out.emplace_back(c);
    return out;
}

double evaluate_bell(const BellExpression& e, const Behavior& b) {
    require(e.n_parties == b.n_parties() && e.coefficients.size() == b.size(),
            "Bell expression and behavior have different arity");
    double sum = 0;
    for (std::size_t i = 0; i < b.size(); ++i) sum += e.coefficients[i] * b.table()[i];
    return sum;
}

bool supports_only_ABD_ACD(const BellExpression& e, double tol) {
    if (e.n_parties != 4 || e.coefficients.size() != 256) return false;
    // For fixed (a,d) and settings the 2x2 block e[b][c] is alpha[b] + beta[c]
    // exactly when its interaction contrast vanishes; that is the whole
    // feasibility system for the decomposition, solved in closed form.
    double scale = 0;
    for (double c : e.coefficients) scale = std::max(scale, std::fabs(c));
    for (unsigned a = 0; a < 2; ++a)
        for (unsigned d = 0; d < 2; ++d)
            for (unsigned s = 0; s < 16; ++s) {
                auto c = [&](unsigned bb, unsigned cc) {
                    return e.coefficients[Behavior::index(4, (a << 3) | (bb << 2) | (cc << 1) | d, s)];
                };
                const double contrast = c(0, 0) + c(1, 1) - c(0, 1) - c(1, 0);
                if (std::fabs(contrast) > tol * std::max(1.0, scale)) return false;
            }
    return true;
}

nlohmann::json to_json(const Behavior& b) {
    return {{"n_parties", b.n_parties()},
            {"outcomes", 2},
            {"settings", 2},
            {"index_order", "outcome tuple major, setting tuple minor, party A most significant"},
            {"table", b.table()}};
}

Behavior behavior_from_json(const nlohmann::json& j) {
    try {
        const int n = j.at("n_parties").get<int>();
        require(j.value("outcomes", 2) == 2 && j.value("settings", 2) == 2, "only binary settings/outcomes supported");
        Behavior b(n, j.at("table").get<std::vector<double>>());
        b.validate(1e-9);
        return b;
    } catch (const nlohmann::json::exception& ex) {
        throw invalid_input(std::string("malformed behavior JSON: ") + ex.what());
    }
}

nlohmann::json to_json(const BellExpression& e) {
    nlohmann::json j{{"name", e.name},
                     {"n_parties", e.n_parties},
                     {"classical_bound", e.classical_bound},
                     {"quantum_target", e.quantum_target}};
    if (e.exact) {
        nlohmann::json c = nlohmann::json::array();
        for (const auto& q : *e.exact) c.push_back(q.get_str());
        j["coefficients"] = c;
    } else {
        j["coefficients"] = e.coefficients;
    }
    return j;
}

BellExpression expression_from_json(const nlohmann::json& j) {
    try {
        const int n = j.value("n_parties", 4);
        const auto& coefs = j.at("coefficients");
        require(coefs.is_array() && coefs.size() == (std::size_t{1} << (2 * n)),
                "expression needs 4^n coefficients");
        // Strings ("213/360") keep the expression exact; plain numbers are doubles.
        bool any_string = false;
        for (const auto& c : coefs) any_string |= c.is_string();
        BellExpression e;
        if (any_string) {
            std::vector<mpq_class> q;
            for (const auto& c : coefs) {
                if (c.is_string()) {
                    mpq_class v(c.get<std::string>(), 10);
                    require(v.get_den() != 0, "zero denominator in coefficient");
                    v.canonicalize();
                    q.push_back(v);
                } else {
                    q.emplace_back(c.get<double>());
                }
            }
            e = BellExpression::from_exact(j.value("name", "expression"), n, std::move(q));
        } else {
            e.name = j.value("name", "expression");
            e.n_parties = n;
            e.coefficients = coefs.get<std::vector<double>>();
        }
        e.classical_bound = j.value("classical_bound", 0.0);
        e.quantum_target = j.value("quantum_target", 0.0);
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw invalid_input(std::string("malformed expression JSON: ") + ex.what());
    } catch (const invalid_input&) {
        throw;
    } catch (const std::invalid_argument& ex) {
        throw invalid_input(std::string("bad rational coefficient: ") + ex.what());
    }
}

}  // namespace vcone
