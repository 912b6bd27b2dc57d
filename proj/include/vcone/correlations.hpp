#pragma once
#include <gmpxx.h>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace vcone {

inline constexpr double kAlgebraicTol = 1e-12;
inline constexpr double kLpTol = 1e-6;

// Dense table P(outcomes|settings) for n binary-input, binary-output parties.
// Flat index = (outcome bits << n) | setting bits, party A in the most
// significant bit of each group, i.e. P(abcd|xyzw) sits at
// a b c d x y z w read as an 8-bit number.
class Behavior {
public:
    Behavior() = default;
    explicit Behavior(int n_parties);
    Behavior(int n_parties, std::vector<double> table);

    int n_parties() const { return n_; }
    std::size_t size() const { return table_.size(); }
    int n_tuples() const { return 1 << n_; }

    static std::size_t index(int n, unsigned outcomes, unsigned settings) {
        return (static_cast<std::size_t>(outcomes) << n) | settings;
    }
    double& at(unsigned outcomes, unsigned settings) { return table_[index(n_, outcomes, settings)]; }
    double at(unsigned outcomes, unsigned settings) const { return table_[index(n_, outcomes, settings)]; }

    const std::vector<double>& table() const { return table_; }
    std::vector<double>& table() { return table_; }

    // Throws invalid_input if an entry is negative or a setting row does not sum to 1.
    void validate(double tol = kAlgebraicTol) const;

    static Behavior uniform(int n_parties);

private:
    int n_ = 0;
    std::vector<double> table_;
};

// Bit helpers shared by every module: party k of n lives at bit (n-1-k).
inline unsigned bit_of(unsigned word, int party, int n) { return (word >> (n - 1 - party)) & 1u; }
inline unsigned with_bit(unsigned word, int party, int n, unsigned v) {
    const unsigned mask = 1u << (n - 1 - party);
    return v ? (word | mask) : (word & ~mask);
}

// Keeps the listed parties (in ascending order) and fixes the settings of the
// dropped parties; dropped_settings[k] is read only for dropped k.
Behavior marginal(const Behavior& b, const std::vector<int>& keep, const std::vector<int>& dropped_settings);

struct MarginalVariation {
    std::string name;      // e.g. "BCD-on-x"
    int dropped_party = 0; // party whose outcome is summed and setting varied
    double variation = 0;  // max |difference| over kept outcomes/settings
    unsigned witness_outcomes = 0;  // kept outcome bits (full-width, dropped bit 0)
    unsigned witness_settings = 0;  // kept setting bits (full-width, dropped bit 0)
};

struct SignallingReport {
    std::vector<MarginalVariation> entries;
    double max_variation = 0;
    int worst = -1;
    nlohmann::json to_json() const;
};

struct NoSignallingResult {
    bool pass = false;
    SignallingReport report;
};

NoSignallingResult is_no_signalling(const Behavior& b, double tol = kAlgebraicTol);

struct ConditionalBC {
    bool present = false;
    double weight = 0;  // P(ad|xw), read at y = z = 0
    Behavior bc;        // P(bc|yz, axdw)
};

// Indexed by (a,x,d,w) -> ((a*2+x)*2+d)*2+w.
std::array<ConditionalBC, 16> conditional_bc_given_ad(const Behavior& b, double zero_tol = 0.0);
inline int axdw_index(int a, int x, int d, int w) { return ((a * 2 + x) * 2 + d) * 2 + w; }

struct BellExpression {
    std::string name;
    int n_parties = 4;
    std::vector<double> coefficients;
    // Exact coefficients when the expression is rational; used by the exact LP path.
    std::optional<std::vector<mpq_class>> exact;
    double classical_bound = 0;
    double quantum_target = 0;

    static BellExpression from_exact(std::string name, int n, std::vector<mpq_class> coefs);
    std::vector<mpq_class> exact_coefficients() const;
};

double evaluate_bell(const BellExpression& e, const Behavior& b);

// True iff the coefficient tensor is (term free of c's outcome) + (term free of
// b's outcome) for every (a,d) and setting tuple.
bool supports_only_ABD_ACD(const BellExpression& e, double tol = kAlgebraicTol);

nlohmann::json to_json(const Behavior& b);
Behavior behavior_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BellExpression& e);
BellExpression expression_from_json(const nlohmann::json& j);

}  // namespace vcone
