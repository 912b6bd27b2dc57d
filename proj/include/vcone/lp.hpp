#pragma once
#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace vcone {

enum class LPStatus { Optimal, Infeasible, Unbounded, SolverFailure };
std::string to_string(LPStatus s);

// maximize c.x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  0 <= x <= upper
// (an absent upper bound means +inf).  Rows are dense.
template <class T>
struct LinearProgram {
    std::vector<T> objective;
    std::vector<std::vector<T>> eq_rows;
    std::vector<T> eq_rhs;
    std::vector<std::vector<T>> le_rows;
    std::vector<T> le_rhs;
    std::vector<std::optional<T>> upper;  // empty or one entry per variable

    std::size_t n_vars() const { return objective.size(); }
    void check() const;
};

template <class T>
struct LPResult {
    LPStatus status = LPStatus::SolverFailure;
    T value{};
    std::vector<T> primal;
    // Dual certificate: objective <= dual_eq.b_eq + dual_le.b_le + dual_upper.upper,
    // with dual_le, dual_upper >= 0 and every reduced cost <= 0.
    std::vector<T> dual_eq;
    std::vector<T> dual_le;
    std::vector<T> dual_upper;
    long pivots = 0;
    std::string message;
};

// Two-phase dense tableau simplex with Bland's rule.  The double version
// verifies primal feasibility and the duality gap (1e-9) before reporting
// Optimal; anything else comes back as SolverFailure, never a wrong answer.
LPResult<double> solve_lp(const LinearProgram<double>& p, long max_pivots = 200000);
LPResult<mpq_class> solve_lp_exact(const LinearProgram<mpq_class>& p, long max_pivots = 200000);

LinearProgram<mpq_class> to_exact(const LinearProgram<double>& p);

nlohmann::json to_json(const LPResult<double>& r);
nlohmann::json to_json(const LPResult<mpq_class>& r);

}  // namespace vcone
