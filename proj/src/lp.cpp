#include "vcone/lp.hpp"

#include <cmath>

#include "vcone/error.hpp"

namespace vcone {

namespace {

int sgn(double v) { return (v > 0) - (v < 0); }

// Pivot tolerances.  The rational instantiation compares exactly.
template <class T>
struct Tol {
    static bool pos(const T& v) { return sgn(v) > 0; }
    static bool nonzero(const T& v) { return sgn(v) != 0; }
    static bool is_zero(const T& v) { return sgn(v) == 0; }
    static bool ratio_less(const T& a, const T& b) { return a < b; }
    static bool ratio_equal(const T& a, const T& b) { return a == b; }
};

template <>
struct Tol<double> {
    static constexpr double eps = 1e-9;
    static bool pos(double v) { return v > eps; }
    static bool nonzero(double v) { return std::fabs(v) > eps; }
    static bool is_zero(double v) { return std::fabs(v) <= eps; }
    static bool ratio_less(double a, double b) { return a < b - 1e-12 * (1 + std::fabs(b)); }
    static bool ratio_equal(double a, double b) { return !ratio_less(a, b) && !ratio_less(b, a); }
};

template <class T>
class Tableau {
public:
    explicit Tableau(const LinearProgram<T>& p) : lp_(p) {
        n_ = p.n_vars();
        for (std::size_t j = 0; j < n_; ++j)
            if (!p.upper.empty() && p.upper[j]) bounded_.push_back(j);
        n_le_ = p.le_rows.size();
        m_ = p.eq_rows.size() + n_le_ + bounded_.size();
        n_slack_ = n_le_ + bounded_.size();
        art0_ = n_ + n_slack_;
        cols_ = art0_ + m_;

        rows_.assign(m_, std::vector<T>(cols_, T(0)));
        rhs_.assign(m_, T(0));
        sign_.assign(m_, 1);
        std::size_t r = 0;
        for (std::size_t i = 0; i < p.eq_rows.size(); ++i, ++r) {
            for (std::size_t j = 0; j < n_; ++j) rows_[r][j] = p.eq_rows[i][j];
            rhs_[r] = p.eq_rhs[i];
        }
        for (std::size_t i = 0; i < n_le_; ++i, ++r) {
            for (std::size_t j = 0; j < n_; ++j) rows_[r][j] = p.le_rows[i][j];
            rows_[r][n_ + i] = T(1);
            rhs_[r] = p.le_rhs[i];
        }
        for (std::size_t k = 0; k < bounded_.size(); ++k, ++r) {
            rows_[r][bounded_[k]] = T(1);
            rows_[r][n_ + n_le_ + k] = T(1);
            rhs_[r] = *p.upper[bounded_[k]];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (rhs_[i] < 0) {
                sign_[i] = -1;
                for (auto& v : rows_[i]) v = -v;
                rhs_[i] = -rhs_[i];
            }
            rows_[i][art0_ + i] = T(1);
        }
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) basis_[i] = art0_ + i;
    }

    LPResult<T> run(long max_pivots) {
        LPResult<T> res;
        max_pivots_ = max_pivots;

        // Phase 1: maximize -(sum of artificials).
        std::vector<T> cost1(cols_, T(0));
        for (std::size_t i = 0; i < m_; ++i) cost1[art0_ + i] = T(-1);
        set_costs(cost1);
        const auto s1 = iterate(cols_);
        res.pivots = pivots_;
        if (s1 == Step::Limit) return failure(res, "pivot limit reached in phase 1");
        T infeasibility(0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= art0_) infeasibility += rhs_[i];
        if (Tol<T>::pos(infeasibility)) {
            res.status = LPStatus::Infeasible;
            res.message = "phase 1 optimum leaves artificials positive";
            return res;
        }
        drive_out_artificials();

        // Phase 2 on the original objective; artificials may not re-enter.
        std::vector<T> cost2(cols_, T(0));
        for (std::size_t j = 0; j < n_; ++j) cost2[j] = lp_.objective[j];
        set_costs(cost2);
        const auto s2 = iterate(art0_);
        res.pivots = pivots_;
        if (s2 == Step::Limit) return failure(res, "pivot limit reached in phase 2");
        if (s2 == Step::Unbounded) {
            res.status = LPStatus::Unbounded;
            res.message = "entering column has no positive entry";
            return res;
        }

        res.status = LPStatus::Optimal;
        res.primal.assign(n_, T(0));
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) res.primal[basis_[i]] = rhs_[i];
        res.value = T(0);
        for (std::size_t j = 0; j < n_; ++j) res.value += lp_.objective[j] * res.primal[j];

        // y = c_B B^-1; the artificial columns hold B^-1 of the sign-fixed
        // system and carry zero cost, so their reduced costs are -y.
        std::vector<T> y(m_);
        for (std::size_t i = 0; i < m_; ++i) y[i] = sign_[i] > 0 ? T(-reduced_[art0_ + i]) : T(reduced_[art0_ + i]);
        std::size_t r = 0;
        for (std::size_t i = 0; i < lp_.eq_rows.size(); ++i) res.dual_eq.push_back(y[r++]);
        for (std::size_t i = 0; i < n_le_; ++i) res.dual_le.push_back(y[r++]);
        res.dual_upper.assign(n_, T(0));
        for (std::size_t k = 0; k < bounded_.size(); ++k) res.dual_upper[bounded_[k]] = y[r++];
        return res;
    }

private:
    enum class Step { Optimal, Unbounded, Limit };

    LPResult<T> failure(LPResult<T>& res, const std::string& msg) {
        res.status = LPStatus::SolverFailure;
        res.message = msg;
        return res;
    }

    void set_costs(const std::vector<T>& cost) {
        cost_ = cost;
        reduced_ = cost;
        for (std::size_t i = 0; i < m_; ++i) {
            const T cb = cost[basis_[i]];
            if (sgn(cb) == 0) continue;
            for (std::size_t j = 0; j < cols_; ++j)
                if (sgn(rows_[i][j]) != 0) reduced_[j] -= cb * rows_[i][j];
        }
    }

    // Bland: lowest-index improving column enters; among tied ratios the row
    // whose basic variable has the lowest index leaves.
    Step iterate(std::size_t enter_limit) {
        for (;;) {
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < enter_limit; ++j)
                if (Tol<T>::pos(reduced_[j])) {
                    enter = j;
                    break;
                }
            if (enter == cols_) return Step::Optimal;
            std::size_t leave = m_;
            T best_ratio(0);
            for (std::size_t i = 0; i < m_; ++i) {
                if (!Tol<T>::pos(rows_[i][enter])) continue;
                T ratio = rhs_[i] / rows_[i][enter];
                if (leave == m_ || Tol<T>::ratio_less(ratio, best_ratio) ||
                    (Tol<T>::ratio_equal(ratio, best_ratio) && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m_) return Step::Unbounded;
            if (pivots_ >= max_pivots_) return Step::Limit;
            pivot(leave, enter);
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        ++pivots_;
        auto& prow = rows_[r];
        const T piv = prow[c];
        std::vector<std::size_t> nz;
        for (std::size_t j = 0; j < cols_; ++j)
            if (sgn(prow[j]) != 0) {
                prow[j] /= piv;
                nz.push_back(j);
            }
        rhs_[r] /= piv;
        if constexpr (std::is_same_v<T, double>) prow[c] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r || sgn(rows_[i][c]) == 0) continue;
            const T f = rows_[i][c];
            for (std::size_t j : nz) rows_[i][j] -= f * prow[j];
            rhs_[i] -= f * rhs_[r];
            if constexpr (std::is_same_v<T, double>) {
                rows_[i][c] = 0.0;
                if (rhs_[i] < 0 && rhs_[i] > -1e-11) rhs_[i] = 0.0;
            }
        }
        if (sgn(reduced_[c]) != 0) {
            const T f = reduced_[c];
            for (std::size_t j : nz) reduced_[j] -= f * prow[j];
            if constexpr (std::is_same_v<T, double>) reduced_[c] = 0.0;
        }
        basis_[r] = c;
    }

    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < art0_) continue;
            for (std::size_t j = 0; j < art0_; ++j)
                if (Tol<T>::nonzero(rows_[i][j])) {
                    pivot(i, j);
                    break;
                }
            // Rows with no usable column are redundant; their artificial stays
            // basic at zero and can never grow since its row is otherwise empty.
        }
    }

    const LinearProgram<T>& lp_;
    std::size_t n_ = 0, n_le_ = 0, n_slack_ = 0, m_ = 0, art0_ = 0, cols_ = 0;
    std::vector<std::size_t> bounded_;
    std::vector<std::vector<T>> rows_;
    std::vector<T> rhs_;
    std::vector<int> sign_;
    std::vector<std::size_t> basis_;
    std::vector<T> cost_, reduced_;
    long pivots_ = 0, max_pivots_ = 0;
};

// Independent re-check of a floating optimum: feasibility of x and y and a
// closed duality gap, all at 1e-9 relative to the data scale.
bool certify(const LinearProgram<double>& p, LPResult<double>& r) {
    const double tol = 1e-9;
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    for (double v : r.primal)
        if (v < -tol) return false;
    for (std::size_t i = 0; i < p.eq_rows.size(); ++i)
        if (std::fabs(dot(p.eq_rows[i], r.primal) - p.eq_rhs[i]) > tol * (1 + std::fabs(p.eq_rhs[i]))) return false;
    for (std::size_t i = 0; i < p.le_rows.size(); ++i)
        if (dot(p.le_rows[i], r.primal) > p.le_rhs[i] + tol * (1 + std::fabs(p.le_rhs[i]))) return false;
    double dual_obj = dot(r.dual_eq, p.eq_rhs) + dot(r.dual_le, p.le_rhs);
    for (std::size_t j = 0; j < p.n_vars(); ++j) {
        if (!p.upper.empty() && p.upper[j]) {
            if (r.primal[j] > *p.upper[j] + tol) return false;
            dual_obj += r.dual_upper[j] * *p.upper[j];
        }
        if (r.dual_upper[j] < -tol) return false;
    }
    for (double y : r.dual_le)
        if (y < -tol) return false;
    double scale = 1;
    for (double c : p.objective) scale = std::max(scale, std::fabs(c));
    for (std::size_t j = 0; j < p.n_vars(); ++j) {
        double red = p.objective[j] - r.dual_upper[j];
        for (std::size_t i = 0; i < p.eq_rows.size(); ++i) red -= r.dual_eq[i] * p.eq_rows[i][j];
        for (std::size_t i = 0; i < p.le_rows.size(); ++i) red -= r.dual_le[i] * p.le_rows[i][j];
        if (red > tol * scale * 10) return false;
    }
    return std::fabs(dual_obj - r.value) <= tol * (1 + std::fabs(r.value));
}

}  // namespace

std::string to_string(LPStatus s) {
    switch (s) {
        case LPStatus::Optimal: return "Optimal";
        case LPStatus::Infeasible: return "Infeasible";
        case LPStatus::Unbounded: return "Unbounded";
        case LPStatus::SolverFailure: return "SolverFailure";
    }
    return "?";
}

template <class T>
void LinearProgram<T>::check() const {
    const std::size_t n = objective.size();
    require(n > 0, "linear program has no variables");
    require(eq_rows.size() == eq_rhs.size() && le_rows.size() == le_rhs.size(), "row/rhs count mismatch");
    for (const auto& r : eq_rows) require(r.size() == n, "equality row has wrong width");
    for (const auto& r : le_rows) require(r.size() == n, "inequality row has wrong width");
    require(upper.empty() || upper.size() == n, "upper bounds need one entry per variable");
    for (const auto& u : upper) require(!u || *u >= 0, "upper bounds must be non-negative");
}

template struct LinearProgram<double>;
template struct LinearProgram<mpq_class>;

LPResult<double> solve_lp(const LinearProgram<double>& p, long max_pivots) {
    p.check();
    for (double c : p.objective) require(std::isfinite(c), "non-finite objective coefficient");
    Tableau<double> t(p);
    auto r = t.run(max_pivots);
    if (r.status == LPStatus::Optimal && !certify(p, r)) {
        r.status = LPStatus::SolverFailure;
        r.message = "optimum failed the feasibility / duality-gap re-check";
    }
    return r;
}

LPResult<mpq_class> solve_lp_exact(const LinearProgram<mpq_class>& p, long max_pivots) {
    p.check();
    Tableau<mpq_class> t(p);
    return t.run(max_pivots);
}

LinearProgram<mpq_class> to_exact(const LinearProgram<double>& p) {
    LinearProgram<mpq_class> q;
    auto conv = [](const std::vector<double>& v) {
        std::vector<mpq_class> out;
        for (double d : v) out.emplace_back(d);
        return out;
    };
    q.objective = conv(p.objective);
    for (const auto& r : p.eq_rows) q.eq_rows.push_back(conv(r));
    q.eq_rhs = conv(p.eq_rhs);
    for (const auto& r : p.le_rows) q.le_rows.push_back(conv(r));
    q.le_rhs = conv(p.le_rhs);
    for (const auto& u : p.upper) q.upper.push_back(u ? std::optional<mpq_class>(mpq_class(*u)) : std::nullopt);
    return q;
}

nlohmann::json to_json(const LPResult<double>& r) {
    return {{"status", to_string(r.status)}, {"value", r.value},       {"primal", r.primal},
            {"dual_eq", r.dual_eq},          {"dual_le", r.dual_le},   {"dual_upper", r.dual_upper},
            {"pivots", r.pivots},            {"message", r.message}};
}

nlohmann::json to_json(const LPResult<mpq_class>& r) {
    auto strs = [](const std::vector<mpq_class>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& q : v) a.push_back(q.get_str());
        return a;
    };
    return {{"status", to_string(r.status)}, {"value", r.value.get_str()}, {"value_float", r.value.get_d()},
            {"primal", strs(r.primal)},      {"dual_eq", strs(r.dual_eq)}, {"dual_le", strs(r.dual_le)},
            {"dual_upper", strs(r.dual_upper)}, {"pivots", r.pivots},      {"message", r.message}};
}

}  // namespace vcone
