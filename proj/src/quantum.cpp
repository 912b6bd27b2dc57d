#include "vcone/quantum.hpp"

#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vcone/error.hpp"

namespace vcone {

namespace {

// Applies a 2x2 operator to the qubit of `party` in an n-qubit vector.
void apply_local(std::vector<cplx>& v, const CMatrix& m, int party, int n) {
    const std::size_t stride = std::size_t{1} << (n - 1 - party);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i & stride) continue;
        const cplx v0 = v[i], v1 = v[i | stride];
        v[i] = m(0, 0) * v0 + m(0, 1) * v1;
        v[i | stride] = m(1, 0) * v0 + m(1, 1) * v1;
    }
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Sum over the outcome bits of parties k..n-1 of c(o) * (x)_j M_j, for a
// fixed setting tuple; built right to left so each level is one kron.
CMatrix partial_operator(const std::vector<double>& coef, const PartyMeasurements& m, int n, unsigned settings,
                         unsigned prefix, int k) {
    if (k == n) {
        CMatrix leaf(1);
        leaf(0, 0) = coef[Behavior::index(n, prefix, settings)];
        return leaf;
    }
    const unsigned s = bit_of(settings, k, n);
    CMatrix out;
    for (unsigned o = 0; o < 2; ++o) {
        CMatrix rest = partial_operator(coef, m, n, settings, with_bit(prefix, k, n, o), k + 1);
        bool zero = true;
        for (const auto& v : rest.a) zero &= v == cplx(0);
        if (zero) {
            if (out.dim == 0) out = CMatrix(1 << (n - k));
            continue;
        }
        CMatrix term = kron(m[static_cast<std::size_t>(k)][s][o], rest);
        out = out.dim == 0 ? term : out + term;
    }
    return out;
}

void check_measurements(const PartyMeasurements& m, int n, double tol) {
    require(static_cast<int>(m.size()) == n, "need one measurement set per party");
    const CMatrix id = CMatrix::identity(2);
    for (const auto& party : m)
        for (const auto& pair : party) {
            for (const auto& p : pair) {
                require(p.dim == 2, "projectors must be 2x2");
                const CMatrix sq = p * p;
                for (std::size_t i = 0; i < 4; ++i)
                    require(std::abs(sq.a[i] - p.a[i]) <= tol, "measurement operator is not idempotent");
                require(p.hermiticity_residual() <= tol, "measurement operator is not Hermitian");
            }
            const CMatrix sum = pair[0] + pair[1];
            for (std::size_t i = 0; i < 4; ++i)
                require(std::abs(sum.a[i] - id.a[i]) <= tol, "measurement is not complete");
        }
}

// Effective operators on party k for its two settings: the Bell value is
// sum_s tr(M^s_0 K[s][0]) + tr(M^s_1 K[s][1]), with
// K[s][o] = sum coef * Tr_{other parties}[(1 (x) others' projectors) |psi><psi|].
std::array<std::array<CMatrix, 2>, 2> effective_operators(const std::vector<double>& coef, const PartyMeasurements& m,
                                                          const std::vector<cplx>& psi, int n, int k) {
    std::array<std::array<CMatrix, 2>, 2> K{{{CMatrix(2), CMatrix(2)}, {CMatrix(2), CMatrix(2)}}};
    const unsigned others = (1u << (n - 1));
    const std::size_t stride = std::size_t{1} << (n - 1 - k);
    auto expand = [&](unsigned packed, unsigned own) {
        // Insert `own` as party k's bit into an (n-1)-bit word of the others.
        unsigned full = 0, idx = 0;
        for (int j = 0; j < n; ++j) {
            const unsigned bitv = j == k ? own : bit_of(packed, static_cast<int>(idx++), n - 1);
            full = with_bit(full, j, n, bitv);
        }
        return full;
    };
    for (unsigned os = 0; os < others; ++os) {
        for (unsigned oo = 0; oo < others; ++oo) {
            double c[2][2];
            bool any = false;
            for (unsigned s = 0; s < 2; ++s)
                for (unsigned o = 0; o < 2; ++o) {
                    c[s][o] = coef[Behavior::index(n, expand(oo, o), expand(os, s))];
                    any |= c[s][o] != 0;
                }
            if (!any) continue;
            std::vector<cplx> phi = psi;
            unsigned idx = 0;
            for (int j = 0; j < n; ++j) {
                if (j == k) continue;
                const unsigned sj = bit_of(os, static_cast<int>(idx), n - 1);
                const unsigned oj = bit_of(oo, static_cast<int>(idx), n - 1);
                ++idx;
                apply_local(phi, m[static_cast<std::size_t>(j)][sj][oj], j, n);
            }
            CMatrix r(2);
            for (std::size_t i = 0; i < psi.size(); ++i) {
                const int row = (i & stride) ? 1 : 0;
                const std::size_t base = i & ~stride;
                r(row, 0) += phi[i] * std::conj(psi[base]);
                r(row, 1) += phi[i] * std::conj(psi[base | stride]);
            }
            for (unsigned s = 0; s < 2; ++s)
                for (unsigned o = 0; o < 2; ++o)
                    if (c[s][o] != 0) K[s][o] = K[s][o] + cplx(c[s][o]) * r;
        }
    }
    for (auto& ks : K)
        for (auto& kk : ks) kk = 0.5 * (kk + kk.adjoint());
    return K;
}

// Projector onto the non-negative eigenspace of a 2x2 Hermitian matrix;
// a zero eigenvalue goes to outcome 0.
CMatrix nonnegative_projector(const CMatrix& h) {
    const auto eig = hermitian_eigen(h);
    CMatrix p(2);
    for (int k = 0; k < 2; ++k) {
        if (eig.values[static_cast<std::size_t>(k)] < 0) continue;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) p(i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }
    return p;
}

SeesawResult reduce(std::vector<SeesawResult>& runs) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < runs.size(); ++k)
        if (runs[k].value > runs[best].value) best = k;
    SeesawResult out = std::move(runs[best]);
    out.best_restart = static_cast<int>(best);
    out.restarts_used = static_cast<int>(runs.size());
    out.restart_values.clear();
    for (std::size_t k = 0; k < runs.size(); ++k) out.restart_values.push_back(k == best ? out.value : runs[k].value);
    return out;
}

std::uint64_t restart_seed(std::uint64_t seed, int k) { return splitmix(seed * 0x100000001B3ull + static_cast<std::uint64_t>(k)); }

}  // namespace

void QuantumSetup::validate(double tol) const {
    require(n_parties >= 1 && n_parties <= 4, "quantum setups support 1 to 4 qubits");
    require(state.size() == (std::size_t{1} << n_parties), "state has wrong dimension");
    require(std::fabs(norm(state) - 1.0) <= tol, "state is not normalized");
    check_measurements(measurements, n_parties, tol);
}

std::array<CMatrix, 2> projective_pair(double bx, double by, double bz) {
    const double len = std::sqrt(bx * bx + by * by + bz * bz);
    require(len > 0 && std::isfinite(len), "Bloch vector must be non-zero");
    bx /= len, by /= len, bz /= len;
    CMatrix p0(2);
    p0(0, 0) = 0.5 * (1 + bz);
    p0(1, 1) = 0.5 * (1 - bz);
    p0(0, 1) = cplx(0.5 * bx, -0.5 * by);
    p0(1, 0) = cplx(0.5 * bx, 0.5 * by);
    return {p0, CMatrix::identity(2) - p0};
}

Behavior behavior_from_quantum(const QuantumSetup& s) {
    s.validate(1e-9);
    const int n = s.n_parties;
    Behavior b(n);
    for (unsigned st = 0; st < (1u << n); ++st)
        for (unsigned o = 0; o < (1u << n); ++o) {
            std::vector<cplx> phi = s.state;
            for (int k = 0; k < n; ++k)
                apply_local(phi, s.measurements[static_cast<std::size_t>(k)][bit_of(st, k, n)][bit_of(o, k, n)], k, n);
            cplx v = 0;
            for (std::size_t i = 0; i < phi.size(); ++i) v += std::conj(s.state[i]) * phi[i];
            b.at(o, st) = std::max(0.0, v.real());
        }
    return b;
}

CMatrix bell_operator(const BellExpression& e, const PartyMeasurements& m) {
    const int n = e.n_parties;
    require(static_cast<int>(m.size()) == n && e.coefficients.size() == (std::size_t{1} << (2 * n)),
            "measurements do not match the expression's arity");
    CMatrix b(1 << n);
    for (unsigned st = 0; st < (1u << n); ++st) b = b + partial_operator(e.coefficients, m, n, st, 0, 0);
    return b;
}

PartyMeasurements random_measurements(int n_parties, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    PartyMeasurements m(static_cast<std::size_t>(n_parties));
    for (auto& party : m)
        for (auto& pair : party) {
            const double x = g(rng), y = g(rng), z = g(rng);
            pair = projective_pair(x, y, z);
        }
    return m;
}

QuantumSetup random_setup(int n_parties, std::uint64_t seed) {
    std::mt19937_64 rng(splitmix(seed));
    std::normal_distribution<double> g(0.0, 1.0);
    QuantumSetup s;
    s.n_parties = n_parties;
    s.state.resize(std::size_t{1} << n_parties);
    for (auto& c : s.state) {
        const double re = g(rng), im = g(rng);
        c = cplx(re, im);
    }
    const double len = norm(s.state);
    for (auto& c : s.state) c /= len;
    s.measurements = random_measurements(n_parties, splitmix(seed + 1));
    return s;
}

SeesawResult seesaw_from(const BellExpression& e, PartyMeasurements meas, int max_iterations, double tol) {
    const int n = e.n_parties;
    SeesawResult res;
    std::vector<cplx> psi;
    double value = 0;
    for (int it = 0;; ++it) {
        const auto eig = hermitian_eigen(bell_operator(e, meas));
        value = eig.values.back();
        psi.assign(std::size_t{1} << n, 0);
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = eig.vectors(static_cast<int>(i), (1 << n) - 1);
        const bool done = !res.trace.empty() && value - res.trace.back() < tol;
        res.trace.push_back(value);
        if (done) {
            res.converged = true;
            break;
        }
        if (it >= max_iterations) break;
        for (int k = 0; k < n; ++k) {
            const auto K = effective_operators(e.coefficients, meas, psi, n, k);
            for (int s = 0; s < 2; ++s) {
                const CMatrix p0 = nonnegative_projector(K[s][0] - K[s][1]);
                meas[static_cast<std::size_t>(k)][s] = {p0, CMatrix::identity(2) - p0};
            }
        }
    }
    res.value = value;
    res.setup.n_parties = n;
    res.setup.state = psi;
    res.setup.measurements = std::move(meas);
    res.restarts_used = 1;
    return res;
}

SeesawResult seesaw_maximize(const BellExpression& e, const SeesawOptions& opt) {
    require(opt.restarts >= 1, "see-saw needs at least one restart");
    require(opt.max_iterations >= 1 && opt.tol >= 0, "bad see-saw iteration settings");
    std::vector<SeesawResult> runs(static_cast<std::size_t>(opt.restarts));
#ifdef _OPENMP
    const int threads = opt.jobs > 0 ? opt.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (int k = 0; k < opt.restarts; ++k)
        runs[static_cast<std::size_t>(k)] = seesaw_from(
            e, random_measurements(e.n_parties, restart_seed(opt.seed, k)), opt.max_iterations, opt.tol);
    return reduce(runs);
}

SeesawResult seesaw_maximize_serial(const BellExpression& e, const SeesawOptions& opt) {
    require(opt.restarts >= 1, "see-saw needs at least one restart");
    std::vector<SeesawResult> runs;
    for (int k = 0; k < opt.restarts; ++k)
        runs.push_back(seesaw_from(e, random_measurements(e.n_parties, restart_seed(opt.seed, k)), opt.max_iterations,
                                   opt.tol));
    return reduce(runs);
}

bool ordering_independence_check(const QuantumSetup& s, const std::vector<Geometry>& orderings) {
    const Behavior reference = behavior_from_quantum(s);
    for (const auto& g : orderings) {
        (void)g;  // the quantum prediction takes no geometry input
        if (behavior_from_quantum(s).table() != reference.table()) return false;
    }
    return true;
}

nlohmann::json to_json(const QuantumSetup& s) {
    nlohmann::json state = nlohmann::json::array();
    for (const auto& c : s.state) {
        state.push_back(c.real());
        state.push_back(c.imag());
    }
    nlohmann::json meas = nlohmann::json::array();
    for (const auto& party : s.measurements) {
        nlohmann::json pj = nlohmann::json::array();
        for (const auto& pair : party) {
            nlohmann::json sj = nlohmann::json::array();
            for (const auto& p : pair) {
                nlohmann::json mj = nlohmann::json::array();
                for (const auto& c : p.a) {
                    mj.push_back(c.real());
                    mj.push_back(c.imag());
                }
                sj.push_back(mj);
            }
            pj.push_back(sj);
        }
        meas.push_back(pj);
    }
    return {{"n_parties", s.n_parties},
            {"state", state},
            {"state_layout", "interleaved re,im; party A most significant qubit"},
            {"measurements", meas},
            {"measurement_layout", "[party][setting][outcome] -> 2x2 row-major, interleaved re,im"}};
}

QuantumSetup setup_from_json(const nlohmann::json& j) {
    try {
        QuantumSetup s;
        s.n_parties = j.at("n_parties").get<int>();
        require(s.n_parties >= 1 && s.n_parties <= 4, "quantum setups support 1 to 4 qubits");
        const auto st = j.at("state").get<std::vector<double>>();
        require(st.size() == (std::size_t{2} << s.n_parties), "state has wrong length");
        for (std::size_t i = 0; i < st.size(); i += 2) s.state.emplace_back(st[i], st[i + 1]);
        for (const auto& pj : j.at("measurements")) {
            std::array<std::array<CMatrix, 2>, 2> party;
            for (std::size_t sidx = 0; sidx < 2; ++sidx)
                for (std::size_t o = 0; o < 2; ++o) {
                    const auto v = pj.at(sidx).at(o).get<std::vector<double>>();
                    require(v.size() == 8, "projector needs 8 numbers");
                    party[sidx][o] = CMatrix(2);
                    for (std::size_t i = 0; i < 4; ++i) party[sidx][o].a[i] = cplx(v[2 * i], v[2 * i + 1]);
                }
            s.measurements.push_back(party);
        }
        s.validate(1e-9);
        return s;
    } catch (const nlohmann::json::exception& ex) {
        throw invalid_input(std::string("malformed quantum setup JSON: ") + ex.what());
    }
}

}  // namespace vcone
