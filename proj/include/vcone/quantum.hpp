#pragma once
#include <array>
#include <cstdint>
#include <vector>

#include "vcone/correlations.hpp"
#include "vcone/linalg.hpp"
#include "vcone/spacetime.hpp"

namespace vcone {

// Pure state on n qubits (party A is the most significant tensor factor)
// and, per party and setting, the projectors {M^s_0, M^s_1}.
struct QuantumSetup {
    int n_parties = 0;
    std::vector<cplx> state;
    std::vector<std::array<std::array<CMatrix, 2>, 2>> measurements;  // [party][setting][outcome]

    // Throws invalid_input on a non-unit state or non-projective measurements.
    void validate(double tol = kAlgebraicTol) const;
};

using PartyMeasurements = std::vector<std::array<std::array<CMatrix, 2>, 2>>;

// Rank-one projector pair built from a Bloch vector (normalized internally).
std::array<CMatrix, 2> projective_pair(double bx, double by, double bz);

Behavior behavior_from_quantum(const QuantumSetup& s);

CMatrix bell_operator(const BellExpression& e, const PartyMeasurements& m);

struct SeesawOptions {
    int restarts = 50;
    int max_iterations = 500;
    double tol = 1e-10;
    std::uint64_t seed = 1;
    int jobs = 0;  // 0: OpenMP default
};

struct SeesawResult {
    QuantumSetup setup;
    double value = 0;
    std::vector<double> trace;  // values of the winning restart, one per iteration
    int restarts_used = 0;
    int best_restart = -1;
    bool converged = false;
    std::vector<double> restart_values;
};

// Restarts run in parallel; the reduction keeps the largest value and
// breaks ties by the lower restart index, so the result does not depend on
// the thread count.
SeesawResult seesaw_maximize(const BellExpression& e, const SeesawOptions& opt);
// Same algorithm, one restart after another.  Kept as the reference the
// parallel version is tested and benchmarked against.
SeesawResult seesaw_maximize_serial(const BellExpression& e, const SeesawOptions& opt);

// One restart from the given measurements; exposed for tests.
SeesawResult seesaw_from(const BellExpression& e, PartyMeasurements start, int max_iterations, double tol);
PartyMeasurements random_measurements(int n_parties, std::uint64_t seed);
QuantumSetup random_setup(int n_parties, std::uint64_t seed);

// Quantum predictions carry no ordering parameter: the behavior is computed
// once per geometry and compared; true iff every copy is identical.
bool ordering_independence_check(const QuantumSetup& s, const std::vector<Geometry>& orderings);

nlohmann::json to_json(const QuantumSetup& s);
QuantumSetup setup_from_json(const nlohmann::json& j);

}  // namespace vcone
