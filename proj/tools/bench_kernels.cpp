#include <omp.h>

#include <chrono>
#include <cmath>
#include <iostream>

#include "vcone/expressions.hpp"
#include "vcone/quantum.hpp"
#include "vcone/vmodel.hpp"

using namespace vcone;

namespace {

template <class F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const int restarts = argc > 1 ? std::atoi(argv[1]) : 16;
    std::cout << "threads: " << omp_get_max_threads() << "\n";

    const BellExpression s = expression_S();
    SeesawOptions opt;
    opt.restarts = restarts;
    SeesawResult par, ser;
    const double t_par = seconds([&] { par = seesaw_maximize(s, opt); });
    const double t_ser = seconds([&] { ser = seesaw_maximize_serial(s, opt); });
    std::cout << "seesaw S, " << restarts << " restarts: parallel " << t_par << " s, serial " << t_ser
              << " s, values " << par.value << " / " << ser.value
              << (par.value == ser.value ? " (identical)" : " (DIFFER)") << "\n";

    const Geometry g = to_double(figure3_geometry(mpq_class(2)));
    const VStrategy strat = random_strategy(4, 64, 7);
    const int reps = 200;
    Behavior bp, bs;
    const double t_sp = seconds([&] {
        for (int k = 0; k < reps; ++k) bp = simulate(strat, g).behavior;
    });
    const double t_ss = seconds([&] {
        for (int k = 0; k < reps; ++k) bs = simulate_serial(strat, g).behavior;
    });
    double diff = 0;
    for (std::size_t i = 0; i < bp.size(); ++i) diff = std::max(diff, std::fabs(bp.table()[i] - bs.table()[i]));
    std::cout << "simulate, 64 lambdas x " << reps << ": parallel " << t_sp << " s, serial " << t_ss
              << " s, max difference " << diff << "\n";
    return par.value == ser.value && diff == 0 ? 0 : 1;
}
