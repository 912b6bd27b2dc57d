#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vcone/correlations.hpp"
#include "vcone/error.hpp"
#include "vcone/expressions.hpp"
#include "vcone/polytope.hpp"
#include "vcone/quantum.hpp"
#include "vcone/spacetime.hpp"
#include "vcone/vmodel.hpp"

using namespace vcone;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kCheckFail = 1, kUsage = 2, kInternal = 3 };

struct RunConfig {
    std::string r = "2";
    std::uint64_t seed = 1;
    int restarts = 50;
    bool rational = false;
    int jobs = 0;
    std::string out;
    std::string sweep;
    std::string expr = "S";
    std::string target;
    std::string behavior;
};

void emit(const RunConfig& cfg, const std::string& name, const json& j) {
    std::cout << j.dump(2) << "\n";
    if (cfg.out.empty()) return;
    std::filesystem::create_directories(cfg.out);
    std::ofstream f(std::filesystem::path(cfg.out) / (name + ".json"));
    f << j.dump(2) << "\n";
}

json event_json(const ExactEvent& e) {
    return {{"label", e.label},
            {"position", e.position.get_d()},
            {"time", e.time.get_d()},
            {"position_exact", e.position.get_str()},
            {"time_exact", e.time.get_str()}};
}

json geometry_report(const mpq_class& r) {
    const ExactGeometry g = figure3_geometry(r);
    json order = json::array();
    for (const auto& [pair, rel] : ordering(g))
        order.push_back({{"first", pair.first}, {"second", pair.second}, {"relation", to_string(rel)}});
    const auto meet = broadcast_meeting_events(g);
    const mpq_class speed = effective_speed(g.at("A"), meet.d_prime);
    json out{{"geometry", to_json(g)},
             {"ordering", order},
             {"matches_A<D<(B~C)", matches(g, "A<D<(B~C)")},
             {"d_prime", event_json(meet.d_prime)},
             {"a_prime", event_json(meet.a_prime)},
             {"effective_speed", speed.get_d()},
             {"effective_speed_exact", speed.get_str()},
             {"superluminal", speed > 1}};
    return out;
}

int cmd_geometry(const RunConfig& cfg) {
    if (!cfg.sweep.empty()) {
        std::vector<std::string> parts;
        std::stringstream ss(cfg.sweep);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        require(parts.size() == 3, "--sweep expects lo:hi:n");
        const mpq_class lo = parse_rational(parts[0]);
        const mpq_class hi = parse_rational(parts[1]);
        const int n = std::stoi(parts[2]);
        require(n >= 2 && lo > 1 && hi > lo, "--sweep needs 1 < lo < hi and n >= 2");
        std::ostringstream csv;
        csv.precision(17);
        csv << "r,d_prime_position,d_prime_time,a_prime_position,a_prime_time,effective_speed\n";
        json rows = json::array();
        bool all_superluminal = true;
        for (int k = 0; k < n; ++k) {
            const mpq_class r = lo + (hi - lo) * k / (n - 1);
            const ExactGeometry g = figure3_geometry(r);
            const auto meet = broadcast_meeting_events(g);
            const mpq_class speed = effective_speed(g.at("A"), meet.d_prime);
            all_superluminal &= speed > 1;
            csv << r.get_d() << ',' << meet.d_prime.position.get_d() << ',' << meet.d_prime.time.get_d() << ','
                << meet.a_prime.position.get_d() << ',' << meet.a_prime.time.get_d() << ',' << speed.get_d()
                << '\n';
            rows.push_back({{"r", r.get_str()}, {"effective_speed", speed.get_str()}});
        }
        if (cfg.out.empty()) {
            std::cout << csv.str();
        } else {
            std::filesystem::create_directories(cfg.out);
            std::ofstream(std::filesystem::path(cfg.out) / "geometry_sweep.csv") << csv.str();
            emit(cfg, "geometry_sweep", {{"sweep", rows}, {"all_superluminal", all_superluminal}});
        }
        std::cerr << "swept " << n << " values of r; effective speed > 1 at all: "
                  << (all_superluminal ? "yes" : "no") << "\n";
        return all_superluminal ? kOk : kCheckFail;
    }
    const mpq_class r = parse_rational(cfg.r);
    require(r > 1, "speed ratio r = v/c must exceed 1");
    const json rep = geometry_report(r);
    emit(cfg, "geometry", rep);
    std::cerr << "r = " << r.get_str() << ": D' = (" << rep["d_prime"]["position_exact"].get<std::string>() << ", "
              << rep["d_prime"]["time_exact"].get<std::string>() << "), effective speed "
              << rep["effective_speed_exact"].get<std::string>() << " c\n";
    return kOk;
}

int cmd_lemma_bound(const RunConfig& cfg) {
    const BellExpression e = expression_by_name(cfg.expr);
    require(e.n_parties == 4, "the Lemma bound needs a 4-party expression");
    json rep{{"expression", e.name}};
    const auto fl = lemma_polytope_max(e);
    rep["float"] = to_json(fl);
    std::string summary = "float optimum " + std::to_string(fl.value);
    bool ok = fl.status == LPStatus::Optimal;
    if (cfg.rational) {
        const auto ex = lemma_polytope_max_exact(e);
        rep["rational"] = to_json(ex);
        ok &= ex.status == LPStatus::Optimal;
        summary += ", exact optimum " + ex.value.get_str();
    }
    rep["optimal"] = ok;
    emit(cfg, "lemma_bound", rep);
    std::cerr << e.name << ": " << summary << "\n";
    if (!ok) throw internal_inconsistency("LP solver did not certify an optimum");
    return kOk;
}

SeesawOptions seesaw_options(const RunConfig& cfg) {
    require(cfg.restarts >= 1, "--restarts must be at least 1");
    SeesawOptions opt;
    opt.restarts = cfg.restarts;
    opt.seed = cfg.seed;
    opt.jobs = cfg.jobs;
    return opt;
}

int cmd_quantum_opt(const RunConfig& cfg) {
    const BellExpression e = expression_by_name(cfg.expr);
    const auto res = seesaw_maximize(e, seesaw_options(cfg));
    json rep{{"expression", e.name},
             {"value", res.value},
             {"classical_bound", e.classical_bound},
             {"quantum_target", e.quantum_target},
             {"best_restart", res.best_restart},
             {"restarts", res.restarts_used},
             {"converged", res.converged},
             {"restart_values", res.restart_values},
             {"trace", res.trace},
             {"setup", to_json(res.setup)},
             {"behavior", to_json(behavior_from_quantum(res.setup))}};
    emit(cfg, "quantum_opt", rep);
    std::cerr << e.name << ": see-saw value " << res.value << " (local bound " << e.classical_bound << ")\n";
    return kOk;
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "cannot open " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& ex) {
        throw invalid_input("malformed JSON in " + path + ": " + ex.what());
    }
}

int cmd_demo(const RunConfig& cfg) {
    const mpq_class r = parse_rational(cfg.r);
    require(r > 1, "speed ratio r = v/c must exceed 1");
    const BellExpression e = expression_by_name(cfg.expr);
    Behavior target;
    json source;
    if (cfg.target.empty()) {
        const auto res = seesaw_maximize(e, seesaw_options(cfg));
        target = behavior_from_quantum(res.setup);
        source = {{"kind", "see-saw optimum"}, {"seed", cfg.seed}, {"restarts", cfg.restarts}, {"value", res.value}};
    } else {
        target = behavior_from_json(read_json_file(cfg.target));
        source = {{"kind", "file"}, {"path", cfg.target}};
    }
    const DemoReport rep = signalling_demo(r, target, e);
    json j = rep.to_json();
    j["target"] = source;
    emit(cfg, "demo", j);
    for (const auto& s : rep.steps)
        std::cerr << "step " << s.index << " [" << (s.certified ? "certified" : "FAILED") << "] " << s.name << "\n";
    std::cerr << rep.conclusion << "\n";
    return rep.all_certified ? kOk : kCheckFail;
}

int cmd_check(const RunConfig& cfg) {
    const Behavior b = behavior_from_json(read_json_file(cfg.behavior));
    const auto ns = is_no_signalling(b);
    json rep{{"n_parties", b.n_parties()}, {"valid", true}, {"no_signalling", ns.pass}, {"report", ns.report.to_json()}};
    bool ok = ns.pass;
    if (b.n_parties() == 4) {
        json conds = json::array();
        bool local = true;
        const auto cb = conditional_bc_given_ad(b, 1e-15);
        for (int k = 0; k < 16; ++k) {
            if (!cb[static_cast<std::size_t>(k)].present) continue;
            const auto m = local_membership(cb[static_cast<std::size_t>(k)].bc);
            local &= m.member;
            conds.push_back({{"axdw", k}, {"local", m.member}, {"visibility", m.visibility}});
        }
        rep["bc_given_ad"] = conds;
        rep["bc_given_ad_local"] = local;
        ok &= local;
    }
    rep["pass"] = ok;
    emit(cfg, "check", rep);
    std::cerr << "no-signalling: " << (ns.pass ? "pass" : "FAIL");
    if (!ns.pass && ns.report.worst >= 0)
        std::cerr << " (worst: " << ns.report.entries[static_cast<std::size_t>(ns.report.worst)].name << ", variation "
                  << ns.report.max_variation << ")";
    std::cerr << "\n";
    return ok ? kOk : kCheckFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"v-causal models: Lemma bound, quantum violation and signalling demonstration"};
    app.require_subcommand(1);
    RunConfig cfg;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "RNG seed")->envname("VCONE_SEED");
        sub->add_option("--jobs", cfg.jobs, "cap on OpenMP threads (0: default)")->envname("VCONE_JOBS");
        sub->add_option("--out", cfg.out, "directory for output files")->envname("VCONE_OUT");
    };

    auto* geo = app.add_subcommand("geometry", "events of the four-party configuration, meeting points and speeds");
    geo->add_option("--r", cfg.r, "speed ratio v/c (> 1; decimals and fractions are exact)")->envname("VCONE_R");
    geo->add_option("--sweep", cfg.sweep,
                    "lo:hi:n sweep of r; CSV columns: r,d_prime_position,d_prime_time,a_prime_position,"
                    "a_prime_time,effective_speed")
        ->envname("VCONE_SWEEP");
    common(geo);

    auto* lemma = app.add_subcommand("lemma-bound", "maximize an expression over the Lemma polytope");
    lemma->add_option("--expr", cfg.expr, "S, chsh, abcd or a JSON expression file")->envname("VCONE_EXPR");
    lemma->add_flag("--rational", cfg.rational, "also solve in exact rational arithmetic")->envname("VCONE_RATIONAL");
    common(lemma);

    auto* qopt = app.add_subcommand("quantum-opt", "see-saw maximization over qubit strategies");
    qopt->add_option("--expr", cfg.expr, "S, chsh, abcd or a JSON expression file")->envname("VCONE_EXPR");
    qopt->add_option("--restarts", cfg.restarts, "random restarts (>= 1)")->envname("VCONE_RESTARTS");
    common(qopt);

    auto* demo = app.add_subcommand("demo", "six-step signalling demonstration");
    demo->add_option("--r", cfg.r, "speed ratio v/c (> 1)")->envname("VCONE_R");
    demo->add_option("--expr", cfg.expr, "Bell expression")->envname("VCONE_EXPR");
    demo->add_option("--restarts", cfg.restarts, "see-saw restarts for the default target")
        ->envname("VCONE_RESTARTS");
    demo->add_option("--target", cfg.target, "behavior JSON to use instead of the see-saw optimum")
        ->envname("VCONE_TARGET");
    common(demo);

    auto* check = app.add_subcommand("check", "validate a behavior, test no-signalling and BC|AD locality");
    check->add_option("behavior", cfg.behavior, "behavior JSON file")->required();
    common(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex);
        return code == 0 ? kOk : kUsage;
    }
    if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);

    try {
        if (*geo) return cmd_geometry(cfg);
        if (*lemma) return cmd_lemma_bound(cfg);
        if (*qopt) return cmd_quantum_opt(cfg);
        if (*demo) return cmd_demo(cfg);
        if (*check) return cmd_check(cfg);
    } catch (const invalid_input& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kUsage;
    } catch (const std::exception& ex) {
        std::cerr << "internal error: " << ex.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
