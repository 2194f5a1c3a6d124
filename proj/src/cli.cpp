#include "mpmdp/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpmdp/analysis.hpp"
#include "mpmdp/errors.hpp"
#include "mpmdp/lp_build.hpp"
#include "mpmdp/mec.hpp"
#include "mpmdp/model.hpp"
#include "mpmdp/pareto.hpp"
#include "mpmdp/reduction.hpp"
#include "mpmdp/simplex.hpp"
#include "mpmdp/simulate.hpp"
#include "mpmdp/strategy.hpp"

namespace mpmdp::cli {

namespace {

using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) throw Error("cannot read " + path);
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
    if (!out.good()) throw Error("cannot write " + path);
}

Rational parse_epsilon(const std::string& text) {
    const Rational eps = Rational::parse(text);
    if (!(eps > Rational(0)) || !(eps < Rational(1)))
        throw ValidationError("epsilon must lie strictly between 0 and 1");
    return eps;
}

struct CommonInputs {
    std::string model_path;
    std::string query_path;

    Mdp model() const { return parse_mdp(read_file(model_path)); }
    Query query(const Mdp& m, bool require_exp) const {
        Query q = parse_query(read_file(query_path));
        validate_query(m, q, require_exp);
        return q;
    }
};

void add_model_query(CLI::App* cmd, CommonInputs& in) {
    cmd->add_option("--model", in.model_path, "MDP file (JSON)")->required();
    cmd->add_option("--query", in.query_path, "query file (JSON)")->required();
}

ordered_json lp_summary(const LpInstance& lp, const SolveStats& stats) {
    ordered_json j;
    j["variables"] = lp.vars.size();
    j["constraints"] = lp.constraints.size();
    j["solved_columns"] = stats.solved_columns;
    j["solved_rows"] = stats.solved_rows;
    return j;
}

ordered_json stat_block(const SolveStats& stats) {
    ordered_json j;
    j["pivots"] = stats.pivots;
    j["max_coefficient_bits"] = stats.max_coefficient_bits;
    return j;
}

long elapsed_ms(const std::chrono::steady_clock::time_point& from) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - from)
        .count();
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"solver and strategy toolkit for multi-dimensional mean-payoff MDP queries"};
    app.require_subcommand(1);

    CommonInputs check_in;
    std::string check_dump;
    bool check_stats = false, check_no_prune = false;
    auto* check_cmd =
        app.add_subcommand("check", "decide whether a query is realizable on a model");
    add_model_query(check_cmd, check_in);
    check_cmd->add_option("--dump-lp", check_dump, "write the program to this file");
    check_cmd->add_flag("--stats", check_stats, "include solver statistics");
    check_cmd->add_flag("--no-prune", check_no_prune, "skip mode feasibility pruning");

    CommonInputs synth_in;
    std::string synth_out, synth_eps = "1/100";
    bool synth_stats = false, synth_no_prune = false;
    auto* synth_cmd =
        app.add_subcommand("synth", "synthesize a witness strategy for a realizable query");
    add_model_query(synth_cmd, synth_in);
    synth_cmd->add_option("--out", synth_out, "strategy output file")->required();
    synth_cmd->add_option("--epsilon", synth_eps,
                          "slack of the witness strategy (rational in (0,1), default 1/100)");
    synth_cmd->add_flag("--stats", synth_stats, "include solver statistics");
    synth_cmd->add_flag("--no-prune", synth_no_prune, "skip mode feasibility pruning");

    CommonInputs verify_in;
    std::string verify_strategy;
    auto* verify_cmd = app.add_subcommand(
        "verify-strategy", "exactly evaluate a strategy against a query's relaxed thresholds");
    add_model_query(verify_cmd, verify_in);
    verify_cmd->add_option("--strategy", verify_strategy, "strategy file (JSON)")->required();

    CommonInputs sim_in;
    std::string sim_strategy;
    SimulationOptions sim_opts;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo estimate of a strategy");
    add_model_query(sim_cmd, sim_in);
    sim_cmd->add_option("--strategy", sim_strategy, "strategy file (JSON)")->required();
    sim_cmd->add_option("--runs", sim_opts.runs, "number of runs (default 1000)");
    sim_cmd->add_option("--horizon", sim_opts.horizon, "steps per run (default 100000)");
    sim_cmd->add_option("--seed", sim_opts.seed, "random seed (default 0)");

    CommonInputs pareto_in;
    std::string pareto_eps = "1/10", pareto_axis = "exp";
    auto* pareto_cmd =
        app.add_subcommand("pareto", "approximate the frontier of achievable thresholds");
    add_model_query(pareto_cmd, pareto_in);
    pareto_cmd->add_option("--epsilon", pareto_eps,
                           "approximation accuracy (positive rational, default 1/10)");
    pareto_cmd->add_option("--free", pareto_axis, "free axis: exp (default), sat, pr, or all");

    std::string mec_model;
    auto* mec_cmd = app.add_subcommand("mec", "print the maximal end components of a model");
    mec_cmd->add_option("--model", mec_model, "MDP file (JSON)")->required();

    std::string sat_dimacs, sat_out_model, sat_out_query;
    auto* sat_cmd = app.add_subcommand(
        "sat2mdp", "encode a DIMACS CNF formula as a realizability query");
    sat_cmd->add_option("--dimacs", sat_dimacs, "CNF input file")->required();
    sat_cmd->add_option("--out-model", sat_out_model, "model output file")->required();
    sat_cmd->add_option("--out-query", sat_out_query, "query output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*check_cmd) {
            const Mdp m = check_in.model();
            const Query q = check_in.query(m, true);
            BuildOptions opts;
            opts.prune_modes = !check_no_prune;
            const auto start = std::chrono::steady_clock::now();
            const LpInstance lp = build_lp(m, q, opts);
            if (!check_dump.empty()) write_file(check_dump, dump_lp(lp));
            const SolveOutcome outcome = solve(lp);
            ordered_json doc;
            doc["command"] = "check";
            doc["variant"] = variant_name(q.variant);
            doc["realizable"] = outcome.status == SolveStatus::Optimal;
            doc["status"] = status_name(outcome.status);
            doc["lp"] = lp_summary(lp, outcome.stats);
            doc["time_ms"] = elapsed_ms(start);
            if (check_stats) doc["stats"] = stat_block(outcome.stats);
            std::cout << doc.dump(2) << "\n";
            return outcome.status == SolveStatus::Optimal ? 0 : 1;
        }
        if (*synth_cmd) {
            const Mdp m = synth_in.model();
            const Query q = synth_in.query(m, true);
            const Rational eps = parse_epsilon(synth_eps);
            BuildOptions opts;
            opts.prune_modes = !synth_no_prune;
            const auto start = std::chrono::steady_clock::now();
            const LpInstance lp = build_lp(m, q, opts);
            const SolveOutcome outcome = solve(lp);
            ordered_json doc;
            doc["command"] = "synth";
            doc["variant"] = variant_name(q.variant);
            doc["realizable"] = outcome.status == SolveStatus::Optimal;
            doc["status"] = status_name(outcome.status);
            doc["lp"] = lp_summary(lp, outcome.stats);
            if (outcome.status == SolveStatus::Optimal) {
                const FiniteStrategy st = synthesize(m, q, lp, outcome.assignment, eps);
                write_file(synth_out, serialize_strategy(st, m));
                doc["witness"] = synth_out;
                doc["epsilon"] = eps.str();
                doc["memory_elements"] = st.memory.size();
            }
            doc["time_ms"] = elapsed_ms(start);
            if (synth_stats) doc["stats"] = stat_block(outcome.stats);
            std::cout << doc.dump(2) << "\n";
            return outcome.status == SolveStatus::Optimal ? 0 : 1;
        }
        if (*verify_cmd) {
            const Mdp m = verify_in.model();
            const Query q = verify_in.query(m, false);
            const FiniteStrategy st = parse_strategy(read_file(verify_strategy), m);
            const StrategyEvaluation ev = evaluate(m, st, q);
            std::cout << serialize_evaluation(ev, st);
            return ev.pass ? 0 : 1;
        }
        if (*sim_cmd) {
            const Mdp m = sim_in.model();
            const Query q = sim_in.query(m, false);
            const FiniteStrategy st = parse_strategy(read_file(sim_strategy), m);
            const SimulationReport rep = simulate(m, st, q, sim_opts);
            std::cout << serialize_report(rep, m);
            return 0;
        }
        if (*pareto_cmd) {
            const Mdp m = pareto_in.model();
            const auto axis = axis_from_name(pareto_axis);
            if (!axis) throw ValidationError("--free must be exp, sat, pr, or all");
            // exp thresholds are not needed when they are the free axis
            const Query q = pareto_in.query(m, *axis != FreeAxis::Exp && *axis != FreeAxis::All);
            const ParetoApproximation res = pareto_approx(m, q, parse_epsilon(pareto_eps), *axis);
            std::cout << serialize_pareto(res);
            return 0;
        }
        if (*mec_cmd) {
            const Mdp m = parse_mdp(read_file(mec_model));
            const MecDecomposition dec = mec_decomposition(m);
            ordered_json doc;
            doc["command"] = "mec";
            doc["mecs"] = ordered_json::array();
            for (const auto& mec : dec.mecs) {
                ordered_json entry;
                entry["states"] = ordered_json::array();
                for (int s : mec.states) entry["states"].push_back(m.states[s]);
                entry["actions"] = ordered_json::array();
                for (int a : mec.actions) entry["actions"].push_back(m.actions[a].name);
                doc["mecs"].push_back(entry);
            }
            doc["non_mec_actions"] = ordered_json::array();
            for (int a : dec.non_mec_actions) doc["non_mec_actions"].push_back(m.actions[a].name);
            std::cout << doc.dump(2) << "\n";
            return 0;
        }
        if (*sat_cmd) {
            const Cnf cnf = parse_dimacs(read_file(sat_dimacs));
            const SatInstance inst = sat_to_instance(cnf);
            write_file(sat_out_model, serialize_mdp(inst.model));
            write_file(sat_out_query, serialize_query(inst.query));
            ordered_json doc;
            doc["command"] = "sat2mdp";
            doc["variables"] = cnf.variables;
            doc["clauses"] = cnf.clauses.size();
            doc["states"] = inst.model.states.size();
            doc["actions"] = inst.model.actions.size();
            doc["dimension"] = inst.model.dimension;
            doc["model"] = sat_out_model;
            doc["query"] = sat_out_query;
            std::cout << doc.dump(2) << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

} // namespace mpmdp::cli
