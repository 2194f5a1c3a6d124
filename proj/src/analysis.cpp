#include "mpmdp/analysis.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <json.hpp>

#include "mpmdp/errors.hpp"
#include "mpmdp/linalg.hpp"

namespace mpmdp {

using nlohmann::ordered_json;

namespace {

struct EntryOutcome {
    int memory;
    int action;
    Rational p;
};

std::vector<EntryOutcome> entry_outcomes(const Mdp& m, const FiniteStrategy& s, int state,
                                         int pre_memory) {
    std::vector<EntryOutcome> out;
    if (pre_memory == 0) {
        for (const auto& [ai, p] : s.transient_next[state]) out.push_back({0, ai, p});
        for (const auto& [mi, q] : s.switch_to[state]) {
            const auto table = s.mode_next[mi].find(state);
            if (table == s.mode_next[mi].end())
                throw ValidationError("strategy switches to " + s.memory[mi].label() +
                                      " at state " + m.states[state] +
                                      " but that mode has no action distribution there");
            for (const auto& [ai, w] : table->second) out.push_back({mi, ai, q * w});
        }
    } else {
        const auto table = s.mode_next[pre_memory].find(state);
        if (table == s.mode_next[pre_memory].end())
            throw ValidationError("strategy can reach state " + m.states[state] + " in " +
                                  s.memory[pre_memory].label() +
                                  " but that mode has no action distribution there");
        for (const auto& [ai, w] : table->second) out.push_back({pre_memory, ai, w});
    }
    return out;
}

} // namespace

ProductChain product_chain(const Mdp& m, const FiniteStrategy& s) {
    s.validate(m);
    ProductChain chain;
    std::map<std::tuple<int, int, int>, int> index;
    const auto locate = [&](int state, int memory, int action) {
        const auto key = std::make_tuple(state, memory, action);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        const int idx = static_cast<int>(chain.locations.size());
        index.emplace(key, idx);
        chain.locations.push_back({state, memory, action});
        chain.initial.emplace_back();
        chain.next.emplace_back();
        return idx;
    };

    std::vector<int> queue;
    std::vector<bool> queued;
    const auto enqueue = [&](int idx) {
        if (static_cast<std::size_t>(idx) >= queued.size()) queued.resize(idx + 1, false);
        if (!queued[idx]) {
            queued[idx] = true;
            queue.push_back(idx);
        }
    };
    for (const auto& o : entry_outcomes(m, s, m.initial, 0)) {
        const int idx = locate(m.initial, o.memory, o.action);
        chain.initial[idx] = chain.initial[idx] + o.p;
        enqueue(idx);
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int idx = queue[head];
        const auto loc = chain.locations[idx];
        std::map<int, Rational> edges;
        for (const auto& [target, p] : m.actions[loc.action].delta) {
            for (const auto& o : entry_outcomes(m, s, target, loc.memory)) {
                const int to = locate(target, o.memory, o.action);
                edges[to] = edges[to] + p * o.p;
            }
        }
        auto& row = chain.next[idx];
        for (const auto& [to, p] : edges) {
            if (!p.is_zero()) {
                row.push_back({to, p});
                enqueue(to);
            }
        }
    }
    return chain;
}

namespace {

/// Iterative Tarjan SCC over the chain graph; returns component index per
/// location, components numbered in a deterministic order.
std::vector<int> scc_components(const ProductChain& chain, int& count) {
    const int n = static_cast<int>(chain.locations.size());
    std::vector<int> comp(n, -1), low(n, 0), num(n, -1), stack;
    std::vector<bool> on_stack(n, false);
    int next_num = 0;
    count = 0;
    struct Frame {
        int v;
        std::size_t edge;
    };
    for (int root = 0; root < n; ++root) {
        if (num[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        num[root] = low[root] = next_num++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& f = frames.back();
            if (f.edge < chain.next[f.v].size()) {
                const int w = chain.next[f.v][f.edge++].first;
                if (num[w] == -1) {
                    num[w] = low[w] = next_num++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], num[w]);
                }
            } else {
                if (low[f.v] == num[f.v]) {
                    while (true) {
                        const int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp[w] = count;
                        if (w == f.v) break;
                    }
                    ++count;
                }
                const int v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    return comp;
}

std::vector<Rational> stationary_distribution(const ProductChain& chain,
                                              const std::vector<int>& locs) {
    const std::size_t k = locs.size();
    std::map<int, int> pos;
    for (std::size_t i = 0; i < k; ++i) pos[locs[i]] = static_cast<int>(i);
    Matrix a(k + 1, std::vector<Rational>(k));
    std::vector<Rational> b(k + 1);
    for (std::size_t i = 0; i < k; ++i) {
        for (const auto& [to, p] : chain.next[locs[i]]) {
            auto it = pos.find(to);
            if (it == pos.end())
                throw SolveError("bottom component of the product chain has an outgoing edge");
            a[it->second][i] = a[it->second][i] + p;
        }
        a[i][i] = a[i][i] - Rational(1);
        a[k][i] = Rational(1);
    }
    b[k] = Rational(1);
    auto pi = solve_unique(std::move(a), std::move(b));
    if (!pi) throw SolveError("stationary system of a bottom component was singular");
    return *pi;
}

} // namespace

StrategyEvaluation evaluate(const Mdp& m, const FiniteStrategy& s, const Query& q) {
    validate_query(m, q, /*require_exp=*/false);
    const ProductChain chain = product_chain(m, s);
    const int n_loc = static_cast<int>(chain.locations.size());
    const int n = m.dimension;

    int comp_count = 0;
    const auto comp = scc_components(chain, comp_count);
    std::vector<bool> bottom(comp_count, true);
    for (int v = 0; v < n_loc; ++v) {
        for (const auto& [to, p] : chain.next[v]) {
            if (comp[to] != comp[v]) bottom[comp[v]] = false;
        }
    }

    StrategyEvaluation ev;
    std::vector<int> bscc_of_comp(comp_count, -1);
    for (int v = 0; v < n_loc; ++v) {
        if (!bottom[comp[v]]) continue;
        if (bscc_of_comp[comp[v]] == -1) {
            bscc_of_comp[comp[v]] = static_cast<int>(ev.bsccs.size());
            ev.bsccs.push_back(BsccSummary{});
        }
        ev.bsccs[bscc_of_comp[comp[v]]].locations.push_back(v);
    }

    // Absorption probabilities.
    std::vector<int> transient;
    std::vector<int> transient_pos(n_loc, -1);
    for (int v = 0; v < n_loc; ++v) {
        if (!bottom[comp[v]]) {
            transient_pos[v] = static_cast<int>(transient.size());
            transient.push_back(v);
        }
    }
    const std::size_t t = transient.size();
    const std::size_t k = ev.bsccs.size();
    Matrix absorb; // per transient location, per bscc
    if (t > 0) {
        Matrix a(t, std::vector<Rational>(t));
        Matrix r(t, std::vector<Rational>(k));
        for (std::size_t i = 0; i < t; ++i) {
            a[i][i] = Rational(1);
            for (const auto& [to, p] : chain.next[transient[i]]) {
                if (transient_pos[to] >= 0) {
                    a[i][transient_pos[to]] = a[i][transient_pos[to]] - p;
                } else {
                    const int d = bscc_of_comp[comp[to]];
                    r[i][d] = r[i][d] + p;
                }
            }
        }
        auto z = solve_unique_multi(std::move(a), std::move(r));
        if (!z) throw SolveError("absorption system of the product chain was singular");
        absorb = std::move(*z);
    }
    for (std::size_t d = 0; d < k; ++d) {
        Rational prob;
        for (int v : ev.bsccs[d].locations) prob = prob + chain.initial[v];
        for (std::size_t i = 0; i < t; ++i) prob = prob + chain.initial[transient[i]] * absorb[i][d];
        ev.bsccs[d].probability = prob;
    }

    // Mean payoffs inside each bottom component.
    for (auto& bscc : ev.bsccs) {
        const auto pi = stationary_distribution(chain, bscc.locations);
        bscc.mean_payoff.assign(n, Rational());
        bscc.memory = chain.locations[bscc.locations[0]].memory;
        for (std::size_t i = 0; i < bscc.locations.size(); ++i) {
            const auto& loc = chain.locations[bscc.locations[i]];
            if (loc.memory != bscc.memory) bscc.memory = -1;
            for (int dim = 0; dim < n; ++dim)
                bscc.mean_payoff[dim] =
                    bscc.mean_payoff[dim] + pi[i] * m.actions[loc.action].reward[dim];
        }
    }

    ev.expectation.assign(n, Rational());
    for (const auto& bscc : ev.bsccs) {
        for (int dim = 0; dim < n; ++dim)
            ev.expectation[dim] = ev.expectation[dim] + bscc.probability * bscc.mean_payoff[dim];
    }

    const Rational eps = s.epsilon;
    ev.sat_thresholds.resize(n);
    for (int dim = 0; dim < n; ++dim) ev.sat_thresholds[dim] = q.sat[dim] - eps;
    ev.sat_probability.assign(n, Rational());
    for (const auto& bscc : ev.bsccs) {
        for (int dim = 0; dim < n; ++dim) {
            if (bscc.mean_payoff[dim] >= ev.sat_thresholds[dim])
                ev.sat_probability[dim] = ev.sat_probability[dim] + bscc.probability;
        }
    }

    ev.pass = true;
    if (q.exp.has_value()) {
        ev.expectation_thresholds.resize(n);
        for (int dim = 0; dim < n; ++dim) {
            ev.expectation_thresholds[dim] = (*q.exp)[dim] - eps;
            if (ev.expectation[dim] < ev.expectation_thresholds[dim]) {
                ev.pass = false;
                ev.failures.push_back("expectation of dimension " + std::to_string(dim + 1) +
                                      " is " + ev.expectation[dim].str() + ", needs at least " +
                                      ev.expectation_thresholds[dim].str());
            }
        }
    }

    const bool per_dim = q.variant != QueryVariant::MultiQuantJoint;
    if (per_dim) {
        for (int dim = 0; dim < n; ++dim) {
            if (ev.sat_probability[dim] < q.pr[dim]) {
                ev.pass = false;
                ev.failures.push_back(
                    "probability of mean payoff >= " + ev.sat_thresholds[dim].str() +
                    " in dimension " + std::to_string(dim + 1) + " is " +
                    ev.sat_probability[dim].str() + ", needs at least " + q.pr[dim].str());
            }
        }
    }

    if (q.variant == QueryVariant::MultiQuantJoint ||
        q.variant == QueryVariant::MultiQuantConjunctiveJoint) {
        ev.has_joint = true;
        const auto& base = q.is_conjunctive_joint() ? q.sat_joint : q.sat;
        ev.joint_thresholds.resize(n);
        for (int dim = 0; dim < n; ++dim) ev.joint_thresholds[dim] = base[dim] - eps;
        for (const auto& bscc : ev.bsccs) {
            bool all = true;
            for (int dim = 0; dim < n; ++dim) {
                if (bscc.mean_payoff[dim] < ev.joint_thresholds[dim]) all = false;
            }
            if (all) ev.joint_probability = ev.joint_probability + bscc.probability;
        }
        if (ev.joint_probability < q.pr_joint) {
            ev.pass = false;
            ev.failures.push_back("probability of meeting all joint thresholds " +
                                  to_string(ev.joint_thresholds) + " at once is " +
                                  ev.joint_probability.str() + ", needs at least " +
                                  q.pr_joint.str());
        }
    }
    return ev;
}

namespace {

ordered_json rationals_to_json(const std::vector<Rational>& v) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : v) arr.push_back(r.str());
    return arr;
}

} // namespace

std::string serialize_evaluation(const StrategyEvaluation& e, const FiniteStrategy& s) {
    ordered_json doc;
    doc["verdict"] = e.pass ? "PASS" : "FAIL";
    doc["expectation"] = rationals_to_json(e.expectation);
    if (!e.expectation_thresholds.empty())
        doc["expectation_thresholds"] = rationals_to_json(e.expectation_thresholds);
    doc["sat_thresholds"] = rationals_to_json(e.sat_thresholds);
    doc["sat_probability"] = rationals_to_json(e.sat_probability);
    if (e.has_joint) {
        doc["joint_thresholds"] = rationals_to_json(e.joint_thresholds);
        doc["joint_probability"] = e.joint_probability.str();
    }
    doc["bsccs"] = ordered_json::array();
    for (const auto& bscc : e.bsccs) {
        ordered_json b;
        b["memory"] = bscc.memory >= 0 ? s.memory[bscc.memory].label() : std::string("mixed");
        b["probability"] = bscc.probability.str();
        b["mean_payoff"] = rationals_to_json(bscc.mean_payoff);
        b["size"] = bscc.locations.size();
        doc["bsccs"].push_back(b);
    }
    doc["failures"] = ordered_json::array();
    for (const auto& f : e.failures) doc["failures"].push_back(f);
    return doc.dump(2) + "\n";
}

} // namespace mpmdp
