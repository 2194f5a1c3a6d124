#include "mpmdp/mec.hpp"

#include <algorithm>
#include <functional>

namespace mpmdp {

namespace {

/// Tarjan SCC over the state graph induced by the still-alive actions.
/// Returns the component id per state (ids are otherwise arbitrary).
std::vector<int> scc_ids(const Mdp& m, const std::vector<bool>& alive) {
    int n = static_cast<int>(m.states.size());
    std::vector<int> ids(n, -1), low(n), num(n, -1), stack;
    std::vector<bool> on_stack(n, false);
    int counter = 0, comp = 0;

    // Iterative Tarjan to stay safe on deep graphs.
    struct Frame { int state; size_t ai; size_t di; };
    for (int root = 0; root < n; ++root) {
        if (num[root] != -1) continue;
        std::vector<Frame> call;
        call.push_back({root, 0, 0});
        num[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            int s = f.state;
            bool descended = false;
            while (f.ai < m.act[s].size()) {
                int a = m.act[s][f.ai];
                if (!alive[a]) { ++f.ai; f.di = 0; continue; }
                const auto& delta = m.actions[a].delta;
                if (f.di >= delta.size()) { ++f.ai; f.di = 0; continue; }
                int t = delta[f.di].first;
                ++f.di;
                if (num[t] == -1) {
                    num[t] = low[t] = counter++;
                    stack.push_back(t);
                    on_stack[t] = true;
                    call.push_back({t, 0, 0});
                    descended = true;
                    break;
                }
                if (on_stack[t]) low[s] = std::min(low[s], num[t]);
            }
            if (descended) continue;
            if (low[s] == num[s]) {
                int t;
                do {
                    t = stack.back();
                    stack.pop_back();
                    on_stack[t] = false;
                    ids[t] = comp;
                } while (t != s);
                ++comp;
            }
            call.pop_back();
            if (!call.empty()) {
                int parent = call.back().state;
                low[parent] = std::min(low[parent], low[s]);
            }
        }
    }
    return ids;
}

} // namespace

MecDecomposition mec_decomposition(const Mdp& m) {
    int num_states = static_cast<int>(m.states.size());
    int num_actions = static_cast<int>(m.actions.size());
    std::vector<bool> alive(num_actions, true);

    std::vector<int> ids;
    bool changed = true;
    while (changed) {
        changed = false;
        ids = scc_ids(m, alive);
        for (int a = 0; a < num_actions; ++a) {
            if (!alive[a]) continue;
            int home = ids[m.actions[a].source];
            for (const auto& [t, p] : m.actions[a].delta) {
                if (ids[t] != home) {
                    alive[a] = false;
                    changed = true;
                    break;
                }
            }
        }
    }

    MecDecomposition dec;
    dec.mec_of_state.assign(num_states, -1);
    dec.mec_of_action.assign(num_actions, -1);

    // An SCC is a MEC iff it kept at least one action; a state that lost all
    // its actions is necessarily a singleton SCC by construction.
    std::vector<std::vector<int>> comp_states(num_states);
    for (int s = 0; s < num_states; ++s) comp_states[ids[s]].push_back(s);

    std::vector<int> order;
    for (int c = 0; c < num_states; ++c) {
        if (comp_states[c].empty()) continue;
        bool has_action = false;
        for (int s : comp_states[c]) {
            for (int a : m.act[s]) has_action = has_action || alive[a];
        }
        if (has_action) order.push_back(c);
    }
    std::sort(order.begin(), order.end(), [&](int c1, int c2) {
        return *std::min_element(comp_states[c1].begin(), comp_states[c1].end()) <
               *std::min_element(comp_states[c2].begin(), comp_states[c2].end());
    });

    for (int c : order) {
        MecDecomposition::Mec mec;
        mec.states = comp_states[c];
        std::sort(mec.states.begin(), mec.states.end());
        for (int s : mec.states) {
            for (int a : m.act[s]) {
                if (alive[a]) mec.actions.push_back(a);
            }
        }
        std::sort(mec.actions.begin(), mec.actions.end());
        int idx = static_cast<int>(dec.mecs.size());
        for (int s : mec.states) dec.mec_of_state[s] = idx;
        for (int a : mec.actions) dec.mec_of_action[a] = idx;
        dec.mecs.push_back(std::move(mec));
    }
    for (int a = 0; a < num_actions; ++a) {
        if (dec.mec_of_action[a] == -1) dec.non_mec_actions.push_back(a);
    }
    return dec;
}

Mdp restrict_to_mec(const Mdp& m, const MecDecomposition::Mec& mec) {
    MecDecomposition dec = mec_decomposition(m);
    bool found = false;
    for (const auto& candidate : dec.mecs) {
        found = found || (candidate.states == mec.states && candidate.actions == mec.actions);
    }
    if (!found) throw ValidationError("restrict_to_mec: the given component is not a MEC of the model");

    Mdp sub;
    sub.dimension = m.dimension;
    std::vector<int> state_map(m.states.size(), -1);
    for (int s : mec.states) {
        state_map[s] = static_cast<int>(sub.states.size());
        sub.states.push_back(m.states[s]);
    }
    sub.initial = 0;
    sub.act.resize(sub.states.size());
    for (int a : mec.actions) {
        const Action& src = m.actions[a];
        Action copy;
        copy.name = src.name;
        copy.source = state_map[src.source];
        copy.reward = src.reward;
        for (const auto& [t, p] : src.delta) copy.delta.emplace_back(state_map[t], p);
        sub.act[copy.source].push_back(static_cast<int>(sub.actions.size()));
        sub.actions.push_back(std::move(copy));
    }
    sub.validate();
    return sub;
}

} // namespace mpmdp
