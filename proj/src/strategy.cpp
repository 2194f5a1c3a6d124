#include "mpmdp/strategy.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mpmdp/errors.hpp"
#include "mpmdp/linalg.hpp"
#include "mpmdp/mec.hpp"

namespace mpmdp {

using nlohmann::ordered_json;

Rational distribution_total(const Distribution& d) {
    Rational t;
    for (const auto& [idx, p] : d) t = t + p;
    return t;
}

std::string MemoryElement::label() const {
    if (kind == Kind::Transient) return "transient";
    if (!tagged) return "mode";
    std::ostringstream out;
    out << "mode(dims=";
    bool first = true;
    for (int i = 0; i < 32; ++i) {
        if (subset & (1u << i)) {
            if (!first) out << ",";
            out << (i + 1);
            first = false;
        }
    }
    if (first) out << "none";
    if (flag == 1) out << ";joint";
    if (flag == 0) out << ";nojoint";
    out << ")";
    return out.str();
}

namespace {

void check_distribution(const Mdp& m, const Distribution& d, int state, bool over_actions,
                        int memory_count, const std::string& what) {
    std::set<int> seen;
    for (const auto& [idx, p] : d) {
        if (!(p > Rational(0)))
            throw ValidationError(what + " has a non-positive probability " + p.str());
        if (!seen.insert(idx).second)
            throw ValidationError(what + " mentions the same target twice");
        if (over_actions) {
            if (idx < 0 || idx >= static_cast<int>(m.actions.size()))
                throw ValidationError(what + " uses an unknown action index");
            if (m.actions[idx].source != state)
                throw ValidationError(what + " assigns probability to action " +
                                      m.actions[idx].name + " not available in state " +
                                      m.states[state]);
        } else {
            if (idx < 1 || idx >= memory_count)
                throw ValidationError(what + " switches to an unknown memory element");
        }
    }
}

} // namespace

void FiniteStrategy::validate(const Mdp& m) const {
    if (epsilon.sign() < 0 || epsilon >= Rational(1))
        throw ValidationError("strategy epsilon must lie in [0, 1)");
    if (memory.empty() || memory[0].kind != MemoryElement::Kind::Transient)
        throw ValidationError("strategy memory must start with the transient element");
    for (std::size_t i = 1; i < memory.size(); ++i) {
        if (memory[i].kind != MemoryElement::Kind::Mode)
            throw ValidationError("strategy may contain only one transient memory element");
    }
    const std::size_t S = m.states.size();
    if (transient_next.size() != S || switch_to.size() != S)
        throw ValidationError("strategy tables must cover every state");
    if (mode_next.size() != memory.size())
        throw ValidationError("strategy must carry one action table per memory element");
    if (!mode_next[0].empty())
        throw ValidationError("the transient memory element must not carry a mode table");
    for (std::size_t s = 0; s < S; ++s) {
        check_distribution(m, transient_next[s], static_cast<int>(s), true,
                           static_cast<int>(memory.size()),
                           "transient action distribution at state " + m.states[s]);
        check_distribution(m, switch_to[s], static_cast<int>(s), false,
                           static_cast<int>(memory.size()),
                           "switch distribution at state " + m.states[s]);
        const Rational total =
            distribution_total(transient_next[s]) + distribution_total(switch_to[s]);
        if (total != Rational(1))
            throw ValidationError("transient action and switch probabilities at state " +
                                  m.states[s] + " sum to " + total.str());
    }
    for (std::size_t e = 1; e < memory.size(); ++e) {
        for (const auto& [state, dist] : mode_next[e]) {
            if (state < 0 || state >= static_cast<int>(S))
                throw ValidationError("mode table refers to an unknown state");
            check_distribution(m, dist, state, true, static_cast<int>(memory.size()),
                               "mode action distribution at state " + m.states[state]);
            const Rational total = distribution_total(dist);
            if (total != Rational(1))
                throw ValidationError("mode action distribution at state " + m.states[state] +
                                      " sums to " + total.str());
        }
    }
}

std::vector<Rational> uniform_frequencies(const Mdp& sub) {
    const auto dec = mec_decomposition(sub);
    if (dec.mecs.size() != 1 || dec.mecs[0].states.size() != sub.states.size() ||
        dec.mecs[0].actions.size() != sub.actions.size())
        throw ValidationError(
            "uniform frequencies are defined only on a strongly connected MDP all of whose "
            "actions stay inside");
    const std::size_t S = sub.states.size();
    // Stationarity of the uniform chain: for every state t,
    //   sum_s pi(s) P(s, t) - pi(t) = 0, plus sum_s pi(s) = 1.
    Matrix a(S + 1, std::vector<Rational>(S));
    std::vector<Rational> b(S + 1);
    for (std::size_t s = 0; s < S; ++s) {
        const auto& acts = sub.act[s];
        const Rational share(1, static_cast<long long>(acts.size()));
        for (int ai : acts) {
            for (const auto& [t, p] : sub.actions[ai].delta) a[t][s] = a[t][s] + share * p;
        }
        a[s][s] = a[s][s] - Rational(1);
        a[S][s] = Rational(1);
    }
    b[S] = Rational(1);
    auto pi = solve_unique(std::move(a), std::move(b));
    if (!pi) throw SolveError("stationary distribution system of the uniform chain was singular");
    for (const auto& p : *pi) {
        if (!(p > Rational(0)))
            throw SolveError("stationary distribution of the uniform chain was not positive");
    }
    std::vector<Rational> freq(sub.actions.size());
    for (std::size_t ai = 0; ai < sub.actions.size(); ++ai) {
        const int s = sub.actions[ai].source;
        freq[ai] = (*pi)[s] / Rational(static_cast<long long>(sub.act[s].size()));
    }
    return freq;
}

std::vector<Distribution> perturbed_recurrent(const Mdp& sub, const std::vector<Rational>& xbar,
                                              const Rational& epsilon) {
    if (!(epsilon > Rational(0)) || !(epsilon < Rational(1)))
        throw ValidationError("perturbation epsilon must lie strictly between 0 and 1");
    if (xbar.size() != sub.actions.size())
        throw ValidationError("target frequencies must cover every action");
    Rational total;
    for (const auto& v : xbar) {
        if (v.sign() < 0) throw ValidationError("target frequencies must be nonnegative");
        total = total + v;
    }
    if (total.is_zero()) throw ValidationError("target frequencies must have a positive total");

    Rational rmax;
    for (const auto& action : sub.actions) {
        for (const auto& r : action.reward) rmax = max(rmax, r.abs());
    }
    if (rmax.is_zero()) rmax = Rational(1);
    const Rational sigma =
        min(epsilon / (Rational(1) - epsilon),
            epsilon / (Rational(static_cast<long long>(sub.actions.size())) * rmax));

    const auto uniform = uniform_frequencies(sub);
    std::vector<Rational> x(sub.actions.size());
    for (std::size_t ai = 0; ai < x.size(); ++ai) x[ai] = xbar[ai] + uniform[ai] * sigma * total;

    std::vector<Distribution> next(sub.states.size());
    for (std::size_t s = 0; s < sub.states.size(); ++s) {
        Rational denom;
        for (int ai : sub.act[s]) denom = denom + x[ai];
        for (int ai : sub.act[s]) next[s].push_back({ai, x[ai] / denom});
    }
    return next;
}

FiniteStrategy synthesize(const Mdp& m, const Query& q, const LpInstance& lp,
                          const LpAssignment& assignment, const Rational& epsilon) {
    if (!(epsilon > Rational(0)) || !(epsilon < Rational(1)))
        throw ValidationError("strategy epsilon must lie strictly between 0 and 1");
    if (assignment.value.size() != lp.vars.size())
        throw ValidationError("assignment does not match the program's variables");
    (void)q;

    const auto dec = mec_decomposition(m);
    const std::size_t S = m.states.size();

    std::vector<Rational> y_action(m.actions.size());
    using ModeKey = std::pair<std::uint32_t, int>; // (subset, flag)
    std::vector<std::map<ModeKey, Rational>> switch_val(S);
    std::map<std::pair<int, ModeKey>, std::map<int, Rational>> recurrent_val; // (mec, key) -> action -> x
    for (std::size_t i = 0; i < lp.vars.size(); ++i) {
        const auto& var = lp.vars[i];
        const Rational& v = assignment.value[i];
        switch (var.kind) {
            case VarKind::Transient:
                y_action[var.action] = v;
                break;
            case VarKind::Switch:
                switch_val[var.state][{var.subset, var.flag}] =
                    switch_val[var.state][{var.subset, var.flag}] + v;
                break;
            case VarKind::Recurrent:
                recurrent_val[{var.mec, {var.subset, var.flag}}][var.action] = v;
                break;
            case VarKind::Extra:
                break;
        }
    }

    // Modes are shared across MECs: one memory element per (subset, flag) pair
    // that carries recurrent mass anywhere; the state disambiguates the MEC.
    std::set<ModeKey> live_keys;
    std::map<std::pair<int, ModeKey>, Rational> mass;
    for (const auto& [key, xmap] : recurrent_val) {
        Rational total;
        for (const auto& [ai, v] : xmap) total = total + v;
        if (total > Rational(0)) {
            live_keys.insert(key.second);
            mass[key] = total;
        }
    }

    FiniteStrategy st;
    st.epsilon = epsilon;
    st.memory.push_back(MemoryElement{});
    std::map<ModeKey, int> mode_index;
    for (const auto& key : live_keys) {
        MemoryElement e;
        e.kind = MemoryElement::Kind::Mode;
        e.subset = key.first;
        e.flag = key.second;
        e.tagged = true;
        mode_index[key] = static_cast<int>(st.memory.size());
        st.memory.push_back(e);
    }
    st.mode_next.resize(st.memory.size());

    for (const auto& [mk, xmap] : recurrent_val) {
        auto it = mass.find(mk);
        if (it == mass.end()) continue; // no mass in this MEC for this mode
        const auto& [mec_idx, key] = mk;
        const Mdp sub = restrict_to_mec(m, dec.mecs[mec_idx]);
        std::vector<Rational> xbar(sub.actions.size());
        for (const auto& [ai, v] : xmap) xbar[sub.action_index(m.actions[ai].name)] = v;
        const auto tables = perturbed_recurrent(sub, xbar, epsilon);
        auto& dest = st.mode_next[mode_index[key]];
        for (std::size_t s = 0; s < sub.states.size(); ++s) {
            Distribution dist;
            for (const auto& [sub_ai, p] : tables[s])
                dist.push_back({m.action_index(sub.actions[sub_ai].name), p});
            dest[m.state_index(sub.states[s])] = std::move(dist);
        }
    }

    st.transient_next.resize(S);
    st.switch_to.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
        Rational in;
        for (int ai : m.act[s]) in = in + y_action[ai];
        for (const auto& [key, v] : switch_val[s]) in = in + v;
        if (in > Rational(0)) {
            for (int ai : m.act[s]) {
                if (y_action[ai] > Rational(0))
                    st.transient_next[s].push_back({ai, y_action[ai] / in});
            }
            for (const auto& [key, v] : switch_val[s]) {
                if (v > Rational(0)) st.switch_to[s].push_back({mode_index.at(key), v / in});
            }
        } else {
            const Rational share(1, static_cast<long long>(m.act[s].size()));
            for (int ai : m.act[s]) st.transient_next[s].push_back({ai, share});
        }
    }

    st.validate(m);
    return st;
}

namespace {

ordered_json distribution_to_json(const Distribution& d,
                                  const std::function<std::string(int)>& name) {
    ordered_json obj = ordered_json::object();
    for (const auto& [idx, p] : d) obj[name(idx)] = p.str();
    return obj;
}

} // namespace

std::string serialize_strategy(const FiniteStrategy& s, const Mdp& m) {
    const auto action_name = [&m](int ai) { return m.actions[ai].name; };
    ordered_json doc;
    doc["epsilon"] = s.epsilon.str();
    doc["memory"] = ordered_json::array();
    for (const auto& e : s.memory) {
        ordered_json el;
        if (e.kind == MemoryElement::Kind::Transient) {
            el["kind"] = "transient";
        } else {
            el["kind"] = "mode";
            if (e.tagged) {
                ordered_json dims = ordered_json::array();
                for (int i = 0; i < 32; ++i) {
                    if (e.subset & (1u << i)) dims.push_back(i + 1);
                }
                el["dimensions"] = dims;
                if (e.flag >= 0) el["joint"] = (e.flag == 1);
            }
        }
        doc["memory"].push_back(el);
    }
    doc["transient"] = ordered_json::object();
    for (std::size_t st = 0; st < m.states.size(); ++st)
        doc["transient"][m.states[st]] = distribution_to_json(s.transient_next[st], action_name);
    doc["switch"] = ordered_json::object();
    for (std::size_t st = 0; st < m.states.size(); ++st) {
        if (s.switch_to[st].empty()) continue;
        ordered_json arr = ordered_json::array();
        for (const auto& [mi, p] : s.switch_to[st])
            arr.push_back(ordered_json{{"memory", mi}, {"p", p.str()}});
        doc["switch"][m.states[st]] = arr;
    }
    doc["modes"] = ordered_json::array();
    for (std::size_t e = 1; e < s.memory.size(); ++e) {
        ordered_json entry;
        entry["memory"] = e;
        entry["table"] = ordered_json::object();
        for (const auto& [state, dist] : s.mode_next[e])
            entry["table"][m.states[state]] = distribution_to_json(dist, action_name);
        doc["modes"].push_back(entry);
    }
    return doc.dump(2) + "\n";
}

namespace {

Rational rational_field(const ordered_json& j, const std::string& what) {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    throw ParseError(what + " must be a rational written as a string");
}

Distribution distribution_from_json(const ordered_json& obj, const Mdp& m,
                                    const std::string& what) {
    if (!obj.is_object()) throw ParseError(what + " must be an object of action probabilities");
    Distribution d;
    for (const auto& [key, value] : obj.items()) {
        const int ai = m.action_index(key);
        if (ai < 0) throw ParseError(what + " refers to unknown action " + key);
        d.push_back({ai, rational_field(value, what + " entry " + key)});
    }
    std::sort(d.begin(), d.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    return d;
}

} // namespace

FiniteStrategy parse_strategy(const std::string& text, const Mdp& m) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("strategy is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("strategy document must be a JSON object");
    FiniteStrategy s;
    if (!doc.contains("epsilon")) throw ParseError("strategy is missing \"epsilon\"");
    s.epsilon = rational_field(doc["epsilon"], "epsilon");
    if (!doc.contains("memory") || !doc["memory"].is_array() || doc["memory"].empty())
        throw ParseError("strategy is missing its \"memory\" list");
    for (const auto& el : doc["memory"]) {
        MemoryElement e;
        const std::string kind = el.value("kind", std::string());
        if (kind == "transient") {
            e.kind = MemoryElement::Kind::Transient;
        } else if (kind == "mode") {
            e.kind = MemoryElement::Kind::Mode;
            if (el.contains("dimensions")) {
                e.tagged = true;
                for (const auto& d : el["dimensions"]) {
                    const int dim = d.get<int>();
                    if (dim < 1 || dim > m.dimension)
                        throw ParseError("memory element lists dimension out of range");
                    e.subset |= 1u << (dim - 1);
                }
                if (el.contains("joint")) e.flag = el["joint"].get<bool>() ? 1 : 0;
            }
        } else {
            throw ParseError("memory element kind must be \"transient\" or \"mode\"");
        }
        s.memory.push_back(e);
    }
    s.transient_next.resize(m.states.size());
    s.switch_to.resize(m.states.size());
    s.mode_next.resize(s.memory.size());
    if (doc.contains("transient")) {
        for (const auto& [name, dist] : doc["transient"].items()) {
            const int si = m.state_index(name);
            if (si < 0) throw ParseError("transient table refers to unknown state " + name);
            s.transient_next[si] =
                distribution_from_json(dist, m, "transient distribution at " + name);
        }
    }
    if (doc.contains("switch")) {
        for (const auto& [name, arr] : doc["switch"].items()) {
            const int si = m.state_index(name);
            if (si < 0) throw ParseError("switch table refers to unknown state " + name);
            if (!arr.is_array()) throw ParseError("switch entries must be arrays");
            for (const auto& entry : arr) {
                if (!entry.contains("memory") || !entry.contains("p"))
                    throw ParseError("switch entries need \"memory\" and \"p\"");
                s.switch_to[si].push_back({entry["memory"].get<int>(),
                                           rational_field(entry["p"], "switch probability")});
            }
        }
    }
    if (doc.contains("modes")) {
        for (const auto& entry : doc["modes"]) {
            if (!entry.contains("memory") || !entry.contains("table"))
                throw ParseError("mode entries need \"memory\" and \"table\"");
            const int mi = entry["memory"].get<int>();
            if (mi < 1 || mi >= static_cast<int>(s.memory.size()))
                throw ParseError("mode entry refers to an unknown memory element");
            for (const auto& [name, dist] : entry["table"].items()) {
                const int si = m.state_index(name);
                if (si < 0) throw ParseError("mode table refers to unknown state " + name);
                s.mode_next[mi][si] =
                    distribution_from_json(dist, m, "mode distribution at " + name);
            }
        }
    }
    s.validate(m);
    return s;
}

} // namespace mpmdp
