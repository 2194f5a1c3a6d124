#include "mpmdp/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace mpmdp {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const Rational kZero;

Rational rational_from_json(const json& j, const std::string& context) {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_number_float()) {
        throw ParseError(context + ": floats are not accepted, write the value as an exact rational string");
    }
    throw ParseError(context + ": expected a rational string like \"1/2\"");
}

std::vector<Rational> rational_vector(const json& j, const std::string& context) {
    if (!j.is_array()) throw ParseError(context + ": expected an array of rational strings");
    std::vector<Rational> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(rational_from_json(e, context));
    return out;
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

} // namespace

const Rational& Action::probability(int state) const {
    for (const auto& [s, p] : delta) {
        if (s == state) return p;
    }
    return kZero;
}

int Mdp::state_index(const std::string& name) const {
    auto it = std::find(states.begin(), states.end(), name);
    return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

int Mdp::action_index(const std::string& name) const {
    for (size_t i = 0; i < actions.size(); ++i) {
        if (actions[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

void Mdp::validate() const {
    if (dimension < 1) throw ValidationError("dimension must be at least 1");
    if (states.empty()) throw ValidationError("model has no states");
    std::set<std::string> seen;
    for (const auto& s : states) {
        if (s.empty()) throw ValidationError("state with empty name");
        if (!seen.insert(s).second) throw ValidationError("duplicate state name " + s);
    }
    if (initial < 0 || initial >= static_cast<int>(states.size())) {
        throw ValidationError("initial state index out of range");
    }
    if (act.size() != states.size()) throw ValidationError("Act table size mismatch");

    seen.clear();
    std::vector<int> owner(actions.size(), -1);
    for (size_t s = 0; s < act.size(); ++s) {
        for (int a : act[s]) {
            if (a < 0 || a >= static_cast<int>(actions.size())) throw ValidationError("Act entry out of range");
            if (owner[a] != -1) throw ValidationError("action " + actions[a].name + " enabled in more than one state");
            owner[a] = static_cast<int>(s);
        }
    }
    for (size_t a = 0; a < actions.size(); ++a) {
        const Action& act_a = actions[a];
        if (act_a.name.empty()) throw ValidationError("action with empty name");
        if (!seen.insert(act_a.name).second) throw ValidationError("duplicate action name " + act_a.name);
        if (owner[a] != act_a.source) {
            throw ValidationError("action " + act_a.name + " is not listed in Act of its source state");
        }
        if (act_a.source < 0 || act_a.source >= static_cast<int>(states.size())) {
            throw ValidationError("action " + act_a.name + " has no source state");
        }
        if (static_cast<int>(act_a.reward.size()) != dimension) {
            throw ValidationError("reward of action " + act_a.name + " has " + std::to_string(act_a.reward.size()) +
                                  " components, expected " + std::to_string(dimension));
        }
        Rational sum;
        std::set<int> targets;
        for (const auto& [t, p] : act_a.delta) {
            if (t < 0 || t >= static_cast<int>(states.size())) {
                throw ValidationError("distribution of action " + act_a.name + " targets an unknown state");
            }
            if (!targets.insert(t).second) {
                throw ValidationError("distribution of action " + act_a.name + " lists state " + states[t] + " twice");
            }
            if (p.sign() <= 0) {
                throw ValidationError("distribution of action " + act_a.name + " has non-positive probability for state " +
                                      states[t]);
            }
            sum += p;
        }
        if (sum != Rational(1)) {
            throw ValidationError("distribution of action " + act_a.name + " sums to " + sum.str());
        }
    }
    for (size_t s = 0; s < states.size(); ++s) {
        if (act[s].empty()) throw ValidationError("state " + states[s] + " has no actions");
    }
}

Mdp parse_mdp(const std::string& text) {
    json j = parse_json(text, "model");
    if (!j.is_object()) throw ParseError("model: top level must be an object");

    Mdp m;
    if (!j.contains("dimension") || !j["dimension"].is_number_integer()) {
        throw ParseError("model: missing integer field 'dimension'");
    }
    m.dimension = j["dimension"].get<int>();
    if (!j.contains("states")) throw ParseError("model: missing field 'states'");
    if (!j["states"].is_array()) throw ParseError("model: 'states' must be an array of names");
    for (const auto& s : j["states"]) {
        if (!s.is_string()) throw ParseError("model: state names must be strings");
        m.states.push_back(s.get<std::string>());
    }
    m.act.resize(m.states.size());

    if (!j.contains("initial") || !j["initial"].is_string()) {
        throw ParseError("model: missing string field 'initial'");
    }
    std::string init_name = j["initial"].get<std::string>();
    m.initial = m.state_index(init_name);
    if (m.initial < 0) throw ValidationError("initial state " + init_name + " is not declared");

    if (!j.contains("actions") || !j["actions"].is_array()) {
        throw ParseError("model: missing array field 'actions'");
    }
    for (const auto& ja : j["actions"]) {
        if (!ja.is_object()) throw ParseError("model: each action must be an object");
        Action a;
        if (!ja.contains("name") || !ja["name"].is_string()) throw ParseError("model: action without a name");
        a.name = ja["name"].get<std::string>();
        if (!ja.contains("source") || !ja["source"].is_string()) {
            throw ParseError("model: action " + a.name + " is missing its source state");
        }
        std::string src = ja["source"].get<std::string>();
        a.source = m.state_index(src);
        if (a.source < 0) throw ValidationError("action " + a.name + " has unknown source state " + src);
        if (!ja.contains("delta") || !ja["delta"].is_object()) {
            throw ParseError("model: action " + a.name + " is missing its distribution 'delta'");
        }
        for (const auto& [target, jp] : ja["delta"].items()) {
            int t = m.state_index(target);
            if (t < 0) throw ValidationError("distribution of action " + a.name + " targets unknown state " + target);
            Rational p = rational_from_json(jp, "distribution of action " + a.name);
            if (p.is_zero()) continue; // explicit zero entries are dropped
            a.delta.emplace_back(t, p);
        }
        // Deterministic order regardless of JSON key order.
        std::sort(a.delta.begin(), a.delta.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        if (!ja.contains("reward")) throw ParseError("model: action " + a.name + " is missing its reward vector");
        a.reward = rational_vector(ja["reward"], "reward of action " + a.name);
        m.act[a.source].push_back(static_cast<int>(m.actions.size()));
        m.actions.push_back(std::move(a));
    }

    m.validate();
    return m;
}

std::string serialize_mdp(const Mdp& m) {
    ordered_json j;
    j["dimension"] = m.dimension;
    j["initial"] = m.states[m.initial];
    j["states"] = m.states;
    ordered_json actions = ordered_json::array();
    for (const Action& a : m.actions) {
        ordered_json ja;
        ja["name"] = a.name;
        ja["source"] = m.states[a.source];
        ordered_json delta = ordered_json::object();
        for (const auto& [t, p] : a.delta) delta[m.states[t]] = p.str();
        ja["delta"] = delta;
        ordered_json reward = ordered_json::array();
        for (const Rational& r : a.reward) reward.push_back(r.str());
        ja["reward"] = reward;
        actions.push_back(std::move(ja));
    }
    j["actions"] = std::move(actions);
    return j.dump(2) + "\n";
}

std::string variant_name(QueryVariant v) {
    switch (v) {
        case QueryVariant::MultiQuantConjunctive: return "multi-quant-conjunctive";
        case QueryVariant::MultiQuantJoint: return "multi-quant-joint";
        case QueryVariant::MultiQuantConjunctiveJoint: return "multi-quant-conjunctive-joint";
        case QueryVariant::MultiQual: return "multi-qual";
        case QueryVariant::MonoQuant: return "mono-quant";
        case QueryVariant::MonoQual: return "mono-qual";
    }
    return "?";
}

std::optional<QueryVariant> variant_from_name(const std::string& name) {
    for (QueryVariant v : {QueryVariant::MultiQuantConjunctive, QueryVariant::MultiQuantJoint,
                           QueryVariant::MultiQuantConjunctiveJoint, QueryVariant::MultiQual,
                           QueryVariant::MonoQuant, QueryVariant::MonoQual}) {
        if (variant_name(v) == name) return v;
    }
    return std::nullopt;
}

Query parse_query(const std::string& text) {
    json j = parse_json(text, "query");
    if (!j.is_object()) throw ParseError("query: top level must be an object");
    if (!j.contains("variant") || !j["variant"].is_string()) {
        throw ParseError("query: missing string field 'variant'");
    }
    Query q;
    auto v = variant_from_name(j["variant"].get<std::string>());
    if (!v) throw ValidationError("unknown query variant " + j["variant"].get<std::string>());
    q.variant = *v;

    if (j.contains("exp") && !j["exp"].is_null()) q.exp = rational_vector(j["exp"], "query field 'exp'");
    if (!j.contains("sat")) throw ParseError("query: missing field 'sat'");
    q.sat = rational_vector(j["sat"], "query field 'sat'");

    if (q.variant == QueryVariant::MultiQuantJoint) {
        if (!j.contains("pr")) throw ParseError("query: missing field 'pr'");
        if (j["pr"].is_array()) {
            throw ParseError("query: the joint variant takes a single rational 'pr', not an array");
        }
        q.pr_joint = rational_from_json(j["pr"], "query field 'pr'");
    } else {
        if (j.contains("pr")) {
            q.pr = rational_vector(j["pr"], "query field 'pr'");
        } else if (q.is_qual()) {
            q.pr.assign(q.sat.size(), Rational(1));
        } else {
            throw ParseError("query: missing field 'pr'");
        }
    }

    if (q.variant == QueryVariant::MultiQuantConjunctiveJoint) {
        if (!j.contains("joint_sat") || !j.contains("joint_pr")) {
            throw ParseError("query: the conjunctive-joint variant requires 'joint_sat' and 'joint_pr'");
        }
        q.sat_joint = rational_vector(j["joint_sat"], "query field 'joint_sat'");
        q.pr_joint = rational_from_json(j["joint_pr"], "query field 'joint_pr'");
    } else if (j.contains("joint_sat") || j.contains("joint_pr")) {
        throw ParseError("query: 'joint_sat'/'joint_pr' are only valid for multi-quant-conjunctive-joint");
    }
    return q;
}

std::string serialize_query(const Query& q) {
    ordered_json j;
    j["variant"] = variant_name(q.variant);
    auto vec = [](const std::vector<Rational>& v) {
        ordered_json a = ordered_json::array();
        for (const Rational& r : v) a.push_back(r.str());
        return a;
    };
    if (q.exp) j["exp"] = vec(*q.exp);
    j["sat"] = vec(q.sat);
    if (q.variant == QueryVariant::MultiQuantJoint) {
        j["pr"] = q.pr_joint.str();
    } else {
        j["pr"] = vec(q.pr);
    }
    if (q.variant == QueryVariant::MultiQuantConjunctiveJoint) {
        j["joint_sat"] = vec(q.sat_joint);
        j["joint_pr"] = q.pr_joint.str();
    }
    return j.dump(2) + "\n";
}

void validate_query(const Mdp& m, const Query& q, bool require_exp) {
    int n = m.dimension;
    auto expect_len = [&](const std::vector<Rational>& v, const std::string& field) {
        if (static_cast<int>(v.size()) != n) {
            throw ValidationError("query field '" + field + "' has " + std::to_string(v.size()) +
                                  " components, model dimension is " + std::to_string(n));
        }
    };
    if (q.variant == QueryVariant::MonoQuant || q.variant == QueryVariant::MonoQual) {
        if (n != 1) throw ValidationError("mono variant requires dimension 1, model has dimension " + std::to_string(n));
    }
    expect_len(q.sat, "sat");
    if (q.exp) {
        expect_len(*q.exp, "exp");
    } else if (require_exp) {
        throw ValidationError("query is missing expectation thresholds 'exp'");
    }

    auto check_probability = [](const Rational& p, const std::string& what) {
        if (p < Rational(0) || p > Rational(1)) {
            throw ValidationError(what + " must lie in [0, 1], got " + p.str());
        }
    };
    if (q.variant == QueryVariant::MultiQuantJoint) {
        check_probability(q.pr_joint, "probability threshold 'pr'");
    } else {
        expect_len(q.pr, "pr");
        for (int i = 0; i < n; ++i) check_probability(q.pr[i], "probability threshold pr[" + std::to_string(i + 1) + "]");
        if (q.is_qual()) {
            for (int i = 0; i < n; ++i) {
                if (q.pr[i] != Rational(1)) {
                    throw ValidationError("qualitative variant requires pr = 1 in every dimension, got " + q.pr[i].str() +
                                          " in dimension " + std::to_string(i + 1));
                }
            }
        }
    }
    if (q.variant == QueryVariant::MultiQuantConjunctiveJoint) {
        expect_len(q.sat_joint, "joint_sat");
        check_probability(q.pr_joint, "probability threshold 'joint_pr'");
    }
}

} // namespace mpmdp
