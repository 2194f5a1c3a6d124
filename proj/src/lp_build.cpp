#include "mpmdp/lp_build.hpp"

#include <algorithm>
#include <map>

#include "mpmdp/simplex.hpp"

namespace mpmdp {

namespace {

std::string subset_label(uint32_t mask) { return "N=" + std::to_string(mask); }

std::string flag_suffix(int flag) {
    if (flag < 0) return "";
    return flag ? "[yes]" : "[no]";
}

/// Builds the sorted nonzero term list out of an accumulation map.
std::vector<std::pair<int, Rational>> collect(std::map<int, Rational>& acc) {
    std::vector<std::pair<int, Rational>> terms;
    terms.reserve(acc.size());
    for (auto& [var, coeff] : acc) {
        if (!coeff.is_zero()) terms.emplace_back(var, std::move(coeff));
    }
    acc.clear();
    return terms;
}

class Builder {
public:
    Builder(const Mdp& m, const Query& q, const BuildOptions& options, bool joint_shape)
        : m_(m), q_(q), options_(options), joint_shape_(joint_shape), dec_(mec_decomposition(m)) {
        n_ = m.dimension;
        full_mask_ = (n_ >= 31) ? 0 : (1u << n_) - 1;
        if (n_ >= 31) throw ValidationError("reward dimension " + std::to_string(n_) + " is too large");

        if (q.is_qual()) {
            subsets_ = {full_mask_};
        } else if (joint_shape_) {
            subsets_ = {0, full_mask_};
        } else {
            for (uint32_t mask = 0; mask <= full_mask_; ++mask) subsets_.push_back(mask);
        }
        flags_ = q.is_conjunctive_joint() ? std::vector<int>{0, 1} : std::vector<int>{-1};

        bool all_exp_free = !options_.exp_free.empty() &&
                            std::all_of(options_.exp_free.begin(), options_.exp_free.end(), [](bool b) { return b; });
        validate_query(m_, q_, /*require_exp=*/!all_exp_free);
        if (!options_.exp_free.empty() && static_cast<int>(options_.exp_free.size()) != n_) {
            throw ValidationError("exp_free must have one entry per dimension");
        }
        if (options_.pr_free && q.is_qual()) {
            throw ValidationError("probability thresholds of a qualitative variant are fixed at 1");
        }
    }

    LpInstance build() {
        declare_variables();
        transient_balance_rows();
        switch_total_row();
        mode_mass_rows();
        recurrent_balance_rows();
        expectation_rows();
        commitment_rows();
        satisfaction_rows();
        if (q_.is_conjunctive_joint()) {
            joint_commitment_rows();
            joint_satisfaction_row();
        }
        if (options_.prune_modes) attach_known_zero();
        return std::move(lp_);
    }

private:
    bool exp_row_wanted(int dim) const {
        return options_.exp_free.empty() || !options_.exp_free[dim];
    }

    void declare_variables() {
        int num_actions = static_cast<int>(m_.actions.size());
        transient_.resize(num_actions);
        for (int a = 0; a < num_actions; ++a) {
            LpVar v;
            v.name = "y[" + m_.actions[a].name + "]";
            v.kind = VarKind::Transient;
            v.action = a;
            transient_[a] = add_var(std::move(v));
        }
        for (int s = 0; s < static_cast<int>(m_.states.size()); ++s) {
            int mec = dec_.mec_of_state[s];
            if (mec < 0) continue;
            for (uint32_t mask : subsets_) {
                for (int flag : flags_) {
                    LpVar v;
                    v.name = "y[" + m_.states[s] + "][" + std::to_string(mask) + "]" + flag_suffix(flag);
                    v.kind = VarKind::Switch;
                    v.state = s;
                    v.subset = mask;
                    v.flag = flag;
                    v.mec = mec;
                    switch_[key(s, mask, flag)] = add_var(std::move(v));
                }
            }
        }
        for (int a = 0; a < num_actions; ++a) {
            int mec = dec_.mec_of_action[a];
            if (mec < 0) continue;
            for (uint32_t mask : subsets_) {
                for (int flag : flags_) {
                    LpVar v;
                    v.name = "x[" + m_.actions[a].name + "][" + std::to_string(mask) + "]" + flag_suffix(flag);
                    v.kind = VarKind::Recurrent;
                    v.action = a;
                    v.subset = mask;
                    v.flag = flag;
                    v.mec = mec;
                    int idx = add_var(std::move(v));
                    recurrent_[key(a, mask, flag)] = idx;
                    family_[key(0, mask, flag)].push_back(idx);
                }
            }
        }
        if (options_.pr_free) {
            // Joint variant: one threshold. Conjunctive family: one per dimension.
            int count = joint_shape_ ? 1 : n_;
            for (int i = 0; i < count; ++i) {
                LpVar v;
                v.name = joint_shape_ ? "pr" : "pr[" + std::to_string(i + 1) + "]";
                v.kind = VarKind::Extra;
                v.action = i;
                pr_vars_.push_back(add_var(std::move(v)));
            }
        }
    }

    /// Expected transient action uses balance at every state: initial mass
    /// plus transient inflow equals transient outflow plus switch mass.
    void transient_balance_rows() {
        for (int s = 0; s < static_cast<int>(m_.states.size()); ++s) {
            std::map<int, Rational> acc;
            for (int a = 0; a < static_cast<int>(m_.actions.size()); ++a) {
                const Rational& p = m_.actions[a].probability(s);
                if (!p.is_zero()) acc[transient_[a]] += p;
            }
            for (int a : m_.act[s]) acc[transient_[a]] -= Rational(1);
            if (dec_.mec_of_state[s] >= 0) {
                for (uint32_t mask : subsets_) {
                    for (int flag : flags_) acc[switch_.at(key(s, mask, flag))] -= Rational(1);
                }
            }
            add_row("transient-balance[" + m_.states[s] + "]", collect(acc), LpConstraint::Rel::Eq,
                    s == m_.initial ? Rational(-1) : Rational(0));
        }
    }

    /// The strategy commits somewhere with probability one.
    void switch_total_row() {
        std::map<int, Rational> acc;
        for (const auto& [k, var] : switch_) acc[var] += Rational(1);
        add_row("switch-total", collect(acc), LpConstraint::Rel::Eq, Rational(1));
    }

    /// Per mode: committed switch mass equals committed recurrent mass.
    void mode_mass_rows() {
        for (size_t c = 0; c < dec_.mecs.size(); ++c) {
            for (uint32_t mask : subsets_) {
                for (int flag : flags_) {
                    std::map<int, Rational> acc;
                    for (int s : dec_.mecs[c].states) acc[switch_.at(key(s, mask, flag))] += Rational(1);
                    for (int a : dec_.mecs[c].actions) acc[recurrent_.at(key(a, mask, flag))] -= Rational(1);
                    add_row("mode-mass[C" + std::to_string(c) + "][" + subset_label(mask) + "]" + flag_suffix(flag),
                            collect(acc), LpConstraint::Rel::Eq, Rational(0));
                }
            }
        }
    }

    /// Long-run action frequencies of each mode form a flow.
    void recurrent_balance_rows() {
        for (int s = 0; s < static_cast<int>(m_.states.size()); ++s) {
            for (uint32_t mask : subsets_) {
                for (int flag : flags_) {
                    auto fam = family_.find(key(0, mask, flag));
                    if (fam == family_.end()) continue;
                    std::map<int, Rational> acc;
                    for (int var : fam->second) {
                        int a = lp_.vars[var].action;
                        const Rational& p = m_.actions[a].probability(s);
                        if (!p.is_zero()) acc[var] += p;
                        if (m_.actions[a].source == s) acc[var] -= Rational(1);
                    }
                    auto terms = collect(acc);
                    if (terms.empty()) continue;
                    add_row("recurrent-balance[" + m_.states[s] + "][" + subset_label(mask) + "]" + flag_suffix(flag),
                            std::move(terms), LpConstraint::Rel::Eq, Rational(0));
                }
            }
        }
    }

    /// Total long-run expectation meets the expectation thresholds.
    void expectation_rows() {
        for (int i = 0; i < n_; ++i) {
            if (!exp_row_wanted(i)) continue;
            std::map<int, Rational> acc;
            for (const auto& [k, var] : recurrent_) {
                const Rational& r = m_.actions[lp_.vars[var].action].reward[i];
                if (!r.is_zero()) acc[var] += r;
            }
            add_row("expectation[i=" + std::to_string(i + 1) + "]", collect(acc), LpConstraint::Rel::Ge,
                    (*q_.exp)[i]);
        }
    }

    /// Inside a mode, every committed dimension meets its satisfaction
    /// threshold on average.
    void commitment_rows() {
        for (size_t c = 0; c < dec_.mecs.size(); ++c) {
            for (uint32_t mask : subsets_) {
                for (int flag : flags_) {
                    for (int i = 0; i < n_; ++i) {
                        if (!(mask & (1u << i))) continue;
                        std::map<int, Rational> acc;
                        for (int a : dec_.mecs[c].actions) {
                            Rational coeff = m_.actions[a].reward[i] - q_.sat[i];
                            if (!coeff.is_zero()) acc[recurrent_.at(key(a, mask, flag))] += coeff;
                        }
                        auto terms = collect(acc);
                        if (terms.empty()) continue;  // 0 >= 0
                        add_row("commitment[C" + std::to_string(c) + "][" + subset_label(mask) + "][i=" +
                                    std::to_string(i + 1) + "]" + flag_suffix(flag),
                                std::move(terms), LpConstraint::Rel::Ge, Rational(0));
                    }
                }
            }
        }
    }

    /// Mass of modes committed to dimension i meets pr_i (conjunctive
    /// family), or mass of the full mode meets pr (joint shape).
    void satisfaction_rows() {
        if (joint_shape_) {
            std::map<int, Rational> acc;
            for (const auto& [k, var] : recurrent_) {
                if (lp_.vars[var].subset == full_mask_) acc[var] += Rational(1);
            }
            Rational rhs = q_.is_qual() ? Rational(1) : q_.pr_joint;
            if (options_.pr_free) {
                acc[pr_vars_[0]] -= Rational(1);
                rhs = Rational(0);
                add_row("probability-bound", {{pr_vars_[0], Rational(-1)}}, LpConstraint::Rel::Ge, Rational(-1));
            }
            add_row("satisfaction", collect(acc), LpConstraint::Rel::Ge, rhs);
            return;
        }
        for (int i = 0; i < n_; ++i) {
            std::map<int, Rational> acc;
            for (const auto& [k, var] : recurrent_) {
                if (lp_.vars[var].subset & (1u << i)) acc[var] += Rational(1);
            }
            Rational rhs = q_.pr[i];
            if (options_.pr_free) {
                acc[pr_vars_[i]] -= Rational(1);
                rhs = Rational(0);
            }
            add_row("satisfaction[i=" + std::to_string(i + 1) + "]", collect(acc), LpConstraint::Rel::Ge, rhs);
        }
        if (options_.pr_free) {
            for (int i = 0; i < n_; ++i) {
                add_row("probability-bound[i=" + std::to_string(i + 1) + "]", {{pr_vars_[i], Rational(-1)}},
                        LpConstraint::Rel::Ge, Rational(-1));
            }
        }
    }

    /// Added commitments of the yes copies: every dimension meets the added
    /// joint thresholds on average, whatever the mode subset is.
    void joint_commitment_rows() {
        for (size_t c = 0; c < dec_.mecs.size(); ++c) {
            for (uint32_t mask : subsets_) {
                for (int i = 0; i < n_; ++i) {
                    std::map<int, Rational> acc;
                    for (int a : dec_.mecs[c].actions) {
                        Rational coeff = m_.actions[a].reward[i] - q_.sat_joint[i];
                        if (!coeff.is_zero()) acc[recurrent_.at(key(a, mask, 1))] += coeff;
                    }
                    auto terms = collect(acc);
                    if (terms.empty()) continue;
                    add_row("joint-commitment[C" + std::to_string(c) + "][" + subset_label(mask) + "][i=" +
                                std::to_string(i + 1) + "]",
                            std::move(terms), LpConstraint::Rel::Ge, Rational(0));
                }
            }
        }
    }

    void joint_satisfaction_row() {
        std::map<int, Rational> acc;
        for (const auto& [k, var] : recurrent_) {
            if (lp_.vars[var].flag == 1) acc[var] += Rational(1);
        }
        add_row("joint-satisfaction", collect(acc), LpConstraint::Rel::Ge, q_.pr_joint);
    }

    /// Per (MEC, subset, flag): a tiny feasibility program over the MEC's
    /// action frequencies decides whether any normalized recurrent flow can
    /// meet the mode's commitments; if not, all of the mode's variables are
    /// zero in every solution and are hinted away.
    void attach_known_zero() {
        for (size_t c = 0; c < dec_.mecs.size(); ++c) {
            std::map<uint32_t, bool> plain_cache, joint_cache;
            for (uint32_t mask : subsets_) {
                for (int flag : flags_) {
                    bool with_joint = flag == 1;
                    auto& cache = with_joint ? joint_cache : plain_cache;
                    auto it = cache.find(mask);
                    bool feasible;
                    if (it != cache.end()) {
                        feasible = it->second;
                    } else {
                        feasible = mode_feasible(dec_.mecs[c], mask, with_joint);
                        cache[mask] = feasible;
                    }
                    if (feasible) continue;
                    for (int a : dec_.mecs[c].actions) lp_.known_zero.push_back(recurrent_.at(key(a, mask, flag)));
                    for (int s : dec_.mecs[c].states) lp_.known_zero.push_back(switch_.at(key(s, mask, flag)));
                }
            }
        }
        std::sort(lp_.known_zero.begin(), lp_.known_zero.end());
    }

    bool mode_feasible(const MecDecomposition::Mec& mec, uint32_t mask, bool with_joint) {
        if (mask == 0 && !with_joint) return true;
        LpInstance small;
        std::map<int, int> col;  // action -> small variable
        for (int a : mec.actions) {
            LpVar v;
            v.name = "z[" + m_.actions[a].name + "]";
            v.kind = VarKind::Recurrent;
            v.action = a;
            col[a] = static_cast<int>(small.vars.size());
            small.vars.push_back(std::move(v));
        }
        for (int s : mec.states) {
            std::map<int, Rational> acc;
            for (int a : mec.actions) {
                const Rational& p = m_.actions[a].probability(s);
                if (!p.is_zero()) acc[col[a]] += p;
                if (m_.actions[a].source == s) acc[col[a]] -= Rational(1);
            }
            auto terms = collect(acc);
            if (terms.empty()) continue;
            small.constraints.push_back({"balance[" + m_.states[s] + "]", std::move(terms), LpConstraint::Rel::Eq, Rational(0)});
        }
        {
            std::vector<std::pair<int, Rational>> terms;
            for (int a : mec.actions) terms.emplace_back(col[a], Rational(1));
            small.constraints.push_back({"mass", std::move(terms), LpConstraint::Rel::Eq, Rational(1)});
        }
        auto add_commitment = [&](int i, const Rational& threshold, const std::string& label) {
            std::map<int, Rational> acc;
            for (int a : mec.actions) {
                Rational coeff = m_.actions[a].reward[i] - threshold;
                if (!coeff.is_zero()) acc[col[a]] += coeff;
            }
            auto terms = collect(acc);
            Rational rhs(0);
            if (terms.empty()) return true;  // 0 >= 0
            small.constraints.push_back({label, std::move(terms), LpConstraint::Rel::Ge, std::move(rhs)});
            return true;
        };
        for (int i = 0; i < n_; ++i) {
            if (mask & (1u << i)) add_commitment(i, q_.sat[i], "commit[" + std::to_string(i + 1) + "]");
        }
        if (with_joint) {
            for (int i = 0; i < n_; ++i) add_commitment(i, q_.sat_joint[i], "joint[" + std::to_string(i + 1) + "]");
        }
        SolveOptions options;
        options.use_known_zero = false;
        return solve(small, options).status == SolveStatus::Optimal;
    }

    // --- bookkeeping -------------------------------------------------------

    static long key(int idx, uint32_t mask, int flag) {
        return (static_cast<long>(idx) << 34) | (static_cast<long>(mask) << 2) | (flag + 1);
    }

    int add_var(LpVar v) {
        lp_.vars.push_back(std::move(v));
        return static_cast<int>(lp_.vars.size()) - 1;
    }

    void add_row(std::string label, std::vector<std::pair<int, Rational>> terms, LpConstraint::Rel rel, Rational rhs) {
        if (terms.empty()) {
            bool trivially_true = rel == LpConstraint::Rel::Eq ? rhs.is_zero() : rhs.sign() <= 0;
            if (trivially_true) return;
        }
        lp_.constraints.push_back({std::move(label), std::move(terms), rel, std::move(rhs)});
    }

    const Mdp& m_;
    const Query& q_;
    BuildOptions options_;
    bool joint_shape_;
    MecDecomposition dec_;
    int n_ = 0;
    uint32_t full_mask_ = 0;
    std::vector<uint32_t> subsets_;
    std::vector<int> flags_;
    LpInstance lp_;
    std::vector<int> transient_;
    std::map<long, int> switch_;
    std::map<long, int> recurrent_;
    std::map<long, std::vector<int>> family_;  ///< (subset, flag) -> recurrent variable indices
    std::vector<int> pr_vars_;
};

} // namespace

LpInstance build_conjunctive(const Mdp& m, const Query& q, const BuildOptions& options) {
    switch (q.variant) {
        case QueryVariant::MultiQuantConjunctive:
        case QueryVariant::MultiQual:
        case QueryVariant::MonoQuant:
        case QueryVariant::MonoQual:
            return Builder(m, q, options, /*joint_shape=*/false).build();
        default:
            throw ValidationError("build_conjunctive does not handle variant " + variant_name(q.variant));
    }
}

LpInstance build_joint(const Mdp& m, const Query& q, const BuildOptions& options) {
    switch (q.variant) {
        case QueryVariant::MultiQuantJoint:
        case QueryVariant::MultiQual:
            return Builder(m, q, options, /*joint_shape=*/true).build();
        default:
            throw ValidationError("build_joint does not handle variant " + variant_name(q.variant));
    }
}

LpInstance build_conjunctive_joint(const Mdp& m, const Query& q, const BuildOptions& options) {
    if (q.variant != QueryVariant::MultiQuantConjunctiveJoint) {
        throw ValidationError("build_conjunctive_joint does not handle variant " + variant_name(q.variant));
    }
    return Builder(m, q, options, /*joint_shape=*/false).build();
}

LpInstance build_lp(const Mdp& m, const Query& q, const BuildOptions& options) {
    switch (q.variant) {
        case QueryVariant::MultiQuantJoint:
            return build_joint(m, q, options);
        case QueryVariant::MultiQuantConjunctiveJoint:
            return build_conjunctive_joint(m, q, options);
        default:
            return build_conjunctive(m, q, options);
    }
}

void set_expectation_objective(LpInstance& lp, const Mdp& m, const std::vector<Rational>& weights) {
    if (static_cast<int>(weights.size()) != m.dimension) {
        throw ValidationError("objective weights must have one entry per dimension");
    }
    lp.objective.clear();
    for (size_t v = 0; v < lp.vars.size(); ++v) {
        if (lp.vars[v].kind != VarKind::Recurrent) continue;
        Rational coeff;
        for (int i = 0; i < m.dimension; ++i) coeff += weights[i] * m.actions[lp.vars[v].action].reward[i];
        if (!coeff.is_zero()) lp.objective.emplace_back(static_cast<int>(v), coeff);
    }
}

void set_pr_objective(LpInstance& lp, const std::vector<Rational>& weights) {
    lp.objective.clear();
    size_t next = 0;
    for (size_t v = 0; v < lp.vars.size(); ++v) {
        if (lp.vars[v].kind != VarKind::Extra) continue;
        if (next >= weights.size()) throw ValidationError("more free probability variables than weights");
        if (!weights[next].is_zero()) lp.objective.emplace_back(static_cast<int>(v), weights[next]);
        ++next;
    }
    if (next != weights.size()) throw ValidationError("objective weights do not match the free probability variables");
}

} // namespace mpmdp
