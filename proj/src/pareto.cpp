#include "mpmdp/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <json.hpp>

#include "mpmdp/errors.hpp"
#include "mpmdp/lp_build.hpp"
#include "mpmdp/simplex.hpp"

namespace mpmdp {

using nlohmann::ordered_json;

std::string axis_name(FreeAxis a) {
    switch (a) {
        case FreeAxis::Exp: return "exp";
        case FreeAxis::Sat: return "sat";
        case FreeAxis::Pr: return "pr";
        case FreeAxis::All: return "all";
    }
    return "exp";
}

std::optional<FreeAxis> axis_from_name(const std::string& name) {
    if (name == "exp") return FreeAxis::Exp;
    if (name == "sat") return FreeAxis::Sat;
    if (name == "pr") return FreeAxis::Pr;
    if (name == "all") return FreeAxis::All;
    return std::nullopt;
}

namespace {

long grid_granularity(int d, const Rational& eps, double shifted_rmax) {
    const double e = eps.to_double();
    const double v = std::ceil((2.0 * d / e) * std::log(std::max(shifted_rmax * d, 1.0)));
    if (!(v < 1e9)) throw ValidationError("frontier epsilon is too small for the weight grid");
    return std::max(1L, static_cast<long>(v));
}

double grid_size_estimate(int d, long k) {
    double size = 1.0;
    for (int i = 1; i < d; ++i) size *= static_cast<double>(k + i) / i;
    return size;
}

void enumerate_weights(int d, long k, const std::function<void(const std::vector<long>&)>& emit) {
    std::vector<long> w(d, 0);
    std::function<void(int, long)> rec = [&](int pos, long left) {
        if (pos == d - 1) {
            w[pos] = left;
            emit(w);
            return;
        }
        for (long v = 0; v <= left; ++v) {
            w[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    if (d > 0) rec(0, k);
}

std::vector<Rational> expectation_of(const LpInstance& lp, const LpAssignment& a, const Mdp& m) {
    std::vector<Rational> e(m.dimension);
    for (std::size_t v = 0; v < lp.vars.size(); ++v) {
        if (lp.vars[v].kind != VarKind::Recurrent) continue;
        const auto& reward = m.actions[lp.vars[v].action].reward;
        for (int i = 0; i < m.dimension; ++i) e[i] = e[i] + a.value[v] * reward[i];
    }
    return e;
}

bool dominates(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

void finalize(ParetoApproximation& out) {
    // Drop dominated and duplicate points, keep a deterministic order.
    std::vector<std::size_t> order(out.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return std::lexicographical_compare(
            out.points[l].value.begin(), out.points[l].value.end(),
            out.points[r].value.begin(), out.points[r].value.end());
    });
    std::vector<ParetoPoint> points;
    std::vector<LpAssignment> witnesses;
    for (std::size_t idx : order) {
        const auto& cand = out.points[idx].value;
        bool keep = true;
        for (std::size_t other = 0; other < out.points.size() && keep; ++other) {
            if (other != idx && dominates(out.points[other].value, cand)) keep = false;
        }
        if (keep && (points.empty() || points.back().value != cand)) {
            points.push_back(out.points[idx]);
            witnesses.push_back(out.witnesses[idx]);
        }
    }
    out.points = std::move(points);
    out.witnesses = std::move(witnesses);
}

struct RewardBox {
    std::vector<Rational> lo, hi;
    Rational abs_max;
};

RewardBox reward_box(const Mdp& m) {
    RewardBox box;
    box.lo.assign(m.dimension, Rational());
    box.hi.assign(m.dimension, Rational());
    for (int i = 0; i < m.dimension; ++i) {
        box.lo[i] = m.actions[0].reward[i];
        box.hi[i] = m.actions[0].reward[i];
        for (const auto& a : m.actions) {
            box.lo[i] = min(box.lo[i], a.reward[i]);
            box.hi[i] = max(box.hi[i], a.reward[i]);
            box.abs_max = max(box.abs_max, a.reward[i].abs());
        }
    }
    return box;
}

std::vector<Rational> shift_offsets(const RewardBox& box) {
    std::vector<Rational> off(box.lo.size());
    for (std::size_t i = 0; i < off.size(); ++i)
        off[i] = max(Rational(0), -box.lo[i]) + Rational(1);
    return off;
}

} // namespace

ParetoApproximation pareto_approx(const Mdp& m, const Query& q, const Rational& epsilon,
                                  FreeAxis axis) {
    if (!(epsilon > Rational(0)))
        throw ValidationError("frontier epsilon must be positive");
    const int n = m.dimension;
    const RewardBox box = reward_box(m);

    ParetoApproximation out;
    out.axis = axis;
    out.epsilon = epsilon;
    out.offset = shift_offsets(box);

    double shifted_rmax = 1.0;
    for (int i = 0; i < n; ++i)
        shifted_rmax = std::max(shifted_rmax, (box.hi[i] + out.offset[i]).to_double());

    const auto solve_or_skip = [](const LpInstance& lp) -> std::optional<SolveOutcome> {
        SolveOutcome outcome = solve(lp);
        if (outcome.status == SolveStatus::Infeasible) return std::nullopt;
        if (outcome.status == SolveStatus::Unbounded)
            throw SolveError("a frontier objective was unbounded over the recurrent mass");
        return outcome;
    };

    if (axis == FreeAxis::Exp) {
        out.grid = grid_granularity(n, epsilon, shifted_rmax);
        if (grid_size_estimate(n, out.grid) > 2e5)
            throw ValidationError("frontier weight grid is too large; use a larger epsilon");
        BuildOptions opts;
        opts.exp_free.assign(n, true);
        LpInstance lp = build_lp(m, q, opts);
        enumerate_weights(n, out.grid, [&](const std::vector<long>& wk) {
            std::vector<Rational> w(n);
            for (int i = 0; i < n; ++i) w[i] = Rational(wk[i], out.grid);
            set_expectation_objective(lp, m, w);
            const auto outcome = solve_or_skip(lp);
            if (!outcome) return;
            out.points.push_back({expectation_of(lp, outcome->assignment, m)});
            out.witnesses.push_back(outcome->assignment);
        });
    } else if (axis == FreeAxis::Pr) {
        const int d = q.is_joint() ? 1 : n;
        out.grid = grid_granularity(d, epsilon, 1.0);
        if (grid_size_estimate(d, out.grid) > 2e5)
            throw ValidationError("frontier weight grid is too large; use a larger epsilon");
        BuildOptions opts;
        opts.pr_free = true;
        LpInstance lp = build_lp(m, q, opts);
        std::vector<int> pr_index;
        for (std::size_t v = 0; v < lp.vars.size(); ++v) {
            if (lp.vars[v].kind == VarKind::Extra) pr_index.push_back(static_cast<int>(v));
        }
        enumerate_weights(d, out.grid, [&](const std::vector<long>& wk) {
            std::vector<Rational> w(d);
            for (int i = 0; i < d; ++i) w[i] = Rational(wk[i], out.grid);
            set_pr_objective(lp, w);
            const auto outcome = solve_or_skip(lp);
            if (!outcome) return;
            ParetoPoint p;
            for (int idx : pr_index) p.value.push_back(outcome->assignment.value[idx]);
            out.points.push_back(std::move(p));
            out.witnesses.push_back(outcome->assignment);
        });
    } else if (axis == FreeAxis::Sat) {
        out.grid = grid_granularity(n, epsilon, shifted_rmax);
        if (grid_size_estimate(n, out.grid) > 1e4)
            throw ValidationError("frontier weight grid is too large; use a larger epsilon");
        const auto feasible = [&](const std::vector<Rational>& sat)
            -> std::optional<LpAssignment> {
            Query probe = q;
            probe.sat = sat;
            const auto outcome = solve_or_skip(build_lp(m, probe));
            if (!outcome) return std::nullopt;
            return outcome->assignment;
        };
        const auto base = feasible(box.lo);
        if (base) {
            enumerate_weights(n, out.grid, [&](const std::vector<long>& wk) {
                std::vector<Rational> w(n);
                bool any = false;
                for (int i = 0; i < n; ++i) {
                    w[i] = Rational(wk[i], out.grid);
                    if (wk[i] > 0) any = true;
                }
                const auto at = [&](const Rational& lambda) {
                    std::vector<Rational> sat(n);
                    for (int i = 0; i < n; ++i) sat[i] = box.lo[i] + lambda * w[i];
                    return sat;
                };
                if (!any) {
                    out.points.push_back({box.lo});
                    out.witnesses.push_back(*base);
                    return;
                }
                // Largest step size that keeps every raised threshold in the box.
                Rational lambda_max;
                bool first = true;
                for (int i = 0; i < n; ++i) {
                    if (wk[i] == 0) continue;
                    const Rational cap = (box.hi[i] - box.lo[i]) / w[i];
                    lambda_max = first ? cap : min(lambda_max, cap);
                    first = false;
                }
                Rational lo(0), hi = lambda_max;
                LpAssignment witness = *base;
                if (auto a = feasible(at(lambda_max))) {
                    lo = lambda_max;
                    witness = *a;
                } else {
                    while (hi - lo > epsilon) {
                        const Rational mid = (lo + hi) / Rational(2);
                        if (auto a = feasible(at(mid))) {
                            lo = mid;
                            witness = *a;
                        } else {
                            hi = mid;
                        }
                    }
                }
                out.points.push_back({at(lo)});
                out.witnesses.push_back(std::move(witness));
            });
        }
    } else { // FreeAxis::All
        if (q.variant != QueryVariant::MultiQuantConjunctive &&
            q.variant != QueryVariant::MonoQuant)
            throw ValidationError(
                "the all-axes frontier supports only the conjunctive quantitative variants");
        out.grid = grid_granularity(n, epsilon, shifted_rmax);
        const double sat_grid = grid_size_estimate(n, out.grid) * (out.grid + 1);
        const double inner_grid = grid_size_estimate(2 * n, out.grid);
        if (sat_grid * inner_grid > 5e4)
            throw ValidationError("frontier weight grid is too large; use a larger epsilon");
        BuildOptions opts;
        opts.exp_free.assign(n, true);
        opts.pr_free = true;
        enumerate_weights(n, out.grid, [&](const std::vector<long>& dir) {
            for (long step = 0; step <= out.grid; ++step) {
                std::vector<Rational> sat(n);
                for (int i = 0; i < n; ++i) {
                    const Rational w(dir[i], out.grid);
                    sat[i] = box.lo[i] + Rational(step, out.grid) * (box.hi[i] - box.lo[i]) * w;
                }
                Query probe = q;
                probe.sat = sat;
                LpInstance lp = build_lp(m, probe, opts);
                std::vector<int> pr_index;
                for (std::size_t v = 0; v < lp.vars.size(); ++v) {
                    if (lp.vars[v].kind == VarKind::Extra) pr_index.push_back(static_cast<int>(v));
                }
                enumerate_weights(2 * n, out.grid, [&](const std::vector<long>& wk) {
                    std::vector<Rational> we(n), wp(n);
                    for (int i = 0; i < n; ++i) {
                        we[i] = Rational(wk[i], out.grid);
                        wp[i] = Rational(wk[n + i], out.grid);
                    }
                    set_expectation_objective(lp, m, we);
                    // Merge the probability weights into the same objective.
                    for (int i = 0; i < n; ++i) {
                        if (wp[i].is_zero()) continue;
                        lp.objective.push_back({pr_index[i], wp[i]});
                    }
                    std::sort(lp.objective.begin(), lp.objective.end(),
                              [](const auto& l, const auto& r) { return l.first < r.first; });
                    const auto outcome = solve_or_skip(lp);
                    if (!outcome) return;
                    ParetoPoint p;
                    p.value = expectation_of(lp, outcome->assignment, m);
                    for (int i = 0; i < n; ++i) p.value.push_back(sat[i]);
                    for (int i = 0; i < n; ++i)
                        p.value.push_back(outcome->assignment.value[pr_index[i]]);
                    out.points.push_back(std::move(p));
                    out.witnesses.push_back(outcome->assignment);
                });
            }
        });
    }

    finalize(out);
    return out;
}

std::string serialize_pareto(const ParetoApproximation& p) {
    ordered_json doc;
    doc["axis"] = axis_name(p.axis);
    doc["epsilon"] = p.epsilon.str();
    doc["grid"] = p.grid;
    ordered_json off = ordered_json::array();
    for (const auto& o : p.offset) off.push_back(o.str());
    doc["offset"] = off;
    doc["points"] = ordered_json::array();
    for (const auto& point : p.points) {
        ordered_json v = ordered_json::array();
        for (const auto& c : point.value) v.push_back(c.str());
        doc["points"].push_back(v);
    }
    return doc.dump(2) + "\n";
}

} // namespace mpmdp
