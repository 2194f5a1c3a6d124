#include "mpmdp/simplex.hpp"

#include <algorithm>
#include <optional>

namespace mpmdp {

std::string status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
    }
    return "?";
}

namespace {

using Term = std::pair<int, Rational>;
using SparseRow = std::vector<Term>;

const Rational* row_coefficient(const SparseRow& row, int col) {
    auto it = std::lower_bound(row.begin(), row.end(), col,
                               [](const Term& t, int c) { return t.first < c; });
    if (it == row.end() || it->first != col) return nullptr;
    return &it->second;
}

/// Internal row orientation after sign normalization of the right-hand side.
enum class Rel { Eq, Ge, Le };

struct InternalRow {
    SparseRow terms;      ///< over reduced structural columns
    Rel rel = Rel::Eq;
    Rational rhs;         ///< always >= 0
    int origin = -1;      ///< index into the original constraint list (for messages)
};

/// Tableau state shared by both phases.
struct Tableau {
    std::vector<SparseRow> rows;   ///< current rows over all columns (structural + slack + artificial)
    std::vector<Rational> rhs;     ///< current right-hand sides (>= 0 throughout)
    std::vector<int> basis;        ///< basic column per row
    std::vector<Rational> cost;    ///< reduced cost row (minimization)
    Rational cost_value;           ///< current objective value (negated running constant)
    int num_columns = 0;

    SolveStats* stats = nullptr;

    void note(const Rational& r) {
        if (stats) stats->max_coefficient_bits = std::max(stats->max_coefficient_bits, r.bit_length());
    }

    /// row_k -= factor * row_p (sparse merge, zero entries dropped).
    void axpy_row(SparseRow& target, const Rational& factor, const SparseRow& source) {
        SparseRow result;
        result.reserve(target.size() + source.size());
        size_t i = 0, j = 0;
        while (i < target.size() || j < source.size()) {
            if (j == source.size() || (i < target.size() && target[i].first < source[j].first)) {
                result.push_back(std::move(target[i++]));
            } else if (i == target.size() || source[j].first < target[i].first) {
                Rational v = -factor * source[j].second;
                note(v);
                result.emplace_back(source[j].first, std::move(v));
                ++j;
            } else {
                Rational v = target[i].second - factor * source[j].second;
                if (!v.is_zero()) {
                    note(v);
                    result.emplace_back(target[i].first, std::move(v));
                }
                ++i;
                ++j;
            }
        }
        target = std::move(result);
    }

    void pivot(int row, int col) {
        SparseRow& p = rows[row];
        const Rational* pivot_val = row_coefficient(p, col);
        Rational inv = Rational(1) / *pivot_val;
        for (auto& [c, v] : p) {
            v *= inv;
            note(v);
        }
        rhs[row] *= inv;
        for (size_t k = 0; k < rows.size(); ++k) {
            if (static_cast<int>(k) == row) continue;
            const Rational* f = row_coefficient(rows[k], col);
            if (!f) continue;
            Rational factor = *f;  // copy: the entry dies during the merge
            axpy_row(rows[k], factor, p);
            rhs[k] -= factor * rhs[row];
        }
        const Rational& cf = cost[col];
        if (!cf.is_zero()) {
            Rational factor = cf;
            for (const auto& [c, v] : p) cost[c] -= factor * v;
            cost_value -= factor * rhs[row];
        }
        basis[row] = col;
        if (stats) ++stats->pivots;
    }
};

struct ReducedSystem {
    std::vector<int> keep;              ///< reduced column -> original variable index
    std::vector<InternalRow> rows;
    std::vector<Rational> objective;    ///< dense over reduced columns (maximize)
    bool has_objective = false;
    bool infeasible = false;
    std::string infeasible_reason;
};

/// Drops forced-zero columns and rows that become trivially satisfied; the
/// sign pass iterates `sum of same-sign terms = 0 (or >= 0)` zero forcing to
/// a fixpoint. Detects trivially infeasible rows.
ReducedSystem reduce(const LpInstance& lp, const SolveOptions& options) {
    size_t n = lp.vars.size();
    std::vector<bool> zero(n, false);
    if (options.use_known_zero) {
        for (int v : lp.known_zero) zero[v] = true;
    }

    ReducedSystem out;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const LpConstraint& c : lp.constraints) {
            Rational rhs = c.rhs;
            int positive = 0, negative = 0;
            for (const auto& [var, coeff] : c.terms) {
                if (zero[var]) continue;
                (coeff.sign() > 0 ? positive : negative)++;
            }
            auto force_all = [&](bool only_negative) {
                for (const auto& [var, coeff] : c.terms) {
                    if (zero[var]) continue;
                    if (only_negative && coeff.sign() > 0) continue;
                    zero[var] = true;
                    changed = true;
                }
            };
            if (c.rel == LpConstraint::Rel::Eq) {
                if (rhs.is_zero() && (positive == 0 || negative == 0) && positive + negative > 0) {
                    force_all(false);
                } else if (positive + negative == 0 && !rhs.is_zero()) {
                    out.infeasible = true;
                    out.infeasible_reason = c.label + ": forced-zero terms cannot equal " + rhs.str();
                } else if (!rhs.is_zero() && ((positive == 0 && rhs.sign() > 0) || (negative == 0 && rhs.sign() < 0))) {
                    out.infeasible = true;
                    out.infeasible_reason = c.label + ": sign of every term contradicts the right-hand side";
                }
            } else {  // Ge
                if (rhs.is_zero() && positive == 0 && negative > 0) {
                    force_all(true);
                } else if (positive == 0 && rhs.sign() > 0) {
                    out.infeasible = true;
                    out.infeasible_reason = c.label + ": no term can be positive but the right-hand side is " + rhs.str();
                }
            }
            if (out.infeasible) return out;
        }
        if (!options.use_sign_presolve) break;
    }

    std::vector<int> column_of(n, -1);
    for (size_t v = 0; v < n; ++v) {
        if (!zero[v]) {
            column_of[v] = static_cast<int>(out.keep.size());
            out.keep.push_back(static_cast<int>(v));
        }
    }
    for (size_t ci = 0; ci < lp.constraints.size(); ++ci) {
        const LpConstraint& c = lp.constraints[ci];
        InternalRow row;
        row.origin = static_cast<int>(ci);
        for (const auto& [var, coeff] : c.terms) {
            if (column_of[var] >= 0) row.terms.emplace_back(column_of[var], coeff);
        }
        row.rhs = c.rhs;
        row.rel = c.rel == LpConstraint::Rel::Eq ? Rel::Eq : Rel::Ge;
        if (row.terms.empty()) {
            bool ok = row.rel == Rel::Eq ? row.rhs.is_zero() : row.rhs.sign() <= 0;
            if (!ok) {
                out.infeasible = true;
                out.infeasible_reason = c.label + ": no free terms remain";
                return out;
            }
            continue;  // trivially satisfied
        }
        // Normalize to integer coefficients: scale by the lcm of denominators
        // over the gcd of numerators to keep the integers small.
        mpz_class lcm_den = 1, gcd_num = 0;
        auto feed = [&](const Rational& r) {
            mpz_class l;
            mpz_lcm(l.get_mpz_t(), lcm_den.get_mpz_t(), r.denominator().get_mpz_t());
            lcm_den = l;
            mpz_class g;
            mpz_gcd(g.get_mpz_t(), gcd_num.get_mpz_t(), r.numerator().get_mpz_t());
            gcd_num = g;
        };
        for (const auto& [c2, v] : row.terms) feed(v);
        if (!row.rhs.is_zero()) feed(row.rhs);
        if (gcd_num == 0) gcd_num = 1;
        Rational scale{mpq_class(lcm_den, gcd_num)};
        for (auto& [c2, v] : row.terms) v *= scale;
        row.rhs *= scale;
        // Orient so the right-hand side is nonnegative.
        if (row.rhs.sign() < 0) {
            for (auto& [c2, v] : row.terms) v = -v;
            row.rhs = -row.rhs;
            if (row.rel == Rel::Ge) row.rel = Rel::Le;
        }
        out.rows.push_back(std::move(row));
    }

    out.has_objective = !lp.objective.empty();
    out.objective.assign(out.keep.size(), Rational(0));
    for (const auto& [var, coeff] : lp.objective) {
        if (column_of[var] >= 0) out.objective[column_of[var]] = coeff;
    }
    return out;
}

/// Verifies an exact Farkas certificate of infeasibility for the reduced
/// system: lambda >= 0 on Ge rows, <= 0 on Le rows, free on Eq rows;
/// sum_i lambda_i * row_i <= 0 columnwise while sum_i lambda_i * rhs_i > 0.
bool farkas_holds(const ReducedSystem& sys, const std::vector<Rational>& lambda) {
    std::vector<Rational> combo(sys.keep.size());
    Rational value;
    for (size_t i = 0; i < sys.rows.size(); ++i) {
        const InternalRow& row = sys.rows[i];
        if (row.rel == Rel::Ge && lambda[i].sign() < 0) return false;
        if (row.rel == Rel::Le && lambda[i].sign() > 0) return false;
        if (lambda[i].is_zero()) continue;
        for (const auto& [c, v] : row.terms) combo[c] += lambda[i] * v;
        value += lambda[i] * row.rhs;
    }
    if (value.sign() <= 0) return false;
    for (const Rational& c : combo) {
        if (c.sign() > 0) return false;
    }
    return true;
}

class Simplex {
public:
    Simplex(const ReducedSystem& sys, SolveStats* stats) : sys_(sys) {
        t_.stats = stats;
        build();
    }

    /// Returns false when phase one proves infeasibility (certificate checked).
    bool phase_one() {
        if (artificial_begin_ == t_.num_columns) return true;  // no artificials were needed
        t_.cost.assign(t_.num_columns, Rational(0));
        for (int c = artificial_begin_; c < t_.num_columns; ++c) t_.cost[c] = Rational(1);
        t_.cost_value = Rational(0);
        reduce_cost_row();
        run();
        if (t_.cost_value.sign() != 0) {
            // cost_value = -(phase objective) at all times; objective > 0 here.
            std::vector<Rational> lambda(t_.rows.size());
            for (size_t i = 0; i < t_.rows.size(); ++i) {
                int art = artificial_of_row_[i];
                // Dual value: 1 - reduced cost of the row's artificial column.
                lambda[i] = art >= 0 ? Rational(1) - t_.cost[art] : -t_.cost[slack_of_row_[i]];
            }
            if (!farkas_holds(sys_, lambda)) {
                throw SolveError("infeasibility certificate failed to verify");
            }
            return false;
        }
        evict_artificials();
        return true;
    }

    /// Returns false on unbounded (ray checked); true when optimal.
    bool phase_two() {
        t_.cost.assign(t_.num_columns, Rational(0));
        for (size_t c = 0; c < sys_.objective.size(); ++c) t_.cost[c] = -sys_.objective[c];
        t_.cost_value = Rational(0);
        reduce_cost_row();
        return run();
    }

    std::vector<Rational> extract() const {
        std::vector<Rational> x(sys_.keep.size());
        for (size_t i = 0; i < t_.rows.size(); ++i) {
            if (t_.basis[i] < static_cast<int>(sys_.keep.size())) x[t_.basis[i]] = t_.rhs[i];
        }
        return x;
    }

private:
    void build() {
        int structural = static_cast<int>(sys_.keep.size());
        int m = static_cast<int>(sys_.rows.size());
        slack_of_row_.assign(m, -1);
        artificial_of_row_.assign(m, -1);

        int next = structural;
        for (int i = 0; i < m; ++i) {
            if (sys_.rows[i].rel != Rel::Eq) slack_of_row_[i] = next++;
        }
        artificial_begin_ = next;
        for (int i = 0; i < m; ++i) {
            if (sys_.rows[i].rel != Rel::Le) artificial_of_row_[i] = next++;
        }
        t_.num_columns = next;

        t_.rows.resize(m);
        t_.rhs.resize(m);
        t_.basis.assign(m, -1);
        for (int i = 0; i < m; ++i) {
            const InternalRow& src = sys_.rows[i];
            SparseRow row = src.terms;
            if (src.rel == Rel::Ge) row.emplace_back(slack_of_row_[i], Rational(-1));
            if (src.rel == Rel::Le) row.emplace_back(slack_of_row_[i], Rational(1));
            if (artificial_of_row_[i] >= 0) row.emplace_back(artificial_of_row_[i], Rational(1));
            t_.rows[i] = std::move(row);
            t_.rhs[i] = src.rhs;
            t_.basis[i] = artificial_of_row_[i] >= 0 ? artificial_of_row_[i] : slack_of_row_[i];
        }
    }

    void reduce_cost_row() {
        for (size_t i = 0; i < t_.rows.size(); ++i) {
            const Rational& cb = t_.cost[t_.basis[i]];
            if (cb.is_zero()) continue;
            Rational factor = cb;
            for (const auto& [c, v] : t_.rows[i]) t_.cost[c] -= factor * v;
            t_.cost_value -= factor * t_.rhs[i];
        }
    }

    /// Core loop: Dantzig pricing, falling back to Bland's rule during long
    /// degenerate stretches (restores guaranteed termination, see ratio test
    /// tie-break). Returns false iff an unbounded direction was found.
    bool run() {
        long degenerate_streak = 0;
        bool bland = false;
        long guard = 5'000'000;
        while (true) {
            if (--guard < 0) throw SolveError("pivot limit exceeded");
            int entering = -1;
            if (bland) {
                for (int c = 0; c < t_.num_columns; ++c) {
                    if (t_.cost[c].sign() < 0) { entering = c; break; }
                }
            } else {
                const Rational* best = nullptr;
                for (int c = 0; c < t_.num_columns; ++c) {
                    if (t_.cost[c].sign() < 0 && (!best || t_.cost[c] < *best)) {
                        best = &t_.cost[c];
                        entering = c;
                    }
                }
            }
            if (entering < 0) return true;  // optimal

            int leaving = -1;
            std::optional<Rational> best_ratio;
            for (size_t i = 0; i < t_.rows.size(); ++i) {
                const Rational* a = row_coefficient(t_.rows[i], entering);
                if (!a || a->sign() <= 0) continue;
                Rational ratio = t_.rhs[i] / *a;
                if (!best_ratio || ratio < *best_ratio ||
                    (ratio == *best_ratio && t_.basis[i] < t_.basis[leaving])) {
                    best_ratio = std::move(ratio);
                    leaving = static_cast<int>(i);
                }
            }
            if (leaving < 0) {
                verify_ray(entering);
                return false;  // unbounded
            }
            bool degenerate = t_.rhs[leaving].is_zero();
            t_.pivot(leaving, entering);
            if (degenerate) {
                if (++degenerate_streak >= 32) bland = true;
            } else {
                degenerate_streak = 0;
                bland = false;
            }
        }
    }

    /// The entering column with no positive entry yields the improving ray
    /// d >= 0: d[entering] = 1, d[basis[i]] = -a_i,entering. Checks A d
    /// against each row relation and that the objective strictly improves.
    void verify_ray(int entering) const {
        std::vector<Rational> d(t_.num_columns);
        d[entering] = Rational(1);
        for (size_t i = 0; i < t_.rows.size(); ++i) {
            const Rational* a = row_coefficient(t_.rows[i], entering);
            if (a) d[t_.basis[i]] = -*a;
        }
        for (const Rational& v : d) {
            if (v.sign() < 0) throw SolveError("unbounded-ray certificate failed: negative component");
        }
        int structural = static_cast<int>(sys_.keep.size());
        Rational gain;
        for (int c = 0; c < structural; ++c) gain += sys_.objective[c] * d[c];
        if (gain.sign() <= 0) throw SolveError("unbounded-ray certificate failed: objective does not improve");
        for (const InternalRow& row : sys_.rows) {
            Rational lhs;
            for (const auto& [c, v] : row.terms) lhs += v * d[c];
            bool ok = row.rel == Rel::Eq ? lhs.is_zero() : (row.rel == Rel::Ge ? lhs.sign() >= 0 : lhs.sign() <= 0);
            if (!ok) throw SolveError("unbounded-ray certificate failed: ray leaves the feasible cone");
        }
    }

    /// After a zero-cost phase one, pivot leftover basic artificials out (or
    /// drop their rows when redundant), then cut the artificial columns off.
    void evict_artificials() {
        for (size_t i = 0; i < t_.rows.size(); ++i) {
            if (t_.basis[i] < artificial_begin_) continue;
            int target = -1;
            for (const auto& [c, v] : t_.rows[i]) {
                if (c < artificial_begin_ && !v.is_zero()) { target = c; break; }
            }
            if (target >= 0) {
                t_.pivot(static_cast<int>(i), target);
            } else {
                t_.rows[i].clear();  // redundant row: artificial = 0 and nothing else
            }
        }
        std::vector<SparseRow> rows;
        std::vector<Rational> rhs;
        std::vector<int> basis;
        std::vector<int> slack_rows, artificial_rows;
        for (size_t i = 0; i < t_.rows.size(); ++i) {
            if (t_.basis[i] >= artificial_begin_) continue;  // dropped redundant row
            SparseRow row;
            for (auto& [c, v] : t_.rows[i]) {
                if (c < artificial_begin_) row.emplace_back(c, std::move(v));
            }
            rows.push_back(std::move(row));
            rhs.push_back(std::move(t_.rhs[i]));
            basis.push_back(t_.basis[i]);
        }
        t_.rows = std::move(rows);
        t_.rhs = std::move(rhs);
        t_.basis = std::move(basis);
        t_.num_columns = artificial_begin_;
    }

    const ReducedSystem& sys_;
    Tableau t_;
    std::vector<int> slack_of_row_;
    std::vector<int> artificial_of_row_;
    int artificial_begin_ = 0;
};

} // namespace

SolveOutcome solve(const LpInstance& lp, const SolveOptions& options) {
    SolveOutcome out;
    ReducedSystem sys = reduce(lp, options);
    out.stats.solved_rows = static_cast<int>(sys.rows.size());
    out.stats.solved_columns = static_cast<int>(sys.keep.size());
    if (sys.infeasible) {
        out.status = SolveStatus::Infeasible;
        return out;
    }

    Simplex simplex(sys, &out.stats);
    if (!simplex.phase_one()) {
        out.status = SolveStatus::Infeasible;
        return out;
    }
    if (sys.has_objective && !simplex.phase_two()) {
        out.status = SolveStatus::Unbounded;
        return out;
    }

    std::vector<Rational> reduced = simplex.extract();
    out.assignment.value.assign(lp.vars.size(), Rational(0));
    for (size_t c = 0; c < reduced.size(); ++c) out.assignment.value[sys.keep[c]] = std::move(reduced[c]);

    std::vector<std::string> violations = check_assignment(lp, out.assignment);
    if (!violations.empty()) {
        throw SolveError("solution certificate failed: " + violations.front());
    }
    if (sys.has_objective) {
        for (const auto& [var, coeff] : lp.objective) out.objective += coeff * out.assignment.value[var];
    }
    out.status = SolveStatus::Optimal;
    return out;
}

} // namespace mpmdp
