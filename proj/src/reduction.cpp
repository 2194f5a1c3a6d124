#include "mpmdp/reduction.hpp"

#include <cstdlib>
#include <sstream>

#include "mpmdp/errors.hpp"

namespace mpmdp {

Cnf parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Cnf cnf;
    long declared_clauses = -1;
    std::vector<int> current;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "c") continue;
        if (first == "p") {
            if (declared_clauses >= 0)
                throw ParseError("line " + std::to_string(line_no) + ": duplicate problem line");
            std::string kind;
            long vars = 0, clauses = 0;
            if (!(ls >> kind >> vars >> clauses) || kind != "cnf" || vars < 0 || clauses < 0)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": problem line must read \"p cnf <variables> <clauses>\"");
            cnf.variables = static_cast<int>(vars);
            declared_clauses = clauses;
            continue;
        }
        if (declared_clauses < 0)
            throw ParseError("line " + std::to_string(line_no) +
                             ": clause before the problem line");
        ls.clear();
        ls.str(line);
        long lit;
        while (ls >> lit) {
            if (lit == 0) {
                if (current.empty())
                    throw ParseError("line " + std::to_string(line_no) + ": empty clause");
                cnf.clauses.push_back(current);
                current.clear();
            } else {
                if (std::abs(lit) > cnf.variables)
                    throw ParseError("line " + std::to_string(line_no) + ": literal " +
                                     std::to_string(lit) + " is outside 1.." +
                                     std::to_string(cnf.variables));
                current.push_back(static_cast<int>(lit));
            }
        }
        if (!ls.eof())
            throw ParseError("line " + std::to_string(line_no) + ": clauses must be integers");
    }
    if (!current.empty()) throw ParseError("last clause is not terminated by 0");
    if (declared_clauses < 0) throw ParseError("missing problem line");
    if (static_cast<long>(cnf.clauses.size()) != declared_clauses)
        throw ParseError("problem line declares " + std::to_string(declared_clauses) +
                         " clauses but " + std::to_string(cnf.clauses.size()) + " were given");
    if (cnf.variables == 0) throw ParseError("formula needs at least one variable");
    return cnf;
}

std::string serialize_dimacs(const Cnf& cnf) {
    std::ostringstream out;
    out << "p cnf " << cnf.variables << " " << cnf.clauses.size() << "\n";
    for (const auto& clause : cnf.clauses) {
        for (int lit : clause) out << lit << " ";
        out << "0\n";
    }
    return out.str();
}

SatInstance sat_to_instance(const Cnf& cnf) {
    const int p = cnf.variables;
    const int k = static_cast<int>(cnf.clauses.size());
    const int n = k + 2 * p;

    // literal |lit| at sign: does it satisfy the clause?
    const auto satisfies = [&](int lit, const std::vector<int>& clause) {
        for (int l : clause) {
            if (l == lit) return true;
        }
        return false;
    };

    SatInstance inst;
    Mdp& m = inst.model;
    m.dimension = n;
    m.initial = 0;
    for (int i = 1; i <= p; ++i) m.states.push_back("s" + std::to_string(i));
    m.act.resize(p);
    for (int i = 1; i <= p; ++i) {
        const int next = i % p; // state index of s_{i+1}, wrapping to s1
        for (int sign = 0; sign < 2; ++sign) {
            const int lit = sign == 0 ? i : -i;
            Action a;
            a.name = (sign == 0 ? "a" : "na") + std::to_string(i);
            a.source = i - 1;
            a.delta = {{next, Rational(1)}};
            a.reward.assign(n, Rational());
            for (int c = 0; c < k; ++c) {
                if (satisfies(lit, cnf.clauses[c])) a.reward[c] = Rational(1);
            }
            a.reward[k + sign * p + (i - 1)] = Rational(1);
            m.act[i - 1].push_back(static_cast<int>(m.actions.size()));
            m.actions.push_back(std::move(a));
        }
    }
    m.validate();

    Query& q = inst.query;
    q.variant = QueryVariant::MultiQuantConjunctiveJoint;
    q.exp = std::vector<Rational>(n, Rational());
    q.sat.assign(n, Rational());
    q.pr.assign(n, Rational());
    q.sat_joint.assign(n, Rational());
    const Rational inv_p(1, p);
    const Rational half(1, 2);
    for (int i = 0; i < 2 * p; ++i) {
        q.sat[k + i] = inv_p;
        q.pr[k + i] = half;
    }
    for (int c = 0; c < k; ++c) q.sat_joint[c] = inv_p;
    q.pr_joint = half;
    validate_query(m, q);
    return inst;
}

} // namespace mpmdp
