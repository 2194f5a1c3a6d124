#include "mpmdp/lp.hpp"

#include <sstream>

namespace mpmdp {

int LpInstance::variable_index(const std::string& name) const {
    for (size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

namespace {

void append_terms(std::ostringstream& os, const LpInstance& lp, const std::vector<std::pair<int, Rational>>& terms) {
    bool first = true;
    for (const auto& [var, coeff] : terms) {
        Rational a = coeff.abs();
        if (first) {
            if (coeff.sign() < 0) os << '-';
            first = false;
        } else {
            os << (coeff.sign() < 0 ? " - " : " + ");
        }
        if (a != Rational(1)) os << a.str() << '*';
        os << lp.vars[var].name;
    }
    if (first) os << '0';
}

} // namespace

std::vector<std::string> check_assignment(const LpInstance& lp, const LpAssignment& a) {
    std::vector<std::string> violations;
    if (a.value.size() != lp.vars.size()) {
        violations.push_back("assignment has " + std::to_string(a.value.size()) + " values for " +
                             std::to_string(lp.vars.size()) + " variables");
        return violations;
    }
    for (size_t i = 0; i < lp.vars.size(); ++i) {
        if (a.value[i].sign() < 0) {
            violations.push_back(lp.vars[i].name + " = " + a.value[i].str() + " violates " + lp.vars[i].name + " >= 0");
        }
    }
    for (const LpConstraint& c : lp.constraints) {
        Rational lhs;
        for (const auto& [var, coeff] : c.terms) lhs += coeff * a.value[var];
        bool ok = c.rel == LpConstraint::Rel::Eq ? lhs == c.rhs : lhs >= c.rhs;
        if (!ok) {
            std::ostringstream os;
            os << c.label << ": ";
            append_terms(os, lp, c.terms);
            os << (c.rel == LpConstraint::Rel::Eq ? " = " : " >= ") << c.rhs.str()
               << " violated, left-hand side is " << lhs.str();
            violations.push_back(os.str());
        }
    }
    return violations;
}

std::string dump_lp(const LpInstance& lp) {
    std::ostringstream os;
    os << "# " << lp.vars.size() << " variables, " << lp.constraints.size() << " constraints\n";
    os << "# variables:";
    for (const LpVar& v : lp.vars) os << ' ' << v.name;
    os << '\n';
    if (!lp.objective.empty()) {
        os << "maximize: ";
        append_terms(os, lp, lp.objective);
        os << '\n';
    }
    for (const LpConstraint& c : lp.constraints) {
        os << c.label << ": ";
        append_terms(os, lp, c.terms);
        os << (c.rel == LpConstraint::Rel::Eq ? " = " : " >= ") << c.rhs.str() << '\n';
    }
    return os.str();
}

} // namespace mpmdp
