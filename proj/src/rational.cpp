#include "mpmdp/rational.hpp"

#include <cctype>
#include <ostream>
#include <sstream>

namespace mpmdp {

namespace {

bool all_digits(const std::string& s, size_t from, size_t to) {
    if (from >= to) return false;
    for (size_t i = from; i < to; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

} // namespace

Rational Rational::parse(const std::string& text) {
    size_t pos = 0;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
    size_t slash = text.find('/');
    bool ok;
    if (slash == std::string::npos) {
        ok = all_digits(text, pos, text.size());
    } else {
        ok = all_digits(text, pos, slash) && all_digits(text, slash + 1, text.size());
    }
    if (!ok) throw ParseError("invalid rational literal '" + text + "' (expected p or p/q with integer p, q)");

    mpq_class q;
    // GMP does not understand an explicit leading '+'.
    const std::string& t = text[0] == '+' ? text.substr(1) : text;
    if (q.set_str(t, 10) != 0) {
        throw ParseError("invalid rational literal '" + text + "'");
    }
    if (sgn(q.get_den()) == 0) {
        throw ParseError("rational literal '" + text + "' has zero denominator");
    }
    q.canonicalize();
    return Rational(q);
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

std::string to_string(const std::vector<Rational>& v) {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << v[i];
    }
    os << ')';
    return os.str();
}

} // namespace mpmdp
