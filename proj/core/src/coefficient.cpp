#include "xbs/coefficient.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace xbs {

// -- Number -------------------------------------------------------------------

std::string Number::str() const {
    if (exact_) {
        std::ostringstream os;
        os << q_;
        return os.str();
    }
    char buf[40];
    snprintf(buf, sizeof buf, "%.17g", d_);
    return buf;
}

Rational rational_from_string(const std::string &s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos)
            return Rational(Integer(s));
        Integer num(s.substr(0, slash)), den(s.substr(slash + 1));
        if (den.is_zero())
            throw ParseError("zero denominator in '" + s + "'");
        return Rational(num, den);
    } catch (const std::exception &) {
        throw ParseError("bad rational '" + s + "'");
    }
}

Number number_from_string(const std::string &s) {
    if (s.find('.') != std::string::npos || s.find('e') != std::string::npos ||
        s.find('E') != std::string::npos) {
        try {
            return Number::inexact(std::stod(s));
        } catch (const std::exception &) {
            throw ParseError("bad number '" + s + "'");
        }
    }
    return Number(rational_from_string(s));
}

// -- Generators -----------------------------------------------------------------

Generators::Generators() {
    entries_.push_back({"sigma", "σ", "\\sigma"});
    index_.emplace("sigma", 0);
}

Generators &Generators::instance() {
    static Generators g;
    return g;
}

int Generators::intern(const std::string &name) { return intern(name, name, name); }

int Generators::intern(const std::string &name, const std::string &pretty,
                       const std::string &latex) {
    std::lock_guard lock(mu_);
    auto it = index_.find(name);
    if (it != index_.end())
        return it->second;
    int id = static_cast<int>(entries_.size());
    entries_.push_back({name, pretty, latex});
    index_.emplace(name, id);
    return id;
}

const std::string &Generators::name(int id) const {
    std::lock_guard lock(mu_);
    return entries_.at(id).name;
}
const std::string &Generators::pretty(int id) const {
    std::lock_guard lock(mu_);
    return entries_.at(id).pretty;
}
const std::string &Generators::latex(int id) const {
    std::lock_guard lock(mu_);
    return entries_.at(id).latex;
}
int Generators::lookup(const std::string &name) const {
    std::lock_guard lock(mu_);
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

// -- Coefficient ----------------------------------------------------------------

Coefficient Coefficient::generator(int id, int exponent) {
    Coefficient c;
    if (exponent != 0) {
        if (exponent < 0 && id != Generators::instance().sigma())
            throw Error("negative exponent on non-sigma generator " +
                        Generators::instance().name(id));
        c.terms_.emplace(Monomial{{id, exponent}}, Number(1));
    } else
        c = Coefficient(1);
    return c;
}

Coefficient Coefficient::generator(const std::string &name, int exponent) {
    return generator(Generators::instance().intern(name), exponent);
}

Coefficient Coefficient::sigma_power(int exponent) {
    return generator(Generators::instance().sigma(), exponent);
}

bool Coefficient::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Number Coefficient::constant_value() const {
    if (terms_.empty())
        return Number(0);
    if (!is_constant())
        throw Error("coefficient is not constant: " + str());
    return terms_.begin()->second;
}

bool Coefficient::exact() const {
    for (const auto &[m, n] : terms_)
        if (!n.exact())
            return false;
    return true;
}

void Coefficient::insert(const Monomial &m, const Number &n) {
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        if (!n.is_zero())
            terms_.emplace(m, n);
        return;
    }
    it->second += n;
    if (it->second.is_zero())
        terms_.erase(it);
}

Coefficient Coefficient::operator-() const {
    Coefficient c;
    for (const auto &[m, n] : terms_)
        c.terms_.emplace(m, -n);
    return c;
}

Coefficient &Coefficient::operator+=(const Coefficient &o) {
    for (const auto &[m, n] : o.terms_)
        insert(m, n);
    return *this;
}

Coefficient &Coefficient::operator-=(const Coefficient &o) {
    for (const auto &[m, n] : o.terms_)
        insert(m, -n);
    return *this;
}

namespace {
Monomial mul_monomials(const Monomial &a, const Monomial &b) {
    Monomial r;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first))
            r.push_back(a[i++]);
        else if (i == a.size() || b[j].first < a[i].first)
            r.push_back(b[j++]);
        else {
            int e = a[i].second + b[j].second;
            if (e != 0)
                r.emplace_back(a[i].first, e);
            ++i, ++j;
        }
    }
    return r;
}
} // namespace

Coefficient operator*(const Coefficient &a, const Coefficient &b) {
    Coefficient c;
    for (const auto &[ma, na] : a.terms_)
        for (const auto &[mb, nb] : b.terms_)
            c.insert(mul_monomials(ma, mb), na * nb);
    return c;
}

Coefficient Coefficient::substitute(const std::map<int, Coefficient> &assignment) const {
    Coefficient out;
    for (const auto &[m, n] : terms_) {
        Coefficient term(n);
        for (const auto &[id, e] : m) {
            auto it = assignment.find(id);
            if (it == assignment.end()) {
                term *= generator(id, e);
            } else if (e >= 0) {
                for (int k = 0; k < e; ++k)
                    term *= it->second;
            } else {
                // negative powers (sigma) need an invertible value
                if (!it->second.is_constant() || it->second.constant_value().is_zero())
                    throw Error("cannot substitute a non-constant into a negative power");
                Number inv = Number(1) / it->second.constant_value();
                for (int k = 0; k < -e; ++k)
                    term *= Coefficient(inv);
            }
        }
        out += term;
    }
    return out;
}

Coefficient Coefficient::divided_by_monomial(const Coefficient &mono) const {
    if (mono.terms_.size() != 1)
        throw Error("divisor is not a monomial: " + mono.str());
    const auto &[dm, dn] = *mono.terms_.begin();
    for (const auto &[id, e] : dm)
        if (id != Generators::instance().sigma())
            throw Error("monomial division only supported in sigma");
    Monomial inv = dm;
    for (auto &[id, e] : inv)
        e = -e;
    Coefficient out;
    for (const auto &[m, n] : terms_)
        out.insert(mul_monomials(m, inv), n / dn);
    return out;
}

int Coefficient::sigma_clearing_power() const {
    int k = 0;
    const int s = Generators::instance().sigma();
    for (const auto &[m, n] : terms_)
        for (const auto &[id, e] : m)
            if (id == s && e < 0)
                k = std::max(k, -e);
    return k;
}

bool Coefficient::near_zero(double tol) const {
    for (const auto &[m, n] : terms_)
        if (!n.near_zero(tol))
            return false;
    return true;
}

// -- parsing --------------------------------------------------------------------

namespace {

struct Lexer {
    std::string s;
    size_t p = 0;
    void skip() {
        while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p])))
            ++p;
    }
    bool eof() {
        skip();
        return p >= s.size();
    }
    char peek() {
        skip();
        return p < s.size() ? s[p] : '\0';
    }
    bool accept(char c) {
        if (peek() == c) {
            ++p;
            return true;
        }
        return false;
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '(' || c == ')' ||
               c == '\'' || c == ',' || c == '[' || c == ']' || c == '.' || c == ':';
    }
    std::string number_token() {
        skip();
        size_t q = p;
        while (p < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[p])) || s[p] == '.' || s[p] == 'e' ||
                s[p] == 'E' || ((s[p] == '+' || s[p] == '-') && p > q && (s[p - 1] == 'e' || s[p - 1] == 'E'))))
            ++p;
        return s.substr(q, p - q);
    }
    std::string ident_token() {
        skip();
        size_t q = p;
        while (p < s.size() && ident_char(s[p]))
            ++p;
        return s.substr(q, p - q);
    }
};

int parse_int(Lexer &lx) {
    bool neg = lx.accept('-');
    std::string t = lx.number_token();
    if (t.empty())
        throw ParseError("expected integer exponent in coefficient");
    return (neg ? -1 : 1) * std::stoi(t);
}

Coefficient parse_factor(Lexer &lx) {
    char c = lx.peek();
    Coefficient base;
    if (std::isdigit(static_cast<unsigned char>(c))) {
        std::string t = lx.number_token();
        // integer '/' integer stays exact; handled at term level via '/'
        base = Coefficient(number_from_string(t));
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string id = lx.ident_token();
        if (id.empty())
            throw ParseError("bad identifier in coefficient");
        base = Coefficient::generator(id);
    } else if (c == '(') {
        throw ParseError("parenthesised subexpressions are not part of the grammar");
    } else {
        throw ParseError(std::string("unexpected character '") + c + "' in coefficient");
    }
    if (lx.accept('^')) {
        int e = parse_int(lx);
        if (base.is_constant()) {
            Number v = base.constant_value();
            if (e < 0)
                throw ParseError("negative exponent on a constant");
            Number r(1);
            for (int k = 0; k < e; ++k)
                r *= v;
            return Coefficient(r);
        }
        const auto &m = base.terms().begin()->first;
        if (m.size() != 1)
            throw ParseError("'^' applies to a single generator");
        return Coefficient::generator(m[0].first, m[0].second * e);
    }
    return base;
}

Coefficient parse_term(Lexer &lx) {
    Coefficient acc = parse_factor(lx);
    while (true) {
        if (lx.accept('*'))
            acc = acc * parse_factor(lx);
        else if (lx.accept('/')) {
            Coefficient d = parse_factor(lx);
            if (!d.is_constant() || d.constant_value().is_zero())
                throw ParseError("division only by nonzero constants");
            acc = acc * Coefficient(Number(1) / d.constant_value());
        } else
            break;
    }
    return acc;
}

} // namespace

Coefficient Coefficient::parse(const std::string &text) {
    Lexer lx{text};
    Coefficient acc;
    bool first = true;
    while (!lx.eof()) {
        int sign = 1;
        if (lx.accept('+'))
            sign = 1;
        else if (lx.accept('-'))
            sign = -1;
        else if (!first)
            throw ParseError("expected '+' or '-' between terms in '" + text + "'");
        Coefficient t = parse_term(lx);
        acc += sign > 0 ? t : -t;
        first = false;
    }
    return acc;
}

namespace {
std::string format_impl(const std::map<Monomial, Number> &terms, int mode) {
    // mode 0: parseable names, 1: pretty, 2: latex
    if (terms.empty())
        return "0";
    const auto &G = Generators::instance();
    std::string out;
    bool first = true;
    for (const auto &[m, n] : terms) {
        Number a = n;
        bool neg = a < Number(0);
        if (neg)
            a = -a;
        std::string t = a.str();
        if (!m.empty() && t == "1")
            t.clear();
        for (const auto &[id, e] : m) {
            std::string g = mode == 0 ? G.name(id) : (mode == 1 ? G.pretty(id) : G.latex(id));
            if (e != 1 && mode != 0 && g.find(' ') != std::string::npos)
                g = "(" + g + ")";
            if (!t.empty())
                t += mode == 0 ? "*" : (mode == 2 ? " " : "·");
            t += g;
            if (e != 1)
                t += "^" + std::to_string(e);
        }
        const char *minus = mode == 0 ? "- " : "− ";
        if (first) {
            out = (neg ? std::string(mode == 0 ? "-" : "−") : "") + t;
            first = false;
        } else
            out += " " + (neg ? std::string(minus) : "+ ") + t;
    }
    return out;
}
} // namespace

std::string Coefficient::str() const { return format_impl(terms_, 0); }
std::string Coefficient::pretty(bool latex) const { return format_impl(terms_, latex ? 2 : 1); }

} // namespace xbs
