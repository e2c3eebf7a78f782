#include "xbs/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace xbs {

Polynomial Polynomial::variable(int dim, int i) {
    Polynomial p(dim);
    std::vector<int> m(dim, 0);
    m.at(i) = 1;
    p.terms_.emplace(std::move(m), Rational(1));
    return p;
}

void Polynomial::insert(const std::vector<int> &m, const Rational &c) {
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        if (!c.is_zero())
            terms_.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero())
        terms_.erase(it);
}

Polynomial Polynomial::operator-() const {
    Polynomial p(dim_);
    for (const auto &[m, c] : terms_)
        p.terms_.emplace(m, Rational(-c));
    return p;
}

Polynomial &Polynomial::operator+=(const Polynomial &o) {
    if (dim_ != o.dim_ && !terms_.empty() && !o.terms_.empty())
        throw DimensionMismatch("polynomial dimensions differ");
    dim_ = std::max(dim_, o.dim_);
    for (const auto &[m, c] : o.terms_)
        insert(m, c);
    return *this;
}

Polynomial &Polynomial::operator-=(const Polynomial &o) { return *this += -o; }

Polynomial operator*(const Polynomial &a, const Polynomial &b) {
    Polynomial p(std::max(a.dim_, b.dim_));
    for (const auto &[ma, ca] : a.terms_)
        for (const auto &[mb, cb] : b.terms_) {
            std::vector<int> m(p.dim_, 0);
            for (size_t i = 0; i < ma.size(); ++i)
                m[i] += ma[i];
            for (size_t i = 0; i < mb.size(); ++i)
                m[i] += mb[i];
            p.insert(m, ca * cb);
        }
    return p;
}

Polynomial Polynomial::scaled(const Rational &c) const {
    Polynomial p(dim_);
    if (c.is_zero())
        return p;
    for (const auto &[m, k] : terms_)
        p.terms_.emplace(m, Rational(k * c));
    return p;
}

Polynomial Polynomial::derivative(int var) const {
    Polynomial p(dim_);
    for (const auto &[m, c] : terms_) {
        if (m[var] == 0)
            continue;
        std::vector<int> d = m;
        --d[var];
        p.insert(d, c * m[var]);
    }
    return p;
}

Rational Polynomial::eval(const std::vector<Rational> &x) const {
    Rational acc = 0;
    for (const auto &[m, c] : terms_) {
        Rational t = c;
        for (int i = 0; i < dim_; ++i)
            for (int k = 0; k < m[i]; ++k)
                t *= x.at(i);
        acc += t;
    }
    return acc;
}

double Polynomial::eval_double(const std::vector<double> &x) const {
    double acc = 0;
    for (const auto &[m, c] : terms_) {
        double t = static_cast<double>(c);
        for (int i = 0; i < dim_; ++i)
            for (int k = 0; k < m[i]; ++k)
                t *= x[i];
        acc += t;
    }
    return acc;
}

Polynomial Polynomial::substitute_affine(const std::vector<std::vector<Rational>> &M,
                                         const std::vector<Rational> &c) const {
    std::vector<Polynomial> images;
    for (int i = 0; i < dim_; ++i) {
        Polynomial img(dim_, c.at(i));
        for (int j = 0; j < dim_; ++j)
            img += Polynomial::variable(dim_, j).scaled(M.at(i).at(j));
        images.push_back(img);
    }
    Polynomial out(dim_);
    for (const auto &[m, k] : terms_) {
        Polynomial t(dim_, k);
        for (int i = 0; i < dim_; ++i)
            for (int e = 0; e < m[i]; ++e)
                t = t * images[i];
        out += t;
    }
    return out;
}

int Polynomial::total_degree() const {
    int d = 0;
    for (const auto &[m, c] : terms_) {
        int s = 0;
        for (int e : m)
            s += e;
        d = std::max(d, s);
    }
    return d;
}

// -- parsing ---------------------------------------------------------------------

namespace {

struct PLexer {
    std::string s;
    size_t p = 0;
    int dim;
    void skip() {
        while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p])))
            ++p;
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
};

Polynomial parse_expr(PLexer &lx);

Rational parse_number(PLexer &lx) {
    lx.skip();
    size_t q = lx.p;
    while (lx.p < lx.s.size() &&
           (std::isdigit(static_cast<unsigned char>(lx.s[lx.p])) || lx.s[lx.p] == '.'))
        ++lx.p;
    std::string t = lx.s.substr(q, lx.p - q);
    if (t.empty())
        throw ParseError("expected number in polynomial");
    auto dot = t.find('.');
    if (dot == std::string::npos)
        return Rational(Integer(t));
    // exact decimal
    std::string digits = t.substr(0, dot) + t.substr(dot + 1);
    int frac = static_cast<int>(t.size() - dot - 1);
    Integer den = 1;
    for (int i = 0; i < frac; ++i)
        den *= 10;
    return Rational(Integer(digits), den);
}

int parse_int(PLexer &lx) {
    bool neg = lx.accept('-');
    Rational r = parse_number(lx);
    if (denominator(r) != 1)
        throw ParseError("expected integer exponent");
    return (neg ? -1 : 1) * static_cast<int>(numerator(r));
}

Polynomial parse_atom(PLexer &lx) {
    char c = lx.peek();
    if (c == '(') {
        lx.accept('(');
        Polynomial e = parse_expr(lx);
        if (!lx.accept(')'))
            throw ParseError("missing ')' in polynomial");
        return e;
    }
    if (c == 'x') {
        ++lx.p;
        size_t q = lx.p;
        while (lx.p < lx.s.size() && std::isdigit(static_cast<unsigned char>(lx.s[lx.p])))
            ++lx.p;
        if (lx.p == q)
            throw ParseError("variable index missing after 'x'");
        int idx = std::stoi(lx.s.substr(q, lx.p - q));
        if (idx < 1 || idx > lx.dim)
            throw ParseError("variable x" + std::to_string(idx) + " out of dimension");
        return Polynomial::variable(lx.dim, idx - 1);
    }
    if (std::isdigit(static_cast<unsigned char>(c)))
        return Polynomial(lx.dim, parse_number(lx));
    throw ParseError(std::string("unexpected '") + c + "' in polynomial");
}

Polynomial parse_power(PLexer &lx) {
    Polynomial base = parse_atom(lx);
    if (lx.accept('^')) {
        int e = parse_int(lx);
        if (e < 0)
            throw ParseError("negative exponents not supported in polynomials");
        Polynomial acc(lx.dim, Rational(1));
        for (int i = 0; i < e; ++i)
            acc = acc * base;
        return acc;
    }
    return base;
}

Polynomial parse_term(PLexer &lx) {
    Polynomial acc = parse_power(lx);
    while (true) {
        if (lx.accept('*'))
            acc = acc * parse_power(lx);
        else if (lx.accept('/')) {
            Polynomial d = parse_power(lx);
            if (d.terms().size() != 1 || d.total_degree() != 0)
                throw ParseError("polynomial division only by constants");
            acc = acc.scaled(Rational(1) / d.terms().begin()->second);
        } else
            break;
    }
    return acc;
}

Polynomial parse_expr(PLexer &lx) {
    Polynomial acc(lx.dim);
    bool first = true;
    while (true) {
        lx.skip();
        if (lx.p >= lx.s.size() || lx.peek() == ')')
            break;
        int sign = 1;
        if (lx.accept('+'))
            sign = 1;
        else if (lx.accept('-'))
            sign = -1;
        else if (!first)
            throw ParseError("expected '+' or '-' in polynomial");
        Polynomial t = parse_term(lx);
        acc += sign > 0 ? t : -t;
        first = false;
    }
    return acc;
}

} // namespace

Polynomial Polynomial::parse(const std::string &text, int dim) {
    PLexer lx{text, 0, dim};
    Polynomial p = parse_expr(lx);
    lx.skip();
    if (lx.p != text.size())
        throw ParseError("trailing input in polynomial '" + text + "'");
    return p;
}

std::string Polynomial::str() const {
    if (terms_.empty())
        return "0";
    std::string out;
    for (const auto &[m, c] : terms_) {
        std::ostringstream t;
        t << c;
        std::string s = t.str();
        for (int i = 0; i < dim_; ++i) {
            if (m[i] == 0)
                continue;
            s += "*x" + std::to_string(i + 1);
            if (m[i] > 1)
                s += "^" + std::to_string(m[i]);
        }
        if (out.empty())
            out = s;
        else if (s[0] == '-')
            out += " - " + s.substr(1);
        else
            out += " + " + s;
    }
    return out;
}

// -- PolySpec --------------------------------------------------------------------

std::vector<Polynomial> PolySpec::drift() const {
    if (!f.empty())
        return f;
    if (!potential)
        throw MissingPotential("drift needs either f or a potential");
    std::vector<Polynomial> out;
    for (int i = 0; i < dim; ++i)
        out.push_back(-potential->derivative(i));
    return out;
}

std::vector<Polynomial> PolySpec::white_drift() const {
    if (!f2.empty())
        return f2;
    if (f2_skew) {
        if (!potential)
            throw MissingPotential("f2 = J grad V needs a potential");
        std::vector<Polynomial> out;
        for (int i = 0; i < dim; ++i) {
            Polynomial acc(dim);
            for (int j = 0; j < dim; ++j)
                acc += potential->derivative(j).scaled((*f2_skew).at(i).at(j));
            out.push_back(acc);
        }
        return out;
    }
    throw MissingPotential("no second drift available");
}

Polynomial PolySpec::log_density_sq(const Rational &sigma_squared) const {
    if (!potential)
        throw MissingPotential("log-density needs the potential");
    return potential->scaled(Rational(-2) / sigma_squared);
}

// -- exact linear algebra -----------------------------------------------------------

std::vector<std::vector<Rational>> matrix_inverse(std::vector<std::vector<Rational>> m) {
    const int n = static_cast<int>(m.size());
    std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n, Rational(0)));
    for (int i = 0; i < n; ++i)
        inv[i][i] = 1;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!m[r][col].is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0)
            throw SingularCayley("singular matrix");
        std::swap(m[piv], m[col]);
        std::swap(inv[piv], inv[col]);
        Rational p = m[col][col];
        for (int j = 0; j < n; ++j) {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col || m[r][col].is_zero())
                continue;
            Rational factor = m[r][col];
            for (int j = 0; j < n; ++j) {
                m[r][j] -= factor * m[col][j];
                inv[r][j] -= factor * inv[col][j];
            }
        }
    }
    return inv;
}

std::vector<std::vector<Rational>>
cayley_orthogonal(const std::vector<std::vector<Rational>> &skew) {
    const int n = static_cast<int>(skew.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (skew[i][j] != -skew[j][i])
                throw SingularCayley("matrix is not skew-symmetric");
    std::vector<std::vector<Rational>> i_minus(n, std::vector<Rational>(n)),
        i_plus(n, std::vector<Rational>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            i_minus[i][j] = (i == j ? Rational(1) : Rational(0)) - skew[i][j];
            i_plus[i][j] = (i == j ? Rational(1) : Rational(0)) + skew[i][j];
        }
    auto inv = matrix_inverse(i_plus);
    std::vector<std::vector<Rational>> out(n, std::vector<Rational>(n, Rational(0)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                out[i][j] += i_minus[i][k] * inv[k][j];
    return out;
}

} // namespace xbs
