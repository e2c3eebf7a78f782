#include "xbs/series.hpp"

#include <algorithm>

namespace xbs {

Series Series::term(const Forest &f, Coefficient c, int cutoff2) {
    Series s(cutoff2);
    s.add(f, c);
    return s;
}

void Series::add(const Forest &f, const Coefficient &c) {
    if (c.is_zero())
        return;
    Forest cf = canonicalize(f);
    if (grade2(cf) > cutoff2_)
        return;
    auto it = terms_.find(cf);
    if (it == terms_.end()) {
        terms_.emplace(std::move(cf), c);
        return;
    }
    it->second += c;
    if (it->second.is_zero())
        terms_.erase(it);
}

Series &Series::operator+=(const Series &o) {
    cutoff2_ = std::min(cutoff2_, o.cutoff2_);
    std::erase_if(terms_, [&](const auto &kv) { return grade2(kv.first) > cutoff2_; });
    for (const auto &[f, c] : o.terms_)
        add(f, c);
    return *this;
}

Series &Series::operator-=(const Series &o) {
    cutoff2_ = std::min(cutoff2_, o.cutoff2_);
    std::erase_if(terms_, [&](const auto &kv) { return grade2(kv.first) > cutoff2_; });
    for (const auto &[f, c] : o.terms_)
        add(f, -c);
    return *this;
}

Series Series::scaled(const Coefficient &c) const {
    Series s(cutoff2_);
    if (c.is_zero())
        return s;
    for (const auto &[f, k] : terms_) {
        Coefficient p = k * c;
        if (!p.is_zero())
            s.terms_.emplace(f, std::move(p));
    }
    return s;
}

Series Series::truncated(int cutoff2v) const {
    Series s(std::min(cutoff2_, cutoff2v));
    for (const auto &[f, c] : terms_)
        if (grade2(f) <= cutoff2v)
            s.terms_.emplace(f, c);
    return s;
}

Series Series::graded_part(int g2) const {
    Series s(cutoff2_);
    for (const auto &[f, c] : terms_)
        if (grade2(f) == g2)
            s.terms_.emplace(f, c);
    return s;
}

Coefficient Series::coefficient_of(const Forest &f) const {
    auto it = terms_.find(canonicalize(f));
    return it == terms_.end() ? Coefficient() : it->second;
}

bool Series::near_zero(double tol) const {
    for (const auto &[f, c] : terms_)
        if (!c.near_zero(tol))
            return false;
    return true;
}

std::string Series::str() const {
    if (terms_.empty())
        return "0";
    std::string out;
    for (const auto &[f, c] : terms_) {
        if (!out.empty())
            out += "  +  ";
        out += "(" + c.str() + ") " + render_differential(f);
    }
    return out;
}

} // namespace xbs
