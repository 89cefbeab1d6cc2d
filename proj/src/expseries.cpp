#include "gfc/expseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gfc/specfun.hpp"

namespace gfc::series {

namespace {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double term) {
        const double y = term - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// Canonical order: by exponent, ties by coefficient. Makes merge summation
// order independent of how the raw terms were generated, so algebraically
// commutative operations produce bit-identical normalized term lists.
void canonical_sort(std::vector<Term>& terms) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
        if (a.exponent != b.exponent) return a.exponent < b.exponent;
        return a.coefficient < b.coefficient;
    });
}

// Sort, merge exponents within tol (run anchored at its first exponent),
// drop zero coefficients.
std::vector<Term> merge_terms(std::vector<Term> terms, double tol) {
    canonical_sort(terms);
    std::vector<Term> out;
    out.reserve(terms.size());
    std::size_t i = 0;
    while (i < terms.size()) {
        const double anchor = terms[i].exponent;
        KahanSum acc;
        while (i < terms.size() && terms[i].exponent - anchor <= tol) {
            acc.add(terms[i].coefficient);
            ++i;
        }
        if (acc.sum != 0.0) {
            out.push_back({anchor, acc.sum});
        }
    }
    return out;
}

}  // namespace

ExponentSumSeries::ExponentSumSeries(std::vector<Term> terms, std::size_t max_terms,
                                     double exponent_tol)
    : terms_(std::move(terms)), max_terms_(max_terms), exponent_tol_(exponent_tol) {
    if (max_terms_ == 0) {
        throw BudgetError("ExponentSumSeries: max_terms must be positive");
    }
    if (!(exponent_tol_ > 0.0)) {
        throw DomainError("ExponentSumSeries: exponent_tol must be positive");
    }
    for (const Term& t : terms_) {
        if (!std::isfinite(t.exponent) || !std::isfinite(t.coefficient)) {
            throw DomainError("ExponentSumSeries: terms must be finite");
        }
        if (t.exponent <= -1.0) {
            throw DomainError("ExponentSumSeries: exponents must be > -1");
        }
    }
    normalize();
    if (terms_.size() > max_terms_) {
        throw BudgetError("ExponentSumSeries: term count exceeds max_terms");
    }
}

ExponentSumSeries::ExponentSumSeries(Unchecked, std::vector<Term> terms, std::size_t max_terms,
                                     double exponent_tol, bool truncated)
    : terms_(std::move(terms)),
      max_terms_(max_terms),
      exponent_tol_(exponent_tol),
      truncated_(truncated) {
    normalize();
}

void ExponentSumSeries::normalize() {
    terms_ = merge_terms(std::move(terms_), exponent_tol_);
}

ExponentSumSeries ExponentSumSeries::constant(double c) {
    if (c == 0.0) return {};
    return ExponentSumSeries({{0.0, c}});
}

ExponentSumSeries ExponentSumSeries::monomial(double coefficient, double exponent) {
    if (coefficient == 0.0) return {};
    return ExponentSumSeries({{exponent, coefficient}});
}

ExponentSumSeries ExponentSumSeries::power_kernel(double beta) {
    if (!(beta > 0.0)) {
        throw DomainError("power_kernel: beta must be positive");
    }
    return ExponentSumSeries({{beta - 1.0, specfun::reciprocal_gamma(beta)}});
}

bool ExponentSumSeries::convolvable() const {
    return terms_.empty() || terms_.front().exponent > -1.0;
}

double ExponentSumSeries::leading_exponent() const {
    if (terms_.empty()) {
        throw DomainError("leading_exponent: zero series has no leading exponent");
    }
    return terms_.front().exponent;
}

ExponentSumSeries::Eval ExponentSumSeries::evaluate_ex(double t) const {
    if (!(t > 0.0)) {
        throw DomainError("evaluate: t must be positive");
    }
    KahanSum acc;
    double last = 0.0;
    for (const Term& term : terms_) {
        last = term.coefficient * std::pow(t, term.exponent);
        acc.add(last);
    }
    const bool tail = truncated_ && !terms_.empty() &&
                      std::fabs(last) > 1e-8 * std::fabs(acc.sum);
    return {acc.sum, tail};
}

double ExponentSumSeries::evaluate(double t) const { return evaluate_ex(t).value; }

double ExponentSumSeries::laplace(double p) const {
    if (!(p > 0.0)) {
        throw DomainError("laplace: p must be positive");
    }
    KahanSum acc;
    for (const Term& term : terms_) {
        const double a = term.exponent + 1.0;  // > 0
        double v;
        if (a <= 170.0) {
            v = term.coefficient * specfun::gamma(a) * std::pow(p, -a);
        } else {
            v = term.coefficient * std::exp(specfun::log_abs_gamma(a) - a * std::log(p));
        }
        acc.add(v);
    }
    return acc.sum;
}

double ExponentSumSeries::value_at_zero() const {
    if (terms_.empty()) return 0.0;
    const double e = terms_.front().exponent;
    if (e > exponent_tol_) return 0.0;
    if (std::fabs(e) <= exponent_tol_) return terms_.front().coefficient;
    throw SingularAtZeroError("value_at_zero: series diverges at t = 0");
}

ExponentSumSeries linear_combine(const std::vector<std::pair<double, ExponentSumSeries>>& parts) {
    if (parts.empty()) {
        throw DomainError("linear_combine: sequence must be nonempty");
    }
    std::vector<Term> raw;
    std::size_t budget = 0;
    double tol = 0.0;
    bool truncated = false;
    for (const auto& [w, s] : parts) {
        budget = std::max(budget, s.max_terms());
        tol = std::max(tol, s.exponent_tol());
        truncated = truncated || s.truncated();
        for (const Term& t : s.terms()) {
            raw.push_back({t.exponent, w * t.coefficient});
        }
    }
    ExponentSumSeries out(ExponentSumSeries::Unchecked{}, std::move(raw), budget, tol, truncated);
    if (out.size() > budget) {
        throw BudgetError("linear_combine: merged term count exceeds max_terms");
    }
    return out;
}

ExponentSumSeries convolve(const ExponentSumSeries& a, const ExponentSumSeries& b) {
    if (!a.convolvable() || !b.convolvable()) {
        throw DomainError("convolve: operands must have all exponents > -1");
    }
    const std::size_t budget = std::max(a.max_terms(), b.max_terms());
    const double tol = std::max(a.exponent_tol(), b.exponent_tol());
    std::vector<Term> raw;
    raw.reserve(a.size() * b.size());
    for (const Term& ta : a.terms()) {
        for (const Term& tb : b.terms()) {
            const double e = ta.exponent + tb.exponent + 1.0;
            const double c =
                ta.coefficient * tb.coefficient * specfun::beta(ta.exponent + 1.0, tb.exponent + 1.0);
            raw.push_back({e, c});
        }
    }
    bool truncated = a.truncated() || b.truncated();
    ExponentSumSeries out(ExponentSumSeries::Unchecked{}, std::move(raw), budget, tol, truncated);
    if (out.size() > budget) {
        std::vector<Term> kept(out.terms().begin(), out.terms().begin() + budget);
        out = ExponentSumSeries(ExponentSumSeries::Unchecked{}, std::move(kept), budget, tol, true);
    }
    return out;
}

ExponentSumSeries conv_power(const ExponentSumSeries& s, int n) {
    if (n < 1) {
        throw DomainError("conv_power: n must be >= 1");
    }
    ExponentSumSeries out = s;
    for (int i = 1; i < n; ++i) {
        out = convolve(out, s);
    }
    return out;
}

ExponentSumSeries differentiate(const ExponentSumSeries& s, int m) {
    if (m < 0) {
        throw DomainError("differentiate: order must be nonnegative");
    }
    std::vector<Term> terms(s.terms().begin(), s.terms().end());
    for (int pass = 0; pass < m; ++pass) {
        std::vector<Term> next;
        next.reserve(terms.size());
        for (const Term& t : terms) {
            if (std::fabs(t.exponent) <= s.exponent_tol()) {
                continue;  // constant term vanishes
            }
            next.push_back({t.exponent - 1.0, t.coefficient * t.exponent});
        }
        terms = std::move(next);
    }
    return ExponentSumSeries(ExponentSumSeries::Unchecked{}, std::move(terms), s.max_terms(),
                             s.exponent_tol(), s.truncated());
}

ExponentSumSeries antiderivative(const ExponentSumSeries& s) {
    if (!s.convolvable()) {
        throw DomainError("antiderivative: series must have all exponents > -1");
    }
    std::vector<Term> terms;
    terms.reserve(s.size());
    for (const Term& t : s.terms()) {
        terms.push_back({t.exponent + 1.0, t.coefficient / (t.exponent + 1.0)});
    }
    return ExponentSumSeries(ExponentSumSeries::Unchecked{}, std::move(terms), s.max_terms(),
                             s.exponent_tol(), s.truncated());
}

double laplace(const ExponentSumSeries& s, double p) { return s.laplace(p); }

std::string to_text(const ExponentSumSeries& s) {
    std::string out;
    char line[80];
    for (const Term& t : s.terms()) {
        std::snprintf(line, sizeof line, "%.17g %.17g\n", t.exponent, t.coefficient);
        out += line;
    }
    return out;
}

ExponentSumSeries from_text(std::string_view text, std::size_t max_terms, double exponent_tol) {
    std::vector<Term> terms;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        double e = 0.0, c = 0.0;
        if (!(ls >> e >> c)) {
            throw DomainError("from_text: line " + std::to_string(lineno) +
                              " is not an \"exponent coefficient\" pair");
        }
        terms.push_back({e, c});
    }
    return ExponentSumSeries(std::move(terms), max_terms, exponent_tol);
}

}  // namespace gfc::series
