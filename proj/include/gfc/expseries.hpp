#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gfc/errors.hpp"

namespace gfc::series {

struct Term {
    double exponent;
    double coefficient;
};

// Finite exponent sum  sum_i c_i t^{e_i}  with real exponents e_i > -1,
// normalized so that exponents are strictly increasing, no two exponents lie
// within exponent_tol of each other, and no coefficient is zero. The zero
// series is the empty term list. Closed under Laplace convolution via the
// Beta function; this is the exact carrier for all catalog kernels.
//
// Values are immutable after construction; all operations return new series.
class ExponentSumSeries {
public:
    static constexpr std::size_t kDefaultMaxTerms = 256;
    static constexpr double kDefaultExponentTol = 1e-12;

    // Zero series.
    ExponentSumSeries() = default;

    // Normalizes the given terms. Throws DomainError if any exponent <= -1
    // (series built from raw terms must be integrable at zero) and
    // BudgetError if the normalized term count exceeds max_terms.
    explicit ExponentSumSeries(std::vector<Term> terms,
                               std::size_t max_terms = kDefaultMaxTerms,
                               double exponent_tol = kDefaultExponentTol);

    static ExponentSumSeries zero() { return {}; }
    // c * t^0
    static ExponentSumSeries constant(double c);
    // c * t^e
    static ExponentSumSeries monomial(double coefficient, double exponent);
    // h_beta(t) = t^{beta-1} / Gamma(beta), beta > 0
    static ExponentSumSeries power_kernel(double beta);

    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    std::size_t max_terms() const { return max_terms_; }
    double exponent_tol() const { return exponent_tol_; }

    // True when terms were dropped while producing this series (or one of
    // its ancestors in a convolution chain).
    bool truncated() const { return truncated_; }

    // All exponents > -1, i.e. the series is a valid convolution operand.
    bool convolvable() const;

    // Smallest exponent. Throws DomainError on the zero series.
    double leading_exponent() const;

    struct Eval {
        double value;
        // Truncation warning: the series is truncated and its last retained
        // term exceeds 1e-8 of the result magnitude at this t.
        bool tail_dominated;
    };

    // sum c_i t^{e_i} by compensated summation, t > 0.
    Eval evaluate_ex(double t) const;
    double evaluate(double t) const;

    // Term-wise Laplace transform  sum c_i Gamma(e_i + 1) p^{-(e_i+1)}, p > 0.
    double laplace(double p) const;

    // Limit at t -> 0+: 0 if the leading exponent is positive, the leading
    // coefficient if it is zero (within exponent_tol), otherwise the series
    // diverges and SingularAtZeroError is thrown.
    double value_at_zero() const;

private:
    struct Unchecked {};
    ExponentSumSeries(Unchecked, std::vector<Term> terms, std::size_t max_terms,
                      double exponent_tol, bool truncated);

    void normalize();

    std::vector<Term> terms_;
    std::size_t max_terms_ = kDefaultMaxTerms;
    double exponent_tol_ = kDefaultExponentTol;
    bool truncated_ = false;

    friend ExponentSumSeries linear_combine(
        const std::vector<std::pair<double, ExponentSumSeries>>& parts);
    friend ExponentSumSeries convolve(const ExponentSumSeries& a, const ExponentSumSeries& b);
    friend ExponentSumSeries differentiate(const ExponentSumSeries& s, int m);
    friend ExponentSumSeries antiderivative(const ExponentSumSeries& s);
};

// Merged, normalized weighted sum. Throws BudgetError if the merged term
// count exceeds the (largest) budget of the inputs; the sequence must be
// nonempty.
ExponentSumSeries linear_combine(const std::vector<std::pair<double, ExponentSumSeries>>& parts);

// Laplace convolution: (a * b)(t) = int_0^t a(t - tau) b(tau) dtau, by the
// Beta-function term rule. When the product has more terms than the budget,
// the lowest max_terms exponents are kept and the truncation flag is set
// (behaviour near 0 is what characterizes Sonine kernels).
ExponentSumSeries convolve(const ExponentSumSeries& a, const ExponentSumSeries& b);

// n-fold convolution power, n >= 1; n = 1 returns s unchanged.
ExponentSumSeries conv_power(const ExponentSumSeries& s, int n);

// m-fold derivative by the term rule c t^e -> c e t^{e-1}; terms with e = 0
// (within exponent_tol) vanish. Resulting exponents may drop to -1 or below;
// such series can still be evaluated at t > 0 but are no longer convolvable.
ExponentSumSeries differentiate(const ExponentSumSeries& s, int m = 1);

// Antiderivative from 0: c t^e -> c t^{e+1} / (e+1); equals convolve(h_1, s).
ExponentSumSeries antiderivative(const ExponentSumSeries& s);

// Free-function form of the term-wise Laplace transform.
double laplace(const ExponentSumSeries& s, double p);

// Two-column text block, one "exponent coefficient" pair per line, 17
// significant digits (round-trip exact for doubles).
std::string to_text(const ExponentSumSeries& s);
ExponentSumSeries from_text(std::string_view text,
                            std::size_t max_terms = ExponentSumSeries::kDefaultMaxTerms,
                            double exponent_tol = ExponentSumSeries::kDefaultExponentTol);

}  // namespace gfc::series
