#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gfc/expseries.hpp"
#include "gfc/funcexpr.hpp"
#include "gfc/kernels.hpp"

namespace gfc::ops {

// Samples of a function on the uniform grid t_m = m T / M, m = 1..M. Nothing
// is ever evaluated at t = 0 (the kernels are singular there); values[m-1]
// holds the sample at t_m.
struct GridFunction {
    double T = 1.0;
    int M = 2;
    std::vector<double> values;
    // Leading power behaviour near 0 (exponent p in values ~ c t^p); 0 means
    // bounded with a nonzero limit. Drives the singular-cell handling when
    // this grid is fed back into a product quadrature.
    double singular_exponent_hint = 0.0;

    double t(int m) const { return T * m / M; }

    // Two-column CSV rows "t,value" (17 significant digits) preceded by a
    // '#'-prefixed header line naming the operator and parameters.
    std::string to_text(std::string_view header) const;
};

// ---- exact series paths ----------------------------------------------------
// These are the oracle routes: all convolution algebra stays in closed form.

series::ExponentSumSeries gfi_series(const kernels::SoninePair& pair, int n,
                                     const series::ExponentSumSeries& f);
series::ExponentSumSeries gfd_caputo_series(const kernels::SoninePair& pair, int n,
                                            const series::ExponentSumSeries& f);
series::ExponentSumSeries gfd_rl_series(const kernels::SoninePair& pair, int n,
                                        const series::ExponentSumSeries& f);

// ---- grid operators ---------------------------------------------------------

// n-fold general fractional integral (kappa^n * f). Series inputs use the
// exact path; expression inputs use product-trapezoidal quadrature whose
// kernel moments are computed in closed form from the exponent sums.
GridFunction gfi(const kernels::SoninePair& pair, int n, const expr::FunctionInput& f, double T,
                 int M, int threads = 1);

// n-fold Caputo-type derivative (k^n * f^{(n)}).
GridFunction gfd_caputo(const kernels::SoninePair& pair, int n, const expr::FunctionInput& f,
                        double T, int M, int threads = 1);

// n-fold Riemann-Liouville-type derivative: the Caputo value plus the
// correction sum_{j<n} f^{(j)}(0) d^{n-j-1}/dt^{n-j-1} k^n(t).
GridFunction gfd_rl(const kernels::SoninePair& pair, int n, const expr::FunctionInput& f, double T,
                    int M, int threads = 1);

// Product quadrature of (K * g)(t_m) for grid samples g_0..g_M (g_0 at t=0).
// When hint > 0 the leading power model g_1 (tau/t_1)^hint is convolved in
// closed form and only the remainder is treated piecewise-linearly.
std::vector<double> product_convolve(const series::ExponentSumSeries& K,
                                     std::span<const double> samples, double T, int M,
                                     double hint = 0.0, int threads = 1);

// ---- verification harness ---------------------------------------------------

enum class Theorem { FT1_RL, FT1_C, FT2_RL, FT2_C, SONINE, INDEX, COMMUTE };

std::string theorem_name(Theorem th);
Theorem theorem_from_name(std::string_view name);  // DomainError on unknown names

struct VerificationReport {
    Theorem theorem;
    std::string parameters;
    double T;
    int M;
    double max_abs_error;
    // log2(err(M) / err(2M)); +inf when err(2M) is at rounding level (the
    // check converged exactly and the ratio would only measure noise).
    double estimated_order;
    double tolerance;
    bool pass;  // max_abs_error <= tolerance
};

// Computes both sides of the requested identity on the grid (and once more at
// 2M for the convergence estimate). Throws HypothesisError when the theorem's
// hypotheses are violated (FT2 needs finite f^{(j)}(0); FT2_RL with n > 1 is
// restricted to power pairs with alpha < 1/n).
VerificationReport verify(Theorem th, const kernels::SoninePair& pair, int n,
                          const expr::FunctionInput& f, double T, int M, double tolerance,
                          int threads = 1);

}  // namespace gfc::ops
