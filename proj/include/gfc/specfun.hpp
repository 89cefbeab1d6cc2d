#pragma once

#include "gfc/errors.hpp"

namespace gfc::specfun {

// Scalar result together with an absolute error estimate (first omitted term
// plus a rounding allowance for the series functions).
struct SpecialValue {
    double value;
    double abs_error_estimate;
};

// Direct-summation domain for the Mittag-Leffler function.
inline constexpr double kMittagLefflerZMax = 50.0;

// Series stopping rule: stop once |term| < kSeriesEps * (|partial sum| + 1),
// give up at kSeriesTermCap terms.
inline constexpr double kSeriesEps = 1e-16;
inline constexpr int kSeriesTermCap = 10000;

// Gamma function by a 15-term Lanczos rational approximation (g = 607/128)
// with reflection for x < 0.5. Relative error <= 1e-12 on [-170, 170] away
// from the poles.
//
// Throws PoleError at nonpositive integers, OverflowError when |Gamma(x)|
// is not representable, DomainError for non-finite x.
double gamma(double x);

// log|Gamma(x)| with the sign of Gamma(x) in *sign (if non-null).
// Defined for all finite x except the poles.
double log_abs_gamma(double x, int* sign = nullptr);

// 1/Gamma(x); exactly 0 at the poles, never throws for finite x.
double reciprocal_gamma(double x);

// Euler Beta function B(x, y) = Gamma(x)Gamma(y)/Gamma(x+y), x, y > 0.
// Switches to log form when the direct Gamma ratio would overflow.
double beta(double x, double y);

// Two-parameter Mittag-Leffler function E_{alpha,beta}(z), summed directly
// with compensated summation. Preconditions: alpha > 0, |z| <= kMittagLefflerZMax.
SpecialValue mittag_leffler_ex(double alpha, double beta, double z);
double mittag_leffler(double alpha, double beta, double z);

enum class BesselKind {
    first,    // J_nu
    modified  // I_nu
};

// Bessel function of the first kind J_nu(x) or modified Bessel function
// I_nu(x) by their ascending series, for nu > -1 and x >= 0. Desk-scale:
// accurate for x <= 30 (the alternating J series loses digits beyond that).
SpecialValue bessel_ex(BesselKind kind, double nu, double x);
double bessel(BesselKind kind, double nu, double x);

}  // namespace gfc::specfun
