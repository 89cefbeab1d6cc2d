#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gfc/expseries.hpp"

namespace gfc::kernels {

// Catalog families. Parameter ranges are those under which each family is a
// Sonine kernel with an integrable power singularity at zero.
struct PowerSpec {
    double alpha;  // 0 < alpha < 1
};
struct TemperedSpec {
    double alpha;  // 0 < alpha < 1
    double rho;    // rho >= 0
};
struct BesselSpec {
    double alpha;  // 0 < alpha < 1
};
struct MittagLefflerSpec {
    double alpha;  // 0 < alpha < beta < 1
    double beta;
};
struct MultiTermSpec {
    std::vector<double> weights;  // nonzero
    std::vector<double> orders;   // each in (0, 1)
};
struct SeriesKernelSpec {
    double alpha;                // 0 < alpha < 1
    std::vector<double> coeffs;  // a_0 != 0; kappa = h_alpha(t) * sum a_m t^m
};

using KernelFamily = std::variant<PowerSpec, TemperedSpec, BesselSpec, MittagLefflerSpec,
                                  MultiTermSpec, SeriesKernelSpec>;

struct KernelSpec {
    KernelFamily family;
    int truncation_order = 60;

    // Throws SpecError when a parameter range is violated.
    void validate() const;
    std::string family_name() const;
};

// A Sonine pair: kernel kappa and associate k with (kappa * k)(t) = 1 on
// (0, domain_T] up to residual_bound.
struct SoninePair {
    series::ExponentSumSeries kappa;
    series::ExponentSumSeries k;
    double residual_bound;
    double domain_T;
};

// Truncated exponent-sum expansion of the kernel (the kappa side of the pair).
series::ExponentSumSeries build_kernel(const KernelSpec& spec);

struct AssociateResult {
    std::vector<double> b;
    // Set when |b_n| > 1e3 |b_{n-1}| for some n (signals that the requested
    // truncation order outruns the coefficient sequence).
    bool growth_warning;
};

// Solves the triangular system
//   a_0 b_0 = 1,   sum_{k=0}^{n} Gamma(k+1-alpha) Gamma(alpha+n-k) a_{n-k} b_k = 0
// by forward substitution, returning b of length N. The associate kernel is
// then h_{1-alpha}(t) * sum b_m t^m. Throws DegenerateError if a_0 = 0.
AssociateResult associate_kernel(double alpha, std::span<const double> a, int N);

// Step-s generalization used for multi-term kernels whose exponents live on
// the lattice mu - 1 + m*s: kappa = h_mu(t) * sum a_m t^{m s}.
AssociateResult associate_kernel_step(double mu, double step, std::span<const double> a, int N);

// Constructs both kernels of the pair for the given family, computes the
// Sonine residual on (0, T] and stores it. MultiTerm kernels require orders
// that share a common rational step (UnsupportedError otherwise).
SoninePair make_pair(const KernelSpec& spec, double T);

// max over a geometric grid of n_points in (0, T] of |(kappa * k)(t) - 1|.
double sonine_residual(const series::ExponentSumSeries& kappa, const series::ExponentSumSeries& k,
                       double T, int n_points);

// max over p_grid of |p * L[kappa](p) * L[k](p) - 1|.
double laplace_product_check(const series::ExponentSumSeries& kappa,
                             const series::ExponentSumSeries& k, std::span<const double> p_grid);

// Same check with a closed-form transform for the k side; needed when the
// term-wise transform of a truncated series diverges on part of the grid
// (the Mittag-Leffler kernel for p < 1).
double laplace_product_check(const series::ExponentSumSeries& kappa,
                             const std::function<double(double)>& k_laplace,
                             std::span<const double> p_grid);

// Flat key-value text serialization (family, alpha, beta, rho, weights,
// orders, coeffs, terms); bit-exact round-trip.
std::string to_kv(const KernelSpec& spec);
KernelSpec from_kv(std::string_view text);

}  // namespace gfc::kernels
