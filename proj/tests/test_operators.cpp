#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gfc/operators.hpp"
#include "gfc/specfun.hpp"

using namespace gfc;
using expr::FunctionInput;
using kernels::KernelSpec;
using kernels::SoninePair;
using series::ExponentSumSeries;
using series::Term;

namespace {

double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(1e-300, std::fabs(want));
}

SoninePair power_pair(double alpha) {
    return kernels::make_pair({kernels::PowerSpec{alpha}, 60}, 1.0);
}

SoninePair ml_pair() { return kernels::make_pair({kernels::MittagLefflerSpec{0.25, 0.6}, 60}, 1.0); }

SoninePair tempered_pair(double alpha, double rho) {
    return kernels::make_pair({kernels::TemperedSpec{alpha, rho}, 40}, 1.0);
}

FunctionInput fn(const char* text) { return FunctionInput::from_expression(text); }

FunctionInput h_series(double beta) {
    return FunctionInput::from_series(ExponentSumSeries::power_kernel(beta));
}

}  // namespace

TEST_CASE("gfi of the unit function with a power kernel") {
    const auto pair = power_pair(0.5);
    const auto g = ops::gfi(pair, 1, fn("1"), 1.0, 64);
    for (int m = 1; m <= g.M; ++m) {
        const double t = g.t(m);
        CHECK(rel_err(g.values[m - 1], std::pow(t, 0.5) / specfun::gamma(1.5)) <= 1e-13);
    }
}

TEST_CASE("two-fold gfi on the series path follows the convolution-power rule") {
    // kappa = h_{0.4}, n = 2: kappa^2 = h_{0.8} and h_{0.8} * {1} = h_{1.8}.
    const auto pair = power_pair(0.4);
    const auto out = ops::gfi_series(pair, 2, ExponentSumSeries::constant(1.0));
    REQUIRE(out.size() == 1);
    CHECK(out.terms()[0].exponent == doctest::Approx(0.8).epsilon(1e-13));
    CHECK(rel_err(out.terms()[0].coefficient, specfun::reciprocal_gamma(1.8)) <= 1e-13);
}

TEST_CASE("gfi quadrature agrees with the exact series path for a tempered kernel") {
    const auto pair = tempered_pair(0.5, 1.0);
    const auto quad = ops::gfi(pair, 1, fn("1"), 1.0, 512);
    const auto exact = ops::gfi_series(pair, 1, ExponentSumSeries::constant(1.0));
    double worst = 0.0;
    for (int m = 1; m <= quad.M; ++m) {
        worst = std::max(worst, std::fabs(quad.values[m - 1] - exact.evaluate(quad.t(m))));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("caputo derivative kills constants for every catalog pair") {
    const SoninePair pairs[] = {power_pair(0.5), ml_pair(), tempered_pair(0.3, 2.0),
                                kernels::make_pair({kernels::BesselSpec{0.6}, 40}, 1.0)};
    for (const auto& pair : pairs) {
        for (int n = 1; n <= 3; ++n) {
            const auto g = ops::gfd_caputo(pair, n, fn("4"), 1.0, 16);
            for (double v : g.values) CHECK(std::fabs(v) <= 1e-14);
            const auto s =
                ops::gfd_caputo_series(pair, n, ExponentSumSeries::constant(4.0));
            CHECK(s.empty());
        }
    }
}

TEST_CASE("caputo derivative of t with the classical kernel") {
    const auto pair = power_pair(0.5);
    const auto g = ops::gfd_caputo(pair, 1, fn("t"), 1.0, 64);
    for (int m = 1; m <= g.M; ++m) {
        const double t = g.t(m);
        CHECK(rel_err(g.values[m - 1], std::pow(t, 0.5) / specfun::gamma(1.5)) <= 1e-12);
    }
}

TEST_CASE("caputo quadrature matches the series oracle for the ML pair") {
    const auto pair = ml_pair();
    const auto quad = ops::gfd_caputo(pair, 1, fn("t"), 1.0, 512);
    const auto exact = series::antiderivative(pair.k);  // k * 1
    double worst = 0.0;
    for (int m = 1; m <= quad.M; ++m) {
        worst = std::max(worst, std::fabs(quad.values[m - 1] - exact.evaluate(quad.t(m))));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("riemann-liouville derivative of a constant is the kernel itself") {
    const auto pair = power_pair(0.5);
    const auto g = ops::gfd_rl(pair, 1, fn("1"), 1.0, 64);
    for (int m = 1; m <= g.M; ++m) {
        const double t = g.t(m);
        CHECK(rel_err(g.values[m - 1], std::pow(t, -0.5) / specfun::gamma(0.5)) <= 1e-10);
    }
}

TEST_CASE("riemann-liouville equals caputo when f(0) = 0") {
    const auto pair = power_pair(0.5);
    const auto rl = ops::gfd_rl(pair, 1, fn("t"), 1.0, 32);
    const auto ca = ops::gfd_caputo(pair, 1, fn("t"), 1.0, 32);
    for (int m = 0; m < 32; ++m) {
        CHECK(rl.values[m] == ca.values[m]);
    }
}

TEST_CASE("two-fold power-kernel identification: D^2 h_3 = h_{2.2}") {
    // pair alpha = 0.4 so k = h_{0.6}; two-fold RL derivative of h_3 (= t^2/2).
    const auto pair = power_pair(0.4);
    const auto out = ops::gfd_rl_series(pair, 2, ExponentSumSeries::power_kernel(3.0));
    REQUIRE(out.size() == 1);
    CHECK(out.terms()[0].exponent == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(rel_err(out.terms()[0].coefficient, specfun::reciprocal_gamma(2.2)) <= 1e-12);
    // value check against the frozen Gamma(2.2)
    CHECK(rel_err(out.evaluate(0.7), std::pow(0.7, 1.2) / 1.1018024908797127328) <= 1e-12);
}

TEST_CASE("rl minus caputo equals the correction sum at every grid point") {
    const auto pair = tempered_pair(0.4, 1.0);
    const int n = 2, M = 48;
    const auto f = fn("exp(t)");
    const auto rl = ops::gfd_rl(pair, n, f, 1.0, M);
    const auto ca = ops::gfd_caputo(pair, n, f, 1.0, M);
    const auto kn = series::conv_power(pair.k, n);
    for (int m = 1; m <= M; ++m) {
        const double t = rl.t(m);
        double corr = 0.0;
        for (int j = 0; j < n; ++j) {
            corr += expr::value_at_zero(f.ast(), j) *
                    series::differentiate(kn, n - j - 1).evaluate(t);
        }
        CHECK(std::fabs((rl.values[m - 1] - ca.values[m - 1]) - corr) <=
              1e-12 * std::max(1.0, std::fabs(corr)));
    }
}

TEST_CASE("series-input fold preconditions") {
    const auto pair = power_pair(0.5);
    // leading exponent 0.5 with n = 2 is neither > 1 nor an integer below 2
    CHECK_THROWS_AS(ops::gfd_caputo_series(pair, 2, ExponentSumSeries::power_kernel(1.5)),
                    DomainError);
    // integer exponents below n vanish under differentiation and are fine
    CHECK(ops::gfd_caputo_series(pair, 2, ExponentSumSeries::power_kernel(2.0)).empty());
    // exponent 2.5 > n - 1 = 1 works
    CHECK_NOTHROW(ops::gfd_caputo_series(pair, 2, ExponentSumSeries::power_kernel(3.5)));
}

TEST_CASE("singular inputs are rejected on the expression path") {
    const auto pair = power_pair(0.5);
    CHECK_THROWS_AS(ops::gfd_caputo(pair, 1, fn("t^0.5"), 1.0, 16), SingularAtZeroError);
    CHECK_THROWS_AS(ops::gfi(pair, 1, fn("log(t)"), 1.0, 16), DomainError);
}

TEST_CASE("n-fold recurrence: D^n f = d/dt D^{n-1}(k * f) on series inputs") {
    const auto pair = power_pair(0.3);
    const auto f = ExponentSumSeries::power_kernel(3.0);
    for (int n : {2, 3}) {
        const auto lhs = ops::gfd_rl_series(pair, n, f);
        const auto inner = series::convolve(pair.k, f);
        const auto rhs = series::differentiate(ops::gfd_rl_series(pair, n - 1, inner), 1);
        REQUIRE(lhs.size() == rhs.size());
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            CHECK(std::fabs(lhs.terms()[i].exponent - rhs.terms()[i].exponent) <= 1e-12);
            CHECK(rel_err(lhs.terms()[i].coefficient, rhs.terms()[i].coefficient) <= 1e-12);
        }
    }
}

TEST_CASE("verify ft1 on the series path is exact") {
    const auto pair = power_pair(0.5);
    for (int n : {1, 2, 3}) {
        const auto rep =
            ops::verify(ops::Theorem::FT1_RL, pair, n, h_series(2.0), 1.0, 64, 1e-10);
        CHECK(rep.pass);
        CHECK(rep.max_abs_error <= 1e-10);
    }
    // Caputo flavour, and a singular input f = t^{-0.5}-free series choice
    const auto repc = ops::verify(ops::Theorem::FT1_C, pair, 1, h_series(1.5), 1.0, 64, 1e-10);
    CHECK(repc.pass);
}

TEST_CASE("verify ft1 on the quadrature path converges at first order or better") {
    const auto pair = power_pair(0.5);
    const auto rep = ops::verify(ops::Theorem::FT1_RL, pair, 1, fn("t"), 1.0, 256, 5e-3);
    CHECK(rep.pass);
    CHECK(rep.estimated_order >= 1.0);

    const auto rep_exp = ops::verify(ops::Theorem::FT1_RL, pair, 1, fn("exp(t)"), 1.0, 256, 5e-3);
    CHECK(rep_exp.pass);
    CHECK(rep_exp.estimated_order >= 1.0);
}

TEST_CASE("verify ft2-c quadrature reconstructs f minus its Taylor head") {
    const auto pair = power_pair(0.5);
    for (const char* f : {"exp(t)", "t^2", "t*sin(t)"}) {
        for (int n : {1, 2}) {
            const auto rep = ops::verify(ops::Theorem::FT2_C, pair, n, fn(f), 1.0, 256, 5e-3);
            CHECK_MESSAGE(rep.pass, f << " n=" << n << " err=" << rep.max_abs_error);
        }
    }
}

TEST_CASE("verify ft2-c on the series path is exact for t^2 with n = 2") {
    const auto pair = power_pair(0.4);
    const auto f = FunctionInput::from_series(
        ExponentSumSeries({{2.0, 1.0}}));  // f = t^2; f(0) = f'(0) = 0
    const auto rep = ops::verify(ops::Theorem::FT2_C, pair, 2, f, 1.0, 64, 1e-10);
    CHECK(rep.pass);
}

TEST_CASE("verify ft2-rl: n = 1 everywhere, n = 2 only for small-alpha power pairs") {
    const auto rep1 = ops::verify(ops::Theorem::FT2_RL, ml_pair(), 1, fn("exp(t)"), 1.0, 256, 5e-3);
    CHECK(rep1.pass);

    const auto pair04 = power_pair(0.4);
    const auto f = FunctionInput::from_series(ExponentSumSeries({{2.0, 1.0}}));
    const auto rep2 = ops::verify(ops::Theorem::FT2_RL, pair04, 2, f, 1.0, 64, 1e-10);
    CHECK(rep2.pass);

    CHECK_THROWS_AS(ops::verify(ops::Theorem::FT2_RL, ml_pair(), 2, fn("t^2"), 1.0, 64, 1e-3),
                    HypothesisError);
    CHECK_THROWS_AS(ops::verify(ops::Theorem::FT2_RL, power_pair(0.6), 2, fn("t^2"), 1.0, 64, 1e-3),
                    HypothesisError);
}

TEST_CASE("verify sonine delegates to the residual") {
    const auto rep = ops::verify(ops::Theorem::SONINE, ml_pair(), 1, fn("1"), 1.0, 64, 1e-6);
    CHECK(rep.pass);
    CHECK(rep.max_abs_error <= 1e-8);
}

TEST_CASE("verify index and commute laws") {
    const auto pair = power_pair(0.3);
    const auto fs = h_series(2.0);
    CHECK(ops::verify(ops::Theorem::INDEX, pair, 1, fs, 1.0, 64, 1e-12).pass);
    CHECK(ops::verify(ops::Theorem::COMMUTE, pair, 1, fs, 1.0, 64, 1e-12).pass);

    const auto mlp = ml_pair();
    CHECK(ops::verify(ops::Theorem::INDEX, mlp, 1, fn("exp(t)"), 1.0, 128, 1e-4).pass);
    CHECK(ops::verify(ops::Theorem::COMMUTE, mlp, 1, fn("exp(t)"), 1.0, 128, 1e-4).pass);
}

TEST_CASE("threaded quadrature is bit-identical to single-threaded") {
    const auto pair = ml_pair();
    std::vector<double> samples(257);
    for (int j = 0; j <= 256; ++j) {
        samples[j] = std::exp(-j / 256.0);
    }
    const auto a = ops::product_convolve(pair.k, samples, 1.0, 256, 0.0, 1);
    const auto b = ops::product_convolve(pair.k, samples, 1.0, 256, 0.0, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
    }
}

TEST_CASE("grid function serialization carries the header and 17 digits") {
    ops::GridFunction g;
    g.T = 1.0;
    g.M = 2;
    g.values = {0.1234567890123456789, 1.0 / 3.0};
    const std::string text = g.to_text("op=gfi family=power alpha=0.5");
    CHECK(text.find("# op=gfi family=power alpha=0.5\n") == 0);
    CHECK(text.find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("theorem names round-trip") {
    for (auto th : {ops::Theorem::FT1_RL, ops::Theorem::FT1_C, ops::Theorem::FT2_RL,
                    ops::Theorem::FT2_C, ops::Theorem::SONINE, ops::Theorem::INDEX,
                    ops::Theorem::COMMUTE}) {
        CHECK(ops::theorem_from_name(ops::theorem_name(th)) == th);
    }
    CHECK_THROWS_AS(ops::theorem_from_name("nope"), DomainError);
}
