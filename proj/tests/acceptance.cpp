// Acceptance suite: one line per criterion, nonzero exit if any fails.
// argv[1] must be the path to the CLI binary (used by criterion 9).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gfc/funcexpr.hpp"
#include "gfc/kernels.hpp"
#include "gfc/operators.hpp"
#include "gfc/specfun.hpp"

using namespace gfc;
using series::ExponentSumSeries;
using series::Term;

namespace {

int g_failures = 0;
std::string g_cli_path;

struct Criterion {
    std::string detail;
    bool ok = true;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (detail.empty()) detail = what;
    }
};

void run_criterion(int id, const char* name, double time_limit_s,
                   const std::function<void(Criterion&)>& body) {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed >= time_limit_s) {
        c.ok = false;
        c.detail += (c.detail.empty() ? "" : "; ") + std::string("over time limit");
    }
    std::printf("[%s] criterion %d: %s (%s%.3f s < %.0f s)\n", c.ok ? "PASS" : "FAIL", id, name,
                c.detail.empty() ? "" : (c.detail + "; ").c_str(), elapsed, time_limit_s);
    if (!c.ok) ++g_failures;
}

double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(1e-300, std::fabs(want));
}

char sci_buf[64];
std::string sci(double v) {
    std::snprintf(sci_buf, sizeof sci_buf, "%.2e", v);
    return sci_buf;
}

// ---- criterion bodies -------------------------------------------------------

void criterion1(Criterion& c) {
    double worst = 0.0;
    for (int i = 1; i <= 9; ++i) {
        const double alpha = 0.1 * i;
        const auto conv = series::convolve(ExponentSumSeries::power_kernel(alpha),
                                           ExponentSumSeries::power_kernel(1.0 - alpha));
        c.require(conv.size() == 1, "convolution is not a single term at alpha=" + sci(alpha));
        if (conv.size() != 1) continue;
        c.require(std::fabs(conv.terms()[0].exponent) <= 1e-12,
                  "exponent is not 0 at alpha=" + sci(alpha));
        worst = std::max(worst, std::fabs(conv.terms()[0].coefficient - 1.0));
    }
    c.require(worst <= 1e-14, "coefficient error " + sci(worst) + " > 1e-14");
    c.note("max coeff err " + sci(worst));
}

void criterion2(Criterion& c) {
    const auto hand = kernels::associate_kernel(0.5, std::vector<double>{1.0, 1.0}, 2);
    c.require(std::fabs(hand.b[0] - 1.0) <= 1e-12 && std::fabs(hand.b[1] + 1.0) <= 1e-12,
              "hand case b != (1,-1)");

    std::mt19937 rng(20250810);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> lead(0.5, 1.5);
    std::uniform_real_distribution<double> alpha_d(0.15, 0.85);
    double worst_const = 0.0, worst_tail = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double alpha = alpha_d(rng);
        std::vector<double> a(12);
        a[0] = (trial % 2 ? -1.0 : 1.0) * lead(rng);
        for (std::size_t i = 1; i < a.size(); ++i) a[i] = coef(rng);
        const auto res = kernels::associate_kernel(alpha, a, 12);

        std::vector<Term> kt, at;
        for (std::size_t m = 0; m < a.size(); ++m) {
            kt.push_back({alpha - 1.0 + m, a[m] * specfun::reciprocal_gamma(alpha)});
        }
        for (std::size_t m = 0; m < res.b.size(); ++m) {
            at.push_back({-alpha + m, res.b[m] * specfun::reciprocal_gamma(1.0 - alpha)});
        }
        const auto conv = series::convolve(ExponentSumSeries(kt), ExponentSumSeries(at));
        for (const Term& t : conv.terms()) {
            if (std::fabs(t.exponent) <= 1e-9) {
                worst_const = std::max(worst_const, std::fabs(t.coefficient - 1.0));
            } else if (t.exponent < 10.5) {
                worst_tail = std::max(worst_tail, std::fabs(t.coefficient));
            }
        }
    }
    c.require(worst_const <= 1e-10, "constant term off by " + sci(worst_const));
    c.require(worst_tail <= 1e-10, "tail coefficient " + sci(worst_tail));
    c.note("const err " + sci(worst_const) + ", tail " + sci(worst_tail));
}

void criterion3(Criterion& c) {
    double worst = 0.0;
    for (double alpha : {0.25, 0.5, 0.75}) {
        worst = std::max(
            worst, kernels::make_pair({kernels::BesselSpec{alpha}, 60}, 1.0).residual_bound);
        for (double rho : {0.0, 1.0, 2.0}) {
            worst = std::max(
                worst,
                kernels::make_pair({kernels::TemperedSpec{alpha, rho}, 60}, 1.0).residual_bound);
        }
    }
    worst = std::max(
        worst, kernels::make_pair({kernels::MittagLefflerSpec{0.25, 0.6}, 60}, 1.0).residual_bound);
    c.require(worst <= 1e-6, "residual " + sci(worst) + " > 1e-6");
    c.note("max residual " + sci(worst));
}

void criterion4(Criterion& c) {
    const std::vector<double> grid = {0.5, 1.0, 2.0, 5.0};
    double worst = 0.0;
    for (double alpha : {0.2, 0.5, 0.8}) {
        const auto pw = kernels::make_pair({kernels::PowerSpec{alpha}, 60}, 1.0);
        worst = std::max(worst, kernels::laplace_product_check(pw.kappa, pw.k, grid));
    }
    const auto mlp = kernels::make_pair({kernels::MittagLefflerSpec{0.25, 0.6}, 60}, 1.0);
    auto k_hat = [](double p) { return std::pow(p, 0.25 - 0.6) / (std::pow(p, 0.25) + 1.0); };
    worst = std::max(worst, kernels::laplace_product_check(mlp.kappa, k_hat, grid));
    c.require(worst <= 1e-8, "deviation " + sci(worst) + " > 1e-8");
    c.note("max deviation " + sci(worst));
}

void criterion5(Criterion& c) {
    const auto pair = kernels::make_pair({kernels::PowerSpec{0.5}, 60}, 1.0);
    const auto quad = ops::verify(ops::Theorem::FT1_RL, pair, 1,
                                  expr::FunctionInput::from_expression("t"), 1.0, 512, 5e-3);
    c.require(quad.max_abs_error <= 5e-3,
              "quadrature error " + sci(quad.max_abs_error) + " > 5e-3");
    c.require(quad.estimated_order >= 1.0,
              "estimated order " + std::to_string(quad.estimated_order) + " < 1.0");

    const auto f = expr::FunctionInput::from_series(ExponentSumSeries::power_kernel(2.0));
    double worst = 0.0;
    for (int n : {1, 2, 3}) {
        const auto rep = ops::verify(ops::Theorem::FT1_RL, pair, n, f, 1.0, 256, 1e-10);
        worst = std::max(worst, rep.max_abs_error);
    }
    c.require(worst <= 1e-10, "series-path error " + sci(worst) + " > 1e-10");
    c.note("quad err " + sci(quad.max_abs_error) + ", order " +
           (std::isinf(quad.estimated_order) ? "inf"
                                             : std::to_string(quad.estimated_order).substr(0, 5)) +
           ", series err " + sci(worst));
}

void criterion6(Criterion& c) {
    const auto pair05 = kernels::make_pair({kernels::PowerSpec{0.5}, 60}, 1.0);
    double worst_quad = 0.0;
    for (const char* f : {"exp(t)", "t^2", "t*sin(t)"}) {
        for (int n : {1, 2}) {
            const auto rep = ops::verify(ops::Theorem::FT2_C, pair05, n,
                                         expr::FunctionInput::from_expression(f), 1.0, 512, 5e-3);
            worst_quad = std::max(worst_quad, rep.max_abs_error);
        }
    }
    c.require(worst_quad <= 5e-3, "quadrature error " + sci(worst_quad) + " > 5e-3");

    const auto t2 = expr::FunctionInput::from_series(ExponentSumSeries({{2.0, 1.0}}));
    double worst_series = 0.0;
    for (int n : {1, 2}) {
        const auto rep = ops::verify(ops::Theorem::FT2_C, pair05, n, t2, 1.0, 256, 1e-10);
        worst_series = std::max(worst_series, rep.max_abs_error);
    }
    const auto pair04 = kernels::make_pair({kernels::PowerSpec{0.4}, 60}, 1.0);
    const auto rl = ops::verify(ops::Theorem::FT2_RL, pair04, 2, t2, 1.0, 256, 1e-10);
    worst_series = std::max(worst_series, rl.max_abs_error);
    c.require(worst_series <= 1e-10, "series error " + sci(worst_series) + " > 1e-10");
    c.note("quad err " + sci(worst_quad) + ", series err " + sci(worst_series));
}

void criterion7(Criterion& c) {
    const auto sq = series::conv_power(ExponentSumSeries::power_kernel(0.4), 2);
    c.require(sq.size() == 1 && std::fabs(sq.terms()[0].exponent + 0.2) <= 1e-12 &&
                  rel_err(sq.terms()[0].coefficient, specfun::reciprocal_gamma(0.8)) <= 1e-14,
              "conv_power(h_0.4, 2) != h_0.8");

    const auto pair = kernels::make_pair({kernels::PowerSpec{0.4}, 60}, 1.0);  // k = h_0.6
    const auto d2 = ops::gfd_rl_series(pair, 2, ExponentSumSeries::power_kernel(3.0));
    c.require(d2.size() == 1 && std::fabs(d2.terms()[0].exponent - 1.2) <= 1e-12 &&
                  rel_err(d2.terms()[0].coefficient, specfun::reciprocal_gamma(2.2)) <= 1e-13,
              "D^2_(h_0.6) h_3 != h_2.2");
}

expr::ExprPtr random_ast(std::mt19937& rng, int depth) {
    std::uniform_real_distribution<double> cd(0.3, 2.0);
    std::uniform_int_distribution<int> pick(0, depth <= 1 ? 1 : 7);
    switch (pick(rng)) {
        case 0:
            return expr::parse_expr(std::to_string(cd(rng)));
        case 1:
            return expr::parse_expr("t");
        default:
            break;
    }
    std::uniform_int_distribution<int> op(0, 5);
    const std::string sa = expr::to_string(random_ast(rng, depth - 1));
    const std::string sb = expr::to_string(random_ast(rng, depth - 1));
    switch (op(rng)) {
        case 0:
            return expr::parse_expr("(" + sa + ")+(" + sb + ")");
        case 1:
            return expr::parse_expr("(" + sa + ")-(" + sb + ")");
        case 2:
            return expr::parse_expr("(" + sa + ")*(" + sb + ")");
        case 3:
            return expr::parse_expr("sin(" + sa + ")");
        case 4:
            return expr::parse_expr("cos(" + sa + ")");
        default:
            return expr::parse_expr("exp(0.3*(" + sa + "))");
    }
}

void criterion8(Criterion& c) {
    double worst_ml = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double z = -5.0 + 0.1 * i;
        worst_ml = std::max(worst_ml, rel_err(specfun::mittag_leffler(1.0, 1.0, z), std::exp(z)));
    }
    c.require(worst_ml <= 1e-10, "E_{1,1} vs exp " + sci(worst_ml));

    double worst_cosh = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double z = 0.05 * i;
        worst_cosh = std::max(
            worst_cosh, rel_err(specfun::mittag_leffler(2.0, 1.0, z * z), std::cosh(z)));
    }
    c.require(worst_cosh <= 1e-10, "E_{2,1}(z^2) vs cosh " + sci(worst_cosh));

    std::mt19937 rng(424242);
    double worst_fd = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto f = random_ast(rng, 4);
        const auto df = expr::diff_expr(f, 1);
        for (int i = 1; i <= 10; ++i) {
            const double t = 0.2 + 0.18 * i;
            const double sym = expr::eval_expr(df, t);
            const double fd =
                (expr::eval_expr(f, t + 1e-5) - expr::eval_expr(f, t - 1e-5)) / 2e-5;
            if (!std::isfinite(sym) || !std::isfinite(fd)) continue;
            worst_fd = std::max(worst_fd, std::fabs(sym - fd) / std::max(1.0, std::fabs(sym)));
        }
    }
    c.require(worst_fd <= 1e-6, "symbolic vs FD " + sci(worst_fd));
    c.note("ml " + sci(worst_ml) + ", cosh " + sci(worst_cosh) + ", fd " + sci(worst_fd));
}

struct CliResult {
    int status;
    std::string output;
};

CliResult run_cli_command(const std::string& args) {
    const std::string cmd = g_cli_path + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string output;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
        output.append(buf, n);
    }
    const int rc = pclose(pipe);
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, output};
}

void criterion9(Criterion& c) {
    if (g_cli_path.empty()) {
        c.require(false, "CLI path not supplied (argv[1])");
        return;
    }
    // The documented example commands from the README.
    const char* commands[] = {
        "kernels-list",
        "kernels-pair --family power --alpha 0.5",
        "kernels-pair --family ml --alpha 0.25 --beta 0.6 --format json",
        "kernels-associate --alpha 0.5 --coeffs 1,1 --terms 2",
        "apply --op gfd-c --family power --alpha 0.5 --fold 1 --fn \"1\"",
        "apply --op gfi --family tempered --alpha 0.5 --rho 1 --fn \"t\" --steps 64 --format json",
        "verify --theorem ft2-c --family power --alpha 0.5 --fn \"exp(t)\" --t-max 1 --steps 512 "
        "--tol 5e-3",
        "verify --theorem sonine --family bessel --alpha 0.7 --fn \"1\" --tol 1e-6",
        "laplace-check --family ml --alpha 0.25 --beta 0.6",
    };
    for (const char* cmd : commands) {
        const auto a = run_cli_command(cmd);
        const auto b = run_cli_command(cmd);
        c.require(a.status == 0, std::string("exit ") + std::to_string(a.status) + " for: " + cmd);
        c.require(a.status == b.status && a.output == b.output,
                  std::string("nondeterministic output for: ") + cmd);
    }
    const auto fail = run_cli_command(
        "verify --theorem ft1-rl --family power --alpha 0.5 --fn \"t\" --steps 64 --tol 0");
    c.require(fail.status == 1, "forced failure exited " + std::to_string(fail.status) + " != 1");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli_path = argv[1];

    run_criterion(1, "power-pair Sonine identity is the exact unit", 1.0, criterion1);
    run_criterion(2, "associate solver: hand case and 20 random sequences", 1.0, criterion2);
    run_criterion(3, "catalog pairs reach residual 1e-6 at order 60", 5.0, criterion3);
    run_criterion(4, "Laplace-domain identity for power and ML pairs", 1.0, criterion4);
    run_criterion(5, "first fundamental theorem (quadrature + series)", 10.0, criterion5);
    run_criterion(6, "second fundamental theorem (Caputo + RL)", 10.0, criterion6);
    run_criterion(7, "n-fold convolution-power identification", 1.0, criterion7);
    run_criterion(8, "special functions and symbolic derivatives", 5.0, criterion8);
    run_criterion(9, "CLI determinism and exit-status contract", 5.0, criterion9);

    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
