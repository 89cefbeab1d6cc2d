#include "gfc/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <thread>

#include "gfc/specfun.hpp"

namespace gfc::ops {

using expr::FunctionInput;
using kernels::SoninePair;
using series::ExponentSumSeries;
using series::Term;

namespace {

constexpr double kOrderNoiseFloor = 1e-12;

void require_grid(double T, int M) {
    if (!(T > 0.0)) throw DomainError("grid: T must be positive");
    if (M < 2) throw DomainError("grid: M must be at least 2");
}

void require_fold(int n) {
    if (n < 1) throw DomainError("fold n must be >= 1");
}

// Leading power of an expression near 0, from probes at 1e-6 and 1e-7.
// Used only to seed singular_exponent_hint; errors degrade to hint 0.
double probe_power(const expr::ExprPtr& ast) {
    try {
        const double fa = expr::eval_expr(ast, 1e-6);
        const double fb = expr::eval_expr(ast, 1e-7);
        if (!std::isfinite(fa) || !std::isfinite(fb)) return 0.0;
        if (std::fabs(fa) < 1e-300 || std::fabs(fb) < 1e-300) return 0.0;
        const double p = std::log(std::fabs(fa) / std::fabs(fb)) / std::log(10.0);
        if (!std::isfinite(p)) return 0.0;
        return std::clamp(p, 0.0, 16.0);
    } catch (const Error&) {
        return 0.0;
    }
}

// f^{(j)}(0) for either input variant; SingularAtZeroError when it does not
// exist (or cannot be stabilised numerically).
double derivative_at_zero(const FunctionInput& f, int j) {
    if (f.is_series()) {
        return series::differentiate(f.series_value(), j).value_at_zero();
    }
    return expr::value_at_zero(f.ast(), j);
}

// Series-input precondition for the n-fold derivative: every term exponent
// must either exceed n-1 (so f^{(n)} keeps all exponents > -1) or be a
// nonnegative integer below n (such terms vanish under differentiation).
void check_series_fold(const ExponentSumSeries& s, int n) {
    const double tol = s.exponent_tol();
    for (const Term& t : s.terms()) {
        const double e = t.exponent;
        if (e > n - 1.0 + tol) continue;
        const double r = std::round(e);
        if (std::fabs(e - r) <= tol && r >= 0.0 && r <= n - 1.0) continue;
        throw DomainError(
            "gfd: series input has insufficient leading exponent for fold n (term t^" +
            std::to_string(e) + ")");
    }
}

std::vector<double> sample_expression(const expr::ExprPtr& ast, double T, int M) {
    std::vector<double> out(static_cast<std::size_t>(M) + 1);
    for (int j = 0; j <= M; ++j) {
        out[static_cast<std::size_t>(j)] = expr::eval_expr(ast, T * j / M);
    }
    return out;
}

GridFunction grid_from_series(const ExponentSumSeries& s, double T, int M) {
    GridFunction g;
    g.T = T;
    g.M = M;
    g.values.resize(static_cast<std::size_t>(M));
    for (int m = 1; m <= M; ++m) {
        g.values[static_cast<std::size_t>(m - 1)] = s.empty() ? 0.0 : s.evaluate(T * m / M);
    }
    g.singular_exponent_hint = s.empty() ? 0.0 : s.leading_exponent();
    return g;
}

void parallel_for(int begin, int end, int threads, const std::function<void(int)>& body) {
    const int span = end - begin;
    if (threads <= 1 || span < 64) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    const int nthreads = std::min(threads, span);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int w = 0; w < nthreads; ++w) {
        const int lo = begin + static_cast<int>(static_cast<long long>(span) * w / nthreads);
        const int hi = begin + static_cast<int>(static_cast<long long>(span) * (w + 1) / nthreads);
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

std::string GridFunction::to_text(std::string_view header) const {
    std::string out = "# ";
    out += header;
    out += '\n';
    char line[80];
    for (int m = 1; m <= M; ++m) {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", t(m), values[static_cast<std::size_t>(m - 1)]);
        out += line;
    }
    return out;
}

std::vector<double> product_convolve(const ExponentSumSeries& K, std::span<const double> samples,
                                     double T, int M, double hint, int threads) {
    require_grid(T, M);
    if (samples.size() != static_cast<std::size_t>(M) + 1) {
        throw DomainError("product_convolve: need M + 1 samples including t = 0");
    }
    if (!K.convolvable()) {
        throw DomainError("product_convolve: kernel must have all exponents > -1");
    }
    const double h = T / M;
    std::vector<double> out(static_cast<std::size_t>(M), 0.0);
    if (K.empty()) return out;

    // Leading-power model: convolved in closed form, leaving a remainder that
    // vanishes at tau = 0 and tau = t_1 and is benign under linear interpolation.
    std::vector<double> rem(samples.begin(), samples.end());
    ExponentSumSeries exact_part;
    if (hint > 1e-12 && samples[1] != 0.0) {
        const double coef = samples[1] / std::pow(h, hint);
        exact_part = series::convolve(K, ExponentSumSeries::monomial(coef, hint));
        for (int j = 0; j <= M; ++j) {
            rem[static_cast<std::size_t>(j)] -= coef * std::pow(j * h, hint);
        }
    }

    // Closed-form cell moments of the kernel: mu0[j] = int_{s_j}^{s_{j+1}} K,
    // nu[j] = int (s - s_j) K; s_j = j h. These are m-independent.
    std::vector<double> mu0(static_cast<std::size_t>(M), 0.0);
    std::vector<double> nu(static_cast<std::size_t>(M), 0.0);
    {
        std::vector<double> P(static_cast<std::size_t>(M) + 1), Q(static_cast<std::size_t>(M) + 1);
        for (const Term& term : K.terms()) {
            const double e = term.exponent;
            for (int j = 0; j <= M; ++j) {
                const double s = j * h;
                P[static_cast<std::size_t>(j)] = std::pow(s, e + 1.0);
                Q[static_cast<std::size_t>(j)] = std::pow(s, e + 2.0);
            }
            for (int j = 0; j < M; ++j) {
                const double dP = (P[static_cast<std::size_t>(j) + 1] - P[static_cast<std::size_t>(j)]) / (e + 1.0);
                const double dQ = (Q[static_cast<std::size_t>(j) + 1] - Q[static_cast<std::size_t>(j)]) / (e + 2.0);
                mu0[static_cast<std::size_t>(j)] += term.coefficient * dP;
                nu[static_cast<std::size_t>(j)] += term.coefficient * (dQ - j * h * dP);
            }
        }
    }

    parallel_for(1, M + 1, threads, [&](int m) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            const double fa = rem[static_cast<std::size_t>(m - j)];
            const double fb = rem[static_cast<std::size_t>(m - j - 1)];
            acc += fa * mu0[static_cast<std::size_t>(j)] + (fb - fa) * nu[static_cast<std::size_t>(j)] / h;
        }
        out[static_cast<std::size_t>(m - 1)] = acc;
    });

    if (!exact_part.empty()) {
        parallel_for(1, M + 1, threads, [&](int m) {
            out[static_cast<std::size_t>(m - 1)] += exact_part.evaluate(T * m / M);
        });
    }
    return out;
}

// ---- exact series paths ----------------------------------------------------

series::ExponentSumSeries gfi_series(const SoninePair& pair, int n, const ExponentSumSeries& f) {
    require_fold(n);
    return series::convolve(series::conv_power(pair.kappa, n), f);
}

series::ExponentSumSeries gfd_caputo_series(const SoninePair& pair, int n,
                                            const ExponentSumSeries& f) {
    require_fold(n);
    check_series_fold(f, n);
    const ExponentSumSeries fn = series::differentiate(f, n);
    return series::convolve(series::conv_power(pair.k, n), fn);
}

series::ExponentSumSeries gfd_rl_series(const SoninePair& pair, int n, const ExponentSumSeries& f) {
    require_fold(n);
    const ExponentSumSeries caputo = gfd_caputo_series(pair, n, f);
    const ExponentSumSeries kn = series::conv_power(pair.k, n);
    std::vector<std::pair<double, ExponentSumSeries>> parts{{1.0, caputo}};
    for (int j = 0; j < n; ++j) {
        const double fj0 = series::differentiate(f, j).value_at_zero();
        if (fj0 == 0.0) continue;
        parts.emplace_back(fj0, series::differentiate(kn, n - j - 1));
    }
    return series::linear_combine(parts);
}

// ---- grid operators ---------------------------------------------------------

GridFunction gfi(const SoninePair& pair, int n, const FunctionInput& f, double T, int M,
                 int threads) {
    require_grid(T, M);
    require_fold(n);
    if (f.is_series()) {
        return grid_from_series(gfi_series(pair, n, f.series_value()), T, M);
    }
    const ExponentSumSeries kn = series::conv_power(pair.kappa, n);
    const std::vector<double> samples = sample_expression(f.ast(), T, M);
    GridFunction g;
    g.T = T;
    g.M = M;
    g.values = product_convolve(kn, samples, T, M, 0.0, threads);
    g.singular_exponent_hint = kn.leading_exponent() + 1.0 + probe_power(f.ast());
    return g;
}

GridFunction gfd_caputo(const SoninePair& pair, int n, const FunctionInput& f, double T, int M,
                        int threads) {
    require_grid(T, M);
    require_fold(n);
    if (f.is_series()) {
        return grid_from_series(gfd_caputo_series(pair, n, f.series_value()), T, M);
    }
    // Theorem hypothesis: f^{(j)}(0) finite for j < n.
    for (int j = 0; j < n; ++j) {
        (void)expr::value_at_zero(f.ast(), j);
    }
    const expr::ExprPtr fn = f.derivative(n);
    const ExponentSumSeries kn = series::conv_power(pair.k, n);
    const std::vector<double> samples = sample_expression(fn, T, M);
    GridFunction g;
    g.T = T;
    g.M = M;
    g.values = product_convolve(kn, samples, T, M, 0.0, threads);
    g.singular_exponent_hint = kn.leading_exponent() + 1.0 + probe_power(fn);
    return g;
}

GridFunction gfd_rl(const SoninePair& pair, int n, const FunctionInput& f, double T, int M,
                    int threads) {
    require_grid(T, M);
    require_fold(n);
    if (f.is_series()) {
        return grid_from_series(gfd_rl_series(pair, n, f.series_value()), T, M);
    }
    GridFunction g = gfd_caputo(pair, n, f, T, M, threads);
    const ExponentSumSeries kn = series::conv_power(pair.k, n);
    for (int j = 0; j < n; ++j) {
        const double fj0 = expr::value_at_zero(f.ast(), j);
        if (fj0 == 0.0) continue;
        const ExponentSumSeries dkn = series::differentiate(kn, n - j - 1);
        if (!dkn.empty() && dkn.leading_exponent() < g.singular_exponent_hint) {
            g.singular_exponent_hint = dkn.leading_exponent();
        }
        for (int m = 1; m <= M; ++m) {
            g.values[static_cast<std::size_t>(m - 1)] += fj0 * dkn.evaluate(g.t(m));
        }
    }
    return g;
}

// ---- verification harness ---------------------------------------------------

std::string theorem_name(Theorem th) {
    switch (th) {
        case Theorem::FT1_RL: return "ft1-rl";
        case Theorem::FT1_C: return "ft1-c";
        case Theorem::FT2_RL: return "ft2-rl";
        case Theorem::FT2_C: return "ft2-c";
        case Theorem::SONINE: return "sonine";
        case Theorem::INDEX: return "index";
        case Theorem::COMMUTE: return "commute";
    }
    return "?";
}

Theorem theorem_from_name(std::string_view name) {
    if (name == "ft1-rl") return Theorem::FT1_RL;
    if (name == "ft1-c") return Theorem::FT1_C;
    if (name == "ft2-rl") return Theorem::FT2_RL;
    if (name == "ft2-c") return Theorem::FT2_C;
    if (name == "sonine") return Theorem::SONINE;
    if (name == "index") return Theorem::INDEX;
    if (name == "commute") return Theorem::COMMUTE;
    throw DomainError("unknown theorem \"" + std::string(name) +
                      "\" (expected ft1-rl, ft1-c, ft2-rl, ft2-c, sonine, index, commute)");
}

namespace {

// One second-order discrete derivative pass on samples at 0..M.
std::vector<double> discrete_ddt(const std::vector<double>& c, double h) {
    const std::size_t M = c.size() - 1;
    std::vector<double> d(c.size());
    for (std::size_t m = 1; m < M; ++m) {
        d[m] = (c[m + 1] - c[m - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * h);
    d[M] = (3.0 * c[M] - 4.0 * c[M - 1] + c[M - 2]) / (2.0 * h);
    return d;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::fabs(a[i] - b[i]));
    }
    return worst;
}

std::vector<double> eval_series_on_grid(const ExponentSumSeries& s, double T, int M) {
    std::vector<double> out(static_cast<std::size_t>(M));
    for (int m = 1; m <= M; ++m) {
        out[static_cast<std::size_t>(m - 1)] = s.empty() ? 0.0 : s.evaluate(T * m / M);
    }
    return out;
}

bool is_power_pair(const SoninePair& pair) {
    return pair.kappa.size() == 1 && pair.k.size() == 1;
}

double evaluate_function(const FunctionInput& f, double t) { return f.eval(t); }

// max |lhs - rhs| for one theorem at one grid size.
double run_theorem(Theorem th, const SoninePair& pair, int n, const FunctionInput& f, double T,
                   int M, int threads) {
    switch (th) {
        case Theorem::SONINE:
            return kernels::sonine_residual(pair.kappa, pair.k, T, M);

        case Theorem::FT1_RL:
        case Theorem::FT1_C: {
            if (f.is_series()) {
                const ExponentSumSeries g = gfi_series(pair, n, f.series_value());
                ExponentSumSeries lhs;
                try {
                    lhs = (th == Theorem::FT1_RL) ? gfd_rl_series(pair, n, g)
                                                  : gfd_caputo_series(pair, n, g);
                } catch (const SingularAtZeroError& e) {
                    throw HypothesisError(std::string("ft1: ") + e.what());
                }
                return max_abs_diff(eval_series_on_grid(lhs, T, M),
                                    eval_series_on_grid(f.series_value(), T, M));
            }
            const GridFunction g = gfi(pair, n, f, T, M, threads);
            std::vector<double> gs(static_cast<std::size_t>(M) + 1, 0.0);
            std::copy(g.values.begin(), g.values.end(), gs.begin() + 1);
            const ExponentSumSeries kn = series::conv_power(pair.k, n);
            std::vector<double> c(static_cast<std::size_t>(M) + 1, 0.0);
            {
                const auto conv = product_convolve(kn, gs, T, M, g.singular_exponent_hint, threads);
                std::copy(conv.begin(), conv.end(), c.begin() + 1);
            }
            const double h = T / M;
            std::vector<double> d = c;
            for (int pass = 0; pass < n; ++pass) {
                d = discrete_ddt(d, h);
            }
            if (th == Theorem::FT1_C) {
                // Subtract sum_{j<n} g^{(j)}(0) (k^n)^{(n-j-1)}; the discrete
                // derivative estimates of g at 0 supply g^{(j)}(0).
                std::vector<double> gpass = gs;
                for (int j = 0; j < n; ++j) {
                    const double gj0 = (j == 0) ? gs[0] : (gpass = discrete_ddt(gpass, h), gpass[0]);
                    if (gj0 == 0.0) continue;
                    const ExponentSumSeries dkn = series::differentiate(kn, n - j - 1);
                    for (int m = 1; m <= M; ++m) {
                        d[static_cast<std::size_t>(m)] -= gj0 * dkn.evaluate(T * m / M);
                    }
                }
            }
            double worst = 0.0;
            for (int m = 1; m <= M; ++m) {
                worst = std::max(worst,
                                 std::fabs(d[static_cast<std::size_t>(m)] - evaluate_function(f, T * m / M)));
            }
            return worst;
        }

        case Theorem::FT2_C: {
            std::vector<double> fj0(static_cast<std::size_t>(n));
            try {
                for (int j = 0; j < n; ++j) fj0[static_cast<std::size_t>(j)] = derivative_at_zero(f, j);
            } catch (const SingularAtZeroError& e) {
                throw HypothesisError(std::string("ft2-c requires finite f^(j)(0): ") + e.what());
            }
            if (f.is_series()) {
                const ExponentSumSeries d = gfd_caputo_series(pair, n, f.series_value());
                const ExponentSumSeries lhs =
                    series::convolve(series::conv_power(pair.kappa, n), d);
                std::vector<std::pair<double, ExponentSumSeries>> parts{{1.0, f.series_value()}};
                for (int j = 0; j < n; ++j) {
                    if (fj0[static_cast<std::size_t>(j)] == 0.0) continue;
                    parts.emplace_back(-fj0[static_cast<std::size_t>(j)],
                                       ExponentSumSeries::power_kernel(j + 1.0));
                }
                const ExponentSumSeries rhs = series::linear_combine(parts);
                return max_abs_diff(eval_series_on_grid(lhs, T, M), eval_series_on_grid(rhs, T, M));
            }
            const GridFunction d = gfd_caputo(pair, n, f, T, M, threads);
            std::vector<double> ds(static_cast<std::size_t>(M) + 1, 0.0);
            std::copy(d.values.begin(), d.values.end(), ds.begin() + 1);
            const ExponentSumSeries kapn = series::conv_power(pair.kappa, n);
            const auto lhs = product_convolve(kapn, ds, T, M, d.singular_exponent_hint, threads);
            double worst = 0.0;
            for (int m = 1; m <= M; ++m) {
                const double t = T * m / M;
                double rhs = evaluate_function(f, t);
                double tj = 1.0;  // t^j / j!
                for (int j = 0; j < n; ++j) {
                    rhs -= fj0[static_cast<std::size_t>(j)] * tj;
                    tj *= t / (j + 1.0);
                }
                worst = std::max(worst, std::fabs(lhs[static_cast<std::size_t>(m - 1)] - rhs));
            }
            return worst;
        }

        case Theorem::FT2_RL: {
            if (n > 1) {
                // Sufficient commutation condition from the power-kernel case:
                // single-term kernels with alpha < 1/n.
                if (!is_power_pair(pair)) {
                    throw HypothesisError(
                        "ft2-rl with fold n > 1 is restricted to the power family "
                        "(commutation condition)");
                }
                const double alpha = pair.kappa.leading_exponent() + 1.0;
                if (!(alpha < 1.0 / n)) {
                    throw HypothesisError(
                        "ft2-rl with fold n > 1 requires a power pair with alpha < 1/n");
                }
            }
            std::vector<double> fj0(static_cast<std::size_t>(n));
            try {
                for (int j = 0; j < n; ++j) fj0[static_cast<std::size_t>(j)] = derivative_at_zero(f, j);
            } catch (const SingularAtZeroError& e) {
                throw HypothesisError(std::string("ft2-rl requires finite f^(j)(0): ") + e.what());
            }
            const ExponentSumSeries kapn = series::conv_power(pair.kappa, n);
            const ExponentSumSeries kn = series::conv_power(pair.k, n);
            if (f.is_series()) {
                ExponentSumSeries rl;
                try {
                    rl = gfd_rl_series(pair, n, f.series_value());
                } catch (const SingularAtZeroError& e) {
                    throw HypothesisError(std::string("ft2-rl: ") + e.what());
                }
                if (!rl.convolvable()) {
                    throw HypothesisError(
                        "ft2-rl: the RL derivative is not integrable at 0 for this pair/fold");
                }
                const ExponentSumSeries lhs = series::convolve(kapn, rl);
                return max_abs_diff(eval_series_on_grid(lhs, T, M),
                                    eval_series_on_grid(f.series_value(), T, M));
            }
            // I^n (D_RL^n f) = I^n (D_C^n f) + sum_j f^(j)(0) (kappa^n * (k^n)^{(n-1-j)}),
            // the correction convolutions evaluated exactly in series form.
            const GridFunction d = gfd_caputo(pair, n, f, T, M, threads);
            std::vector<double> ds(static_cast<std::size_t>(M) + 1, 0.0);
            std::copy(d.values.begin(), d.values.end(), ds.begin() + 1);
            std::vector<double> lhs =
                product_convolve(kapn, ds, T, M, d.singular_exponent_hint, threads);
            for (int j = 0; j < n; ++j) {
                if (fj0[static_cast<std::size_t>(j)] == 0.0) continue;
                const ExponentSumSeries dkn = series::differentiate(kn, n - j - 1);
                if (!dkn.convolvable()) {
                    throw HypothesisError(
                        "ft2-rl: correction term is not integrable at 0 for this pair/fold");
                }
                const ExponentSumSeries corr = series::convolve(kapn, dkn);
                for (int m = 1; m <= M; ++m) {
                    lhs[static_cast<std::size_t>(m - 1)] +=
                        fj0[static_cast<std::size_t>(j)] * corr.evaluate(T * m / M);
                }
            }
            double worst = 0.0;
            for (int m = 1; m <= M; ++m) {
                worst = std::max(worst, std::fabs(lhs[static_cast<std::size_t>(m - 1)] -
                                                  evaluate_function(f, T * m / M)));
            }
            return worst;
        }

        case Theorem::INDEX:
        case Theorem::COMMUTE: {
            const ExponentSumSeries& k1 = pair.kappa;
            const ExponentSumSeries& k2 = pair.k;
            if (f.is_series()) {
                const ExponentSumSeries& fs = f.series_value();
                const ExponentSumSeries a = series::convolve(k1, series::convolve(k2, fs));
                const ExponentSumSeries b =
                    (th == Theorem::INDEX) ? series::convolve(series::convolve(k1, k2), fs)
                                           : series::convolve(k2, series::convolve(k1, fs));
                return max_abs_diff(eval_series_on_grid(a, T, M), eval_series_on_grid(b, T, M));
            }
            const std::vector<double> fsamp = sample_expression(f.ast(), T, M);
            const double pf = probe_power(f.ast());
            auto compose = [&](const ExponentSumSeries& inner, const ExponentSumSeries& outer) {
                const auto first = product_convolve(inner, fsamp, T, M, 0.0, threads);
                std::vector<double> mid(static_cast<std::size_t>(M) + 1, 0.0);
                std::copy(first.begin(), first.end(), mid.begin() + 1);
                const double hint = inner.leading_exponent() + 1.0 + pf;
                return product_convolve(outer, mid, T, M, hint, threads);
            };
            const std::vector<double> a = compose(k2, k1);
            if (th == Theorem::COMMUTE) {
                const std::vector<double> b = compose(k1, k2);
                return max_abs_diff(a, b);
            }
            const std::vector<double> b =
                product_convolve(series::convolve(k1, k2), fsamp, T, M, 0.0, threads);
            return max_abs_diff(a, b);
        }
    }
    throw DomainError("verify: unknown theorem");
}

}  // namespace

VerificationReport verify(Theorem th, const SoninePair& pair, int n, const FunctionInput& f,
                          double T, int M, double tolerance, int threads) {
    require_grid(T, M);
    require_fold(n);
    if (!(tolerance >= 0.0)) {
        throw DomainError("verify: tolerance must be nonnegative");
    }
    const double err = run_theorem(th, pair, n, f, T, M, threads);
    const double err2 = run_theorem(th, pair, n, f, T, 2 * M, threads);

    double order;
    if (err2 <= kOrderNoiseFloor) {
        order = std::numeric_limits<double>::infinity();
    } else {
        order = std::log2(err / err2);
    }

    VerificationReport rep;
    rep.theorem = th;
    char buf[160];
    std::snprintf(buf, sizeof buf, "fold=%d fn=%s", n, f.description().c_str());
    rep.parameters = buf;
    rep.T = T;
    rep.M = M;
    rep.max_abs_error = err;
    rep.estimated_order = order;
    rep.tolerance = tolerance;
    rep.pass = err <= tolerance;
    return rep;
}

}  // namespace gfc::ops
