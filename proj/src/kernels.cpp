#include "gfc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gfc/specfun.hpp"

namespace gfc::kernels {

using series::ExponentSumSeries;
using series::Term;

namespace {

constexpr double kStepTol = 1e-9;      // commensurability tolerance for multi-term orders
constexpr int kMaxLatticePoints = 512;  // refuse absurd common-step lattices

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

// Gamma(x)*Gamma(y)/(Gamma(z)*Gamma(w)) with overflow-safe fallback.
double gamma_ratio(double x, double y, double z, double w) {
    if (std::max({x, y, z, w}) <= 170.0) {
        return specfun::gamma(x) * specfun::gamma(y) / (specfun::gamma(z) * specfun::gamma(w));
    }
    return std::exp(specfun::log_abs_gamma(x) + specfun::log_abs_gamma(y) -
                    specfun::log_abs_gamma(z) - specfun::log_abs_gamma(w));
}

void require(bool cond, const char* msg) {
    if (!cond) throw SpecError(msg);
}

}  // namespace

void KernelSpec::validate() const {
    require(truncation_order >= 1, "KernelSpec: truncation_order must be positive");
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PowerSpec>) {
                require(f.alpha > 0.0 && f.alpha < 1.0, "Power kernel requires 0 < alpha < 1");
            } else if constexpr (std::is_same_v<F, TemperedSpec>) {
                require(f.alpha > 0.0 && f.alpha < 1.0, "Tempered kernel requires 0 < alpha < 1");
                require(f.rho >= 0.0, "Tempered kernel requires rho >= 0");
            } else if constexpr (std::is_same_v<F, BesselSpec>) {
                require(f.alpha > 0.0 && f.alpha < 1.0, "Bessel kernel requires 0 < alpha < 1");
            } else if constexpr (std::is_same_v<F, MittagLefflerSpec>) {
                require(f.alpha > 0.0 && f.alpha < f.beta && f.beta < 1.0,
                        "Mittag-Leffler pair requires 0 < alpha < beta < 1");
            } else if constexpr (std::is_same_v<F, MultiTermSpec>) {
                require(!f.orders.empty(), "MultiTerm kernel requires at least one order");
                require(f.weights.size() == f.orders.size(),
                        "MultiTerm kernel requires matching weights and orders");
                for (double a : f.orders) {
                    require(a > 0.0 && a < 1.0, "MultiTerm orders must lie in (0, 1)");
                }
                for (double w : f.weights) {
                    require(w != 0.0, "MultiTerm weights must be nonzero");
                }
            } else if constexpr (std::is_same_v<F, SeriesKernelSpec>) {
                require(f.alpha > 0.0 && f.alpha < 1.0, "Series kernel requires 0 < alpha < 1");
                require(!f.coeffs.empty() && f.coeffs[0] != 0.0,
                        "Series kernel requires a_0 != 0");
            }
        },
        family);
}

std::string KernelSpec::family_name() const {
    return std::visit(
        [](const auto& f) -> std::string {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PowerSpec>) return "power";
            else if constexpr (std::is_same_v<F, TemperedSpec>) return "tempered";
            else if constexpr (std::is_same_v<F, BesselSpec>) return "bessel";
            else if constexpr (std::is_same_v<F, MittagLefflerSpec>) return "ml";
            else if constexpr (std::is_same_v<F, MultiTermSpec>) return "multiterm";
            else return "series";
        },
        family);
}

namespace {

ExponentSumSeries tempered_series(double alpha, double rho, int order) {
    const double rg = specfun::reciprocal_gamma(alpha);
    std::vector<Term> terms;
    terms.reserve(order);
    double c = rg;  // (-rho)^m / m! * rg, m = 0
    for (int m = 0; m < order; ++m) {
        terms.push_back({alpha - 1.0 + m, c});
        c *= -rho / (m + 1.0);
    }
    return ExponentSumSeries(std::move(terms));
}

ExponentSumSeries bessel_kappa(double alpha, int order) {
    std::vector<Term> terms;
    terms.reserve(order);
    for (int m = 0; m < order; ++m) {
        const double c = ((m & 1) ? -1.0 : 1.0) / factorial(m) * specfun::reciprocal_gamma(m + alpha);
        terms.push_back({alpha - 1.0 + m, c});
    }
    return ExponentSumSeries(std::move(terms));
}

ExponentSumSeries bessel_k(double alpha, int order) {
    std::vector<Term> terms;
    terms.reserve(order);
    for (int m = 0; m < order; ++m) {
        const double c = specfun::reciprocal_gamma(m + 1.0 - alpha) / factorial(m);
        terms.push_back({-alpha + m, c});
    }
    return ExponentSumSeries(std::move(terms));
}

ExponentSumSeries ml_kappa(double alpha, double beta) {
    return series::linear_combine({{1.0, ExponentSumSeries::power_kernel(1.0 - beta + alpha)},
                                   {1.0, ExponentSumSeries::power_kernel(1.0 - beta)}});
}

ExponentSumSeries ml_k(double alpha, double beta, int order) {
    std::vector<Term> terms;
    terms.reserve(order);
    for (int m = 0; m < order; ++m) {
        const double c = ((m & 1) ? -1.0 : 1.0) * specfun::reciprocal_gamma(alpha * m + beta);
        terms.push_back({beta - 1.0 + alpha * m, c});
    }
    return ExponentSumSeries(std::move(terms));
}

ExponentSumSeries multiterm_kappa(const MultiTermSpec& f) {
    std::vector<std::pair<double, ExponentSumSeries>> parts;
    parts.reserve(f.orders.size());
    for (std::size_t i = 0; i < f.orders.size(); ++i) {
        parts.emplace_back(f.weights[i], ExponentSumSeries::power_kernel(1.0 - f.orders[i]));
    }
    return series::linear_combine(parts);
}

ExponentSumSeries series_kernel_kappa(const SeriesKernelSpec& f, int order) {
    const double rg = specfun::reciprocal_gamma(f.alpha);
    const int n = std::min<int>(order, static_cast<int>(f.coeffs.size()));
    std::vector<Term> terms;
    terms.reserve(n);
    for (int m = 0; m < n; ++m) {
        if (f.coeffs[m] == 0.0) continue;
        terms.push_back({f.alpha - 1.0 + m, f.coeffs[m] * rg});
    }
    return ExponentSumSeries(std::move(terms));
}

// Greatest common step of the nonzero offsets, by a tolerance-guarded Euclid.
double common_step(std::vector<double> deltas) {
    double g = 0.0;
    for (double d : deltas) {
        if (d < kStepTol) continue;
        if (g == 0.0) {
            g = d;
            continue;
        }
        double a = std::max(g, d), b = std::min(g, d);
        while (b > kStepTol) {
            const double r = std::fmod(a, b);
            a = b;
            b = std::min(r, std::fabs(b - r));  // fmod near b means near-divisibility
        }
        g = a;
    }
    return g;
}

}  // namespace

ExponentSumSeries build_kernel(const KernelSpec& spec) {
    spec.validate();
    const int order = spec.truncation_order;
    return std::visit(
        [&](const auto& f) -> ExponentSumSeries {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PowerSpec>) {
                return ExponentSumSeries::power_kernel(f.alpha);
            } else if constexpr (std::is_same_v<F, TemperedSpec>) {
                return tempered_series(f.alpha, f.rho, order);
            } else if constexpr (std::is_same_v<F, BesselSpec>) {
                return bessel_kappa(f.alpha, order);
            } else if constexpr (std::is_same_v<F, MittagLefflerSpec>) {
                return ml_kappa(f.alpha, f.beta);
            } else if constexpr (std::is_same_v<F, MultiTermSpec>) {
                return multiterm_kappa(f);
            } else {
                return series_kernel_kappa(f, order);
            }
        },
        spec.family);
}

AssociateResult associate_kernel_step(double mu, double step, std::span<const double> a, int N) {
    if (a.empty() || a[0] == 0.0) {
        throw DegenerateError("associate_kernel: a_0 must be nonzero");
    }
    if (N < 1) {
        throw DomainError("associate_kernel: N must be positive");
    }
    if (!(mu > 0.0 && mu < 1.0)) {
        throw DomainError("associate_kernel: exponent parameter must lie in (0, 1)");
    }
    if (!(step > 0.0)) {
        throw DomainError("associate_kernel: step must be positive");
    }

    std::vector<double> b(N, 0.0);
    b[0] = 1.0 / a[0];
    bool warn = false;
    for (int n = 1; n < N; ++n) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const std::size_t ai = static_cast<std::size_t>(n - j);
            if (ai >= a.size()) continue;
            if (a[ai] == 0.0 || b[j] == 0.0) continue;
            // Gamma(1-mu+js) Gamma(mu+(n-j)s) / (Gamma(1-mu+ns) Gamma(mu)), kept
            // as a ratio so large n stays representable.
            const double w =
                gamma_ratio(1.0 - mu + j * step, mu + (n - j) * step, 1.0 - mu + n * step, mu);
            acc += w * a[ai] * b[j];
        }
        b[n] = -acc / a[0];
        if (std::fabs(b[n - 1]) > 0.0 && std::fabs(b[n]) > 1e3 * std::fabs(b[n - 1])) {
            warn = true;
        }
    }
    return {std::move(b), warn};
}

AssociateResult associate_kernel(double alpha, std::span<const double> a, int N) {
    return associate_kernel_step(alpha, 1.0, a, N);
}

namespace {

// Multi-term associate: rewrite kappa = h_mu(t) * sum a_m t^{m s} over the
// common step of the order offsets, then solve the triangular system.
ExponentSumSeries multiterm_associate(const MultiTermSpec& f, int order) {
    const double amax = *std::max_element(f.orders.begin(), f.orders.end());
    const double mu = 1.0 - amax;

    std::vector<double> deltas;
    deltas.reserve(f.orders.size());
    for (double a : f.orders) deltas.push_back(amax - a);

    double step = common_step(deltas);
    std::vector<std::size_t> idx(f.orders.size(), 0);
    if (step == 0.0) {
        step = 1.0;  // single distinct order; lattice has one point
    }
    std::size_t npoints = 0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const double q = deltas[i] / step;
        const double qr = std::round(q);
        if (std::fabs(q - qr) > 1e-6) {
            throw UnsupportedError(
                "MultiTerm associate kernel: orders are not commensurable with a common step");
        }
        idx[i] = static_cast<std::size_t>(qr);
        npoints = std::max(npoints, idx[i] + 1);
    }
    if (npoints > kMaxLatticePoints) {
        throw UnsupportedError(
            "MultiTerm associate kernel: common step produces an unreasonably fine lattice");
    }

    std::vector<double> a(npoints, 0.0);
    const double gmu = specfun::gamma(mu);
    for (std::size_t i = 0; i < f.orders.size(); ++i) {
        a[idx[i]] += f.weights[i] * gmu * specfun::reciprocal_gamma(1.0 - f.orders[i]);
    }
    if (a[0] == 0.0) {
        throw DegenerateError("MultiTerm associate kernel: leading coefficient cancelled to zero");
    }

    const auto assoc = associate_kernel_step(mu, step, a, order);
    const double rg = specfun::reciprocal_gamma(1.0 - mu);
    std::vector<Term> terms;
    terms.reserve(assoc.b.size());
    for (std::size_t j = 0; j < assoc.b.size(); ++j) {
        if (assoc.b[j] == 0.0) continue;
        terms.push_back({-mu + j * step, assoc.b[j] * rg});
    }
    return ExponentSumSeries(std::move(terms));
}

ExponentSumSeries series_kernel_associate(const SeriesKernelSpec& f, int order) {
    const auto assoc = associate_kernel(f.alpha, f.coeffs, order);
    const double rg = specfun::reciprocal_gamma(1.0 - f.alpha);
    std::vector<Term> terms;
    terms.reserve(assoc.b.size());
    for (std::size_t j = 0; j < assoc.b.size(); ++j) {
        if (assoc.b[j] == 0.0) continue;
        terms.push_back({-f.alpha + j, assoc.b[j] * rg});
    }
    return ExponentSumSeries(std::move(terms));
}

}  // namespace

SoninePair make_pair(const KernelSpec& spec, double T) {
    spec.validate();
    if (!(T > 0.0)) {
        throw DomainError("make_pair: T must be positive");
    }
    const int order = spec.truncation_order;
    const ExponentSumSeries kappa = build_kernel(spec);
    ExponentSumSeries k = std::visit(
        [&](const auto& f) -> ExponentSumSeries {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PowerSpec>) {
                return ExponentSumSeries::power_kernel(1.0 - f.alpha);
            } else if constexpr (std::is_same_v<F, TemperedSpec>) {
                const ExponentSumSeries base = tempered_series(1.0 - f.alpha, f.rho, order);
                return series::linear_combine(
                    {{1.0, base}, {f.rho, series::antiderivative(base)}});
            } else if constexpr (std::is_same_v<F, BesselSpec>) {
                return bessel_k(f.alpha, order);
            } else if constexpr (std::is_same_v<F, MittagLefflerSpec>) {
                return ml_k(f.alpha, f.beta, order);
            } else if constexpr (std::is_same_v<F, MultiTermSpec>) {
                return multiterm_associate(f, order);
            } else {
                return series_kernel_associate(f, order);
            }
        },
        spec.family);

    const double residual = sonine_residual(kappa, k, T, 64);
    return {kappa, std::move(k), residual, T};
}

double sonine_residual(const ExponentSumSeries& kappa, const ExponentSumSeries& k, double T,
                       int n_points) {
    if (!(T > 0.0)) {
        throw DomainError("sonine_residual: T must be positive");
    }
    if (n_points < 1) {
        throw DomainError("sonine_residual: n_points must be positive");
    }
    const ExponentSumSeries conv = series::convolve(kappa, k);
    double worst = 0.0;
    if (n_points == 1) {
        return std::fabs(conv.evaluate(T) - 1.0);
    }
    // Geometric grid, denser near zero where the singular behaviour lives.
    const double ratio = std::pow(1e-6, 1.0 / (n_points - 1));
    for (int i = 0; i < n_points; ++i) {
        const double t = T * std::pow(ratio, n_points - 1 - i);
        worst = std::max(worst, std::fabs(conv.evaluate(t) - 1.0));
    }
    return worst;
}

double laplace_product_check(const ExponentSumSeries& kappa, const ExponentSumSeries& k,
                             std::span<const double> p_grid) {
    return laplace_product_check(
        kappa, [&k](double p) { return k.laplace(p); }, p_grid);
}

double laplace_product_check(const ExponentSumSeries& kappa,
                             const std::function<double(double)>& k_laplace,
                             std::span<const double> p_grid) {
    double worst = 0.0;
    for (double p : p_grid) {
        if (!(p > 0.0)) {
            throw DomainError("laplace_product_check: all p must be positive");
        }
        worst = std::max(worst, std::fabs(p * kappa.laplace(p) * k_laplace(p) - 1.0));
    }
    return worst;
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    char buf[40];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        if (i) out += ',';
        out += buf;
    }
    return out;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::strtod(item.c_str(), nullptr));
    }
    return out;
}

void emit(std::string& out, const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s %.17g\n", key, v);
    out += buf;
}

}  // namespace

std::string to_kv(const KernelSpec& spec) {
    std::string out = "family " + spec.family_name() + "\n";
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PowerSpec>) {
                emit(out, "alpha", f.alpha);
            } else if constexpr (std::is_same_v<F, TemperedSpec>) {
                emit(out, "alpha", f.alpha);
                emit(out, "rho", f.rho);
            } else if constexpr (std::is_same_v<F, BesselSpec>) {
                emit(out, "alpha", f.alpha);
            } else if constexpr (std::is_same_v<F, MittagLefflerSpec>) {
                emit(out, "alpha", f.alpha);
                emit(out, "beta", f.beta);
            } else if constexpr (std::is_same_v<F, MultiTermSpec>) {
                out += "weights " + join_doubles(f.weights) + "\n";
                out += "orders " + join_doubles(f.orders) + "\n";
            } else {
                emit(out, "alpha", f.alpha);
                out += "coeffs " + join_doubles(f.coeffs) + "\n";
            }
        },
        spec.family);
    out += "terms " + std::to_string(spec.truncation_order) + "\n";
    return out;
}

KernelSpec from_kv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line, family;
    double alpha = 0.0, beta = 0.0, rho = 0.0;
    bool has_alpha = false, has_beta = false, has_rho = false;
    std::vector<double> weights, orders, coeffs;
    int terms = 60;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string key, value;
        ls >> key;
        std::getline(ls, value);
        const std::size_t pos = value.find_first_not_of(" \t");
        value = pos == std::string::npos ? std::string() : value.substr(pos);
        if (!value.empty() && value.back() == '\r') value.pop_back();
        if (key == "family") family = value;
        else if (key == "alpha") { alpha = std::strtod(value.c_str(), nullptr); has_alpha = true; }
        else if (key == "beta") { beta = std::strtod(value.c_str(), nullptr); has_beta = true; }
        else if (key == "rho") { rho = std::strtod(value.c_str(), nullptr); has_rho = true; }
        else if (key == "weights") weights = split_doubles(value);
        else if (key == "orders") orders = split_doubles(value);
        else if (key == "coeffs") coeffs = split_doubles(value);
        else if (key == "terms") terms = std::atoi(value.c_str());
        else throw SpecError("from_kv: unknown key \"" + key + "\"");
    }

    KernelSpec spec;
    spec.truncation_order = terms;
    if (family == "power") {
        require(has_alpha, "from_kv: power kernel requires alpha");
        spec.family = PowerSpec{alpha};
    } else if (family == "tempered") {
        require(has_alpha, "from_kv: tempered kernel requires alpha");
        spec.family = TemperedSpec{alpha, has_rho ? rho : 0.0};
    } else if (family == "bessel") {
        require(has_alpha, "from_kv: bessel kernel requires alpha");
        spec.family = BesselSpec{alpha};
    } else if (family == "ml") {
        require(has_alpha && has_beta, "from_kv: ml kernel requires alpha and beta");
        spec.family = MittagLefflerSpec{alpha, beta};
    } else if (family == "multiterm") {
        spec.family = MultiTermSpec{weights, orders};
    } else if (family == "series") {
        require(has_alpha, "from_kv: series kernel requires alpha");
        spec.family = SeriesKernelSpec{alpha, coeffs};
    } else {
        throw SpecError("from_kv: unknown family \"" + family + "\"");
    }
    spec.validate();
    return spec;
}

}  // namespace gfc::kernels
