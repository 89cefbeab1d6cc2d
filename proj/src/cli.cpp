#include "gfc/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfc/kernels.hpp"
#include "gfc/operators.hpp"

namespace gfc::cli {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---- shared option bundles --------------------------------------------------

struct KernelOptions {
    std::string family;
    double alpha = 0.0;
    double beta = 0.0;
    double rho = 0.0;
    std::vector<double> weights;
    std::vector<double> orders;
    std::vector<double> coeffs;
    int terms = 60;
    std::string kernel_file;

    void attach(CLI::App* cmd, bool family_required = true) {
        auto* fam = cmd->add_option("--family", family,
                                    "kernel family: power, tempered, bessel, ml, multiterm, series");
        cmd->add_option("--alpha", alpha, "order parameter alpha");
        cmd->add_option("--beta", beta, "second order parameter (ml family)");
        cmd->add_option("--rho", rho, "tempering rate (tempered family)");
        cmd->add_option("--weights", weights, "multiterm weights")->delimiter(',');
        cmd->add_option("--orders", orders, "multiterm orders in (0,1)")->delimiter(',');
        cmd->add_option("--coeffs", coeffs, "series kernel coefficients a_0,a_1,...")->delimiter(',');
        cmd->add_option("--terms", terms, "series truncation order")->check(CLI::PositiveNumber);
        auto* kf = cmd->add_option("--kernel-file", kernel_file,
                                   "read the kernel spec from a key-value file instead of flags");
        if (family_required) {
            fam->excludes(kf);
        }
    }

    kernels::KernelSpec build() const {
        if (!kernel_file.empty()) {
            std::ifstream in(kernel_file);
            if (!in) throw SpecError("cannot open kernel file: " + kernel_file);
            std::stringstream ss;
            ss << in.rdbuf();
            return kernels::from_kv(ss.str());
        }
        kernels::KernelSpec spec;
        spec.truncation_order = terms;
        if (family == "power") {
            spec.family = kernels::PowerSpec{alpha};
        } else if (family == "tempered") {
            spec.family = kernels::TemperedSpec{alpha, rho};
        } else if (family == "bessel") {
            spec.family = kernels::BesselSpec{alpha};
        } else if (family == "ml") {
            spec.family = kernels::MittagLefflerSpec{alpha, beta};
        } else if (family == "multiterm") {
            spec.family = kernels::MultiTermSpec{weights, orders};
        } else if (family == "series") {
            spec.family = kernels::SeriesKernelSpec{alpha, coeffs};
        } else if (family.empty()) {
            throw SpecError("either --family or --kernel-file is required");
        } else {
            throw SpecError("unknown --family \"" + family +
                            "\" (expected power, tempered, bessel, ml, multiterm, series)");
        }
        spec.validate();
        return spec;
    }

};

std::string join_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt(v[i]);
    }
    return s;
}

std::string describe_spec(const kernels::KernelSpec& spec) {
    std::string s = "family=" + spec.family_name();
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, kernels::PowerSpec> ||
                          std::is_same_v<F, kernels::BesselSpec>) {
                s += " alpha=" + fmt(f.alpha);
            } else if constexpr (std::is_same_v<F, kernels::TemperedSpec>) {
                s += " alpha=" + fmt(f.alpha) + " rho=" + fmt(f.rho);
            } else if constexpr (std::is_same_v<F, kernels::MittagLefflerSpec>) {
                s += " alpha=" + fmt(f.alpha) + " beta=" + fmt(f.beta);
            } else if constexpr (std::is_same_v<F, kernels::MultiTermSpec>) {
                s += " weights=" + join_list(f.weights) + " orders=" + join_list(f.orders);
            } else {
                s += " alpha=" + fmt(f.alpha) + " coeffs=" + join_list(f.coeffs);
            }
        },
        spec.family);
    s += " terms=" + std::to_string(spec.truncation_order);
    return s;
}

json spec_metadata(const kernels::KernelSpec& spec) {
    json m;
    m["family"] = spec.family_name();
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, kernels::PowerSpec> ||
                          std::is_same_v<F, kernels::BesselSpec>) {
                m["alpha"] = f.alpha;
            } else if constexpr (std::is_same_v<F, kernels::TemperedSpec>) {
                m["alpha"] = f.alpha;
                m["rho"] = f.rho;
            } else if constexpr (std::is_same_v<F, kernels::MittagLefflerSpec>) {
                m["alpha"] = f.alpha;
                m["beta"] = f.beta;
            } else if constexpr (std::is_same_v<F, kernels::MultiTermSpec>) {
                m["weights"] = f.weights;
                m["orders"] = f.orders;
            } else {
                m["alpha"] = f.alpha;
                m["coeffs"] = f.coeffs;
            }
        },
        spec.family);
    m["terms"] = spec.truncation_order;
    return m;
}

struct FunctionOptions {
    std::string fn;
    std::string fn_series_file;

    void attach(CLI::App* cmd) {
        auto* a = cmd->add_option("--fn", fn, "function expression in t, e.g. \"exp(-t)*t^0.5\"");
        auto* b = cmd->add_option("--fn-series", fn_series_file,
                                  "two-column exponent/coefficient file giving f as a series");
        a->excludes(b);
    }

    expr::FunctionInput build() const {
        if (!fn_series_file.empty()) {
            std::ifstream in(fn_series_file);
            if (!in) throw SpecError("cannot open series file: " + fn_series_file);
            std::stringstream ss;
            ss << in.rdbuf();
            return expr::FunctionInput::from_series(series::from_text(ss.str()));
        }
        if (fn.empty()) {
            throw SpecError("one of --fn or --fn-series is required");
        }
        return expr::FunctionInput::from_expression(fn);
    }
};

// Resolves --out against GFC_OUT_DIR and writes, or streams to `fallback`.
void deliver(const std::string& out_path, const std::string& payload, std::ostream& fallback) {
    if (out_path.empty()) {
        fallback << payload;
        return;
    }
    std::string path = out_path;
    const char* dir = std::getenv("GFC_OUT_DIR");
    if (dir && *dir && path.front() != '/') {
        path = std::string(dir) + "/" + path;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SpecError("cannot open output file: " + path);
    f << payload;
}

json series_to_json(const series::ExponentSumSeries& s) {
    json arr = json::array();
    for (const auto& t : s.terms()) {
        arr.push_back({t.exponent, t.coefficient});
    }
    return arr;
}

json base_metadata(const std::string& command) {
    json m;
    m["command"] = command;
    m["versions"] = {{"gfc", kVersion}};
    return m;
}

// ---- subcommand payloads ----------------------------------------------------

std::string render_kernels_list(const std::string& format) {
    struct Row {
        const char* name;
        const char* params;
        const char* note;
    };
    static constexpr Row rows[] = {
        {"power", "alpha in (0,1)", "h_alpha; associate h_{1-alpha}"},
        {"tempered", "alpha in (0,1), rho >= 0", "exponentially tempered power kernel"},
        {"bessel", "alpha in (0,1)", "Bessel J / modified Bessel I pair"},
        {"ml", "0 < alpha < beta < 1", "two-term power kernel with Mittag-Leffler associate"},
        {"multiterm", "orders in (0,1), nonzero weights",
         "sum of power kernels; associate needs commensurable orders"},
        {"series", "alpha in (0,1), a_0 != 0", "h_alpha times an analytic series"},
    };
    if (format == "json") {
        json out;
        out["metadata"] = base_metadata("kernels-list");
        json fam = json::array();
        for (const Row& r : rows) {
            fam.push_back({{"family", r.name}, {"parameters", r.params}, {"note", r.note}});
        }
        out["families"] = fam;
        return out.dump(2) + "\n";
    }
    std::string out = "# kernels-list\nfamily,parameters,note\n";
    for (const Row& r : rows) {
        out += std::string(r.name) + "," + r.params + "," + r.note + "\n";
    }
    return out;
}

std::string render_pair(const KernelOptions& ko, double T, const std::string& format) {
    const kernels::KernelSpec spec = ko.build();
    const kernels::SoninePair pair = kernels::make_pair(spec, T);
    if (format == "json") {
        json out;
        out["metadata"] = base_metadata("kernels-pair");
        out["metadata"]["spec"] = spec_metadata(spec);
        out["metadata"]["t_max"] = T;
        out["kappa"] = series_to_json(pair.kappa);
        out["k"] = series_to_json(pair.k);
        out["residual"] = pair.residual_bound;
        return out.dump(2) + "\n";
    }
    std::string out = "# kernels-pair " + describe_spec(spec) + " t-max=" + fmt(T) + "\n";
    out += "kappa\n" + series::to_text(pair.kappa);
    out += "k\n" + series::to_text(pair.k);
    out += "residual " + fmt(pair.residual_bound) + "\n";
    return out;
}

std::string render_associate(double alpha, const std::vector<double>& coeffs, int N,
                             const std::string& format) {
    const auto result = kernels::associate_kernel(alpha, coeffs, N);
    if (format == "json") {
        json out;
        out["metadata"] = base_metadata("kernels-associate");
        out["metadata"]["alpha"] = alpha;
        out["metadata"]["coeffs"] = coeffs;
        out["metadata"]["n"] = N;
        out["b"] = result.b;
        out["growth_warning"] = result.growth_warning;
        return out.dump(2) + "\n";
    }
    std::string out = "# kernels-associate alpha=" + fmt(alpha) + " n=" + std::to_string(N) + "\n";
    out += "b\n";
    for (double b : result.b) out += fmt(b) + "\n";
    if (result.growth_warning) {
        out += "warning coefficient growth exceeds geometric ratio 1e3\n";
    }
    return out;
}

std::string render_apply(const std::string& op, const KernelOptions& ko, const FunctionOptions& fo,
                         int fold, double T, int steps, int threads, const std::string& format) {
    const kernels::KernelSpec spec = ko.build();
    const kernels::SoninePair pair = kernels::make_pair(spec, T);
    const expr::FunctionInput f = fo.build();

    ops::GridFunction g;
    if (op == "gfi") {
        g = ops::gfi(pair, fold, f, T, steps, threads);
    } else if (op == "gfd-rl") {
        g = ops::gfd_rl(pair, fold, f, T, steps, threads);
    } else if (op == "gfd-c") {
        g = ops::gfd_caputo(pair, fold, f, T, steps, threads);
    } else {
        throw SpecError("unknown --op \"" + op + "\" (expected gfi, gfd-rl, gfd-c)");
    }

    const std::string header = "apply op=" + op + " " + describe_spec(spec) + " fold=" +
                               std::to_string(fold) + " fn=" + f.description() +
                               " t-max=" + fmt(T) + " steps=" + std::to_string(steps);
    if (format == "json") {
        json out;
        out["metadata"] = base_metadata("apply");
        out["metadata"]["spec"] = spec_metadata(spec);
        out["metadata"]["op"] = op;
        out["metadata"]["fold"] = fold;
        out["metadata"]["fn"] = f.description();
        out["metadata"]["t_max"] = T;
        out["metadata"]["steps"] = steps;
        out["metadata"]["singular_exponent_hint"] = g.singular_exponent_hint;
        json rows = json::array();
        for (int m = 1; m <= g.M; ++m) {
            rows.push_back({g.t(m), g.values[static_cast<std::size_t>(m - 1)]});
        }
        out["rows"] = rows;
        return out.dump(2) + "\n";
    }
    return g.to_text(header);
}

// Returns payload and pass/fail.
std::pair<std::string, bool> render_verify(const std::string& theorem, const KernelOptions& ko,
                                           const FunctionOptions& fo, int fold, double T, int steps,
                                           double tol, int threads, const std::string& format) {
    const kernels::KernelSpec spec = ko.build();
    const kernels::SoninePair pair = kernels::make_pair(spec, T);
    const expr::FunctionInput f = fo.build();
    const ops::Theorem th = ops::theorem_from_name(theorem);
    const ops::VerificationReport rep = ops::verify(th, pair, fold, f, T, steps, tol, threads);

    if (format == "json") {
        json out;
        out["metadata"] = base_metadata("verify");
        out["metadata"]["spec"] = spec_metadata(spec);
        out["metadata"]["tolerances"] = {{"tol", tol}};
        out["report"] = {{"theorem", ops::theorem_name(rep.theorem)},
                         {"parameters", rep.parameters},
                         {"T", rep.T},
                         {"M", rep.M},
                         {"max_abs_error", rep.max_abs_error},
                         {"estimated_order", rep.estimated_order},
                         {"tolerance", rep.tolerance},
                         {"pass", rep.pass}};
        return {out.dump(2) + "\n", rep.pass};
    }
    std::string out = "# verify " + describe_spec(spec) + "\n";
    out += "theorem," + ops::theorem_name(rep.theorem) + "\n";
    out += "parameters," + rep.parameters + "\n";
    out += "T," + fmt(rep.T) + "\n";
    out += "M," + std::to_string(rep.M) + "\n";
    out += "max_abs_error," + fmt(rep.max_abs_error) + "\n";
    out += "estimated_order," + fmt(rep.estimated_order) + "\n";
    out += "tolerance," + fmt(rep.tolerance) + "\n";
    out += std::string("pass,") + (rep.pass ? "true" : "false") + "\n";
    return {out, rep.pass};
}

std::string render_laplace_check(const KernelOptions& ko, const std::vector<double>& p_grid,
                                 const std::string& format) {
    const kernels::KernelSpec spec = ko.build();
    const kernels::SoninePair pair = kernels::make_pair(spec, 1.0);

    // The truncated ML associate has a divergent term-wise transform for
    // p < 1; use the closed-form transform for that family.
    double worst;
    std::vector<double> devs;
    devs.reserve(p_grid.size());
    if (const auto* ml = std::get_if<kernels::MittagLefflerSpec>(&spec.family)) {
        const double a = ml->alpha, b = ml->beta;
        auto k_hat = [a, b](double p) { return std::pow(p, a - b) / (std::pow(p, a) + 1.0); };
        for (double p : p_grid) {
            devs.push_back(kernels::laplace_product_check(pair.kappa, k_hat, {&p, 1}));
        }
        worst = kernels::laplace_product_check(pair.kappa, k_hat, p_grid);
    } else {
        for (double p : p_grid) {
            devs.push_back(kernels::laplace_product_check(pair.kappa, pair.k, {&p, 1}));
        }
        worst = kernels::laplace_product_check(pair.kappa, pair.k, p_grid);
    }

    if (format == "json") {
        json out;
        out["metadata"] = base_metadata("laplace-check");
        out["metadata"]["spec"] = spec_metadata(spec);
        out["metadata"]["p_grid"] = p_grid;
        json rows = json::array();
        for (std::size_t i = 0; i < p_grid.size(); ++i) {
            rows.push_back({p_grid[i], devs[i]});
        }
        out["rows"] = rows;
        out["max_deviation"] = worst;
        return out.dump(2) + "\n";
    }
    std::string out = "# laplace-check " + describe_spec(spec) + "\n";
    out += "p,deviation\n";
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
        out += fmt(p_grid[i]) + "," + fmt(devs[i]) + "\n";
    }
    out += "max," + fmt(worst) + "\n";
    return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"general fractional integrals and derivatives with Sonine kernels"};
    app.require_subcommand(1);

    std::string out_path;
    std::string format = "csv";
    int threads = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "write output to this file (GFC_OUT_DIR-relative)");
        cmd->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--threads", threads, "grid-point parallelism (does not change outputs)")
            ->check(CLI::PositiveNumber);
        cmd->set_config("--config", "", "read flag values (key=value lines) from a file");
    };

    // kernels-list
    auto* list_cmd = app.add_subcommand("kernels-list", "list the kernel catalog");
    add_common(list_cmd);

    // kernels-pair
    auto* pair_cmd =
        app.add_subcommand("kernels-pair", "construct a Sonine pair and report its residual");
    KernelOptions pair_ko;
    pair_ko.attach(pair_cmd);
    double pair_T = 1.0;
    pair_cmd->add_option("--t-max", pair_T, "domain (0, T] for the residual")
        ->check(CLI::PositiveNumber);
    add_common(pair_cmd);

    // kernels-associate
    auto* assoc_cmd = app.add_subcommand(
        "kernels-associate", "solve the triangular system for associate-kernel coefficients");
    double assoc_alpha = 0.5;
    std::vector<double> assoc_coeffs;
    int assoc_n = 12;
    assoc_cmd->add_option("--alpha", assoc_alpha, "kernel exponent parameter in (0,1)")
        ->required();
    assoc_cmd->add_option("--coeffs", assoc_coeffs, "a_0,a_1,... with a_0 != 0")
        ->required()
        ->delimiter(',');
    assoc_cmd->add_option("--terms", assoc_n, "number of b coefficients")
        ->check(CLI::PositiveNumber);
    add_common(assoc_cmd);

    // apply
    auto* apply_cmd = app.add_subcommand("apply", "apply a GFI or GFD to a function");
    std::string apply_op;
    KernelOptions apply_ko;
    FunctionOptions apply_fo;
    int apply_fold = 1, apply_steps = 256;
    double apply_T = 1.0;
    apply_cmd->add_option("--op", apply_op, "operator: gfi, gfd-rl, gfd-c")->required();
    apply_ko.attach(apply_cmd);
    apply_fo.attach(apply_cmd);
    apply_cmd->add_option("--fold", apply_fold, "n-fold order")->check(CLI::PositiveNumber);
    apply_cmd->add_option("--t-max", apply_T, "grid endpoint T")->check(CLI::PositiveNumber);
    apply_cmd->add_option("--steps", apply_steps, "number of grid steps M")
        ->check(CLI::Range(2, 1 << 20));
    add_common(apply_cmd);

    // verify
    auto* verify_cmd =
        app.add_subcommand("verify", "check a fundamental-theorem identity on a grid");
    std::string verify_theorem;
    KernelOptions verify_ko;
    FunctionOptions verify_fo;
    int verify_fold = 1, verify_steps = 512;
    double verify_T = 1.0, verify_tol = 0.0;
    verify_cmd
        ->add_option("--theorem", verify_theorem,
                     "ft1-rl, ft1-c, ft2-rl, ft2-c, sonine, index, commute")
        ->required();
    verify_ko.attach(verify_cmd);
    verify_fo.attach(verify_cmd);
    verify_cmd->add_option("--fold", verify_fold, "n-fold order")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--t-max", verify_T, "grid endpoint T")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--steps", verify_steps, "number of grid steps M")
        ->check(CLI::Range(2, 1 << 20));
    verify_cmd->add_option("--tol", verify_tol, "pass/fail tolerance")->required();
    add_common(verify_cmd);

    // laplace-check
    auto* lap_cmd = app.add_subcommand(
        "laplace-check", "check p * L[kappa](p) * L[k](p) = 1 on a grid of p values");
    KernelOptions lap_ko;
    lap_ko.attach(lap_cmd);
    std::vector<double> lap_p = {0.5, 1.0, 2.0, 5.0};
    lap_cmd->add_option("--p-grid", lap_p, "comma-separated Laplace abscissas")->delimiter(',');
    add_common(lap_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help() << "\n";
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (list_cmd->parsed()) {
            deliver(out_path, render_kernels_list(format), out);
            return 0;
        }
        if (pair_cmd->parsed()) {
            deliver(out_path, render_pair(pair_ko, pair_T, format), out);
            return 0;
        }
        if (assoc_cmd->parsed()) {
            deliver(out_path, render_associate(assoc_alpha, assoc_coeffs, assoc_n, format), out);
            return 0;
        }
        if (apply_cmd->parsed()) {
            deliver(out_path,
                    render_apply(apply_op, apply_ko, apply_fo, apply_fold, apply_T, apply_steps,
                                 threads, format),
                    out);
            return 0;
        }
        if (verify_cmd->parsed()) {
            auto [payload, pass] = render_verify(verify_theorem, verify_ko, verify_fo, verify_fold,
                                                 verify_T, verify_steps, verify_tol, threads, format);
            deliver(out_path, payload, out);
            return pass ? 0 : 1;
        }
        if (lap_cmd->parsed()) {
            deliver(out_path, render_laplace_check(lap_ko, lap_p, format), out);
            return 0;
        }
        err << "usage error: no subcommand\n";
        return 2;
    } catch (const HypothesisError& e) {
        err << "hypothesis failure: " << e.what() << "\n";
        return 1;
    } catch (const SpecError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const expr::SyntaxError& e) {
        err << "usage error (--fn): " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace gfc::cli
