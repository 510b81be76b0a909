// polard: polar decompositions and Frechet derivatives of the unitary factor
// from the command line. Verbs: compute, trace, gallery, verify, condition.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure
// (non-convergence, singular or rank-deficient input).

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "polard/polard.hpp"

namespace {

using namespace polard;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

// ---------------------------------------------------------------------------
// Shared input plumbing
// ---------------------------------------------------------------------------

struct InputOpts {
    std::string a_path;
    std::string gallery_name;
    std::size_t n = 16;
    std::size_t m = 0;
    std::uint64_t gallery_seed = 0;
    std::string field = "real";
};

void add_input_options(CLI::App* cmd, InputOpts& in, bool with_positional) {
    if (with_positional)
        cmd->add_option("A", in.a_path, "matrix file in the shared text format");
    cmd->add_option("--gallery", in.gallery_name,
                    "gallery input: moler-orth|binomial|frank|frank-modified|rect-binomial|random");
    cmd->add_option("-n,--n", in.n, "gallery order (columns for the rectangular kinds)");
    cmd->add_option("-m,--m", in.m, "gallery rows, rect/random kinds (m >= n)");
    cmd->add_option("--gallery-seed", in.gallery_seed, "seed for the random gallery kind");
    cmd->add_option("--field", in.field, "random gallery field: real|complex")
        ->check(CLI::IsMember({"real", "complex"}));
}

Matrix load_input(const InputOpts& in) {
    const bool have_file = !in.a_path.empty();
    const bool have_gallery = !in.gallery_name.empty();
    if (have_file == have_gallery)
        throw CLI::ValidationError("input", "give exactly one input source: a file or --gallery");
    if (have_file) return read_matrix_file(in.a_path);
    GallerySpec spec;
    spec.name = gallery_name_from_string(in.gallery_name);
    spec.n = in.n;
    spec.m = in.m;
    spec.seed = in.gallery_seed;
    spec.field = in.field == "complex" ? Field::complex : Field::real;
    return make_gallery(spec);
}

struct MethodOpts {
    std::string method = "newton";
    std::string scaling = "auto";
    double delta = 1e-14;
    double epsilon = 1e-14;
    int max_iter = 100;
};

void add_method_options(CLI::App* cmd, MethodOpts& m, bool iterative_only) {
    const std::vector<std::string> iterative = {"newton", "newton-rect", "newton-schulz",
                                                "qr-newton"};
    std::vector<std::string> all = iterative;
    all.insert(all.end(), {"svd", "lyapunov", "complex-step"});
    cmd->add_option("--method", m.method, "solution method")
        ->check(CLI::IsMember(iterative_only ? iterative : all));
    cmd->add_option("--scaling", m.scaling, "newton scaling: none|1inf|fro|1inf-rect|fro-rect")
        ->check(CLI::IsMember({"auto", "none", "1inf", "fro", "1inf-rect", "fro-rect"}));
    cmd->add_option("--delta", m.delta, "factor residual tolerance");
    cmd->add_option("--epsilon", m.epsilon, "derivative residual tolerance");
    cmd->add_option("--max-iter", m.max_iter, "iteration cap");
}

Scaling parse_scaling(const std::string& name, Scheme scheme) {
    if (name == "auto") {
        switch (scheme) {
            case Scheme::newton_square:
                return Scaling::one_inf;
            case Scheme::newton_rect:
                return Scaling::one_inf_rect;
            case Scheme::newton_schulz:
                return Scaling::none;
        }
    }
    if (name == "none") return Scaling::none;
    if (name == "1inf") return Scaling::one_inf;
    if (name == "fro") return Scaling::frobenius;
    if (name == "1inf-rect") return Scaling::one_inf_rect;
    if (name == "fro-rect") return Scaling::frobenius_rect;
    throw CLI::ValidationError("--scaling", "unknown scaling '" + name + "'");
}

IterationConfig build_config(const MethodOpts& m, bool rect_input) {
    IterationConfig c;
    if (m.method == "newton")
        c.scheme = rect_input ? Scheme::newton_rect : Scheme::newton_square;
    else if (m.method == "newton-rect")
        c.scheme = Scheme::newton_rect;
    else if (m.method == "newton-schulz")
        c.scheme = Scheme::newton_schulz;
    else  // qr-newton runs a square scheme on R
        c.scheme = Scheme::newton_square;
    c.scaling = parse_scaling(m.scaling, c.scheme);
    c.delta = m.delta;
    c.epsilon = m.epsilon;
    c.max_iter = m.max_iter;
    return c;
}

std::string sci1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1e", v);
    return buf;
}

std::string sci1_opt(const std::optional<double>& v) { return v ? sci1(*v) : "-"; }

void print_trace_table(std::ostream& out, const std::vector<TraceRow>& trace) {
    char line[256];
    std::snprintf(line, sizeof line, "%4s %9s %9s %9s %9s %9s %9s %9s %9s", "k", "errX", "errE",
                  "alpha", "beta", "gamma", "beta~", "gamma~", "mu");
    out << line << '\n';
    for (const TraceRow& r : trace) {
        std::snprintf(line, sizeof line, "%4d %9s %9s %9s %9s %9s %9s %9s %9s", r.k,
                      sci1_opt(r.err_x).c_str(), sci1_opt(r.err_e).c_str(),
                      sci1(r.alpha_norm).c_str(), sci1(r.beta_norm).c_str(),
                      sci1(r.gamma_norm).c_str(), sci1_opt(r.beta_exact_norm).c_str(),
                      sci1_opt(r.gamma_exact_norm).c_str(), sci1(r.mu).c_str());
        out << line << '\n';
    }
}

void write_or_print(const std::string& out_path, const Matrix& m, const char* label) {
    if (out_path.empty()) {
        write_matrix(std::cout, m);
    } else {
        write_matrix_file(out_path, m);
        std::cout << "wrote " << label << " to " << out_path << '\n';
    }
}

// ---------------------------------------------------------------------------
// compute
// ---------------------------------------------------------------------------

struct ComputeOpts {
    InputOpts input;
    MethodOpts method;
    std::string e_path;
    std::optional<std::uint64_t> e_seed;
    std::string out_path;
};

int run_compute(const ComputeOpts& opt) {
    const Matrix a = load_input(opt.input);
    std::optional<Matrix> e;
    if (!opt.e_path.empty())
        e = read_matrix_file(opt.e_path);
    else if (opt.e_seed)
        e = random_gaussian(a.rows(), a.cols(), *opt.e_seed, Field::real);
    if (e && (e->rows() != a.rows() || e->cols() != a.cols()))
        throw CLI::ValidationError("E", "perturbation shape does not match the input");

    Matrix u, du;
    const bool have_du = e.has_value();
    int iterations = 0;
    bool converged = true;
    const Matrix e_or_zero = e ? *e : Matrix::zeros(a.rows(), a.cols());

    if (opt.method.method == "svd") {
        const auto r = svd_frechet(a, e_or_zero);
        u = r.u;
        du = r.du;
        if (r.near_singular)
            std::cerr << "warning: singular value pair below the near-singular guard\n";
    } else if (opt.method.method == "lyapunov") {
        const auto r = lyapunov_frechet(a, e_or_zero);
        u = r.u;
        du = r.du;
    } else if (opt.method.method == "complex-step") {
        const auto r = complex_step_frechet(a, e_or_zero);
        u = r.u;
        du = r.du;
    } else {
        const IterationConfig config = build_config(opt.method, a.rows() > a.cols());
        const CoupledResult r = opt.method.method == "qr-newton"
                                    ? polar_via_qr(a, e_or_zero, config)
                                    : run_coupled(a, e_or_zero, config);
        u = r.u;
        du = r.du;
        iterations = r.iterations;
        converged = r.converged;
    }

    std::cout << "method:     " << opt.method.method << '\n';
    std::cout << "iterations: " << iterations << '\n';
    std::cout << "converged:  " << (converged ? "yes" : "no") << '\n';
    std::cout << "alpha:      " << sci1(frobenius_norm(residual_alpha(u))) << '\n';
    if (have_du) {
        std::cout << "beta:       " << sci1(frobenius_norm(residual_beta(u, du))) << '\n';
        std::cout << "gamma:      " << sci1(frobenius_norm(residual_gamma(u, du))) << '\n';
    }
    write_or_print(opt.out_path, u, "U");
    if (have_du)
        write_or_print(opt.out_path.empty() ? "" : opt.out_path + ".deriv", du, "K");
    return converged ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------------------------
// trace
// ---------------------------------------------------------------------------

struct TraceOpts {
    InputOpts input;
    MethodOpts method;
    std::string e_path;
    std::uint64_t e_seed = 0;
    bool diagnostic = false;
    std::string format = "table";
    std::string out_path;
};

int run_trace(const TraceOpts& opt) {
    const Matrix a = load_input(opt.input);
    const Matrix e = !opt.e_path.empty()
                         ? read_matrix_file(opt.e_path)
                         : random_gaussian(a.rows(), a.cols(), opt.e_seed, Field::real);
    if (e.rows() != a.rows() || e.cols() != a.cols())
        throw CLI::ValidationError("E", "perturbation shape does not match the input");

    IterationConfig config = build_config(opt.method, a.rows() > a.cols());
    if (opt.diagnostic) {
        const auto ref = svd_frechet(a, e);
        config.diagnostic_reference = std::make_pair(ref.u, ref.du);
    }
    const CoupledResult r = opt.method.method == "qr-newton" ? polar_via_qr(a, e, config)
                                                             : run_coupled(a, e, config);

    std::ostringstream body;
    if (opt.format == "csv")
        write_trace_csv(body, r.trace);
    else
        print_trace_table(body, r.trace);
    if (opt.out_path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream f(opt.out_path);
        if (!f) throw std::runtime_error("cannot open '" + opt.out_path + "' for writing");
        f << body.str();
        std::cout << "wrote trace to " << opt.out_path << '\n';
    }
    std::cout << "iterations: " << r.iterations << '\n';
    std::cout << "converged:  " << (r.converged ? "yes" : "no") << '\n';
    return r.converged ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------------------------
// gallery
// ---------------------------------------------------------------------------

struct GalleryOpts {
    std::string name = "moler-orth";
    std::size_t n = 16;
    std::size_t m = 0;
    std::uint64_t seed = 0;
    std::string field = "real";
    std::string out_path;
};

int run_gallery(const GalleryOpts& opt) {
    GallerySpec spec;
    spec.name = gallery_name_from_string(opt.name);
    spec.n = opt.n;
    spec.m = opt.m;
    spec.seed = opt.seed;
    spec.field = opt.field == "complex" ? Field::complex : Field::real;
    write_or_print(opt.out_path, make_gallery(spec), "matrix");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOpts {
    std::string suite;
    std::uint64_t seed = 7;
    int trials = 0;  // 0: suite default
    double cd_h = 6e-6;
};

bool report(const char* name, double value, double bound) {
    const bool ok = value <= bound;
    std::printf("%-34s %9s  (bound %s)  %s\n", name, sci1(value).c_str(), sci1(bound).c_str(),
                ok ? "pass" : "FAIL");
    return ok;
}

int run_verify_identities(std::uint64_t seed, int trials) {
    bool ok = true;
    int checked = 0;
    double worst_skew = 0.0, worst_sym = 0.0, worst_polar = 0.0;
    for (std::uint64_t s = 0; checked < trials; ++s) {
        const Matrix a = random_gaussian(6, 6, 1000 * seed + s, Field::real);
        const auto f = svd(a);
        if (f.sigma.front() > 1e3 * f.sigma.back()) continue;
        ++checked;
        const Matrix e = random_gaussian(6, 6, 777000 + 1000 * seed + s, Field::real);
        const BlockSignChecks checks = verify_block_sign(a, e);
        worst_skew = std::max(worst_skew, checks.skew_variant.deviation);
        worst_sym = std::max(worst_sym, checks.sym_variant.deviation);
        if (checks.polar_variant)
            worst_polar = std::max(worst_polar, checks.polar_variant->deviation);
    }
    std::printf("identities suite: %d cases, n=6, kappa <= 1e3\n", checked);
    ok &= report("sign([[H,W],[0,-H]]) identity", worst_skew, 1e-9);
    ok &= report("sign([[H,S],[0,H]]) identity", worst_sym, 1e-9);
    ok &= report("sign([[0,A],[A*,0]]) identity", worst_polar, 1e-9);
    return ok ? kExitOk : kExitNumerical;
}

int run_verify_oracles(std::uint64_t seed, int trials, double cd_h) {
    bool ok = true;
    double worst_lyap = 0.0, worst_cs = 0.0, worst_cd = 0.0, worst_newton = 0.0;
    for (std::size_t n : {4, 8, 16}) {
        int checked = 0;
        for (std::uint64_t s = seed; checked < trials; ++s) {
            const Matrix a = random_gaussian(n, n, 10000 * n + s, Field::real);
            const auto f = svd(a);
            if (f.sigma.front() > 1e2 * f.sigma.back()) continue;
            ++checked;
            const Matrix e = random_gaussian(n, n, 888000 + 10000 * n + s, Field::real);
            const Matrix k = svd_frechet(a, e).du;
            const double scale = frobenius_norm(k);
            worst_lyap = std::max(worst_lyap,
                                  frobenius_norm(lyapunov_frechet(a, e).du - k) / scale);
            worst_cs = std::max(worst_cs,
                                frobenius_norm(complex_step_frechet(a, e).du - k) / scale);
            worst_cd = std::max(
                worst_cd, frobenius_norm(central_difference_frechet(a, e, cd_h).du - k) / scale);
            IterationConfig c;
            c.scaling = Scaling::one_inf;
            worst_newton =
                std::max(worst_newton, frobenius_norm(run_coupled(a, e, c).du - k) / scale);
        }
    }
    std::printf("oracles suite: %d cases per size, n in {4, 8, 16}\n", trials);
    ok &= report("lyapunov vs svd", worst_lyap, 1e-10);
    ok &= report("complex-step vs svd", worst_cs, 1e-10);
    ok &= report("central-difference vs svd", worst_cd, 1e-5);
    ok &= report("newton coupled vs svd", worst_newton, 1e-11);
    return ok ? kExitOk : kExitNumerical;
}

int run_verify_appendix(std::uint64_t seed, int trials) {
    bool ok = true;
    double ratio_lo = 1e300, ratio_hi = 0.0, worst_identity = 0.0;
    for (double t : {0.2, 0.1, 0.05}) {
        for (int i = 0; i < trials; ++i) {
            const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
            const auto coarse = residual_accuracy_probe(s, t);
            const auto fine = residual_accuracy_probe(s, t / 2.0);
            ratio_lo = std::min({ratio_lo, coarse.beta_error / fine.beta_error,
                                 coarse.gamma_error / fine.gamma_error});
            ratio_hi = std::max({ratio_hi, coarse.beta_error / fine.beta_error,
                                 coarse.gamma_error / fine.gamma_error});
            worst_identity = std::max(
                worst_identity, coarse.identity_residual / (coarse.x_norm * coarse.e_norm));
        }
    }
    std::printf("appendix suite: %d seeds, t in {0.2, 0.1, 0.05}\n", trials);
    std::printf("%-34s [%s, %s]  (want [3.2e+00, 4.8e+00])  %s\n", "halving error ratios",
                sci1(ratio_lo).c_str(), sci1(ratio_hi).c_str(),
                ratio_lo >= 3.2 && ratio_hi <= 4.8 ? "pass" : "FAIL");
    ok &= ratio_lo >= 3.2 && ratio_hi <= 4.8;
    ok &= report("beta+gamma identity residual", worst_identity, 1e-13);
    return ok ? kExitOk : kExitNumerical;
}

int run_verify(const VerifyOpts& opt) {
    if (opt.suite == "identities")
        return run_verify_identities(opt.seed, opt.trials ? opt.trials : 20);
    if (opt.suite == "oracles")
        return run_verify_oracles(opt.seed, opt.trials ? opt.trials : 10, opt.cd_h);
    return run_verify_appendix(opt.seed, opt.trials ? opt.trials : 10);
}

// ---------------------------------------------------------------------------
// condition
// ---------------------------------------------------------------------------

struct ConditionOpts {
    InputOpts input;
    int iters = 200;
    std::uint64_t seed = 1;
};

int run_condition(const ConditionOpts& opt) {
    const Matrix a = load_input(opt.input);
    const auto f = svd(a);
    std::printf("sigma_min:            %s\n", sci1(f.sigma.back()).c_str());
    std::printf("kappa(P, A):          %s\n", sci1(condition_polar(a)).c_str());
    if (a.is_square() && a.is_real() && a.rows() >= 2)
        std::printf("kappa real square:    %s\n",
                    sci1(condition_polar_real_square(a)).c_str());
    std::printf("power-method sigma_n: %s  (%d iterations)\n",
                sci1(power_sigma_min(a, opt.iters, opt.seed)).c_str(), opt.iters);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polar decomposition and its Frechet derivative via coupled iterations"};
    app.require_subcommand(1);

    ComputeOpts compute;
    auto* cmd_compute = app.add_subcommand(
        "compute", "compute U (and the derivative K when a direction E is given)");
    add_input_options(cmd_compute, compute.input, true);
    cmd_compute->add_option("E", compute.e_path, "direction matrix file");
    add_method_options(cmd_compute, compute.method, false);
    std::uint64_t compute_seed = 0;
    auto* compute_seed_opt =
        cmd_compute->add_option("--seed", compute_seed, "draw a Gaussian direction E");
    cmd_compute->add_option("--out", compute.out_path,
                            "write U here and K to <out>.deriv; default prints to stdout");

    TraceOpts trace;
    auto* cmd_trace = app.add_subcommand("trace", "emit the per-iteration residual table");
    add_input_options(cmd_trace, trace.input, true);
    cmd_trace->add_option("E", trace.e_path, "direction matrix file");
    add_method_options(cmd_trace, trace.method, true);
    cmd_trace->add_option("--seed", trace.e_seed, "seed for the default Gaussian direction");
    cmd_trace->add_flag("--diagnostic", trace.diagnostic,
                        "compute the svd reference and record error columns");
    cmd_trace->add_option("--format", trace.format, "table|csv")
        ->check(CLI::IsMember({"table", "csv"}));
    cmd_trace->add_option("--out", trace.out_path, "write the table to a file");

    GalleryOpts gallery;
    auto* cmd_gallery = app.add_subcommand("gallery", "emit a test matrix");
    cmd_gallery
        ->add_option("--name", gallery.name,
                     "moler-orth|binomial|frank|frank-modified|rect-binomial|random")
        ->required();
    cmd_gallery->add_option("-n,--n", gallery.n, "order / column count");
    cmd_gallery->add_option("-m,--m", gallery.m, "row count (rect/random)");
    cmd_gallery->add_option("--seed", gallery.seed, "seed (random)");
    cmd_gallery->add_option("--field", gallery.field, "real|complex (random)")
        ->check(CLI::IsMember({"real", "complex"}));
    cmd_gallery->add_option("--out", gallery.out_path, "output path; default stdout");

    VerifyOpts verify;
    auto* cmd_verify = app.add_subcommand("verify", "run a property suite");
    cmd_verify->add_option("--suite", verify.suite, "identities|oracles|appendix")
        ->required()
        ->check(CLI::IsMember({"identities", "oracles", "appendix"}));
    cmd_verify->add_option("--seed", verify.seed, "base seed");
    cmd_verify->add_option("--trials", verify.trials, "cases per suite");
    cmd_verify->add_option("--cd-h", verify.cd_h, "central-difference step override");

    ConditionOpts condition;
    auto* cmd_condition = app.add_subcommand("condition", "condition numbers of the polar map");
    add_input_options(cmd_condition, condition.input, true);
    cmd_condition->add_option("--iters", condition.iters, "power-method iterations");
    cmd_condition->add_option("--seed", condition.seed, "power-method start seed");

    try {
        app.parse(argc, argv);
        if (cmd_compute->parsed()) {
            if (compute_seed_opt->count()) compute.e_seed = compute_seed;
            return run_compute(compute);
        }
        if (cmd_trace->parsed()) return run_trace(trace);
        if (cmd_gallery->parsed()) return run_gallery(gallery);
        if (cmd_verify->parsed()) return run_verify(verify);
        if (cmd_condition->parsed()) return run_condition(condition);
        return kExitInput;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NotConvergedError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const SingularMatrixError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const RankDeficientError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const NotPositiveDefiniteError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ComplexInputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
}
