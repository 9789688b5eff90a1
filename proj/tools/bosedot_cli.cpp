// bosedot_cli.cpp — configuration-driven driver: thermo, spectrum, virial, levelshift, rte, manifest

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <numbers>
#include <thread>

#include <CLI11.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <json.hpp>

#include "bosedot/config.hpp"
#include "bosedot/dynamics.hpp"
#include "bosedot/errors.hpp"
#include "bosedot/quadrature.hpp"
#include "bosedot/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bosedot;

namespace {

constexpr double pi = std::numbers::pi;

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

struct Run {
    RunConfig cfg;
    fs::path out;
    json manifest;
    std::string hash;

    bool wants(const std::string& fmt) const {
        return std::find(cfg.formats.begin(), cfg.formats.end(), fmt) != cfg.formats.end();
    }

    void write_json(const std::string& name, json j) const {
        j["manifest_hash"] = hash;
        std::ofstream f(out / name);
        f << std::setw(2) << j << '\n';
    }

    // CSV with a leading comment line linking the manifest.
    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) const {
        std::ofstream f(out / name);
        f << "# manifest " << hash << '\n';
        for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
        f << '\n' << std::setprecision(17);
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
            f << '\n';
        }
    }
};

// Runs task(i) for i in [0, n) on at most `jobs` threads; rethrows the lowest-index failure.
template <class F>
void run_pool(std::size_t n, int jobs, F&& task) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int k = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    std::vector<std::thread> pool;
    for (int t = 1; t < k; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

TruncationSpec truncation_for(const RunConfig& cfg, const ModeGrid& grid) {
    TruncationSpec t = cfg.trunc;
    t.n_modes = grid.size();
    return t;
}

Run prepare(const RunConfig& cfg, const std::string& out) {
    Run run{cfg, out.empty() ? fs::path(cfg.out_dir) : fs::path(out), {}, {}};
    fs::create_directories(run.out);
    const auto grid = cfg.build_grid();
    const auto trunc = truncation_for(cfg, grid);
    trunc.validate();
    const auto thermo = reservoir_thermo(cfg.beta, cfg.rho_bar, cfg.dispersion);
    const std::size_t fd = trunc.field_dimension();
    json xi = json::array();
    for (const auto& p : cfg.xi_points()) xi.push_back({{"r", p.r}, {"theta", p.theta}});
    run.manifest = {{"config", cfg.to_json()},
                    {"derived",
                     {{"rho_crit", thermo.rho_crit},
                      {"rho0", thermo.rho0},
                      {"fugacity", thermo.z_inf},
                      {"grid_modes", grid.size()},
                      {"grid_step", grid.step},
                      {"coupling_norm2", grid.coupling_norm2()},
                      {"field_dimension", fd},
                      {"dimension", fd == SIZE_MAX ? SIZE_MAX : fd * std::size_t(cfg.dot.d * cfg.dot.d)},
                      {"xi_points", xi}}}};
    run.hash = manifest_hash(run.manifest);
    run.write_json("manifest.json", run.manifest);
    return run;
}

struct Task {
    double lambda{0.0};
    std::optional<CondensatePoint> xi;
};

std::vector<Task> sweep_tasks(const RunConfig& cfg) {
    std::vector<Task> tasks;
    const auto pts = cfg.xi_points();
    for (double l : cfg.lambdas) {
        if (pts.empty()) tasks.push_back({l, std::nullopt});
        for (const auto& p : pts) tasks.push_back({l, p});
    }
    return tasks;
}

json task_json(const Task& t) {
    json j{{"lambda", t.lambda}};
    j["xi"] = t.xi ? json{{"r", t.xi->r}, {"theta", t.xi->theta}} : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------- thermo

json cmd_thermo(const Run& run) {
    const auto& cfg = run.cfg;
    const double b = cfg.beta;
    json rep;

    const double rel = critical_density(b, Dispersion::relativistic);
    const double rel_oracle = boost::math::zeta(3.0) / (pi * pi * b * b * b);
    const double nonrel = critical_density(b, Dispersion::nonrelativistic);
    const double nonrel_oracle = boost::math::zeta(1.5) * std::pow(4.0 * pi * b, -1.5);
    rep["critical_density"] = {
        {"relativistic", {{"value", rel}, {"zeta_oracle", rel_oracle}, {"rel_error", std::abs(rel / rel_oracle - 1)}}},
        {"nonrelativistic",
         {{"value", nonrel}, {"zeta_oracle", nonrel_oracle}, {"rel_error", std::abs(nonrel / nonrel_oracle - 1)}}}};

    const auto th = reservoir_thermo(b, cfg.rho_bar, cfg.dispersion);
    rep["thermo"] = {{"rho_bar", th.rho_bar}, {"rho_crit", th.rho_crit}, {"rho0", th.rho0},
                     {"fugacity", th.z_inf}, {"supercritical", th.supercritical()}};

    std::vector<std::vector<double>> planck;
    for (int i = 1; i <= 64; ++i) {
        const double w = cfg.grid.omega_max * i / 64.0;
        planck.push_back({w, planck_density(b, w), bose_occupation(b, w)});
    }

    // Kac density: only meaningful on the supercritical branch.
    const double rc = th.rho_crit;
    const double rho_bar = th.supercritical() ? th.rho_bar : rc + 1.0;
    const double rho0 = rho_bar - rc;
    const auto norm = quad::integrate([&](double r) { return kac_density(r, rho_bar, rc); }, rc, INFINITY);
    const auto mean = quad::integrate([&](double r) { return r * kac_density(r, rho_bar, rc); }, rc, INFINITY);
    rep["kac"] = {{"rho_bar", rho_bar}, {"normalization", norm.value}, {"mean", mean.value},
                  {"normalization_error", std::abs(norm.value - 1.0)}, {"mean_error", std::abs(mean.value - rho_bar)}};

    // Laplace/Bessel identity in f(0): Bessel factors averaged with the Kac weight give the Gaussian factor.
    const auto f = TestFunction::gaussian(0.05, 1.0);
    const double af0 = std::abs(f.f0());
    const auto lhs = quad::integrate(
        [&](double s) {
            return std::exp(-s / rho0) * boost::math::cyl_bessel_j(0, std::sqrt(2.0 * 8.0 * pi * pi * pi * s) * af0) / rho0;
        },
        0.0, INFINITY);
    const double rhs = std::exp(-4.0 * pi * pi * pi * rho0 * af0 * af0);
    // The same identity at the level of generating functionals.
    const auto gc = generating_functional(f, ensemble::GrandCanonical{b, rho_bar}, cfg.dispersion);
    const auto mix = quad::integrate_complex(
        [&](double r) {
            return kac_density(r, rho_bar, rc) * generating_functional(f, ensemble::ArakiWoods{b, r - rc}, cfg.dispersion);
        },
        rc, INFINITY);
    rep["laplace_bessel"] = {{"f0", af0}, {"rho0", rho0}, {"laplace", lhs.value}, {"gaussian", rhs},
                             {"residual", std::abs(lhs.value - rhs)}, {"kac_mixture", cjson(mix)},
                             {"grand_canonical", cjson(gc)}, {"functional_residual", std::abs(mix - gc)}};

    // Uniform-theta phase average against its Bessel closed form.
    const double r_xi = rc + cfg.measure.r_minus_crit;
    const cplx f0{0.3, 0.1};
    const cplx avg = theta_averaged_phase_factor(f0, r_xi, rc, 64);
    const double j0 = phase_bessel_closed_form(f0, r_xi, rc);
    rep["phase_average"] = {{"r_minus_crit", cfg.measure.r_minus_crit}, {"average", cjson(avg)},
                            {"bessel", j0}, {"residual", std::abs(avg - j0)}};

    json cl = json::array();
    const auto g = TestFunction::gaussian(0.3, 1.0);
    for (double x : {1.0, 3.0, 10.0}) {
        auto e = two_point_cluster(f, g, x, ensemble::Extremal{b, {r_xi, 0.0}}, cfg.dispersion);
        auto c = two_point_cluster(f, g, x, ensemble::GrandCanonical{b, rho_bar}, cfg.dispersion);
        cl.push_back({{"x", x},
                      {"extremal_ratio", cjson(e.ratio)},
                      {"extremal_approach", std::abs(e.value_at_x - e.limit)},
                      {"grand_canonical_ratio", cjson(c.ratio)},
                      {"grand_canonical_approach", std::abs(c.value_at_x - c.limit)}});
    }
    rep["cluster"] = cl;

    if (run.wants("json")) run.write_json("thermo.json", rep);
    if (run.wants("csv")) {
        run.write_csv("planck.csv", {"omega", "planck_density", "occupation"}, planck);
        run.write_csv("thermo.csv", {"rho_crit_rel_error", "rho_crit_nonrel_error", "kac_normalization", "kac_mean",
                                     "laplace_residual", "phase_residual"},
                      {{rep["critical_density"]["relativistic"]["rel_error"],
                        rep["critical_density"]["nonrelativistic"]["rel_error"], norm.value, mean.value,
                        std::abs(lhs.value - rhs), std::abs(avg - j0)}});
    }
    return rep;
}

// ---------------------------------------------------------------------------- spectrum / virial

json cmd_spectrum(const Run& run, int jobs, bool virial_only) {
    const auto& cfg = run.cfg;
    const auto grid = cfg.build_grid();
    const auto trunc = truncation_for(cfg, grid);
    const double rc = cfg.rho_crit();
    const auto tasks = sweep_tasks(cfg);
    std::vector<json> results(tasks.size());
    std::vector<std::vector<double>> rows(tasks.size());

    run_pool(tasks.size(), jobs, [&](std::size_t k) {
        const auto& t = tasks[k];
        auto bundle = assemble_bundle(cfg.dot, grid, trunc, cfg.beta, t.lambda, t.xi, rc);
        const bool can_conj = cfg.conjugate != ConjugateScheme::log_grid_dilation || grid.spacing == Spacing::log;
        if (virial_only && !can_conj)
            throw ValidationError("log_grid_dilation conjugate needs a log-spaced grid");
        json j = task_json(t);
        if (can_conj) attach_conjugate(bundle, cfg.conjugate, cfg.seed);
        else j["warnings"].push_back("conjugate skipped: scheme needs a log-spaced grid");
        auto opt = cfg.solver;
        opt.seed = cfg.seed;
        auto rep = solve_near_zero(bundle, opt);
        double a_norm = 0.0, worst = 0.0;
        if (bundle.conj) {
            a_norm = krylov::spectral_norm(bundle.conj->A.m, 80, static_cast<unsigned>(cfg.seed));
            for (const auto& d : rep.diagnostics)
                worst = std::max(worst, std::abs(d.virial) / (rep.norm_L * a_norm));
        }
        j["virial"] = {{"A_norm", a_norm}, {"max_relative", bundle.conj ? json(worst) : json(nullptr)}};
        if (virial_only) {
            json v = json::array();
            for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i)
                v.push_back({{"eigenvalue", rep.eigenvalues[i]}, {"residual", rep.residuals[i]},
                             {"virial", rep.diagnostics[i].virial}});
            j["eigenpairs"] = v;
            rows[k] = {t.lambda, t.xi ? t.xi->r : NAN, t.xi ? t.xi->theta : NAN, worst};
        } else {
            const auto kms = kms_vector(bundle);
            j["kms"] = {{"residual", kms.residual}, {"krylov_error", kms.krylov_error}};
            j["spectral"] = rep.to_json();
            double overlap = NAN, lw = NAN, panel = NAN;
            if (rep.kernel_dimension > 0) {
                const auto psi = project_onto(rep.kernel_basis, kms.omega);
                const auto ks = kernel_structure(bundle, rep.kernel_basis, psi);
                overlap = ks.overlap;
                lw = lambda_weight(bundle, psi);
                panel = ks.max_panel_overlap;
                j["kernel_vector"] = {{"lambda_weight", lw},
                                      {"structure_overlap", ks.overlap},
                                      {"orthogonal_dimension", ks.orthogonal_dimension},
                                      {"panel_overlaps", ks.panel_overlaps},
                                      {"max_panel_overlap", ks.max_panel_overlap}};
            }
            rows[k] = {t.lambda, t.xi ? t.xi->r : NAN, t.xi ? t.xi->theta : NAN, double(rep.kernel_dimension),
                       overlap, lw, panel, kms.residual, worst};
        }
        results[k] = std::move(j);
        run.write_json((virial_only ? "virial_" : "spectrum_") + std::to_string(k) + ".json", results[k]);
    });

    json merged{{"tasks", results}};
    const std::string stem = virial_only ? "virial" : "spectrum";
    if (run.wants("json")) run.write_json(stem + ".json", merged);
    if (run.wants("csv")) {
        if (virial_only) run.write_csv("virial.csv", {"lambda", "xi_r", "xi_theta", "max_relative_virial"}, rows);
        else
            run.write_csv("spectrum.csv",
                          {"lambda", "xi_r", "xi_theta", "kernel_dimension", "structure_overlap", "lambda_weight",
                           "max_panel_overlap", "kms_residual", "max_relative_virial"},
                          rows);
    }
    return merged;
}

// ---------------------------------------------------------------------------- levelshift

ModeGrid sandwich_grid(const RunConfig& cfg, double eps) {
    if (cfg.h_over_eps <= 0.0) return cfg.build_grid();
    GridSpec spec = cfg.grid;
    spec.spacing = Spacing::log;
    const double step = cfg.h_over_eps * eps;
    spec.n_modes = static_cast<int>(std::ceil(std::log(spec.omega_max / spec.omega_min) / step));
    return discretize(cfg.build_form_factor(), cfg.dispersion, cfg.beta, spec, cfg.dot.bohr_frequencies());
}

json cmd_levelshift(const Run& run, int jobs) {
    const auto& cfg = run.cfg;
    const auto g = cfg.build_form_factor();
    auto ls = level_shift(cfg.dot, cfg.beta, shell_weight(g, cfg.dispersion, 1.0));

    std::vector<json> sweep(cfg.eps.size());
    std::vector<std::vector<double>> rows(cfg.eps.size());
    run_pool(cfg.eps.size(), jobs, [&](std::size_t k) {
        const double eps = cfg.eps[k];
        const auto grid = sandwich_grid(cfg, eps);
        TruncationSpec trunc = cfg.trunc;
        trunc.n_modes = grid.size();
        trunc.n_max = 1;
        const auto bundle = assemble_bundle(cfg.dot, grid, trunc, cfg.beta, cfg.lambdas.front());
        const auto s = resolvent_sandwich(bundle, eps, cfg.rho_cut);
        const double lo = grid.modes.front().omega, hi = grid.modes.back().omega;
        const auto oracle = quad::integrate(
            [&](double w) { return 2.0 * eps * coupling_density(g, cfg.dispersion, w) / ((w - 1) * (w - 1) + eps * eps); },
            lo, hi, {1e-12, 1e-10, 18});
        json j = s.to_json();
        j["eps"] = eps;
        j["modes"] = grid.size();
        j["lorentzian_oracle"] = oracle.value;
        j["c_rel_error"] = std::abs(s.c_fit / oracle.value - 1.0);
        sweep[k] = j;
        rows[k] = {eps, s.h_over_eps, s.misfit, s.c_fit, oracle.value, s.gibbs_overlap};
    });

    // eps is listed in decreasing order by convention; check misfit along that order.
    bool monotone = true;
    for (std::size_t k = 1; k < rows.size(); ++k) monotone = monotone && rows[k][2] < rows[k - 1][2];
    if (!rows.empty()) ls.alignment = rows.back()[5];
    const auto fgr = fgr_check(cfg.build_grid(), cfg.dot, cfg.fgr_window);

    json rep{{"level_shift", ls.to_json()}, {"sandwich", sweep}, {"misfit_monotone", monotone}, {"fgr", fgr.to_json()}};
    if (run.wants("json")) run.write_json("levelshift.json", rep);
    if (run.wants("csv"))
        run.write_csv("levelshift.csv", {"eps", "h_over_eps", "misfit", "c_fit", "lorentzian_oracle", "gibbs_overlap"},
                      rows);
    return rep;
}

// ---------------------------------------------------------------------------- rte

json cmd_rte(const Run& run, int jobs) {
    const auto& cfg = run.cfg;
    const auto grid = cfg.build_grid();
    const auto trunc = truncation_for(cfg, grid);
    const double rc = cfg.rho_crit();
    const auto tasks = sweep_tasks(cfg);
    const auto A = named_dot_matrix(cfg.dot, cfg.observable_A);
    const auto B = named_dot_matrix(cfg.dot, cfg.observable_B);

    // Per-xi results are tied to the grid and truncation, not to lambda or xi.
    const std::string grid_hash = manifest_hash({{"grid", run.manifest["config"]["grid"]},
                                                 {"trunc", run.manifest["config"]["trunc"]},
                                                 {"reservoir", run.manifest["config"]["reservoir"]},
                                                 {"dot", run.manifest["config"]["dot"]}});

    std::vector<json> results(tasks.size());
    std::vector<XiResult> xi_results(tasks.size());
    std::vector<std::vector<std::vector<double>>> series(tasks.size());
    run_pool(tasks.size(), jobs, [&](std::size_t k) {
        const auto& t = tasks[k];
        const auto bundle = assemble_bundle(cfg.dot, grid, trunc, cfg.beta, t.lambda, t.xi, rc);
        const auto es = diagonalize(bundle.L_lambda.m, cfg.solver.dense_limit);
        const auto kms = kms_vector(bundle);
        json j = task_json(t);
        json per_t = json::array();
        DeviationReport last;
        for (double T : cfg.T) {
            last = rte_deviation(bundle, es, kms.omega, A, B, T, cfg.solver.kernel_tol_rel);
            json d = last.to_json();
            d["T"] = T;
            per_t.push_back(d);
            series[k].push_back({double(k), t.lambda, T, last.finite_T_mean.real(), last.finite_T_mean.imag(),
                                 last.limit.real(), last.limit.imag(), last.normalized});
        }
        if (cfg.T.empty()) last = rte_deviation(bundle, es, kms.omega, A, B, 0.0, cfg.solver.kernel_tol_rel);
        j["deviation"] = per_t;
        j["limit"] = cjson(last.limit);
        j["normalized_deviation"] = last.normalized;
        j["kms_residual"] = kms.residual;
        results[k] = j;
        if (t.xi) xi_results[k] = {*t.xi, last.limit, last.omega_BB, last.omega_A, grid_hash};
        run.write_json("rte_task_" + std::to_string(k) + ".json", j);
    });

    json rep{{"observables", {{"A", cfg.observable_A}, {"B", cfg.observable_B}}}, {"tasks", results}};
    if (cfg.condensate) {
        const auto mu = cfg.xi_measure();
        json agg = json::array();
        for (double l : cfg.lambdas) {
            std::vector<XiResult> sel;
            for (std::size_t k = 0; k < tasks.size(); ++k)
                if (tasks[k].lambda == l) sel.push_back(xi_results[k]);
            json a = superpose_xi(mu, sel).to_json();
            a["lambda"] = l;
            agg.push_back(a);
        }
        rep["aggregate"] = agg;
    }
    if (run.wants("json")) run.write_json("rte.json", rep);
    if (run.wants("csv")) {
        std::vector<std::vector<double>> rows;
        for (const auto& s : series) rows.insert(rows.end(), s.begin(), s.end());
        run.write_csv("rte_timeseries.csv",
                      {"task", "lambda", "T", "mean_re", "mean_im", "limit_re", "limit_im", "normalized_deviation"},
                      rows);
    }
    return rep;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bosonic-reservoir quantum dot: thermodynamics, Liouvillian spectra and return to equilibrium"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    std::string config_path, out_dir, format;
    int jobs = 0;
    long long seed = -1;
    app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides outputs.dir)");
    app.add_option("--jobs", jobs, "worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "seed for solver start vectors and random conjugates");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));
    const std::pair<const char*, const char*> commands[]{
        {"thermo", "free-gas densities, Kac mixture, condensate phase and cluster checks"},
        {"spectrum", "near-zero eigenpairs, kernel structure and KMS projection per (lambda, xi)"},
        {"virial", "expectation of the commutator C1 in each eigenpair"},
        {"levelshift", "level-shift matrix, resolvent sandwich sweep and resonance weights"},
        {"rte", "ergodic means and return-to-equilibrium deviation, superposed over xi"},
        {"manifest", "write the resolved configuration and derived quantities"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto cfg = RunConfig::from_file(config_path);
        if (seed >= 0) cfg.seed = static_cast<unsigned long long>(seed);
        if (!format.empty()) cfg.formats = {format};
        if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        cfg.jobs = jobs;
        const Run run = prepare(cfg, out_dir);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "thermo") cmd_thermo(run);
        else if (cmd == "spectrum") cmd_spectrum(run, jobs, false);
        else if (cmd == "virial") cmd_spectrum(run, jobs, true);
        else if (cmd == "levelshift") cmd_levelshift(run, jobs);
        else if (cmd == "rte") cmd_rte(run, jobs);
        std::cout << cmd << ": wrote " << run.out.string() << " (manifest " << run.hash << ")\n";
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << '\n';
        return 3;
    } catch (const DimensionCapError& e) {
        std::cerr << "dimension cap: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
