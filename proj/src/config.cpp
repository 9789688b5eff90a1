// config.cpp — schema-checked JSON configuration

#include "bosedot/config.hpp"

#include <fstream>
#include <numbers>
#include <set>

#include "bosedot/errors.hpp"

namespace bosedot {
namespace {

using nlohmann::json;

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    require(j.is_object(), where + " must be an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        require(ok.count(it.key()) != 0, "unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(where + "." + key + ": " + e.what());
    }
}

template <class T>
void read_list(const json& j, const char* key, std::vector<T>& out, const std::string& where) {
    if (!j.contains(key)) return;
    if (j.at(key).is_array()) read(j, key, out, where);
    else {
        T v{};
        read(j, key, v, where);
        out = {v};
    }
}

} // namespace

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    allow_keys(j, "config", {"dot", "reservoir", "grid", "trunc", "physics", "solver", "observables", "outputs", "seed"});
    if (j.contains("dot")) {
        const auto& d = j["dot"];
        allow_keys(d, "dot", {"d", "energies"});
        read(d, "d", c.dot.d, "dot");
        read(d, "energies", c.dot.energies, "dot");
    }
    if (j.contains("reservoir")) {
        const auto& r = j["reservoir"];
        allow_keys(r, "reservoir", {"dispersion", "form_factor", "beta", "rho_bar"});
        std::string disp = to_string(c.dispersion);
        read(r, "dispersion", disp, "reservoir");
        c.dispersion = parse_dispersion(disp);
        read(r, "beta", c.beta, "reservoir");
        read(r, "rho_bar", c.rho_bar, "reservoir");
        if (r.contains("form_factor")) {
            const auto& f = r["form_factor"];
            allow_keys(f, "reservoir.form_factor", {"preset", "amplitude", "width", "p", "table"});
            read(f, "preset", c.form_factor.preset, "form_factor");
            read(f, "amplitude", c.form_factor.amplitude, "form_factor");
            read(f, "width", c.form_factor.width, "form_factor");
            read(f, "p", c.form_factor.p, "form_factor");
            read(f, "table", c.form_factor.table, "form_factor");
        }
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        allow_keys(g, "grid", {"n_modes", "omega_max", "omega_min", "spacing", "collisions"});
        read(g, "n_modes", c.grid.n_modes, "grid");
        read(g, "omega_max", c.grid.omega_max, "grid");
        read(g, "omega_min", c.grid.omega_min, "grid");
        std::string sp = to_string(c.grid.spacing);
        read(g, "spacing", sp, "grid");
        c.grid.spacing = parse_spacing(sp);
        std::string col = "perturb";
        read(g, "collisions", col, "grid");
        if (col == "perturb") c.grid.collisions = CollisionPolicy::perturb;
        else if (col == "reject") c.grid.collisions = CollisionPolicy::reject;
        else if (col == "resonance") c.grid.collisions = CollisionPolicy::resonance;
        else throw ValidationError("grid.collisions must be perturb, reject or resonance");
    }
    if (j.contains("trunc")) {
        const auto& t = j["trunc"];
        allow_keys(t, "trunc", {"n_max", "dim_cap"});
        read(t, "n_max", c.trunc.n_max, "trunc");
        read(t, "dim_cap", c.trunc.dim_cap, "trunc");
    }
    c.trunc.n_modes = c.grid.n_modes;
    if (j.contains("physics")) {
        const auto& p = j["physics"];
        allow_keys(p, "physics", {"lambda", "condensate", "xi", "mu"});
        read_list(p, "lambda", c.lambdas, "physics");
        read(p, "condensate", c.condensate, "physics");
        if (p.contains("xi")) {
            require(p["xi"].is_array(), "physics.xi must be an array");
            for (const auto& x : p["xi"]) {
                allow_keys(x, "physics.xi[]", {"r_minus_crit", "theta"});
                double off = 0.0, th = 0.0;
                read(x, "r_minus_crit", off, "xi");
                read(x, "theta", th, "xi");
                c.xi_offsets.push_back(off);
                c.xi_thetas.push_back(th);
            }
        }
        if (p.contains("mu")) {
            const auto& m = p["mu"];
            allow_keys(m, "physics.mu", {"kind", "n_r", "n_theta", "r_minus_crit"});
            read(m, "kind", c.measure.kind, "mu");
            read(m, "n_r", c.measure.n_r, "mu");
            read(m, "n_theta", c.measure.n_theta, "mu");
            read(m, "r_minus_crit", c.measure.r_minus_crit, "mu");
        }
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        allow_keys(s, "solver", {"tol", "kernel_tol", "k_eigs", "T", "conjugate", "eps", "rho_cut", "fgr_window",
                                 "dense_limit", "max_iter", "h_over_eps"});
        read(s, "tol", c.solver.tol, "solver");
        read(s, "kernel_tol", c.solver.kernel_tol_rel, "solver");
        read(s, "k_eigs", c.solver.k, "solver");
        read(s, "dense_limit", c.solver.dense_limit, "solver");
        read(s, "max_iter", c.solver.max_iter, "solver");
        read_list(s, "T", c.T, "solver");
        std::string cs = to_string(c.conjugate);
        read(s, "conjugate", cs, "solver");
        c.conjugate = parse_conjugate_scheme(cs);
        read_list(s, "eps", c.eps, "solver");
        read(s, "rho_cut", c.rho_cut, "solver");
        read(s, "fgr_window", c.fgr_window, "solver");
        read(s, "h_over_eps", c.h_over_eps, "solver");
    }
    if (j.contains("observables")) {
        const auto& o = j["observables"];
        allow_keys(o, "observables", {"A", "B"});
        read(o, "A", c.observable_A, "observables");
        read(o, "B", c.observable_B, "observables");
    }
    if (j.contains("outputs")) {
        const auto& o = j["outputs"];
        allow_keys(o, "outputs", {"dir", "formats"});
        read(o, "dir", c.out_dir, "outputs");
        read_list(o, "formats", c.formats, "outputs");
    }
    read(j, "seed", c.seed, "config");

    c.dot.validate();
    c.trunc.validate();
    require(c.beta > 0.0, "reservoir.beta must be positive");
    require(!c.lambdas.empty(), "physics.lambda must not be empty");
    require(c.solver.k >= 1, "solver.k_eigs must be positive");
    for (double t : c.T) require(t > 0.0, "solver.T entries must be positive");
    for (double e : c.eps) require(e > 0.0, "solver.eps entries must be positive");
    require(c.h_over_eps >= 0.0, "solver.h_over_eps must be nonnegative");
    for (const auto& f : c.formats) require(f == "json" || f == "csv", "outputs.formats entries must be json or csv");
    for (double off : c.xi_offsets) require(off >= 0.0, "xi points need r - rho_crit >= 0");
    require(c.measure.kind == "atoms" || c.measure.kind == "uniform_theta" || c.measure.kind == "kac",
            "physics.mu.kind must be atoms, uniform_theta or kac");
    named_dot_matrix(c.dot, c.observable_A);
    named_dot_matrix(c.dot, c.observable_B);
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    json xi = json::array();
    for (std::size_t i = 0; i < xi_offsets.size(); ++i) xi.push_back({{"r_minus_crit", xi_offsets[i]}, {"theta", xi_thetas[i]}});
    std::string col = grid.collisions == CollisionPolicy::perturb ? "perturb"
                      : grid.collisions == CollisionPolicy::reject ? "reject" : "resonance";
    return {
        {"dot", {{"d", dot.d}, {"energies", dot.resolved_energies()}}},
        {"reservoir",
         {{"dispersion", to_string(dispersion)},
          {"beta", beta},
          {"rho_bar", rho_bar},
          {"form_factor",
           {{"preset", form_factor.preset}, {"amplitude", form_factor.amplitude}, {"width", form_factor.width},
            {"p", form_factor.p}, {"table", form_factor.table}}}}},
        {"grid",
         {{"n_modes", grid.n_modes}, {"omega_max", grid.omega_max}, {"omega_min", grid.omega_min},
          {"spacing", to_string(grid.spacing)}, {"collisions", col}}},
        {"trunc", {{"n_max", trunc.n_max}, {"dim_cap", trunc.dim_cap}}},
        {"physics",
         {{"lambda", lambdas}, {"condensate", condensate}, {"xi", xi},
          {"mu", {{"kind", measure.kind}, {"n_r", measure.n_r}, {"n_theta", measure.n_theta},
                  {"r_minus_crit", measure.r_minus_crit}}}}},
        {"solver",
         {{"tol", solver.tol}, {"kernel_tol", solver.kernel_tol_rel}, {"k_eigs", solver.k}, {"T", T},
          {"conjugate", bosedot::to_string(conjugate)}, {"eps", eps}, {"rho_cut", rho_cut},
          {"fgr_window", fgr_window}, {"h_over_eps", h_over_eps}, {"dense_limit", solver.dense_limit}, {"max_iter", solver.max_iter}}},
        {"observables", {{"A", observable_A}, {"B", observable_B}}},
        {"outputs", {{"dir", out_dir}, {"formats", formats}}},
        {"seed", seed}};
}

FormFactor RunConfig::build_form_factor() const {
    FormFactor g;
    if (form_factor.preset == "gaussian") g = FormFactor::gaussian(form_factor.amplitude, form_factor.width);
    else if (form_factor.preset == "power_law") g = FormFactor::power_law(form_factor.amplitude, form_factor.p);
    else if (form_factor.preset == "table") {
        g = FormFactor::from_csv_file(form_factor.table);
        g.p = form_factor.p;
    } else throw ValidationError("form_factor.preset must be gaussian, power_law or table");
    return g;
}

ModeGrid RunConfig::build_grid() const {
    return discretize(build_form_factor(), dispersion, beta, grid, dot.bohr_frequencies());
}

double RunConfig::rho_crit() const { return critical_density(beta, dispersion); }

std::vector<CondensatePoint> RunConfig::xi_points() const {
    std::vector<CondensatePoint> out;
    if (!condensate) return out;
    for (const auto& [xi, w] : xi_measure().atoms) out.push_back(xi);
    return out;
}

XiMeasure RunConfig::xi_measure() const {
    const double rc = rho_crit();
    if (measure.kind == "uniform_theta") return XiMeasure::uniform_theta(rc + measure.r_minus_crit, measure.n_theta);
    if (measure.kind == "kac") return XiMeasure::kac(rho_bar, rc, measure.n_r, measure.n_theta);
    XiMeasure m;
    const std::size_t n = xi_offsets.size();
    require(n > 0, "physics.mu kind 'atoms' needs physics.xi points");
    for (std::size_t i = 0; i < n; ++i) m.atoms.push_back({{rc + xi_offsets[i], xi_thetas[i]}, 1.0 / double(n)});
    return m;
}

Eigen::MatrixXcd named_dot_matrix(const DotSpec& dot, const std::string& name) {
    const int d = dot.d;
    auto g = ladder_ops(dot);
    if (name == "identity") return Eigen::MatrixXcd::Identity(d, d);
    if (name == "coherence") return g.raise + g.lower;
    if (name == "raise") return g.raise;
    if (name == "lower") return g.lower;
    if (name == "hamiltonian") return build_hamiltonian(dot);
    const std::string pre = "population:";
    if (name.rfind(pre, 0) == 0) {
        int k = -1;
        try {
            k = std::stoi(name.substr(pre.size()));
        } catch (const std::exception&) {
        }
        require(k >= 0 && k < d, "population index out of range in '" + name + "'");
        Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(d, d);
        p(k, k) = 1.0;
        return p;
    }
    throw ValidationError("unknown observable '" + name + "'");
}

} // namespace bosedot
