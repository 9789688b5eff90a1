// reservoir.cpp — Bose gas thermodynamics, functionals and mode grids

#include "bosedot/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/roots.hpp>

#include "bosedot/errors.hpp"
#include "bosedot/quadrature.hpp"

namespace bosedot {
namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();
const double two_pi_cubed = std::pow(2.0 * pi, 3);

quad::Options tight() {
    quad::Options o;
    o.abs_tol = 1e-15;
    o.rel_tol = 1e-13;
    return o;
}

// k^2 / (e^{beta omega(k)} - 1) with its finite k -> 0 limit.
double k2_bose(double k, double beta, Dispersion disp) {
    if (k <= 0.0) return disp == Dispersion::relativistic ? 0.0 : 1.0 / beta;
    return k * k / std::expm1(beta * omega_of_k(disp, k));
}

} // namespace

Dispersion parse_dispersion(const std::string& name) {
    if (name == "relativistic") return Dispersion::relativistic;
    if (name == "nonrelativistic") return Dispersion::nonrelativistic;
    throw ValidationError("unknown dispersion '" + name + "'");
}

std::string to_string(Dispersion d) {
    return d == Dispersion::relativistic ? "relativistic" : "nonrelativistic";
}

double omega_of_k(Dispersion disp, double k) {
    return disp == Dispersion::relativistic ? k : k * k;
}

double k_of_omega(Dispersion disp, double omega) {
    return disp == Dispersion::relativistic ? omega : std::sqrt(omega);
}

double dk_domega(Dispersion disp, double omega) {
    return disp == Dispersion::relativistic ? 1.0 : 0.5 / std::sqrt(omega);
}

double bose_occupation(double beta, double omega) {
    if (std::isinf(beta)) return 0.0;
    return 1.0 / std::expm1(beta * omega);
}

double planck_density(double beta, double omega) {
    require(beta > 0.0, "planck_density: beta must be positive");
    require(omega > 0.0, "planck_density: omega must be positive (pole at 0)");
    return bose_occupation(beta, omega) / two_pi_cubed;
}

double critical_density(double beta, Dispersion disp) {
    require(beta > 0.0 && std::isfinite(beta), "critical_density: beta must be positive and finite");
    auto r = quad::integrate([&](double k) { return k2_bose(k, beta, disp); }, 0.0, inf, tight());
    return 4.0 * pi * r.value / two_pi_cubed;
}

double density_at_fugacity(double beta, double z, Dispersion disp) {
    require(z >= 0.0 && z <= 1.0, "fugacity must lie in [0, 1]");
    if (z == 1.0) return critical_density(beta, disp);
    if (z == 0.0) return 0.0;
    auto r = quad::integrate(
        [&](double k) { return k * k * z / (std::expm1(beta * omega_of_k(disp, k)) + (1.0 - z)); }, 0.0, inf,
        tight());
    return 4.0 * pi * r.value / two_pi_cubed;
}

ReservoirThermo reservoir_thermo(double beta, double rho_bar, Dispersion disp) {
    require(rho_bar >= 0.0, "mean density must be nonnegative");
    ReservoirThermo t;
    t.beta = beta;
    t.rho_bar = rho_bar;
    t.rho_crit = critical_density(beta, disp);
    t.rho0 = std::max(rho_bar - t.rho_crit, 0.0);
    if (rho_bar >= t.rho_crit) {
        t.z_inf = 1.0;
    } else if (rho_bar == 0.0) {
        t.z_inf = 0.0;
    } else {
        std::uintmax_t iters = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(50);
        auto root = boost::math::tools::toms748_solve(
            [&](double z) { return density_at_fugacity(beta, z, disp) - rho_bar; }, 0.0, 1.0, -rho_bar,
            t.rho_crit - rho_bar, tol, iters);
        t.z_inf = 0.5 * (root.first + root.second);
    }
    return t;
}

double kac_density(double r, double rho_bar, double rho_crit) {
    require(rho_bar > rho_crit, "kac_density: mean density must be supercritical");
    if (r <= rho_crit) return 0.0;
    const double rho0 = rho_bar - rho_crit;
    return std::exp(-(r - rho_crit) / rho0) / rho0;
}

double kac_density(double r, double rho_bar, double beta, Dispersion disp) {
    return kac_density(r, rho_bar, critical_density(beta, disp));
}

double phase(cplx f0, const CondensatePoint& xi, double rho_crit) {
    require(xi.r >= rho_crit, "phase: r must be at least rho_crit");
    return std::pow(2.0 * pi, -1.5) * std::sqrt(2.0 * (xi.r - rho_crit)) *
           (f0.real() * std::cos(xi.theta) + f0.imag() * std::sin(xi.theta));
}

TestFunction TestFunction::zero() { return {}; }

TestFunction TestFunction::gaussian(cplx amp, double width) {
    require(width > 0.0, "gaussian test function width must be positive");
    return {[amp, width](double k) { return amp * std::exp(-k * k / (2.0 * width * width)); }};
}

cplx inner(const TestFunction& f, const TestFunction& g) {
    if (f.is_zero() || g.is_zero()) return {};
    return quad::radial_complex([&](double k) { return std::conj(f.at(k)) * g.at(k); }, tight());
}

double weighted_norm2(const TestFunction& f, const std::function<double(double)>& w_of_omega, Dispersion disp) {
    if (f.is_zero()) return 0.0;
    return quad::radial([&](double k) { return std::norm(f.at(k)) * w_of_omega(omega_of_k(disp, k)); }, tight());
}

cplx translated_inner(const TestFunction& f, const TestFunction& g, double x) {
    if (f.is_zero() || g.is_zero()) return {};
    return quad::radial_complex(
        [&](double k) {
            const double kx = k * x;
            const double sinc = std::abs(kx) < 1e-8 ? 1.0 - kx * kx / 6.0 : std::sin(kx) / kx;
            return std::conj(f.at(k)) * g.at(k) * sinc;
        },
        tight());
}

namespace {

// Resolved branch data shared by functional evaluation.
struct Branch {
    double beta{1.0};
    bool fugacity_branch{false}; // subcritical: Gaussian with z/(e^{beta omega} - z)
    double z{1.0};
    double bessel_rho0{0.0};     // Araki-Woods condensate (J0 factor)
    double gauss_rho0{0.0};      // grand-canonical condensate (Gaussian in f(0))
    bool extremal{false};
    CondensatePoint xi;
    double rho_crit{0.0};
};

Branch resolve(const Ensemble& ens, Dispersion disp) {
    Branch b;
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            b.beta = e.beta;
            require(e.beta > 0.0, "ensemble beta must be positive");
            if constexpr (std::is_same_v<T, ensemble::ArakiWoods>) {
                require(e.rho0 >= 0.0, "Araki-Woods condensate density must be nonnegative");
                b.bessel_rho0 = e.rho0;
            } else if constexpr (std::is_same_v<T, ensemble::GrandCanonical>) {
                auto t = reservoir_thermo(e.beta, e.rho_bar, disp);
                if (!t.supercritical() && e.rho_bar < t.rho_crit) {
                    b.fugacity_branch = true;
                    b.z = t.z_inf;
                }
                b.gauss_rho0 = t.rho0;
            } else if constexpr (std::is_same_v<T, ensemble::Canonical>) {
                auto t = reservoir_thermo(e.beta, e.rho, disp);
                if (!t.supercritical() && e.rho < t.rho_crit) {
                    b.fugacity_branch = true;
                    b.z = t.z_inf;
                }
                b.bessel_rho0 = t.rho0;
            } else {
                b.rho_crit = critical_density(e.beta, disp);
                require(e.xi.r >= b.rho_crit, "extremal state requires r >= rho_crit (supercritical branch)");
                b.extremal = true;
                b.xi = e.xi;
            }
        },
        ens);
    return b;
}

cplx evaluate(const QuadraticData& q, const Branch& b) {
    double expo = -0.25 * q.norm2;
    expo -= 0.5 * (b.fugacity_branch ? q.fugacity : q.thermal);
    expo -= 4.0 * pi * pi * pi * b.gauss_rho0 * std::norm(q.f0);
    cplx val = std::exp(expo);
    if (b.bessel_rho0 > 0.0)
        val *= boost::math::cyl_bessel_j(0, std::sqrt(2.0 * two_pi_cubed * b.bessel_rho0) * std::abs(q.f0));
    if (b.extremal) val *= std::polar(1.0, -phase(q.f0, b.xi, b.rho_crit));
    return val;
}

QuadraticData data_for(const TestFunction& f, const Branch& b, Dispersion disp) {
    QuadraticData q;
    if (f.is_zero()) return q;
    q.f0 = f.f0();
    q.norm2 = weighted_norm2(f, [](double) { return 1.0; }, disp);
    if (b.fugacity_branch) {
        const double z = b.z;
        q.fugacity = weighted_norm2(f, [&](double w) { return z / (std::expm1(b.beta * w) + (1.0 - z)); }, disp);
    } else {
        q.thermal = weighted_norm2(f, [&](double w) { return bose_occupation(b.beta, w); }, disp);
    }
    return q;
}

} // namespace

QuadraticData quadratic_data(const TestFunction& f, const Ensemble& ens, Dispersion disp) {
    return data_for(f, resolve(ens, disp), disp);
}

cplx generating_functional(const QuadraticData& q, const Ensemble& ens, Dispersion disp) {
    return evaluate(q, resolve(ens, disp));
}

cplx generating_functional(const TestFunction& f, const Ensemble& ens, Dispersion disp) {
    Branch b = resolve(ens, disp);
    return evaluate(data_for(f, b, disp), b);
}

ClusterReport two_point_cluster(const TestFunction& f, const TestFunction& g, double x, const Ensemble& state,
                                Dispersion disp) {
    const bool ok = std::holds_alternative<ensemble::GrandCanonical>(state) ||
                    std::holds_alternative<ensemble::Extremal>(state);
    require(ok, "two_point_cluster: state must be grand-canonical or extremal");
    Branch b = resolve(state, disp);
    QuadraticData qf = data_for(f, b, disp);
    QuadraticData qg = data_for(g, b, disp);

    auto cross = [&](const std::function<double(double)>& w) -> cplx {
        if (f.is_zero() || g.is_zero()) return {};
        return quad::radial_complex(
            [&](double k) {
                const double kx = k * x;
                const double sinc = std::abs(kx) < 1e-8 ? 1.0 - kx * kx / 6.0 : std::sin(kx) / kx;
                return std::conj(f.at(k)) * g.at(k) * sinc * w(omega_of_k(disp, k));
            },
            tight());
    };
    const cplx c_norm = cross([](double) { return 1.0; });
    QuadraticData sum;
    sum.f0 = qf.f0 + qg.f0;
    sum.norm2 = qf.norm2 + qg.norm2 + 2.0 * c_norm.real();
    if (b.fugacity_branch) {
        const double z = b.z;
        sum.fugacity = qf.fugacity + qg.fugacity +
                       2.0 * cross([&](double w) { return z / (std::expm1(b.beta * w) + (1.0 - z)); }).real();
    } else {
        sum.thermal = qf.thermal + qg.thermal +
                      2.0 * cross([&](double w) { return bose_occupation(b.beta, w); }).real();
    }

    ClusterReport rep;
    rep.value_at_x = std::polar(1.0, -0.5 * c_norm.imag()) * evaluate(sum, b);
    QuadraticData far;
    far.f0 = sum.f0;
    far.norm2 = qf.norm2 + qg.norm2;
    far.thermal = qf.thermal + qg.thermal;
    far.fugacity = qf.fugacity + qg.fugacity;
    rep.limit = evaluate(far, b);
    rep.product = evaluate(qf, b) * evaluate(qg, b);
    rep.ratio = rep.limit / rep.product;
    return rep;
}

cplx FormFactor::operator()(double k) const {
    switch (kind) {
    case FormFactorKind::gaussian:
        return amplitude * std::exp(-k * k / (2.0 * width * width));
    case FormFactorKind::power_law:
        if (k == 0.0) return p > 0.0 ? 0.0 : (p == 0.0 ? amplitude : inf);
        return amplitude * std::pow(k, p) * std::exp(-k * k);
    case FormFactorKind::tabulated: {
        if (table_k.empty() || k > table_k.back()) return 0.0;
        if (k <= table_k.front()) return table_g.front();
        auto it = std::upper_bound(table_k.begin(), table_k.end(), k);
        const auto i = static_cast<std::size_t>(it - table_k.begin());
        const double t = (k - table_k[i - 1]) / (table_k[i] - table_k[i - 1]);
        return (1.0 - t) * table_g[i - 1] + t * table_g[i];
    }
    }
    return 0.0;
}

FormFactor FormFactor::gaussian(double amplitude, double width) {
    require(width > 0.0, "gaussian form factor width must be positive");
    FormFactor g;
    g.kind = FormFactorKind::gaussian;
    g.amplitude = amplitude;
    g.width = width;
    return g;
}

FormFactor FormFactor::power_law(double amplitude, double p) {
    FormFactor g;
    g.kind = FormFactorKind::power_law;
    g.amplitude = amplitude;
    g.p = p;
    return g;
}

FormFactor FormFactor::from_csv(std::istream& in) {
    FormFactor g;
    g.kind = FormFactorKind::tabulated;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double k, re, im;
        if (!(row >> k >> re >> im)) {
            if (g.table_k.empty() && lineno == 1) continue; // header
            throw ValidationError("form factor CSV: malformed row " + std::to_string(lineno));
        }
        require(k >= 0.0, "form factor CSV: k must be nonnegative");
        require(g.table_k.empty() || k > g.table_k.back(), "form factor CSV: k must be strictly increasing");
        g.table_k.push_back(k);
        g.table_g.emplace_back(re, im);
    }
    require(g.table_k.size() >= 2, "form factor CSV needs at least two rows");
    return g;
}

FormFactor FormFactor::from_csv_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open form factor table '" + path + "'");
    return from_csv(in);
}

namespace {

double integrate_k(const FormFactor& g, const std::function<double(double)>& h) {
    quad::Options o;
    o.abs_tol = 1e-12;
    o.rel_tol = 1e-11;
    if (g.kind != FormFactorKind::tabulated) return quad::integrate(h, 0.0, inf, o).value;
    double sum = 0.0;
    if (g.table_k.front() > 0.0) sum += quad::integrate(h, 0.0, g.table_k.front(), o).value;
    for (std::size_t i = 1; i < g.table_k.size(); ++i)
        sum += quad::integrate(h, g.table_k[i - 1], g.table_k[i], o).value;
    return sum;
}

} // namespace

double form_factor_norm2(const FormFactor& g) {
    return 4.0 * pi * integrate_k(g, [&](double k) { return k * k * std::norm(g(k)); });
}

double form_factor_ir_norm2(const FormFactor& g, Dispersion disp) {
    // k^2 / omega is k (relativistic) or 1 (nonrelativistic)
    return 4.0 * pi * integrate_k(g, [&](double k) {
        if (k == 0.0) return 0.0;
        return k * k / omega_of_k(disp, k) * std::norm(g(k));
    });
}

void FormFactor::validate(Dispersion disp) const {
    if (disp == Dispersion::relativistic)
        require(p > -0.5, "infrared exponent must exceed -1/2 for relativistic dispersion");
    else
        require(p > 0.0, "infrared exponent must be positive for nonrelativistic dispersion");
    if (kind == FormFactorKind::tabulated)
        require(table_k.size() == table_g.size() && table_k.size() >= 2, "tabulated form factor is empty");
    // |g(k)| <= c k^p near 0: the ratio must not grow as k decreases.
    const double r_small = std::abs((*this)(1e-6)) / std::pow(1e-6, p);
    const double r_ref = std::abs((*this)(1e-2)) / std::pow(1e-2, p);
    require(r_small <= 10.0 * r_ref + 1e-300, "form factor decays slower than the declared infrared exponent");
    double ir = 0.0;
    try {
        ir = form_factor_ir_norm2(*this, disp);
    } catch (const ConvergenceError&) {
        throw ValidationError("||g / sqrt(omega)|| does not converge");
    }
    require(std::isfinite(ir), "||g / sqrt(omega)|| is not finite");
}

double coupling_density(const FormFactor& g, Dispersion disp, double omega) {
    const double k = k_of_omega(disp, omega);
    return 4.0 * pi * k * k * dk_domega(disp, omega) * std::norm(g(k));
}

double shell_weight(const FormFactor& g, Dispersion disp, double omega) {
    return 4.0 * pi * std::norm(g(k_of_omega(disp, omega)));
}

Spacing parse_spacing(const std::string& name) {
    if (name == "linear") return Spacing::linear;
    if (name == "log") return Spacing::log;
    throw ValidationError("unknown grid spacing '" + name + "'");
}

std::string to_string(Spacing s) {
    switch (s) {
    case Spacing::linear: return "linear";
    case Spacing::log: return "log";
    case Spacing::custom: return "custom";
    }
    return "custom";
}

cplx Mode::amplitude() const { return std::sqrt(weight) * g; }

std::vector<double> ModeGrid::omegas() const {
    std::vector<double> w;
    for (const auto& m : modes) w.push_back(m.omega);
    return w;
}

std::vector<double> ModeGrid::occupations() const {
    std::vector<double> r;
    for (const auto& m : modes) r.push_back(bose_occupation(beta, m.omega));
    return r;
}

std::vector<cplx> ModeGrid::left_couplings() const {
    std::vector<cplx> c;
    for (const auto& m : modes) c.push_back(std::sqrt(1.0 + bose_occupation(beta, m.omega)) * m.amplitude());
    return c;
}

std::vector<cplx> ModeGrid::right_couplings() const {
    std::vector<cplx> c;
    for (const auto& m : modes) c.push_back(std::sqrt(bose_occupation(beta, m.omega)) * std::conj(m.amplitude()));
    return c;
}

double ModeGrid::coupling_norm2() const {
    double s = 0.0;
    for (const auto& m : modes) s += m.weight * std::norm(m.g);
    return s;
}

void ModeGrid::validate() const {
    require(beta > 0.0, "grid beta must be positive");
    std::vector<double> w = omegas();
    for (const auto& m : modes) {
        require(m.omega > 0.0 && std::isfinite(m.omega), "mode frequencies must be positive and finite");
        require(m.weight > 0.0, "mode weights must be positive");
    }
    std::sort(w.begin(), w.end());
    require(std::adjacent_find(w.begin(), w.end()) == w.end(), "mode frequencies must be distinct");
}

ModeGrid ModeGrid::from_nodes(std::vector<Mode> modes, Dispersion disp, double beta, cplx g0) {
    ModeGrid grid;
    grid.modes = std::move(modes);
    grid.dispersion = disp;
    grid.beta = beta;
    grid.g0 = g0;
    grid.validate();
    return grid;
}

ModeGrid discretize(const FormFactor& g, Dispersion disp, double beta, const GridSpec& spec,
                    const std::vector<double>& bohr_frequencies) {
    require(spec.n_modes >= 1, "grid needs at least one mode");
    require(spec.omega_max > 0.0, "omega_max must be positive");
    g.validate(disp);
    for (double b : bohr_frequencies)
        require(b < spec.omega_max, "omega_max must cover the dot's Bohr frequencies");

    ModeGrid grid;
    grid.dispersion = disp;
    grid.beta = beta;
    grid.spacing = spec.spacing;
    const cplx g0 = g.g0();
    grid.g0 = std::isfinite(std::abs(g0)) ? g0 : cplx{std::nan(""), 0.0};

    std::vector<double> nodes;
    if (spec.spacing == Spacing::linear) {
        grid.step = spec.omega_max / spec.n_modes;
        for (int j = 0; j < spec.n_modes; ++j) nodes.push_back((j + 0.5) * grid.step);
    } else if (spec.spacing == Spacing::log) {
        require(spec.omega_min > 0.0 && spec.omega_min < spec.omega_max, "log grid needs 0 < omega_min < omega_max");
        grid.step = std::log(spec.omega_max / spec.omega_min) / spec.n_modes;
        for (int j = 0; j < spec.n_modes; ++j) nodes.push_back(spec.omega_min * std::exp((j + 0.5) * grid.step));
    } else {
        throw ValidationError("discretize needs linear or log spacing");
    }

    for (double& w : nodes) {
        for (double b : bohr_frequencies) {
            if (std::abs(w - b) > 1e-12 * std::max(1.0, b)) continue;
            if (spec.collisions == CollisionPolicy::reject)
                throw ValidationError("grid node coincides with a Bohr frequency");
            if (spec.collisions == CollisionPolicy::perturb)
                w = spec.spacing == Spacing::linear ? w + 0.5 * grid.step : w * std::exp(0.5 * grid.step);
        }
    }

    for (double w : nodes) {
        Mode m;
        m.omega = w;
        m.weight = spec.spacing == Spacing::linear ? grid.step : w * grid.step;
        const double k = k_of_omega(disp, w);
        m.g = g(k) * std::sqrt(4.0 * pi * k * k * dk_domega(disp, w));
        grid.modes.push_back(m);
    }
    grid.validate();
    return grid;
}

void XiMeasure::validate(double rho_crit) const {
    require(!atoms.empty(), "xi measure is empty");
    double s = 0.0;
    for (const auto& [xi, w] : atoms) {
        require(w >= 0.0, "xi measure weights must be nonnegative");
        require(xi.r >= rho_crit, "xi measure atoms must satisfy r >= rho_crit");
        s += w;
    }
    require(std::abs(s - 1.0) <= 1e-12, "xi measure weights must sum to 1");
}

XiMeasure XiMeasure::single(const CondensatePoint& xi) { return {{{xi, 1.0}}}; }

XiMeasure XiMeasure::uniform_theta(double r, int n_theta) {
    require(n_theta >= 1, "need at least one theta point");
    XiMeasure m;
    for (int k = 0; k < n_theta; ++k) m.atoms.push_back({{r, 2.0 * pi * k / n_theta}, 1.0 / n_theta});
    return m;
}

XiMeasure XiMeasure::kac(double rho_bar, double rho_crit, int n_r, int n_theta) {
    require(rho_bar > rho_crit, "Kac measure needs a supercritical mean density");
    require(n_r >= 1 && n_theta >= 1, "Kac measure needs positive node counts");
    XiMeasure m;
    const double rho0 = rho_bar - rho_crit;
    for (int i = 0; i < n_r; ++i) {
        const double r = rho_crit - rho0 * std::log(1.0 - (i + 0.5) / n_r);
        for (int k = 0; k < n_theta; ++k)
            m.atoms.push_back({{r, 2.0 * pi * k / n_theta}, 1.0 / (static_cast<double>(n_r) * n_theta)});
    }
    return m;
}

} // namespace bosedot
