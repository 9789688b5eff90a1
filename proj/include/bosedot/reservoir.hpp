// reservoir.hpp — free Bose gas thermodynamics, generating functionals, mode grids

#pragma once

#include <complex>
#include <functional>
#include <istream>
#include <string>
#include <variant>
#include <vector>

#include "bosedot/dot.hpp"

namespace bosedot {

enum class Dispersion { relativistic, nonrelativistic };

Dispersion parse_dispersion(const std::string& name);
std::string to_string(Dispersion d);

double omega_of_k(Dispersion disp, double k);
double k_of_omega(Dispersion disp, double omega);
double dk_domega(Dispersion disp, double omega);

// 1 / (e^{beta omega} - 1); zero for beta = +inf.
double bose_occupation(double beta, double omega);

// (2pi)^{-3} / (e^{beta omega} - 1)
double planck_density(double beta, double omega);

double critical_density(double beta, Dispersion disp);

struct ReservoirThermo {
    double beta{1.0};
    double rho_bar{0.0};
    double rho_crit{0.0};
    double rho0{0.0};     // max(rho_bar - rho_crit, 0)
    double z_inf{1.0};    // fugacity; 1 on the supercritical branch
    bool supercritical() const { return rho0 > 0.0; }
};

ReservoirThermo reservoir_thermo(double beta, double rho_bar, Dispersion disp);

// Mean density at fugacity z: (2pi)^{-3} int d^3k z / (e^{beta omega} - z).
double density_at_fugacity(double beta, double z, Dispersion disp);

double kac_density(double r, double rho_bar, double rho_crit);
double kac_density(double r, double rho_bar, double beta, Dispersion disp);

double phase(cplx f0, const CondensatePoint& xi, double rho_crit);

// Radial test function f(|k|); f(0) read from the profile.
struct TestFunction {
    std::function<cplx(double)> profile;

    cplx at(double k) const { return profile ? profile(k) : cplx{}; }
    cplx f0() const { return at(0.0); }
    bool is_zero() const { return !profile; }

    static TestFunction zero();
    // amp * exp(-k^2 / (2 width^2))
    static TestFunction gaussian(cplx amp, double width);
};

// <f, g> = 4 pi int k^2 conj(f) g dk
cplx inner(const TestFunction& f, const TestFunction& g);
// <f, w(omega) f> for a real radial weight
double weighted_norm2(const TestFunction& f, const std::function<double(double)>& w_of_omega, Dispersion disp);
// <f, tau_x g> = 4 pi int k^2 conj(f) g sin(kx)/(kx) dk
cplx translated_inner(const TestFunction& f, const TestFunction& g, double x);

namespace ensemble {
struct ArakiWoods {
    double beta{1.0};   // momentum density is Planck's law at beta
    double rho0{0.0};
};
struct GrandCanonical {
    double beta{1.0};
    double rho_bar{0.0};
};
struct Canonical {
    double beta{1.0};
    double rho{0.0};
};
struct Extremal {
    double beta{1.0};
    CondensatePoint xi;
};
} // namespace ensemble

using Ensemble = std::variant<ensemble::ArakiWoods, ensemble::GrandCanonical, ensemble::Canonical,
                              ensemble::Extremal>;

cplx generating_functional(const TestFunction& f, const Ensemble& ens, Dispersion disp);

// Evaluated through the quadratic data of f rather than a profile; lets the
// cluster computation reuse the cross terms.
struct QuadraticData {
    double norm2{0.0};        // ||f||^2
    double thermal{0.0};      // <f, (e^{beta omega} - 1)^{-1} f>
    double fugacity{0.0};     // <f, z/(e^{beta omega} - z) f> (subcritical branch)
    cplx f0{};
};
cplx generating_functional(const QuadraticData& q, const Ensemble& ens, Dispersion disp);
QuadraticData quadratic_data(const TestFunction& f, const Ensemble& ens, Dispersion disp);

struct ClusterReport {
    cplx value_at_x{};        // omega(W(f) W(tau_x g))
    cplx limit{};             // x -> infinity (cross terms dropped)
    cplx product{};           // omega(W(f)) omega(W(g))
    cplx ratio{};             // limit / product
};
// state must be GrandCanonical or Extremal.
ClusterReport two_point_cluster(const TestFunction& f, const TestFunction& g, double x,
                                const Ensemble& state, Dispersion disp);

enum class FormFactorKind { gaussian, power_law, tabulated };

struct FormFactor {
    FormFactorKind kind{FormFactorKind::gaussian};
    double amplitude{1.0};
    double width{1.0};        // gaussian: exp(-k^2 / (2 width^2))
    double p{0.0};            // power law exponent; declared infrared exponent
    std::vector<double> table_k;
    std::vector<cplx> table_g;

    cplx operator()(double k) const;
    cplx g0() const { return (*this)(0.0); }

    static FormFactor gaussian(double amplitude, double width);
    // amplitude * k^p * exp(-k^2)
    static FormFactor power_law(double amplitude, double p);
    // CSV rows: k, Re g, Im g (header line optional); linear interpolation, zero beyond the table.
    static FormFactor from_csv(std::istream& in);
    static FormFactor from_csv_file(const std::string& path);

    // Rejects infrared exponents outside the admissible range and a divergent ||g / sqrt(omega)||.
    void validate(Dispersion disp) const;
};

// ||g||^2 and ||g / sqrt(omega)||^2 by radial quadrature.
double form_factor_norm2(const FormFactor& g);
double form_factor_ir_norm2(const FormFactor& g, Dispersion disp);
// Coupling density per unit omega: 4 pi k^2 (dk/domega) |g(k(omega))|^2.
double coupling_density(const FormFactor& g, Dispersion disp, double omega);
// int_{S^2} |g(k(omega), sigma)|^2 d sigma = 4 pi |g(k(omega))|^2 for radial g.
double shell_weight(const FormFactor& g, Dispersion disp, double omega);

enum class Spacing { linear, log, custom };
enum class CollisionPolicy { perturb, reject, resonance };

Spacing parse_spacing(const std::string& name);
std::string to_string(Spacing s);

struct GridSpec {
    int n_modes{4};
    double omega_max{2.0};
    Spacing spacing{Spacing::linear};
    double omega_min{1e-3};   // log grids only
    CollisionPolicy collisions{CollisionPolicy::perturb};
};

struct Mode {
    double omega{0.0};
    double weight{0.0};
    cplx g{};                 // density-normalized: weight * |g|^2 approximates the shell integral
    cplx amplitude() const;   // sqrt(weight) * g
};

struct ModeGrid {
    std::vector<Mode> modes;
    Dispersion dispersion{Dispersion::relativistic};
    double beta{1.0};
    cplx g0{};
    Spacing spacing{Spacing::custom};
    double step{0.0};         // linear: d omega; log: d ln omega

    int size() const { return static_cast<int>(modes.size()); }
    std::vector<double> omegas() const;
    std::vector<double> occupations() const;
    // (sqrt(1+rho_j) c_j, sqrt(rho_j) conj(c_j)) with c_j = sqrt(w_j) g_j
    std::vector<cplx> left_couplings() const;
    std::vector<cplx> right_couplings() const;
    double coupling_norm2() const; // sum_j w_j |g_j|^2
    void validate() const;

    static ModeGrid from_nodes(std::vector<Mode> modes, Dispersion disp, double beta, cplx g0);
};

ModeGrid discretize(const FormFactor& g, Dispersion disp, double beta, const GridSpec& spec,
                    const std::vector<double>& bohr_frequencies = {1.0});

// Discrete probability measure over condensate points.
struct XiMeasure {
    std::vector<std::pair<CondensatePoint, double>> atoms;

    void validate(double rho_crit) const;
    static XiMeasure single(const CondensatePoint& xi);
    // r fixed, theta on n equally spaced points.
    static XiMeasure uniform_theta(double r, int n_theta);
    // Kac density in r (n_r quantile midpoints) times uniform theta.
    static XiMeasure kac(double rho_bar, double rho_crit, int n_r, int n_theta);
};

} // namespace bosedot
