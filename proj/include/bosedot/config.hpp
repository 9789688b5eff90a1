// config.hpp — JSON run configuration for the command-line driver

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bosedot/liouville.hpp"
#include "bosedot/spectral.hpp"

namespace bosedot {

struct FormFactorConfig {
    std::string preset{"gaussian"};   // gaussian | power_law | table
    double amplitude{1.0};
    double width{1.0};
    double p{0.0};
    std::string table;                // CSV path when preset == "table"
};

struct MeasureConfig {
    std::string kind{"atoms"};        // atoms | uniform_theta | kac
    int n_r{4};
    int n_theta{8};
    double r_minus_crit{0.1};         // uniform_theta
};

struct RunConfig {
    DotSpec dot;
    Dispersion dispersion{Dispersion::relativistic};
    FormFactorConfig form_factor;
    double beta{1.0};
    double rho_bar{0.0};
    GridSpec grid;
    TruncationSpec trunc;
    std::vector<double> lambdas{0.01};
    bool condensate{false};
    std::vector<double> xi_offsets;   // r - rho_crit per xi point
    std::vector<double> xi_thetas;
    MeasureConfig measure;
    SolverOptions solver;
    std::vector<double> T{100.0};
    ConjugateScheme conjugate{ConjugateScheme::log_grid_dilation};
    std::vector<double> eps{0.2, 0.1, 0.05};
    double rho_cut{0.0};
    double h_over_eps{0.0};           // > 0 rebuilds a log grid per epsilon with step h_over_eps * eps
    double fgr_window{0.05};
    std::string observable_A{"coherence"};
    std::string observable_B{"identity"};
    std::string out_dir{"out"};
    std::vector<std::string> formats{"json"};
    unsigned long long seed{1};
    int jobs{1};

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);
    nlohmann::json to_json() const;

    FormFactor build_form_factor() const;
    ModeGrid build_grid() const;
    double rho_crit() const;
    // Atoms of xi_measure(); empty without a condensate.
    std::vector<CondensatePoint> xi_points() const;
    XiMeasure xi_measure() const;
};

// identity | coherence (G+ + G-) | hamiltonian | population:k | raise | lower
Eigen::MatrixXcd named_dot_matrix(const DotSpec& dot, const std::string& name);

} // namespace bosedot
