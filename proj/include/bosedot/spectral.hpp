// spectral.hpp — near-zero eigenanalysis, virial and kernel diagnostics, level shift

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bosedot/liouville.hpp"

namespace bosedot {

struct SolverOptions {
    int k{20};                       // eigenpairs nearest 0
    double tol{1e-10};               // residual tolerance relative to ||L||
    double kernel_tol_rel{1e-9};     // |e| < kernel_tol_rel * ||L|| counts as kernel
    std::size_t dense_limit{2000};
    bool force_sparse{false};
    int max_iter{300};
    unsigned long long seed{11};
};

struct VectorDiagnostics {
    double eigenvalue{0.0};
    double residual{0.0};
    double virial{std::numeric_limits<double>::quiet_NaN()};   // <psi, C1 psi>; NaN without a conjugate
    double lambda_weight{0.0};       // ||Lambda^{1/2} psi||
    double structure_overlap{0.0};   // ||P_{1,beta} P(Lambda <= |lambda|) psi||
    std::vector<double> panel;       // |<chi_k, psi>|
};

struct SpectralReport {
    std::string path;                // "dense" or "shift_invert"
    int iterations{0};
    double norm_L{0.0};
    double kernel_tol{0.0};
    std::vector<double> eigenvalues; // sorted by |e|
    std::vector<double> residuals;
    Eigen::MatrixXcd vectors;        // columns match eigenvalues
    Eigen::MatrixXcd kernel_basis;   // orthonormal columns
    int kernel_dimension{0};
    std::vector<VectorDiagnostics> diagnostics;
    std::vector<std::string> panel_labels;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

SpectralReport solve_near_zero(const OperatorBundle& bundle, const SolverOptions& opt = {});

// Fixed low-excitation panel: every dot pair with the vacuum or one quantum in one of the first few modes.
std::vector<std::size_t> panel_indices(const OperatorBundle& bundle, std::vector<std::string>* labels = nullptr);

struct VirialDiagnostics {
    double virial_value{0.0};
    double lambda_weight{0.0};
};
VirialDiagnostics virial_check(const OperatorBundle& bundle, const Eigen::VectorXcd& psi);

double lambda_weight(const OperatorBundle& bundle, const Eigen::VectorXcd& psi);
double structure_overlap(const OperatorBundle& bundle, const Eigen::VectorXcd& psi);

// Normalized projection of v onto span(basis); basis columns orthonormal.
Eigen::VectorXcd project_onto(const Eigen::MatrixXcd& basis, const Eigen::VectorXcd& v);

struct KernelStructure {
    double overlap{0.0};
    int orthogonal_dimension{0};
    std::vector<double> panel_overlaps;   // ||P_perp chi_k|| with P_perp the kernel minus psi
    double max_panel_overlap{0.0};
};
KernelStructure kernel_structure(const OperatorBundle& bundle, const Eigen::MatrixXcd& kernel_basis,
                                 const Eigen::VectorXcd& psi);

struct LevelShiftReport {
    double a{0.0};
    Eigen::MatrixXd gamma_tilde;
    double shell_weight{0.0};
    Eigen::MatrixXd gamma;
    Eigen::VectorXd eigenvalues;
    double gap{0.0};
    Eigen::VectorXd kernel_vector;
    double gibbs_residual{0.0};
    double alignment{std::numeric_limits<double>::quiet_NaN()}; // Gibbs overlap of the sandwich, smallest eps

    nlohmann::json to_json() const;
};

// Tridiagonal level-shift matrix for unit Bohr frequency.
Eigen::MatrixXd level_shift_matrix(int d, double beta);
LevelShiftReport level_shift(const DotSpec& dot, double beta, double shell_weight);

struct SandwichReport {
    Eigen::MatrixXcd M;
    double c_fit{0.0};
    double misfit{0.0};
    double gibbs_overlap{0.0};
    double h_over_eps{0.0};
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};
SandwichReport resolvent_sandwich(const OperatorBundle& bundle, double eps, double rho_cut);

struct FgrEntry {
    double gap{0.0};
    double weight{0.0};             // sum over the window of w_j |g_j|^2
    double density{0.0};            // weight / (2 delta)
};
struct FgrReport {
    std::vector<FgrEntry> entries;
    bool effective{false};
    nlohmann::json to_json() const;
};
FgrReport fgr_check(const ModeGrid& grid, const DotSpec& dot, double delta);

} // namespace bosedot
