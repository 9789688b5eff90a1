// dynamics.hpp — time evolution, ergodic means, return-to-equilibrium deviation, xi superposition

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bosedot/liouville.hpp"

namespace bosedot {

// Full eigendecomposition of a Hermitian generator (dense path).
struct Eigensystem {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
    double norm{0.0};
};
Eigensystem diagonalize(const SpMat& l, std::size_t dense_limit = 2000);

struct EvolveOptions {
    std::size_t dense_limit{2000};
    krylov::ExpvOptions krylov;
};

// e^{-itL} state
Eigen::VectorXcd evolve(const Eigensystem& es, const Eigen::VectorXcd& state, double t);
Eigen::VectorXcd evolve(const OperatorBundle& bundle, const Eigen::VectorXcd& state, double t,
                        const EvolveOptions& opt = {});

struct ErgodicReport {
    double T{0.0};
    cplx finite_T_mean{};          // analytic per-pair integral
    cplx quadrature_mean{};        // composite Simpson over [0, T]
    cplx extrapolated{};           // Richardson from T and 2T
    cplx closed_form{};            // sum over eigenvalue clusters of <P_e B Omega, A P_e B Omega>
    double error{0.0};             // |finite_T_mean - closed_form|
    double min_gap{0.0};           // smallest nonzero eigenvalue spacing
    double bound{0.0};             // ||A|| ||B Omega||^2
    bool unreliable{false};        // min_gap * T < 10
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

// (1/T) int_0^T <B Omega, e^{itL} A e^{-itL} B Omega> dt.
ErgodicReport ergodic_mean(const Eigensystem& es, const SpMat& A, const SpMat& B, const Eigen::VectorXcd& omega,
                           double T, int n_steps = 2000);
ErgodicReport ergodic_mean(const OperatorBundle& bundle, const SpMat& A, const SpMat& B,
                           const Eigen::VectorXcd& omega, double T, int n_steps = 2000);

// RMS of |mean(T') - closed form| for T' sampled uniformly on [T0, T1].
double ergodic_error_envelope(const Eigensystem& es, const SpMat& A, const SpMat& B, const Eigen::VectorXcd& omega,
                              double T0, double T1, int n_samples = 400);

struct DeviationReport {
    cplx limit{};                  // ergodic limit of <B Omega, sigma^t(A) B Omega>
    cplx target{};                 // omega(B* B) omega(A)
    double omega_BB{0.0};
    cplx omega_A{};
    double deviation{0.0};
    double a_norm{0.0};
    double normalized{0.0};        // deviation / ||A||
    double kms_residual{0.0};
    cplx finite_T_mean{};
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

// A, B are dot matrices acting as pi(X (x) 1); Omega is the perturbed KMS vector of the bundle.
DeviationReport rte_deviation(const OperatorBundle& bundle, const Eigensystem& es, const Eigen::VectorXcd& omega,
                              const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, double T = 0.0,
                              double kernel_tol_rel = 1e-9);

struct XiResult {
    CondensatePoint xi;
    cplx limit{};
    double omega_BB{0.0};
    cplx omega_A{};
    std::string manifest_hash;     // identifies grid and truncation
};

struct SuperposeReport {
    cplx aggregate_limit{};
    cplx target{};
    double deviation{0.0};
    nlohmann::json to_json() const;
};

SuperposeReport superpose_xi(const XiMeasure& measure, const std::vector<XiResult>& results);

// (1/2pi) int e^{-i Phi(f, xi)} d theta by the trapezoid rule on n_theta points.
cplx theta_averaged_phase_factor(cplx f0, double r, double rho_crit, int n_theta = 64);
// Closed form J0(kappa |f(0)|), kappa the amplitude of Phi in the (cos, sin) basis.
double phase_bessel_closed_form(cplx f0, double r, double rho_crit);

// Order-by-order Dyson terms U^(n) psi, n = 0..order, of e^{-it(L0 + lambda V)} psi.
std::vector<Eigen::VectorXcd> dyson_terms(const SpMat& l0, const SpMat& v, double lambda, const Eigen::VectorXcd& psi,
                                          double t, int order);
// sum_{p+q <= order} <U^(p) psi, A U^(q) psi>
cplx dyson_expectation(const SpMat& l0, const SpMat& v, double lambda, const SpMat& A, const Eigen::VectorXcd& psi,
                       double t, int order);
// <e^{-itL} psi, A e^{-itL} psi>
cplx exact_expectation(const SpMat& l, const SpMat& A, const Eigen::VectorXcd& psi, double t);

// FNV-1a over a canonical JSON dump.
std::string manifest_hash(const nlohmann::json& j);

} // namespace bosedot
