// dot.hpp — d-level dot, its doubled space, and the condensate-induced term K_xi

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace bosedot {

using cplx = std::complex<double>;

struct DotSpec {
    int d{2};
    std::vector<double> energies; // empty means 0, 1, ..., d-1

    static DotSpec standard(int d);
    // Throws ValidationError on d < 1, wrong length, or non-increasing energies.
    void validate() const;
    std::vector<double> resolved_energies() const;
    // Distinct positive differences E_j - E_i (sorted, merged at 1e-12).
    std::vector<double> bohr_frequencies() const;
};

struct CondensatePoint {
    double r{0.0};
    double theta{0.0};
};

Eigen::MatrixXcd build_hamiltonian(const DotSpec& spec);

struct LadderPair {
    Eigen::MatrixXcd raise; // G+ : phi_j -> phi_{j+1}
    Eigen::MatrixXcd lower; // G- = G+^dagger
};
LadderPair ladder_ops(const DotSpec& spec);

// Unit vector of length d^2, index i*d + j for phi_i (x) phi_j.
Eigen::VectorXcd gibbs_vector(const DotSpec& spec, double beta);
// Only the d diagonal-pair coefficients e^{-beta E_j / 2} / sqrt(Z).
Eigen::VectorXd gibbs_coefficients(const DotSpec& spec, double beta);

// X (x) 1 and 1 (x) X on the doubled dot space.
Eigen::MatrixXcd left_dot(const Eigen::MatrixXcd& x);
Eigen::MatrixXcd right_dot(const Eigen::MatrixXcd& x);

// L1 = H (x) 1 - 1 (x) H
Eigen::MatrixXcd dot_liouvillian(const DotSpec& spec);

// Single-factor K1 = -2 (2pi)^{-3/2} sqrt(r - rho_crit) (G+ conj(g0) e^{i theta} + G- g0 e^{-i theta}).
Eigen::MatrixXcd condensate_term_single(const DotSpec& spec, const CondensatePoint& xi,
                                        double rho_crit, cplx g0);
// K_xi = K1 (x) 1 - 1 (x) conj(K1); Hermitian d^2 x d^2.
Eigen::MatrixXcd condensate_term(const DotSpec& spec, const CondensatePoint& xi,
                                 double rho_crit, cplx g0);

} // namespace bosedot
