// krylov.hpp — Lanczos exponential action and norm estimates for Hermitian operators

#pragma once

#include <complex>

#include <Eigen/Dense>

#include "bosedot/sparse.hpp"

namespace bosedot::krylov {

struct ExpvOptions {
    double tol{1e-10};        // per unit "time", relative to the running norm
    int krylov_dim{30};
    int max_steps{200000};
};

struct ExpvResult {
    Eigen::VectorXcd v;       // exp(z H) v0 / exp(log_scale)
    double log_scale{0.0};    // accumulated log of the renormalizations
    double error_estimate{0.0};
    int steps{0};
};

// exp(z H) v for Hermitian H and complex z, by restarted Lanczos with step-halving control.
// The returned vector is renormalized at every step; log_scale records the removed factor.
ExpvResult expv(const SpMat& h, const Eigen::VectorXcd& v, cplx z, const ExpvOptions& opt = {});

// Largest |eigenvalue| of a Hermitian operator by Lanczos (exact below n = steps).
double spectral_norm(const SpMat& h, int steps = 80, unsigned seed = 7);

} // namespace bosedot::krylov
