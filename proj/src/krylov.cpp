// krylov.cpp — restarted Lanczos for exp(zH)v

#include "bosedot/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "bosedot/errors.hpp"

namespace bosedot::krylov {
namespace {

struct Lanczos {
    Eigen::MatrixXcd q;       // n x m orthonormal basis
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;     // beta(k) couples q_k and q_{k+1}; beta(m-1) is the residual coupling
    int m{0};
};

// Full reorthogonalization; stops early on invariant subspaces.
Lanczos run(const SpMat& h, const Eigen::VectorXcd& v0, int mmax) {
    const auto n = v0.size();
    mmax = static_cast<int>(std::min<Eigen::Index>(mmax, n));
    Lanczos l;
    l.q.resize(n, mmax);
    l.alpha.resize(mmax);
    l.beta.resize(mmax);
    l.q.col(0) = v0 / v0.norm();
    for (int k = 0; k < mmax; ++k) {
        Eigen::VectorXcd w = h * l.q.col(k);
        l.alpha(k) = l.q.col(k).dot(w).real();
        for (int pass = 0; pass < 2; ++pass)
            w -= l.q.leftCols(k + 1) * (l.q.leftCols(k + 1).adjoint() * w);
        l.beta(k) = w.norm();
        l.m = k + 1;
        if (l.beta(k) <= 1e-14 * std::max(1.0, std::abs(l.alpha(k)))) {
            l.beta(k) = 0.0;
            break;
        }
        if (k + 1 < mmax) l.q.col(k + 1) = w / l.beta(k);
    }
    return l;
}

} // namespace

ExpvResult expv(const SpMat& h, const Eigen::VectorXcd& v, cplx z, const ExpvOptions& opt) {
    require(h.rows() == h.cols() && h.rows() == v.size(), "expv: dimension mismatch");
    ExpvResult res;
    const double nv = v.norm();
    if (nv == 0.0 || z == cplx{}) {
        res.v = v;
        return res;
    }
    res.v = v / nv;
    res.log_scale = std::log(nv);

    double remaining = 1.0;
    double tau = 1.0;
    while (remaining > 0.0) {
        if (res.steps >= opt.max_steps) throw ConvergenceError("Krylov exponential action: step budget exhausted", res.error_estimate);
        Lanczos l = run(h, res.v, opt.krylov_dim);
        const int m = l.m;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int k = 0; k < m; ++k) {
            t(k, k) = l.alpha(k);
            if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = l.beta(k);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const bool exact = l.beta(m - 1) == 0.0 || m == v.size();
        tau = std::min(tau, remaining);
        while (true) {
            Eigen::VectorXcd ex(m);
            // Shift by the dominant growth so the small vector stays finite.
            Eigen::VectorXcd expo = (z * tau) * es.eigenvalues().cast<cplx>();
            const double shift = expo.real().maxCoeff();
            for (int k = 0; k < m; ++k) ex(k) = std::exp(expo(k) - shift) * es.eigenvectors()(0, k);
            Eigen::VectorXcd y = es.eigenvectors().cast<cplx>() * ex;
            const double ynorm = y.norm();
            const double err = exact ? 0.0 : l.beta(m - 1) * std::abs(y(m - 1)) / ynorm;
            if (err <= opt.tol * tau || tau < 1e-12) {
                res.v = l.q.leftCols(m) * (y / ynorm);
                res.log_scale += shift + std::log(ynorm);
                res.error_estimate += err;
                remaining -= tau;
                if (remaining < 1e-15) remaining = 0.0;
                if (err < 0.1 * opt.tol * tau) tau *= 1.5;
                break;
            }
            tau *= 0.5;
        }
        ++res.steps;
    }
    return res;
}

double spectral_norm(const SpMat& h, int steps, unsigned seed) {
    const auto n = h.rows();
    if (n == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
    Lanczos l = run(h, v, steps);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(l.m, l.m);
    for (int k = 0; k < l.m; ++k) {
        t(k, k) = l.alpha(k);
        if (k + 1 < l.m) t(k, k + 1) = t(k + 1, k) = l.beta(k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace bosedot::krylov
