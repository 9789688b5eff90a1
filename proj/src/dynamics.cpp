// dynamics.cpp — evolution, ergodic means and deviation reports

#include "bosedot/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "bosedot/errors.hpp"

namespace bosedot {

Eigensystem diagonalize(const SpMat& l, std::size_t dense_limit) {
    if (static_cast<std::size_t>(l.rows()) > dense_limit)
        throw DimensionCapError(static_cast<std::size_t>(l.rows()), dense_limit);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(l)};
    if (es.info() != Eigen::Success) throw ConvergenceError("dense Hermitian eigensolver failed", 0.0);
    Eigensystem out;
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
    out.norm = out.values.size() ? out.values.cwiseAbs().maxCoeff() : 0.0;
    return out;
}

Eigen::VectorXcd evolve(const Eigensystem& es, const Eigen::VectorXcd& state, double t) {
    Eigen::VectorXcd c = es.vectors.adjoint() * state;
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::polar(1.0, -t * es.values(i));
    return es.vectors * c;
}

Eigen::VectorXcd evolve(const OperatorBundle& bundle, const Eigen::VectorXcd& state, double t,
                        const EvolveOptions& opt) {
    if (t == 0.0) return state;
    if (bundle.dim() <= opt.dense_limit) return evolve(diagonalize(bundle.L_lambda.m, opt.dense_limit), state, t);
    auto r = krylov::expv(bundle.L_lambda.m, state, cplx(0.0, -t), opt.krylov);
    return r.v * std::exp(r.log_scale);
}

namespace {

// Pairwise data c_mn = conj(x_m) A~_mn x_n with frequencies e_m - e_n.
struct PairData {
    std::vector<cplx> coeff;
    std::vector<double> delta;
    std::vector<char> same_cluster;
    double min_gap{0.0};
};

cplx phase_average(double u) {
    if (std::abs(u) < 1e-8) return {1.0, 0.5 * u};
    return (std::polar(1.0, u) - 1.0) / cplx(0.0, u);
}

PairData pair_data(const Eigensystem& es, const SpMat& A, const Eigen::VectorXcd& bo) {
    const Eigen::Index n = es.values.size();
    Eigen::VectorXcd x = es.vectors.adjoint() * bo;
    Eigen::MatrixXcd at = es.vectors.adjoint() * (A * es.vectors);
    const double tol = 1e-9 * es.norm;
    std::vector<int> cluster(n, 0);
    for (Eigen::Index i = 1; i < n; ++i)
        cluster[i] = es.values(i) - es.values(i - 1) <= tol ? cluster[i - 1] : cluster[i - 1] + 1;
    PairData pd;
    pd.min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < n; ++i)
        if (cluster[i] != cluster[i - 1]) pd.min_gap = std::min(pd.min_gap, es.values(i) - es.values(i - 1));
    pd.coeff.reserve(n * n);
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index k = 0; k < n; ++k) {
            const cplx c = std::conj(x(m)) * at(m, k) * x(k);
            if (c == cplx{}) continue;
            pd.coeff.push_back(c);
            pd.delta.push_back(es.values(m) - es.values(k));
            pd.same_cluster.push_back(cluster[m] == cluster[k]);
        }
    return pd;
}

cplx mean_at(const PairData& pd, double T) {
    cplx s{};
    for (std::size_t i = 0; i < pd.coeff.size(); ++i) s += pd.coeff[i] * phase_average(T * pd.delta[i]);
    return s;
}

cplx closed(const PairData& pd) {
    cplx s{};
    for (std::size_t i = 0; i < pd.coeff.size(); ++i)
        if (pd.same_cluster[i]) s += pd.coeff[i];
    return s;
}

double row_sum_norm(const SpMat& a) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(a.rows());
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it) rows(it.row()) += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

} // namespace

ErgodicReport ergodic_mean(const Eigensystem& es, const SpMat& A, const SpMat& B, const Eigen::VectorXcd& omega,
                           double T, int n_steps) {
    require(T > 0.0, "ergodic_mean: T must be positive");
    require(n_steps >= 2, "ergodic_mean: need at least two quadrature steps");
    const double on = omega.norm();
    require(on > 0.0, "ergodic_mean: Omega must be nonzero");
    Eigen::VectorXcd bo = B * (omega / on);
    PairData pd = pair_data(es, A, bo);

    ErgodicReport r;
    r.T = T;
    r.finite_T_mean = mean_at(pd, T);
    r.extrapolated = 2.0 * mean_at(pd, 2.0 * T) - r.finite_T_mean;
    r.closed_form = closed(pd);
    r.error = std::abs(r.finite_T_mean - r.closed_form);
    r.min_gap = pd.min_gap;
    r.bound = std::min(row_sum_norm(A), row_sum_norm(SpMat(A.adjoint()))) * bo.squaredNorm();
    r.unreliable = std::isfinite(pd.min_gap) && pd.min_gap * T < 10.0;
    if (r.unreliable) r.warnings.push_back("minimal eigenvalue gap * T < 10: finite-T mean unreliable");

    // Composite Simpson on the eigenphase representation.
    const int steps = n_steps + (n_steps % 2);
    Eigen::VectorXcd x = es.vectors.adjoint() * bo;
    cplx acc{};
    for (int s = 0; s <= steps; ++s) {
        const double t = T * s / steps;
        Eigen::VectorXcd xt(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) xt(i) = x(i) * std::polar(1.0, -t * es.values(i));
        Eigen::VectorXcd y = es.vectors * xt;
        const cplx g = y.dot(A * y);
        const double w = (s == 0 || s == steps) ? 1.0 : (s % 2 ? 4.0 : 2.0);
        acc += w * g;
    }
    r.quadrature_mean = acc / (3.0 * steps);
    return r;
}

ErgodicReport ergodic_mean(const OperatorBundle& bundle, const SpMat& A, const SpMat& B,
                           const Eigen::VectorXcd& omega, double T, int n_steps) {
    return ergodic_mean(diagonalize(bundle.L_lambda.m), A, B, omega, T, n_steps);
}

double ergodic_error_envelope(const Eigensystem& es, const SpMat& A, const SpMat& B, const Eigen::VectorXcd& omega,
                              double T0, double T1, int n_samples) {
    require(T1 > T0 && T0 > 0.0, "envelope needs 0 < T0 < T1");
    Eigen::VectorXcd bo = B * (omega / omega.norm());
    PairData pd = pair_data(es, A, bo);
    const cplx lim = closed(pd);
    double s = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const double T = T0 + (T1 - T0) * (i + 0.5) / n_samples;
        s += std::norm(mean_at(pd, T) - lim);
    }
    return std::sqrt(s / n_samples);
}

nlohmann::json ErgodicReport::to_json() const {
    auto c = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
    return {{"T", T},
            {"finite_T_mean", c(finite_T_mean)},
            {"quadrature_mean", c(quadrature_mean)},
            {"extrapolated", c(extrapolated)},
            {"closed_form", c(closed_form)},
            {"error", error},
            {"min_gap", std::isfinite(min_gap) ? nlohmann::json(min_gap) : nlohmann::json(nullptr)},
            {"bound", bound},
            {"unreliable", unreliable},
            {"warnings", warnings}};
}

DeviationReport rte_deviation(const OperatorBundle& bundle, const Eigensystem& es, const Eigen::VectorXcd& omega,
                              const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, double T, double kernel_tol_rel) {
    DeviationReport r;
    const Eigen::VectorXcd om = omega / omega.norm();
    const SpMat a = bundle.dot_observable(A, "A").m;
    const SpMat b = bundle.dot_observable(B, "B").m;
    Eigen::VectorXcd bo = b * om;
    r.omega_BB = bo.squaredNorm();
    r.a_norm = Eigen::JacobiSVD<Eigen::MatrixXcd>(A).singularValues()(0);
    r.kms_residual = (bundle.L_lambda.m * om).norm();
    if (r.kms_residual > kernel_tol_rel * es.norm)
        r.warnings.push_back("KMS residual " + std::to_string(r.kms_residual) + " exceeds the kernel tolerance");

    const cplx c = A(0, 0);
    const bool scalar = A.isApprox(c * Eigen::MatrixXcd::Identity(A.rows(), A.cols()), 0.0);
    if (scalar) {
        // sigma^t(c 1) = c 1 for every t.
        r.omega_A = c;
        r.limit = c * r.omega_BB;
        r.finite_T_mean = r.limit;
    } else {
        r.omega_A = om.dot(a * om);
        PairData pd = pair_data(es, a, bo);
        r.limit = closed(pd);
        r.finite_T_mean = T > 0.0 ? mean_at(pd, T) : r.limit;
    }
    r.target = r.omega_BB * r.omega_A;
    r.deviation = std::abs(r.limit - r.target);
    r.normalized = r.a_norm > 0.0 ? r.deviation / r.a_norm : 0.0;
    return r;
}

nlohmann::json DeviationReport::to_json() const {
    auto c = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
    return {{"limit", c(limit)},   {"target", c(target)},         {"omega_BB", omega_BB},
            {"omega_A", c(omega_A)}, {"deviation", deviation},     {"a_norm", a_norm},
            {"normalized", normalized}, {"kms_residual", kms_residual}, {"finite_T_mean", c(finite_T_mean)},
            {"warnings", warnings}};
}

SuperposeReport superpose_xi(const XiMeasure& measure, const std::vector<XiResult>& results) {
    require(!results.empty(), "superpose_xi: no per-xi results");
    for (const auto& r : results)
        require(r.manifest_hash == results.front().manifest_hash,
                "superpose_xi: per-xi results come from inconsistent run manifests");
    double wsum = 0.0;
    for (const auto& [xi, w] : measure.atoms) {
        require(w >= 0.0, "superpose_xi: negative weight");
        wsum += w;
    }
    require(std::abs(wsum - 1.0) <= 1e-12, "superpose_xi: weights must sum to 1");
    SuperposeReport rep;
    for (const auto& [xi, w] : measure.atoms) {
        auto it = std::find_if(results.begin(), results.end(), [&](const XiResult& r) {
            return std::abs(r.xi.r - xi.r) <= 1e-12 * std::max(1.0, std::abs(xi.r)) &&
                   std::abs(r.xi.theta - xi.theta) <= 1e-12;
        });
        require(it != results.end(), "superpose_xi: measure atom without a solved result");
        rep.aggregate_limit += w * it->limit;
        rep.target += w * it->omega_BB * it->omega_A;
    }
    rep.deviation = std::abs(rep.aggregate_limit - rep.target);
    return rep;
}

nlohmann::json SuperposeReport::to_json() const {
    return {{"aggregate_limit", {aggregate_limit.real(), aggregate_limit.imag()}},
            {"target", {target.real(), target.imag()}},
            {"deviation", deviation}};
}

cplx theta_averaged_phase_factor(cplx f0, double r, double rho_crit, int n_theta) {
    require(n_theta >= 1, "need at least one theta node");
    cplx s{};
    for (int k = 0; k < n_theta; ++k) {
        const double th = 2.0 * std::numbers::pi * k / n_theta;
        s += std::polar(1.0, -phase(f0, {r, th}, rho_crit));
    }
    return s / double(n_theta);
}

double phase_bessel_closed_form(cplx f0, double r, double rho_crit) {
    require(r >= rho_crit, "r must be at least rho_crit");
    const double kappa = std::pow(2.0 * std::numbers::pi, -1.5) * std::sqrt(2.0 * (r - rho_crit));
    return boost::math::cyl_bessel_j(0, kappa * std::abs(f0));
}

std::vector<Eigen::VectorXcd> dyson_terms(const SpMat& l0, const SpMat& v, double lambda, const Eigen::VectorXcd& psi,
                                          double t, int order) {
    require(order >= 0, "Dyson order must be nonnegative");
    const Eigen::Index n = l0.rows();
    require(n <= 600, "dyson_terms uses a dense block exponential; dimension too large");
    const Eigen::Index nb = (order + 1) * n;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nb, nb);
    const Eigen::MatrixXcd l0d(l0), vd(v);
    for (int k = 0; k <= order; ++k) {
        m.block(k * n, k * n, n, n) = l0d;
        if (k < order) m.block(k * n, (k + 1) * n, n, n) = lambda * vd;
    }
    Eigen::MatrixXcd e = (cplx(0.0, -t) * m).exp();
    Eigen::VectorXcd z = Eigen::VectorXcd::Zero(nb);
    z.tail(n) = psi;
    Eigen::VectorXcd out = e * z;
    std::vector<Eigen::VectorXcd> terms(order + 1);
    for (int k = 0; k <= order; ++k) terms[order - k] = out.segment(k * n, n);
    return terms;
}

cplx dyson_expectation(const SpMat& l0, const SpMat& v, double lambda, const SpMat& A, const Eigen::VectorXcd& psi,
                       double t, int order) {
    auto u = dyson_terms(l0, v, lambda, psi, t, order);
    cplx s{};
    for (int p = 0; p <= order; ++p)
        for (int q = 0; p + q <= order; ++q) s += u[p].dot(A * u[q]);
    return s;
}

cplx exact_expectation(const SpMat& l, const SpMat& A, const Eigen::VectorXcd& psi, double t) {
    Eigensystem es = diagonalize(l);
    Eigen::VectorXcd y = evolve(es, psi, t);
    return y.dot(A * y);
}

std::string manifest_hash(const nlohmann::json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace bosedot
