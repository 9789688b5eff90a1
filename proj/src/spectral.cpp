// spectral.cpp — eigensolvers and the spectral diagnostics built on them

#include "bosedot/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/SparseLU>

#include "bosedot/errors.hpp"

namespace bosedot {
namespace {

struct Pairs {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
};

// k eigenpairs nearest 0, sorted by |e|.
Pairs nearest_zero(const Eigen::VectorXd& evals, const Eigen::MatrixXcd& evecs, int k) {
    std::vector<Eigen::Index> order(evals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(evals(a)) < std::abs(evals(b)); });
    k = std::min<int>(k, static_cast<int>(evals.size()));
    Pairs p;
    p.values.resize(k);
    p.vectors.resize(evecs.rows(), k);
    for (int i = 0; i < k; ++i) {
        p.values(i) = evals(order[i]);
        p.vectors.col(i) = evecs.col(order[i]);
    }
    return p;
}

Pairs dense_solve(const SpMat& l, int k, double& norm) {
    Eigen::MatrixXcd dense(l);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense Hermitian eigensolver failed", 0.0);
    norm = es.eigenvalues().cwiseAbs().maxCoeff();
    return nearest_zero(es.eigenvalues(), es.eigenvectors(), k);
}

// Shift-invert subspace iteration with Rayleigh-Ritz; blocks handle exact degeneracy.
Pairs shift_invert_solve(const SpMat& l, int k, double norm, const SolverOptions& opt, int& iters,
                         std::vector<std::string>& warnings) {
    const Eigen::Index n = l.rows();
    const int p = static_cast<int>(std::min<Eigen::Index>(n, k + std::max(10, k)));
    const double sigma = -0.41421356237 * 1e-6 * norm;
    SpMat shifted = l - sigma * identity(n);
    shifted.makeCompressed();
    Eigen::SparseLU<SpMat> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) throw ConvergenceError("sparse LU of the shifted Liouvillian failed", 0.0);

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = cplx(nd(rng), nd(rng));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(x);
    x = qr.householderQ() * Eigen::MatrixXcd::Identity(n, p);

    Pairs best;
    double worst = 0.0;
    for (iters = 1; iters <= opt.max_iter; ++iters) {
        Eigen::MatrixXcd y = lu.solve(x);
        Eigen::HouseholderQR<Eigen::MatrixXcd> q2(y);
        x = q2.householderQ() * Eigen::MatrixXcd::Identity(n, p);
        Eigen::MatrixXcd lx = l * x;
        Eigen::MatrixXcd h = x.adjoint() * lx;
        h = 0.5 * (h + h.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
        best = nearest_zero(es.eigenvalues(), x * es.eigenvectors(), k);
        worst = 0.0;
        for (int i = 0; i < best.values.size(); ++i)
            worst = std::max(worst, (l * best.vectors.col(i) - best.values(i) * best.vectors.col(i)).norm());
        if (worst <= opt.tol * norm) return best;
    }
    warnings.push_back("shift-invert iteration stopped at max_iter with residual " + std::to_string(worst));
    throw ConvergenceError("shift-invert iteration did not converge", worst);
}

Eigen::VectorXcd pair_overlap_vector(const OperatorBundle& b, const Eigen::VectorXcd& psi) {
    // sum_p conj(gibbs_p) psi_{p, f} restricted to Lambda_f <= |lambda|
    Eigen::VectorXcd g = gibbs_vector(b.dot, b.beta);
    const auto fd = static_cast<Eigen::Index>(b.field_dim());
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(fd);
    for (int p = 0; p < b.d() * b.d(); ++p)
        if (g(p) != cplx{}) out += std::conj(g(p)) * psi.segment(p * fd, fd);
    Eigen::VectorXd lam = b.lambda_diagonal().head(fd);
    for (Eigen::Index f = 0; f < fd; ++f)
        if (lam(f) > std::abs(b.lambda)) out(f) = 0.0;
    return out;
}

} // namespace

std::vector<std::size_t> panel_indices(const OperatorBundle& b, std::vector<std::string>* labels) {
    std::vector<std::size_t> fields{0};
    std::vector<std::string> fl{"vac"};
    const int shown = std::min(b.basis->n_modes(), 4);
    if (b.basis->n_max() >= 1) {
        for (Side s : {Side::left, Side::right})
            for (int j = 0; j < shown; ++j) {
                fields.push_back(*b.basis->index({b.basis->global_mode(j, s)}));
                fl.push_back(std::string("1_") + std::to_string(j) + (s == Side::left ? "L" : "R"));
            }
    }
    std::vector<std::size_t> out;
    for (int i = 0; i < b.d(); ++i)
        for (int j = 0; j < b.d(); ++j)
            for (std::size_t q = 0; q < fields.size(); ++q) {
                out.push_back(b.index(i, j, fields[q]));
                if (labels) labels->push_back(std::to_string(i) + std::to_string(j) + ":" + fl[q]);
            }
    return out;
}

double lambda_weight(const OperatorBundle& b, const Eigen::VectorXcd& psi) {
    Eigen::VectorXd lam = b.lambda_diagonal();
    return std::sqrt(std::max(0.0, (lam.array() * psi.array().abs2()).sum()));
}

double structure_overlap(const OperatorBundle& b, const Eigen::VectorXcd& psi) {
    return pair_overlap_vector(b, psi).norm();
}

VirialDiagnostics virial_check(const OperatorBundle& b, const Eigen::VectorXcd& psi) {
    require(b.conj.has_value(), "virial_check needs a bundle with an attached conjugate operator");
    VirialDiagnostics v;
    v.virial_value = psi.dot(b.conj->C1.m * psi).real();
    v.lambda_weight = lambda_weight(b, psi);
    return v;
}

Eigen::VectorXcd project_onto(const Eigen::MatrixXcd& basis, const Eigen::VectorXcd& v) {
    Eigen::VectorXcd p = basis * (basis.adjoint() * v);
    const double n = p.norm();
    require(n > 0.0, "projection onto the kernel vanishes");
    return p / n;
}

SpectralReport solve_near_zero(const OperatorBundle& b, const SolverOptions& opt) {
    require(opt.k >= 1, "solve_near_zero: k must be positive");
    SpectralReport rep;
    const SpMat& l = b.L_lambda.m;
    const int k = static_cast<int>(std::min<std::size_t>(opt.k, b.dim()));
    Pairs pr;
    if (!opt.force_sparse && b.dim() <= opt.dense_limit) {
        rep.path = "dense";
        pr = dense_solve(l, k, rep.norm_L);
    } else {
        rep.path = "shift_invert";
        rep.norm_L = krylov::spectral_norm(l, 120, static_cast<unsigned>(opt.seed));
        pr = shift_invert_solve(l, k, rep.norm_L, opt, rep.iterations, rep.warnings);
    }
    rep.kernel_tol = opt.kernel_tol_rel * rep.norm_L;
    rep.vectors = pr.vectors;
    std::vector<Eigen::Index> kern;
    for (int i = 0; i < pr.values.size(); ++i) {
        rep.eigenvalues.push_back(pr.values(i));
        rep.residuals.push_back((l * pr.vectors.col(i) - pr.values(i) * pr.vectors.col(i)).norm());
        if (std::abs(pr.values(i)) < rep.kernel_tol) kern.push_back(i);
    }
    if (!kern.empty()) {
        Eigen::MatrixXcd kv(l.rows(), static_cast<Eigen::Index>(kern.size()));
        for (std::size_t c = 0; c < kern.size(); ++c) kv.col(c) = pr.vectors.col(kern[c]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(kv);
        qr.setThreshold(1e-10);
        rep.kernel_dimension = static_cast<int>(qr.rank());
        rep.kernel_basis = (qr.householderQ() * Eigen::MatrixXcd::Identity(kv.rows(), kv.cols())).leftCols(rep.kernel_dimension);
    }
    if (rep.kernel_dimension == k)
        rep.warnings.push_back("all requested eigenpairs lie in the kernel; its dimension may exceed k");

    // Near-degeneracy among the nonzero eigenvalues.
    std::vector<double> nz;
    for (double e : rep.eigenvalues)
        if (std::abs(e) >= rep.kernel_tol) nz.push_back(e);
    std::sort(nz.begin(), nz.end());
    for (std::size_t i = 1; i < nz.size(); ++i)
        if (nz[i] - nz[i - 1] < 10.0 * opt.tol * rep.norm_L) {
            rep.warnings.push_back("near-degenerate eigenvalues at " + std::to_string(nz[i]));
            break;
        }

    auto panel = panel_indices(b, &rep.panel_labels);
    for (int i = 0; i < pr.values.size(); ++i) {
        Eigen::VectorXcd psi = pr.vectors.col(i);
        VectorDiagnostics dg;
        dg.eigenvalue = rep.eigenvalues[i];
        dg.residual = rep.residuals[i];
        if (b.conj) dg.virial = virial_check(b, psi).virial_value;
        dg.lambda_weight = lambda_weight(b, psi);
        dg.structure_overlap = structure_overlap(b, psi);
        for (auto idx : panel) dg.panel.push_back(std::abs(psi(static_cast<Eigen::Index>(idx))));
        rep.diagnostics.push_back(std::move(dg));
    }
    return rep;
}

nlohmann::json SpectralReport::to_json() const {
    nlohmann::json j;
    j["path"] = path;
    j["iterations"] = iterations;
    j["norm_L"] = norm_L;
    j["kernel_tol"] = kernel_tol;
    j["kernel_dimension"] = kernel_dimension;
    j["eigenvalues"] = eigenvalues;
    j["residuals"] = residuals;
    j["panel_labels"] = panel_labels;
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& d : diagnostics) {
        diag.push_back({{"eigenvalue", d.eigenvalue},
                        {"residual", d.residual},
                        {"virial", std::isnan(d.virial) ? nlohmann::json(nullptr) : nlohmann::json(d.virial)},
                        {"lambda_weight", d.lambda_weight},
                        {"structure_overlap", d.structure_overlap},
                        {"panel", d.panel}});
    }
    j["diagnostics"] = diag;
    j["warnings"] = warnings;
    return j;
}

KernelStructure kernel_structure(const OperatorBundle& b, const Eigen::MatrixXcd& kernel_basis,
                                 const Eigen::VectorXcd& psi) {
    KernelStructure ks;
    ks.overlap = structure_overlap(b, psi);
    // Orthogonal complement of psi inside the kernel.
    Eigen::MatrixXcd q = kernel_basis - psi * (psi.adjoint() * kernel_basis);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(q);
    qr.setThreshold(1e-8);
    ks.orthogonal_dimension = static_cast<int>(qr.rank());
    Eigen::MatrixXcd perp;
    if (ks.orthogonal_dimension > 0)
        perp = (qr.householderQ() * Eigen::MatrixXcd::Identity(q.rows(), q.cols())).leftCols(ks.orthogonal_dimension);
    for (auto idx : panel_indices(b)) {
        double v = 0.0;
        if (ks.orthogonal_dimension > 0) v = perp.row(static_cast<Eigen::Index>(idx)).norm();
        ks.panel_overlaps.push_back(v);
        ks.max_panel_overlap = std::max(ks.max_panel_overlap, v);
    }
    return ks;
}

Eigen::MatrixXd level_shift_matrix(int d, double beta) {
    require(d >= 2, "level shift needs d >= 2 (no transitions for d = 1)");
    require(beta > 0.0, "beta must be positive");
    const double a = bose_occupation(beta, 1.0);
    const double off = -std::sqrt(a * (1.0 + a));
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) g(i, i) = 1.0 + 2.0 * a;
    g(0, 0) = a;
    g(d - 1, d - 1) = 1.0 + a;
    for (int i = 0; i + 1 < d; ++i) g(i, i + 1) = g(i + 1, i) = off;
    return g;
}

LevelShiftReport level_shift(const DotSpec& dot, double beta, double shell_weight) {
    auto e = dot.resolved_energies();
    for (int j = 1; j < dot.d; ++j)
        require(std::abs(e[j] - e[j - 1] - 1.0) < 1e-12, "level shift assumes unit-spaced dot energies");
    LevelShiftReport r;
    r.a = bose_occupation(beta, 1.0);
    r.gamma_tilde = level_shift_matrix(dot.d, beta);
    r.shell_weight = shell_weight;
    r.gamma = shell_weight * r.gamma_tilde;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.gamma_tilde);
    r.eigenvalues = es.eigenvalues();
    r.gap = es.eigenvalues()(1);
    r.kernel_vector = es.eigenvectors().col(0);
    if (r.kernel_vector.sum() < 0) r.kernel_vector = -r.kernel_vector;
    r.gibbs_residual = (r.gamma_tilde * gibbs_coefficients(dot, beta)).norm();
    return r;
}

nlohmann::json LevelShiftReport::to_json() const {
    nlohmann::json j;
    j["a"] = a;
    j["shell_weight"] = shell_weight;
    j["gap"] = gap;
    j["gibbs_residual"] = gibbs_residual;
    j["eigenvalues"] = std::vector<double>(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    j["kernel_vector"] = std::vector<double>(kernel_vector.data(), kernel_vector.data() + kernel_vector.size());
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < gamma_tilde.rows(); ++i) {
        std::vector<double> row(gamma_tilde.cols());
        for (int c = 0; c < gamma_tilde.cols(); ++c) row[c] = gamma_tilde(i, c);
        rows.push_back(row);
    }
    j["gamma_tilde"] = rows;
    if (!std::isnan(alignment)) j["gibbs_alignment"] = alignment;
    return j;
}

SandwichReport resolvent_sandwich(const OperatorBundle& b, double eps, double rho_cut) {
    require(eps > 0.0, "epsilon must be positive");
    require(rho_cut >= 0.0, "rho_cut must be nonnegative");
    const int d = b.d();
    SandwichReport rep;

    // Local spacing near the unit Bohr frequency.
    const auto w = b.grid.omegas();
    double h = b.grid.step;
    if (b.grid.spacing == Spacing::log) h = b.grid.step; // d(ln omega) equals d omega at omega = 1
    if (b.grid.spacing == Spacing::custom) {
        std::vector<double> s(w);
        std::sort(s.begin(), s.end());
        h = s.size() > 1 ? s[1] - s[0] : 1.0;
        for (std::size_t i = 1; i < s.size(); ++i)
            if (std::abs(s[i] - 1.0) < std::abs(s[i - 1] - 1.0) + 1e-300) h = s[i] - s[i - 1];
    }
    rep.h_over_eps = h / eps;
    if (rep.h_over_eps > 0.1) rep.warnings.push_back("h/eps > 0.1: Lorentzian under-resolved");

    Eigen::VectorXd lam = b.lambda_diagonal();
    const SpMat& l0 = b.L0.m;
    Eigen::VectorXd l0d = Eigen::VectorXd::Zero(l0.rows());
    for (int k = 0; k < l0.outerSize(); ++k)
        for (SpMat::InnerIterator it(l0, k); it; ++it)
            if (it.row() == it.col()) l0d(it.row()) = it.value().real();
    const auto fd = static_cast<Eigen::Index>(b.field_dim());

    std::vector<Eigen::VectorXcd> v(d);
    for (int i = 0; i < d; ++i) {
        v[i] = b.I.m.col(static_cast<Eigen::Index>(b.index(i, i, 0)));
        // complement of P_rho = (diagonal dot pairs) x P(Lambda <= rho_cut)
        for (int p = 0; p < d; ++p) {
            const Eigen::Index base = (p * d + p) * fd;
            for (Eigen::Index f = 0; f < fd; ++f)
                if (lam(base + f) <= rho_cut) v[i](base + f) = 0.0;
        }
    }
    Eigen::VectorXd rbar2 = (l0d.array().square() + eps * eps).inverse();
    rep.M.resize(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            rep.M(i, k) = eps * v[i].dot((rbar2.cast<cplx>().array() * v[k].array()).matrix());

    Eigen::MatrixXd gt = level_shift_matrix(d, b.beta);
    const Eigen::MatrixXcd gtc = gt.cast<cplx>();
    rep.c_fit = (gtc.adjoint() * rep.M).trace().real() / gt.squaredNorm();
    rep.misfit = (rep.M - rep.c_fit * gtc).norm() / rep.M.norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rep.M + rep.M.adjoint()));
    Eigen::VectorXd gc = gibbs_coefficients(b.dot, b.beta);
    rep.gibbs_overlap = std::abs(es.eigenvectors().col(0).dot(gc.cast<cplx>()));
    return rep;
}

nlohmann::json SandwichReport::to_json() const {
    nlohmann::json j;
    j["c_fit"] = c_fit;
    j["misfit"] = misfit;
    j["gibbs_overlap"] = gibbs_overlap;
    j["h_over_eps"] = h_over_eps;
    j["warnings"] = warnings;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < M.cols(); ++c) row.push_back({M(i, c).real(), M(i, c).imag()});
        rows.push_back(row);
    }
    j["M"] = rows;
    return j;
}

FgrReport fgr_check(const ModeGrid& grid, const DotSpec& dot, double delta) {
    require(delta > 0.0, "window width must be positive");
    FgrReport r;
    r.effective = true;
    for (double gap : dot.bohr_frequencies()) {
        FgrEntry e;
        e.gap = gap;
        for (const auto& m : grid.modes)
            if (std::abs(m.omega - gap) < delta) e.weight += m.weight * std::norm(m.g);
        e.density = e.weight / (2.0 * delta);
        r.effective = r.effective && e.weight > 0.0;
        r.entries.push_back(e);
    }
    if (r.entries.empty()) r.effective = false;
    return r;
}

nlohmann::json FgrReport::to_json() const {
    nlohmann::json j;
    j["effective"] = effective;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries) rows.push_back({{"gap", e.gap}, {"weight", e.weight}, {"density", e.density}});
    j["entries"] = rows;
    return j;
}

} // namespace bosedot
