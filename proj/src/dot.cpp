// dot.cpp — d-level dot operators

#include "bosedot/dot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bosedot/errors.hpp"

namespace bosedot {

DotSpec DotSpec::standard(int d) {
    DotSpec s;
    s.d = d;
    return s;
}

void DotSpec::validate() const {
    require(d >= 1, "dot dimension must be at least 1");
    if (energies.empty()) return;
    require(static_cast<int>(energies.size()) == d, "dot energies must have length d");
    for (int j = 1; j < d; ++j)
        require(energies[j] > energies[j - 1], "dot energies must be strictly increasing");
    for (double e : energies) require(std::isfinite(e), "dot energies must be finite");
}

std::vector<double> DotSpec::resolved_energies() const {
    validate();
    if (!energies.empty()) return energies;
    std::vector<double> e(d);
    for (int j = 0; j < d; ++j) e[j] = j;
    return e;
}

std::vector<double> DotSpec::bohr_frequencies() const {
    auto e = resolved_energies();
    std::vector<double> out;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) out.push_back(e[j] - e[i]);
    std::sort(out.begin(), out.end());
    std::vector<double> merged;
    for (double w : out)
        if (merged.empty() || w - merged.back() > 1e-12 * std::max(1.0, w)) merged.push_back(w);
    return merged;
}

Eigen::MatrixXcd build_hamiltonian(const DotSpec& spec) {
    auto e = spec.resolved_energies();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(spec.d, spec.d);
    for (int j = 0; j < spec.d; ++j) h(j, j) = e[j];
    return h;
}

LadderPair ladder_ops(const DotSpec& spec) {
    spec.validate();
    LadderPair p;
    p.raise = Eigen::MatrixXcd::Zero(spec.d, spec.d);
    for (int j = 0; j + 1 < spec.d; ++j) p.raise(j + 1, j) = 1.0;
    p.lower = p.raise.adjoint();
    return p;
}

Eigen::VectorXd gibbs_coefficients(const DotSpec& spec, double beta) {
    require(beta >= 0.0, "beta must be nonnegative");
    auto e = spec.resolved_energies();
    const double emin = *std::min_element(e.begin(), e.end());
    Eigen::VectorXd c(spec.d);
    for (int j = 0; j < spec.d; ++j) c(j) = std::isinf(beta) ? (j == 0 ? 1.0 : 0.0)
                                                           : std::exp(-0.5 * beta * (e[j] - emin));
    return c / c.norm();
}

Eigen::VectorXcd gibbs_vector(const DotSpec& spec, double beta) {
    Eigen::VectorXd c = gibbs_coefficients(spec, beta);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(spec.d * spec.d);
    for (int j = 0; j < spec.d; ++j) v(j * spec.d + j) = c(j);
    return v;
}

Eigen::MatrixXcd left_dot(const Eigen::MatrixXcd& x) {
    const auto d = x.rows();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k)
            if (x(i, k) != 0.0)
                for (Eigen::Index j = 0; j < d; ++j) out(i * d + j, k * d + j) = x(i, k);
    return out;
}

Eigen::MatrixXcd right_dot(const Eigen::MatrixXcd& x) {
    const auto d = x.rows();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index l = 0; l < d; ++l)
                if (x(j, l) != 0.0) out(i * d + j, i * d + l) = x(j, l);
    return out;
}

Eigen::MatrixXcd dot_liouvillian(const DotSpec& spec) {
    Eigen::MatrixXcd h = build_hamiltonian(spec);
    return left_dot(h) - right_dot(h);
}

Eigen::MatrixXcd condensate_term_single(const DotSpec& spec, const CondensatePoint& xi,
                                        double rho_crit, cplx g0) {
    require(xi.r >= rho_crit, "condensate density r must be at least rho_crit");
    auto g = ladder_ops(spec);
    const double amp = -2.0 * std::pow(2.0 * std::numbers::pi, -1.5) * std::sqrt(xi.r - rho_crit);
    const cplx phase = std::polar(1.0, xi.theta);
    return amp * (g.raise * (std::conj(g0) * phase) + g.lower * (g0 * std::conj(phase)));
}

Eigen::MatrixXcd condensate_term(const DotSpec& spec, const CondensatePoint& xi,
                                 double rho_crit, cplx g0) {
    Eigen::MatrixXcd k1 = condensate_term_single(spec, xi, rho_crit, g0);
    return left_dot(k1) - right_dot(k1.conjugate());
}

} // namespace bosedot
