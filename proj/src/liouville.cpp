// liouville.cpp — assembly of L_lambda, Q, A, C1 and the perturbed KMS vector

#include "bosedot/liouville.hpp"

#include <cmath>
#include <random>

#include "bosedot/errors.hpp"

namespace bosedot {
namespace {

SpMat embed_field(int d, const SpMat& field) {
    return kron(Eigen::MatrixXcd::Identity(d * d, d * d), field);
}

SpMat embed_dot(const FockBasis& basis, const Eigen::MatrixXcd& dot2) {
    return kron(dot2, identity(static_cast<Eigen::Index>(basis.size())));
}

void check_grid(const ModeGrid& grid, const FockBasis& basis) {
    require(grid.size() == basis.n_modes(), "grid size must equal the truncation's n_modes");
    grid.validate();
}

} // namespace

SparseOperator assemble_L0(const DotSpec& dot, const ModeGrid& grid, const FockBasis& basis) {
    check_grid(grid, basis);
    auto w = grid.omegas();
    SpMat field = dgamma(basis, w, Side::left).m - dgamma(basis, w, Side::right).m;
    SpMat l0 = embed_dot(basis, dot_liouvillian(dot)) + embed_field(dot.d, field);
    drop_zeros(l0);
    return {l0, true, "L0"};
}

InteractionOps assemble_interaction(const DotSpec& dot, const ModeGrid& grid, const FockBasis& basis,
                                    const std::optional<CondensatePoint>& xi, double rho_crit) {
    check_grid(grid, basis);
    for (double r : grid.occupations()) require(r >= 0.0, "thermal occupations must be nonnegative");
    const auto lc = grid.left_couplings();   // sqrt(1+rho) c
    const auto rc = grid.right_couplings();  // sqrt(rho) conj(c)
    std::vector<cplx> lc_minus, rc_minus;    // sqrt(rho) c, sqrt(1+rho) conj(c)
    for (std::size_t j = 0; j < grid.modes.size(); ++j) {
        const double rho = bose_occupation(grid.beta, grid.modes[j].omega);
        lc_minus.push_back(std::sqrt(rho) * grid.modes[j].amplitude());
        rc_minus.push_back(std::sqrt(1.0 + rho) * std::conj(grid.modes[j].amplitude()));
    }
    SpMat x1 = smeared_field(basis, lc, Side::left, Kind::annihilate).m +
               smeared_field(basis, rc, Side::right, Kind::create).m;
    SpMat x2 = smeared_field(basis, lc_minus, Side::left, Kind::create).m +
               smeared_field(basis, rc_minus, Side::right, Kind::annihilate).m;

    auto g = ladder_ops(dot);
    SpMat plus = plus_adjoint(kron(left_dot(g.raise), x1));
    SpMat minus = plus_adjoint(kron(right_dot(g.raise), x2));
    SpMat i_full = plus - minus;
    drop_zeros(i_full);

    const Eigen::Index n = static_cast<Eigen::Index>(dot.d * dot.d) * static_cast<Eigen::Index>(basis.size());
    SpMat k_full(n, n), k_left(n, n);
    if (xi) {
        require(std::isfinite(std::abs(grid.g0)), "condensate coupling needs a finite g(0)");
        k_full = embed_dot(basis, condensate_term(dot, *xi, rho_crit, grid.g0));
        k_left = embed_dot(basis, left_dot(condensate_term_single(dot, *xi, rho_crit, grid.g0)));
    }
    SpMat il = plus + k_left;
    drop_zeros(il);
    return {{i_full, true, "I"}, {k_full, true, "K_xi"}, {il, true, "I_left"}};
}

SparseOperator assemble_charge(const DotSpec& dot, const FockBasis& basis) {
    Eigen::MatrixXcd lev = Eigen::MatrixXcd::Zero(dot.d, dot.d);
    for (int j = 0; j < dot.d; ++j) lev(j, j) = double(j);
    SpMat field = total_number(basis, Side::left).m - total_number(basis, Side::right).m;
    SpMat q = embed_dot(basis, left_dot(lev) - right_dot(lev)) + embed_field(dot.d, field);
    drop_zeros(q);
    return {q, true, "Q"};
}

Eigen::VectorXd OperatorBundle::lambda_diagonal() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
    Eigen::VectorXd field = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(field_dim()));
    auto w = grid.omegas();
    for (std::size_t f = 0; f < field_dim(); ++f)
        for (auto mode : basis->state(f)) field(f) += w[mode % static_cast<std::uint32_t>(basis->n_modes())];
    for (int p = 0; p < d() * d(); ++p) out.segment(p * field.size(), field.size()) = field;
    return out;
}

Eigen::VectorXcd OperatorBundle::omega_beta0() const {
    Eigen::VectorXcd g = gibbs_vector(dot, beta);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim()));
    for (int p = 0; p < d() * d(); ++p) out(static_cast<Eigen::Index>(p * field_dim())) = g(p);
    return out;
}

SparseOperator OperatorBundle::dot_observable(const Eigen::MatrixXcd& x, const std::string& label) const {
    require(x.rows() == d() && x.cols() == d(), "dot observable must be d x d");
    SpMat m = kron(left_dot(x), identity(static_cast<Eigen::Index>(field_dim())));
    return {m, x.isApprox(x.adjoint(), 0.0), label};
}

OperatorBundle assemble_bundle(const DotSpec& dot, const ModeGrid& grid, const TruncationSpec& trunc, double beta,
                               double lambda, const std::optional<CondensatePoint>& xi, double rho_crit) {
    dot.validate();
    require(beta > 0.0, "beta must be positive");
    require(std::isfinite(lambda), "lambda must be finite");
    require(std::abs(grid.beta - beta) <= 1e-14 * beta, "grid occupations were built at a different beta");
    const std::size_t full = static_cast<std::size_t>(dot.d * dot.d) * trunc.field_dimension();
    if (trunc.field_dimension() > trunc.dim_cap || full > trunc.dim_cap) throw DimensionCapError(full, trunc.dim_cap);

    OperatorBundle b;
    b.dot = dot;
    b.grid = grid;
    b.trunc = trunc;
    b.basis = std::make_shared<const FockBasis>(trunc);
    b.beta = beta;
    b.lambda = lambda;
    b.xi = xi;
    b.rho_crit = rho_crit;

    b.L0 = assemble_L0(dot, grid, *b.basis);
    auto inter = assemble_interaction(dot, grid, *b.basis, xi, rho_crit);
    b.I = std::move(inter.I);
    b.K_xi = std::move(inter.K_xi);
    b.I_left = std::move(inter.I_left);
    SpMat pert = b.I.m + b.K_xi.m;
    SpMat l = b.L0.m + lambda * pert;
    drop_zeros(l);
    b.L_lambda = {l, true, "L_lambda"};
    b.Lambda = {embed_field(dot.d, lambda_op(*b.basis, grid.omegas()).m), true, "Lambda"};
    b.Q = assemble_charge(dot, *b.basis);
    return b;
}

SpMat dilation_one_body(const ModeGrid& grid) {
    require(grid.spacing == Spacing::log && grid.step > 0.0, "log_grid_dilation needs a uniform log grid");
    const int n = grid.size();
    std::vector<Eigen::Triplet<cplx>> trips;
    const double c = 0.5 / grid.step;
    for (int j = 0; j + 1 < n; ++j) {
        trips.emplace_back(j, j + 1, c);
        trips.emplace_back(j + 1, j, -c);
    }
    SpMat d(n, n);
    d.setFromTriplets(trips.begin(), trips.end());
    return d;
}

SpMat random_antisymmetric_one_body(int n, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = nd(rng);
    Eigen::MatrixXd a = 0.5 * (m - m.transpose()) / std::sqrt(double(n));
    return a.cast<cplx>().sparseView();
}

ConjugateOps assemble_conjugate(const OperatorBundle& bundle, ConjugateScheme scheme, unsigned long long seed) {
    const FockBasis& basis = *bundle.basis;
    SpMat one = scheme == ConjugateScheme::log_grid_dilation ? dilation_one_body(bundle.grid)
                                                             : random_antisymmetric_one_body(basis.n_modes(), seed);
    SpMat r_field = dgamma_matrix(basis, one, Side::left).m - dgamma_matrix(basis, one, Side::right).m;
    SpMat r = embed_field(bundle.d(), r_field);
    SpMat r_t = r.transpose();
    r = 0.5 * (r - r_t);
    drop_zeros(r);

    ConjugateOps c;
    c.scheme = scheme;
    c.generator = {r, false, "R"};
    c.A = {cplx(0.0, 1.0) * r, true, "A"};
    SpMat p = bundle.L_lambda.m * c.A.m;
    SpMat c1 = cplx(0.0, 1.0) * (p - SpMat(p.adjoint()));
    drop_zeros(c1);
    c.C1 = {c1, true, "C1"};
    if (bundle.lambda != 0.0) {
        SpMat i1 = (c1 - bundle.Lambda.m) / bundle.lambda;
        drop_zeros(i1);
        c.I1 = SparseOperator{i1, true, "I1"};
    }
    return c;
}

void attach_conjugate(OperatorBundle& bundle, ConjugateScheme scheme, unsigned long long seed) {
    bundle.conj = assemble_conjugate(bundle, scheme, seed);
}

double one_body_dilation_defect(const ModeGrid& grid, const std::function<double(double)>& profile) {
    SpMat d = dilation_one_body(grid);
    const int n = grid.size();
    require(n >= 3, "dilation defect needs at least three modes");
    auto w = grid.omegas();
    Eigen::VectorXd phi(n);
    for (int j = 0; j < n; ++j) phi(j) = profile(w[j]);
    double num = 0.0, den = 0.0;
    for (int j = 1; j + 1 < n; ++j) {
        double row = 0.0;
        for (SpMat::InnerIterator it(d, j); it; ++it) {
            // column-major: entries of column j, so read the transpose (D antisymmetric)
            const int k = static_cast<int>(it.row());
            row += (w[k] - w[j]) * (-it.value().real()) * phi(k);
        }
        num += std::pow(row - w[j] * phi(j), 2);
        den += std::pow(w[j] * phi(j), 2);
    }
    return std::sqrt(num / den);
}

KmsResult kms_vector(const OperatorBundle& bundle, const krylov::ExpvOptions& opt) {
    KmsResult res;
    Eigen::VectorXcd o0 = bundle.omega_beta0();
    if (bundle.lambda == 0.0) {
        res.omega = o0;
    } else {
        SpMat h = bundle.L0.m + bundle.lambda * bundle.I_left.m;
        auto e = krylov::expv(h, o0, cplx(-0.5 * bundle.beta, 0.0), opt);
        res.omega = e.v / e.v.norm();
        res.krylov_error = e.error_estimate;
        res.krylov_steps = e.steps;
    }
    res.residual = (bundle.L_lambda.m * res.omega).norm();
    return res;
}

nlohmann::json bundle_manifest(const OperatorBundle& b) {
    nlohmann::json j;
    j["dot"] = {{"d", b.dot.d}, {"energies", b.dot.resolved_energies()}};
    j["beta"] = b.beta;
    j["lambda"] = b.lambda;
    j["rho_crit"] = b.rho_crit;
    if (b.xi) j["xi"] = {{"r", b.xi->r}, {"theta", b.xi->theta}};
    else j["xi"] = nullptr;
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : b.grid.modes)
        modes.push_back({m.omega, m.weight, m.g.real(), m.g.imag()});
    j["grid"] = {{"dispersion", to_string(b.grid.dispersion)},
                 {"spacing", to_string(b.grid.spacing)},
                 {"step", b.grid.step},
                 {"g0", {b.grid.g0.real(), b.grid.g0.imag()}},
                 {"modes", modes}};
    j["trunc"] = {{"n_modes", b.trunc.n_modes}, {"n_max", b.trunc.n_max}, {"dim_cap", b.trunc.dim_cap}};
    j["dimension"] = b.dim();
    j["nnz"] = {{"L_lambda", b.L_lambda.nnz()}, {"I", b.I.nnz()}};
    if (b.conj) j["conjugate_scheme"] = to_string(b.conj->scheme);
    return j;
}

ConjugateScheme parse_conjugate_scheme(const std::string& name) {
    if (name == "log_grid_dilation") return ConjugateScheme::log_grid_dilation;
    if (name == "custom_antisymmetric") return ConjugateScheme::custom_antisymmetric;
    throw ValidationError("unknown conjugate scheme '" + name + "'");
}

std::string to_string(ConjugateScheme s) {
    return s == ConjugateScheme::log_grid_dilation ? "log_grid_dilation" : "custom_antisymmetric";
}

} // namespace bosedot
