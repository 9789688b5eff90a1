// liouville.hpp — standard Liouvillian, conjugate operator, conserved charge, KMS vector

#pragma once

#include <functional>
#include <memory>
#include <optional>

#include <json.hpp>

#include "bosedot/dot.hpp"
#include "bosedot/fock.hpp"
#include "bosedot/krylov.hpp"
#include "bosedot/reservoir.hpp"

namespace bosedot {

enum class ConjugateScheme { log_grid_dilation, custom_antisymmetric };

struct ConjugateOps {
    ConjugateScheme scheme{ConjugateScheme::log_grid_dilation};
    SparseOperator generator;          // real antisymmetric R
    SparseOperator A;                  // i R, Hermitian
    SparseOperator C1;                 // i [L_lambda, A]
    std::optional<SparseOperator> I1;  // (C1 - Lambda) / lambda, absent at lambda = 0
};

struct OperatorBundle {
    DotSpec dot;
    ModeGrid grid;
    TruncationSpec trunc;
    std::shared_ptr<const FockBasis> basis;
    double beta{1.0};
    double lambda{0.0};
    std::optional<CondensatePoint> xi;
    double rho_crit{0.0};

    SparseOperator L0, I, K_xi, L_lambda, Lambda, Q;
    SparseOperator I_left;             // left-acting blocks only, used by the KMS vector
    std::optional<ConjugateOps> conj;

    int d() const { return dot.d; }
    std::size_t field_dim() const { return basis->size(); }
    std::size_t dim() const { return static_cast<std::size_t>(d() * d()) * field_dim(); }
    // phi_i (x) phi_j (x) field state f
    std::size_t index(int i, int j, std::size_t f) const { return static_cast<std::size_t>(i * d() + j) * field_dim() + f; }
    Eigen::VectorXd lambda_diagonal() const;
    // Gibbs vector (x) doubled vacuum
    Eigen::VectorXcd omega_beta0() const;
    // pi(X (x) 1): dot matrix on the left factor, identity elsewhere
    SparseOperator dot_observable(const Eigen::MatrixXcd& x, const std::string& label = "X") const;
};

struct InteractionOps {
    SparseOperator I, K_xi, I_left;
};

SparseOperator assemble_L0(const DotSpec& dot, const ModeGrid& grid, const FockBasis& basis);
InteractionOps assemble_interaction(const DotSpec& dot, const ModeGrid& grid, const FockBasis& basis,
                                    const std::optional<CondensatePoint>& xi, double rho_crit);
// level_L - level_R + N_L - N_R
SparseOperator assemble_charge(const DotSpec& dot, const FockBasis& basis);

OperatorBundle assemble_bundle(const DotSpec& dot, const ModeGrid& grid, const TruncationSpec& trunc, double beta,
                               double lambda, const std::optional<CondensatePoint>& xi = std::nullopt,
                               double rho_crit = 0.0);

// One-body central difference of d/d(ln omega) on a uniform log grid (real antisymmetric, truncated ends).
SpMat dilation_one_body(const ModeGrid& grid);
SpMat random_antisymmetric_one_body(int n, unsigned long long seed);

ConjugateOps assemble_conjugate(const OperatorBundle& bundle, ConjugateScheme scheme, unsigned long long seed = 1);
void attach_conjugate(OperatorBundle& bundle, ConjugateScheme scheme, unsigned long long seed = 1);

// Interior-row relative defect ||(i[omega, a_d] - omega) phi|| / ||omega phi|| for phi_j = profile(omega_j).
double one_body_dilation_defect(const ModeGrid& grid, const std::function<double(double)>& profile);

struct KmsResult {
    Eigen::VectorXcd omega;
    double residual{0.0};              // ||L_lambda Omega||
    double krylov_error{0.0};
    int krylov_steps{0};
};
KmsResult kms_vector(const OperatorBundle& bundle, const krylov::ExpvOptions& opt = {});

nlohmann::json bundle_manifest(const OperatorBundle& bundle);

ConjugateScheme parse_conjugate_scheme(const std::string& name);
std::string to_string(ConjugateScheme s);

} // namespace bosedot
