// sparse.hpp — labelled sparse operator on the truncated space

#pragma once

#include <complex>
#include <ostream>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bosedot {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx>;

struct SparseOperator {
    SpMat m;
    bool hermitian{false};
    std::string label;

    SparseOperator() = default;
    SparseOperator(SpMat mat, bool herm, std::string lbl);

    Eigen::Index dim() const { return m.rows(); }
    Eigen::Index nnz() const { return m.nonZeros(); }
    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return m * v; }

    // max |M - M^dagger| over entries
    double hermiticity_residual() const;
    double max_abs() const;
    // Largest absolute row sum; bounds the spectral norm.
    double norm_bound() const;
    bool pattern_symmetric() const;
    // One "row col re im" line per stored entry.
    void write_coordinates(std::ostream& out) const;
};

// Drops stored entries that are exactly zero.
void drop_zeros(SpMat& m);
// (M + M^dagger), which is exactly Hermitian in floating point.
SpMat plus_adjoint(const SpMat& m);
// Kronecker product of a small dense operator (outer) with a sparse one (inner).
SpMat kron(const Eigen::MatrixXcd& outer, const SpMat& inner);
SpMat identity(Eigen::Index n);
SpMat diagonal(const Eigen::VectorXcd& d);
double max_abs(const SpMat& m);

} // namespace bosedot
