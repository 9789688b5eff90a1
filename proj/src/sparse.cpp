// sparse.cpp — SparseOperator helpers

#include "bosedot/sparse.hpp"

#include <algorithm>
#include <vector>

namespace bosedot {

SparseOperator::SparseOperator(SpMat mat, bool herm, std::string lbl)
    : m(std::move(mat)), hermitian(herm), label(std::move(lbl)) {
    m.makeCompressed();
}

double SparseOperator::hermiticity_residual() const {
    SpMat diff = m - SpMat(m.adjoint());
    return bosedot::max_abs(diff);
}

double SparseOperator::max_abs() const { return bosedot::max_abs(m); }

double SparseOperator::norm_bound() const {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

bool SparseOperator::pattern_symmetric() const {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> a, b;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) {
            a.emplace_back(it.row(), it.col());
            b.emplace_back(it.col(), it.row());
        }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

void SparseOperator::write_coordinates(std::ostream& out) const {
    out.precision(17);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
}

void drop_zeros(SpMat& m) {
    m.prune([](const Eigen::Index&, const Eigen::Index&, const cplx& v) { return v != cplx{}; });
}

SpMat plus_adjoint(const SpMat& m) {
    SpMat out = m + SpMat(m.adjoint());
    drop_zeros(out);
    return out;
}

SpMat kron(const Eigen::MatrixXcd& outer, const SpMat& inner) {
    const Eigen::Index n = inner.rows();
    std::vector<Eigen::Triplet<cplx>> trips;
    for (Eigen::Index i = 0; i < outer.rows(); ++i)
        for (Eigen::Index j = 0; j < outer.cols(); ++j) {
            const cplx o = outer(i, j);
            if (o == cplx{}) continue;
            for (int k = 0; k < inner.outerSize(); ++k)
                for (SpMat::InnerIterator it(inner, k); it; ++it)
                    trips.emplace_back(i * n + it.row(), j * n + it.col(), o * it.value());
        }
    SpMat out(outer.rows() * n, outer.cols() * n);
    out.setFromTriplets(trips.begin(), trips.end());
    drop_zeros(out);
    return out;
}

SpMat identity(Eigen::Index n) {
    SpMat id(n, n);
    id.setIdentity();
    return id;
}

SpMat diagonal(const Eigen::VectorXcd& d) {
    std::vector<Eigen::Triplet<cplx>> trips;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d(i) != cplx{}) trips.emplace_back(i, i, d(i));
    SpMat out(d.size(), d.size());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

double max_abs(const SpMat& m) {
    double mx = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
    return mx;
}

} // namespace bosedot
