// test_fock.cpp — truncated doubled Fock space and second-quantized operators

#include <doctest.h>

#include <limits>
#include <random>
#include <sstream>

#include "bosedot/errors.hpp"
#include "bosedot/fock.hpp"

using namespace bosedot;

namespace {

Eigen::MatrixXcd dense(const SparseOperator& op) { return Eigen::MatrixXcd(op.m); }

// Brute-force count of occupation vectors of m modes with total <= n.
std::size_t count_states(int m, int n) {
    if (m == 0) return 1;
    std::size_t s = 0;
    for (int k = 0; k <= n; ++k) s += count_states(m - 1, n - k);
    return s;
}

} // namespace

TEST_CASE("basis dimensions") {
    CHECK(FockBasis({1, 0}).size() == 1u);
    CHECK(FockBasis({2, 1}).size() == 5u);
    CHECK(FockBasis({1, 2}).size() == 6u);
    for (int m = 1; m <= 4; ++m)
        for (int n = 0; n <= 4; ++n) {
            TruncationSpec t{m, n};
            CHECK(t.field_dimension() == count_states(2 * m, n));
            CHECK(FockBasis(t).size() == t.field_dimension());
        }
    CHECK_THROWS_AS(FockBasis({50, 6, 1000}), DimensionCapError);
    CHECK(TruncationSpec{1 << 28, 40}.field_dimension() == SIZE_MAX);
    CHECK_THROWS_AS(FockBasis({0, 1}), ValidationError);
}

TEST_CASE("basis ordering and lookup") {
    FockBasis b({3, 3});
    for (int k = 0; k <= 3; ++k)
        for (std::size_t i = b.shell_begin(k); i < b.shell_begin(k + 1); ++i) CHECK(b.quanta(i) == k);
    for (std::size_t i = 1; i < b.size(); ++i)
        if (b.quanta(i) == b.quanta(i - 1)) CHECK(b.state(i - 1) < b.state(i));
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(b.index(b.state(i)).value() == i);
        CHECK(b.index_of_occupation(b.occupation(i)) == i);
    }
    CHECK_FALSE(b.index({0, 0, 0, 0}).has_value());
    CHECK(b.global_mode(1, Side::right) == 4u);
}

TEST_CASE("ladder operators on the vacuum") {
    FockBasis b({2, 2});
    for (int j = 0; j < 2; ++j)
        for (Side s : {Side::left, Side::right}) {
            auto a = dense(ladder(b, j, s, Kind::annihilate));
            auto ad = dense(ladder(b, j, s, Kind::create));
            CHECK(a.col(0).norm() == 0.0);
            const std::size_t one = b.index({b.global_mode(j, s)}).value();
            CHECK(ad(one, 0) == cplx(1.0, 0.0));
            CHECK((ad - a.adjoint()).norm() == 0.0);
        }
}

TEST_CASE("canonical commutation relations below the top shell") {
    // sqrt(n) sqrt(n) rounds to n within a couple of ulps; that is the only deviation allowed
    const double ulp = 4.0 * std::numeric_limits<double>::epsilon() * 3;
    FockBasis b({2, 3});
    const std::size_t below = b.shell_begin(3);
    for (int j = 0; j < 2; ++j)
        for (Side sj : {Side::left, Side::right})
            for (int k = 0; k < 2; ++k)
                for (Side sk : {Side::left, Side::right}) {
                    auto a = dense(ladder(b, j, sj, Kind::annihilate));
                    auto ad = dense(ladder(b, k, sk, Kind::create));
                    Eigen::MatrixXcd c = a * ad - ad * a;
                    const bool same = j == k && sj == sk;
                    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(below, below);
                    if (same) expect.setIdentity();
                    CHECK((c.topLeftCorner(below, below) - expect).cwiseAbs().maxCoeff() <= ulp);
                    if (same) {
                        // top shell: a* maps to 0, so [a, a*] = -n there
                        auto n = dense(number_op(b, j, sj));
                        const std::size_t top = b.size() - below;
                        CHECK((c.bottomRightCorner(top, top) + n.bottomRightCorner(top, top)).cwiseAbs().maxCoeff() <= ulp);
                    }
                }
}

TEST_CASE("number operators and dGamma") {
    FockBasis b({3, 2});
    auto n = dense(total_number(b));
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(n(i, i).real() == b.quanta(i));
    auto ones = dense(dgamma(b, {1.0, 1.0, 1.0}, Side::left)) + dense(dgamma(b, {1.0, 1.0, 1.0}, Side::right));
    CHECK((ones - n).norm() == 0.0);

    const std::vector<double> w{0.3, 0.7, 1.9};
    auto lam = dense(lambda_op(b, w));
    int zeros = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        auto occ = b.occupation(i);
        double e = 0.0;
        for (int j = 0; j < 3; ++j) e += w[j] * (occ[j] + occ[3 + j]);
        CHECK(lam(i, i).real() == doctest::Approx(e).epsilon(1e-15));
        if (lam(i, i).real() == 0.0) ++zeros;
    }
    CHECK(zeros == 1);
    CHECK(lam(0, 0) == cplx(0.0, 0.0));

    // diagonal one-body matrix reproduces dGamma
    SpMat h(3, 3);
    for (int j = 0; j < 3; ++j) h.insert(j, j) = w[j];
    CHECK((dense(dgamma_matrix(b, h, Side::right)) - dense(dgamma(b, w, Side::right))).norm() < 1e-15);
    // general one-body matrix equals sum_jk h_jk a*_j a_k
    SpMat g(3, 3);
    g.insert(0, 2) = cplx(0.4, 0.1);
    g.insert(1, 0) = cplx(-0.3, 0.0);
    g.insert(2, 2) = cplx(1.2, 0.0);
    Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(b.size(), b.size());
    for (int k = 0; k < g.outerSize(); ++k)
        for (SpMat::InnerIterator it(g, k); it; ++it)
            ref += it.value() * dense(ladder(b, int(it.row()), Side::left, Kind::create)) *
                   dense(ladder(b, int(it.col()), Side::left, Kind::annihilate));
    CHECK((dense(dgamma_matrix(b, g, Side::left)) - ref).norm() < 1e-14);
}

TEST_CASE("smeared fields") {
    FockBasis b({3, 2});
    const std::vector<cplx> f{{0.3, 0.4}, {-1.0, 0.2}, {0.0, 0.5}};
    auto ad = smeared_field(b, f, Side::left, Kind::create);
    auto a = smeared_field(b, f, Side::left, Kind::annihilate);
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(b.size());
    vac(0) = 1.0;
    double fn = 0.0;
    for (auto x : f) fn += std::norm(x);
    CHECK(ad.apply(vac).norm() == doctest::Approx(std::sqrt(fn)).epsilon(1e-15));

    const std::vector<cplx> e1{0.0, 1.0, 0.0};
    CHECK((dense(smeared_field(b, e1, Side::right, Kind::annihilate)) - dense(ladder(b, 1, Side::right, Kind::annihilate)))
              .norm() == 0.0);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd p(b.size()), q(b.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        p(i) = {nd(rng), nd(rng)};
        q(i) = {nd(rng), nd(rng)};
    }
    CHECK(std::abs(a.apply(p).dot(q) - p.dot(ad.apply(q))) < 1e-13);
}

TEST_CASE("coordinate dump and sparse helpers") {
    FockBasis b({1, 1});
    auto ad = ladder(b, 0, Side::left, Kind::create);
    std::ostringstream out;
    ad.write_coordinates(out);
    CHECK(out.str() == "1 0 1 0\n");
    CHECK(ad.nnz() == 1);
    CHECK_FALSE(ad.pattern_symmetric());
    SparseOperator herm{plus_adjoint(ad.m), true, "x"};
    CHECK(herm.hermiticity_residual() == 0.0);
    CHECK(herm.pattern_symmetric());
    CHECK(herm.norm_bound() == 1.0);
}
