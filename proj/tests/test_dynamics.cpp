// test_dynamics.cpp — evolution, ergodic means, deviation reports, xi superposition, Dyson series

#include <doctest.h>

#include <cmath>

#include "bosedot/dynamics.hpp"
#include "bosedot/errors.hpp"
#include "oracles.hpp"

using namespace bosedot;

namespace {

OperatorBundle bundle(int n_modes, int n_max, double lambda, std::optional<CondensatePoint> xi = {}) {
    auto grid = discretize(FormFactor::gaussian(1.0, 1.0), Dispersion::relativistic, 1.0,
                           {n_modes, 3.0, Spacing::log, 0.1}, {1.0});
    return assemble_bundle(DotSpec::standard(2), grid, {n_modes, n_max}, 1.0, lambda, xi,
                           critical_density(1.0, Dispersion::relativistic));
}

Eigen::MatrixXcd coherence() {
    Eigen::MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;
    return x;
}

} // namespace

TEST_CASE("evolution is unitary") {
    auto b = bundle(3, 2, 0.1);
    auto es = diagonalize(b.L_lambda.m);
    Eigen::VectorXcd psi = b.omega_beta0() + 0.3 * Eigen::VectorXcd::Ones(b.dim()) / std::sqrt(double(b.dim()));
    psi.normalize();
    CHECK((evolve(es, psi, 0.0) - psi).norm() < 1e-13);
    for (double t : {1.0, 10.0, 100.0, 1000.0}) CHECK(std::abs(evolve(es, psi, t).norm() - 1.0) < 1e-10);
    // Krylov and eigenbasis agree
    EvolveOptions opt;
    opt.dense_limit = 0;
    CHECK((evolve(b, psi, 7.0, opt) - evolve(es, psi, 7.0)).norm() < 1e-8);
    CHECK_THROWS_AS(diagonalize(b.L_lambda.m, 10), DimensionCapError);
}

TEST_CASE("ergodic mean with a stationary initial state") {
    auto b = bundle(3, 1, 0.1);
    auto es = diagonalize(b.L_lambda.m);
    // a kernel vector as Omega, B = 1: the mean is constant in T
    Eigen::VectorXcd omega = es.vectors.col(0);
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
        if (std::abs(es.values(i)) < std::abs(es.values(0))) omega = es.vectors.col(i);
    double smallest = INFINITY;
    Eigen::Index k0 = 0;
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
        if (std::abs(es.values(i)) < smallest) smallest = std::abs(es.values(i)), k0 = i;
    omega = es.vectors.col(k0);
    const SpMat A = b.dot_observable(coherence()).m;
    const SpMat B = identity(b.dim());
    auto r1 = ergodic_mean(es, A, B, omega, 10.0, 200);
    auto r2 = ergodic_mean(es, A, B, omega, 1000.0, 200);
    CHECK(std::abs(r1.finite_T_mean - r2.finite_T_mean) < 1e-9);
    CHECK(std::abs(r1.finite_T_mean - omega.dot(A * omega)) < 1e-9);
}

TEST_CASE("observable commuting with the generator gives a constant mean") {
    auto b = bundle(3, 2, 0.1);
    auto es = diagonalize(b.L_lambda.m);
    Eigen::VectorXcd om = b.omega_beta0() + Eigen::VectorXcd::Constant(b.dim(), 0.05);
    om.normalize();
    const SpMat& A = b.Q.m;   // [L, Q] = 0 without a condensate
    const SpMat B = identity(b.dim());
    for (double T : {1.0, 50.0}) {
        auto r = ergodic_mean(es, A, B, om, T, 100);
        CHECK(std::abs(r.finite_T_mean - om.dot(A * om)) < 1e-10);
    }
}

TEST_CASE("finite-T mean: analytic, quadrature and closed form") {
    auto b = bundle(3, 1, 0.1);
    auto es = diagonalize(b.L_lambda.m);
    auto kms = kms_vector(b);
    const SpMat A = b.dot_observable(coherence()).m;
    const SpMat B = b.dot_observable(Eigen::MatrixXcd::Identity(2, 2) + 0.5 * coherence()).m;
    auto r = ergodic_mean(es, A, B, kms.omega, 40.0, 4000);
    CHECK(std::abs(r.finite_T_mean - r.quadrature_mean) < 1e-8);
    CHECK(r.min_gap > 0.0);
    CHECK(std::abs(r.closed_form) <= r.bound + 1e-12);
    // 1/T decay of the error envelope
    const double T = 20.0 / r.min_gap;
    const double e1 = ergodic_error_envelope(es, A, B, kms.omega, T, 2 * T);
    const double e2 = ergodic_error_envelope(es, A, B, kms.omega, 2 * T, 4 * T);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.3));
    auto short_run = ergodic_mean(es, A, B, kms.omega, 1.0 / r.min_gap, 10);
    CHECK(short_run.unreliable);
    CHECK_FALSE(short_run.warnings.empty());
}

TEST_CASE("deviation report") {
    auto b = bundle(3, 1, 0.05, CondensatePoint{0.25, 0.3});
    auto es = diagonalize(b.L_lambda.m);
    auto kms = kms_vector(b);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    auto unit = rte_deviation(b, es, kms.omega, id, coherence() + 2.0 * id, 100.0);
    CHECK(unit.deviation == 0.0);
    CHECK(unit.normalized == 0.0);
    auto scaled = rte_deviation(b, es, kms.omega, 3.0 * id, coherence(), 100.0);
    CHECK(scaled.deviation == 0.0);

    // B = 1: limit is <Omega, Pi_0 A Omega> up to cluster grouping
    auto r = rte_deviation(b, es, kms.omega, coherence(), id, 0.0);
    CHECK(r.omega_BB == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.a_norm == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.normalized == doctest::Approx(r.deviation).epsilon(1e-14));
}

TEST_CASE("xi superposition") {
    XiResult a{{0.3, 0.0}, {0.4, 0.0}, 1.0, {0.4, 0.0}, "h"};
    XiResult c{{0.3, 3.0}, {-0.2, 0.0}, 1.0, {-0.25, 0.0}, "h"};
    auto single = superpose_xi(XiMeasure::single({0.3, 0.0}), {a, c});
    CHECK(single.aggregate_limit == a.limit);
    CHECK(single.target == a.omega_BB * a.omega_A);

    XiMeasure two{{{{0.3, 0.0}, 0.25}, {{0.3, 3.0}, 0.75}}};
    auto agg = superpose_xi(two, {a, c});
    CHECK(std::abs(agg.target - (0.25 * 0.4 + 0.75 * -0.25)) < 1e-15);
    CHECK(std::abs(agg.aggregate_limit - (0.25 * 0.4 + 0.75 * -0.2)) < 1e-15);

    XiResult stray = c;
    stray.manifest_hash = "other";
    CHECK_THROWS_AS(superpose_xi(two, {a, stray}), ValidationError);
    CHECK_THROWS_AS(superpose_xi(XiMeasure::single({0.5, 0.0}), {a}), ValidationError);
}

TEST_CASE("unitary B keeps the xi weights") {
    // omega_xi(B* B) = 1 for unitary B, so the aggregate target is the weighted mean of omega_xi(A)
    const double rc = critical_density(1.0, Dispersion::relativistic);
    auto mu = XiMeasure::uniform_theta(rc + 0.2, 3);
    Eigen::MatrixXcd u(2, 2);
    u << 0, 1, 1, 0;
    std::vector<XiResult> res;
    cplx weighted{};
    for (const auto& [xi, w] : mu.atoms) {
        auto b = bundle(2, 1, 0.05, xi);
        auto es = diagonalize(b.L_lambda.m);
        auto kms = kms_vector(b);
        auto r = rte_deviation(b, es, kms.omega, coherence(), u, 0.0);
        CHECK(r.omega_BB == doctest::Approx(1.0).epsilon(1e-12));
        res.push_back({xi, r.limit, r.omega_BB, r.omega_A, "grid"});
        weighted += w * r.omega_A;
    }
    CHECK(std::abs(superpose_xi(mu, res).target - weighted) < 1e-14);
}

TEST_CASE("dyson expansion") {
    auto b = bundle(2, 2, 0.1);
    const SpMat v = b.I.m;
    const SpMat A = b.dot_observable(coherence()).m;
    Eigen::VectorXcd psi = b.omega_beta0();
    // order 0 is free evolution
    auto terms = dyson_terms(b.L0.m, v, 0.1, psi, 2.0, 3);
    Eigen::VectorXcd free = evolve(diagonalize(b.L0.m), psi, 2.0);
    CHECK((terms[0] - free).norm() < 1e-12);
    // the full series at high order reproduces the exact propagator
    SpMat l = b.L0.m + 0.02 * v;
    auto hi = dyson_terms(b.L0.m, v, 0.02, psi, 2.0, 9);
    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(psi.size());
    for (const auto& t : hi) sum += t;
    CHECK((sum - evolve(diagonalize(l), psi, 2.0)).norm() < 1e-10);
    CHECK(std::abs(dyson_expectation(b.L0.m, v, 0.02, A, psi, 2.0, 9) - exact_expectation(l, A, psi, 2.0)) < 1e-10);
}

TEST_CASE("phase factor helpers") {
    CHECK(theta_averaged_phase_factor(0.0, 0.3, 0.1, 8) == cplx(1.0, 0.0));
    CHECK(phase_bessel_closed_form(0.0, 0.3, 0.1) == 1.0);
    CHECK_THROWS_AS(phase_bessel_closed_form(1.0, 0.05, 0.1), ValidationError);
}

TEST_CASE("manifest hash") {
    nlohmann::json a{{"x", 1}, {"y", {1, 2}}};
    nlohmann::json b{{"y", {1, 2}}, {"x", 1}};
    CHECK(manifest_hash(a) == manifest_hash(b));
    CHECK(manifest_hash(a).size() == 16u);
    b["x"] = 2;
    CHECK(manifest_hash(a) != manifest_hash(b));
}
