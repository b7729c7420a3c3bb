#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hogl/errors.hpp"
#include "hogl/prox.hpp"
#include "hogl/rng.hpp"
#include "prox_oracles.hpp"

using hogl::Matrix;
using hogl::ProxProblem;
using hogl::Vector;
using oracles::naive_alpha_star;
using oracles::naive_d_table;
using oracles::naive_objective;
using oracles::random_problem;

namespace {

// Scalar-case closed form, implemented separately from the block code path.
Vector scalar_closed_form(const ProxProblem& prob) {
    const int q = prob.levels();
    Matrix table = naive_d_table(prob);
    const int alpha = naive_alpha_star(prob);
    Vector gamma = Vector::Zero(q);
    if (alpha > q) return gamma;
    for (int j = alpha; j <= q; ++j) {
        double product = 1.0;
        for (int l = j; l <= q; ++l) {
            product *= table(alpha - 1, l - 1) / (table(alpha - 1, l - 1) + prob.lambda[l - 1]);
        }
        gamma[j - 1] = prob.b[j - 1] * product;
    }
    return gamma;
}

ProxProblem scalar_problem(std::initializer_list<double> b, std::initializer_list<double> lam) {
    ProxProblem prob;
    prob.b = Eigen::Map<const Vector>(std::data(b), static_cast<long>(b.size()));
    prob.lambda = Eigen::Map<const Vector>(std::data(lam), static_cast<long>(lam.size()));
    prob.block_sizes.assign(lam.size(), 1);
    return prob;
}

}  // namespace

TEST_CASE("objective: zero vector scores zero") {
    auto prob = scalar_problem({1.0, -2.0, 0.5}, {0.3, 0.4, 0.1});
    CHECK(hogl::evaluate_objective(Vector::Zero(3), prob) == 0.0);
}

TEST_CASE("objective: pure quadratic, q=1") {
    auto prob = scalar_problem({2.0}, {0.0});
    Vector gamma(1);
    gamma << 2.0;
    CHECK(hogl::evaluate_objective(gamma, prob) == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("objective: matches independent arithmetic at the q=2 minimizer") {
    // d_1 = 0.5, d_2 = sqrt(4.25) - 0.5; minimizer and value worked out by hand
    auto prob = scalar_problem({1.0, 2.0}, {0.5, 0.5});
    Vector gamma(2);
    gamma << 0.3787321874818335, 1.514928749927334;
    const double expected = naive_objective(gamma, prob);
    CHECK(hogl::evaluate_objective(gamma, prob) == doctest::Approx(expected).epsilon(1e-14));
    // at the optimum f equals -||gamma||^2 / 2
    CHECK(expected == doctest::Approx(-0.5 * gamma.squaredNorm()).epsilon(1e-12));
    CHECK(expected == doctest::Approx(-1.2192235935955849).epsilon(1e-12));
}

TEST_CASE("objective: dimension mismatch throws") {
    auto prob = scalar_problem({1.0, 2.0}, {0.5, 0.5});
    CHECK_THROWS_AS(hogl::evaluate_objective(Vector::Zero(3), prob), hogl::DimensionMismatch);
}

TEST_CASE("scan: hand-worked q=2 example") {
    auto prob = scalar_problem({1.0, 2.0}, {0.5, 0.5});
    const auto scan = hogl::search_alpha_star(prob);
    CHECK(scan.alpha_star == 1);
    CHECK(scan.d[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(scan.d[1] == doctest::Approx(std::sqrt(4.25) - 0.5).epsilon(1e-15));
}

TEST_CASE("scan: both thresholds fail -> all-zero optimum") {
    auto prob = scalar_problem({0.3, 0.2}, {1.0, 1.0});
    const auto scan = hogl::search_alpha_star(prob);
    CHECK(scan.alpha_star == 3);
    CHECK(hogl::prox_solve(prob).isZero(0.0));
}

TEST_CASE("scan: zero at the first column restarts at the second") {
    auto prob = scalar_problem({0.1, 5.0}, {1.0, 1.0});
    const auto scan = hogl::search_alpha_star(prob);
    CHECK(scan.alpha_star == 2);
    CHECK(scan.d[0] == 0.0);
    CHECK(scan.d[1] == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("prox: no penalty is the identity") {
    auto prob = scalar_problem({1.5, -0.3, 2.0}, {0.0, 0.0, 0.0});
    CHECK((hogl::prox_solve(prob) - prob.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("prox: scalar soft threshold") {
    auto prob = scalar_problem({2.0}, {0.5});
    CHECK(hogl::prox_solve(prob)[0] == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("prox: frozen q=2 minimizer") {
    auto prob = scalar_problem({1.0, 2.0}, {0.5, 0.5});
    const Vector gamma = hogl::prox_solve(prob);
    CHECK(gamma[0] == doctest::Approx(0.3787321874818335).epsilon(1e-12));
    CHECK(gamma[1] == doctest::Approx(1.514928749927334).epsilon(1e-12));
    CHECK(hogl::verify_kkt(gamma, prob, 1e-10).ok);
}

TEST_CASE("prox: block example with a zero top level") {
    ProxProblem prob;
    prob.b.resize(3);
    prob.b << 3.0, 4.0, 0.0;
    prob.lambda.resize(2);
    prob.lambda << 1.0, 0.0;
    prob.block_sizes = {2, 1};
    const Vector gamma = hogl::prox_solve(prob);
    CHECK(gamma[0] == doctest::Approx(2.4).epsilon(1e-14));
    CHECK(gamma[1] == doctest::Approx(3.2).epsilon(1e-14));
    CHECK(gamma[2] == 0.0);
    CHECK(hogl::verify_kkt(gamma, prob, 1e-10).ok);
}

TEST_CASE("prox: all-zero output is bit-exact") {
    auto prob = scalar_problem({0.3, -0.1, 0.2}, {1.0, 1.0, 1.0});
    const Vector gamma = hogl::prox_solve(prob);
    for (int i = 0; i < gamma.size(); ++i) CHECK(gamma[i] == 0.0);
}

TEST_CASE("kkt: unconstrained optimum has zero residual") {
    auto prob = scalar_problem({1.0, -2.0}, {0.0, 0.0});
    const auto report = hogl::verify_kkt(prob.b, prob, 1e-12);
    CHECK(report.ok);
    CHECK(report.residual == 0.0);
}

TEST_CASE("kkt: zero vector passes under a huge penalty") {
    auto prob = scalar_problem({1.0, -2.0}, {50.0, 50.0});
    CHECK(hogl::verify_kkt(Vector::Zero(2), prob, 1e-12).ok);
}

TEST_CASE("kkt: rejects a perturbed solution") {
    auto prob = scalar_problem({1.0, 2.0}, {0.5, 0.5});
    Vector gamma = hogl::prox_solve(prob);
    gamma[1] += 1e-3;
    CHECK_FALSE(hogl::verify_kkt(gamma, prob, 1e-8).ok);
}

TEST_CASE("property: prox output passes KKT and beats random perturbations") {
    hogl::Rng rng(20240811);
    for (int trial = 0; trial < 1000; ++trial) {
        const ProxProblem prob = random_problem(rng);
        const Vector gamma = hogl::prox_solve(prob);
        const auto report = hogl::verify_kkt(gamma, prob, 1e-8);
        CAPTURE(trial);
        REQUIRE(report.ok);
        const double f_star = hogl::evaluate_objective(gamma, prob);
        for (double eps : {1e-3, 1e-1, 1.0}) {
            for (int j = 0; j < 20; ++j) {
                Vector u(gamma.size());
                for (int i = 0; i < u.size(); ++i) u[i] = rng.normal();
                u.normalize();
                const double f = hogl::evaluate_objective(gamma + eps * u, prob);
                REQUIRE(f >= f_star - 1e-12);
            }
        }
    }
}

TEST_CASE("property: scanned alpha_star equals the exhaustive table search") {
    hogl::Rng rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        const ProxProblem prob = random_problem(rng);
        const auto scan = hogl::search_alpha_star(prob);
        CAPTURE(trial);
        REQUIRE(scan.alpha_star == naive_alpha_star(prob));
        // surviving d row must agree with the naive table
        const Matrix table = naive_d_table(prob);
        if (scan.alpha_star <= prob.levels()) {
            for (int j = scan.alpha_star; j <= prob.levels(); ++j) {
                REQUIRE(scan.d[j - 1] ==
                        doctest::Approx(table(scan.alpha_star - 1, j - 1)).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("property: d table is monotone down each column") {
    hogl::Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const ProxProblem prob = random_problem(rng);
        const Matrix table = naive_d_table(prob);
        const int q = prob.levels();
        for (int alpha = 1; alpha < q; ++alpha) {
            for (int j = alpha + 1; j <= q; ++j) {
                REQUIRE(table(alpha - 1, j - 1) >= table(alpha, j - 1));
            }
        }
        // library table matches the oracle
        const Matrix lib = hogl::d_table(prob);
        REQUIRE((lib - table).cwiseAbs().maxCoeff() <= 1e-14);
        REQUIRE(hogl::alpha_star_from_table(lib) == naive_alpha_star(prob));
    }
}

TEST_CASE("property: all-ones blocks match the scalar closed form bit for bit") {
    hogl::Rng rng(4242);
    for (int trial = 0; trial < 500; ++trial) {
        ProxProblem prob = random_problem(rng, 8, 1);  // scalar levels only
        const Vector expected = scalar_closed_form(prob);
        const Vector gamma = hogl::prox_solve(prob);
        CAPTURE(trial);
        REQUIRE((gamma - expected).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("property: objective matches the naive formula on random points") {
    hogl::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const ProxProblem prob = random_problem(rng);
        Vector gamma(prob.total_size());
        for (int i = 0; i < gamma.size(); ++i) gamma[i] = rng.normal();
        const double expected = naive_objective(gamma, prob);
        REQUIRE(hogl::evaluate_objective(gamma, prob) ==
                doctest::Approx(expected).epsilon(1e-12));
    }
}
