#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "tvfcgcg/coeff_qp.hpp"

using namespace tvfcgcg;

namespace {

ReducedProblem random_spd_instance(int dim, std::mt19937_64& rng, double alpha)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd B = Eigen::MatrixXd::NullaryExpr(
        dim, dim, [&](Eigen::Index, Eigen::Index) { return gauss(rng); });
    ReducedProblem rp;
    rp.gram = B * B.transpose() + 0.05 * Eigen::MatrixXd::Identity(dim, dim);
    rp.linear = Eigen::VectorXd::NullaryExpr(dim, [&](Eigen::Index) { return gauss(rng); });
    rp.perimeters =
        Eigen::VectorXd::NullaryExpr(dim, [&](Eigen::Index) { return std::abs(gauss(rng)); });
    rp.alpha = alpha;
    rp.ydd = 0.0;
    return rp;
}

} // namespace

TEST_CASE("single-set closed form")
{
    // lambda* = max(0, (b - alpha pi) / G).
    for (auto [g, b, pi, alpha] :
         {std::tuple{2.0, 3.0, 1.0, 0.5}, std::tuple{1.5, -1.0, 2.0, 0.1},
          std::tuple{0.7, 4.0, 0.0, 1e-4}, std::tuple{3.0, 0.5, 10.0, 1.0}}) {
        ReducedProblem rp;
        rp.gram = Eigen::MatrixXd::Constant(1, 1, g);
        rp.linear = Eigen::VectorXd::Constant(1, b);
        rp.perimeters = Eigen::VectorXd::Constant(1, pi);
        rp.alpha = alpha;
        Coefficients sol = solve_coeffs(rp);
        double expected = std::max(0.0, (b - alpha * pi) / g);
        CHECK(sol.lambda[0] == Catch::Approx(expected).epsilon(1e-12).margin(1e-15));
        CHECK(sol.kkt_residual <= 1e-11 * (1.0 + std::abs(b) / alpha + pi));
    }
}

TEST_CASE("perfect-data single set: lambda = 1 - alpha pi / |K1_E|^2")
{
    // With y_d = K 1_E and active set {E}: G = b = |K 1_E|^2.
    double norm2 = 0.37, pi = 2.2, alpha = 1e-3;
    ReducedProblem rp;
    rp.gram = Eigen::MatrixXd::Constant(1, 1, norm2);
    rp.linear = Eigen::VectorXd::Constant(1, norm2);
    rp.perimeters = Eigen::VectorXd::Constant(1, pi);
    rp.alpha = alpha;
    rp.ydd = norm2;
    Coefficients sol = solve_coeffs(rp);
    CHECK(sol.lambda[0] == Catch::Approx(1.0 - alpha * pi / norm2).epsilon(1e-12));
}

TEST_CASE("random SPD instances match the projected-gradient oracle")
{
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        int dim = 1 + static_cast<int>(rng() % 8);
        double alpha = trial % 3 == 0 ? 1e-4 : 0.1;
        ReducedProblem rp = random_spd_instance(dim, rng, alpha);

        Coefficients sol = solve_coeffs(rp);
        Eigen::VectorXd ref = oracles::projected_gradient_qp(rp.gram, rp.linear, rp.perimeters,
                                                             rp.alpha, rp.free_sign_index);
        double obj_ref = reduced_objective(rp, ref);
        CHECK(sol.objective <= obj_ref + 1e-9 * (1.0 + std::abs(obj_ref)));
        CHECK(std::abs(sol.objective - obj_ref) <= 1e-9 * (1.0 + std::abs(obj_ref)));
        for (int j = 0; j < dim; ++j) CHECK(sol.lambda[j] >= 0.0);
        CHECK(sol.kkt_residual <=
              1e-11 * (1.0 + rp.linear.lpNorm<Eigen::Infinity>() / rp.alpha +
                       rp.perimeters.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("free-sign entry can end up negative and zeroes the gradient")
{
    std::mt19937_64 rng(202);
    int negative_seen = 0;
    for (int trial = 0; trial < 100; ++trial) {
        int dim = 2 + static_cast<int>(rng() % 6);
        ReducedProblem rp = random_spd_instance(dim, rng, 0.05);
        rp.free_sign_index = 0;
        rp.perimeters[0] = 0.0;
        rp.linear[0] = -std::abs(rp.linear[0]); // bias towards negative lambda_0

        Coefficients sol = solve_coeffs(rp);
        Eigen::VectorXd grad = reduced_gradient(rp, sol.lambda);
        CHECK(std::abs(grad[0]) <= 1e-9 * (1.0 + grad.lpNorm<Eigen::Infinity>()));
        if (sol.lambda[0] < 0.0) ++negative_seen;

        Eigen::VectorXd ref = oracles::projected_gradient_qp(rp.gram, rp.linear, rp.perimeters,
                                                             rp.alpha, 0);
        double obj_ref = reduced_objective(rp, ref);
        CHECK(std::abs(sol.objective - obj_ref) <= 1e-8 * (1.0 + std::abs(obj_ref)));
    }
    CHECK(negative_seen > 0);
}

TEST_CASE("warm starts reproduce the optimum")
{
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 50; ++trial) {
        int dim = 3 + static_cast<int>(rng() % 5);
        ReducedProblem rp = random_spd_instance(dim, rng, 0.2);
        Coefficients cold = solve_coeffs(rp);
        Coefficients warm = solve_coeffs(rp, &cold);
        CHECK((warm.lambda - cold.lambda).lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK(warm.iterations <= cold.iterations);
    }
}

TEST_CASE("pruning removes exact zeros and preserves the objective")
{
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 60; ++trial) {
        int dim = 2 + static_cast<int>(rng() % 7);
        ReducedProblem rp = random_spd_instance(dim, rng, 0.05);
        Coefficients sol = solve_coeffs(rp);

        std::vector<int> drop = prune_indices(rp, sol);
        for (int j : drop) CHECK(sol.lambda[j] == 0.0);

        // Re-solve on the retained support: identical objective.
        std::vector<int> keep;
        for (int j = 0; j < dim; ++j)
            if (sol.lambda[j] != 0.0) keep.push_back(j);
        if (keep.empty()) continue;
        ReducedProblem small;
        small.alpha = rp.alpha;
        small.ydd = rp.ydd;
        int m = static_cast<int>(keep.size());
        small.gram.resize(m, m);
        small.linear.resize(m);
        small.perimeters.resize(m);
        for (int r = 0; r < m; ++r) {
            small.linear[r] = rp.linear[keep[r]];
            small.perimeters[r] = rp.perimeters[keep[r]];
            for (int c2 = 0; c2 < m; ++c2) small.gram(r, c2) = rp.gram(keep[r], keep[c2]);
        }
        Coefficients again = solve_coeffs(small);
        CHECK(again.objective == Catch::Approx(sol.objective).epsilon(1e-10).margin(1e-12));
    }
}

TEST_CASE("all-positive solutions survive pruning unchanged")
{
    ReducedProblem rp;
    rp.gram = Eigen::MatrixXd::Identity(3, 3);
    rp.linear = Eigen::VectorXd::Constant(3, 5.0);
    rp.perimeters = Eigen::VectorXd::Constant(3, 1.0);
    rp.alpha = 1.0;
    Coefficients sol = solve_coeffs(rp);
    for (int j = 0; j < 3; ++j) CHECK(sol.lambda[j] == Catch::Approx(4.0).epsilon(1e-12));
    CHECK(prune_indices(rp, sol).empty());
}

TEST_CASE("singular gram on the active face is regularized, not fatal")
{
    // Two identical columns: the face system is singular.
    ReducedProblem rp;
    rp.gram.resize(2, 2);
    rp.gram << 1.0, 1.0, 1.0, 1.0;
    rp.linear = Eigen::VectorXd::Constant(2, 2.0);
    rp.perimeters = Eigen::VectorXd::Zero(2);
    rp.alpha = 1.0;
    Coefficients sol = solve_coeffs(rp);
    // Any split with lambda_0 + lambda_1 = 2 is optimal.
    CHECK(sol.lambda.sum() == Catch::Approx(2.0).epsilon(1e-6));
    CHECK(sol.lambda.minCoeff() >= 0.0);
}

TEST_CASE("objective decreases monotonically when sets are added")
{
    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 30; ++trial) {
        ReducedProblem big = random_spd_instance(6, rng, 0.1);
        big.ydd = 3.0;
        Coefficients prev;
        double last = std::numeric_limits<double>::infinity();
        for (int m = 1; m <= 6; ++m) {
            ReducedProblem rp;
            rp.alpha = big.alpha;
            rp.ydd = big.ydd;
            rp.gram = big.gram.topLeftCorner(m, m);
            rp.linear = big.linear.head(m);
            rp.perimeters = big.perimeters.head(m);
            Coefficients warm;
            if (m > 1) {
                warm.lambda = Eigen::VectorXd::Zero(m);
                warm.lambda.head(m - 1) = prev.lambda;
            }
            Coefficients sol = solve_coeffs(rp, m > 1 ? &warm : nullptr);
            CHECK(sol.objective <= last + 1e-10);
            last = sol.objective;
            prev = sol;
        }
    }
}
