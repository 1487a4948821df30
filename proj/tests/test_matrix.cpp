#include <random>

#include <Eigen/QR>

#include "catch_amalgamated.hpp"

#include "bftest/error.hpp"
#include "bftest/matrix.hpp"
#include "support.hpp"

using namespace bftest;
using Catch::Matchers::WithinAbs;

TEST_CASE("pinv of a single row") {
    Matrix G(1, 2);
    G << 3.0, 4.0;
    const Matrix P = pinv_full_row_rank(G);
    REQUIRE(P.rows() == 2);
    REQUIRE(P.cols() == 1);
    CHECK_THAT(P(0, 0), WithinAbs(0.12, 1e-15));
    CHECK_THAT(P(1, 0), WithinAbs(0.16, 1e-15));
    CHECK_THAT((G * P)(0, 0), WithinAbs(1.0, 1e-15));

    Matrix H(1, 2);
    H << 0.0, 2.0;
    const Matrix Q = pinv_full_row_rank(H);
    CHECK(Q(0, 0) == 0.0);
    CHECK_THAT(Q(1, 0), WithinAbs(0.5, 1e-15));
}

TEST_CASE("pinv of the identity is the identity") {
    CHECK(pinv_full_row_rank(Matrix::Identity(2, 2)).isApprox(Matrix::Identity(2, 2)));
}

TEST_CASE("pinv matches the Moore-Penrose inverse from a rank-revealing QR") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index p = 1 + trial % 8;
        const Eigen::Index q = 1 + (trial / 8) % p;
        const Matrix G = testing::random_matrix(q, p, rng);
        const Matrix P = pinv_full_row_rank(G);
        const Matrix oracle = G.completeOrthogonalDecomposition().pseudoInverse();
        CHECK((P - oracle).cwiseAbs().maxCoeff() < 1e-10);
        // Penrose conditions
        CHECK((G * P * G - G).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((P * G * P - P).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(((G * P).transpose() - G * P).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(((P * G).transpose() - P * G).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("pinv rejects rank-deficient rows") {
    Matrix G(2, 3);
    G << 1, 2, 3, 2, 4, 6;
    CHECK_THROWS_AS(pinv_full_row_rank(G), RankDeficient);
    CHECK_FALSE(full_row_rank(G));

    Matrix tall(3, 2);
    tall.setRandom();
    CHECK_THROWS_AS(pinv_full_row_rank(tall), RankDeficient);
}

TEST_CASE("pinv honours the condition cap") {
    Matrix G(2, 2);
    G << 1.0, 0.0, 0.0, 1e-4;
    CHECK_NOTHROW(pinv_full_row_rank(G));
    CHECK_THROWS_AS(pinv_full_row_rank(G, 1e6), RankDeficient);
}

TEST_CASE("Greville identity on hand-checked cases") {
    Matrix G(1, 2);
    G << 0.0, 1.0;
    Matrix K = Matrix::Zero(2, 2);
    K.diagonal() << 1.0, 2.0;
    const GrevilleCheck ok = greville_identity_residual(G, K);
    CHECK(ok.holds);
    CHECK(ok.residual == 0.0);

    std::mt19937_64 rng(11);
    const Matrix K_any = testing::random_matrix(3, 3, rng);
    CHECK(greville_identity_residual(Matrix::Identity(3, 3), K_any).holds);

    Matrix G_gv(1, 2);
    G_gv << 1.0, 4.0;
    Matrix K_gv(2, 2);
    K_gv << 2.0, 2.0, 0.0, -0.25;
    const GrevilleCheck bad = greville_identity_residual(G_gv, K_gv);
    CHECK_FALSE(bad.holds);
    // G+G = [[1,4],[4,16]]/17, KK^T = [[8,-0.5],[-0.5,1/16]]
    Matrix PG(2, 2);
    PG << 1, 4, 4, 16;
    PG /= 17.0;
    Matrix KK(2, 2);
    KK << 8.0, -0.5, -0.5, 1.0 / 16.0;
    CHECK_THAT(bad.residual, WithinAbs((PG * KK - KK * PG).cwiseAbs().maxCoeff(), 1e-12));
    CHECK(bad.residual > 1e-3);
}

TEST_CASE("Greville residual is unchanged by K -> -K") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix G = testing::random_matrix(1 + trial % 3, 4, rng);
        const Matrix K = testing::random_matrix(4, 4, rng);
        const GrevilleCheck a = greville_identity_residual(G, K);
        const GrevilleCheck b = greville_identity_residual(G, -K);
        CHECK(a.residual == b.residual);
        CHECK(a.holds == b.holds);
    }
}

TEST_CASE("solve_symmetric examples") {
    Vector b(2);
    b << 1.0, 2.0;
    CHECK(solve_symmetric(Matrix::Identity(2, 2), b).isApprox(b));

    Matrix D = Matrix::Zero(2, 2);
    D.diagonal() << 2.0, 4.0;
    Vector c(2);
    c << 2.0, 4.0;
    CHECK(solve_symmetric(D, c).isApprox(Vector::Ones(2)));

    Matrix A(2, 2);
    A << 2.0, 1.0, 1.0, 2.0;
    Vector d(2);
    d << 3.0, 3.0;
    const Vector x = solve_symmetric(A, d);
    CHECK_THAT(x(0), WithinAbs(1.0, 1e-14));
    CHECK_THAT(x(1), WithinAbs(1.0, 1e-14));
}

TEST_CASE("solve_symmetric handles indefinite and rejects singular systems") {
    Matrix A(2, 2);
    A << 1.0, 2.0, 2.0, 1.0;
    Vector b(2);
    b << 2.0, 3.0;
    const Vector x = solve_symmetric(A, b);
    CHECK((A * x - b).norm() < 1e-12);

    Matrix S(2, 2);
    S << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(solve_symmetric(S, b), Singular);
    CHECK_THROWS_AS(inverse_symmetric(S), Singular);

    Matrix nonsquare(2, 3);
    nonsquare.setOnes();
    CHECK_THROWS_AS(solve_symmetric(nonsquare, b), DimensionMismatch);
}

TEST_CASE("solve_symmetric agrees with a direct inverse on random SPD systems") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index p = 1 + trial % 6;
        const Matrix M = testing::random_matrix(p, p, rng);
        const Matrix A = M * M.transpose() + Matrix::Identity(p, p);
        const Matrix B = testing::random_matrix(p, 2, rng);
        const Matrix X = solve_symmetric(A, B);
        CHECK((A * X - B).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((inverse_symmetric(A) * A - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("condition number and max_abs") {
    Matrix D = Matrix::Zero(2, 2);
    D.diagonal() << 2.0, -8.0;
    CHECK_THAT(condition_number_symmetric(D), WithinAbs(4.0, 1e-12));
    CHECK(max_abs(D) == 8.0);
}
