#include <catch2/catch_amalgamated.hpp>

#include "balmet/herm.hpp"
#include "balmet/random.hpp"

using namespace balmet;

namespace {

// Independent oracle: permanent by recursive expansion along the first row.
Complex permanent_recursive(const Matrix& A) {
    const int n = static_cast<int>(A.rows());
    if (n == 1) return A(0, 0);
    Complex sum = 0.0;
    for (int j = 0; j < n; ++j) {
        Matrix minor(n - 1, n - 1);
        for (int r = 1; r < n; ++r) {
            int cc = 0;
            for (int c = 0; c < n; ++c) {
                if (c == j) continue;
                minor(r - 1, cc++) = A(r, c);
            }
        }
        sum += A(0, j) * permanent_recursive(minor);
    }
    return sum;
}

HermMetric identity_metric(int n) { return HermMetric(Matrix::Identity(n, n), "e"); }

}  // namespace

TEST_CASE("multi-index enumeration is descending lex with the right count") {
    auto idx = enumerate_multi_indices(2, 2);
    REQUIRE(idx.size() == 3);
    CHECK(idx[0].parts == std::vector<int>{2, 0});
    CHECK(idx[1].parts == std::vector<int>{1, 1});
    CHECK(idx[2].parts == std::vector<int>{0, 2});
    for (int r = 1; r <= 4; ++r)
        for (int d = 1; d <= 4; ++d)
            CHECK(static_cast<long long>(enumerate_multi_indices(r, d).size()) ==
                  binomial(d + r - 1, r - 1));
}

TEST_CASE("orthonormal_sym_basis normalization constants") {
    auto m22 = orthonormal_sym_basis(2, 2);
    REQUIRE(m22.rank() == 3);
    CHECK(m22.normConstants[0] == Catch::Approx(1.0));
    CHECK(m22.normConstants[1] == Catch::Approx(std::sqrt(2.0)));
    CHECK(m22.normConstants[2] == Catch::Approx(1.0));

    auto m15 = orthonormal_sym_basis(1, 5);
    REQUIRE(m15.rank() == 1);
    CHECK(m15.normConstants[0] == Catch::Approx(1.0));

    // r=3, d=2 in graded-lex order: frozen from d!/(i1! i2! i3!).
    auto m32 = orthonormal_sym_basis(3, 2);
    const double s2 = std::sqrt(2.0);
    std::vector<double> expected{1.0, s2, s2, 1.0, s2, 1.0};
    REQUIRE(m32.rank() == 6);
    for (int i = 0; i < 6; ++i)
        CHECK(m32.normConstants[i] == Catch::Approx(expected[i]));
}

TEST_CASE("sym_power_metric on the identity gives the multinomial diagonal") {
    auto g = sym_power_metric(identity_metric(2), 2);
    REQUIRE(g.dim() == 3);
    CHECK(std::abs(g.entries()(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(g.entries()(1, 1) - 0.5) < 1e-15);
    CHECK(std::abs(g.entries()(2, 2) - 1.0) < 1e-15);
    CHECK(g.entries().cwiseAbs().sum() == Catch::Approx(2.5));  // off-diagonal zero
}

TEST_CASE("sym_power_metric d=1 returns the input") {
    Rng rng(7);
    auto h = random_pd_metric(rng, 3, 5.0);
    auto g = sym_power_metric(h, 1);
    CHECK((g.entries() - h.entries()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sym_power_metric is degree-d homogeneous in h") {
    Rng rng(11);
    auto h = random_pd_metric(rng, 2, 4.0);
    const double c = 1.7;
    for (int d = 1; d <= 4; ++d) {
        auto a = sym_power_metric(HermMetric(c * h.entries(), "e"), d);
        auto b = sym_power_metric(h, d);
        CHECK((a.entries() - std::pow(c, d) * b.entries()).cwiseAbs().maxCoeff() <
              1e-12 * std::pow(c, d));
    }
}

TEST_CASE("sym_power_metric rejects d=0 and stays positive definite") {
    Rng rng(3);
    CHECK_THROWS_AS(sym_power_metric(identity_metric(2), 0), std::invalid_argument);
    for (int r = 1; r <= 4; ++r) {
        for (int d = 1; d <= 4; ++d) {
            auto h = random_pd_metric(rng, r, 10.0);
            auto g = sym_power_metric(h, d);  // construction runs the PD check
            Eigen::SelfAdjointEigenSolver<Matrix> es(g.entries(), Eigen::EigenvaluesOnly);
            CHECK(es.eigenvalues().minCoeff() > 0.0);
        }
    }
}

TEST_CASE("permanent path agrees with recursive expansion up to d=5") {
    Rng rng(23);
    for (int d = 2; d <= 5; ++d) {
        Matrix A = random_complex_matrix(rng, d, d);
        Complex a = permanent(A);
        Complex b = permanent_recursive(A);
        CHECK(std::abs(a - b) < 1e-13 * std::max(1.0, std::abs(b)));
    }
}

TEST_CASE("normalized monomials are orthonormal under Sym^d of the identity") {
    for (int r = 1; r <= 4; ++r) {
        for (int d = 1; d <= 4; ++d) {
            auto basis = orthonormal_sym_basis(r, d);
            auto g = sym_power_metric(identity_metric(r), d);
            Matrix scaled = g.entries();
            for (int i = 0; i < basis.rank(); ++i)
                for (int j = 0; j < basis.rank(); ++j)
                    scaled(i, j) *= basis.normConstants[i] * basis.normConstants[j];
            CHECK((scaled - Matrix::Identity(basis.rank(), basis.rank()))
                      .cwiseAbs()
                      .maxCoeff() < 1e-14);
        }
    }
}

TEST_CASE("unitary functoriality of the symmetric power") {
    Rng rng(41);
    for (int r = 2; r <= 3; ++r) {
        for (int d = 2; d <= 3; ++d) {
            auto h = random_pd_metric(rng, r, 8.0);
            // U unitary w.r.t. h: U = M^{-1/2} Q M^{1/2} in standard form.
            Matrix M = h.std_form();
            Matrix Q = random_unitary(rng, r);
            Matrix U = hermitian_power(M, -0.5).value * Q * hermitian_power(M, 0.5).value;
            Matrix W = sym_power_matrix(U, d);
            Matrix S = sym_power_metric(h, d).entries();
            // New-basis Gram of monomials of U e_a: W^T S conj(W).
            Matrix Sprime = W.transpose() * S * W.conjugate();
            CHECK((Sprime - S).cwiseAbs().maxCoeff() < 1e-12 * S.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("metric_distance basics") {
    auto H0 = identity_metric(2);
    CHECK(metric_distance(H0, H0) == 0.0);

    const double eps = 0.37;
    HermMetric H1((1.0 + eps) * Matrix::Identity(2, 2), "e");
    CHECK(metric_distance(H1, H0) == Catch::Approx(eps));

    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 1.1;
    D(1, 1) = 0.9;
    CHECK(metric_distance(HermMetric(D, "e"), H0) == Catch::Approx(0.1));

    CHECK_THROWS_AS(metric_distance(identity_metric(3), H0), std::invalid_argument);
}

TEST_CASE("metric_distance is relative-symmetric for nearby metrics") {
    Rng rng(5);
    auto H0 = random_pd_metric(rng, 3, 6.0);
    Matrix X = random_hermitian_direction(rng, 3);
    Matrix s = hermitian_power(H0.std_form(), 0.5).value;
    HermMetric H((s * (Matrix::Identity(3, 3) + 0.01 * X) * s).conjugate(), "e");
    const double d1 = metric_distance(H, H0);
    const double d2 = metric_distance(H0, H);
    CHECK(d1 == Catch::Approx(0.01).margin(1e-12));
    CHECK(d2 == Catch::Approx(d1).epsilon(0.05));
}

TEST_CASE("HermMetric construction rejects bad input") {
    Matrix A(2, 2);
    A << 1.0, Complex(0.0, 0.5), Complex(0.0, 0.5), 1.0;  // not Hermitian
    CHECK_THROWS_AS(HermMetric(A, "e"), std::invalid_argument);

    Matrix B = Matrix::Identity(2, 2);
    B(1, 1) = -1.0;
    CHECK_THROWS_AS(HermMetric(B, "e"), std::invalid_argument);
}

TEST_CASE("inner product convention: conjugate-linear in the second slot") {
    Rng rng(13);
    auto h = random_pd_metric(rng, 3, 4.0);
    Vector u = random_complex_vector(rng, 3);
    Vector v = random_complex_vector(rng, 3);
    const Complex lam(0.3, -1.2);
    CHECK(std::abs(h.inner(lam * u, v) - lam * h.inner(u, v)) < 1e-12);
    CHECK(std::abs(h.inner(u, lam * v) - std::conj(lam) * h.inner(u, v)) < 1e-12);
    CHECK(std::abs(h.inner(u, v) - std::conj(h.inner(v, u))) < 1e-12);
    CHECK(h.norm_sq(u) > 0.0);
    // Gram entries really are <e_i, e_j>.
    Vector e0 = Vector::Zero(3), e1 = Vector::Zero(3);
    e0(0) = 1.0;
    e1(1) = 1.0;
    CHECK(std::abs(h.inner(e0, e1) - h.entries()(0, 1)) < 1e-15);
}
