#include <catch2/catch_amalgamated.hpp>

#include "balmet/fd.hpp"
#include "balmet/models.hpp"

using namespace balmet;
namespace {
const double kPi = std::numbers::pi;

// Direct L^2 Gram in standard form: sum_p w_p S(p)^H H(p) S(p).
Matrix l2_gram_std(const Model& m) {
    Matrix G = Matrix::Zero(m.sample.N, m.sample.N);
    for (int p = 0; p < m.mesh.size(); ++p)
        G.noalias() +=
            m.mesh.weights(p) * (m.sample.values[p].adjoint() * m.referenceField[p] *
                                 m.sample.values[p]);
    return G;
}

ModelSpec p1_spec(std::vector<int> deg, int k, int mesh = 0) {
    ModelSpec s;
    s.kind = ModelKind::P1Split;
    s.degrees = std::move(deg);
    s.k = k;
    s.meshSize = mesh;
    return s;
}

ModelSpec torus_spec(Complex tau, int d0, int k, int mesh = 0) {
    ModelSpec s;
    s.kind = ModelKind::TorusLine;
    s.tau = tau;
    s.d0 = d0;
    s.k = k;
    s.meshSize = mesh;
    return s;
}

}  // namespace

TEST_CASE("finite differences recover analytic curvature on P^1") {
    auto phi = [](Complex z) { return std::log(1.0 + std::norm(z)); };
    for (Complex z : {Complex(0.0, 0.0), Complex(0.4, -0.7), Complex(1.3, 0.2)}) {
        const double expect = 1.0 / std::pow(1.0 + std::norm(z), 2);
        // Centered differences at the default step cancel to ~1e-7 relative.
        CHECK(curvature_density(phi, z) == Catch::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("complex_hessian recovers a constant Hermitian form") {
    Matrix A(2, 2);
    A << 2.0, Complex(0.3, -0.4), Complex(0.3, 0.4), 1.5;
    ScalarFieldN phi = [&](const Vector& zeta) {
        return std::real((zeta.adjoint() * A * zeta)(0, 0));
    };
    Vector at(2);
    at << Complex(0.2, 0.1), Complex(-0.5, 0.3);
    // For phi = zeta^H A zeta, d^2 phi / dzeta_a dzeta_b-bar = A(b, a).
    Matrix H = complex_hessian(phi, at);
    CHECK((H - A.transpose()).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("P^1 mesh integrates to volume pi and satisfies the Beta-Gram oracle") {
    auto model = gen_p1_bundle(p1_spec({0}, 1));
    CHECK(std::abs(model.mesh.totalVolume - kPi) < 1e-10);
    REQUIRE(model.sample.N == 2);

    Matrix G = l2_gram_std(model);
    auto oracle = beta_gram_diagonal(1);
    CHECK(std::abs(G(0, 0) - oracle(0)) < 1e-10);
    CHECK(std::abs(G(1, 1) - oracle(1)) < 1e-10);
    CHECK(std::abs(G(0, 0) - kPi / 2.0) < 1e-10);
    CHECK(std::abs(G(0, 1)) < 1e-12);
    CHECK(std::real(G(0, 0)) == Catch::Approx(std::real(G(1, 1))));  // Beta(1,2) = Beta(2,1)
}

TEST_CASE("split-bundle Grams match Beta integrals summand by summand") {
    auto model = gen_p1_bundle(p1_spec({0, 2}, 1));
    Matrix G = l2_gram_std(model);
    int col = 0;
    for (int a : model.spec.degrees) {
        const int m = a + model.spec.k;
        auto oracle = beta_gram_diagonal(m);
        for (int j = 0; j <= m; ++j, ++col)
            CHECK(std::abs(G(col, col) - oracle(j)) < 1e-10);
    }
    // Off-diagonal entries vanish by rotation symmetry.
    for (int i = 0; i < model.sample.N; ++i)
        for (int j = 0; j < i; ++j) CHECK(std::abs(G(i, j)) < 1e-11);
}

TEST_CASE("Riemann-Roch dimension counts are exact") {
    for (auto degrees : {std::vector<int>{0}, {1, 1}, {0, 2}, {1, 2, 3}}) {
        for (int k : {0, 1, 5}) {
            auto model = gen_p1_bundle(p1_spec(degrees, k));
            CHECK(model.sample.N == riemann_roch_p1(degrees, k));
        }
    }
    auto torus = gen_torus_line(torus_spec(Complex(0.0, 1.0), 1, 3));
    CHECK(torus.sample.N == 3);
}

TEST_CASE("Hermitian-Einstein flag and slope") {
    auto m1 = gen_p1_bundle(p1_spec({1, 1}, 0));
    CHECK(m1.hermitianEinstein);
    CHECK(m1.slope == Catch::Approx(1.0));

    auto m2 = gen_p1_bundle(p1_spec({0, 2}, 0));
    CHECK_FALSE(m2.hermitianEinstein);
    CHECK(m2.slope == Catch::Approx(1.0));

    auto m3 = gen_p1_bundle(p1_spec({3}, 2));
    CHECK(m3.hermitianEinstein);  // r = 1
    CHECK(m3.slope == Catch::Approx(3.0));
}

TEST_CASE("HE identity iF = mu omega holds pointwise for equal splits") {
    auto model = gen_p1_bundle(p1_spec({1, 1}, 0, 64));
    double worst = 0.0;
    for (int p = 0; p < model.mesh.size(); p += 37) {
        const auto& pt = model.mesh.points[p];
        for (int i = 0; i < model.fiberRank; ++i) {
            auto phi = [&](Complex z) {
                return -std::log(std::real(model.fiberMetric(pt.chart, z)(i, i)));
            };
            const double iF = curvature_density(phi, pt.z);
            const double target = model.slope * model.omegaDensity(pt.chart, pt.z);
            worst = std::max(worst, std::abs(iF - target) / std::abs(target));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("sections span the fiber at every mesh point") {
    for (auto degrees : {std::vector<int>{0}, {1, 1}, {0, 2}}) {
        auto model = gen_p1_bundle(p1_spec(degrees, 1));
        for (int p = 0; p < model.mesh.size(); p += 11) {
            Eigen::JacobiSVD<Matrix> svd(model.sample.values[p]);
            CHECK(svd.singularValues().minCoeff() > 1e-8);
        }
    }
}

TEST_CASE("mesh degree contract is enforced with the required size") {
    CHECK_THROWS_WITH(gen_p1_bundle(p1_spec({0}, 20, 3)),
                      Catch::Matchers::ContainsSubstring("meshSize too small"));
}

TEST_CASE("theta basis: single section for k d0 = 1, positive norm") {
    auto model = gen_torus_line(torus_spec(Complex(0.0, 1.0), 1, 1));
    REQUIRE(model.sample.N == 1);
    Matrix G = l2_gram_std(model);
    CHECK(std::real(G(0, 0)) > 0.0);
    CHECK(std::abs(G(0, 0) - theta_norm_sq(1.0, 1)) < 1e-12);
}

TEST_CASE("theta basis orthogonality and equal norms at k d0 = 3, tau = i") {
    auto model = gen_torus_line(torus_spec(Complex(0.0, 1.0), 1, 3, 96));
    Matrix G = l2_gram_std(model);
    const double expect = theta_norm_sq(1.0, 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(G(i, i) - expect) < 1e-12);
        for (int j = 0; j < i; ++j) CHECK(std::abs(G(i, j)) < 1e-12);
    }
    CHECK(std::abs(model.mesh.totalVolume - 1.0) < 1e-12);  // Im tau
}

TEST_CASE("torus mesh volume equals Im tau") {
    auto model = gen_torus_line(torus_spec(Complex(0.3, 0.8), 2, 2));
    CHECK(std::abs(model.mesh.totalVolume - 0.8) < 1e-10);
}

TEST_CASE("theta truncation budget error surfaces") {
    CHECK_THROWS_WITH(theta_section(Complex(0.0, 1e-6), 1, 0, Complex(0.1, 0.2)),
                      Catch::Matchers::ContainsSubstring("truncation budget"));
}

TEST_CASE("gen_torus_line validates its arguments") {
    CHECK_THROWS_AS(gen_torus_line(torus_spec(Complex(0.0, -1.0), 1, 2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(gen_torus_line(torus_spec(Complex(0.0, 1.0), 1, 0)),
                    std::invalid_argument);
}

TEST_CASE("sym_sections summand bookkeeping") {
    auto base = gen_p1_bundle(p1_spec({1, 1}, 0));
    auto sym = sym_sections(base, 2);
    CHECK(sym.fiberRank == 3);
    CHECK(sym.symDegrees == std::vector<int>{2, 2, 2});
    CHECK(sym.sample.N == 9);
    CHECK(sym.slope == Catch::Approx(2.0));

    auto base2 = gen_p1_bundle(p1_spec({0, 2}, 0));
    auto sym2 = sym_sections(base2, 2);
    CHECK(sym2.symDegrees == std::vector<int>{0, 2, 4});  // <a, I> arithmetic

    auto same = sym_sections(base, 1);
    CHECK(same.sample.N == base.sample.N);
    CHECK(same.fiberRank == base.fiberRank);
}

TEST_CASE("sym_sections reference metric carries the multinomial factors") {
    auto base = gen_p1_bundle(p1_spec({1, 1}, 2));
    auto sym = sym_sections(base, 2);
    // At z = 0 the fiber metric is Sym^2 of the identity: diag(1, 1/2, 1).
    Matrix M = sym.fiberMetric(0, Complex(0.0, 0.0));
    CHECK(std::abs(M(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(M(1, 1) - 0.5) < 1e-14);
    CHECK(std::abs(M(2, 2) - 1.0) < 1e-14);

    // Sym Grams match Beta oracles with the I!/d! weight.
    Matrix G = l2_gram_std(sym);
    auto basis = orthonormal_sym_basis(2, 2);
    int col = 0;
    for (int i = 0; i < sym.fiberRank; ++i) {
        const int m = sym.symDegrees[i] + sym.spec.k;
        const double w = multi_factorial(basis.indices[i]) / factorial(2);
        auto oracle = beta_gram_diagonal(m);
        for (int j = 0; j <= m; ++j, ++col)
            CHECK(std::abs(G(col, col) - w * oracle(j)) < 1e-10);
    }
}
