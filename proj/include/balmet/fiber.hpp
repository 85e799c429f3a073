// Geometry of a single fiber P^{r-1} = P(V*): evaluation of Sym^d V as
// sections of O(d), the induced hat-metrics, Fubini-Study quadrature with a
// certified monomial-moment contract, the universal fiber-integral constant
// C_{r,d}, and the perturbation inequality harness.
//
// Normalization: all fiber integrals use the Fubini-Study volume of the unit
// sphere Hopf quotient, total mass pi^{r-1}/(r-1)!. Integrals are computed as
// totalMass x sphere average.

#ifndef BALMET_FIBER_HPP
#define BALMET_FIBER_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "balmet/herm.hpp"
#include "balmet/random.hpp"

namespace balmet {

// ---------------------------------------------------------------------------
// Fiber points and section evaluation
// ---------------------------------------------------------------------------

/// A point [f] of P(V*), stored as a nonzero covector. Every consumer is
/// invariant under f -> lambda f.
struct FiberPoint {
    Vector covector;

    explicit FiberPoint(Vector f) : covector(std::move(f)) {
        if (covector.size() < 1 || covector.norm() == 0.0)
            throw std::invalid_argument("FiberPoint: covector must be nonzero");
    }
    int r() const { return static_cast<int>(covector.size()); }
};

/// Vector of monomial values f^I over the basis order.
inline Vector monomial_values(const SymBasisMap& basis, const Vector& f) {
    if (f.size() != basis.r)
        throw std::invalid_argument("monomial_values: covector dimension mismatch");
    Vector m(basis.rank());
    for (int i = 0; i < basis.rank(); ++i) {
        Complex v = 1.0;
        for (int a = 0; a < basis.r; ++a)
            for (int c = 0; c < basis.indices[i][a]; ++c) v *= f(a);
        m(i) = v;
    }
    return m;
}

/// Value of the section attached to s in the frame determined by f:
/// f^{(x)d}(s) = sum_I s_I f^I. Homogeneous of degree d in f.
inline Complex eval_section(const Vector& s, const SymBasisMap& basis, const Vector& f) {
    if (s.size() != basis.rank())
        throw std::invalid_argument("eval_section: coefficient dimension mismatch");
    return monomial_values(basis, f).transpose() * s;
}

/// Squared dual norm of a covector f under the metric with standard form M:
/// sup_{v != 0} |f(v)|^2 / |v|^2_M = phi^H M^{-1} phi with phi = conj(f).
inline double dual_norm_sq(const Matrix& M, const Vector& f) {
    Vector phi = f.conjugate();
    Vector x = Eigen::LLT<Matrix>(M).solve(phi);
    return std::real((phi.adjoint() * x)(0, 0));
}

/// |f^d|^2_H: squared norm of the d-fold symmetric power of the covector f,
/// measured against the inner product on Sym^d V* dual to H. This is the
/// denominator of every hat-metric evaluation.
inline double hat_denominator(const Matrix& Hstd, const SymBasisMap& basis, const Vector& f) {
    return dual_norm_sq(Hstd, monomial_values(basis, f));
}

/// <s-hat, t-hat>_{H-hat} at [f]: the metric induced on O(d) by a Hermitian
/// inner product H on Sym^d V. Invariant under f -> lambda f.
inline Complex eval_induced_metric(const HermMetric& H, const Vector& s, const Vector& t,
                                   const SymBasisMap& basis, const Vector& f) {
    if (H.dim() != basis.rank())
        throw std::invalid_argument("eval_induced_metric: metric dimension mismatch");
    const Vector m = monomial_values(basis, f);
    const Complex vs = m.transpose() * s;
    const Complex vt = m.transpose() * t;
    return vs * std::conj(vt) / dual_norm_sq(H.std_form(), m);
}

inline Complex eval_section(const Vector& s, const SymBasisMap& basis, const FiberPoint& f) {
    return eval_section(s, basis, f.covector);
}
inline Complex eval_induced_metric(const HermMetric& H, const Vector& s, const Vector& t,
                                   const SymBasisMap& basis, const FiberPoint& f) {
    return eval_induced_metric(H, s, t, basis, f.covector);
}

// ---------------------------------------------------------------------------
// Fubini-Study quadrature
// ---------------------------------------------------------------------------

inline double fiber_volume(int r) {
    return std::pow(std::numbers::pi, r - 1) / factorial(r - 1);
}

/// Exact FS moment: int_{P^{r-1}} z^I conj(z)^J |z|^{-2d} dmu_FS
///                  = delta_IJ pi^{r-1} I! / (d+r-1)!   for |I| = |J| = d.
inline double moment_oracle(int r, const MultiIndex& I, const MultiIndex& J) {
    if (!(I == J)) return 0.0;
    const int d = I.degree();
    return std::pow(std::numbers::pi, r - 1) * multi_factorial(I) / factorial(d + r - 1);
}

enum class QuadScheme { Product, MonteCarlo };

/// Weighted points on P^{r-1}, stored as unit covectors. The Product scheme
/// is a tensor rule (uniform phases x Gauss-Jacobi on the simplex of moduli)
/// exact for all monomial moments up to targetDegree; the MonteCarlo scheme
/// is seeded uniform sphere sampling. Both are certified post hoc against
/// the moment oracle rather than trusted.
struct QuadratureRule {
    int r = 1;
    int level = 0;
    QuadScheme scheme = QuadScheme::Product;
    std::uint64_t seed = 0;
    int targetDegree = 0;
    Matrix points;            // r x P, columns are unit covectors
    Eigen::VectorXd weights;  // P, positive

    int count() const { return static_cast<int>(weights.size()); }
    double total_mass() const { return weights.sum(); }
};

struct GaussRule01 {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// Gauss rule for int_0^1 f(u) (1-u)^gamma du, exact for deg f <= 2n-1.
inline GaussRule01 gauss_jacobi01(int n, int gamma) {
    const double alpha = gamma, beta = 0.0;
    Eigen::VectorXd diag(n), sub(std::max(0, n - 1));
    diag(0) = (beta - alpha) / (alpha + beta + 2.0);
    for (int k = 1; k < n; ++k) {
        const double q = 2.0 * k + alpha + beta;
        diag(k) = (beta * beta - alpha * alpha) / (q * (q + 2.0));
        const double bk = 4.0 * k * (k + alpha) * (k + beta) * (k + alpha + beta) /
                          (q * q * (q + 1.0) * (q - 1.0));
        sub(k - 1) = std::sqrt(bk);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub);
    const double mu0 = std::pow(2.0, alpha + beta + 1.0) * factorial(gamma) * 1.0 /
                       factorial(gamma + 1);  // 2^{a+1} G(a+1)G(1)/G(a+2)
    GaussRule01 rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double scale = std::pow(2.0, -gamma - 1.0);
    for (int i = 0; i < n; ++i) {
        rule.nodes(i) = 0.5 * (es.eigenvalues()(i) + 1.0);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights(i) = mu0 * v0 * v0 * scale;
    }
    return rule;
}

inline QuadratureRule fs_quadrature(int r, int level, QuadScheme scheme = QuadScheme::Product,
                                    std::uint64_t seed = 0) {
    if (r < 1) throw std::invalid_argument("fs_quadrature: r must be >= 1");
    if (level < 0) throw std::invalid_argument("fs_quadrature: level must be >= 0");
    QuadratureRule rule;
    rule.r = r;
    rule.level = level;
    rule.scheme = scheme;
    rule.seed = seed;
    const double mass = fiber_volume(r);

    if (r == 1) {
        rule.targetDegree = std::numeric_limits<int>::max() / 2;
        rule.points = Matrix::Ones(1, 1);
        rule.weights = Eigen::VectorXd::Constant(1, mass);
        return rule;
    }

    if (scheme == QuadScheme::MonteCarlo) {
        // level is the sample count; no exactness contract.
        const int P = std::max(1, level);
        Rng rng(seed);
        rule.targetDegree = 0;
        rule.points.resize(r, P);
        rule.weights = Eigen::VectorXd::Constant(P, mass / P);
        for (int p = 0; p < P; ++p) {
            Vector z = random_complex_vector(rng, r);
            rule.points.col(p) = z / z.norm();
        }
        return rule;
    }

    // Product rule: moduli t on the simplex via a Gauss-Jacobi chain,
    // phases on the first r-1 coordinates on uniform grids.
    rule.targetDegree = level;
    const int ntheta = 2 * level + 1;
    const int nu = level / 2 + 1;

    std::vector<GaussRule01> chain;
    for (int i = 1; i <= r - 1; ++i) chain.push_back(gauss_jacobi01(nu, r - 1 - i));

    std::vector<Eigen::VectorXd> tGrid;   // per u-combination: t_1..t_r
    std::vector<double> tWeight;
    std::vector<int> uIdx(r - 1, 0);
    const long long uCombos = static_cast<long long>(std::pow(nu, r - 1));
    for (long long c = 0; c < uCombos; ++c) {
        long long rem = c;
        double w = 1.0, left = 1.0;
        Eigen::VectorXd t(r);
        for (int i = 0; i < r - 1; ++i) {
            const int q = static_cast<int>(rem % nu);
            rem /= nu;
            const double u = chain[i].nodes(q);
            w *= chain[i].weights(q);
            t(i) = left * u;
            left *= (1.0 - u);
        }
        t(r - 1) = left;
        tGrid.push_back(t);
        tWeight.push_back(w);
    }

    const long long phaseCombos = static_cast<long long>(std::pow(ntheta, r - 1));
    const long long P = static_cast<long long>(tGrid.size()) * phaseCombos;
    rule.points.resize(r, P);
    rule.weights.resize(P);
    const double wPhase = 1.0 / static_cast<double>(phaseCombos);
    long long p = 0;
    for (size_t tc = 0; tc < tGrid.size(); ++tc) {
        for (long long pc = 0; pc < phaseCombos; ++pc) {
            long long rem = pc;
            Vector f(r);
            for (int a = 0; a < r - 1; ++a) {
                const int j = static_cast<int>(rem % ntheta);
                rem /= ntheta;
                const double th = 2.0 * std::numbers::pi * j / ntheta;
                f(a) = std::sqrt(tGrid[tc](a)) * Complex(std::cos(th), std::sin(th));
            }
            f(r - 1) = std::sqrt(tGrid[tc](r - 1));
            rule.points.col(p) = f;
            rule.weights(p) = mass * factorial(r - 1) * tWeight[tc] * wPhase;
            ++p;
        }
    }
    return rule;
}

/// Worst relative error of the rule's monomial moments against the oracle,
/// over all pairs |I| = |J| = D for D <= maxDegree. Scale per degree is the
/// largest diagonal oracle value.
inline double certify_rule(const QuadratureRule& rule, int maxDegree) {
    double worst = 0.0;
    for (int D = 0; D <= maxDegree; ++D) {
        const auto basis = enumerate_multi_indices(rule.r, D);
        const int R = static_cast<int>(basis.size());
        SymBasisMap map;
        map.r = rule.r;
        map.d = D;
        map.indices = basis;
        Matrix acc = Matrix::Zero(R, R);
        const int P = rule.count();
        const int chunk = 8192;
        for (int start = 0; start < P; start += chunk) {
            const int len = std::min(chunk, P - start);
            Matrix mono(R, len);
            for (int q = 0; q < len; ++q)
                mono.col(q) = monomial_values(map, rule.points.col(start + q));
            acc.noalias() +=
                mono * rule.weights.segment(start, len).asDiagonal() * mono.adjoint();
        }
        const double scale = std::pow(std::numbers::pi, rule.r - 1) * factorial(D) /
                             factorial(D + rule.r - 1);
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < R; ++j) {
                const double oracle = moment_oracle(rule.r, basis[i], basis[j]);
                worst = std::max(worst, std::abs(acc(i, j) - oracle) / scale);
            }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Transport to an h-orthonormal frame
// ---------------------------------------------------------------------------

/// Covectors of the rule transported so that sphere points become
/// ||.||_h = 1 frames: f_phys = conj(L) f_tilde with the standard form
/// M = L L^H. The pushed-forward rule realizes the FS form of h-hat.
inline Matrix transport_points(const HermMetric& h, const QuadratureRule& rule) {
    if (h.dim() != rule.r)
        throw std::invalid_argument("transport_points: dimension mismatch");
    const Matrix L = Eigen::LLT<Matrix>(h.std_form()).matrixL();
    return L.conjugate() * rule.points;
}

// ---------------------------------------------------------------------------
// Lemma-2 constant and fiber Gram
// ---------------------------------------------------------------------------

/// Closed form d^{r-1} pi^{r-1} d! / (d+r-1)!, certified against the moment
/// oracle (the diagonal moment ratio reproduces it identically).
inline double c_constant_closed_form(int r, int d) {
    return std::pow(static_cast<double>(d), r - 1) * std::pow(std::numbers::pi, r - 1) *
           factorial(d) / factorial(d + r - 1);
}

inline void require_resolved(const QuadratureRule& rule, int d) {
    if (rule.r > 1 && rule.scheme == QuadScheme::Product && rule.targetDegree < d)
        throw std::runtime_error("quadrature under-resolved: targetDegree " +
                                 std::to_string(rule.targetDegree) + " < moment degree " +
                                 std::to_string(d));
}

/// Gram of the fiber integrals d^{r-1} int <e^I-hat, e^J-hat>_{(Sym^d h)-hat}
/// over P(V*) against the FS measure of h. Postcondition (Lemma 2):
/// approximately C_{r,d} * sym_power_metric(h, d).
inline HermMetric fiber_gram(const HermMetric& h, int d, const QuadratureRule& rule) {
    require_resolved(rule, d);
    const int r = h.dim();
    const auto basis = orthonormal_sym_basis(r, d);
    const Matrix pts = transport_points(h, rule);
    const Matrix Hstd = sym_power_gram(h.std_form(), d);
    Eigen::LLT<Matrix> llt(Hstd);

    const int R = basis.rank();
    Matrix acc = Matrix::Zero(R, R);
    for (int p = 0; p < rule.count(); ++p) {
        Vector m = monomial_values(basis, pts.col(p));
        Vector phi = m.conjugate();
        const double denom = std::real((phi.adjoint() * llt.solve(phi))(0, 0));
        acc.noalias() += (rule.weights(p) / denom) * (m * m.adjoint());
    }
    acc *= std::pow(static_cast<double>(d), r - 1);
    // acc_IJ = d^{r-1} int m_I conj(m_J)/denom = <e^I-hat, e^J-hat> integrated:
    // already the entries convention.
    Matrix entries = 0.5 * (acc + acc.adjoint().eval());
    return HermMetric(entries, "sym^" + std::to_string(d) + "(" + h.basisLabel() + ")");
}

/// Empirical C_{r,d}: the common ratio of fiber_gram to sym_power_metric over
/// diagonal pairs. Throws "quadrature under-resolved" if the ratio is not
/// constant to 10x the declared moment tolerance.
inline double c_constant(int r, int d, const QuadratureRule& rule, double momentTol = 1e-10) {
    const HermMetric id(Matrix::Identity(r, r), "e");
    const HermMetric fg = fiber_gram(id, d, rule);
    const Matrix sg = sym_power_gram(Matrix::Identity(r, r), d);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
    const int R = fg.dim();
    for (int i = 0; i < R; ++i) {
        const double ratio = std::real(fg.entries()(i, i)) / std::real(sg(i, i));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        sum += ratio;
    }
    const double c = sum / R;
    if (hi - lo > 10.0 * momentTol * c)
        throw std::runtime_error("quadrature under-resolved: C_{r,d} ratio spread " +
                                 std::to_string(hi - lo) + " across diagonal pairs");
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j) {
            if (i == j) continue;
            if (std::abs(fg.entries()(i, j)) > 10.0 * momentTol * c * 10.0)
                throw std::runtime_error(
                    "quadrature under-resolved: off-diagonal fiber Gram leakage");
        }
    return c;
}

// ---------------------------------------------------------------------------
// Proposition-1 style perturbation check
// ---------------------------------------------------------------------------

struct PerturbationReport {
    double epsilon = 0.0;
    double worstRatio = 0.0;
};

/// For H on Sym^d V with eps = ||H - Sym^d h|| < 1/2, measures
///   max_{I,J} |d^{r-1} int <e^I-hat, e^J-hat>_H-hat dmu_{FS,h}
///              - C_{r,d} <e^I, e^J>_H| / (eps |e^I|_H |e^J|_H).
/// The paper bounds this by a constant depending only on (r, d).
inline PerturbationReport perturbation_check(const HermMetric& h, int d, const HermMetric& H,
                                             const QuadratureRule& rule) {
    require_resolved(rule, 2 * d);
    const int r = h.dim();
    const auto basis = orthonormal_sym_basis(r, d);
    if (H.dim() != basis.rank())
        throw std::invalid_argument("perturbation_check: H has wrong dimension");
    const HermMetric symh = sym_power_metric(h, d);
    const double eps = metric_distance(H, symh);
    if (eps >= 0.5) throw std::runtime_error("perturbation too large: eps >= 1/2");

    const Matrix pts = transport_points(h, rule);
    Eigen::LLT<Matrix> llt(H.std_form());
    const int R = basis.rank();
    Matrix acc = Matrix::Zero(R, R);
    for (int p = 0; p < rule.count(); ++p) {
        Vector m = monomial_values(basis, pts.col(p));
        Vector phi = m.conjugate();
        const double denom = std::real((phi.adjoint() * llt.solve(phi))(0, 0));
        acc.noalias() += (rule.weights(p) / denom) * (m * m.adjoint());
    }
    acc *= std::pow(static_cast<double>(d), r - 1);
    const Matrix& integral = acc;  // entries convention, as in fiber_gram

    PerturbationReport rep;
    rep.epsilon = eps;
    if (eps < 1e-14) return rep;
    const double C = c_constant_closed_form(r, d);
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j) {
            const double lhs = std::abs(integral(i, j) - C * H.entries()(i, j));
            const double scale = std::sqrt(std::real(H.entries()(i, i)) *
                                           std::real(H.entries()(j, j)));
            rep.worstRatio = std::max(rep.worstRatio, lhs / (eps * scale));
        }
    return rep;
}

}  // namespace balmet

#endif  // BALMET_FIBER_HPP
