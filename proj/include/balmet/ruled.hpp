// The ruled manifold P(E*) assembled numerically: combined base x fiber
// quadrature, hat-sections of O(d) (x) L^k, the volume identity
// omega_k^r = r (d mu + k) omega_0^{r-1} ^ omega_inf, Gram estimates of the
// projectivized metrics, almost-balanced diagnostics (D^(k), M^(k)), and
// direct T-map balancing of (P(E*), O(d) (x) L^k).
//
// With the full twisted metric H_k on Sym^d E (x) L^k, the induced weight of
// the O(d) (x) L^k frame at ([f], x) is simply 1/denom(H_k(x), f); the L^k
// factor rides inside the denominator's scaling.

#ifndef BALMET_RULED_HPP
#define BALMET_RULED_HPP

#include <memory>

#include "balmet/balance.hpp"
#include "balmet/fd.hpp"

namespace balmet {

// ---------------------------------------------------------------------------
// Ruled mesh
// ---------------------------------------------------------------------------

/// Product quadrature on P(E*): the base mesh, one fiber rule in the
/// h_inf-orthonormal frame, and per-base-point transports into the physical
/// frame. Combined weights realize the form
/// omega_{h-hat}^{r-1}/(r-1)! ^ omega_inf (total mass Vol(P^{r-1}) Vol(X)).
struct RuledMesh {
    int rE = 1;  // rank of E (fiber is P^{rE-1})
    int level = 0;
    BaseMesh base;
    QuadratureRule fiberRule;
    std::vector<Matrix> transport;  // conj(L(p)), hE-std(p) = L L^H
    std::function<Matrix(int, Complex)> hE;  // E-level h_inf std-form evaluator
    std::function<double(int, Complex)> omegaDensity;

    double total_mass() const { return base.totalVolume * fiberRule.total_mass(); }
    int nodes() const { return base.size() * fiberRule.count(); }

    Vector covector(int p, int q) const { return transport[p] * fiberRule.points.col(q); }
};

// Desk-scale guard rails: keep every run laptop-sized.
constexpr int kMaxSections = 400;
constexpr long long kMaxCombinedNodes = 5'000'000;

inline RuledMesh build_ruled_mesh(const Model& model, int level) {
    RuledMesh ruled;
    ruled.rE = model.spec.kind == ModelKind::P1Split
                   ? static_cast<int>(model.spec.degrees.size())
                   : 1;
    ruled.level = level;
    if (model.sample.N > kMaxSections)
        throw std::invalid_argument("build_ruled_mesh: N_k = " +
                                    std::to_string(model.sample.N) +
                                    " exceeds the supported cap of 400 sections");
    // Predicted product-rule size: (2l+1)^{r-1} phases x (l/2+1)^{r-1} moduli.
    const long long fiberCount =
        ruled.rE == 1 ? 1
                      : static_cast<long long>(std::pow(2.0 * level + 1.0, ruled.rE - 1) *
                                               std::pow(level / 2 + 1.0, ruled.rE - 1));
    if (static_cast<long long>(model.mesh.size()) * fiberCount > kMaxCombinedNodes)
        throw std::invalid_argument(
            "build_ruled_mesh: combined node count exceeds the 5e6 cap; lower the fiber "
            "level or the base meshSize");
    ruled.base = model.mesh;
    ruled.fiberRule = fs_quadrature(ruled.rE, level);
    ruled.omegaDensity = model.omegaDensity;

    if (model.spec.kind == ModelKind::P1Split) {
        const std::vector<int> a = model.spec.degrees;
        ruled.hE = [a](int, Complex z) {
            Matrix M = Matrix::Zero(static_cast<int>(a.size()), static_cast<int>(a.size()));
            for (size_t i = 0; i < a.size(); ++i) M(i, i) = std::pow(1.0 + std::norm(z), -a[i]);
            return M;
        };
    } else {
        ruled.hE = [](int, Complex) { return Matrix::Ones(1, 1); };
    }

    if (static_cast<long long>(ruled.base.size()) * ruled.fiberRule.count() >
        kMaxCombinedNodes)
        throw std::invalid_argument(
            "build_ruled_mesh: combined node count exceeds the 5e6 cap; lower the fiber "
            "level or the base meshSize");

    ruled.transport.reserve(ruled.base.size());
    for (const auto& pt : ruled.base.points) {
        const Matrix M = ruled.hE(pt.chart, pt.z);
        const Matrix L = Eigen::LLT<Matrix>(M).matrixL();
        ruled.transport.push_back(L.conjugate());
    }
    return ruled;
}

// ---------------------------------------------------------------------------
// Metric closures on Sym^d E (x) L^k
// ---------------------------------------------------------------------------

/// Full twisted metric H_k as an evaluator (standard form, R x R, including
/// the g^k factor), usable at off-mesh points for finite differences.
struct SymClosure {
    int R = 1;
    int d = 1;
    std::function<Matrix(int, Complex)> Hk;
};

inline SymClosure reference_closure(const Model& sym) {
    SymClosure c;
    c.R = sym.fiberRank;
    c.d = sym.sample.d;
    auto fib = sym.fiberMetric;
    auto gk = sym.gkWeight;
    c.Hk = [fib, gk](int chart, Complex z) { return Matrix(fib(chart, z) * gk(chart, z)); };
    return c;
}

/// Fubini-Study metric of a Gram matrix as a closure: H_G(x) = Q(x)^{-1}
/// with Q = S(x) conj(G)^{-1} S(x)^H evaluated through the section evaluator.
inline SymClosure fs_closure(const Model& sym, const GramMatrix& G) {
    SymClosure c;
    c.R = sym.fiberRank;
    c.d = sym.sample.d;
    auto sections = sym.sections;
    auto Minv = std::make_shared<Matrix>(G.std_form().inverse());
    c.Hk = [sections, Minv](int chart, Complex z) {
        const Matrix S = sections(chart, z);
        const Matrix Q = S * (*Minv) * S.adjoint();
        Matrix H = Q.inverse();
        return Matrix(0.5 * (H + H.adjoint().eval()));
    };
    return c;
}

// ---------------------------------------------------------------------------
// Hat-sections and node weights
// ---------------------------------------------------------------------------

/// Monomial-value matrix of the fiber nodes at base point p: F x R rows
/// f_{p,q}^I over the degree-d basis of Sym^d.
inline Matrix fiber_monomials(const RuledMesh& ruled, const SymBasisMap& basis, int p) {
    const int F = ruled.fiberRule.count();
    Matrix mono(F, basis.rank());
    for (int q = 0; q < F; ++q)
        mono.row(q) = monomial_values(basis, ruled.covector(p, q)).transpose();
    return mono;
}

/// Hat-metric weights 1/denom(H_k(p), f_{p,q}) for all fiber nodes at p.
inline Eigen::VectorXd hat_weights(const Matrix& HkStd, const Matrix& mono) {
    Eigen::LLT<Matrix> llt(HkStd);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("hat_weights: twisted metric not positive definite");
    const Matrix Y = llt.solve(mono.adjoint());  // R x F, columns H^{-1} conj(m_q)
    Eigen::VectorXd w(mono.rows());
    for (int q = 0; q < mono.rows(); ++q)
        w(q) = 1.0 / std::real((mono.row(q) * Y.col(q))(0, 0));  // phi^H H^{-1} phi
    return w;
}

// ---------------------------------------------------------------------------
// Induced volume densities by finite differences
// ---------------------------------------------------------------------------

namespace ruled_detail {

/// Orthonormal completion of f to a basis of C^r: columns 1..r-1 span f^perp.
inline Matrix perp_frame(const Vector& f) {
    const int r = static_cast<int>(f.size());
    Matrix Q(r, r);
    Q.col(0) = f / f.norm();
    Eigen::HouseholderQR<Matrix> qr(Q.col(0).eval());
    Matrix full = qr.householderQ();
    // first column of full is parallel to f up to phase; keep the rest
    Matrix out(r, r - 1);
    out = full.rightCols(r - 1);
    return out;
}

/// Potential of the induced form at a combined chart around (p, q):
/// Phi(zeta, dz) = (1/2) log denom(H_k(z0 + dz), f0 + sum zeta_a u_a).
struct NodePotential {
    const SymClosure* closure;
    const SymBasisMap* basis;
    int chart;
    Complex z0;
    Vector f0;
    Matrix perp;  // r x (r-1)
    double fscale = 1.0;

    // Full Kahler potential of the induced form; the half-convention factor
    // cancels against i dz^dzbar = 2 dx dy in every density determinant.
    double operator()(const Vector& coords) const {
        const int nf = static_cast<int>(perp.cols());
        Vector f = f0;
        for (int a = 0; a < nf; ++a) f += fscale * coords(a) * perp.col(a);
        const Complex z = z0 + coords(nf);
        const Matrix Hk = closure->Hk(chart, z);
        return std::log(hat_denominator(Hk, *basis, f));
    }
};

/// Fiber-only potential of the E-level reference form omega_{h-hat} at p.
struct FiberPotential {
    const RuledMesh* ruled;
    const SymBasisMap* basisE;  // degree-1 basis
    int chart;
    Complex z0;
    Vector f0;
    Matrix perp;
    double fscale = 1.0;

    double operator()(const Vector& coords) const {
        Vector f = f0;
        for (int a = 0; a < coords.size(); ++a) f += fscale * coords(a) * perp.col(a);
        return std::log(dual_norm_sq(ruled->hE(chart, z0), f));
    }
};

}  // namespace ruled_detail

/// det of the complex Hessian of the induced potential at node (p, q),
/// divided by the density of the mesh's own reference form
/// omega_{h-hat}^{r-1}/(r-1)! ^ omega_inf. Multiplying a combined-node
/// weight by this ratio turns sums against the reference form into sums
/// against dvol of the closure's metric.
inline double induced_density_ratio(const RuledMesh& ruled, const SymClosure& closure,
                                    const SymBasisMap& basisD, const SymBasisMap& basisE,
                                    int p, int q, double step = 1e-4) {
    const auto& pt = ruled.base.points[p];
    const Vector f0 = ruled.covector(p, q);
    const int rE = ruled.rE;

    ruled_detail::NodePotential pot;
    pot.closure = &closure;
    pot.basis = &basisD;
    pot.chart = pt.chart;
    pot.z0 = pt.z;
    pot.f0 = f0;
    pot.fscale = f0.norm();
    if (rE > 1) pot.perp = ruled_detail::perp_frame(f0);
    else pot.perp = Matrix(1, 0);

    ScalarFieldN phi = [&pot](const Vector& c) { return pot(c); };
    const Matrix full = complex_hessian(phi, Vector::Zero(rE), step);
    Eigen::SelfAdjointEigenSolver<Matrix> es(full, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("induced_density_ratio: non-positive induced form at a node");
    const double num = std::real(Matrix(full).determinant());

    double den = ruled.omegaDensity(pt.chart, pt.z);
    if (rE > 1) {
        ruled_detail::FiberPotential fpot;
        fpot.ruled = &ruled;
        fpot.basisE = &basisE;
        fpot.chart = pt.chart;
        fpot.z0 = pt.z;
        fpot.f0 = f0;
        fpot.perp = pot.perp;
        fpot.fscale = pot.fscale;
        ScalarFieldN fphi = [&fpot](const Vector& c) { return fpot(c); };
        const Matrix fib = complex_hessian(fphi, Vector::Zero(rE - 1), step);
        den *= std::real(Matrix(fib).determinant());
    }
    return num / den;
}

// ---------------------------------------------------------------------------
// pe_gram
// ---------------------------------------------------------------------------

enum class VolumeMode { Product, Induced };

struct PeGramOptions {
    VolumeMode mode = VolumeMode::Product;
    double fdStep = 1e-4;
};

/// (d mu + k), the twist factor of the volume identity, from a Sym-level
/// model (whose slope field already carries d mu).
inline double dmu_plus_k(const Model& sym) { return sym.slope + sym.spec.k; }

/// The N x N matrix of integrals over P(E*) of <s_i-hat, s_j-hat>_{H_k-hat}
/// against dvol: in Product mode dvol = omega_k^r/r! of the Hermitian-
/// Einstein reference (the volume-identity form (d mu + k) d^{r-1} x
/// combined weights); in Induced mode dvol comes from finite-difference
/// curvature of the closure metric itself. Entries convention.
inline Matrix pe_gram(const Model& sym, const SymClosure& closure, const RuledMesh& ruled,
                      const PeGramOptions& opts = {}) {
    const int N = sym.sample.N;
    const int d = sym.sample.d;
    const auto basisD = orthonormal_sym_basis(ruled.rE, d);
    const auto basisE = orthonormal_sym_basis(ruled.rE, 1);
    const double volumeFactor =
        dmu_plus_k(sym) * std::pow(static_cast<double>(d), ruled.rE - 1);

    Matrix M = Matrix::Zero(N, N);  // standard form accumulator
    for (int p = 0; p < ruled.base.size(); ++p) {
        const auto& pt = ruled.base.points[p];
        const Matrix mono = fiber_monomials(ruled, basisD, p);
        const Matrix V = mono * sym.sample.values[p];  // F x N hat-values
        Eigen::VectorXd w = hat_weights(closure.Hk(pt.chart, pt.z), mono);
        w *= ruled.base.weights(p);
        if (opts.mode == VolumeMode::Product) {
            w = (w.array() * ruled.fiberRule.weights.array()).matrix() * volumeFactor;
        } else {
            // The density ratio of the closure's dvol against the reference
            // form already carries the (d mu + k) d^{r-1} structure.
            for (int q = 0; q < ruled.fiberRule.count(); ++q)
                w(q) *= ruled.fiberRule.weights(q) *
                        induced_density_ratio(ruled, closure, basisD, basisE, p, q,
                                              opts.fdStep);
        }
        M.noalias() += V.adjoint() * w.asDiagonal() * V;
    }
    Matrix entries = M.conjugate();
    return 0.5 * (entries + entries.adjoint().eval());
}

/// Gram of the congruence-transformed basis s'_i = sum_a C(a,i) s_a.
inline Matrix congruence_entries(const Matrix& entries, const Matrix& C) {
    return C.transpose() * entries * C.conjugate();
}

/// Coefficients orthonormalizing the sections against L^2(H^(k)): the
/// inverse square root of the standard-form L^2 Gram.
inline Matrix orthonormalizer(const GramMatrix& l2) {
    return hermitian_power(l2.std_form(), -0.5).value;
}

// ---------------------------------------------------------------------------
// Volume identity
// ---------------------------------------------------------------------------

struct VolumeIdentityReport {
    double massProduct = 0.0;
    double massInduced = 0.0;
    double discrepancy = 0.0;
};

/// Total mass of omega_k^r / r! two ways: (a) r (d mu + k)/r! x the product
/// quadrature mass of omega_0^{r-1} ^ omega_inf, (b) direct finite-difference
/// evaluation of the induced top power of the reference metric.
inline VolumeIdentityReport volume_identity_check(const Model& sym, const RuledMesh& ruled,
                                                  double fdStep = 1e-4) {
    if (!sym.hermitianEinstein)
        throw std::runtime_error("identity requires Hermitian-Einstein input");
    const int d = sym.sample.d;
    const auto basisD = orthonormal_sym_basis(ruled.rE, d);
    const auto basisE = orthonormal_sym_basis(ruled.rE, 1);
    const SymClosure closure = reference_closure(sym);
    const double dfac = std::pow(static_cast<double>(d), ruled.rE - 1);

    VolumeIdentityReport rep;
    rep.massProduct = dmu_plus_k(sym) * dfac * ruled.total_mass();
    for (int p = 0; p < ruled.base.size(); ++p)
        for (int q = 0; q < ruled.fiberRule.count(); ++q)
            rep.massInduced += ruled.base.weights(p) * ruled.fiberRule.weights(q) *
                               induced_density_ratio(ruled, closure, basisD, basisE, p, q,
                                                     fdStep);
    rep.discrepancy = std::abs(rep.massInduced / rep.massProduct - 1.0);
    return rep;
}

// ---------------------------------------------------------------------------
// Almost-balanced diagnostics
// ---------------------------------------------------------------------------

struct AlmostBalancedReport {
    int k = 0;
    Matrix gram;            // entries convention
    double D = 0.0;         // average diagonal (makes M trace-free exactly)
    Matrix M;               // gram - D I
    double opNormM = 0.0;
    double Dnormalized = 0.0;  // D / (d mu + k)
    double cTarget = 0.0;      // C_{r,d}
    double paperD = 0.0;       // C_{r,d} (d mu + k), the paper's D^(k)
};

inline AlmostBalancedReport almost_balanced_report(const Matrix& gram, int rE, int d,
                                                   double muE, int k) {
    AlmostBalancedReport rep;
    rep.k = k;
    rep.gram = gram;
    const int N = static_cast<int>(gram.rows());
    rep.D = std::real(gram.trace()) / N;
    rep.M = gram - rep.D * Matrix::Identity(N, N);
    rep.opNormM = hermitian_op_norm(rep.M);
    rep.Dnormalized = rep.D / (d * muE + k);
    rep.cTarget = c_constant_closed_form(rE, d);
    rep.paperD = rep.cTarget * (d * muE + k);
    return rep;
}

// ---------------------------------------------------------------------------
// Decay probe
// ---------------------------------------------------------------------------

struct DecayProbeRow {
    int k = 0;
    int N = 0;
    double D = 0.0;
    double Dnorm = 0.0;
    double opNormM = 0.0;
    double ratio = 0.0;  // opNormM / D
    double slope = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
};

struct DecayProbeReport {
    std::vector<DecayProbeRow> rows;
    bool topHalfStrictlyDecreasing = false;
    double topWindowSlope = std::numeric_limits<double>::quiet_NaN();
    double cTarget = 0.0;
};

/// Full pipeline for one k: balance Sym^d E (x) L^k on the base, project the
/// balanced metric to P(E*), integrate the hat-Gram of the L^2-orthonormal
/// basis, and report the trace-free defect.
inline DecayProbeRow decay_probe_row(const Model& sym, int fiberLevel,
                                     const BalanceOptions& bopts,
                                     VolumeMode mode = VolumeMode::Product) {
    DecayProbeRow row;
    row.k = sym.spec.k;
    row.N = sym.sample.N;
    const BalanceResult bal = balance_model(sym, bopts);
    row.converged = bal.report.converged;
    if (!row.converged) return row;

    const RuledMesh ruled = build_ruled_mesh(sym, fiberLevel);
    const SymClosure closure = fs_closure(sym, bal.gram);
    PeGramOptions opts;
    opts.mode = mode;
    Matrix raw = pe_gram(sym, closure, ruled, opts);
    const Matrix C = orthonormalizer(l2_gram(sym.sample, bal.metric, sym.mesh));
    Matrix gram = congruence_entries(raw, C);

    const int rE = ruled.rE;
    const double muE = sym.slope / sym.sample.d;  // sym slope carries d mu
    auto rep = almost_balanced_report(gram, rE, sym.sample.d, muE, sym.spec.k);
    row.D = rep.D;
    row.Dnorm = rep.Dnormalized;
    row.opNormM = rep.opNormM;
    row.ratio = rep.opNormM / rep.D;
    return row;
}

inline DecayProbeReport decay_probe(const std::function<Model(int)>& makeSymModel,
                                    const std::vector<int>& kRange, int fiberLevel,
                                    const BalanceOptions& bopts = {},
                                    VolumeMode mode = VolumeMode::Product, int window = 4) {
    DecayProbeReport rep;
    std::vector<double> ks, ratios;
    for (int k : kRange) {
        const Model sym = makeSymModel(k);
        DecayProbeRow row = decay_probe_row(sym, fiberLevel, bopts, mode);
        if (rep.cTarget == 0.0)
            rep.cTarget = c_constant_closed_form(
                sym.spec.kind == ModelKind::P1Split ? static_cast<int>(sym.spec.degrees.size())
                                                    : 1,
                sym.sample.d);
        rep.rows.push_back(row);
        if (row.converged) {
            ks.push_back(k);
            ratios.push_back(row.ratio);
        }
    }
    const auto slopes = sliding_log_slopes(ks, ratios, window);
    for (size_t i = 0, j = 0; i < rep.rows.size(); ++i)
        if (rep.rows[i].converged) rep.rows[i].slope = slopes[j++];

    const size_t half = ratios.size() / 2;
    rep.topHalfStrictlyDecreasing = ratios.size() >= 2;
    for (size_t i = std::max<size_t>(half, 1); i < ratios.size(); ++i)
        rep.topHalfStrictlyDecreasing &= ratios[i] < ratios[i - 1];
    if (!slopes.empty()) rep.topWindowSlope = slopes.back();
    return rep;
}

// ---------------------------------------------------------------------------
// Direct balancing on P(E*)
// ---------------------------------------------------------------------------

/// Combined-node section sample and mesh with the frozen product volume
/// omega_k^r/r!; feeding these to the generic engine is exactly the T-map of
/// the polarized manifold (P(E*), O(d) (x) L^k).
struct FlattenedPe {
    SectionSample sample;
    BaseMesh mesh;
};

inline FlattenedPe flatten_pe(const Model& sym, const RuledMesh& ruled) {
    const int d = sym.sample.d;
    const auto basisD = orthonormal_sym_basis(ruled.rE, d);
    const double volumeFactor =
        dmu_plus_k(sym) * std::pow(static_cast<double>(d), ruled.rE - 1);
    FlattenedPe flat;
    flat.sample.bundleTag = "O(d)(x)L^k";
    flat.sample.N = sym.sample.N;
    flat.sample.k = sym.spec.k;
    flat.sample.d = d;
    flat.sample.fiberRank = 1;
    const int F = ruled.fiberRule.count();
    flat.sample.values.reserve(static_cast<size_t>(ruled.base.size()) * F);
    std::vector<double> w;
    for (int p = 0; p < ruled.base.size(); ++p) {
        const Matrix mono = fiber_monomials(ruled, basisD, p);
        const Matrix V = mono * sym.sample.values[p];
        for (int q = 0; q < F; ++q) {
            flat.sample.values.push_back(V.row(q));
            flat.mesh.points.push_back(ruled.base.points[p]);
            w.push_back(ruled.base.weights(p) * ruled.fiberRule.weights(q) * volumeFactor);
        }
    }
    flat.mesh.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    flat.mesh.totalVolume = flat.mesh.weights.sum();
    return flat;
}

struct PeBalanceResult {
    GramMatrix gram;
    MetricField metric;  // scalar weights of O(d) (x) L^k at combined nodes
    BalanceReport report;
    double volumeMassDrift = 0.0;  // induced mode: last relative weight update
};

/// Direct T-map balancing of the hat-sections. The start is the hat-Gram of
/// the supplied closure (by default the projectivized almost-balanced
/// metric, following the paper's perturbation step). In Induced mode the
/// node volume is recomputed from the current metric after each frozen
/// solve until the volume stabilizes.
inline PeBalanceResult pe_balance_iterate(const Model& sym, const RuledMesh& ruled,
                                          const SymClosure& startClosure,
                                          const BalanceOptions& optsIn = {},
                                          VolumeMode mode = VolumeMode::Product,
                                          int volumeOuterIters = 4,
                                          double volumeTol = 1e-8) {
    FlattenedPe flat = flatten_pe(sym, ruled);
    BalanceOptions opts = optsIn;
    PeGramOptions gopts;
    gopts.mode = VolumeMode::Product;
    opts.start = pe_gram(sym, startClosure, ruled, gopts);

    auto res = balance_iterate(flat.sample, flat.mesh, opts);
    double drift = 0.0;
    if (mode == VolumeMode::Induced) {
        const int d = sym.sample.d;
        const auto basisD = orthonormal_sym_basis(ruled.rE, d);
        const auto basisE = orthonormal_sym_basis(ruled.rE, 1);
        const int F = ruled.fiberRule.count();
        for (int outer = 0; outer < volumeOuterIters; ++outer) {
            const SymClosure cur = fs_closure(sym, res.gram);
            Eigen::VectorXd w(flat.mesh.weights.size());
            for (int p = 0; p < ruled.base.size(); ++p)
                for (int q = 0; q < F; ++q)
                    w(static_cast<Eigen::Index>(p) * F + q) =
                        ruled.base.weights(p) * ruled.fiberRule.weights(q) *
                        induced_density_ratio(ruled, cur, basisD, basisE, p, q);
            drift = (w - flat.mesh.weights).cwiseAbs().maxCoeff() /
                    flat.mesh.weights.cwiseAbs().maxCoeff();
            flat.mesh.weights = w;
            flat.mesh.totalVolume = w.sum();
            opts.start = res.gram.entries();
            res = balance_iterate(flat.sample, flat.mesh, opts);
            if (drift < volumeTol) break;
        }
    }
    PeBalanceResult out{std::move(res.gram), std::move(res.metric), std::move(res.report),
                        drift};
    return out;
}

}  // namespace balmet

#endif  // BALMET_RULED_HPP
