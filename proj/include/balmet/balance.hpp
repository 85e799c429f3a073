// Bergman kernels, L^2 structures, the Donaldson T-map on Gram matrices, and
// fixed-point iteration to balanced metrics, plus probes of the asymptotic
// statements (Bergman expansion, balanced -> Hermitian-Einstein convergence).
//
// Gram convention: entries G(i,j) = <s_i, s_j>, conjugate-linear in the
// second slot. Wherever a Gram is sandwiched between section-value matrices
// the standard form conj(G) is used, which is what makes T-map fixed points
// coincide with the balanced condition (and the Bergman kernel equal to the
// scalar N/(R V) there).
//
// The T-map is 1-homogeneous, so the iteration cannot attract the overall
// scale; balance_iterate renormalizes tr(G) = R V each step, the trace of
// the Gram of a balanced frame.

#ifndef BALMET_BALANCE_HPP
#define BALMET_BALANCE_HPP

#include <chrono>
#include <functional>
#include <optional>

#include "balmet/fit.hpp"
#include "balmet/models.hpp"

namespace balmet {

// ---------------------------------------------------------------------------
// Gram matrices
// ---------------------------------------------------------------------------

class GramMatrix {
public:
    explicit GramMatrix(Matrix entries) : entries_(std::move(entries)) {
        if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
            throw std::invalid_argument("GramMatrix: must be square and nonempty");
        const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
        if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > 1e-13 * scale)
            throw std::invalid_argument("GramMatrix: not Hermitian");
        entries_ = 0.5 * (entries_ + entries_.adjoint().eval());
    }

    int N() const { return static_cast<int>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    Matrix std_form() const { return entries_.conjugate(); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

private:
    Matrix entries_;
};

// ---------------------------------------------------------------------------
// L^2 Gram
// ---------------------------------------------------------------------------

/// G(i,j) = sum_p w_p s_j(p)^H H(p) s_i(p): the L^2 Gram of the sections
/// against the pointwise metric field and the mesh measure.
inline GramMatrix l2_gram(const SectionSample& sample, const MetricField& field,
                          const BaseMesh& mesh) {
    const int P = mesh.size();
    if (static_cast<int>(sample.values.size()) != P ||
        static_cast<int>(field.size()) != P)
        throw std::invalid_argument("l2_gram: sample/field/mesh are not aligned");
    const int N = sample.N;
    Matrix M = Matrix::Zero(N, N);  // standard form
    for (int p = 0; p < P; ++p) {
        Eigen::LLT<Matrix> llt(field[p]);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("l2_gram: singular metric at point " + std::to_string(p));
        M.noalias() += mesh.weights(p) *
                       (sample.values[p].adjoint() * field[p] * sample.values[p]);
    }
    return GramMatrix(M.conjugate());
}

// ---------------------------------------------------------------------------
// Bergman kernel
// ---------------------------------------------------------------------------

/// Pointwise Bergman endomorphism expressed in an H-orthonormal frame, so
/// each B(p) is Hermitian PSD: B(p) = H^{1/2} S M^{-1} S^H H^{1/2} with M the
/// standard-form L^2 Gram. Basis-independent; sum_p w_p tr B(p) = N.
struct BergmanField {
    std::vector<Matrix> B;
    double traceIntegral = 0.0;
};

inline BergmanField bergman_kernel(const SectionSample& sample, const MetricField& field,
                                   const BaseMesh& mesh) {
    const GramMatrix G = l2_gram(sample, field, mesh);
    const Matrix M = G.std_form();
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (lo <= 1e-13 * hi) throw std::runtime_error("bergman_kernel: rank-deficient Gram");
    Eigen::LLT<Matrix> llt(M);

    BergmanField out;
    out.B.reserve(mesh.size());
    for (int p = 0; p < mesh.size(); ++p) {
        const Matrix& S = sample.values[p];
        const Matrix X = llt.solve(S.adjoint());  // M^{-1} S^H
        const Matrix core = S * X;                // S M^{-1} S^H, Hermitian PSD
        const Matrix hhalf = hermitian_power(field[p], 0.5).value;
        Matrix B = hhalf * core * hhalf;
        B = 0.5 * (B + B.adjoint().eval());
        out.traceIntegral += mesh.weights(p) * std::real(B.trace());
        out.B.push_back(std::move(B));
    }
    return out;
}

/// sup_p || B(p) - c I ||_op, the balanced-condition residual at c = N/(R V).
inline double bergman_residual(const BergmanField& bf, double c) {
    double worst = 0.0;
    for (const auto& B : bf.B) {
        Matrix D = B - c * Matrix::Identity(B.rows(), B.cols());
        worst = std::max(worst, hermitian_op_norm(D));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Fubini-Study metric from a Gram matrix, and the T-map
// ---------------------------------------------------------------------------

/// Pullback metric of the embedding attached to G: at each point
/// H_G(p) = Q(p)^{-1} with Q(p) = S(p) conj(G)^{-1} S(p)^H. Invariant under
/// (s, G) -> (A s, A G A^H).
inline MetricField fs_metric_from_gram(const GramMatrix& G, const SectionSample& sample,
                                       const BaseMesh& mesh) {
    if (G.N() != sample.N) throw std::invalid_argument("fs_metric_from_gram: size mismatch");
    Eigen::LLT<Matrix> llt(G.std_form());
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("fs_metric_from_gram: Gram is not positive definite");
    MetricField field;
    field.reserve(mesh.size());
    for (int p = 0; p < mesh.size(); ++p) {
        const Matrix& S = sample.values[p];
        const Matrix Q = S * llt.solve(S.adjoint());
        Eigen::LLT<Matrix> qllt(Q);
        if (qllt.info() != Eigen::Success)
            throw std::runtime_error("fs_metric_from_gram: base point at mesh index " +
                                     std::to_string(p));
        Matrix H = qllt.solve(Matrix::Identity(Q.rows(), Q.cols()));
        field.push_back(0.5 * (H + H.adjoint().eval()));
    }
    return field;
}

/// One step of the Donaldson iteration: G' = (N/(R V)) x L^2 Gram under the
/// Fubini-Study metric of G. Fixed points are the balanced Grams
/// (integral Gram = (R V / N) G, the constant of Definition 1n).
inline GramMatrix t_map(const GramMatrix& G, const SectionSample& sample, const BaseMesh& mesh) {
    const double c = sample.N / (sample.fiberRank * mesh.totalVolume);
    const GramMatrix next = l2_gram(sample, fs_metric_from_gram(G, sample, mesh), mesh);
    return GramMatrix(c * next.entries());
}

// ---------------------------------------------------------------------------
// Fixed-point iteration
// ---------------------------------------------------------------------------

struct BalanceOptions {
    double tol = 1e-10;
    int maxIter = 500;
    double damping = 0.0;  // G <- (1-a) G + a T(G); 0 = plain T-map
    std::optional<Matrix> start;  // Gram entries; default: identity
    // Invoked from the iteration thread after each residual evaluation.
    std::function<void(int iteration, double residual)> progress;
};

struct BalanceReport {
    int iterations = 0;
    std::vector<double> residualHistory;
    bool converged = false;
    double wallTimeSeconds = 0.0;
    double gramConditionNumber = 1.0;
    double balancedConstant = 0.0;  // N / (R V)
};

struct BalanceResult {
    GramMatrix gram;
    MetricField metric;
    BalanceReport report;
};

inline BalanceResult balance_iterate(const SectionSample& sample, const BaseMesh& mesh,
                                     const BalanceOptions& opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double RV = sample.fiberRank * mesh.totalVolume;
    const double c = sample.N / RV;

    Matrix g = opts.start ? *opts.start : Matrix::Identity(sample.N, sample.N);
    g *= RV / std::real(g.trace());
    GramMatrix G(g);

    BalanceReport rep;
    rep.balancedConstant = c;
    MetricField field = fs_metric_from_gram(G, sample, mesh);
    while (true) {
        const BergmanField bf = bergman_kernel(sample, field, mesh);
        const double res = bergman_residual(bf, c);
        rep.residualHistory.push_back(res);
        if (opts.progress) opts.progress(rep.iterations, res);
        if (res <= opts.tol) {
            rep.converged = true;
            break;
        }
        if (rep.iterations >= opts.maxIter) break;
        ++rep.iterations;
        GramMatrix next = t_map(G, sample, mesh);
        Matrix e = opts.damping > 0.0
                       ? ((1.0 - opts.damping) * G.entries() + opts.damping * next.entries())
                       : next.entries();
        e *= RV / std::real(e.trace());
        G = GramMatrix(std::move(e));
        field = fs_metric_from_gram(G, sample, mesh);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(G.std_form(), Eigen::EigenvaluesOnly);
    rep.gramConditionNumber = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    rep.wallTimeSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return BalanceResult{std::move(G), std::move(field), std::move(rep)};
}

/// Rerun-friendly wrapper: start from the reference metric's Gram, the
/// canonical start for model geometries.
inline BalanceResult balance_model(const Model& model, const BalanceOptions& optsIn = {}) {
    BalanceOptions opts = optsIn;
    if (!opts.start)
        opts.start = l2_gram(model.sample, model.referenceField, model.mesh).entries();
    return balance_iterate(model.sample, model.mesh, opts);
}

// ---------------------------------------------------------------------------
// Bergman expansion probe (flat models)
// ---------------------------------------------------------------------------

struct ExpansionRow {
    int k = 0;
    double spatialConstancy = 0.0;  // max_p ||B(p) - Bbar|| / ||Bbar||
    double meanDensity = 0.0;       // tr(Bbar)/R
    double traceIntegral = 0.0;     // sum_p w_p tr B(p), equals N
};

struct ExpansionReport {
    std::vector<ExpansionRow> rows;
    double leadingCoefficient = 0.0;  // fit meanDensity ~ c1 k + c0 (n = 1)
    double subleading = 0.0;          // c0, the fitted A_1
    double fitMaxResidual = 0.0;
};

/// Bergman kernel of the reference metric h_inf (x) g^k across a k-range on a
/// constant-curvature model; reports spatial constancy and the two-term
/// expansion fit in k.
inline ExpansionReport bergman_expansion_probe(
    const std::function<Model(int)>& makeModel, const std::vector<int>& kRange) {
    if (kRange.size() < 2)
        throw std::invalid_argument("bergman_expansion_probe: kRange too short for a 2-parameter fit");
    ExpansionReport rep;
    std::vector<double> ks, dens;
    for (int k : kRange) {
        const Model model = makeModel(k);
        if (!model.hermitianEinstein)
            throw std::invalid_argument("bergman_expansion_probe: needs a constant-curvature model");
        const BergmanField bf = bergman_kernel(model.sample, model.referenceField, model.mesh);
        const int r = model.fiberRank;
        Matrix mean = Matrix::Zero(r, r);
        for (int p = 0; p < model.mesh.size(); ++p)
            mean += model.mesh.weights(p) * bf.B[p];
        mean /= model.mesh.totalVolume;
        const double meanNorm = hermitian_op_norm(mean);
        double worst = 0.0;
        for (const auto& B : bf.B) worst = std::max(worst, hermitian_op_norm(B - mean));
        ExpansionRow row;
        row.k = k;
        row.spatialConstancy = worst / meanNorm;
        row.meanDensity = std::real(mean.trace()) / r;
        row.traceIntegral = bf.traceIntegral;
        rep.rows.push_back(row);
        ks.push_back(k);
        dens.push_back(row.meanDensity);
    }
    const LineFit fit = fit_line(ks, dens);
    rep.leadingCoefficient = fit.slope;
    rep.subleading = fit.intercept;
    rep.fitMaxResidual = fit.maxResidual;
    return rep;
}

// ---------------------------------------------------------------------------
// Convergence-rate probe: balanced metrics against h_inf
// ---------------------------------------------------------------------------

struct DecayRow {
    int k = 0;
    double delta = 0.0;  // scale-free sup distance of h_k to h_inf
    bool converged = false;
    int iterations = 0;
};

struct ConvergenceReport {
    std::vector<DecayRow> rows;
    std::vector<double> slopes;  // sliding log-log slopes of delta vs k
    bool monotone = false;
};

/// delta_k = sup-distance over the mesh between the balanced metric twisted
/// back by g^{-k} and h_inf, minimized over one global scale (the balanced
/// metric is only pinned up to scale). Theorems predict super-polynomial
/// decay: log-log slopes heading to -infinity.
inline ConvergenceReport convergence_rate_probe(const std::function<Model(int)>& makeModel,
                                                const std::vector<int>& kRange,
                                                double tol = 1e-12, int maxIter = 2000,
                                                int window = 4) {
    ConvergenceReport rep;
    std::vector<double> ks, deltas;
    for (int k : kRange) {
        const Model model = makeModel(k);
        BalanceOptions opts;
        opts.tol = tol;
        opts.maxIter = maxIter;
        const BalanceResult res = balance_model(model, opts);

        // Global eigenvalue range of h_inf^{-1/2} h_k h_inf^{-1/2}.
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int p = 0; p < model.mesh.size(); ++p) {
            const auto& pt = model.mesh.points[p];
            const Matrix hinf = model.fiberMetric(pt.chart, pt.z);
            const Matrix hk = res.metric[p] / model.gkWeight(pt.chart, pt.z);
            const Matrix s = hermitian_power(hinf, -0.5).value;
            Eigen::SelfAdjointEigenSolver<Matrix> es(s * hk * s, Eigen::EigenvaluesOnly);
            lo = std::min(lo, es.eigenvalues().minCoeff());
            hi = std::max(hi, es.eigenvalues().maxCoeff());
        }
        DecayRow row;
        row.k = k;
        row.delta = (hi - lo) / (hi + lo);
        row.converged = res.report.converged;
        row.iterations = res.report.iterations;
        rep.rows.push_back(row);
        ks.push_back(k);
        deltas.push_back(row.delta);
    }
    rep.slopes = sliding_log_slopes(ks, deltas, window);
    rep.monotone = true;
    for (size_t i = 0; i + 1 < rep.rows.size(); ++i)
        rep.monotone &= rep.rows[i + 1].converged && rep.rows[i].converged &&
                        rep.rows[i + 1].delta < rep.rows[i].delta;
    return rep;
}

}  // namespace balmet

#endif  // BALMET_BALANCE_HPP
