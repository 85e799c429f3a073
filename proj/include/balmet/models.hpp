// Desk-scale model geometries with every theorem input in closed form:
// split bundles over P^1 with Fubini-Study data, and theta-function line
// bundles over flat tori. Generators produce the base quadrature mesh, the
// global-section samples in per-chart frames, the Hermitian-Einstein
// reference metric field, and closed-form Gram oracles for contract checks.
//
// Base Kahler forms follow the library's half convention:
//   P^1:   omega = dx dy / (1+|z|^2)^2, total volume pi.
//   torus: omega = dx dy on the fundamental domain, total volume Im(tau).
// With this normalization the Hermitian-Einstein identity iF(h_inf) =
// mu * omega holds with mu equal to the usual slope for P^1 splits (and
// mu = 0 for the trivial factor of the torus model).

#ifndef BALMET_MODELS_HPP
#define BALMET_MODELS_HPP

#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "balmet/fiber.hpp"
#include "balmet/herm.hpp"

namespace balmet {

enum class ModelKind { P1Split, TorusLine };

struct ModelSpec {
    ModelKind kind = ModelKind::P1Split;
    std::vector<int> degrees;  // p1-split summand degrees (a_1..a_r)
    Complex tau{0.0, 1.0};     // torus modulus, Im tau > 0
    int d0 = 1;                // torus: degree of L
    int k = 0;                 // twist
    int meshSize = 0;          // radial nodes (P^1) / grid side (torus); 0 = auto
};

struct MeshPoint {
    int chart = 0;  // P^1: 0 = z-chart, 1 = w = 1/z chart. Torus: always 0.
    Complex z;
};

struct BaseMesh {
    std::vector<MeshPoint> points;
    Eigen::VectorXd weights;
    double totalVolume = 0.0;

    int size() const { return static_cast<int>(points.size()); }
};

struct SectionSample {
    std::string bundleTag;
    int N = 0;
    int k = 0;
    int d = 1;
    int fiberRank = 1;
    std::vector<Matrix> values;  // per mesh point: fiberRank x N in the local frame
};

/// Pointwise Hermitian metrics in the local frames, standard form
/// (<u,v> = v^H M u); one fiberRank x fiberRank matrix per mesh point.
using MetricField = std::vector<Matrix>;

/// A generated geometry: mesh, sections, reference metric, and closed-form
/// evaluators at arbitrary chart points (used for finite-difference
/// curvature and for the ruled-manifold quadrature).
struct Model {
    ModelSpec spec;
    int fiberRank = 1;
    double slope = 0.0;             // mu in iF(h_inf) = mu * omega
    bool hermitianEinstein = true;  // whether that identity holds exactly
    BaseMesh mesh;
    SectionSample sample;
    MetricField referenceField;  // (h_inf (x) g^k) at mesh points

    std::vector<int> symDegrees;  // split models: per-summand degree <a, I>

    std::function<double(int, Complex)> gWeight;      // weight of the L-frame
    std::function<double(int, Complex)> gkWeight;     // weight of the L^k-frame
    std::function<Matrix(int, Complex)> fiberMetric;  // h_inf std-form, no twist
    std::function<Matrix(int, Complex)> sections;     // fiberRank x N values
    std::function<double(int, Complex)> omegaDensity;  // base form wrt dx dy

    Matrix reference_at(int chart, Complex z) const {
        return fiberMetric(chart, z) * gkWeight(chart, z);
    }
};

// ---------------------------------------------------------------------------
// Closed-form oracles
// ---------------------------------------------------------------------------

/// L^2(FS) Gram of the monomial basis of H^0(P^1, O(m)) against the
/// volume-pi Fubini-Study form: diagonal with entries pi j!(m-j)!/(m+1)!.
inline Eigen::VectorXd beta_gram_diagonal(int m) {
    Eigen::VectorXd g(m + 1);
    for (int j = 0; j <= m; ++j)
        g(j) = std::numbers::pi * factorial(j) * factorial(m - j) / factorial(m + 1);
    return g;
}

/// ||theta_j||^2 under the Gaussian weight metric: sqrt(Im tau / (2m)),
/// independent of the characteristic j.
inline double theta_norm_sq(double tau2, int m) { return std::sqrt(tau2 / (2.0 * m)); }

inline int riemann_roch_p1(const std::vector<int>& degrees, int k) {
    int n = 0;
    for (int a : degrees) n += a + k + 1;
    return n;
}

// ---------------------------------------------------------------------------
// P^1 split bundles
// ---------------------------------------------------------------------------

namespace model_detail {

/// Chart handling: coordinate of the point in its own chart, and the value
/// of the degree-m monomial z^j expressed in that chart's frame.
inline Complex p1_monomial(int chart, Complex zc, int m, int j) {
    Complex v = 1.0;
    const int e = (chart == 0) ? j : m - j;
    for (int c = 0; c < e; ++c) v *= zc;
    return v;
}

}  // namespace model_detail

/// Minimal radial node count for exact monomial Grams of O(m) sections.
inline int p1_required_mesh(int maxDegree) { return (maxDegree + 2) / 2 + 1; }

inline Model gen_p1_bundle(const ModelSpec& spec) {
    if (spec.kind != ModelKind::P1Split)
        throw std::invalid_argument("gen_p1_bundle: spec.kind must be p1-split");
    if (spec.degrees.empty()) throw std::invalid_argument("gen_p1_bundle: empty degree list");
    if (spec.k < 0) throw std::invalid_argument("gen_p1_bundle: k must be >= 0");
    const int r = static_cast<int>(spec.degrees.size());
    int mMax = 0;
    for (int a : spec.degrees) {
        if (a + spec.k < 0) throw std::invalid_argument("gen_p1_bundle: negative twist degree");
        mMax = std::max(mMax, a + spec.k);
    }

    const int required = p1_required_mesh(mMax);
    int nu = spec.meshSize > 0 ? spec.meshSize : std::max(2 * required, 24);
    if (nu < required)
        throw std::invalid_argument("gen_p1_bundle: meshSize too small for the degree contract, need >= " +
                                    std::to_string(required));
    const int ntheta = 2 * nu;

    Model model;
    model.spec = spec;
    model.fiberRank = r;
    double mu = 0.0;
    for (int a : spec.degrees) mu += a;
    mu /= r;
    model.slope = mu;
    model.hermitianEinstein = true;
    for (int a : spec.degrees) model.hermitianEinstein &= (a == spec.degrees[0]);

    // Radial Gauss-Legendre in u = t/(1+t), uniform angles; weight pi*w_u/ntheta.
    GaussRule01 gl = gauss_jacobi01(nu, 0);
    BaseMesh& mesh = model.mesh;
    mesh.points.reserve(static_cast<size_t>(nu) * ntheta);
    std::vector<double> w;
    for (int q = 0; q < nu; ++q) {
        const double t = gl.nodes(q) / (1.0 - gl.nodes(q));
        const double rho = std::sqrt(t);
        for (int j = 0; j < ntheta; ++j) {
            const double th = 2.0 * std::numbers::pi * (j + 0.5) / ntheta;
            const Complex z = rho * Complex(std::cos(th), std::sin(th));
            MeshPoint p;
            if (std::abs(z) <= 1.0) {
                p.chart = 0;
                p.z = z;
            } else {
                p.chart = 1;
                p.z = 1.0 / z;
            }
            mesh.points.push_back(p);
            w.push_back(std::numbers::pi * gl.weights(q) / ntheta);
        }
    }
    mesh.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    mesh.totalVolume = mesh.weights.sum();

    const std::vector<int> degrees = spec.degrees;
    const int k = spec.k;
    model.gWeight = [](int, Complex zc) { return 1.0 / (1.0 + std::norm(zc)); };
    model.gkWeight = [k](int, Complex zc) { return std::pow(1.0 + std::norm(zc), -k); };
    model.fiberMetric = [degrees, r](int, Complex zc) {
        Matrix M = Matrix::Zero(r, r);
        for (int i = 0; i < r; ++i) M(i, i) = std::pow(1.0 + std::norm(zc), -degrees[i]);
        return M;
    };
    model.omegaDensity = [](int, Complex zc) {
        const double q = 1.0 + std::norm(zc);
        return 1.0 / (q * q);
    };

    const int N = riemann_roch_p1(degrees, k);
    model.sections = [degrees, k, r, N](int chart, Complex zc) {
        Matrix S = Matrix::Zero(r, N);
        int col = 0;
        for (int i = 0; i < r; ++i) {
            const int m = degrees[i] + k;
            for (int j = 0; j <= m; ++j)
                S(i, col++) = model_detail::p1_monomial(chart, zc, m, j);
        }
        return S;
    };

    model.sample.bundleTag = "E(x)L^k";
    model.sample.N = N;
    model.sample.k = k;
    model.sample.d = 1;
    model.sample.fiberRank = r;
    model.sample.values.reserve(mesh.points.size());
    model.referenceField.reserve(mesh.points.size());
    for (const auto& p : mesh.points) {
        model.sample.values.push_back(model.sections(p.chart, p.z));
        model.referenceField.push_back(model.reference_at(p.chart, p.z));
    }
    model.symDegrees = degrees;
    return model;
}

// ---------------------------------------------------------------------------
// Theta-function line bundles on flat tori
// ---------------------------------------------------------------------------

/// theta_j(z) = sum_n exp(pi i m tau (n + j/m)^2 + 2 pi i m (n + j/m) z),
/// the level-m basis section with characteristic j/m. Gaussian truncation to
/// relative 1e-16; throws if the term budget cannot reach that.
inline Complex theta_section(Complex tau, int m, int j, Complex z) {
    const double tau2 = tau.imag();
    const double c = static_cast<double>(j) / m;
    // Terms peak near n* = -c - y/tau2; the band below keeps the neglected
    // tail under 1e-16 of the peak term.
    const double y = z.imag();
    const double center = -c - y / tau2;
    const int band = static_cast<int>(std::ceil(std::sqrt(42.0 / (std::numbers::pi * m * tau2)))) + 3;
    if (band > 400) throw std::runtime_error("theta_section: truncation budget exceeded");
    const int n0 = static_cast<int>(std::floor(center));
    const Complex ipi(0.0, std::numbers::pi);
    Complex acc = 0.0;
    for (int n = n0 - band; n <= n0 + band; ++n) {
        const double q = n + c;
        acc += std::exp(ipi * (tau * (m * q * q)) + 2.0 * ipi * (m * q) * z);
    }
    return acc;
}

inline Model gen_torus_line(const ModelSpec& spec) {
    if (spec.kind != ModelKind::TorusLine)
        throw std::invalid_argument("gen_torus_line: spec.kind must be torus-line");
    if (spec.tau.imag() <= 0.0) throw std::invalid_argument("gen_torus_line: need Im tau > 0");
    const int m = spec.k * spec.d0;
    if (m < 1) throw std::invalid_argument("gen_torus_line: need k*d0 >= 1");

    Model model;
    model.spec = spec;
    model.fiberRank = 1;
    model.slope = 0.0;  // trivial E factor; the twist lives entirely in L^k
    model.hermitianEinstein = true;

    const Complex tau = spec.tau;
    const double tau2 = tau.imag();
    const int n = spec.meshSize > 0 ? spec.meshSize
                                    : std::max(48, static_cast<int>(std::ceil(
                                                       10.0 * std::sqrt(m / tau2))));

    BaseMesh& mesh = model.mesh;
    mesh.points.reserve(static_cast<size_t>(n) * n);
    mesh.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n) * n, tau2 / (n * n));
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            MeshPoint pt;
            pt.chart = 0;
            pt.z = (p + 0.5) / n + tau * ((q + 0.5) / n);
            mesh.points.push_back(pt);
        }
    mesh.totalVolume = mesh.weights.sum();

    const int d0 = spec.d0, k = spec.k;
    model.gWeight = [tau2, d0](int, Complex z) {
        const double y = z.imag();
        return std::exp(-2.0 * std::numbers::pi * d0 * y * y / tau2);
    };
    model.gkWeight = [tau2, m](int, Complex z) {
        const double y = z.imag();
        return std::exp(-2.0 * std::numbers::pi * m * y * y / tau2);
    };
    model.fiberMetric = [](int, Complex) { return Matrix::Ones(1, 1); };
    model.omegaDensity = [](int, Complex) { return 1.0; };
    model.sections = [tau, m](int, Complex z) {
        Matrix S(1, m);
        for (int j = 0; j < m; ++j) S(0, j) = theta_section(tau, m, j, z);
        return S;
    };

    model.sample.bundleTag = "L^k";
    model.sample.N = m;
    model.sample.k = k;
    model.sample.d = 1;
    model.sample.fiberRank = 1;
    model.sample.values.reserve(mesh.points.size());
    model.referenceField.reserve(mesh.points.size());
    for (const auto& p : mesh.points) {
        model.sample.values.push_back(model.sections(p.chart, p.z));
        model.referenceField.push_back(model.reference_at(p.chart, p.z));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Symmetric powers of split bundles
// ---------------------------------------------------------------------------

/// Sections and reference data for Sym^d E (x) L^k of a p1-split model:
/// Sym^d(+O(a_i)) = +_I O(<a,I>) over degree-d multi-indices, monomial
/// sections per summand, values in the Sym^d monomial frame.
inline Model sym_sections(const Model& p1, int d) {
    if (p1.spec.kind != ModelKind::P1Split)
        throw std::invalid_argument("sym_sections: input must be a p1-split model");
    if (d < 1) throw std::invalid_argument("sym_sections: d must be >= 1");
    if (d == 1) return p1;

    const auto basis = orthonormal_sym_basis(static_cast<int>(p1.spec.degrees.size()), d);
    const int R = basis.rank();
    const std::vector<int> a = p1.spec.degrees;
    const int k = p1.spec.k;

    std::vector<int> symDeg(R);
    int N = 0, mMax = 0;
    for (int i = 0; i < R; ++i) {
        int deg = 0;
        for (int alpha = 0; alpha < basis.r; ++alpha) deg += a[alpha] * basis.indices[i][alpha];
        symDeg[i] = deg;
        N += deg + k + 1;
        mMax = std::max(mMax, deg + k);
    }
    const int required = p1_required_mesh(mMax);
    Model model = p1;  // reuse the mesh, spec and L-weights
    // The rank-1 mesh (nu radial x 2 nu angular nodes) must still satisfy the
    // degree contract for the larger Sym^d summand degrees.
    {
        const int P = static_cast<int>(p1.mesh.points.size());
        int nuActual = static_cast<int>(std::round(std::sqrt(P / 2.0)));
        if (2 * nuActual * nuActual != P) nuActual = P;  // irregular custom mesh: skip check
        if (nuActual < required)
            throw std::invalid_argument(
                "sym_sections: base meshSize too small for Sym^d degree contract, need >= " +
                std::to_string(required));
    }

    model.fiberRank = R;
    model.slope = d * p1.slope;  // iF(Sym^d h) = d mu omega on each summand of equal-split
    model.symDegrees = symDeg;

    model.fiberMetric = [a, d, R](int chart, Complex zc) {
        Matrix h = Matrix::Zero(static_cast<int>(a.size()), static_cast<int>(a.size()));
        for (size_t i = 0; i < a.size(); ++i) h(i, i) = std::pow(1.0 + std::norm(zc), -a[i]);
        (void)chart;
        return sym_power_gram(h, d);
    };
    model.sections = [basis, symDeg, k, R, N](int chart, Complex zc) {
        Matrix S = Matrix::Zero(R, N);
        int col = 0;
        for (int i = 0; i < R; ++i) {
            const int m = symDeg[i] + k;
            for (int j = 0; j <= m; ++j)
                S(i, col++) = model_detail::p1_monomial(chart, zc, m, j);
        }
        return S;
    };

    model.sample.bundleTag = "Sym^d E(x)L^k";
    model.sample.N = N;
    model.sample.d = d;
    model.sample.fiberRank = R;
    model.sample.values.clear();
    model.referenceField.clear();
    for (const auto& p : model.mesh.points) {
        model.sample.values.push_back(model.sections(p.chart, p.z));
        model.referenceField.push_back(model.reference_at(p.chart, p.z));
    }
    return model;
}

}  // namespace balmet

#endif  // BALMET_MODELS_HPP
