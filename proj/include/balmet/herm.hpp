// Hermitian inner products on finite-dimensional complex vector spaces and
// their symmetric tensor powers.
//
// Conventions used throughout the library:
//   * Inner products are conjugate-linear in the SECOND argument.
//   * A HermMetric stores the Gram matrix G with G(i,j) = <e_i, e_j>.
//   * For coefficient column vectors the same pairing reads
//       <u, v> = v^H * M * u   with   M = conj(G)
//     ("standard form"). std_form() returns M; norms and solves below use it.

#ifndef BALMET_HERM_HPP
#define BALMET_HERM_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace balmet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Multi-indices and the monomial basis of Sym^d V
// ---------------------------------------------------------------------------

/// Exponent vector (i_1,...,i_r) of a degree-d monomial e_1^{i_1}...e_r^{i_r}.
struct MultiIndex {
    std::vector<int> parts;

    int degree() const { return std::accumulate(parts.begin(), parts.end(), 0); }
    int size() const { return static_cast<int>(parts.size()); }
    int operator[](int a) const { return parts[a]; }

    bool operator==(const MultiIndex& o) const { return parts == o.parts; }
};

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Exact binomial for the small arguments used here.
inline long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long long b = 1;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

/// i_1! i_2! ... i_r!
inline double multi_factorial(const MultiIndex& I) {
    double f = 1.0;
    for (int p : I.parts) f *= factorial(p);
    return f;
}

/// All degree-d multi-indices in r parts, in the fixed descending
/// lexicographic order ((d,0,..), (d-1,1,0,..), ...). Every matrix indexed by
/// monomials across the library uses this order.
inline std::vector<MultiIndex> enumerate_multi_indices(int r, int d) {
    if (r < 1) throw std::invalid_argument("enumerate_multi_indices: r must be >= 1");
    if (d < 0) throw std::invalid_argument("enumerate_multi_indices: d must be >= 0");
    std::vector<MultiIndex> out;
    std::vector<int> cur(r, 0);
    auto rec = [&](auto&& self, int pos, int rem) -> void {
        if (pos == r - 1) {
            cur[pos] = rem;
            out.push_back(MultiIndex{cur});
            return;
        }
        for (int v = rem; v >= 0; --v) {
            cur[pos] = v;
            self(self, pos + 1, rem - v);
        }
    };
    rec(rec, 0, d);
    return out;
}

/// Monomial basis bookkeeping for Sym^d of an r-dimensional space:
/// multi-indices in the canonical order plus the normalization constants
/// sqrt(d!/I!) that turn monomials into an orthonormal set when the
/// underlying basis is orthonormal.
struct SymBasisMap {
    int r = 0;
    int d = 0;
    std::vector<MultiIndex> indices;
    std::vector<double> normConstants;

    int rank() const { return static_cast<int>(indices.size()); }

    int index_of(const MultiIndex& I) const {
        for (int i = 0; i < rank(); ++i)
            if (indices[i] == I) return i;
        throw std::invalid_argument("SymBasisMap::index_of: index not found");
    }
};

inline SymBasisMap orthonormal_sym_basis(int r, int d) {
    if (r < 1 || d < 1) throw std::invalid_argument("orthonormal_sym_basis: need r >= 1, d >= 1");
    SymBasisMap map;
    map.r = r;
    map.d = d;
    map.indices = enumerate_multi_indices(r, d);
    const long long expected = binomial(d + r - 1, r - 1);
    if (static_cast<long long>(map.indices.size()) != expected)
        throw std::logic_error("orthonormal_sym_basis: index count mismatch");
    map.normConstants.reserve(map.indices.size());
    for (const auto& I : map.indices)
        map.normConstants.push_back(std::sqrt(factorial(d) / multi_factorial(I)));
    return map;
}

// ---------------------------------------------------------------------------
// HermMetric
// ---------------------------------------------------------------------------

/// A positive-definite Hermitian inner product, stored as the Gram matrix of
/// the basis it is expressed in. Construction rejects non-Hermitian or
/// non-positive input.
class HermMetric {
public:
    HermMetric(Matrix entries, std::string basisLabel)
        : entries_(std::move(entries)), basisLabel_(std::move(basisLabel)) {
        if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
            throw std::invalid_argument("HermMetric: matrix must be square and nonempty");
        const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
        const double skew = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
        if (skew > 1e-14 * scale)
            throw std::invalid_argument("HermMetric: matrix is not Hermitian");
        entries_ = 0.5 * (entries_ + entries_.adjoint().eval());
        Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw std::invalid_argument("HermMetric: matrix is not positive definite");
    }

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    const std::string& basisLabel() const { return basisLabel_; }

    /// Matrix M with <u,v> = v^H M u for coefficient vectors.
    Matrix std_form() const { return entries_.conjugate(); }

    /// <u, v> for coefficient vectors in this basis.
    Complex inner(const Vector& u, const Vector& v) const {
        return (v.adjoint() * std_form() * u)(0, 0);
    }

    double norm_sq(const Vector& u) const { return std::real(inner(u, u)); }

private:
    Matrix entries_;
    std::string basisLabel_;
};

// ---------------------------------------------------------------------------
// Dense Hermitian helpers
// ---------------------------------------------------------------------------

/// max |eigenvalue| of a Hermitian matrix.
inline double hermitian_op_norm(const Matrix& A) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct HermPower {
    Matrix value;
    double conditionNumber = 1.0;
};

/// A^p for Hermitian positive definite A via eigendecomposition. Eigenvalues
/// are floored at 1e-300 so inverse powers of a numerically collapsed matrix
/// surface as huge condition numbers rather than NaNs.
inline HermPower hermitian_power(const Matrix& A, double p) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) ev(i) = std::max(ev(i), 1e-300);
    HermPower out;
    out.conditionNumber = ev.maxCoeff() / ev.minCoeff();
    Eigen::VectorXd powed = ev.array().pow(p);
    out.value = es.eigenvectors() * powed.asDiagonal() * es.eigenvectors().adjoint();
    return out;
}

// ---------------------------------------------------------------------------
// Permanent and the symmetric-power inner product
// ---------------------------------------------------------------------------

constexpr int kMaxSymDegree = 6;

/// Permanent of a d x d matrix by the direct sum over S_d. Degrees above
/// kMaxSymDegree are out of the supported range.
inline Complex permanent(const Matrix& A) {
    const int d = static_cast<int>(A.rows());
    if (A.cols() != d) throw std::invalid_argument("permanent: matrix must be square");
    if (d > kMaxSymDegree + 2)
        throw std::invalid_argument("permanent: degree above supported range");
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    Complex sum = 0.0;
    do {
        Complex prod = 1.0;
        for (int t = 0; t < d; ++t) prod *= A(t, perm[t]);
        sum += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return sum;
}

/// Expands a multi-index into the length-d list of basis slots it repeats,
/// e.g. (2,1) -> {0,0,1}.
inline std::vector<int> multiset_of(const MultiIndex& I) {
    std::vector<int> slots;
    for (int a = 0; a < I.size(); ++a)
        for (int c = 0; c < I[a]; ++c) slots.push_back(a);
    return slots;
}

/// Gram matrix of the degree-d monomials under the inner product induced on
/// Sym^d V:  <v_1...v_d, w_1...w_d> = (1/d!) sum_{sigma} prod <v_t, w_sigma(t)>.
/// Entry (I,J) is perm(pairings)/d!. The same permanent formula maps the
/// standard form to the standard form, so the function is applied to Gram
/// matrices in either convention.
inline Matrix sym_power_gram(const Matrix& g, int d) {
    const int r = static_cast<int>(g.rows());
    if (d < 1) throw std::invalid_argument("sym_power_gram: d must be >= 1");
    if (d > kMaxSymDegree)
        throw std::invalid_argument("sym_power_gram: degree above supported range (max 6)");
    if (d == 1) return g;
    const auto indices = enumerate_multi_indices(r, d);
    const int R = static_cast<int>(indices.size());
    std::vector<std::vector<int>> slots(R);
    for (int i = 0; i < R; ++i) slots[i] = multiset_of(indices[i]);
    Matrix out(R, R);
    const double dfac = factorial(d);
    Matrix pair(d, d);
    for (int i = 0; i < R; ++i) {
        for (int j = 0; j < R; ++j) {
            for (int t = 0; t < d; ++t)
                for (int s = 0; s < d; ++s) pair(t, s) = g(slots[i][t], slots[j][s]);
            out(i, j) = permanent(pair) / dfac;
        }
    }
    return out;
}

/// Sym^d of h as a HermMetric on the monomial basis of Sym^d V.
inline HermMetric sym_power_metric(const HermMetric& h, int d) {
    if (d < 1) throw std::invalid_argument("sym_power_metric: d must be >= 1");
    if (d == 1) return h;
    return HermMetric(sym_power_gram(h.entries(), d),
                      "sym^" + std::to_string(d) + "(" + h.basisLabel() + ")");
}

/// Matrix of the induced map Sym^d A on the monomial basis: column I holds
/// the monomial expansion of prod_a (A e_a)^{i_a}.
inline Matrix sym_power_matrix(const Matrix& A, int d) {
    const int r = static_cast<int>(A.rows());
    const auto indices = enumerate_multi_indices(r, d);
    const int R = static_cast<int>(indices.size());

    // Multiply one linear factor at a time; coefficients live on the
    // multi-index lattice of the current degree.
    Matrix out(R, R);
    for (int col = 0; col < R; ++col) {
        const auto slots = multiset_of(indices[col]);
        std::vector<MultiIndex> curIdx = enumerate_multi_indices(r, 0);
        Vector cur = Vector::Ones(1);
        for (int step = 0; step < d; ++step) {
            const auto nxtIdx = enumerate_multi_indices(r, step + 1);
            Vector nxt = Vector::Zero(static_cast<Eigen::Index>(nxtIdx.size()));
            for (size_t q = 0; q < curIdx.size(); ++q) {
                if (cur(static_cast<Eigen::Index>(q)) == 0.0) continue;
                for (int a = 0; a < r; ++a) {
                    const Complex c = A(a, slots[step]);
                    if (c == 0.0) continue;
                    MultiIndex J = curIdx[q];
                    J.parts[a] += 1;
                    for (size_t w = 0; w < nxtIdx.size(); ++w)
                        if (nxtIdx[w] == J) {
                            nxt(static_cast<Eigen::Index>(w)) +=
                                cur(static_cast<Eigen::Index>(q)) * c;
                            break;
                        }
                }
            }
            curIdx = nxtIdx;
            cur = nxt;
        }
        out.col(col) = cur;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Relative distance between metrics
// ---------------------------------------------------------------------------

/// Operator norm of H0^{-1/2} (H - H0) H0^{-1/2}: the relative distance used
/// as epsilon in every perturbation statement. Symmetric in the relative
/// sense, zero iff H == H0.
inline double metric_distance(const HermMetric& H, const HermMetric& H0) {
    if (H.dim() != H0.dim())
        throw std::invalid_argument("metric_distance: dimension mismatch");
    if (H.basisLabel() != H0.basisLabel())
        throw std::invalid_argument("metric_distance: metrics expressed in different bases");
    const Matrix s = hermitian_power(H0.std_form(), -0.5).value;
    return hermitian_op_norm(s * (H.std_form() - H0.std_form()) * s);
}

/// Same distance for raw standard-form matrices (used on pointwise metric
/// fields where constructing HermMetric wrappers would be noise).
inline double metric_distance_std(const Matrix& M, const Matrix& M0) {
    if (M.rows() != M0.rows())
        throw std::invalid_argument("metric_distance_std: dimension mismatch");
    const Matrix s = hermitian_power(M0, -0.5).value;
    return hermitian_op_norm(s * (M - M0) * s);
}

/// min over c > 0 of metric_distance(c*M, M0): the gauge-free distance used
/// when a balanced object is only determined up to overall scale.
inline double metric_distance_mod_scale(const Matrix& M, const Matrix& M0) {
    const Matrix s = hermitian_power(M0, -0.5).value;
    Eigen::SelfAdjointEigenSolver<Matrix> es(s * M * s, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    // max |c*lambda - 1| over the spectrum is minimized at c = 2/(lo+hi).
    return (hi - lo) / (hi + lo);
}

}  // namespace balmet

#endif  // BALMET_HERM_HPP
