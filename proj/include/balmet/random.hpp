// Seeded random generators for metrics, unitaries and test directions.
// All randomness in the library flows through one std::mt19937_64 owned by
// the caller, so runs are reproducible from a single seed.

#ifndef BALMET_RANDOM_HPP
#define BALMET_RANDOM_HPP

#include <random>

#include "balmet/herm.hpp"

namespace balmet {

using Rng = std::mt19937_64;

inline Complex random_gaussian(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng), n(rng)};
}

inline Matrix random_complex_matrix(Rng& rng, int rows, int cols) {
    Matrix A(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) A(i, j) = random_gaussian(rng);
    return A;
}

inline Vector random_complex_vector(Rng& rng, int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = random_gaussian(rng);
    return v;
}

/// Haar-ish unitary via QR with phase-fixed diagonal.
inline Matrix random_unitary(Rng& rng, int n) {
    Matrix A = random_complex_matrix(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(A);
    Matrix Q = qr.householderQ();
    Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
        Complex d = R(i, i);
        Q.col(i) *= (d == 0.0 ? 1.0 : d / std::abs(d));
    }
    return Q;
}

/// Random Hermitian matrix with operator norm 1.
inline Matrix random_hermitian_direction(Rng& rng, int n) {
    Matrix A = random_complex_matrix(rng, n, n);
    Matrix H = 0.5 * (A + A.adjoint().eval());
    return H / hermitian_op_norm(H);
}

/// Random positive-definite Gram matrix with condition number at most
/// condMax (eigenvalues log-uniform in [1, condMax], random eigenbasis).
inline Matrix random_pd_matrix(Rng& rng, int n, double condMax) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix U = random_unitary(rng, n);
    Eigen::VectorXd ev(n);
    for (int i = 0; i < n; ++i) ev(i) = std::exp(u(rng) * std::log(condMax));
    Matrix G = U * ev.asDiagonal() * U.adjoint();
    return 0.5 * (G + G.adjoint().eval());
}

inline HermMetric random_pd_metric(Rng& rng, int n, double condMax,
                                   const std::string& label = "e") {
    return HermMetric(random_pd_matrix(rng, n, condMax), label);
}

}  // namespace balmet

#endif  // BALMET_RANDOM_HPP
