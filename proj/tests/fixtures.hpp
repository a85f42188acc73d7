#pragma once
// Seeded random fixtures shared by the test suites.

#include "chiralspin/core.hpp"

#include <random>

namespace chiralspin::fixtures {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index d) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
    return m;
}

inline Operator random_operator(std::mt19937_64& rng, const HilbertSpace& space) {
    return {space, random_matrix(rng, static_cast<Eigen::Index>(space.dim()))};
}

/// G G^dag / tr, a full-rank mixed state.
inline DensityMatrix random_density(std::mt19937_64& rng, const HilbertSpace& space) {
    const Matrix g = random_matrix(rng, static_cast<Eigen::Index>(space.dim()));
    Matrix rho = g * g.adjoint();
    rho /= rho.trace();
    return {space, rho};
}

inline Vector random_state(std::mt19937_64& rng, Eigen::Index d) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = cplx(n(rng), n(rng));
    return v.normalized();
}

/// Product of single-spin-1/2 pure states cos(t)|up> + e^{ip} sin(t)|down>.
inline DensityMatrix product_spin_state(const std::vector<std::pair<double, double>>& angles) {
    DensityMatrix rho;
    for (std::size_t k = 0; k < angles.size(); ++k) {
        Vector v(2);
        v << std::cos(angles[k].first), std::exp(I * angles[k].second) * std::sin(angles[k].first);
        auto single = DensityMatrix::pure(HilbertSpace::spins(1), v);
        rho = k == 0 ? single : tensor(rho, single);
    }
    return rho;
}

} // namespace chiralspin::fixtures
