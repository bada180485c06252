#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

#include "bvs/model_space.hpp"

namespace bvs::test {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = normal(rng);
    return M;
}

/// Gaussian design with y = X beta + noise, beta nonzero on the first `signals` columns.
inline Dataset random_dataset(std::size_t n, std::size_t p, int k0, std::uint64_t seed, std::size_t signals = 0,
                              double effect = 1.5) {
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd X = gaussian_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p), rng);
    Eigen::VectorXd y = gaussian_matrix(static_cast<Eigen::Index>(n), 1, rng).col(0);
    for (std::size_t j = 0; j < signals && j < p; ++j) y += effect * X.col(static_cast<Eigen::Index>(j));
    return make_dataset(std::move(y), std::move(X), k0);
}

}  // namespace bvs::test
