#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace gotedit {

using Rng = std::mt19937_64;

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);
Eigen::VectorXd gaussian_vector(Eigen::Index n, double stddev, Rng& rng);
double uniform(double lo, double hi, Rng& rng);

// Random orthonormal basis: the Q factor of a Gaussian n x n matrix.
Eigen::MatrixXd random_orthonormal(int n, Rng& rng);

}  // namespace gotedit
