#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gotedit/tensor.hpp"
#include "gotedit/weights.hpp"

namespace gotedit {

// Per-channel standardized C x N sample matrix.
struct WhitenedMatrix {
  Eigen::MatrixXd Z;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::vector<bool> degenerate;  // channel had zero variance and was zeroed

  int channels() const { return static_cast<int>(Z.rows()); }
  int samples() const { return static_cast<int>(Z.cols()); }
};

// Rows are standardized with their own mean and population (1/N) std.
// Throws ValidationError when N < 2.
WhitenedMatrix whiten(const Eigen::MatrixXd& X);
WhitenedMatrix whiten(const FeatureMap& F);

struct SymmetricMatrix {
  Eigen::MatrixXd M;
  double ridge = 0.0;

  int size() const { return static_cast<int>(M.rows()); }
};

// 1e-4 * trace(Z Z^T) / C.
double default_ridge(const WhitenedMatrix& Z);

// M = Z Z^T + lambda I, symmetrized so that M == M^T bit for bit.
SymmetricMatrix regularized_correlation(const WhitenedMatrix& Z, double lambda);

struct EigenBasis {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column i pairs with values[i]
  int sweeps = 0;           // Jacobi sweeps performed (0 for other solvers)
};

// Cyclic Jacobi. Stops when the off-diagonal Frobenius mass drops to
// 1e-12 * ||M||_F or after 64 sweeps. Each eigenvector is sign-normalized so
// that its largest-magnitude component is positive.
EigenBasis sym_eig(const SymmetricMatrix& M);
EigenBasis sym_eig(const Eigen::MatrixXd& M);

// Householder tridiagonalization, then LAPACK divide and conquer (dsyevd) in
// builds with LAPACKE or Eigen's implicit QL otherwise. Same ordering and sign
// convention as sym_eig.
EigenBasis sym_eig_tridiagonal(const Eigen::MatrixXd& M);

enum class EigenSolver { automatic, jacobi, tridiagonal };

// Dimension above which EigenSolver::automatic switches from Jacobi to the
// tridiagonal solver.
inline constexpr int kJacobiMaxDim = 32;

struct ThresholdPolicy {
  double eps_rel = 1e-2;
  double eps_abs = 1e-10;
  EigenSolver solver = EigenSolver::automatic;
};

// An eigenvalue is low-energy when it is <= eps_rel * lambda_max, or <= eps_abs
// when lambda_max is zero.
std::vector<int> low_energy_indices(const Eigen::VectorXd& descending_values, const ThresholdPolicy& policy);

struct Projector {
  Eigen::MatrixXd P;
  int retained_rank = 0;

  int size() const { return static_cast<int>(P.rows()); }
  static Projector zero(int C);
  static Projector identity(int C);
};

Projector nullspace_projector(const SymmetricMatrix& M, const ThresholdPolicy& policy = {});
Projector nullspace_projector(const EigenBasis& basis, const ThresholdPolicy& policy = {});

// Delta' = P * Delta.
WeightVector project(const Projector& P, const WeightVector& delta);

}  // namespace gotedit
