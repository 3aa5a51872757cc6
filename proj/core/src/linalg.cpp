#include "gotedit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gotedit/error.hpp"

#ifdef GOTEDIT_HAVE_LAPACKE
#include <cblas.h>
#include <lapacke.h>
#endif

namespace gotedit {
namespace {

void require_square(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    throw ValidationError("expected a non-empty square matrix");
  }
}

void require_symmetric(const Eigen::MatrixXd& M) {
  require_square(M);
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-9 * scale)) {
    throw ValidationError("matrix is not symmetric (max |M - M^T| = " + std::to_string(asym) + ")");
  }
}

// Sort eigenpairs by descending value and flip each vector so that its
// largest-magnitude entry is positive.
EigenBasis canonicalize(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors, int sweeps) {
  const auto n = values.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] > values[b]; });

  EigenBasis out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  out.sweeps = sweeps;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = values[order[i]];
    auto col = vectors.col(order[i]);
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    out.vectors.col(i) = col[imax] < 0 ? Eigen::VectorXd(-col) : Eigen::VectorXd(col);
  }
  return out;
}

}  // namespace

WhitenedMatrix whiten(const Eigen::MatrixXd& X) {
  const auto C = X.rows();
  const auto N = X.cols();
  if (N < 2) throw ValidationError("whiten needs at least 2 samples, got " + std::to_string(N));
  if (C < 1) throw ValidationError("whiten needs at least 1 channel");

  WhitenedMatrix out;
  out.mean = X.rowwise().mean();
  out.Z = X.colwise() - out.mean;
  out.stddev = (out.Z.rowwise().squaredNorm() / static_cast<double>(N)).cwiseSqrt();
  out.degenerate.assign(C, false);
  Eigen::VectorXd inv(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    // Treat channels whose spread is at rounding level as constant.
    out.degenerate[c] = !(out.stddev[c] > 1e-12 * std::max(1.0, std::abs(out.mean[c])));
    inv[c] = out.degenerate[c] ? 0.0 : 1.0 / out.stddev[c];
  }
  out.Z = inv.asDiagonal() * out.Z;
  return out;
}

WhitenedMatrix whiten(const FeatureMap& F) { return whiten(F.values()); }

double default_ridge(const WhitenedMatrix& Z) {
  return 1e-4 * Z.Z.squaredNorm() / static_cast<double>(Z.channels());
}

SymmetricMatrix regularized_correlation(const WhitenedMatrix& Z, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("ridge lambda must be a finite non-negative number");
  }
  const auto C = Z.Z.rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(C, C);
#ifdef GOTEDIT_HAVE_LAPACKE
  cblas_dsyrk(CblasColMajor, CblasLower, CblasNoTrans, static_cast<int>(C), static_cast<int>(Z.Z.cols()), 1.0,
              Z.Z.data(), static_cast<int>(C), 0.0, M.data(), static_cast<int>(C));
#else
  M.selfadjointView<Eigen::Lower>().rankUpdate(Z.Z);
#endif
  M.triangularView<Eigen::StrictlyUpper>() = M.transpose();
  M.diagonal().array() += lambda;
  Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
  return SymmetricMatrix{std::move(sym), lambda};
}

EigenBasis sym_eig(const SymmetricMatrix& M) { return sym_eig(M.M); }

EigenBasis sym_eig(const Eigen::MatrixXd& input) {
  require_symmetric(input);
  const auto n = input.rows();
  Eigen::MatrixXd A = 0.5 * (input + input.transpose());
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);

  const double target = 1e-12 * A.norm();
  auto off_mass = [&] {
    double s = 0.0;
    for (Eigen::Index q = 0; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p) s += 2.0 * A(p, q) * A(p, q);
    return std::sqrt(s);
  };

  int sweeps = 0;
  while (sweeps < 64 && off_mass() > target) {
    ++sweeps;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        A(p, p) -= t * apq;
        A(q, q) += t * apq;
        A(p, q) = A(q, p) = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = A(r, p);
            const double arq = A(r, q);
            A(r, p) = A(p, r) = arp - s * (arq + tau * arp);
            A(r, q) = A(q, r) = arq + s * (arp - tau * arq);
          }
          const double vrp = V(r, p);
          const double vrq = V(r, q);
          V(r, p) = vrp - s * (vrq + tau * vrp);
          V(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }
  return canonicalize(A.diagonal(), V, sweeps);
}

EigenBasis sym_eig_tridiagonal(const Eigen::MatrixXd& input) {
  require_symmetric(input);
#ifdef GOTEDIT_HAVE_LAPACKE
  const auto n = static_cast<int>(input.rows());
  Eigen::MatrixXd V = input;
  Eigen::VectorXd w(n);
  if (LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, V.data(), n, w.data()) != 0) {
    throw Error("tridiagonal eigensolver did not converge");
  }
  return canonicalize(w, V, 0);
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(input, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("tridiagonal eigensolver did not converge");
  return canonicalize(solver.eigenvalues(), solver.eigenvectors(), 0);
#endif
}

std::vector<int> low_energy_indices(const Eigen::VectorXd& values, const ThresholdPolicy& policy) {
  std::vector<int> picked;
  if (values.size() == 0) return picked;
  const double lmax = values.maxCoeff();
  const double cut = lmax > 0.0 ? policy.eps_rel * lmax : policy.eps_abs;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] <= cut) picked.push_back(static_cast<int>(i));
  }
  return picked;
}

Projector Projector::zero(int C) { return Projector{Eigen::MatrixXd::Zero(C, C), 0}; }

Projector Projector::identity(int C) { return Projector{Eigen::MatrixXd::Identity(C, C), C}; }

Projector nullspace_projector(const SymmetricMatrix& M, const ThresholdPolicy& policy) {
  const bool jacobi = policy.solver == EigenSolver::jacobi ||
                      (policy.solver == EigenSolver::automatic && M.size() <= kJacobiMaxDim);
  return nullspace_projector(jacobi ? sym_eig(M.M) : sym_eig_tridiagonal(M.M), policy);
}

Projector nullspace_projector(const EigenBasis& basis, const ThresholdPolicy& policy) {
  if (!(policy.eps_rel >= 0.0) || !(policy.eps_abs >= 0.0)) {
    throw ValidationError("threshold policy epsilons must be non-negative");
  }
  const auto C = static_cast<int>(basis.values.size());
  const auto picked = low_energy_indices(basis.values, policy);
  if (picked.empty()) return Projector::zero(C);

  Eigen::MatrixXd U(C, static_cast<Eigen::Index>(picked.size()));
  for (std::size_t j = 0; j < picked.size(); ++j) U.col(static_cast<Eigen::Index>(j)) = basis.vectors.col(picked[j]);
  Eigen::MatrixXd Phat = U * U.transpose();
  Eigen::MatrixXd P = 0.5 * (Phat + Phat.transpose());
  return Projector{std::move(P), static_cast<int>(picked.size())};
}

WeightVector project(const Projector& P, const WeightVector& delta) {
  if (delta.size() != P.size()) {
    throw ValidationError("project: weight length " + std::to_string(delta.size()) +
                          " does not match projector size " + std::to_string(P.size()));
  }
  return WeightVector{P.P * delta.w, WeightRole::projected};
}

}  // namespace gotedit
