#include "pointflow/features/saab.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "pointflow/core/error.hpp"

namespace pointflow::features {

namespace {

// Orthonormal basis (d x (d-1)) of the complement of the DC direction.
Eigen::MatrixXd dc_complement_basis(Eigen::Index d) {
  Eigen::MatrixXd seed = Eigen::MatrixXd::Identity(d, d);
  seed.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(d)));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(seed);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  return q.rightCols(d - 1);
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
}

}  // namespace

Eigen::VectorXd SaabKernelBank::transform(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd out = kernels * (x - mean);
  out[0] = kernels.row(0).dot(x);
  return out;
}

RowMatrix SaabKernelBank::transform_rows(const Eigen::Ref<const RowMatrix>& samples) const {
  RowMatrix out = (samples.rowwise() - mean.transpose()) * kernels.transpose();
  out.col(0) = samples * kernels.row(0).transpose();
  return out;
}

SaabKernelBank saab_fit(const Eigen::Ref<const RowMatrix>& samples, Eigen::Index max_kernels) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < 2) {
    throw Error(ErrorCode::kInsufficientSamples,
                "saab_fit needs at least 2 samples, got " + std::to_string(n));
  }
  if (d < 1 || max_kernels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "saab_fit needs d >= 1 and max_kernels >= 1");
  }

  SaabKernelBank bank;
  bank.mean = samples.colwise().mean().transpose();
  bank.bias = samples.rowwise().norm().maxCoeff();

  const Eigen::VectorXd dc = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  const RowMatrix centered = samples.rowwise() - bank.mean.transpose();
  const Eigen::VectorXd dc_response = centered * dc;
  const double dc_energy = dc_response.squaredNorm() / static_cast<double>(n);

  const Eigen::Index num = std::min(max_kernels, d);
  bank.kernels.resize(num, d);
  bank.kernels.row(0) = dc.transpose();
  bank.energies.resize(num);
  bank.energies[0] = dc_energy;

  if (d == 1) {
    bank.ac_energies.resize(0);
    return bank;
  }

  // PCA restricted to the DC complement keeps AC kernels exactly orthogonal to DC.
  const Eigen::MatrixXd basis = dc_complement_basis(d);
  const Eigen::MatrixXd projected = centered * basis;  // n x (d-1)
  const Eigen::MatrixXd cov = projected.transpose() * projected / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::VectorXd values = solver.eigenvalues().reverse().cwiseMax(0.0);
  const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  bank.ac_energies = values;
  for (Eigen::Index k = 1; k < num; ++k) {
    Eigen::VectorXd kernel = basis * vectors.col(k - 1);
    kernel.normalize();
    fix_sign(kernel);
    bank.kernels.row(k) = kernel.transpose();
    bank.energies[k] = values[k - 1];
  }
  return bank;
}

}  // namespace pointflow::features
