#pragma once

#include <Eigen/Core>

#include "pointflow/features/octant.hpp"

namespace pointflow::features {

/// One Saab transform: a constant DC kernel plus energy-ordered AC kernels
/// (principal components of the DC-removed samples).
///
/// Row 0 of `kernels` is the DC kernel (1/sqrt(d), ...), rows 1.. are AC
/// kernels, mutually orthonormal and orthogonal to DC. Responses are
/// signed: dc·x for the DC channel and a_k·(x - mean) for AC channels. `bias`
/// is the largest sample norm; it is recorded but not applied.
struct SaabKernelBank {
  Eigen::MatrixXd kernels;      // num_kernels x input_dim
  Eigen::VectorXd mean;         // sample mean, input_dim
  Eigen::VectorXd energies;     // per kept kernel; [0] is the DC variance
  Eigen::VectorXd ac_energies;  // every AC eigenvalue before truncation, descending
  double bias = 0.0;

  Eigen::Index input_dim() const { return kernels.cols(); }
  Eigen::Index num_kernels() const { return kernels.rows(); }

  Eigen::VectorXd transform(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Row-wise transform of a sample matrix.
  RowMatrix transform_rows(const Eigen::Ref<const RowMatrix>& samples) const;
};

/// Fits a bank from one sample per row, keeping at most `max_kernels` kernels
/// (DC included). Throws InsufficientSamples for fewer than 2 rows.
SaabKernelBank saab_fit(const Eigen::Ref<const RowMatrix>& samples, Eigen::Index max_kernels);

}  // namespace pointflow::features
