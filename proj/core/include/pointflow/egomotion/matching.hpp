#pragma once

#include <vector>

#include "pointflow/core/types.hpp"
#include "pointflow/features/octant.hpp"

namespace pointflow::ego {

using features::RowMatrix;

/// Nearest-neighbor matching in feature space with the ratio test.
///
/// For each src row the nearest (d1) and second-nearest (d2) dst rows are
/// found (ties to lower index). A pair survives when d1 / d2 <= ratio_max
/// (0/0 counts as 1, a lone dst row as ratio 0). Survivors are visited by
/// ascending (d1, src) and accepted one-to-one: a dst row is consumed once.
/// At most top_m pairs are returned; feature_distance holds d1.
///
/// Throws NoCorrespondences when nothing survives, InvalidArgument for empty
/// inputs, mismatched widths, or ratio_max outside (0, 1].
CorrespondenceSet match_features(const Eigen::Ref<const RowMatrix>& src,
                                 const Eigen::Ref<const RowMatrix>& dst, std::size_t top_m,
                                 double ratio_max);

}  // namespace pointflow::ego
