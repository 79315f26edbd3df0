#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cesnet/labeled_matrix.hpp"
#include "cesnet/spectral.hpp"

namespace cesnet {

/// Heatmap with a diverging palette centered on zero.
std::string heatmap_svg(const LabeledMatrix& m, const std::string& title);

/// Time x log-period image of `field` (rows are scales, smallest period at
/// the top). Significant regions are outlined, the area outside the cone of
/// influence is hatched, and when `phase` is non-empty arrows are drawn on
/// a coarse grid inside significant cells (right = in phase).
std::string spectrogram_svg(const Eigen::MatrixXd& field, const std::vector<double>& periods,
                            const std::vector<double>& coi, const BoolMatrix& significant,
                            const Eigen::MatrixXd& phase, const std::string& title);

}  // namespace cesnet
