#pragma once

#include <array>

#include <Eigen/Dense>

namespace willmore {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// First metric derivatives, dg[k](i, j) = d_k g_ij.
using MetricGrad = std::array<Mat3, 3>;
/// Second metric derivatives, d2g[k][l](i, j) = d_k d_l g_ij.
using MetricHess = std::array<std::array<Mat3, 3>, 3>;
/// Christoffel symbols, gamma[k](i, j) = Gamma^k_ij.
using Christoffel = std::array<Mat3, 3>;

}  // namespace willmore
