// Root of the monotone piecewise-linear map mu -> sum_i clamp(v_i - mu, lo_i, hi_i).
// Shared by the projection onto the constraint set and the projected-gradient
// optimality measure.

#pragma once

#include <Eigen/Dense>

#include <optional>

namespace swto::detail {

/// Returns mu such that sum_i clamp(v_i - mu, lo_i, hi_i) = target, or
/// nullopt when no such mu exists. Bounds may be infinite.
std::optional<double> solve_clamped_shift(const Eigen::VectorXd& v,
                                          const Eigen::VectorXd& lo,
                                          const Eigen::VectorXd& hi,
                                          double target);

Eigen::VectorXd apply_clamped_shift(const Eigen::VectorXd& v,
                                    const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi, double mu);

}  // namespace swto::detail
