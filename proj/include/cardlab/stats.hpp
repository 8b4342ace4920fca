#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cardlab {

/// 1-based ranks with ties assigned their average rank.
Eigen::VectorXd average_ranks(std::span<const double> values);

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Spearman's rank correlation; 0 when either side is constant.
double spearman_rho(std::span<const double> x, std::span<const double> y);

}  // namespace cardlab
