#include "cardlab/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cardlab/sampling.hpp"

namespace cardlab {

double standard_normal_cdf(double z) {
  if (z == std::numeric_limits<double>::infinity()) return 1.0;
  if (z == -std::numeric_limits<double>::infinity()) return 0.0;
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

Eigen::VectorXd scott_bandwidth(const Eigen::MatrixXd& sample) {
  const auto m = static_cast<double>(sample.rows());
  const auto dims = static_cast<double>(sample.cols());
  if (sample.rows() < 2) throw std::invalid_argument("scott_bandwidth: need at least two points");
  const Eigen::RowVectorXd mean = sample.colwise().mean();
  const Eigen::VectorXd var = ((sample.rowwise() - mean).array().square().colwise().sum() / (m - 1)).transpose();
  const double factor = std::pow(m, -1.0 / (dims + 4.0));
  return (var.array().sqrt() * factor).max(KdeEstimator::kBandwidthFloor).matrix();
}

void KdeEstimator::build(const Table& table) {
  if (!(params_.rate > 0 && params_.rate <= 1)) throw std::invalid_argument("kde: rate must be in (0,1]");
  rows_ = table.row_count();
  const std::size_t dims = table.column_count();
  auto m = static_cast<std::size_t>(std::llround(params_.rate * static_cast<double>(rows_)));
  if (auto budget = params_.budget.resolve(table); budget && dims > 0) {
    const std::size_t words = *budget / 4;
    m = std::min(m, words > dims ? words / dims - 1 : 0);
  }
  m = std::max<std::size_t>(m, 2);
  if (rows_ < 2) throw std::invalid_argument("kde: need at least two rows");
  m = std::min(m, rows_);

  Rng rng(params_.seed);
  const auto idx = sample_rows_without_replacement(rows_, m, rng);
  sample_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t d = 0; d < dims; ++d) sample_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = table.at(idx[i], d);
  }
  bandwidth_ = scott_bandwidth(sample_);
}

double KdeEstimator::estimate(const Query& query, std::uint64_t) const {
  for (const auto& p : query.predicates) {
    if (p.kind == PredicateKind::kInvalid) return 0.0;
  }
  Eigen::ArrayXd mass = Eigen::ArrayXd::Ones(sample_.rows());
  for (const auto& p : query.predicates) {
    const auto d = static_cast<Eigen::Index>(p.col);
    const double b = bandwidth_[d];
    const double hi = p.upper() + 0.5;
    const double lo = p.lower() - 0.5;
    for (Eigen::Index i = 0; i < sample_.rows(); ++i) {
      const double x = sample_(i, d);
      mass[i] *= standard_normal_cdf((hi - x) / b) - standard_normal_cdf((lo - x) / b);
    }
  }
  const double sel = sample_.rows() > 0 ? mass.mean() : 0.0;
  return std::clamp(sel, 0.0, 1.0) * static_cast<double>(rows_);
}

nlohmann::ordered_json KdeEstimator::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = "kde";
  j["version"] = 1;
  j["rows"] = rows_;
  j["bandwidth"] = std::vector<double>(bandwidth_.data(), bandwidth_.data() + bandwidth_.size());
  auto pts = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < sample_.rows(); ++i) {
    const Eigen::VectorXd row = sample_.row(i).transpose();
    pts.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  j["sample"] = std::move(pts);
  return j;
}

}  // namespace cardlab
