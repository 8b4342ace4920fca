#include "cardlab/made.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cardlab {

namespace {

// Hidden unit k may see input columns 0..degree-1 and feeds output columns
// degree..n-1; degrees cycle through 1..n-1.
std::size_t hidden_degree(std::size_t k, std::size_t n_cols) { return (k % (n_cols - 1)) + 1; }

void zero_like(MadeGradients& g, const MadeGradients& shape) {
  g.w1 = Eigen::MatrixXd::Zero(shape.w1.rows(), shape.w1.cols());
  g.b1 = Eigen::VectorXd::Zero(shape.b1.size());
  g.w2 = Eigen::MatrixXd::Zero(shape.w2.rows(), shape.w2.cols());
  g.b2 = Eigen::VectorXd::Zero(shape.b2.size());
}

template <class Derived>
void adam_step(Eigen::MatrixBase<Derived>& param, const Eigen::MatrixBase<Derived>& grad, Eigen::MatrixBase<Derived>& m,
               Eigen::MatrixBase<Derived>& v, const MadeTrainConfig& cfg, std::size_t t) {
  m = cfg.beta1 * m + (1 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1 - std::pow(cfg.beta2, static_cast<double>(t));
  param.array() -= cfg.step_size * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.adam_eps);
}

}  // namespace

MadeModel::MadeModel(std::vector<ColumnCells> cells, std::size_t hidden, std::size_t rows, std::uint64_t seed)
    : cells_(std::move(cells)), rows_(rows) {
  const std::size_t n = cells_.size();
  if (n == 0) throw std::invalid_argument("made: no columns");
  for (const auto& c : cells_) {
    offset_.push_back(width_);
    domain_.push_back(c.size());
    width_ += static_cast<Eigen::Index>(c.size());
  }
  const auto H = static_cast<Eigen::Index>(std::max<std::size_t>(hidden, 1));
  m1_ = Eigen::MatrixXd::Zero(H, width_);
  m2_ = Eigen::MatrixXd::Zero(width_, H);
  if (n >= 2) {
    for (Eigen::Index k = 0; k < H; ++k) {
      const auto deg = hidden_degree(static_cast<std::size_t>(k), n);
      for (std::size_t j = 0; j < n; ++j) {
        const auto len = static_cast<Eigen::Index>(domain_[j]);
        if (j + 1 <= deg) m1_.block(k, offset_[j], 1, len).setOnes();
        if (j + 1 > deg) m2_.block(offset_[j], k, len, 1).setOnes();
      }
    }
  }
  Rng rng(seed);
  auto init = [&](Eigen::MatrixXd& w, const Eigen::MatrixXd& mask, double fan_in) {
    const double r = 1.0 / std::sqrt(std::max(fan_in, 1.0));
    w.resize(mask.rows(), mask.cols());
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = (2 * unit_uniform(rng) - 1) * r;
    }
    w.array() *= mask.array();
  };
  init(w1_, m1_, static_cast<double>(n));
  init(w2_, m2_, static_cast<double>(H));
  b1_ = Eigen::VectorXd::Zero(H);
  b2_ = Eigen::VectorXd::Zero(width_);
  zero_like(adam_m_, {w1_, b1_, w2_, b2_});
  zero_like(adam_v_, {w1_, b1_, w2_, b2_});
}

std::size_t MadeModel::parameter_count_for(const std::vector<std::size_t>& domain, std::size_t hidden) {
  const std::size_t width = std::accumulate(domain.begin(), domain.end(), std::size_t{0});
  // Every hidden unit connects to each column exactly once: as an input
  // (column < degree) or as an output (column >= degree).
  if (domain.size() < 2) return hidden + width;
  return hidden + width + hidden * width;
}

std::size_t MadeModel::parameter_count() const {
  return static_cast<std::size_t>(m1_.sum() + m2_.sum()) + static_cast<std::size_t>(b1_.size() + b2_.size());
}

void MadeModel::forward(const Eigen::MatrixXi& data, Eigen::MatrixXd& hidden, Eigen::MatrixXd& logits) const {
  const Eigen::Index B = data.cols();
  const Eigen::MatrixXd w1 = w1_.cwiseProduct(m1_);
  hidden = b1_.replicate(1, B);
  for (Eigen::Index r = 0; r < B; ++r) {
    for (std::size_t j = 0; j + 1 < domain_.size(); ++j) hidden.col(r) += w1.col(offset_[j] + data(static_cast<Eigen::Index>(j), r));
  }
  hidden = hidden.array().tanh();
  logits = (w2_.cwiseProduct(m2_) * hidden).colwise() + b2_;
}

void MadeModel::softmax_blocks(Eigen::MatrixXd& logits) const {
  for (std::size_t i = 0; i < domain_.size(); ++i) {
    auto block = logits.middleRows(offset_[i], static_cast<Eigen::Index>(domain_[i]));
    const Eigen::RowVectorXd mx = block.colwise().maxCoeff();
    block = (block.rowwise() - mx).array().exp();
    const Eigen::RowVectorXd z = block.colwise().sum();
    block.array().rowwise() /= z.array();
  }
}

double MadeModel::loss(const Eigen::MatrixXi& data) const {
  if (data.cols() == 0) return 0.0;
  Eigen::MatrixXd hidden, logits;
  forward(data, hidden, logits);
  double total = 0;
  for (std::size_t i = 0; i < domain_.size(); ++i) {
    const auto block = logits.middleRows(offset_[i], static_cast<Eigen::Index>(domain_[i]));
    const Eigen::RowVectorXd mx = block.colwise().maxCoeff();
    const Eigen::RowVectorXd lse = ((block.rowwise() - mx).array().exp().colwise().sum().log()).matrix() + mx;
    for (Eigen::Index r = 0; r < data.cols(); ++r) total += lse[r] - block(data(static_cast<Eigen::Index>(i), r), r);
  }
  return total / static_cast<double>(data.cols());
}

MadeGradients MadeModel::gradients(const Eigen::MatrixXi& data) const {
  const Eigen::Index B = data.cols();
  Eigen::MatrixXd hidden, probs;
  forward(data, hidden, probs);
  softmax_blocks(probs);
  for (Eigen::Index r = 0; r < B; ++r) {
    for (std::size_t i = 0; i < domain_.size(); ++i) probs(offset_[i] + data(static_cast<Eigen::Index>(i), r), r) -= 1.0;
  }
  probs /= static_cast<double>(B);  // now d loss / d logits

  MadeGradients g;
  g.w2 = (probs * hidden.transpose()).cwiseProduct(m2_);
  g.b2 = probs.rowwise().sum();
  const Eigen::MatrixXd dpre = ((w2_.cwiseProduct(m2_).transpose() * probs).array() * (1.0 - hidden.array().square())).matrix();
  g.b1 = dpre.rowwise().sum();
  g.w1 = Eigen::MatrixXd::Zero(w1_.rows(), w1_.cols());
  for (Eigen::Index r = 0; r < B; ++r) {
    for (std::size_t j = 0; j + 1 < domain_.size(); ++j) g.w1.col(offset_[j] + data(static_cast<Eigen::Index>(j), r)) += dpre.col(r);
  }
  g.w1.array() *= m1_.array();
  return g;
}

std::vector<double> MadeModel::train(const Eigen::MatrixXi& data, const MadeTrainConfig& cfg, std::size_t epochs, Rng& rng) {
  std::vector<double> history;
  const auto n = static_cast<std::size_t>(data.cols());
  if (n == 0) return history;
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = std::max<std::size_t>(cfg.batch_size, 1);
  Eigen::MatrixXi batch;
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t len = std::min(bs, n - start);
      batch.resize(data.rows(), static_cast<Eigen::Index>(len));
      for (std::size_t k = 0; k < len; ++k) batch.col(static_cast<Eigen::Index>(k)) = data.col(order[start + k]);
      MadeGradients g = gradients(batch);
      ++adam_t_;
      adam_step(w1_, g.w1, adam_m_.w1, adam_v_.w1, cfg, adam_t_);
      adam_step(b1_, g.b1, adam_m_.b1, adam_v_.b1, cfg, adam_t_);
      adam_step(w2_, g.w2, adam_m_.w2, adam_v_.w2, cfg, adam_t_);
      adam_step(b2_, g.b2, adam_m_.b2, adam_v_.b2, cfg, adam_t_);
    }
    history.push_back(loss(data));
  }
  return history;
}

Eigen::MatrixXi MadeModel::encode(const Table& table) const {
  if (table.column_count() != cells_.size()) throw std::invalid_argument("made: column count mismatch");
  Eigen::MatrixXi out(static_cast<Eigen::Index>(cells_.size()), static_cast<Eigen::Index>(table.row_count()));
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& col = table.column(c);
    for (std::size_t r = 0; r < col.size(); ++r) out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = static_cast<int>(cells_[c].cell_of(col[r]));
  }
  return out;
}

void MadeModel::conditionals(std::size_t pos, const Eigen::MatrixXi& sampled, Eigen::MatrixXd& probs) const {
  const Eigen::Index S = sampled.cols();
  Eigen::MatrixXd hidden = b1_.replicate(1, S);
  for (Eigen::Index s = 0; s < S; ++s) {
    for (std::size_t j = 0; j < pos; ++j) {
      const Eigen::Index c = offset_[j] + sampled(static_cast<Eigen::Index>(j), s);
      hidden.col(s) += w1_.col(c).cwiseProduct(m1_.col(c));
    }
  }
  hidden = hidden.array().tanh();
  const auto len = static_cast<Eigen::Index>(domain_[pos]);
  probs = (w2_.middleRows(offset_[pos], len).cwiseProduct(m2_.middleRows(offset_[pos], len)) * hidden).colwise() + b2_.segment(offset_[pos], len);
  const Eigen::RowVectorXd mx = probs.colwise().maxCoeff();
  probs = (probs.rowwise() - mx).array().exp();
  const Eigen::RowVectorXd z = probs.colwise().sum();
  probs.array().rowwise() /= z.array();
}

Eigen::VectorXd MadeModel::conditional(std::span<const int> prefix, std::size_t col) const {
  if (prefix.size() < col) throw std::invalid_argument("made: prefix shorter than column index");
  Eigen::MatrixXi sampled(static_cast<Eigen::Index>(std::max<std::size_t>(col, 1)), 1);
  sampled.setZero();
  for (std::size_t j = 0; j < col; ++j) sampled(static_cast<Eigen::Index>(j), 0) = prefix[j];
  Eigen::MatrixXd probs;
  conditionals(col, sampled, probs);
  return probs.col(0);
}

nlohmann::ordered_json MadeModel::to_json() const {
  auto flat = [](const auto& m) { return std::vector<double>(m.data(), m.data() + m.size()); };
  nlohmann::ordered_json j;
  j["rows"] = rows_;
  j["domain"] = domain_;
  j["hidden"] = hidden();
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : cells_) cells.push_back(c.histogram().to_json());
  j["cells"] = std::move(cells);
  j["w1"] = flat(w1_);
  j["b1"] = flat(b1_);
  j["w2"] = flat(w2_);
  j["b2"] = flat(b2_);
  return j;
}

namespace {

std::size_t cells_bytes(const std::vector<ColumnCells>& cells) {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.histogram().size_bytes();
  return n;
}

}  // namespace

std::size_t MadeModel::size_bytes() const { return parameter_count() * 4 + cells_bytes(cells_); }

void MadeEstimator::build(const Table& table) {
  if (table.column_count() > params_.max_columns) throw std::invalid_argument("made: too many columns for one-hot encoding");
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    if (table.stats(c).distinct > params_.max_domain) {
      throw std::invalid_argument("made: column '" + table.schema()[c].name + "' domain too large for one-hot budget");
    }
  }
  std::vector<ColumnCells> cells;
  std::vector<std::size_t> domain;
  auto make_cells = [&](std::size_t cap) {
    cells.clear();
    domain.clear();
    for (std::size_t c = 0; c < table.column_count(); ++c) {
      cells.push_back(ColumnCells::build(table.column(c), cap));
      domain.push_back(cells.back().size());
    }
  };
  auto cost = [&](std::size_t hidden) { return MadeModel::parameter_count_for(domain, hidden) * 4 + cells_bytes(cells); };

  make_cells(params_.max_domain);
  std::size_t hidden = std::max<std::size_t>(params_.hidden, 1);
  if (auto budget = params_.budget.resolve(table)) {
    while (hidden > 1 && cost(hidden) > *budget) --hidden;
    // Even one hidden unit is too big: coarsen the one-hot cells.
    while (cost(1) > *budget) {
      const std::size_t widest = *std::max_element(domain.begin(), domain.end());
      if (widest <= 1) break;
      const double ratio = static_cast<double>(*budget) / static_cast<double>(cost(1));
      make_cells(std::max<std::size_t>(1, std::min(widest - 1, static_cast<std::size_t>(static_cast<double>(widest) * ratio))));
    }
  }
  model_ = MadeModel(std::move(cells), hidden, table.row_count(), params_.seed);
  updates_ = 0;
  Rng rng(derive_seed(params_.seed, 0));
  loss_history_ = model_.train(model_.encode(table), params_.train, params_.train.epochs, rng);
}

Seconds MadeEstimator::update(const Table& new_table) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(derive_seed(params_.seed, ++updates_));
  const auto hist = model_.train(model_.encode(new_table), params_.train, params_.update_epochs, rng);
  loss_history_.insert(loss_history_.end(), hist.begin(), hist.end());
  model_.set_row_count(new_table.row_count());
  return std::chrono::steady_clock::now() - start;
}

ProgressiveResult MadeEstimator::estimate_with_error(const Query& query, std::uint64_t seed) const {
  return progressive_sample_estimate(model_, query, {params_.samples, seed});
}

double MadeEstimator::estimate(const Query& query, std::uint64_t seed) const {
  return estimate_with_error(query, seed).estimate;
}

nlohmann::ordered_json MadeEstimator::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = "made";
  j["version"] = 1;
  j["samples"] = params_.samples;
  j["network"] = model_.to_json();
  return j;
}

}  // namespace cardlab
