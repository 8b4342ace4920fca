#include "cardlab/chow_liu.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace cardlab {

double mutual_information(const std::vector<int>& a, std::size_t ka, const std::vector<int>& b, std::size_t kb) {
  if (a.size() != b.size()) throw std::invalid_argument("mutual_information: length mismatch");
  const double n = static_cast<double>(a.size());
  if (a.empty()) return 0.0;
  std::vector<double> pa(ka, 0.0), pb(kb, 0.0);
  std::unordered_map<std::uint64_t, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[static_cast<std::size_t>(a[i])] += 1;
    pb[static_cast<std::size_t>(b[i])] += 1;
    joint[static_cast<std::uint64_t>(a[i]) * kb + static_cast<std::uint64_t>(b[i])] += 1;
  }
  // Sum in key order so the result does not depend on hash iteration order.
  std::vector<std::pair<std::uint64_t, double>> cells(joint.begin(), joint.end());
  std::sort(cells.begin(), cells.end());
  double mi = 0;
  for (const auto& [key, count] : cells) {
    const double pab = count / n;
    const double x = pa[key / kb] / n;
    const double y = pb[key % kb] / n;
    mi += pab * std::log(pab / (x * y));
  }
  return std::max(mi, 0.0);
}

ChowLiuModel ChowLiuModel::build(const Table& table, double alpha, std::size_t max_cells) {
  if (alpha < 0) throw std::invalid_argument("chow_liu: alpha must be >= 0");
  const std::size_t n = table.column_count();
  ChowLiuModel m;
  m.alpha_ = alpha;
  m.rows_ = table.row_count();
  std::vector<std::vector<int>> enc(n);
  for (std::size_t c = 0; c < n; ++c) {
    m.cells_.push_back(ColumnCells::build(table.column(c), max_cells));
    enc[c].reserve(m.rows_);
    for (Value v : table.column(c)) enc[c].push_back(static_cast<int>(m.cells_[c].cell_of(v)));
  }

  // Kruskal on descending MI; ties keep lexicographic (i, j) order.
  struct Edge {
    double mi;
    std::size_t i, j;
  };
  std::vector<Edge> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      candidates.push_back({mutual_information(enc[i], m.cells_[i].size(), enc[j], m.cells_[j].size()), i, j});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Edge& x, const Edge& y) { return x.mi > y.mi; });
  std::vector<std::size_t> uf(n);
  std::iota(uf.begin(), uf.end(), 0);
  auto find = [&](std::size_t x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : candidates) {
    const auto ri = find(e.i), rj = find(e.j);
    if (ri == rj) continue;
    uf[ri] = rj;
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }

  m.parent_.assign(n, kNoParent);
  m.position_.assign(n, 0);
  if (n > 0) {
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> bfs;
    bfs.push(0);
    seen[0] = true;
    while (!bfs.empty()) {
      const auto c = bfs.front();
      bfs.pop();
      m.position_[c] = m.order_.size();
      m.order_.push_back(c);
      auto nb = adj[c];
      std::sort(nb.begin(), nb.end());
      for (auto x : nb) {
        if (seen[x]) continue;
        seen[x] = true;
        m.parent_[x] = static_cast<int>(c);
        bfs.push(x);
      }
    }
  }

  m.cpt_.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto k = static_cast<Eigen::Index>(m.cells_[c].size());
    const Eigen::Index kp = m.parent_[c] == kNoParent ? 1 : static_cast<Eigen::Index>(m.cells_[static_cast<std::size_t>(m.parent_[c])].size());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, kp);
    for (std::size_t r = 0; r < m.rows_; ++r) {
      const Eigen::Index pc = m.parent_[c] == kNoParent ? 0 : enc[static_cast<std::size_t>(m.parent_[c])][r];
      counts(enc[c][r], pc) += 1;
    }
    Eigen::MatrixXd& t = m.cpt_[c];
    t.resize(k, kp);
    for (Eigen::Index p = 0; p < kp; ++p) {
      const double denom = counts.col(p).sum() + alpha * static_cast<double>(k);
      if (denom > 0) {
        t.col(p) = (counts.col(p).array() + alpha) / denom;
      } else {
        t.col(p).setConstant(1.0 / static_cast<double>(k));
      }
    }
  }
  return m;
}

void ChowLiuModel::conditionals(std::size_t pos, const Eigen::MatrixXi& sampled, Eigen::MatrixXd& probs) const {
  const auto col = order_[pos];
  const auto& t = cpt_[col];
  probs.resize(t.rows(), sampled.cols());
  if (parent_[col] == kNoParent) {
    probs.colwise() = t.col(0);
    return;
  }
  const auto ppos = static_cast<Eigen::Index>(position_[static_cast<std::size_t>(parent_[col])]);
  for (Eigen::Index s = 0; s < sampled.cols(); ++s) probs.col(s) = t.col(sampled(ppos, s));
}

std::vector<std::pair<std::size_t, std::size_t>> ChowLiuModel::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t c = 0; c < parent_.size(); ++c) {
    if (parent_[c] == kNoParent) continue;
    const auto p = static_cast<std::size_t>(parent_[c]);
    out.emplace_back(std::min(c, p), std::max(c, p));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t ChowLiuModel::size_bytes() const {
  std::size_t n = 0;
  for (const auto& t : cpt_) n += static_cast<std::size_t>(t.size()) * 4;
  for (const auto& c : cells_) n += c.histogram().size_bytes();
  return n;
}

nlohmann::ordered_json ChowLiuModel::to_json() const {
  nlohmann::ordered_json j;
  j["alpha"] = alpha_;
  j["rows"] = rows_;
  j["parents"] = parent_;
  j["order"] = order_;
  auto cols = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < cpt_.size(); ++c) {
    nlohmann::ordered_json cj;
    cj["cells"] = cells_[c].histogram().to_json();
    cj["cpt_shape"] = {cpt_[c].rows(), cpt_[c].cols()};
    cj["cpt"] = std::vector<double>(cpt_[c].data(), cpt_[c].data() + cpt_[c].size());
    cols.push_back(std::move(cj));
  }
  j["columns"] = std::move(cols);
  return j;
}

double bayes_enumerate_exact(const ChowLiuModel& model, const Query& query) {
  std::size_t total = 0;
  for (std::size_t c = 0; c < model.num_positions(); ++c) total += static_cast<std::size_t>(model.cpt(c).size());
  if (total > 1'000'000) throw std::length_error("bayes_enumerate_exact: region too large");

  const std::size_t n = model.num_positions();
  std::vector<Eigen::VectorXd> belief(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto col = model.column_at(pos);
    belief[col] = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(model.num_cells(pos)));
    if (const Predicate* p = query.find(col)) {
      if (p->kind == PredicateKind::kInvalid) return 0.0;
      for (Eigen::Index x = 0; x < belief[col].size(); ++x) belief[col][x] = model.cell_fraction(pos, static_cast<std::size_t>(x), *p);
    }
  }
  // Leaves first: fold each column's message into its parent's belief.
  double prob = 1.0;
  for (std::size_t pos = n; pos-- > 0;) {
    const auto col = model.column_at(pos);
    const int parent = model.parents()[col];
    if (parent == ChowLiuModel::kNoParent) {
      prob = model.cpt(col).col(0).dot(belief[col]);
    } else {
      const Eigen::VectorXd msg = model.cpt(col).transpose() * belief[col];
      belief[static_cast<std::size_t>(parent)].array() *= msg.array();
    }
  }
  return prob * static_cast<double>(model.row_count());
}

void BayesEstimator::build(const Table& table) {
  std::size_t cells = params_.max_cells;
  model_ = ChowLiuModel::build(table, params_.alpha, cells);
  const auto budget = params_.budget.resolve(table);
  // Shrink the per-column resolution until the tables fit.
  while (budget && model_.size_bytes() > *budget && cells > 1) {
    std::size_t widest = 1;
    for (std::size_t c = 0; c < table.column_count(); ++c) widest = std::max(widest, model_.cells(c).size());
    const double ratio = std::sqrt(static_cast<double>(*budget) / static_cast<double>(model_.size_bytes()));
    cells = std::min(widest - 1, static_cast<std::size_t>(static_cast<double>(widest) * ratio * 0.95));
    cells = std::max<std::size_t>(cells, 1);
    model_ = ChowLiuModel::build(table, params_.alpha, cells);
  }
}

ProgressiveResult BayesEstimator::estimate_with_error(const Query& query, std::uint64_t seed) const {
  return progressive_sample_estimate(model_, query, {params_.samples, seed});
}

double BayesEstimator::estimate(const Query& query, std::uint64_t seed) const {
  return estimate_with_error(query, seed).estimate;
}

nlohmann::ordered_json BayesEstimator::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = "bayes";
  j["version"] = 1;
  j["samples"] = params_.samples;
  j["network"] = model_.to_json();
  return j;
}

}  // namespace cardlab
