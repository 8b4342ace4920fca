#include "cardlab/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cardlab/sampling.hpp"

namespace cardlab {

Eigen::VectorXd QueryFeatures::vector() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(2 * lo.size() + 3));
  for (std::size_t i = 0; i < lo.size(); ++i) {
    v[static_cast<Eigen::Index>(2 * i)] = lo[i];
    v[static_cast<Eigen::Index>(2 * i + 1)] = hi[i];
  }
  const auto base = static_cast<Eigen::Index>(2 * lo.size());
  v[base] = log_avi;
  v[base + 1] = log_min_sel;
  v[base + 2] = log_ebo;
  return v;
}

FeatureContext FeatureContext::build(const Table& table, std::size_t buckets_per_column) {
  FeatureContext ctx;
  ctx.hists = build_histograms(table, buckets_per_column);
  for (std::size_t c = 0; c < table.column_count(); ++c) ctx.stats.push_back(table.stats(c));
  ctx.rows = table.row_count();
  return ctx;
}

std::size_t FeatureContext::size_bytes() const {
  std::size_t n = 0;
  for (const auto& h : hists) n += h.size_bytes();
  return n + stats.size() * 2 * 4;
}

double exponential_backoff(std::vector<double> selectivities) {
  std::sort(selectivities.begin(), selectivities.end());
  double out = 1.0;
  double exponent = 1.0;
  for (std::size_t k = 0; k < std::min<std::size_t>(4, selectivities.size()); ++k) {
    out *= std::pow(selectivities[k], exponent);
    exponent /= 2;
  }
  return out;
}

QueryFeatures featurize_query(const Query& query, const FeatureContext& ctx) {
  const std::size_t n = ctx.stats.size();
  QueryFeatures f;
  f.lo.assign(n, 0.0);
  f.hi.assign(n, 1.0);
  std::vector<double> sels;
  for (const auto& p : query.predicates) {
    const auto& s = ctx.stats.at(p.col);
    auto norm = [&](Value v) { return s.size > 0 ? (v - s.min) / s.size : 0.0; };
    double lo = p.lo ? norm(*p.lo) : 0.0;
    double hi = p.hi ? norm(*p.hi) : 1.0;
    if (p.kind != PredicateKind::kInvalid) {
      lo = std::clamp(lo, 0.0, 1.0);
      hi = std::clamp(hi, 0.0, 1.0);
    }
    f.lo[p.col] = lo;
    f.hi[p.col] = hi;
    sels.push_back(ctx.hists.at(p.col).selectivity(p));
  }
  if (!sels.empty()) {
    f.avi = std::accumulate(sels.begin(), sels.end(), 1.0, std::multiplies<>());
    f.min_sel = *std::min_element(sels.begin(), sels.end());
    f.ebo = exponential_backoff(sels);
  }
  const double floor = ctx.rows > 0 ? 1.0 / static_cast<double>(ctx.rows) : 1.0;
  f.log_avi = std::log(std::max(f.avi, floor));
  f.log_min_sel = std::log(std::max(f.min_sel, floor));
  f.log_ebo = std::log(std::max(f.ebo, floor));
  return f;
}

namespace {

struct TreeBuilder {
  const std::vector<std::vector<int>>& bins;  // [feature][sample]
  const std::vector<std::vector<double>>& thresholds;
  const Eigen::VectorXd& residual;
  const GbtConfig& cfg;
  GbtModel::Tree tree;

  int grow(std::vector<int>& idx, std::size_t depth) {
    const int id = static_cast<int>(tree.size());
    tree.emplace_back();
    double sum = 0;
    for (int i : idx) sum += residual[i];
    const double n = static_cast<double>(idx.size());
    tree[static_cast<std::size_t>(id)].value = idx.empty() ? 0.0 : sum / n;
    if (depth >= cfg.max_depth || idx.size() < 2 * cfg.min_leaf) return id;

    double best_gain = 1e-12;
    int best_f = -1;
    std::size_t best_t = 0;
    const double parent_score = sum * sum / n;
    for (std::size_t f = 0; f < bins.size(); ++f) {
      const std::size_t nb = thresholds[f].size() + 1;
      if (nb < 2) continue;
      std::vector<double> s(nb, 0.0);
      std::vector<std::size_t> c(nb, 0);
      for (int i : idx) {
        const auto b = static_cast<std::size_t>(bins[f][static_cast<std::size_t>(i)]);
        s[b] += residual[i];
        ++c[b];
      }
      double sl = 0;
      std::size_t cl = 0;
      for (std::size_t t = 0; t + 1 < nb; ++t) {
        sl += s[t];
        cl += c[t];
        const std::size_t cr = idx.size() - cl;
        if (cl < cfg.min_leaf || cr < cfg.min_leaf) continue;
        const double sr = sum - sl;
        const double gain = sl * sl / static_cast<double>(cl) + sr * sr / static_cast<double>(cr) - parent_score;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          best_t = t;
        }
      }
    }
    if (best_f < 0) return id;

    std::vector<int> left, right;
    for (int i : idx) (bins[static_cast<std::size_t>(best_f)][static_cast<std::size_t>(i)] <= static_cast<int>(best_t) ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    tree[static_cast<std::size_t>(id)].feature = best_f;
    tree[static_cast<std::size_t>(id)].threshold = thresholds[static_cast<std::size_t>(best_f)][best_t];
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree[static_cast<std::size_t>(id)].left = l;
    tree[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

double tree_predict(const GbtModel::Tree& tree, const Eigen::VectorXd& x) {
  std::size_t node = 0;
  while (tree[node].feature >= 0) {
    node = static_cast<std::size_t>(x[tree[node].feature] <= tree[node].threshold ? tree[node].left : tree[node].right);
  }
  return tree[node].value;
}

std::size_t tree_depth(const GbtModel::Tree& tree, std::size_t node) {
  if (tree[node].feature < 0) return 0;
  return 1 + std::max(tree_depth(tree, static_cast<std::size_t>(tree[node].left)), tree_depth(tree, static_cast<std::size_t>(tree[node].right)));
}

}  // namespace

GbtModel GbtModel::train(const Eigen::MatrixXd& X_in, const Eigen::VectorXd& y_in, const GbtConfig& cfg) {
  if (X_in.rows() != y_in.size()) throw std::invalid_argument("gbt: feature/label count mismatch");
  const auto N = static_cast<std::size_t>(X_in.rows());
  const auto F = static_cast<std::size_t>(X_in.cols());
  GbtModel m;
  m.shrinkage_ = cfg.shrinkage;
  if (N == 0) return m;

  // Canonical sample order makes every floating-point sum order-independent.
  std::vector<Eigen::Index> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index f = 0; f < X_in.cols(); ++f) {
      if (X_in(a, f) != X_in(b, f)) return X_in(a, f) < X_in(b, f);
    }
    return y_in[a] < y_in[b];
  });
  Eigen::MatrixXd X(X_in.rows(), X_in.cols());
  Eigen::VectorXd y(y_in.size());
  for (std::size_t i = 0; i < N; ++i) {
    X.row(static_cast<Eigen::Index>(i)) = X_in.row(perm[i]);
    y[static_cast<Eigen::Index>(i)] = y_in[perm[i]];
  }

  std::vector<std::vector<double>> thresholds(F);
  std::vector<std::vector<int>> bins(F, std::vector<int>(N));
  const std::size_t grid = std::max<std::size_t>(cfg.grid, 2);
  for (std::size_t f = 0; f < F; ++f) {
    std::vector<double> col(X.col(static_cast<Eigen::Index>(f)).data(), X.col(static_cast<Eigen::Index>(f)).data() + N);
    std::sort(col.begin(), col.end());
    for (std::size_t q = 1; q < grid; ++q) thresholds[f].push_back(col[q * N / grid]);
    thresholds[f].erase(std::unique(thresholds[f].begin(), thresholds[f].end()), thresholds[f].end());
    // A threshold at the maximum separates nothing.
    if (!thresholds[f].empty() && thresholds[f].back() >= col.back()) thresholds[f].pop_back();
    for (std::size_t i = 0; i < N; ++i) {
      const double x = X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
      bins[f][i] = static_cast<int>(std::lower_bound(thresholds[f].begin(), thresholds[f].end(), x) - thresholds[f].begin());
    }
  }

  m.base_ = y.mean();
  Eigen::VectorXd pred = Eigen::VectorXd::Constant(y.size(), m.base_);
  Eigen::VectorXd residual = y - pred;
  m.loss_.push_back(residual.squaredNorm() / static_cast<double>(N));
  std::size_t bytes = 0;
  for (std::size_t t = 0; t < cfg.trees; ++t) {
    TreeBuilder builder{bins, thresholds, residual, cfg, {}};
    std::vector<int> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    builder.grow(idx, 0);
    const std::size_t tree_bytes = builder.tree.size() * kNodeBytes;
    if (cfg.max_bytes && bytes + tree_bytes > *cfg.max_bytes) break;
    bytes += tree_bytes;
    for (std::size_t i = 0; i < N; ++i) {
      pred[static_cast<Eigen::Index>(i)] += cfg.shrinkage * tree_predict(builder.tree, X.row(static_cast<Eigen::Index>(i)).transpose());
    }
    residual = y - pred;
    m.loss_.push_back(residual.squaredNorm() / static_cast<double>(N));
    m.trees_.push_back(std::move(builder.tree));
  }
  return m;
}

double GbtModel::predict(const Eigen::VectorXd& x) const {
  double out = 0;
  for (const auto& t : trees_) out += tree_predict(t, x);
  return base_ + shrinkage_ * out;
}

std::size_t GbtModel::depth(std::size_t tree) const { return tree_depth(trees_.at(tree), 0); }

std::size_t GbtModel::size_bytes() const {
  std::size_t n = 4;  // base score
  for (const auto& t : trees_) n += t.size() * kNodeBytes;
  return n;
}

nlohmann::ordered_json GbtModel::to_json() const {
  nlohmann::ordered_json j;
  j["base"] = base_;
  j["shrinkage"] = shrinkage_;
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : trees_) {
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : t) nodes.push_back({n.feature, n.threshold, n.value, n.left, n.right});
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j;
}

Eigen::VectorXd log_selectivity_labels(const std::vector<LabeledQuery>& labeled, std::size_t rows) {
  const double floor = rows > 0 ? 1.0 / static_cast<double>(rows) : 1.0;
  Eigen::VectorXd y(static_cast<Eigen::Index>(labeled.size()));
  for (std::size_t i = 0; i < labeled.size(); ++i) y[static_cast<Eigen::Index>(i)] = std::log(std::max(labeled[i].selectivity, floor));
  return y;
}

GbtModel train_gbt(const std::vector<LabeledQuery>& labeled, const FeatureContext& ctx, const GbtConfig& cfg) {
  if (labeled.empty()) throw std::invalid_argument("gbt: no training queries");
  const auto F = static_cast<Eigen::Index>(2 * ctx.stats.size() + 3);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(labeled.size()), F);
  for (std::size_t i = 0; i < labeled.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = featurize_query(labeled[i].query, ctx).vector().transpose();
  return GbtModel::train(X, log_selectivity_labels(labeled, ctx.rows), cfg);
}

double estimate_gbt(const GbtModel& model, const FeatureContext& ctx, const Query& query) {
  const double rows = static_cast<double>(ctx.rows);
  const double est = std::exp(model.predict(featurize_query(query, ctx).vector())) * rows;
  return std::isfinite(est) ? std::clamp(est, 0.0, rows) : rows;
}

std::vector<LabeledQuery> GbtEstimator::sample_labels(const Table& table, const std::vector<Query>& queries, double rate,
                                                      std::uint64_t seed) {
  Rng rng(seed);
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(rate * static_cast<double>(table.row_count()))));
  const Table sample = table.select_rows(sample_rows_without_replacement(table.row_count(), m, rng));
  const double rows = static_cast<double>(table.row_count());
  std::vector<LabeledQuery> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    const double sel = static_cast<double>(exact_count(sample, q)) / static_cast<double>(sample.row_count());
    out.push_back({q, static_cast<std::uint64_t>(std::llround(sel * rows)), sel});
  }
  return out;
}

void GbtEstimator::fit(const Table& table, const std::vector<LabeledQuery>& training) {
  GbtConfig cfg = params_.model;
  const auto budget = params_.budget.resolve(table);
  if (!budget) {
    ctx_ = FeatureContext::build(table, params_.hist_buckets);
    model_ = train_gbt(training, ctx_, cfg);
    return;
  }
  // A third of the budget for the feature histograms, the rest for trees.
  const std::size_t stats_bytes = table.column_count() * 8;
  const std::size_t hist_budget = *budget / 3 > stats_bytes ? *budget / 3 - stats_bytes : 0;
  ctx_ = FeatureContext::build(table, buckets_within_budget(table.column_count(), params_.hist_buckets, hist_budget));
  const std::size_t fixed = ctx_.size_bytes() + 4;
  cfg.max_bytes = *budget > fixed ? *budget - fixed : 0;
  // When the default ensemble does not fit, trade depth for tree count and
  // raise the shrinkage so that the fewer trees still close most of the gap.
  const std::size_t node_budget = *cfg.max_bytes / GbtModel::kNodeBytes;
  for (std::size_t depth = cfg.max_depth; depth >= 1; --depth) {
    const std::size_t full = (std::size_t{2} << depth) - 1;
    const std::size_t fit = node_budget / full;
    if (fit >= cfg.trees || fit >= 16 || depth == 1) {
      if (fit < cfg.trees) {
        cfg.max_depth = depth;
        cfg.trees = std::max<std::size_t>(fit, 1);
        cfg.shrinkage = std::max(cfg.shrinkage, 1 - std::pow(0.05, 1.0 / static_cast<double>(cfg.trees)));
      }
      break;
    }
  }
  model_ = train_gbt(training, ctx_, cfg);
}

void GbtEstimator::build(const Table& table) {
  WorkloadConfig wc = params_.workload;
  wc.n_queries = params_.train_queries;
  wc.seed = derive_seed(params_.seed, 0);
  updates_ = 0;
  fit(table, label(table, gen_workload(table, wc)));
}

void GbtEstimator::build(const Table& table, const std::vector<LabeledQuery>& training) {
  updates_ = 0;
  fit(table, training);
}

double GbtEstimator::estimate(const Query& query, std::uint64_t) const { return estimate_gbt(model_, ctx_, query); }

Seconds GbtEstimator::update(const Table& new_table) {
  const auto start = std::chrono::steady_clock::now();
  ++updates_;
  WorkloadConfig wc = params_.workload;
  wc.n_queries = params_.train_queries;
  wc.seed = derive_seed(params_.seed, 2 * updates_);
  const auto labeled = sample_labels(new_table, gen_workload(new_table, wc), params_.update_sample_rate,
                                     derive_seed(params_.seed, 2 * updates_ + 1));
  fit(new_table, labeled);
  return std::chrono::steady_clock::now() - start;
}

nlohmann::ordered_json GbtEstimator::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = "gbt";
  j["version"] = 1;
  j["rows"] = ctx_.rows;
  auto hists = nlohmann::ordered_json::array();
  for (const auto& h : ctx_.hists) hists.push_back(h.to_json());
  j["histograms"] = std::move(hists);
  j["ensemble"] = model_.to_json();
  return j;
}

}  // namespace cardlab
