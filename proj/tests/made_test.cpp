#include <gtest/gtest.h>

#include <cmath>

#include "cardlab/made.hpp"
#include "test_util.hpp"

namespace cardlab {
namespace {

// Column chain: x0 skewed over 0..d-1, each next column copies the previous
// one with probability 0.8.
Table chain_table(std::size_t cols, std::size_t d, std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<Value>> data(cols, std::vector<Value>(rows));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("c" + std::to_string(c));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto a = uniform_index(rng, d), b = uniform_index(rng, d);
    data[0][r] = static_cast<Value>(std::min(a, b));
    for (std::size_t c = 1; c < cols; ++c) {
      data[c][r] = bernoulli(rng, 0.8) ? data[c - 1][r] : static_cast<Value>(uniform_index(rng, d));
    }
  }
  return Table::numeric(names, data);
}

MadeModel model_for(const Table& t, std::size_t hidden, std::uint64_t seed) {
  std::vector<ColumnCells> cells;
  for (std::size_t c = 0; c < t.column_count(); ++c) cells.push_back(ColumnCells::build(t.column(c), 256));
  return MadeModel(std::move(cells), hidden, t.row_count(), seed);
}

TEST(MadeTest, MasksAreAutoregressive) {
  const Table t = chain_table(4, 5, 500, 1);
  const auto m = model_for(t, 17, 2);
  const Eigen::MatrixXd path = m.mask2() * m.mask1();  // output x input connectivity
  Eigen::Index oi = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto di = static_cast<Eigen::Index>(m.num_cells(i));
    Eigen::Index oj = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const auto dj = static_cast<Eigen::Index>(m.num_cells(j));
      const double links = path.block(oi, oj, di, dj).sum();
      if (j >= i) {
        EXPECT_EQ(links, 0.0) << i << "," << j;
      } else {
        EXPECT_GT(links, 0.0) << i << "," << j;
      }
      oj += dj;
    }
    oi += di;
  }
  EXPECT_EQ(m.parameter_count(), MadeModel::parameter_count_for({5, 5, 5, 5}, 17));
}

TEST(MadeTest, ConditionalIgnoresLaterColumns) {
  const Table t = chain_table(3, 4, 500, 3);
  const auto m = model_for(t, 8, 4);
  const std::vector<int> a{1, 2, 0}, b{1, 2, 3};
  EXPECT_EQ(m.conditional(a, 2), m.conditional(b, 2));
  const std::vector<int> c{1, 0, 0};
  EXPECT_NE(m.conditional(a, 2), m.conditional(c, 2));
}

TEST(MadeTest, JointSumsToOne) {
  const Table t = chain_table(3, 3, 300, 5);
  auto m = model_for(t, 6, 6);
  Rng rng(7);
  m.train(m.encode(t), MadeTrainConfig{}, 2, rng);
  double total = 0;
  for (int x = 0; x < 3; ++x) {
    for (int y = 0; y < 3; ++y) {
      for (int z = 0; z < 3; ++z) {
        const std::vector<int> v{x, y, z};
        total += m.conditional(v, 0)[x] * m.conditional(v, 1)[y] * m.conditional(v, 2)[z];
      }
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(MadeTest, GradientsMatchFiniteDifferences) {
  const Table t = chain_table(3, 4, 40, 8);
  auto m = model_for(t, 5, 9);
  m.b1().setConstant(0.1);
  const auto data = m.encode(t);
  const auto g = m.gradients(data);
  const double h = 1e-6;
  auto check = [&](auto& param, const auto& grad) {
    for (Eigen::Index k = 0; k < param.size(); k += 3) {
      const double old = param.data()[k];
      param.data()[k] = old + h;
      const double up = m.loss(data);
      param.data()[k] = old - h;
      const double down = m.loss(data);
      param.data()[k] = old;
      ASSERT_NEAR(grad.data()[k], (up - down) / (2 * h), 1e-6) << k;
    }
  };
  check(m.b2(), g.b2);
  check(m.b1(), g.b1);
  // Masked-out weights get no gradient.
  for (Eigen::Index k = 0; k < m.w1().size(); ++k) {
    if (m.mask1().data()[k] == 0) { ASSERT_EQ(g.w1.data()[k], 0.0); }
  }
  check(m.w1(), g.w1);
  check(m.w2(), g.w2);
}

TEST(MadeTest, TrainingLowersLikelihoodLoss) {
  const Table t = chain_table(4, 16, 10000, 10);
  auto m = model_for(t, 64, 11);
  const auto data = m.encode(t);
  const double before = m.loss(data);
  Rng rng(12);
  const auto hist = m.train(data, MadeTrainConfig{}, 5, rng);
  ASSERT_EQ(hist.size(), 5u);
  EXPECT_LE(hist.back(), 0.8 * before) << before << " -> " << hist.back();
}

TEST(MadeEstimatorTest, BudgetShrinksHiddenLayer) {
  const Table t = testing::synth(20000, 100, 0.5, 13);
  MadeParams p;
  p.train.epochs = 1;
  MadeEstimator est(p);
  est.build(t);
  EXPECT_LE(est.size_bytes(), *Budget{}.resolve(t));
  EXPECT_LT(est.model().hidden(), 64u);
  EXPECT_FALSE(est.deterministic());
}

TEST(MadeEstimatorTest, RejectsWideDomains) {
  const Table t = testing::synth(5000, 1000, 0.5, 14, 0.0);
  MadeParams p;
  p.max_domain = 100;
  MadeEstimator est(p);
  EXPECT_THROW(est.build(t), std::invalid_argument);
}

TEST(MadeEstimatorTest, UpdateAppendsLossAndSnapshotIsFrozen) {
  const Table t = testing::synth(5000, 50, 0.5, 15);
  MadeParams p;
  p.train.epochs = 2;
  p.update_epochs = 3;
  p.budget = Budget::unlimited();
  MadeEstimator est(p);
  est.build(t);
  ASSERT_EQ(est.loss_history().size(), 2u);
  const auto snap = est.snapshot();
  const Query q{{Predicate::closed(0, 0, 10), Predicate::closed(1, 5, 20)}};
  const double before = snap->estimate(q, 1);
  est.update(testing::synth(5000, 50, 0.0, 16));
  EXPECT_EQ(est.loss_history().size(), 5u);
  EXPECT_EQ(snap->estimate(q, 1), before);
  EXPECT_EQ(est.estimate(Query{}), 5000.0);
}

}  // namespace
}  // namespace cardlab
