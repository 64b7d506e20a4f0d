#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "radarpose/harness.hpp"
#include "radarpose/nn/layers.hpp"
#include "radarpose/nn/tnet.hpp"

using namespace radarpose;
using nn::Mat;
using nn::ParamStore;

namespace {

Mat randn(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double s = 1.0) {
  std::normal_distribution<double> g(0.0, s);
  Mat m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng);
  return m;
}

void perturb(ParamStore& p, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += randn(p[i].rows(), p[i].cols(), rng, 0.1);
}

// Worst relative mismatch between analytic and central-difference gradients
// of L = sum(R .* f(x)), over every parameter and input entry.
double worst_gradient_error(const nn::Layer& layer, ParamStore& p, Mat x, std::mt19937_64& rng) {
  std::any cache;
  const Mat y = layer.forward(p, x, cache);
  const Mat r = randn(y.rows(), y.cols(), rng);
  auto grad = p.zeros_like();
  const Mat dx = layer.backward(p, cache, r, grad);
  auto loss = [&] {
    std::any c;
    return (layer.forward(p, x, c).array() * r.array()).sum();
  };
  double worst = 0.0;
  auto check = [&](Mat& m, const Mat& g) {
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      const double keep = m.data()[k];
      m.data()[k] = keep + 1e-5;
      const double up = loss();
      m.data()[k] = keep - 1e-5;
      const double down = loss();
      m.data()[k] = keep;
      const double num = (up - down) / 2e-5;
      const double err = std::abs(num - g.data()[k]) / std::max(1e-6, std::max(std::abs(num), std::abs(g.data()[k])));
      worst = std::max(worst, err);
    }
  };
  for (std::size_t i = 0; i < p.size(); ++i) check(p[i], grad[i]);
  check(x, dx);
  return worst;
}

// A Dense layer whose weight gradient is off by a factor of two.
class BrokenDense final : public nn::Layer {
 public:
  BrokenDense(ParamStore& p, std::mt19937_64& rng) : inner_(p, "broken", 3, 2, rng) {}
  Mat forward(const ParamStore& p, const Mat& x, std::any& cache) const override { return inner_.forward(p, x, cache); }
  Mat backward(const ParamStore& p, const std::any& cache, const Mat& dy, ParamStore& grad) const override {
    Mat dx = inner_.backward(p, cache, dy, grad);
    grad[inner_.weight_index()] *= 2.0;
    return dx;
  }

 private:
  nn::Dense inner_;
};

}  // namespace

TEST(Dense, ForwardMatchesLoops) {
  std::mt19937_64 rng(1);
  ParamStore p;
  nn::Dense d(p, "d", 3, 2, rng);
  perturb(p, rng);
  const Mat x = randn(4, 3, rng);
  std::any c;
  const Mat y = d.forward(p, x, c);
  const Mat& w = p[d.weight_index()];
  const Mat& b = p[d.bias_index()];
  for (int i = 0; i < 4; ++i)
    for (int o = 0; o < 2; ++o) {
      double s = b(0, o);
      for (int k = 0; k < 3; ++k) s += x(i, k) * w(o, k);
      EXPECT_NEAR(y(i, o), s, 1e-12);
    }
}

TEST(Dense, ZeroInitGivesZeroOutput) {
  std::mt19937_64 rng(1);
  ParamStore p;
  nn::Dense d(p, "d", 3, 5, rng, nn::Dense::Init::kZero);
  std::any c;
  EXPECT_TRUE(d.forward(p, randn(2, 3, rng), c).isZero(0.0));
}

TEST(Relu, ForwardAndSubgradient) {
  ParamStore p;
  nn::Relu r;
  Mat x(1, 3);
  x << -1.0, 0.0, 2.0;
  std::any c;
  const Mat y = r.forward(p, x, c);
  EXPECT_EQ(y(0, 0), 0.0);
  EXPECT_EQ(y(0, 2), 2.0);
  auto g = p.zeros_like();
  const Mat dx = r.backward(p, c, Mat::Ones(1, 3), g);
  EXPECT_EQ(dx(0, 0), 0.0);
  EXPECT_EQ(dx(0, 1), 0.0);
  EXPECT_EQ(dx(0, 2), 1.0);
}

TEST(RowMaxPool, PerSampleColumnMax) {
  ParamStore p;
  nn::RowMaxPool pool(2);
  Mat x(4, 2);
  x << 1, 5, 3, 2, -1, -4, -2, -3;
  std::any c;
  const Mat y = pool.forward(p, x, c);
  ASSERT_EQ(y.rows(), 2);
  EXPECT_EQ(y(0, 0), 3);
  EXPECT_EQ(y(0, 1), 5);
  EXPECT_EQ(y(1, 0), -1);
  EXPECT_EQ(y(1, 1), -3);
}

TEST(Conv2d, ForwardMatchesDirectConvolution) {
  std::mt19937_64 rng(2);
  ParamStore p;
  const nn::ImageShape in{2, 5, 4};
  nn::Conv2d conv(p, "c", in, 3, 3, rng);
  perturb(p, rng);
  const Mat x = randn(2, static_cast<Eigen::Index>(in.size()), rng);
  std::any cache;
  const Mat y = conv.forward(p, x, cache);
  ASSERT_EQ(y.cols(), 3 * 5 * 4);
  const Mat& w = p[0];
  const Mat& b = p[1];
  for (int s = 0; s < 2; ++s)
    for (int o = 0; o < 3; ++o)
      for (int r = 0; r < 5; ++r)
        for (int q = 0; q < 4; ++q) {
          double acc = b(0, o);
          for (int c = 0; c < 2; ++c)
            for (int dr = -1; dr <= 1; ++dr)
              for (int dq = -1; dq <= 1; ++dq) {
                const int rr = r + dr, qq = q + dq;
                if (rr < 0 || rr >= 5 || qq < 0 || qq >= 4) continue;
                acc += w(o, (c * 3 + dr + 1) * 3 + dq + 1) * x(s, (c * 5 + rr) * 4 + qq);
              }
          EXPECT_NEAR(y(s, (o * 5 + r) * 4 + q), acc, 1e-12);
        }
}

TEST(Conv2d, RejectsEvenKernel) {
  std::mt19937_64 rng(2);
  ParamStore p;
  EXPECT_THROW(nn::Conv2d(p, "c", {1, 4, 4}, 1, 2, rng), std::invalid_argument);
}

TEST(MaxPool2d, DropsRaggedEdge) {
  ParamStore p;
  nn::MaxPool2d pool({1, 5, 3}, 2);
  EXPECT_EQ(pool.output_shape().height, 2U);
  EXPECT_EQ(pool.output_shape().width, 1U);
  Mat x(1, 15);
  for (int i = 0; i < 15; ++i) x(0, i) = i;
  std::any c;
  const Mat y = pool.forward(p, x, c);
  ASSERT_EQ(y.cols(), 2);
  EXPECT_EQ(y(0, 0), 4);   // rows 0-1, cols 0-1
  EXPECT_EQ(y(0, 1), 10);  // rows 2-3, cols 0-1
}

TEST(TNet, FreshTransformIsIdentity) {
  std::mt19937_64 rng(3);
  ParamStore p;
  nn::TNet t(p, "t", 4, 6, {8, 8}, {8}, rng);
  const Mat x = randn(12, 4, rng);
  std::any c;
  EXPECT_TRUE(t.forward(p, x, c).isApprox(x, 1e-15));
  const Mat tr = t.transforms(p, x);
  ASSERT_EQ(tr.rows(), 2);
  for (int s = 0; s < 2; ++s)
    for (int k = 0; k < 16; ++k) EXPECT_EQ(tr(s, k), (k % 5 == 0) ? 1.0 : 0.0);
}

TEST(TNet, TransformIgnoresRowOrder) {
  std::mt19937_64 rng(3);
  ParamStore p;
  nn::TNet t(p, "t", 4, 6, {8, 8}, {8}, rng);
  perturb(p, rng);
  Mat x = randn(6, 4, rng);
  const Mat a = t.transforms(p, x);
  x.row(0).swap(x.row(5));
  x.row(1).swap(x.row(3));
  EXPECT_TRUE(t.transforms(p, x).isApprox(a, 1e-14));
}

TEST(Gradients, EveryLayerMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  {
    ParamStore p;
    nn::Dense d(p, "d", 4, 3, rng);
    perturb(p, rng);
    EXPECT_LT(worst_gradient_error(d, p, randn(5, 4, rng), rng), 1e-6);
  }
  {
    ParamStore p;
    nn::Conv2d c(p, "c", {2, 6, 4}, 2, 3, rng);
    perturb(p, rng);
    EXPECT_LT(worst_gradient_error(c, p, randn(2, 48, rng), rng), 1e-6);
  }
  {
    ParamStore p;
    nn::MaxPool2d m({2, 6, 4}, 2);
    EXPECT_LT(worst_gradient_error(m, p, randn(2, 48, rng), rng), 1e-6);
  }
  {
    ParamStore p;
    nn::TNet t(p, "t", 3, 5, {6, 6}, {6}, rng);
    perturb(p, rng);
    EXPECT_LT(worst_gradient_error(t, p, randn(10, 3, rng), rng), 1e-5);
  }
}

TEST(Gradients, BrokenLayerIsCaught) {
  std::mt19937_64 rng(5);
  ParamStore p;
  BrokenDense layer(p, rng);
  EXPECT_GT(worst_gradient_error(layer, p, randn(4, 3, rng), rng), 0.3);
}

TEST(Gradients, LibraryCheckPassesForSeveralSeeds) {
  for (std::uint64_t seed : {1U, 2U, 3U}) {
    const auto results = run_gradcheck(seed);
    EXPECT_EQ(results.size(), 10U);
    for (const auto& r : results) {
      EXPECT_GT(r.checked, 0U) << r.name;
      EXPECT_EQ(r.failed, 0U) << r.name << " max rel " << r.max_rel_error;
    }
  }
}

TEST(ParamStore, ShapesAndCounts) {
  ParamStore p;
  p.add("a", Mat::Ones(2, 3));
  p.add("b", Mat::Ones(1, 4));
  EXPECT_EQ(p.scalar_count(), 10U);
  const auto z = p.zeros_like();
  EXPECT_TRUE(p.same_shapes(z));
  EXPECT_TRUE(z[0].isZero(0.0));
  EXPECT_EQ(z.name(1), "b");
}
