// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <gtest/gtest.h>

#include "lunet/error.hpp"
#include "lunet/gradcheck.hpp"
#include "lunet/layers.hpp"
#include "oracles.hpp"

using namespace lunet;
using namespace lunet::testing;

namespace {

Tensor seq(std::initializer_list<double> values) {
  return Tensor({1, values.size(), 1}, std::vector<double>(values));
}

void expect_near_all(const Tensor &got, const Tensor &want, double tol) {
  ASSERT_EQ(got.shape(), want.shape());
  for (std::size_t i = 0; i < got.size(); ++i)
    EXPECT_NEAR(got[i], want[i], tol) << "at flat index " << i;
}

} // namespace

// --- conv1d ----------------------------------------------------------------

TEST(Conv1D, ShiftedIdentityKernel) {
  Tensor y = conv1d_forward(seq({1, 2, 3, 4}), Tensor({1, 1, 2}, {1.0, 0.0}),
                            Tensor({1}, 0.0));
  EXPECT_EQ(y, seq({1, 2, 3}));
}

TEST(Conv1D, SummingKernel) {
  Tensor y = conv1d_forward(seq({1, 2, 3, 4}), Tensor({1, 1, 2}, {1.0, 1.0}),
                            Tensor({1}, 0.0));
  EXPECT_EQ(y, seq({3, 5, 7}));
}

TEST(Conv1D, RejectsTooShortInput) {
  EXPECT_THROW(conv1d_forward(seq({1, 2}), Tensor({1, 1, 3}, 1.0),
                              Tensor({1}, 0.0)),
               ShapeError);
  EXPECT_THROW(conv1d_forward(Tensor({1, 4, 2}), Tensor({1, 1, 3}, 1.0),
                              Tensor({1}, 0.0)),
               ShapeError);
}

TEST(Conv1D, MatchesDirectSummationOracle) {
  Rng rng(101);
  for (std::size_t m : {2u, 3u, 5u}) {
    Tensor x = rng_normal(rng, {2, 16, 3}, 0.0, 1.0);
    Tensor f = rng_normal(rng, {4, 3, m}, 0.0, 1.0);
    Tensor b = rng_normal(rng, {4}, 0.0, 1.0);
    Tensor y = conv1d_forward(x, f, b);
    EXPECT_EQ(y.shape(), (Shape{2, 16 - m + 1, 4}));
    expect_near_all(y, oracle_conv1d(x, f, b), 1e-12);
  }
}

// --- maxpool ---------------------------------------------------------------

TEST(MaxPool1D, Examples) {
  EXPECT_EQ(maxpool1d_forward(seq({1, 3, 2, 5}), 2), seq({3, 5}));
  EXPECT_EQ(maxpool1d_forward(seq({7}), 1), seq({7}));
  EXPECT_EQ(maxpool1d_forward(seq({1, 2, 3}), 2), seq({2}));
  EXPECT_THROW(maxpool1d_forward(seq({1}), 2), ShapeError);
}

TEST(MaxPool1D, TieSendsGradientToFirstMaximum) {
  MaxPool1D pool(2);
  pool.forward(seq({4, 4, 1, 1}), Mode::train);
  Tensor dx = pool.backward(seq({1, 1}));
  EXPECT_EQ(dx, seq({1, 0, 1, 0}));
}

TEST(MaxPool1D, MatchesWindowOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = rng_normal(rng, {3, 11, 2}, 0.0, 1.0);
    expect_near_all(maxpool1d_forward(x, 3), oracle_maxpool(x, 3), 0.0);
  }
}

// --- batchnorm -------------------------------------------------------------

TEST(BatchNorm, NormalizesColumn) {
  BatchNormState state{Tensor({1}, 0.0), Tensor({1}, 1.0), 0.99, 1e-5};
  Tensor y = batchnorm_forward(Tensor({3, 1}, {1.0, 2.0, 3.0}),
                               Tensor({1}, 1.0), Tensor({1}, 0.0), state,
                               Mode::train);
  EXPECT_NEAR(y[0], -1.2247356859083902, 1e-12);
  EXPECT_NEAR(y[1], 0.0, 1e-12);
  EXPECT_NEAR(y[2], 1.2247356859083902, 1e-12);
  // running <- 0.99 running + 0.01 batch
  EXPECT_NEAR(state.running_mean[0], 0.02, 1e-15);
  EXPECT_NEAR(state.running_var[0], 0.99 + 0.01 * (2.0 / 3.0), 1e-15);
}

TEST(BatchNorm, ConstantColumnMapsToZero) {
  BatchNormState state{Tensor({1}, 0.0), Tensor({1}, 1.0), 0.99, 1e-5};
  Tensor y = batchnorm_forward(Tensor({3, 1}, 5.0), Tensor({1}, 1.0),
                               Tensor({1}, 0.0), state, Mode::train);
  for (double v : y.values())
    EXPECT_EQ(v, 0.0);
}

TEST(BatchNorm, AffineOnZeroNormalized) {
  BatchNormState state{Tensor({1}, 0.0), Tensor({1}, 1.0), 0.99, 1e-5};
  Tensor y = batchnorm_forward(Tensor({3, 1}, 5.0), Tensor({1}, 2.0),
                               Tensor({1}, 1.0), state, Mode::train);
  for (double v : y.values())
    EXPECT_EQ(v, 1.0);
}

TEST(BatchNorm, TrainNeedsTwoRows) {
  BatchNormState state{Tensor({2}, 0.0), Tensor({2}, 1.0), 0.99, 1e-5};
  EXPECT_THROW(batchnorm_forward(Tensor({1, 2}, 1.0), Tensor({2}, 1.0),
                                 Tensor({2}, 0.0), state, Mode::train),
               ShapeError);
  EXPECT_NO_THROW(batchnorm_forward(Tensor({1, 2}, 1.0), Tensor({2}, 1.0),
                                    Tensor({2}, 0.0), state, Mode::infer));
}

TEST(BatchNorm, InferUsesRunningStatistics) {
  BatchNormState state{Tensor({1}, 3.0), Tensor({1}, 4.0), 0.99, 1e-5};
  Tensor y = batchnorm_forward(Tensor({2, 1}, {3.0, 5.0}), Tensor({1}, 1.0),
                               Tensor({1}, 0.0), state, Mode::infer);
  EXPECT_NEAR(y[0], 0.0, 1e-15);
  EXPECT_NEAR(y[1], 2.0 / std::sqrt(4.0 + 1e-5), 1e-15);
  EXPECT_EQ(state.running_mean[0], 3.0);
}

TEST(BatchNorm, TrainOutputHasZeroMeanUnitVariance) {
  Rng rng(17);
  for (std::size_t batch : {16u, 32u, 64u}) {
    Tensor x = rng_normal(rng, {batch, 5}, 3.0, 2.5);
    BatchNormState state{Tensor({5}, 0.0), Tensor({5}, 1.0), 0.99, 1e-5};
    Tensor y = batchnorm_forward(x, Tensor({5}, 1.0), Tensor({5}, 0.0), state,
                                 Mode::train);
    for (std::size_t c = 0; c < 5; ++c) {
      double mean = 0.0, var = 0.0;
      for (std::size_t r = 0; r < batch; ++r)
        mean += y.at(r, c);
      mean /= static_cast<double>(batch);
      for (std::size_t r = 0; r < batch; ++r)
        var += (y.at(r, c) - mean) * (y.at(r, c) - mean);
      var /= static_cast<double>(batch);
      EXPECT_LT(std::abs(mean), 1e-10);
      EXPECT_LT(std::abs(var - 1.0), 1e-3);
    }
  }
}

// --- lstm ------------------------------------------------------------------

namespace {

LayerParams zero_lstm_params(std::size_t in, std::size_t cells) {
  Lstm l(in, cells, true);
  return l.params();
}

LayerParams random_lstm_params(Rng &rng, std::size_t in, std::size_t cells) {
  Lstm l(in, cells, true);
  l.params().value("U") = rng_normal(rng, {in, 4 * cells}, 0.0, 0.5);
  l.params().value("W") = rng_normal(rng, {cells, 4 * cells}, 0.0, 0.5);
  l.params().value("b") = rng_normal(rng, {4 * cells}, 0.0, 0.5);
  return l.params();
}

} // namespace

TEST(LstmStep, ZeroWeightsZeroState) {
  auto params = zero_lstm_params(2, 3);
  LstmState state{Tensor({1, 3}, 0.0), Tensor({1, 3}, 0.0)};
  auto [h, next] = lstm_step(Tensor({1, 2}, 0.7), state, params);
  for (double v : h.values())
    EXPECT_EQ(v, 0.0);
  for (double v : next.s.values())
    EXPECT_EQ(v, 0.0);
}

TEST(LstmStep, ZeroWeightsUnitState) {
  auto params = zero_lstm_params(2, 1);
  LstmState state{Tensor({1, 1}, 0.0), Tensor({1, 1}, 1.0)};
  auto [h, next] = lstm_step(Tensor({1, 2}, 0.3), state, params);
  EXPECT_NEAR(next.s[0], 0.5, 1e-15);
  EXPECT_NEAR(h[0], 0.23105857863000487, 1e-15);
}

TEST(LstmStep, RejectsMismatchedInput) {
  auto params = zero_lstm_params(4, 2);
  LstmState state{Tensor({1, 2}, 0.0), Tensor({1, 2}, 0.0)};
  EXPECT_THROW(lstm_step(Tensor({1, 3}, 0.0), state, params), ShapeError);
}

TEST(LstmStep, MatchesScalarOracle) {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    auto params = random_lstm_params(rng, 3, 4);
    LstmState state{rng_normal(rng, {2, 4}, 0.0, 1.0),
                    rng_normal(rng, {2, 4}, 0.0, 1.0)};
    Tensor x = rng_normal(rng, {2, 3}, 0.0, 1.0);
    auto [h, next] = lstm_step(x, state, params);
    auto [h_ref, s_ref] = oracle_lstm_step(x, state.h, state.s, params);
    expect_near_all(h, h_ref, 1e-12);
    expect_near_all(next.s, s_ref, 1e-12);
  }
}

TEST(LstmForward, SingleStepEqualsLstmStep) {
  Rng rng(29);
  auto params = random_lstm_params(rng, 2, 3);
  Tensor x = rng_normal(rng, {4, 1, 2}, 0.0, 1.0);
  Tensor y = lstm_forward(x, params, false);
  LstmState zero{Tensor({4, 3}, 0.0), Tensor({4, 3}, 0.0)};
  auto [h, next] = lstm_step(x.reshaped({4, 2}), zero, params);
  EXPECT_EQ(y, h);
}

TEST(LstmForward, ZeroWeightsGiveZeroOutput) {
  Rng rng(31);
  Tensor y = lstm_forward(rng_normal(rng, {2, 5, 3}, 0.0, 1.0),
                          zero_lstm_params(3, 4), true);
  for (double v : y.values())
    EXPECT_EQ(v, 0.0);
}

TEST(LstmForward, SequencesEqualIteratedSteps) {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    auto params = random_lstm_params(rng, 3, 5);
    const std::size_t batch = 2, steps = 6;
    Tensor x = rng_normal(rng, {batch, steps, 3}, 0.0, 1.0);
    Tensor seq_out = lstm_forward(x, params, true);
    LstmState state{Tensor({batch, 5}, 0.0), Tensor({batch, 5}, 0.0)};
    for (std::size_t t = 0; t < steps; ++t) {
      Tensor x_t({batch, 3});
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < 3; ++c)
          x_t.at(b, c) = x.at(b, t, c);
      auto [h, next] = lstm_step(x_t, state, params);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t j = 0; j < 5; ++j)
          EXPECT_EQ(seq_out.at(b, t, j), h.at(b, j));
      state = next;
      if (t == steps - 1)
        EXPECT_EQ(lstm_forward(x, params, false), h);
    }
  }
}

TEST(LstmForward, RejectsEmptyOrMisshapedInput) {
  EXPECT_THROW(lstm_forward(Tensor({2, 3}), zero_lstm_params(3, 2), true),
               ShapeError);
  EXPECT_THROW(Tensor({2, 0, 3}), ShapeError);
}

// --- dropout ---------------------------------------------------------------

TEST(Dropout, InferIsIdentity) {
  Rng rng(41);
  Tensor x = rng_normal(rng, {4, 6}, 0.0, 1.0);
  EXPECT_EQ(dropout_forward(x, 0.5, Mode::infer, rng), x);
  EXPECT_EQ(dropout_forward(x, 0.0, Mode::train, rng), x);
  Dropout layer(0.5, 3);
  EXPECT_EQ(layer.forward(x, Mode::infer), x);
}

TEST(Dropout, InvertedScalingPreservesExpectation) {
  Rng rng(43);
  Tensor x({100000}, 1.0);
  Tensor y = dropout_forward(x, 0.5, Mode::train, rng);
  double mean = 0.0;
  for (double v : y.values()) {
    EXPECT_TRUE(v == 0.0 || v == 2.0);
    mean += v;
  }
  mean /= static_cast<double>(y.size());
  EXPECT_NEAR(mean, 1.0, 0.02);
}

TEST(Dropout, RejectsRateOfOne) {
  Rng rng(1);
  EXPECT_THROW(dropout_forward(Tensor({2}, 1.0), 1.0, Mode::train, rng),
               ShapeError);
  EXPECT_THROW(Dropout(1.0, 1), ShapeError);
}

TEST(Dropout, BackwardUsesForwardMask) {
  Dropout layer(0.5, 99);
  Tensor x({1, 64}, 1.0);
  Tensor y = layer.forward(x, Mode::train);
  Tensor dx = layer.backward(Tensor({1, 64}, 1.0));
  EXPECT_EQ(dx, y);
}

// --- pooling, dense, softmax, reshape --------------------------------------

TEST(GlobalAvgPool, Examples) {
  Tensor x({1, 2, 2}, {1.0, 3.0, 3.0, 5.0});
  EXPECT_EQ(global_avg_pool(x), Tensor({1, 2}, {2.0, 4.0}));
  Tensor one({2, 1, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(global_avg_pool(one), one.reshaped({2, 3}));
}

TEST(GlobalAvgPool, MatchesSummationOracle) {
  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = rng_normal(rng, {3, 9, 4}, 0.0, 1.0);
    expect_near_all(global_avg_pool(x), oracle_global_avg_pool(x), 1e-12);
  }
}

TEST(Dense, Examples) {
  Tensor x = Tensor::matrix({{1, 2}, {3, 4}});
  EXPECT_EQ(dense_forward(x, Tensor::matrix({{1, 0}, {0, 1}}),
                          Tensor({2}, 0.0)),
            x);
  EXPECT_EQ(dense_forward(Tensor::matrix({{1, 2}}), Tensor::matrix({{1}, {1}}),
                          Tensor({1}, 1.0)),
            Tensor::matrix({{4}}));
  EXPECT_THROW(dense_forward(x, Tensor({3, 1}, 1.0), Tensor({1}, 0.0)),
               ShapeError);
}

TEST(Dense, IdentityBackwardPassesThrough) {
  Dense layer(Tensor::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}),
              Tensor({3}, 0.0));
  Rng rng(53);
  Tensor x = rng_normal(rng, {2, 3}, 0.0, 1.0);
  layer.forward(x, Mode::train);
  Tensor g = rng_normal(rng, {2, 3}, 0.0, 1.0);
  EXPECT_EQ(layer.backward(g), g);
}

TEST(Softmax, Examples) {
  EXPECT_EQ(softmax(Tensor::matrix({{0, 0}})), Tensor::matrix({{0.5, 0.5}}));
  Tensor big = softmax(Tensor::matrix({{1000, 1000}}));
  EXPECT_EQ(big, Tensor::matrix({{0.5, 0.5}}));
  EXPECT_THROW(softmax(Tensor({2, 1}, 0.0)), ShapeError);
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
  Rng rng(59);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor x = rng_normal(rng, {4, 7}, 0.0, 5.0);
    Tensor p = softmax(x);
    Tensor shifted = x;
    for (std::size_t r = 0; r < 4; ++r) {
      const double c = rng.normal() * 10.0;
      for (std::size_t k = 0; k < 7; ++k)
        shifted.at(r, k) += c;
    }
    Tensor q = softmax(shifted);
    for (std::size_t r = 0; r < 4; ++r) {
      double total = 0.0;
      for (std::size_t k = 0; k < 7; ++k) {
        total += p.at(r, k);
        EXPECT_NEAR(p.at(r, k), q.at(r, k), 1e-12);
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(ReshapeBridge, Examples) {
  Tensor x({1, 6, 1}, {1, 2, 3, 4, 5, 6});
  Tensor y = reshape_bridge(x, 3, 2);
  EXPECT_EQ(y.shape(), (Shape{1, 3, 2}));
  EXPECT_EQ(y.at(0, 1, 0), 3.0);
  EXPECT_EQ(reshape_bridge(y, 6, 1), x);
  EXPECT_THROW(reshape_bridge(Tensor({1, 4, 1}), 3, 2), ShapeError);
}

// --- backward contracts ----------------------------------------------------

TEST(Backward, ReluZeroAtNegativeInputs) {
  Relu relu;
  relu.forward(Tensor({1, 4}, {-2.0, -0.5, 0.0, 3.0}), Mode::train);
  Tensor dx = relu.backward(Tensor({1, 4}, 1.0));
  EXPECT_EQ(dx, Tensor({1, 4}, {0.0, 0.0, 0.0, 1.0}));
}

TEST(Backward, RequiresForwardAndMatchingShape) {
  Dense dense(3, 2);
  EXPECT_THROW(dense.backward(Tensor({1, 2})), ShapeError);
  dense.forward(Tensor({1, 3}, 1.0), Mode::train);
  EXPECT_THROW(dense.backward(Tensor({1, 3})), ShapeError);
  Relu relu;
  EXPECT_THROW(relu.backward(Tensor({1, 2})), ShapeError);
}

TEST(LayerParams, NamesAreUniqueAndGradsShaped) {
  LayerParams p;
  p.add("w", Tensor({2, 3}, 1.0));
  EXPECT_THROW(p.add("w", Tensor({1})), ShapeError);
  EXPECT_EQ(p.grad("w").shape(), p.value("w").shape());
  EXPECT_THROW(p.value("missing"), ShapeError);
}

// --- finite-difference gradient checks -------------------------------------

TEST(GradientCheck, Dense) {
  Rng rng(61);
  Dense layer(5, 3);
  layer.initialize(rng);
  layer.params().value("b") = rng_normal(rng, {3}, 0.0, 1.0);
  auto report =
      gradient_check(layer, rng_normal(rng, {4, 5}, 0.0, 1.0), Mode::train);
  EXPECT_LT(report.max_rel_error(), 1e-6);
  EXPECT_EQ(report.entries.size(), 3u);
}

TEST(GradientCheck, Conv1D) {
  Rng rng(67);
  for (std::size_t m : {1u, 2u, 3u}) {
    Conv1D layer(3, 4, m);
    layer.initialize(rng);
    layer.params().value("bias") = rng_normal(rng, {4}, 0.0, 1.0);
    auto report = gradient_check(layer, rng_normal(rng, {2, 9, 3}, 0.0, 1.0),
                                 Mode::train);
    EXPECT_LT(report.max_rel_error(), 1e-4) << "kernel " << m;
  }
}

TEST(GradientCheck, MaxPool) {
  Rng rng(71);
  MaxPool1D layer(2);
  auto report =
      gradient_check(layer, rng_normal(rng, {2, 9, 3}, 0.0, 1.0), Mode::train);
  EXPECT_LT(report.max_rel_error(), 1e-4);
}

TEST(GradientCheck, BatchNormBothModes) {
  Rng rng(73);
  BatchNorm layer(3);
  layer.params().value("gamma") = rng_normal(rng, {3}, 1.0, 0.3);
  layer.params().value("beta") = rng_normal(rng, {3}, 0.0, 0.3);
  Tensor x = rng_normal(rng, {4, 5, 3}, 1.0, 2.0);
  EXPECT_LT(gradient_check(layer, x, Mode::train).max_rel_error(), 1e-4);
  EXPECT_LT(gradient_check(layer, x, Mode::infer).max_rel_error(), 1e-4);
  Tensor flat = rng_normal(rng, {6, 3}, 0.0, 1.0);
  EXPECT_LT(gradient_check(layer, flat, Mode::train).max_rel_error(), 1e-4);
}

TEST(GradientCheck, Lstm) {
  Rng rng(79);
  for (bool sequences : {true, false}) {
    Lstm layer(3, 4, sequences);
    layer.initialize(rng);
    layer.params().value("b") = rng_normal(rng, {16}, 0.0, 0.5);
    auto report = gradient_check(layer, rng_normal(rng, {2, 5, 3}, 0.0, 1.0),
                                 Mode::train);
    EXPECT_LT(report.max_rel_error(), 1e-4) << "sequences=" << sequences;
  }
}

TEST(GradientCheck, ParameterlessLayers) {
  Rng rng(83);
  Relu relu;
  auto r = gradient_check(relu, rng_normal(rng, {2, 6, 2}, 0.0, 1.0),
                          Mode::train);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_EQ(r.entries[0].name, "input");
  EXPECT_LT(r.max_rel_error(), 1e-4);

  GlobalAvgPool gap;
  EXPECT_LT(gradient_check(gap, rng_normal(rng, {2, 6, 3}, 0.0, 1.0),
                           Mode::train)
                .max_rel_error(),
            1e-4);
  Softmax sm;
  EXPECT_LT(gradient_check(sm, rng_normal(rng, {3, 4}, 0.0, 1.0), Mode::train)
                .max_rel_error(),
            1e-4);
  Dropout drop(0.5, 7);
  EXPECT_LT(gradient_check(drop, rng_normal(rng, {2, 6, 3}, 0.0, 1.0),
                           Mode::train)
                .max_rel_error(),
            1e-4);
  Reshape reshape({3, 4});
  EXPECT_LT(gradient_check(reshape, rng_normal(rng, {2, 6, 2}, 0.0, 1.0),
                           Mode::train)
                .max_rel_error(),
            1e-4);
}

TEST(GradientCheck, SoftmaxCrossEntropyFused) {
  Rng rng(89);
  auto report = softmax_cross_entropy_check(rng_normal(rng, {4, 3}, 0.0, 2.0),
                                            {0, 2, 1, 2});
  EXPECT_LT(report.max_rel_error(), 1e-4);
}

TEST(GradientCheck, DetectsWrongGradient) {
  Tensor x = Tensor::vector({1.0, 2.0});
  Tensor wrong = Tensor::vector({2.0, 5.0}); // d/dx of x0^2 + x1^2 is 2x
  auto loss = [&] { return x[0] * x[0] + x[1] * x[1]; };
  auto report = check_gradients("square", loss, {{"x", &x, &wrong}});
  EXPECT_GT(report.max_rel_error(), 0.1);
}
