// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "linalg.hpp"
#include "lunet/error.hpp"
#include "lunet/layers.hpp"

namespace lunet {

namespace {

// Gate blocks inside the packed 4*cells axis.
enum Gate : std::size_t { kP = 0, kG = 1, kF = 2, kQ = 3 };

void check_packed(const LayerParams &params, std::size_t inputs,
                  std::size_t cells) {
  const Tensor &u = params.value("U");
  const Tensor &w = params.value("W");
  const Tensor &b = params.value("b");
  if (u.shape() != Shape{inputs, 4 * cells} ||
      w.shape() != Shape{cells, 4 * cells} || b.shape() != Shape{4 * cells})
    throw ShapeError("lstm parameters do not match " + std::to_string(inputs) +
                     " inputs and " + std::to_string(cells) + " cells: U " +
                     to_string(u.shape()) + ", W " + to_string(w.shape()) +
                     ", b " + to_string(b.shape()));
}

// z = b + x_t U (+ h_prev W when h_prev is given), for `batch` rows.
void preactivations(linalg::ConstView x_t, const double *h_prev,
                    const Tensor &U, const Tensor &W, const Tensor &bias,
                    std::size_t batch, std::size_t h, double *z) {
  const std::size_t h4 = 4 * h;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t k = 0; k < h4; ++k)
      z[b * h4 + k] = bias[k];
  linalg::gemm(x_t, linalg::Op::none, linalg::dense(U.data(), x_t.cols, h4),
               linalg::Op::none, linalg::dense(z, batch, h4), true);
  if (h_prev)
    linalg::gemm(linalg::dense(h_prev, batch, h), linalg::Op::none,
                 linalg::dense(W.data(), h, h4), linalg::Op::none,
                 linalg::dense(z, batch, h4), true);
}

struct CellOutputs {
  double *p, *g, *f, *q, *s, *tanh_s, *h;
};

void cell_update(const double *z, const double *s_prev, std::size_t batch,
                 std::size_t h, CellOutputs out) {
  const std::size_t h4 = 4 * h;
  for (std::size_t b = 0; b < batch; ++b) {
    const double *zb = z + b * h4;
    for (std::size_t j = 0; j < h; ++j) {
      const std::size_t i = b * h + j;
      const double p = sigmoid(zb[kP * h + j]);
      const double g = std::tanh(zb[kG * h + j]);
      const double f = sigmoid(zb[kF * h + j]);
      const double q = sigmoid(zb[kQ * h + j]);
      const double s = f * s_prev[i] + p * g;
      const double ts = std::tanh(s);
      out.p[i] = p;
      out.g[i] = g;
      out.f[i] = f;
      out.q[i] = q;
      out.s[i] = s;
      out.tanh_s[i] = ts;
      out.h[i] = ts * q;
    }
  }
}

} // namespace

Lstm::Lstm(std::size_t inputs, std::size_t cells, bool return_sequences)
    : in_(inputs), cells_(cells), return_sequences_(return_sequences) {
  if (in_ == 0 || cells_ == 0)
    throw ShapeError("lstm needs positive input and cell counts");
  params_.add("U", Tensor({in_, 4 * cells_}, 0.0));
  params_.add("W", Tensor({cells_, 4 * cells_}, 0.0));
  params_.add("b", Tensor({4 * cells_}, 0.0));
}

void Lstm::initialize(Rng &rng) {
  params_.value("U") = rng_normal(rng, {in_, 4 * cells_}, 0.0, 0.1);
  params_.value("W") = rng_normal(rng, {cells_, 4 * cells_}, 0.0, 0.1);
  params_.value("b").fill(0.0);
}

Shape Lstm::output_shape(const Shape &input) const {
  if (input.size() != 2 || input[1] != in_)
    throw ShapeError("lstm expects per-sample [length, " + std::to_string(in_) +
                     "], got " + to_string(input));
  if (return_sequences_)
    return {input[0], cells_};
  return {cells_};
}

Tensor Lstm::forward(const Tensor &x, Mode) {
  if (x.rank() != 3 || x.dim(2) != in_)
    throw ShapeError("lstm expects [batch, length, " + std::to_string(in_) +
                     "], got " + to_string(x.shape()));
  check_packed(params_, in_, cells_);
  const std::size_t batch = x.dim(0), steps = x.dim(1), h = cells_;
  const std::size_t h4 = 4 * h;
  const Tensor &U = params_.value("U");
  const Tensor &W = params_.value("W");
  const Tensor &bias = params_.value("b");

  const std::size_t cache = steps * batch * h;
  gate_p_.assign(cache, 0.0);
  gate_g_.assign(cache, 0.0);
  gate_f_.assign(cache, 0.0);
  gate_q_.assign(cache, 0.0);
  state_.assign(cache, 0.0);
  tanh_state_.assign(cache, 0.0);
  hidden_.assign(cache, 0.0);

  const std::vector<double> zero_state(batch * h, 0.0);
  std::vector<double> z(batch * h4);
  for (std::size_t t = 0; t < steps; ++t) {
    const linalg::ConstView x_t{x.data() + t * in_, batch, in_, steps * in_};
    const double *h_prev =
        t > 0 ? hidden_.data() + (t - 1) * batch * h : nullptr;
    const double *s_prev =
        t > 0 ? state_.data() + (t - 1) * batch * h : zero_state.data();
    preactivations(x_t, h_prev, U, W, bias, batch, h, z.data());
    const std::size_t at = t * batch * h;
    CellOutputs out{gate_p_.data() + at,     gate_g_.data() + at,
                    gate_f_.data() + at,     gate_q_.data() + at,
                    state_.data() + at,      tanh_state_.data() + at,
                    hidden_.data() + at};
    cell_update(z.data(), s_prev, batch, h, out);
  }

  Tensor y = return_sequences_ ? Tensor({batch, steps, h}) : Tensor({batch, h});
  for (std::size_t b = 0; b < batch; ++b) {
    if (return_sequences_) {
      for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t j = 0; j < h; ++j)
          y.at(b, t, j) = hidden_[(t * batch + b) * h + j];
    } else {
      for (std::size_t j = 0; j < h; ++j)
        y.at(b, j) = hidden_[((steps - 1) * batch + b) * h + j];
    }
  }
  input_ = x;
  batch_ = batch;
  steps_ = steps;
  remember_output(y);
  return y;
}

Tensor Lstm::backward(const Tensor &upstream) {
  check_upstream(upstream);
  const std::size_t batch = batch_, steps = steps_, h = cells_;
  const std::size_t h4 = 4 * h;
  const Tensor &U = params_.value("U");
  const Tensor &W = params_.value("W");
  Tensor &dU = params_.grad("U");
  Tensor &dW = params_.grad("W");
  Tensor &db = params_.grad("b");

  // Pre-activation gradients for every (sample, step), rows b * steps + t.
  std::vector<double> dz_all(batch * steps * h4);
  std::vector<double> dz(batch * h4);
  std::vector<double> dh_next(batch * h, 0.0), ds_next(batch * h, 0.0);

  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t b = 0; b < batch; ++b) {
      double *dzb = dz.data() + b * h4;
      for (std::size_t j = 0; j < h; ++j) {
        const std::size_t i = (t * batch + b) * h + j;
        double dh = dh_next[b * h + j];
        if (return_sequences_)
          dh += upstream.at(b, t, j);
        else if (t == steps - 1)
          dh += upstream.at(b, j);
        const double p = gate_p_[i], g = gate_g_[i], f = gate_f_[i],
                     q = gate_q_[i], ts = tanh_state_[i];
        const double prev = t > 0 ? state_[i - batch * h] : 0.0;
        const double ds = dh * q * (1.0 - ts * ts) + ds_next[b * h + j];
        dzb[kP * h + j] = ds * g * p * (1.0 - p);
        dzb[kG * h + j] = ds * p * (1.0 - g * g);
        dzb[kF * h + j] = ds * prev * f * (1.0 - f);
        dzb[kQ * h + j] = dh * ts * q * (1.0 - q);
        ds_next[b * h + j] = ds * f;
      }
      double *dst = dz_all.data() + (b * steps + t) * h4;
      for (std::size_t k = 0; k < h4; ++k)
        dst[k] = dzb[k];
    }
    if (t > 0) {
      linalg::gemm(linalg::dense(hidden_.data() + (t - 1) * batch * h, batch, h),
                   linalg::Op::transpose, linalg::dense(dz.data(), batch, h4),
                   linalg::Op::none, linalg::dense(dW.data(), h, h4), true);
      linalg::gemm(linalg::dense(dz.data(), batch, h4), linalg::Op::none,
                   linalg::dense(W.data(), h, h4), linalg::Op::transpose,
                   linalg::dense(dh_next.data(), batch, h), false);
    }
  }

  const std::size_t rows = batch * steps;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < h4; ++k)
      db[k] += dz_all[r * h4 + k];
  linalg::gemm(linalg::dense(input_.data(), rows, in_), linalg::Op::transpose,
               linalg::dense(dz_all.data(), rows, h4), linalg::Op::none,
               linalg::dense(dU.data(), in_, h4), true);
  Tensor dx(input_.shape());
  linalg::gemm(linalg::dense(dz_all.data(), rows, h4), linalg::Op::none,
               linalg::dense(U.data(), in_, h4), linalg::Op::transpose,
               linalg::dense(dx.data(), rows, in_), false);
  return dx;
}

std::unique_ptr<Layer> Lstm::clone() const {
  return std::make_unique<Lstm>(*this);
}

std::pair<Tensor, LstmState> lstm_step(const Tensor &x_t,
                                       const LstmState &state,
                                       const LayerParams &params) {
  if (x_t.rank() != 2)
    throw ShapeError("lstm_step expects x_t as [batch, in], got " +
                     to_string(x_t.shape()));
  const std::size_t batch = x_t.dim(0), inputs = x_t.dim(1);
  const Tensor &W = params.value("W");
  if (W.rank() != 2)
    throw ShapeError("lstm_step: W must be rank 2");
  const std::size_t h = W.dim(0);
  check_packed(params, inputs, h);
  if (state.h.shape() != Shape{batch, h} || state.s.shape() != Shape{batch, h})
    throw ShapeError("lstm_step: state must be [" + std::to_string(batch) +
                     ", " + std::to_string(h) + "]");

  std::vector<double> z(batch * 4 * h);
  preactivations(linalg::dense(x_t.data(), batch, inputs), state.h.data(),
                 params.value("U"), W, params.value("b"), batch, h, z.data());
  LstmState next{Tensor({batch, h}), Tensor({batch, h})};
  std::vector<double> p(batch * h), g(batch * h), f(batch * h), q(batch * h),
      tanh_s(batch * h);
  cell_update(z.data(), state.s.data(), batch, h,
              {p.data(), g.data(), f.data(), q.data(), next.s.data(),
               tanh_s.data(), next.h.data()});
  Tensor out = next.h;
  return {std::move(out), std::move(next)};
}

Tensor lstm_forward(const Tensor &x, const LayerParams &params,
                    bool return_sequences) {
  if (x.rank() != 3)
    throw ShapeError("lstm_forward expects [batch, length, in], got " +
                     to_string(x.shape()));
  const Tensor &W = params.value("W");
  Lstm layer(x.dim(2), W.dim(0), return_sequences);
  for (const auto &e : params.entries())
    layer.params().value(e.name) = e.value;
  return layer.forward(x, Mode::infer);
}

} // namespace lunet
