// SPDX-License-Identifier: Apache-2.0
#include "lunet/error.hpp"
#include "lunet/layers.hpp"

#include <algorithm>

namespace lunet {

void LayerParams::add(std::string name, Tensor value) {
  if (contains(name))
    throw ShapeError("duplicate parameter name '" + name + "'");
  Tensor grad(value.shape(), 0.0);
  entries_.push_back({std::move(name), std::move(value), std::move(grad)});
}

bool LayerParams::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const ParamEntry &e) { return e.name == name; });
}

ParamEntry &LayerParams::find(std::string_view name) {
  for (auto &e : entries_)
    if (e.name == name)
      return e;
  throw ShapeError("no parameter named '" + std::string(name) + "'");
}

const ParamEntry &LayerParams::find(std::string_view name) const {
  for (const auto &e : entries_)
    if (e.name == name)
      return e;
  throw ShapeError("no parameter named '" + std::string(name) + "'");
}

Tensor &LayerParams::value(std::string_view name) { return find(name).value; }
const Tensor &LayerParams::value(std::string_view name) const {
  return find(name).value;
}
Tensor &LayerParams::grad(std::string_view name) { return find(name).grad; }
const Tensor &LayerParams::grad(std::string_view name) const {
  return find(name).grad;
}

void LayerParams::zero_grad() {
  for (auto &e : entries_)
    e.grad.fill(0.0);
}

void Layer::remember_output(const Tensor &out) {
  forward_output_shape_ = out.shape();
}

void Layer::check_upstream(const Tensor &upstream) const {
  if (forward_output_shape_.empty())
    throw ShapeError(kind() + ": backward called before forward");
  if (upstream.shape() != forward_output_shape_)
    throw ShapeError(kind() + ": upstream gradient shape " +
                     to_string(upstream.shape()) +
                     " does not match forward output " +
                     to_string(forward_output_shape_));
}

} // namespace lunet
