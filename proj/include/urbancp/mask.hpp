#pragma once

#include "urbancp/tensor.hpp"

namespace urbancp {

/// Binary tensor marking observed (1) and missing (0) entries.
class MaskTensor {
 public:
  MaskTensor() = default;

  /// Every entry observed.
  explicit MaskTensor(const Dims& dims) : w_(dims, 1.0) {}

  explicit MaskTensor(Tensor3 w) : w_(std::move(w)) {
    for (double v : w_.data())
      detail::require(v == 0.0 || v == 1.0, "mask entries must be 0 or 1");
  }

  const Dims& dims() const noexcept { return w_.dims(); }
  const Tensor3& values() const noexcept { return w_; }
  bool observed(Index i, Index j, Index k) const { return w_(i, j, k) != 0.0; }

  std::size_t observed_count() const {
    std::size_t n = 0;
    for (double v : w_.data()) n += v != 0.0;
    return n;
  }

  double missing_rate() const {
    return 1.0 - static_cast<double>(observed_count()) / static_cast<double>(w_.size());
  }

  /// Y = W * X; missing entries become exactly 0 whatever x holds there.
  Tensor3 apply(const Tensor3& x) const {
    detail::require(x.dims() == w_.dims(), "mask apply: dimension mismatch");
    Tensor3 out(x.dims());
    for (std::size_t n = 0; n < out.size(); ++n)
      out.data()[n] = w_.data()[n] != 0.0 ? x.data()[n] : 0.0;
    return out;
  }

  friend bool operator==(const MaskTensor&, const MaskTensor&) = default;

 private:
  Tensor3 w_;
};

}  // namespace urbancp
