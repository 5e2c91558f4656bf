// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace hazediff {

/// Dense row-major H x W x C tensor. Index order is (row, col, channel),
/// with channels interleaved: data[(y * width + x) * channels + c].
template <typename T>
class Tensor {
public:
  Tensor() = default;

  Tensor(int height, int width, int channels, T fill = T{})
      : height_(height), width_(width), channels_(channels),
        data_(static_cast<size_t>(check_dims(height, width, channels)), fill) {}

  Tensor(int height, int width, int channels, std::vector<T> data)
      : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (data_.size() != static_cast<size_t>(check_dims(height, width, channels)))
      throw std::invalid_argument("tensor: data length does not match dimensions");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& at(int y, int x, int c) { return data_[idx(y, x, c)]; }
  const T& at(int y, int x, int c) const { return data_[idx(y, x, c)]; }

  size_t idx(int y, int x, int c) const {
    return (static_cast<size_t>(y) * width_ + x) * channels_ + c;
  }

  /// Pointer to the first channel of pixel (y, x).
  T* pixel(int y, int x) { return data_.data() + idx(y, x, 0); }
  const T* pixel(int y, int x) const { return data_.data() + idx(y, x, 0); }

  /// Contiguous row of width * channels values.
  std::span<T> row(int y) {
    return {data_.data() + idx(y, 0, 0), static_cast<size_t>(width_) * channels_};
  }
  std::span<const T> row(int y) const {
    return {data_.data() + idx(y, 0, 0), static_cast<size_t>(width_) * channels_};
  }

  bool same_shape(const Tensor& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(height_, width_, channels_);
    for (size_t i = 0; i < data_.size(); ++i) out.data()[i] = static_cast<U>(data_[i]);
    return out;
  }

  Tensor channel(int c) const {
    if (c < 0 || c >= channels_) throw std::invalid_argument("tensor: channel out of range");
    Tensor out(height_, width_, 1);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) out.at(y, x, 0) = at(y, x, c);
    return out;
  }

private:
  static long long check_dims(int h, int w, int c) {
    if (h < 1 || w < 1 || c < 1)
      throw std::invalid_argument("tensor: dimensions must be >= 1");
    return static_cast<long long>(h) * w * c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

/// Image values live in [0,1] when loaded from 8-bit files; intermediate
/// feature maps are unbounded.
using ImageTensor = Tensor<float>;

/// Single-channel map of nonnegative relative depths, same grid as the
/// paired clean image.
using DepthMap = Tensor<float>;

} // namespace hazediff
