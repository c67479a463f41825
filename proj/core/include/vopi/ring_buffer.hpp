#pragma once

#include <cstddef>
#include <vector>

#include "vopi/error.hpp"

namespace vopi {

// Bounded FIFO. Once full, each push evicts the oldest element.
template <typename T>
class RingBuffer {
public:
  explicit RingBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ArgumentError("ring buffer capacity must be positive");
    data_.reserve(capacity < 4096 ? capacity : 4096);
  }

  void push(T value) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(value));
    } else {
      data_[head_] = std::move(value);
      head_ = (head_ + 1) % capacity_;
    }
  }

  // i = 0 is the oldest retained element.
  const T& operator[](std::size_t i) const { return data_[(head_ + i) % data_.size()]; }

  std::size_t size() const noexcept { return data_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return data_.empty(); }

private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> data_;
};

}  // namespace vopi
