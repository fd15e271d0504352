#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lilo {

enum class ErrorCode {
  kDegeneratePoint,
  kRotationNearPi,
  kEmptyImage,
  kImageTooSmall,
  kOddWidth,
  kMalformedFrame,
  kIoError,
  kMalformedPoseLine,
  kConfigError,
  kTrajectoryTooShort,
  kInsufficientConstraints,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Selects between the OpenMP kernel and its serial reference path.
enum class Exec { kSerial, kParallel };

// Dense row-major image. Rows are elevation bins, columns azimuth bins.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  T* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  const T* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// uint8_t rather than bool so rows can be addressed as contiguous memory.
using Mask = Grid<std::uint8_t>;

}  // namespace lilo
