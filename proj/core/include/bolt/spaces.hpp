#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "bolt/random.hpp"

namespace bolt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Sobol sequence over [0,1)^D with the all-zeros point skipped, optionally
// randomised by a digital (XOR) shift.
class SobolEngine {
 public:
  static constexpr std::size_t kMaxDimension = 64;

  explicit SobolEngine(std::size_t dimension, std::uint64_t digital_shift_seed = 0, bool shifted = false);

  std::size_t dimension() const noexcept { return dimension_; }

  // Next point; the first call returns sequence element 1.
  Vector next();
  Matrix draw(std::size_t n);

 private:
  std::size_t dimension_;
  std::uint64_t index_ = 0;
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
  std::vector<std::array<std::uint32_t, 32>> directions_;
};

enum class SampleMode { uniform, quasirandom };

// Closed axis-aligned box. Immutable after construction.
class BoxSpace {
 public:
  BoxSpace(Vector lower, Vector upper);

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(lower_.size()); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  Vector width() const { return upper_ - lower_; }

  bool contains(const Vector& x) const;
  Vector clip(const Vector& x) const;

  // n x D matrix of samples. Quasi-random mode uses a Sobol sequence whose
  // digital shift is derived from the seed.
  Matrix sample(std::size_t n, SampleMode mode, RngSeed seed) const;

  // Intersection of [center - halfwidths, center + halfwidths] with this box.
  BoxSpace shrink_to_region(const Vector& center, const Vector& halfwidths) const;

  friend bool operator==(const BoxSpace& a, const BoxSpace& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

 private:
  void check_dimension(const Vector& x) const;

  Vector lower_;
  Vector upper_;
};

}  // namespace bolt
