#include "bolt/spaces.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "bolt/error.hpp"
#include "sobol_table.hpp"

namespace bolt {

SobolEngine::SobolEngine(std::size_t dimension, std::uint64_t digital_shift_seed, bool shifted)
    : dimension_(dimension), state_(dimension, 0u), shift_(dimension, 0u), directions_(dimension) {
  if (dimension == 0 || dimension > kMaxDimension) {
    throw DimensionError("Sobol dimension must be in [1, " + std::to_string(kMaxDimension) + "], got " +
                         std::to_string(dimension));
  }
  for (std::uint32_t bit = 0; bit < 32; ++bit) directions_[0][bit] = 1u << (31 - bit);
  for (std::size_t d = 1; d < dimension; ++d) {
    const auto& poly = detail::kSobolPolynomials[d - 1];
    auto& v = directions_[d];
    const std::uint32_t s = poly.degree;
    for (std::uint32_t i = 0; i < s; ++i) v[i] = poly.initial[i] << (31 - i);
    for (std::uint32_t i = s; i < 32; ++i) {
      v[i] = v[i - s] ^ (v[i - s] >> s);
      for (std::uint32_t k = 1; k < s; ++k) {
        if ((poly.coefficients >> (s - 1 - k)) & 1u) v[i] ^= v[i - k];
      }
    }
  }
  if (shifted) {
    Rng rng(RngSeed{digital_shift_seed});
    for (auto& word : shift_) word = static_cast<std::uint32_t>(rng.next_u64() >> 32);
  }
}

Vector SobolEngine::next() {
  // Gray-code update from element index_ to index_ + 1.
  const int bit = std::countr_one(index_);
  if (bit >= 32) throw Error("sobol_exhausted", "Sobol sequence exhausted (2^32 points)");
  ++index_;
  Vector point(static_cast<Eigen::Index>(dimension_));
  for (std::size_t d = 0; d < dimension_; ++d) {
    state_[d] ^= directions_[d][static_cast<std::size_t>(bit)];
    point[static_cast<Eigen::Index>(d)] = static_cast<double>(state_[d] ^ shift_[d]) * 0x1.0p-32;
  }
  return point;
}

Matrix SobolEngine::draw(std::size_t n) {
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dimension_));
  for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i)) = next().transpose();
  return out;
}

BoxSpace::BoxSpace(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0) throw ValidationError("search space must have at least one dimension", "lower");
  if (lower_.size() != upper_.size()) {
    throw DimensionError("lower has " + std::to_string(lower_.size()) + " entries but upper has " +
                             std::to_string(upper_.size()),
                         "upper");
  }
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
      throw ValidationError("axis " + std::to_string(i) + ": lower (" + std::to_string(lower_[i]) +
                                ") must be finite and strictly below upper (" + std::to_string(upper_[i]) + ")",
                            "lower[" + std::to_string(i) + "]");
    }
  }
}

void BoxSpace::check_dimension(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw DimensionError("expected a point of dimension " + std::to_string(dimension()) + ", got " +
                         std::to_string(x.size()));
  }
}

bool BoxSpace::contains(const Vector& x) const {
  check_dimension(x);
  return ((x.array() >= lower_.array()) && (x.array() <= upper_.array())).all();
}

Vector BoxSpace::clip(const Vector& x) const {
  check_dimension(x);
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

Matrix BoxSpace::sample(std::size_t n, SampleMode mode, RngSeed seed) const {
  const auto d = static_cast<Eigen::Index>(dimension());
  Matrix unit(static_cast<Eigen::Index>(n), d);
  if (mode == SampleMode::uniform) {
    Rng rng(seed);
    for (Eigen::Index i = 0; i < unit.rows(); ++i)
      for (Eigen::Index j = 0; j < d; ++j) unit(i, j) = rng.uniform();
  } else {
    SobolEngine engine(dimension(), seed.value, true);
    unit = engine.draw(n);
  }
  Matrix out(unit.rows(), d);
  const Vector w = width();
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out(i, j) = std::min(lower_[j] + unit(i, j) * w[j], upper_[j]);
    }
  }
  return out;
}

BoxSpace BoxSpace::shrink_to_region(const Vector& center, const Vector& halfwidths) const {
  check_dimension(center);
  check_dimension(halfwidths);
  if (!contains(center)) throw ValidationError("trust-region center lies outside the search space", "center");
  if (!(halfwidths.array() > 0.0).all()) throw ValidationError("halfwidths must be positive", "halfwidths");
  Vector lo = (center - halfwidths).cwiseMax(lower_);
  Vector hi = (center + halfwidths).cwiseMin(upper_);
  return BoxSpace(std::move(lo), std::move(hi));
}

}  // namespace bolt
