#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bolt/spaces.hpp"

namespace bolt {

inline constexpr std::string_view kObjectiveTag = "OBJECTIVE";
inline constexpr std::string_view kConstraintTag = "CONSTRAINT";

// Query points (N x D) paired with observations (N x E). All entries finite.
// Value type: every operation returns a new dataset.
class Dataset {
 public:
  Dataset(std::size_t input_dim, std::size_t output_dim);
  Dataset(Matrix query_points, Matrix observations);

  std::size_t size() const noexcept { return static_cast<std::size_t>(query_points_.rows()); }
  bool empty() const noexcept { return size() == 0; }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(query_points_.cols()); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(observations_.cols()); }

  const Matrix& query_points() const noexcept { return query_points_; }
  const Matrix& observations() const noexcept { return observations_; }

  Dataset append(const Matrix& new_points, const Matrix& new_observations) const;
  Dataset append(const Dataset& other) const { return append(other.query_points_, other.observations_); }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.query_points_.rows() == b.query_points_.rows() && a.query_points_.cols() == b.query_points_.cols() &&
           a.observations_.cols() == b.observations_.cols() && a.query_points_ == b.query_points_ &&
           a.observations_ == b.observations_;
  }

 private:
  Matrix query_points_;
  Matrix observations_;
};

struct BestObservation {
  std::size_t index;
  Vector point;
  double value;
};

// Row with minimal observation; ties go to the lowest index.
BestObservation best_observation(const Dataset& ds);

// Tag-keyed datasets sharing one input dimension. Iteration order is the tag
// order (std::map), so serialization is canonical.
class TaggedDatasets {
 public:
  using Map = std::map<std::string, Dataset, std::less<>>;

  TaggedDatasets() = default;
  explicit TaggedDatasets(Map entries);

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  bool contains(std::string_view tag) const { return entries_.find(tag) != entries_.end(); }
  const Dataset& at(std::string_view tag) const;
  const Map& entries() const noexcept { return entries_; }
  std::vector<std::string> tags() const;

  // Input dimension shared by all entries (0 when empty).
  std::size_t input_dim() const noexcept;

  TaggedDatasets with(std::string tag, Dataset ds) const;

  // Appends per-tag; `other` must carry exactly the same tags.
  TaggedDatasets append(const TaggedDatasets& other) const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const TaggedDatasets& a, const TaggedDatasets& b) { return a.entries_ == b.entries_; }

 private:
  Map entries_;
};

// Canonical JSON encoding: {"<tag>": {"d", "e", "n", "query_points", "observations"}}.
std::string serialize(const TaggedDatasets& datasets);
TaggedDatasets deserialize_datasets(std::string_view payload);

}  // namespace bolt
