#include "bolt/data.hpp"

#include "bolt/error.hpp"
#include "json_io.hpp"

namespace bolt {
namespace {

void require_finite(const Matrix& m, const char* what, Eigen::Index row_offset) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!m.row(i).allFinite()) {
      throw ValidationError(std::string("non-finite value in ") + what + " row " + std::to_string(row_offset + i),
                            std::string(what) + "[" + std::to_string(row_offset + i) + "]");
    }
  }
}

}  // namespace

Dataset::Dataset(std::size_t input_dim, std::size_t output_dim)
    : query_points_(0, static_cast<Eigen::Index>(input_dim)), observations_(0, static_cast<Eigen::Index>(output_dim)) {}

Dataset::Dataset(Matrix query_points, Matrix observations)
    : query_points_(std::move(query_points)), observations_(std::move(observations)) {
  if (query_points_.rows() != observations_.rows()) {
    throw DimensionError("query_points has " + std::to_string(query_points_.rows()) + " rows but observations has " +
                         std::to_string(observations_.rows()));
  }
  require_finite(query_points_, "query_points", 0);
  require_finite(observations_, "observations", 0);
}

Dataset Dataset::append(const Matrix& new_points, const Matrix& new_observations) const {
  if (new_points.cols() != query_points_.cols()) {
    throw DimensionError("expected query points with " + std::to_string(query_points_.cols()) + " columns, got " +
                         std::to_string(new_points.cols()));
  }
  if (new_observations.cols() != observations_.cols()) {
    throw DimensionError("expected observations with " + std::to_string(observations_.cols()) + " columns, got " +
                         std::to_string(new_observations.cols()));
  }
  if (new_points.rows() != new_observations.rows()) {
    throw DimensionError(std::to_string(new_points.rows()) + " query points but " +
                         std::to_string(new_observations.rows()) + " observations");
  }
  require_finite(new_points, "query_points", query_points_.rows());
  require_finite(new_observations, "observations", observations_.rows());

  Dataset out(input_dim(), output_dim());
  out.query_points_.resize(query_points_.rows() + new_points.rows(), query_points_.cols());
  out.query_points_ << query_points_, new_points;
  out.observations_.resize(observations_.rows() + new_observations.rows(), observations_.cols());
  out.observations_ << observations_, new_observations;
  return out;
}

BestObservation best_observation(const Dataset& ds) {
  if (ds.empty()) throw ValidationError("best_observation of an empty dataset");
  if (ds.output_dim() != 1) {
    throw DimensionError("best_observation needs a single output column, got " + std::to_string(ds.output_dim()) +
                         " (use pareto_front for multiple objectives)");
  }
  Eigen::Index best = 0;
  const auto& obs = ds.observations();
  for (Eigen::Index i = 1; i < obs.rows(); ++i) {
    if (obs(i, 0) < obs(best, 0)) best = i;
  }
  return {static_cast<std::size_t>(best), ds.query_points().row(best).transpose(), obs(best, 0)};
}

TaggedDatasets::TaggedDatasets(Map entries) : entries_(std::move(entries)) {
  std::size_t dim = 0;
  bool first = true;
  for (const auto& [tag, ds] : entries_) {
    if (tag.empty()) throw ValidationError("dataset tags must be non-empty", "tag");
    if (first) {
      dim = ds.input_dim();
      first = false;
    } else if (ds.input_dim() != dim) {
      throw DimensionError("dataset '" + tag + "' has input dimension " + std::to_string(ds.input_dim()) +
                               ", expected " + std::to_string(dim),
                           tag);
    }
  }
}

const Dataset& TaggedDatasets::at(std::string_view tag) const {
  auto it = entries_.find(tag);
  if (it == entries_.end()) throw ConfigError("no dataset with tag '" + std::string(tag) + "'", std::string(tag));
  return it->second;
}

std::vector<std::string> TaggedDatasets::tags() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [tag, ds] : entries_) out.push_back(tag);
  return out;
}

std::size_t TaggedDatasets::input_dim() const noexcept {
  return entries_.empty() ? 0 : entries_.begin()->second.input_dim();
}

TaggedDatasets TaggedDatasets::with(std::string tag, Dataset ds) const {
  Map copy = entries_;
  copy.insert_or_assign(std::move(tag), std::move(ds));
  return TaggedDatasets(std::move(copy));
}

TaggedDatasets TaggedDatasets::append(const TaggedDatasets& other) const {
  if (other.size() != size()) {
    throw ValidationError("expected " + std::to_string(size()) + " tags, got " + std::to_string(other.size()), "tags");
  }
  Map out;
  for (const auto& [tag, ds] : entries_) {
    auto it = other.entries_.find(tag);
    if (it == other.entries_.end()) throw ValidationError("missing data for tag '" + tag + "'", tag);
    try {
      out.emplace(tag, ds.append(it->second));
    } catch (const Error& e) {
      throw ValidationError("tag '" + tag + "': " + e.what(), e.field() ? tag + "." + *e.field() : tag);
    }
  }
  return TaggedDatasets(std::move(out));
}

std::string serialize(const TaggedDatasets& datasets) { return json_io::dump(json_io::to_json(datasets)); }

TaggedDatasets deserialize_datasets(std::string_view payload) {
  return json_io::tagged_from_json(json_io::parse(payload), "datasets");
}

}  // namespace bolt
