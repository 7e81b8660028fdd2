#include "json_io.hpp"

namespace bolt::json_io {

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, std::size_t expected_cols, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field + " must be an array of rows", field);
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(expected_cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    const std::string row_field = field + "[" + std::to_string(i) + "]";
    if (!row.is_array()) throw ValidationError(row_field + " must be an array", row_field);
    if (row.size() != expected_cols) {
      throw ValidationError(row_field + " has " + std::to_string(row.size()) + " entries, expected " +
                                std::to_string(expected_cols),
                            row_field);
    }
    for (std::size_t k = 0; k < expected_cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          number(row[k], row_field + "[" + std::to_string(k) + "]");
    }
  }
  return m;
}

Matrix matrix_from_json(const Json& j, const std::string& field, std::size_t cols_if_empty) {
  if (!j.is_array()) throw ValidationError(field + " must be an array of rows", field);
  if (j.empty()) return Matrix(0, static_cast<Eigen::Index>(cols_if_empty));
  if (!j[0].is_array()) throw ValidationError(field + "[0] must be an array", field + "[0]");
  return matrix_from_json(j, j[0].size(), field);
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field + " must be an array of numbers", field);
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = number(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

Json to_json(const BoxSpace& space) { return Json{{"lower", to_json(space.lower())}, {"upper", to_json(space.upper())}}; }

BoxSpace space_from_json(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field + " must be an object", field);
  Vector lower = vector_from_json(member(j, "lower", field), field + ".lower");
  Vector upper = vector_from_json(member(j, "upper", field), field + ".upper");
  try {
    return BoxSpace(std::move(lower), std::move(upper));
  } catch (const Error& e) {
    throw ValidationError(e.what(), e.field() ? field + "." + *e.field() : field);
  }
}

Json to_json(const Dataset& ds) {
  return Json{{"d", ds.input_dim()},
              {"e", ds.output_dim()},
              {"n", ds.size()},
              {"query_points", to_json(ds.query_points())},
              {"observations", to_json(ds.observations())}};
}

Dataset dataset_from_json(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field + " must be an object", field);
  const auto& qp = member(j, "query_points", field);
  const auto& ob = member(j, "observations", field);
  std::size_t d = 0;
  std::size_t e = 0;
  if (j.contains("d") && j.contains("e")) {
    if (!j["d"].is_number_unsigned() || !j["e"].is_number_unsigned()) {
      throw ValidationError(field + ".d/e must be non-negative integers", field);
    }
    d = j["d"].get<std::size_t>();
    e = j["e"].get<std::size_t>();
  } else {
    d = qp.is_array() && !qp.empty() && qp[0].is_array() ? qp[0].size() : 0;
    e = ob.is_array() && !ob.empty() && ob[0].is_array() ? ob[0].size() : 0;
  }
  Matrix x = matrix_from_json(qp, d, field + ".query_points");
  Matrix y = matrix_from_json(ob, e, field + ".observations");
  if (j.contains("n")) {
    if (!j["n"].is_number_unsigned() || j["n"].get<std::size_t>() != static_cast<std::size_t>(x.rows())) {
      throw ValidationError(field + ".n does not match the number of query points", field + ".n");
    }
  }
  try {
    return Dataset(std::move(x), std::move(y));
  } catch (const Error& err) {
    throw ValidationError(field + ": " + err.what(), err.field() ? field + "." + *err.field() : field);
  }
}

Json to_json(const TaggedDatasets& ds) {
  Json out = Json::object();
  for (const auto& [tag, d] : ds) out[tag] = to_json(d);
  return out;
}

TaggedDatasets tagged_from_json(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field + " must be an object keyed by tag", field);
  TaggedDatasets::Map entries;
  for (const auto& [tag, value] : j.items()) entries.emplace(tag, dataset_from_json(value, field + "." + tag));
  try {
    return TaggedDatasets(std::move(entries));
  } catch (const Error& e) {
    throw ValidationError(e.what(), e.field() ? field + "." + *e.field() : field);
  }
}

Json to_json(const GPHyperparameters& hp) {
  return Json{{"family", to_string(hp.kernel.family)},
              {"variance", hp.kernel.variance},
              {"lengthscales", to_json(hp.kernel.lengthscales)},
              {"mean", hp.mean},
              {"noise_variance", hp.noise_variance}};
}

GPHyperparameters hyperparameters_from_json(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field + " must be an object", field);
  GPHyperparameters hp;
  try {
    hp.kernel.family = kernel_family_from_string(string(member(j, "family", field), field + ".family"));
  } catch (const ConfigError& e) {
    throw ValidationError(e.what(), field + ".family");
  }
  hp.kernel.variance = number(member(j, "variance", field), field + ".variance");
  hp.kernel.lengthscales = vector_from_json(member(j, "lengthscales", field), field + ".lengthscales");
  hp.mean = number(member(j, "mean", field), field + ".mean");
  hp.noise_variance = number(member(j, "noise_variance", field), field + ".noise_variance");
  try {
    hp.validate();
  } catch (const Error& e) {
    throw ValidationError(field + ": " + e.what(), field);
  }
  return hp;
}

Json to_json(const TrustRegionState& s) {
  return Json{{"phase", to_string(s.phase)},
              {"center", to_json(s.center)},
              {"size", to_json(s.size)},
              {"initial_size", to_json(s.initial_size)},
              {"min_size", to_json(s.min_size)},
              {"gamma_shrink", s.gamma_shrink},
              {"gamma_expand", s.gamma_expand},
              {"best_seen", s.best_seen}};
}

TrustRegionState trust_region_from_json(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field + " must be an object", field);
  TrustRegionState s;
  s.phase = trust_region_phase_from_string(string(member(j, "phase", field), field + ".phase"));
  s.center = vector_from_json(member(j, "center", field), field + ".center");
  s.size = vector_from_json(member(j, "size", field), field + ".size");
  s.initial_size = vector_from_json(member(j, "initial_size", field), field + ".initial_size");
  s.min_size = vector_from_json(member(j, "min_size", field), field + ".min_size");
  s.gamma_shrink = number(member(j, "gamma_shrink", field), field + ".gamma_shrink");
  s.gamma_expand = number(member(j, "gamma_expand", field), field + ".gamma_expand");
  s.best_seen = number(member(j, "best_seen", field), field + ".best_seen");
  const auto d = s.center.size();
  if (s.size.size() != d || s.initial_size.size() != d || s.min_size.size() != d)
    throw ValidationError(field + " vectors must share one dimension", field);
  if (!(s.size.array() > 0.0).all()) throw ValidationError(field + ".size must be positive", field + ".size");
  return s;
}

Json to_json(const AcquisitionSpec& spec) {
  Json j{{"name", spec.name},
         {"beta", spec.beta},
         {"level", spec.level},
         {"alpha", spec.alpha},
         {"constraint_threshold", spec.constraint_threshold},
         {"mc_samples", spec.mc_samples},
         {"objective_tag", spec.objective_tag},
         {"constraint_tags", spec.constraint_tags},
         {"objective_tags", spec.objective_tags}};
  j["reference"] = spec.reference ? to_json(*spec.reference) : Json(nullptr);
  return j;
}

namespace {

std::vector<std::string> strings(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field + " must be an array of strings", field);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(string(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

AcquisitionSpec acquisition_from_json(const Json& j, const std::string& field) {
  AcquisitionSpec spec;
  if (j.is_string()) {
    spec.name = j.get<std::string>();
    return spec;
  }
  if (!j.is_object()) throw ValidationError(field + " must be a name or an object", field);
  if (j.contains("name")) spec.name = string(j["name"], field + ".name");
  if (j.contains("beta")) spec.beta = number(j["beta"], field + ".beta");
  if (j.contains("level")) spec.level = number(j["level"], field + ".level");
  if (j.contains("alpha")) spec.alpha = number(j["alpha"], field + ".alpha");
  if (j.contains("constraint_threshold"))
    spec.constraint_threshold = number(j["constraint_threshold"], field + ".constraint_threshold");
  if (j.contains("mc_samples")) spec.mc_samples = unsigned_integer(j["mc_samples"], field + ".mc_samples");
  if (j.contains("objective_tag")) spec.objective_tag = string(j["objective_tag"], field + ".objective_tag");
  if (j.contains("constraint_tags")) spec.constraint_tags = strings(j["constraint_tags"], field + ".constraint_tags");
  if (j.contains("objective_tags")) spec.objective_tags = strings(j["objective_tags"], field + ".objective_tags");
  if (j.contains("reference") && !j["reference"].is_null()) {
    spec.reference = vector_from_json(j["reference"], field + ".reference");
    if (spec.reference->size() != 2) throw ValidationError(field + ".reference must have two entries", field + ".reference");
  }
  return spec;
}

Json to_json(const RuleConfig& rule) {
  return Json{{"kind", to_string(rule.kind)},
              {"batch_size", rule.batch_size},
              {"acquisition", to_json(rule.acquisition)},
              {"candidate_count", rule.candidate_count},
              {"optimizer",
               {{"num_presamples", rule.optimizer.num_presamples},
                {"num_starts", rule.optimizer.num_starts},
                {"max_iterations", rule.optimizer.max_iterations},
                {"gradient_tolerance", rule.optimizer.gradient_tolerance},
                {"memory", rule.optimizer.memory}}}};
}

RuleConfig rule_from_json(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field + " must be an object", field);
  RuleConfig rule;
  try {
    if (j.contains("kind")) rule.kind = rule_kind_from_string(string(j["kind"], field + ".kind"));
  } catch (const ConfigError& e) {
    throw ValidationError(e.what(), field + ".kind");
  }
  if (j.contains("batch_size")) rule.batch_size = unsigned_integer(j["batch_size"], field + ".batch_size");
  if (j.contains("acquisition")) rule.acquisition = acquisition_from_json(j["acquisition"], field + ".acquisition");
  if (j.contains("candidate_count"))
    rule.candidate_count = unsigned_integer(j["candidate_count"], field + ".candidate_count");
  if (j.contains("optimizer")) {
    const Json& o = j["optimizer"];
    const std::string f = field + ".optimizer";
    if (!o.is_object()) throw ValidationError(f + " must be an object", f);
    if (o.contains("num_presamples")) rule.optimizer.num_presamples = unsigned_integer(o["num_presamples"], f + ".num_presamples");
    if (o.contains("num_starts")) rule.optimizer.num_starts = unsigned_integer(o["num_starts"], f + ".num_starts");
    if (o.contains("max_iterations")) rule.optimizer.max_iterations = unsigned_integer(o["max_iterations"], f + ".max_iterations");
    if (o.contains("gradient_tolerance")) rule.optimizer.gradient_tolerance = number(o["gradient_tolerance"], f + ".gradient_tolerance");
    if (o.contains("memory")) rule.optimizer.memory = unsigned_integer(o["memory"], f + ".memory");
  }
  return rule;
}

Json to_json(const LoopConfig& config) {
  Json j{{"space", to_json(config.space)},
         {"rule", to_json(config.rule)},
         {"tags", config.tags},
         {"initial_design", config.initial_design},
         {"seed", config.seed.value}};
  j["target"] = config.target ? Json(*config.target) : Json(nullptr);
  return j;
}

LoopConfig loop_config_from_json(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field + " must be an object", field);
  LoopConfig config{space_from_json(member(j, "space", field), "space"), {}, {}, 0, {}, {}, std::nullopt};
  if (j.contains("rule")) config.rule = rule_from_json(j["rule"], "rule");
  if (j.contains("tags")) config.tags = strings(j["tags"], "tags");
  if (j.contains("initial_design")) config.initial_design = unsigned_integer(j["initial_design"], "initial_design");
  if (j.contains("seed")) config.seed = RngSeed{unsigned_integer(j["seed"], "seed")};
  if (j.contains("target") && !j["target"].is_null()) config.target = number(j["target"], "target");
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ValidationError(e.what(), e.field());
  }
  return config;
}

Json parse(std::string_view payload) {
  try {
    return Json::parse(payload.begin(), payload.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON at byte ") + std::to_string(e.byte) + ": " + e.what(), e.byte);
  }
}

std::string dump(const Json& j) { return j.dump(); }

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError(field + " must be a number", field);
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(field + " must be finite", field);
  return v;
}

std::uint64_t unsigned_integer(const Json& j, const std::string& field) {
  if (!j.is_number_unsigned()) throw ValidationError(field + " must be a non-negative integer", field);
  return j.get<std::uint64_t>();
}

std::string string(const Json& j, const std::string& field) {
  if (!j.is_string()) throw ValidationError(field + " must be a string", field);
  return j.get<std::string>();
}

const Json& member(const Json& j, const char* key, const std::string& field) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(field + " is missing '" + key + "'", field + "." + key);
  return *it;
}

}  // namespace bolt::json_io
