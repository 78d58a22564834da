#include "minexp/cli/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace minexp::cli {
namespace {

Error parse_error(const std::string& what) { return Error(ErrorKind::kParseError, what); }

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw parse_error(where + ": expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Point point_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw parse_error(where + ": expected an array of numbers");
  Point p;
  for (const auto& x : j) {
    if (!x.is_number()) throw parse_error(where + ": expected an array of numbers");
    p.push_back(x.get<double>());
  }
  return p;
}

std::vector<std::vector<double>> rows_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw parse_error(where + ": expected an array of arrays");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) rows.push_back(point_from(r, where));
  return rows;
}

template <typename T>
T number_from(const Json& j, const std::string& key) {
  if (!j.is_number()) throw parse_error("config." + key + ": expected a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (!j.is_number_unsigned()) throw parse_error("config." + key + ": expected a non-negative integer");
  }
  return j.get<T>();
}

std::string node_method_name(NodeMethod m) {
  return m == NodeMethod::kGeneralizedEig ? "generalized_eig" : "hankel_polynomial";
}

std::string coefficient_mode_name(CoefficientMode m) {
  return m == CoefficientMode::kLeastSquares ? "least_squares" : "square";
}

}  // namespace

Json model_to_json(const ExponentialModel& model) {
  Json terms = Json::array();
  for (const auto& t : model.terms()) {
    Json exponent = Json::array();
    for (auto z : t.exponent) exponent.push_back(complex_json(z));
    terms.push_back(Json{{"coeff", complex_json(t.coefficient)}, {"exponent", exponent}});
  }
  return Json{{"dimension", model.dimension()}, {"terms", terms}};
}

ExponentialModel model_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("dimension") || !doc.contains("terms"))
    throw parse_error("model: expected {\"dimension\", \"terms\"}");
  if (!doc["dimension"].is_number_unsigned()) throw parse_error("model.dimension: expected a positive integer");
  const auto d = doc["dimension"].get<std::size_t>();
  if (!doc["terms"].is_array()) throw parse_error("model.terms: expected an array");
  std::vector<Term> terms;
  for (std::size_t j = 0; j < doc["terms"].size(); ++j) {
    const auto& t = doc["terms"][j];
    const std::string where = "model.terms[" + std::to_string(j) + "]";
    if (!t.is_object() || !t.contains("coeff") || !t.contains("exponent"))
      throw parse_error(where + ": expected {\"coeff\", \"exponent\"}");
    Term term;
    term.coefficient = complex_from(t["coeff"], where + ".coeff");
    if (!t["exponent"].is_array()) throw parse_error(where + ".exponent: expected an array");
    for (const auto& z : t["exponent"]) term.exponent.push_back(complex_from(z, where + ".exponent"));
    terms.push_back(std::move(term));
  }
  return ExponentialModel(d, std::move(terms));
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kInvalidArgument, "cannot write " + path);
  out << text;
}

ExponentialModel read_model(const std::string& path) { return model_from_json(read_json(path)); }

void write_model(const std::string& path, const ExponentialModel& model) {
  write_text(path, model_to_json(model).dump(2) + "\n");
}

RunConfig config_from_json(const Json& doc) {
  if (!doc.is_object()) throw parse_error("config: expected an object");
  static const std::set<std::string> known = {
      "directions", "step", "multipliers", "weights", "phase_floor", "rel_tol", "gap_factor",
      "node_tol", "max_terms", "budget_cap", "seed", "known_n", "node_method",
      "coefficient_mode", "rescue_shifts", "rescue_epsilon", "parallel_piles", "noise",
      "model", "samples", "out"};
  for (const auto& [key, value] : doc.items())
    if (!known.count(key)) throw parse_error("config: unknown key '" + key + "'");

  RunConfig c;
  if (doc.contains("directions")) c.directions = rows_from(doc["directions"], "config.directions");
  if (doc.contains("step")) c.step = number_from<double>(doc["step"], "step");
  if (doc.contains("multipliers")) c.multipliers = rows_from(doc["multipliers"], "config.multipliers");
  if (doc.contains("weights")) c.weights = rows_from(doc["weights"], "config.weights");
  if (doc.contains("phase_floor")) c.phase_floor = number_from<double>(doc["phase_floor"], "phase_floor");
  if (doc.contains("rel_tol")) c.rel_tol = number_from<double>(doc["rel_tol"], "rel_tol");
  if (doc.contains("gap_factor")) c.gap_factor = number_from<double>(doc["gap_factor"], "gap_factor");
  if (doc.contains("node_tol")) c.node_tol = number_from<double>(doc["node_tol"], "node_tol");
  if (doc.contains("max_terms")) c.max_terms = number_from<std::size_t>(doc["max_terms"], "max_terms");
  if (doc.contains("budget_cap") && !doc["budget_cap"].is_null())
    c.budget_cap = number_from<std::size_t>(doc["budget_cap"], "budget_cap");
  if (doc.contains("seed")) c.seed = number_from<std::uint64_t>(doc["seed"], "seed");
  if (doc.contains("known_n") && !doc["known_n"].is_null())
    c.known_n = number_from<std::size_t>(doc["known_n"], "known_n");
  if (doc.contains("node_method")) {
    const auto m = doc["node_method"].get<std::string>();
    if (m == "generalized_eig") c.node_method = NodeMethod::kGeneralizedEig;
    else if (m == "hankel_polynomial") c.node_method = NodeMethod::kHankelPolynomial;
    else throw parse_error("config.node_method: expected generalized_eig or hankel_polynomial");
  }
  if (doc.contains("coefficient_mode")) {
    const auto m = doc["coefficient_mode"].get<std::string>();
    if (m == "least_squares") c.coefficient_mode = CoefficientMode::kLeastSquares;
    else if (m == "square") c.coefficient_mode = CoefficientMode::kSquare;
    else throw parse_error("config.coefficient_mode: expected least_squares or square");
  }
  if (doc.contains("rescue_shifts"))
    c.rescue_shifts = number_from<std::size_t>(doc["rescue_shifts"], "rescue_shifts");
  if (doc.contains("rescue_epsilon") && !doc["rescue_epsilon"].is_null())
    c.rescue_epsilon = point_from(doc["rescue_epsilon"], "config.rescue_epsilon");
  if (doc.contains("parallel_piles")) {
    if (!doc["parallel_piles"].is_boolean()) throw parse_error("config.parallel_piles: expected a boolean");
    c.parallel_piles = doc["parallel_piles"].get<bool>();
  }
  if (doc.contains("noise")) c.noise = number_from<double>(doc["noise"], "noise");
  auto path = [&](const char* key, std::optional<std::string>& out) {
    if (doc.contains(key) && !doc[key].is_null()) {
      if (!doc[key].is_string()) throw parse_error(std::string("config.") + key + ": expected a path");
      out = doc[key].get<std::string>();
    }
  };
  path("model", c.model_path);
  path("samples", c.samples_path);
  path("out", c.out_dir);

  if (!(c.rel_tol > 0.0) || !(c.gap_factor > 0.0) || !(c.node_tol > 0.0) || !(c.step > 0.0))
    throw parse_error("config: tolerances and step must be positive");
  if (c.noise < 0.0) throw parse_error("config.noise: must be non-negative");
  if (c.max_terms == 0) throw parse_error("config.max_terms: must be >= 1");
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json doc;
  if (!c.directions.empty()) doc["directions"] = c.directions;
  doc["step"] = c.step;
  doc["multipliers"] = c.multipliers;
  doc["weights"] = c.weights;
  doc["phase_floor"] = c.phase_floor;
  doc["rel_tol"] = c.rel_tol;
  doc["gap_factor"] = c.gap_factor;
  doc["node_tol"] = c.node_tol;
  doc["max_terms"] = c.max_terms;
  doc["budget_cap"] = c.budget_cap ? Json(*c.budget_cap) : Json(nullptr);
  doc["seed"] = c.seed;
  doc["known_n"] = c.known_n ? Json(*c.known_n) : Json(nullptr);
  doc["node_method"] = node_method_name(c.node_method);
  doc["coefficient_mode"] = coefficient_mode_name(c.coefficient_mode);
  doc["rescue_shifts"] = c.rescue_shifts;
  doc["rescue_epsilon"] = c.rescue_epsilon ? Json(*c.rescue_epsilon) : Json(nullptr);
  doc["parallel_piles"] = c.parallel_piles;
  doc["noise"] = c.noise;
  doc["model"] = c.model_path ? Json(*c.model_path) : Json(nullptr);
  doc["samples"] = c.samples_path ? Json(*c.samples_path) : Json(nullptr);
  doc["out"] = c.out_dir ? Json(*c.out_dir) : Json(nullptr);
  return doc;
}

RunConfig read_config(const std::string& path) { return config_from_json(read_json(path)); }

DirectionBasis make_basis(const RunConfig& config, std::size_t dimension) {
  if (config.directions.empty()) {
    const auto standard = DirectionBasis::standard(dimension, config.step);
    return DirectionBasis(standard.directions(), config.multipliers, config.weights);
  }
  if (config.directions.size() != dimension)
    throw Error(ErrorKind::kInvalidArgument, "config has " + std::to_string(config.directions.size()) +
                                                 " directions for dimension " +
                                                 std::to_string(dimension));
  return DirectionBasis(config.directions, config.multipliers, config.weights);
}

RecoveryConfig make_recovery_config(const RunConfig& c) {
  RecoveryConfig r;
  r.rank.rel_tol = c.rel_tol;
  r.rank.gap_factor = c.gap_factor;
  r.node_tol = c.node_tol;
  r.max_terms = c.max_terms;
  r.budget_cap = c.budget_cap;
  r.node_method = c.node_method;
  r.coefficient_mode = c.coefficient_mode;
  r.window = PhaseWindow{c.phase_floor};
  r.rescue_shifts = c.rescue_shifts;
  r.rescue_epsilon = c.rescue_epsilon;
  r.seed = c.seed;
  r.parallel_piles = c.parallel_piles;
  return r;
}

Json report_to_json(const RecoveryReport& report, std::span<const SampleRecord> consumed) {
  Json doc;
  doc["status"] = report.model ? "ok" : "partial";
  doc["n"] = report.model ? Json(report.model->size()) : Json(nullptr);
  doc["samples_used"] = report.samples_used;
  doc["base_origin"] = report.base_origin;
  Json levels = Json::array();
  for (const auto& l : report.levels) {
    Json level;
    level["level"] = l.level;
    level["pile_count"] = l.pile_count;
    level["pile_ranks"] = l.pile_ranks;
    level["multipliers"] = l.multipliers;
    level["weights"] = l.weights;
    level["samples_drawn"] = l.samples_drawn;
    Json omegas = Json::array();
    for (auto z : l.omegas) omegas.push_back(complex_json(z));
    level["omegas"] = omegas;
    levels.push_back(level);
  }
  doc["levels"] = levels;
  Json ranks = Json::array();
  for (const auto& r : report.rank_decisions)
    ranks.push_back(Json{{"rank", r.rank}, {"confident", r.confident}});
  doc["rank_decisions"] = ranks;
  doc["warnings"] = report.warnings;
  Json inner = Json::array();
  for (const auto& row : report.inner_products) {
    Json r = Json::array();
    for (auto z : row) r.push_back(complex_json(z));
    inner.push_back(r);
  }
  doc["inner_products"] = inner;
  if (report.model) {
    double worst = 0.0;
    double scale = 0.0;
    Json residuals = Json::array();
    for (const auto& s : consumed) {
      const double r = std::abs(evaluate(*report.model, s.point) - s.value);
      residuals.push_back(r);
      worst = std::max(worst, r);
      scale = std::max(scale, std::abs(s.value));
    }
    doc["max_relative_residual"] = scale > 0.0 ? worst / scale : worst;
    doc["residuals"] = residuals;
  }
  return doc;
}

}  // namespace minexp::cli
