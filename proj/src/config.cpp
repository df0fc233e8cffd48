#include "backflow/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "backflow/errors.hpp"

namespace backflow {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ValidationError, "field '" + field + "': " + why);
}

template <typename T>
T get_field(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    invalid(field, std::string("wrong type (") + j.type_name() + ")");
  }
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) invalid(field, std::string("expected a number, got ") + j.type_name());
  return j.get<double>();
}

long get_integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) {
    invalid(field, std::string("expected an integer, got ") + j.type_name());
  }
  return j.get<long>();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelConfig model_from_json(const json& j) {
  if (!j.is_object()) invalid("model", "expected an object");
  ModelConfig m;
  for (const auto& [key, value] : j.items()) {
    const std::string field = "model." + key;
    if (key == "preset") m.preset = get_field<std::string>(value, field);
    else if (key == "amplitude") m.amplitude = get_number(value, field);
    else if (key == "frequency") m.frequency = get_number(value, field);
    else if (key == "gamma") m.gamma = get_number(value, field);
    else if (key == "lambda") m.lambda = get_number(value, field);
    else if (key == "gamma1_csv") m.gamma1_csv = get_field<std::string>(value, field);
    else if (key == "gamma2_csv") m.gamma2_csv = get_field<std::string>(value, field);
    else if (key == "lambda1_csv") m.lambda1_csv = get_field<std::string>(value, field);
    else if (key == "lambda2_csv") m.lambda2_csv = get_field<std::string>(value, field);
    else invalid(field, "unknown field");
  }
  static const std::vector<std::string> presets{"sinusoidal", "constant", "zero", "tabulated"};
  if (std::find(presets.begin(), presets.end(), m.preset) == presets.end()) {
    invalid("model.preset", "unknown preset '" + m.preset + "'");
  }
  if (m.preset == "tabulated" && (m.gamma1_csv.empty() || m.gamma2_csv.empty())) {
    invalid("model.gamma1_csv", "tabulated preset needs gamma1_csv and gamma2_csv");
  }
  return m;
}

VerifyConfig verify_from_json(const json& j) {
  if (!j.is_object()) invalid("verify", "expected an object");
  VerifyConfig v;
  for (const auto& [key, value] : j.items()) {
    const std::string field = "verify." + key;
    if (key == "dims") {
      if (!value.is_array() || value.empty()) invalid(field, "expected a non-empty array");
      v.dims.clear();
      for (const auto& d : value) v.dims.push_back(static_cast<int>(get_integer(d, field)));
    } else if (key == "trials") {
      v.trials = static_cast<int>(get_integer(value, field));
    } else if (key == "inject_fault") {
      v.inject_fault = get_field<bool>(value, field);
    } else {
      invalid(field, "unknown field");
    }
  }
  if (v.trials < 1) invalid("verify.trials", "must be >= 1");
  for (int d : v.dims) {
    if (d < 2 || d > 8) invalid("verify.dims", "dimensions must lie in [2, 8]");
  }
  return v;
}

NamedPair pair_from_json(const json& j, const std::string& field, const std::string& fallback) {
  if (!j.is_object() || !j.contains("rho1") || !j.contains("rho2")) {
    invalid(field, "expected an object with rho1 and rho2");
  }
  const std::string name = j.contains("name") ? get_field<std::string>(j["name"], field + ".name")
                                              : fallback;
  try {
    return NamedPair{name, DensityMatrix::make(matrix_from_json(j["rho1"], field + ".rho1")),
                     DensityMatrix::make(matrix_from_json(j["rho2"], field + ".rho2"))};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    invalid(field, e.what());
  }
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(line) + ": " + e.what());
  }
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) invalid(field, "expected a non-empty array of rows");
  const std::size_t n = j.size();
  Matrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    if (!j[r].is_array() || j[r].size() != n) invalid(field, "matrix must be square");
    for (std::size_t c = 0; c < n; ++c) {
      const json& e = j[r][c];
      if (e.is_number()) {
        m(r, c) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        invalid(field, "entries must be numbers or [re, im]");
      }
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string to_string(Engine engine) {
  return engine == Engine::ClosedForm ? "closed_form" : "integrator";
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) invalid("<root>", "config must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "model") c.model = model_from_json(value);
    else if (key == "t_max") c.t_max = get_number(value, key);
    else if (key == "grid_steps") c.grid_steps = static_cast<int>(get_integer(value, key));
    else if (key == "seed") {
      if (!value.is_number_integer() || (!value.is_number_unsigned() && value.get<long long>() < 0)) {
        invalid(key, "expected an unsigned 64-bit integer");
      }
      c.seed = value.get<std::uint64_t>();
    } else if (key == "samples") c.samples = get_integer(value, key);
    else if (key == "mixed_samples") c.mixed_samples = static_cast<int>(get_integer(value, key));
    else if (key == "bins") c.bins = static_cast<int>(get_integer(value, key));
    else if (key == "dim") c.dim = static_cast<int>(get_integer(value, key));
    else if (key == "candidate_pairs") {
      if (!value.is_array()) invalid(key, "expected an array");
      for (std::size_t i = 0; i < value.size(); ++i) {
        c.candidate_pairs.push_back(pair_from_json(
            value[i], key + "[" + std::to_string(i) + "]", "pair" + std::to_string(i)));
      }
    } else if (key == "include_mpair") c.include_mpair = get_field<bool>(value, key);
    else if (key == "refine") c.refine = get_field<bool>(value, key);
    else if (key == "pair") c.pair = get_field<std::string>(value, key);
    else if (key == "epsilon_fraction") c.epsilon_fraction = get_number(value, key);
    else if (key == "engine") {
      const auto e = get_field<std::string>(value, key);
      if (e == "closed_form") c.engine = Engine::ClosedForm;
      else if (e == "integrator") c.engine = Engine::Integrator;
      else invalid(key, "expected closed_form or integrator");
    } else if (key == "output") c.output = get_field<std::string>(value, key);
    else if (key == "format") c.format = get_field<std::string>(value, key);
    else if (key == "threads") c.threads = static_cast<int>(get_integer(value, key));
    else if (key == "verify") c.verify = verify_from_json(value);
    else invalid(key, "unknown field");
  }

  if (!(c.t_max > 0.0)) invalid("t_max", "must be > 0");
  if (c.grid_steps < 10) invalid("grid_steps", "must be >= 10");
  if (c.samples < 1) invalid("samples", "must be >= 1");
  if (c.mixed_samples < 0) invalid("mixed_samples", "must be >= 0");
  if (c.bins < 1) invalid("bins", "must be >= 1");
  if (c.dim < 2 || c.dim > 8) invalid("dim", "must lie in [2, 8]");
  if (!(c.epsilon_fraction > 0.0 && c.epsilon_fraction < 1.0)) {
    invalid("epsilon_fraction", "must lie in (0, 1)");
  }
  if (c.format != "csv" && c.format != "json") invalid("format", "expected csv or json");
  if (c.threads < 0) invalid("threads", "must be >= 0");
  if (c.pair.empty()) invalid("pair", "must name a preset or a file");
  for (const NamedPair& p : c.candidate_pairs) {
    if (p.first.dim() != c.dim || p.second.dim() != c.dim) {
      invalid("candidate_pairs", "pair '" + p.name + "' does not match dim " +
                                     std::to_string(c.dim));
    }
  }
  return c;
}

json to_json(const RunConfig& c) {
  json model = {{"preset", c.model.preset},
                {"amplitude", c.model.amplitude},
                {"frequency", c.model.frequency},
                {"gamma", c.model.gamma},
                {"lambda", c.model.lambda}};
  for (const auto& [key, path] : {std::pair{"gamma1_csv", &c.model.gamma1_csv},
                                  std::pair{"gamma2_csv", &c.model.gamma2_csv},
                                  std::pair{"lambda1_csv", &c.model.lambda1_csv},
                                  std::pair{"lambda2_csv", &c.model.lambda2_csv}}) {
    if (!path->empty()) model[key] = *path;
  }
  json pairs = json::array();
  for (const NamedPair& p : c.candidate_pairs) {
    pairs.push_back({{"name", p.name},
                     {"rho1", matrix_to_json(p.first.matrix())},
                     {"rho2", matrix_to_json(p.second.matrix())}});
  }
  return json{{"model", model},
              {"t_max", c.t_max},
              {"grid_steps", c.grid_steps},
              {"seed", c.seed},
              {"samples", c.samples},
              {"mixed_samples", c.mixed_samples},
              {"bins", c.bins},
              {"dim", c.dim},
              {"candidate_pairs", pairs},
              {"include_mpair", c.include_mpair},
              {"refine", c.refine},
              {"pair", c.pair},
              {"epsilon_fraction", c.epsilon_fraction},
              {"engine", to_string(c.engine)},
              {"output", c.output},
              {"format", c.format},
              {"threads", c.threads},
              {"verify",
               {{"dims", c.verify.dims},
                {"trials", c.verify.trials},
                {"inject_fault", c.verify.inject_fault}}}};
}

RunConfig parse_config(const std::optional<std::string>& path, const json& overrides) {
  json base = json::object();
  if (path) base = parse_json_text(read_file(*path), *path);
  if (!base.is_object()) invalid("<root>", "config must be a JSON object");
  base.merge_patch(overrides);
  return config_from_json(base);
}

RateFunctions make_rates(const ModelConfig& m) {
  if (m.preset == "sinusoidal") return RateFunctions::sinusoidal(m.amplitude, m.frequency);
  if (m.preset == "constant") return RateFunctions::constant(m.gamma, m.lambda);
  if (m.preset == "zero") return RateFunctions::zero();
  const TabulatedFunction none({0.0, 1e300}, {0.0, 0.0});
  return RateFunctions::tabulated(
      load_rate_csv(m.gamma1_csv), load_rate_csv(m.gamma2_csv),
      m.lambda1_csv.empty() ? none : load_rate_csv(m.lambda1_csv),
      m.lambda2_csv.empty() ? none : load_rate_csv(m.lambda2_csv));
}

DynamicsModel make_model(const RunConfig& c) {
  return DynamicsModel::build(make_rates(c.model), uniform_grid(c.t_max, c.grid_steps),
                              c.engine);
}

NamedPair resolve_pair(const std::string& spec) {
  if (auto preset = named_pair(spec)) return *preset;
  std::ifstream probe(spec);
  if (!probe) {
    throw Error(ErrorCode::ValidationError,
                "field 'pair': '" + spec + "' is neither a preset nor a readable file");
  }
  return pair_from_json(parse_json_text(read_file(spec), spec), "pair", spec);
}

}  // namespace backflow
