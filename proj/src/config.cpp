#include "signvar/config.hpp"

#include "signvar/error.hpp"

#include <fstream>
#include <set>

namespace signvar {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
T read(const json& obj, const char* key, const T& fallback, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

std::vector<DeterministicTerm> parse_deterministic(const json& arr) {
  if (!arr.is_array()) throw ConfigError("model.deterministic must be an array");
  std::vector<DeterministicTerm> out;
  for (const auto& item : arr) {
    DeterministicTerm t;
    std::string kind;
    if (item.is_string()) {
      kind = item.get<std::string>();
    } else if (item.is_object()) {
      check_keys(item, {"kind", "period", "column"}, "model.deterministic entry");
      kind = read<std::string>(item, "kind", "", "model.deterministic");
    } else {
      throw ConfigError("model.deterministic entries must be strings or objects");
    }
    if (kind == "constant") {
      t.kind = DeterministicTerm::Kind::Constant;
    } else if (kind == "trend") {
      t.kind = DeterministicTerm::Kind::Trend;
    } else if (kind == "seasonal") {
      t.kind = DeterministicTerm::Kind::Seasonal;
      t.period = item.is_object() ? read<int>(item, "period", 0, "model.deterministic") : 0;
      if (t.period < 2) throw ConfigError("seasonal dummies need a period >= 2");
    } else if (kind == "exogenous") {
      t.kind = DeterministicTerm::Kind::Exogenous;
      t.column = item.is_object() ? read<std::string>(item, "column", "", "model.deterministic") : "";
      if (t.column.empty()) throw ConfigError("exogenous terms need a 'column'");
    } else {
      throw ConfigError("unknown deterministic term '" + kind + "'");
    }
    out.push_back(t);
  }
  return out;
}

PriorConfig parse_prior(const json& j) {
  PriorConfig p;
  if (j.is_null()) return p;
  const std::string kind = read<std::string>(j, "kind", "minnesota", "prior");
  if (kind == "minnesota") {
    check_keys(j, {"kind", "tightness", "lag_decay", "own_lag_mean", "deterministic_scale", "nu"},
               "prior");
    p.kind = PriorConfig::Kind::Minnesota;
    auto& h = p.minnesota;
    h.tightness = read<double>(j, "tightness", h.tightness, "prior");
    h.lag_decay = read<double>(j, "lag_decay", h.lag_decay, "prior");
    h.own_lag_mean = read<double>(j, "own_lag_mean", h.own_lag_mean, "prior");
    h.deterministic_scale = read<double>(j, "deterministic_scale", h.deterministic_scale, "prior");
    if (j.contains("nu") && !j.at("nu").is_null()) h.nu = read<int>(j, "nu", 0, "prior");
    if (!(h.tightness > 0.0) || !(h.deterministic_scale > 0.0) || !(h.lag_decay >= 0.0)) {
      throw ConfigError("prior: tightness and deterministic_scale must be positive, lag_decay >= 0");
    }
  } else if (kind == "flat") {
    check_keys(j, {"kind", "nu", "phi_scale"}, "prior");
    p.kind = PriorConfig::Kind::Flat;
    if (j.contains("nu") && !j.at("nu").is_null()) p.flat_nu = read<int>(j, "nu", 0, "prior");
    p.flat_phi_scale = read<double>(j, "phi_scale", p.flat_phi_scale, "prior");
    if (!(p.flat_phi_scale > 0.0)) throw ConfigError("prior: phi_scale must be positive");
  } else if (kind == "niw") {
    check_keys(j, {"kind", "nu", "Phi", "Psi", "Omega"}, "prior");
    p.kind = PriorConfig::Kind::Niw;
    p.niw.nu = read<int>(j, "nu", 0, "prior");
    p.niw.Phi = matrix_from_json(j.at("Phi"), "prior.Phi");
    p.niw.Psi = matrix_from_json(j.at("Psi"), "prior.Psi");
    p.niw.Omega = matrix_from_json(j.at("Omega"), "prior.Omega");
  } else {
    throw ConfigError("unknown prior kind '" + kind + "'");
  }
  return p;
}

SamplerSection parse_sampler(const json& j) {
  check_keys(j,
             {"algorithm", "iterations", "thin", "burn_in", "seed", "chains", "draws",
              "proposal_budget", "max_shrink_iterations", "max_init_attempts",
              "validate_each_iteration"},
             "sampler");
  SamplerSection s;
  const std::string alg = read<std::string>(j, "algorithm", "gibbs", "sampler");
  if (alg == "gibbs") {
    s.algorithm = Algorithm::Gibbs;
  } else if (alg == "accept-reject") {
    s.algorithm = Algorithm::AcceptReject;
  } else {
    throw ConfigError("sampler.algorithm must be \"gibbs\" or \"accept-reject\"");
  }
  if (!j.contains("seed") || !j.at("seed").is_number_integer() ||
      (!j.at("seed").is_number_unsigned() && j.at("seed").get<long long>() < 0)) {
    throw ConfigError("sampler.seed is mandatory and must be a non-negative integer");
  }
  auto& g = s.gibbs;
  g.seed = j.at("seed").get<std::uint64_t>();
  g.iterations = read<long long>(j, "iterations", g.iterations, "sampler");
  g.thin = read<int>(j, "thin", g.thin, "sampler");
  if (j.contains("burn_in") && !j.at("burn_in").is_null()) {
    g.burn_in = read<long long>(j, "burn_in", 0, "sampler");
  }
  g.max_shrink_iterations = read<int>(j, "max_shrink_iterations", g.max_shrink_iterations, "sampler");
  g.max_init_attempts = read<long long>(j, "max_init_attempts", g.max_init_attempts, "sampler");
  g.validate_each_iteration =
      read<bool>(j, "validate_each_iteration", g.validate_each_iteration, "sampler");
  s.chains = read<int>(j, "chains", s.chains, "sampler");
  s.draws = read<long long>(j, "draws", s.draws, "sampler");
  s.proposal_budget = read<long long>(j, "proposal_budget", s.proposal_budget, "sampler");
  if (s.chains < 1) throw ConfigError("sampler.chains must be >= 1");
  if (s.draws < 1) throw ConfigError("sampler.draws must be >= 1");
  if (s.proposal_budget < 1) throw ConfigError("sampler.proposal_budget must be >= 1");
  g.validate();
  return s;
}

OutputConfig parse_output(const json& j, const std::filesystem::path& base) {
  OutputConfig o;
  if (j.is_null()) {
    o.directory = resolve(o.directory, base);
    return o;
  }
  check_keys(j,
             {"directory", "draws_path", "summary_path", "diagnostics_path", "config_echo_path",
              "irf_horizon", "draws_csv", "record_timing", "batch_size", "quantiles"},
             "output");
  o.directory = resolve(read<std::string>(j, "directory", o.directory.string(), "output"), base);
  o.draws_path = read<std::string>(j, "draws_path", o.draws_path, "output");
  o.summary_path = read<std::string>(j, "summary_path", o.summary_path, "output");
  o.diagnostics_path = read<std::string>(j, "diagnostics_path", o.diagnostics_path, "output");
  o.config_echo_path = read<std::string>(j, "config_echo_path", o.config_echo_path, "output");
  o.irf_horizon = read<int>(j, "irf_horizon", o.irf_horizon, "output");
  o.draws_csv = read<bool>(j, "draws_csv", o.draws_csv, "output");
  o.record_timing = read<bool>(j, "record_timing", o.record_timing, "output");
  o.batch_size = read<int>(j, "batch_size", o.batch_size, "output");
  o.quantiles = read<std::vector<double>>(j, "quantiles", o.quantiles, "output");
  if (o.irf_horizon < 0) throw ConfigError("output.irf_horizon must be >= 0");
  if (o.batch_size < 1) throw ConfigError("output.batch_size must be >= 1");
  for (double q : o.quantiles) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("output.quantiles must lie in [0, 1]");
  }
  return o;
}

}  // namespace

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  if (!j[0].is_array()) throw ConfigError(what + " must be an array of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(what + ": ragged matrix at row " + std::to_string(r));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ConfigError(what + ": non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j,
             {"schema_version", "data_path", "columns", "model", "prior", "restrictions",
              "normalize_shocks", "sampler", "output"},
             "config");
  RunConfig c;
  try {
    c.schema_version = read<int>(j, "schema_version", 0, "config");
    if (c.schema_version != kSchemaVersion) {
      throw ConfigError("config.schema_version must be " + std::to_string(kSchemaVersion));
    }
    const std::string data = read<std::string>(j, "data_path", "", "config");
    if (data.empty()) throw ConfigError("config.data_path is required");
    c.data_path = resolve(data, base_dir);
    c.columns = read<std::vector<std::string>>(j, "columns", {}, "config");

    const json model = j.contains("model") ? j.at("model") : json::object();
    check_keys(model, {"lags", "deterministic"}, "model");
    c.lags = read<int>(model, "lags", c.lags, "model");
    if (c.lags < 0) throw ConfigError("model.lags must be >= 0");
    if (model.contains("deterministic")) c.deterministic = parse_deterministic(model.at("deterministic"));

    c.prior = parse_prior(j.contains("prior") ? j.at("prior") : json());
    if (j.contains("restrictions")) {
      c.restrictions = j.at("restrictions");
      if (!c.restrictions.is_array()) throw ConfigError("restrictions must be an array");
    }
    c.normalize_shocks = read<bool>(j, "normalize_shocks", false, "config");
    if (!j.contains("sampler")) throw ConfigError("config.sampler is required (it carries the seed)");
    c.sampler = parse_sampler(j.at("sampler"));
    c.output = parse_output(j.contains("output") ? j.at("output") : json(), base_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["data_path"] = c.data_path.string();
  j["columns"] = c.columns;

  json det = json::array();
  for (const auto& t : c.deterministic) {
    switch (t.kind) {
      case DeterministicTerm::Kind::Constant: det.push_back("constant"); break;
      case DeterministicTerm::Kind::Trend: det.push_back("trend"); break;
      case DeterministicTerm::Kind::Seasonal:
        det.push_back({{"kind", "seasonal"}, {"period", t.period}});
        break;
      case DeterministicTerm::Kind::Exogenous:
        det.push_back({{"kind", "exogenous"}, {"column", t.column}});
        break;
    }
  }
  j["model"] = {{"lags", c.lags}, {"deterministic", det}};

  json prior;
  switch (c.prior.kind) {
    case PriorConfig::Kind::Minnesota: {
      const auto& h = c.prior.minnesota;
      prior = {{"kind", "minnesota"},
               {"tightness", h.tightness},
               {"lag_decay", h.lag_decay},
               {"own_lag_mean", h.own_lag_mean},
               {"deterministic_scale", h.deterministic_scale},
               {"nu", h.nu ? json(*h.nu) : json()}};
      break;
    }
    case PriorConfig::Kind::Flat:
      prior = {{"kind", "flat"},
               {"nu", c.prior.flat_nu ? json(*c.prior.flat_nu) : json()},
               {"phi_scale", c.prior.flat_phi_scale}};
      break;
    case PriorConfig::Kind::Niw:
      prior = {{"kind", "niw"},
               {"nu", c.prior.niw.nu},
               {"Phi", matrix_to_json(c.prior.niw.Phi)},
               {"Psi", matrix_to_json(c.prior.niw.Psi)},
               {"Omega", matrix_to_json(c.prior.niw.Omega)}};
      break;
  }
  j["prior"] = prior;
  j["restrictions"] = c.restrictions;
  j["normalize_shocks"] = c.normalize_shocks;

  const auto& g = c.sampler.gibbs;
  j["sampler"] = {{"algorithm", c.sampler.algorithm == Algorithm::Gibbs ? "gibbs" : "accept-reject"},
                  {"iterations", g.iterations},
                  {"thin", g.thin},
                  {"burn_in", g.resolved_burn_in()},
                  {"seed", g.seed},
                  {"chains", c.sampler.chains},
                  {"draws", c.sampler.draws},
                  {"proposal_budget", c.sampler.proposal_budget},
                  {"max_shrink_iterations", g.max_shrink_iterations},
                  {"max_init_attempts", g.max_init_attempts},
                  {"validate_each_iteration", g.validate_each_iteration}};
  const auto& o = c.output;
  j["output"] = {{"directory", o.directory.string()},
                 {"draws_path", o.draws_path},
                 {"summary_path", o.summary_path},
                 {"diagnostics_path", o.diagnostics_path},
                 {"config_echo_path", o.config_echo_path},
                 {"irf_horizon", o.irf_horizon},
                 {"draws_csv", o.draws_csv},
                 {"record_timing", o.record_timing},
                 {"batch_size", o.batch_size},
                 {"quantiles", o.quantiles}};
  return j;
}

}  // namespace signvar
