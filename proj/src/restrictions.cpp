#include "signvar/restrictions.hpp"

#include "signvar/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace signvar {

namespace {

void check_index(int value, int n, const char* what) {
  if (value < 0 || value >= n) {
    throw ConfigError(std::string("restriction: ") + what + " index " + std::to_string(value) +
                      " out of range [0, " + std::to_string(n) + ")");
  }
}

void check_horizon(int h) {
  if (h < 0) throw ConfigError("restriction: horizon must be >= 0");
}

}  // namespace

void RestrictionSet::validate(int n) const {
  for (const auto& r : signs) {
    check_index(r.shock, n, "shock");
    check_index(r.variable, n, "variable");
    check_horizon(r.horizons.first);
    if (r.horizons.last < r.horizons.first) throw ConfigError("restriction: empty horizon range");
    if (r.sign != 1 && r.sign != -1) throw ConfigError("restriction: sign must be +1 or -1");
  }
  for (const auto& r : ratios) {
    check_index(r.shock, n, "shock");
    check_index(r.numerator_variable, n, "numerator variable");
    check_index(r.denominator_variable, n, "denominator variable");
    check_horizon(r.horizon);
    if (!(r.lower < r.upper)) throw ConfigError("restriction: ratio bounds need lower < upper");
  }
  for (const auto& r : rankings) {
    check_index(r.shock, n, "shock");
    check_index(r.greater_variable, n, "greater variable");
    check_index(r.lesser_variable, n, "lesser variable");
    check_horizon(r.horizon);
    if (r.greater_variable == r.lesser_variable) {
      throw ConfigError("restriction: ranking needs two distinct variables");
    }
    if (r.sign != 1 && r.sign != -1) throw ConfigError("restriction: sign must be +1 or -1");
  }
}

std::vector<int> RestrictionSet::identified_shocks() const {
  std::set<int> shocks;
  for (const auto& r : signs) shocks.insert(r.shock);
  for (const auto& r : ratios) shocks.insert(r.shock);
  for (const auto& r : rankings) shocks.insert(r.shock);
  return {shocks.begin(), shocks.end()};
}

int required_horizon(const RestrictionSet& set) {
  int h = 0;
  for (const auto& r : set.signs) h = std::max(h, r.horizons.last);
  for (const auto& r : set.ratios) h = std::max(h, r.horizon);
  for (const auto& r : set.rankings) h = std::max(h, r.horizon);
  return h;
}

bool evaluate(const RestrictionSet& set, const ImpulseResponses& irfs) {
  if (irfs.horizon() < required_horizon(set)) {
    throw ConfigError("evaluate: impulse responses stop at horizon " +
                      std::to_string(irfs.horizon()) + ", restrictions need " +
                      std::to_string(required_horizon(set)));
  }
  for (const auto& r : set.signs) {
    for (int h = r.horizons.first; h <= r.horizons.last; ++h) {
      if (!(r.sign * irfs(r.variable, r.shock, h) > 0.0)) return false;
    }
  }
  for (const auto& r : set.rankings) {
    const double diff =
        irfs(r.greater_variable, r.shock, r.horizon) - irfs(r.lesser_variable, r.shock, r.horizon);
    if (!(r.sign * diff > 0.0)) return false;
  }
  for (const auto& r : set.ratios) {
    const double den = irfs(r.denominator_variable, r.shock, r.horizon);
    if (den == 0.0) return false;
    const double ratio = irfs(r.numerator_variable, r.shock, r.horizon) / den;
    if (!(ratio > r.lower && ratio < r.upper)) return false;
  }
  return true;
}

bool indicator_with_factor(const RestrictionSet& set, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& sigma_chol, const Eigen::MatrixXd& Q, int p) {
  if (set.empty()) return true;
  const Eigen::MatrixXd L0 = sigma_chol.triangularView<Eigen::Lower>() * Q;
  return evaluate(set, compute_irfs_from_impact(B, L0, p, required_horizon(set)));
}

bool indicator(const RestrictionSet& set, const OrthogonalParams& params, const ModelSpec& spec) {
  if (set.empty()) return true;
  return indicator_with_factor(set, params.B, chol_factor(params.Sigma), params.Q, spec.p);
}

namespace {

int resolve_variable(const nlohmann::json& v, const std::vector<std::string>& names) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("restriction: unknown variable '" + name + "'");
    return static_cast<int>(it - names.begin());
  }
  throw ConfigError("restriction: variable must be an index or a column name");
}

double extended_real(const nlohmann::json& v, double if_null) {
  if (v.is_null()) return if_null;
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError("restriction: bound must be a number, null, or \"inf\"/\"-inf\"");
}

std::pair<int, int> variable_pair(const nlohmann::json& item,
                                  const std::vector<std::string>& names) {
  const auto& vars = item.at("variables");
  if (!vars.is_array() || vars.size() != 2) {
    throw ConfigError("restriction: 'variables' must be a two-element array");
  }
  return {resolve_variable(vars[0], names), resolve_variable(vars[1], names)};
}

int single_horizon(const nlohmann::json& item) {
  if (!item.contains("horizon")) return 0;
  const auto& h = item.at("horizon");
  if (h.is_number_integer()) return h.get<int>();
  throw ConfigError("restriction: ratio and ranking restrictions take a single integer horizon");
}

}  // namespace

RestrictionSet parse_restrictions(const nlohmann::json& array,
                                  const std::vector<std::string>& variable_names) {
  if (!array.is_array()) throw ConfigError("restrictions must be a JSON array");
  RestrictionSet set;
  try {
    for (const auto& item : array) {
      const auto kind = item.at("kind").get<std::string>();
      const int shock = item.at("shock").get<int>();
      if (kind == "sign") {
        SignRestriction r;
        r.shock = shock;
        r.variable = resolve_variable(item.at("variable"), variable_names);
        const auto& h = item.contains("horizon") ? item.at("horizon") : nlohmann::json(0);
        if (h.is_array()) {
          if (h.size() != 2) throw ConfigError("restriction: horizon range must be [h_min, h_max]");
          r.horizons = {h[0].get<int>(), h[1].get<int>()};
        } else {
          r.horizons = {h.get<int>(), h.get<int>()};
        }
        r.sign = item.at("sign").get<int>();
        set.signs.push_back(r);
      } else if (kind == "ratio") {
        RatioBound r;
        r.shock = shock;
        std::tie(r.numerator_variable, r.denominator_variable) =
            variable_pair(item, variable_names);
        r.horizon = single_horizon(item);
        const auto& b = item.at("bounds");
        if (!b.is_array() || b.size() != 2) {
          throw ConfigError("restriction: 'bounds' must be [lower, upper]");
        }
        r.lower = extended_real(b[0], -std::numeric_limits<double>::infinity());
        r.upper = extended_real(b[1], std::numeric_limits<double>::infinity());
        set.ratios.push_back(r);
      } else if (kind == "ranking") {
        RankingRestriction r;
        r.shock = shock;
        std::tie(r.greater_variable, r.lesser_variable) = variable_pair(item, variable_names);
        r.horizon = single_horizon(item);
        r.sign = item.value("sign", 1);
        set.rankings.push_back(r);
      } else {
        throw ConfigError("restriction: unknown kind '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("restriction: ") + e.what());
  }
  set.validate(static_cast<int>(variable_names.size()));
  return set;
}

nlohmann::json to_json(const RestrictionSet& set) {
  auto bound = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return nullptr;
    return v;
  };
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : set.signs) {
    out.push_back({{"kind", "sign"},
                   {"shock", r.shock},
                   {"variable", r.variable},
                   {"horizon", {r.horizons.first, r.horizons.last}},
                   {"sign", r.sign}});
  }
  for (const auto& r : set.ratios) {
    out.push_back({{"kind", "ratio"},
                   {"shock", r.shock},
                   {"variables", {r.numerator_variable, r.denominator_variable}},
                   {"horizon", r.horizon},
                   {"bounds", {bound(r.lower), bound(r.upper)}}});
  }
  for (const auto& r : set.rankings) {
    out.push_back({{"kind", "ranking"},
                   {"shock", r.shock},
                   {"variables", {r.greater_variable, r.lesser_variable}},
                   {"horizon", r.horizon},
                   {"sign", r.sign}});
  }
  return out;
}

}  // namespace signvar
