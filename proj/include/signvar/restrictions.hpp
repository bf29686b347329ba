#pragma once
//
// Identification restrictions on impulse responses. All inequalities are
// strict; a response exactly on a boundary fails the restriction.

#include "signvar/model.hpp"

#include <json.hpp>

#include <limits>
#include <string>
#include <vector>

namespace signvar {

struct HorizonRange {
  int first = 0;
  int last = 0;  // inclusive
};

/// sign * L_h(variable, shock) > 0 for every h in horizons.
struct SignRestriction {
  int shock = 0;
  int variable = 0;
  HorizonRange horizons;
  int sign = 1;
};

/// lower < L_h(numerator, shock) / L_h(denominator, shock) < upper.
/// A zero denominator response fails the restriction.
struct RatioBound {
  int shock = 0;
  int numerator_variable = 0;
  int denominator_variable = 0;
  int horizon = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

/// sign * (L_h(greater, shock) - L_h(lesser, shock)) > 0.
struct RankingRestriction {
  int shock = 0;
  int greater_variable = 0;
  int lesser_variable = 0;
  int horizon = 0;
  int sign = 1;
};

struct RestrictionSet {
  std::vector<SignRestriction> signs;
  std::vector<RatioBound> ratios;
  std::vector<RankingRestriction> rankings;
  /// Reporting only: scale each shock column so its own-variable impact
  /// response has unit magnitude. Never affects evaluation.
  bool normalize_shocks = false;

  [[nodiscard]] bool empty() const { return signs.empty() && ratios.empty() && rankings.empty(); }
  [[nodiscard]] std::size_t size() const { return signs.size() + ratios.size() + rankings.size(); }
  /// Throws ConfigError when an index is out of range for n variables.
  void validate(int n) const;
  /// Sorted distinct shock indices mentioned by any restriction.
  [[nodiscard]] std::vector<int> identified_shocks() const;
};

/// Largest horizon referenced; 0 for an empty or impact-only set.
int required_horizon(const RestrictionSet& set);

/// Throws ConfigError if irfs do not reach required_horizon(set).
bool evaluate(const RestrictionSet& set, const ImpulseResponses& irfs);

/// [S(B, Sigma, Q) > 0].
bool indicator(const RestrictionSet& set, const OrthogonalParams& params, const ModelSpec& spec);

/// Same predicate with the Cholesky factor of Sigma already available.
bool indicator_with_factor(const RestrictionSet& set, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& sigma_chol, const Eigen::MatrixXd& Q, int p);

/// Parses the JSON restriction array. Variables may be given by index or by
/// name (resolved against `variable_names`).
RestrictionSet parse_restrictions(const nlohmann::json& array,
                                  const std::vector<std::string>& variable_names);
nlohmann::json to_json(const RestrictionSet& set);

}  // namespace signvar
