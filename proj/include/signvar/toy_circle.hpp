#pragma once
//
// The bivariate circle example: Sigma_tr fixed, the first column q_1 of Q
// restricted to an arc of the unit circle. q_1 = x_1 / |x_1| with
// x_1 ~ N(0, I_2), so q_1 is uniform on the circle and the angle of q_1 is
// uniform on [0, 2 pi).

#include "signvar/rng.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <utility>
#include <vector>

namespace signvar {

/// Angles phi in (anchor, anchor + arc_length), measured counter-clockwise
/// from the q_11 axis, with q_1 = (cos phi, sin phi).
struct ArcSpec {
  double arc_length = 0.0;
  double anchor = 0.0;
  Eigen::Matrix2d sigma_tr = Eigen::Matrix2d::Identity();

  void validate() const;
  /// Strict membership of the direction of x (x need not be unit length).
  [[nodiscard]] bool contains(const Eigen::Vector2d& x) const;
  /// Position of the direction of x along the arc, in [0, 2 pi).
  [[nodiscard]] double offset(const Eigen::Vector2d& x) const;
};

/// The sigma_tr used throughout: unit diagonal, sigma_tr(1, 0) = -0.9.
Eigen::Matrix2d default_sigma_tr();

/// Interval (low, high) of angles with l_11 > 0 and l_21 > 0 for
/// L_0 = sigma_tr Q, i.e. q_11 > 0 and q_21 > -(s21 / s22) q_11.
std::pair<double, double> arc_from_restrictions(const Eigen::Matrix2d& sigma_tr);

/// Arc of the given length sharing the right endpoint of the restricted arc.
ArcSpec make_arc(double arc_length, const Eigen::Matrix2d& sigma_tr = default_sigma_tr());

/// Length of the arc implied by the restrictions at default_sigma_tr().
double baseline_arc_length();

/// 2 pi / arc_length.
double ar_expected_trials(double arc_length);

struct ArToyResult {
  double mean_trials = 0.0;
  std::vector<long long> trials;  // one geometric count per accepted draw
};

/// Monte Carlo accept-reject: `reps` accepted draws of q_1.
ArToyResult ar_mc_trials(const ArcSpec& arc, long long reps, Rng& rng);

struct EssToyResult {
  double mean_trials = 0.0;
  std::vector<double> angles;  // accepted angle offsets along the arc, one per step
  std::vector<int> trials;
};

/// Indicator-likelihood ESS chain on x_1 with prior N(0, I_2), started from
/// an exact draw of the restricted distribution. Requires steps >= 1000.
EssToyResult ess_mean_trials(const ArcSpec& arc, long long steps, Rng& rng,
                             int max_shrink = 200);

struct SweepRow {
  double arc_length = 0.0;
  double ar_expected_analytic = 0.0;
  double ar_mc_mean = 0.0;
  double ess_mc_mean = 0.0;
  double ess_draws_per_iid = 0.0;  // N / ESS of the angle chain
};

struct SweepOptions {
  long long ess_steps = 10'000;
  long long ar_reps = 1'000;
  int batch_size = 100;
  std::uint64_t seed = 1;
  int workers = 1;
};

/// 30 log-spaced arc lengths from 1e-4 to baseline_arc_length().
std::vector<double> default_arc_grid(int points = 30, double smallest = 1e-4);

/// Grid point g uses stream (seed, kToyStreamBase + g).
std::vector<SweepRow> sweep_arc_costs(const std::vector<double>& arc_grid,
                                     const SweepOptions& options = {});

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace signvar
