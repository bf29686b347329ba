#include "signvar/toy_circle.hpp"

#include "signvar/diagnostics.hpp"
#include "signvar/error.hpp"
#include "signvar/ess.hpp"
#include "signvar/format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

namespace signvar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

}  // namespace

void ArcSpec::validate() const {
  if (!(arc_length > 0.0 && arc_length <= kTwoPi)) {
    throw ConfigError("toy: arc length must lie in (0, 2 pi]");
  }
}

double ArcSpec::offset(const Eigen::Vector2d& x) const {
  return wrap(std::atan2(x(1), x(0)) - anchor);
}

bool ArcSpec::contains(const Eigen::Vector2d& x) const {
  if (x(0) == 0.0 && x(1) == 0.0) return false;
  const double d = offset(x);
  return d > 0.0 && d < arc_length;
}

Eigen::Matrix2d default_sigma_tr() {
  Eigen::Matrix2d s;
  s << 1.0, 0.0, -0.9, 1.0;
  return s;
}

std::pair<double, double> arc_from_restrictions(const Eigen::Matrix2d& sigma_tr) {
  if (!(sigma_tr(0, 0) > 0.0 && sigma_tr(1, 1) > 0.0) || sigma_tr(0, 1) != 0.0) {
    throw ConfigError("toy: sigma_tr must be lower triangular with a positive diagonal");
  }
  const double slope = -sigma_tr(1, 0) / sigma_tr(1, 1);
  return {std::atan(slope), std::numbers::pi / 2.0};
}

ArcSpec make_arc(double arc_length, const Eigen::Matrix2d& sigma_tr) {
  ArcSpec arc;
  arc.arc_length = arc_length;
  arc.anchor = arc_from_restrictions(sigma_tr).first;
  arc.sigma_tr = sigma_tr;
  arc.validate();
  return arc;
}

double baseline_arc_length() {
  const auto [lo, hi] = arc_from_restrictions(default_sigma_tr());
  return hi - lo;
}

double ar_expected_trials(double arc_length) {
  if (!(arc_length > 0.0)) throw ConfigError("toy: arc length must be positive");
  return kTwoPi / arc_length;
}

ArToyResult ar_mc_trials(const ArcSpec& arc, long long reps, Rng& rng) {
  arc.validate();
  if (reps < 1) throw ConfigError("toy: reps must be >= 1");
  ArToyResult out;
  out.trials.reserve(static_cast<std::size_t>(reps));
  long long total = 0;
  for (long long r = 0; r < reps; ++r) {
    long long t = 0;
    for (;;) {
      ++t;
      Eigen::Vector2d x(rng.normal(), rng.normal());
      const double norm = x.norm();
      if (norm == 0.0) continue;
      if (arc.contains(x / norm)) break;
    }
    out.trials.push_back(t);
    total += t;
  }
  out.mean_trials = static_cast<double>(total) / static_cast<double>(reps);
  return out;
}

EssToyResult ess_mean_trials(const ArcSpec& arc, long long steps, Rng& rng, int max_shrink) {
  arc.validate();
  if (steps < 1000) throw ConfigError("toy: ESS chain needs at least 1000 steps");

  EssTarget target;
  target.prior_mean = Eigen::VectorXd::Zero(2);
  target.prior_sample = [](Rng& r) { return r.normal_vector(2); };
  target.log_likelihood = [&arc](const Eigen::VectorXd& x) {
    return arc.contains(Eigen::Vector2d(x(0), x(1))) ? 0.0
                                                     : -std::numeric_limits<double>::infinity();
  };

  // Exact draw from the restricted law: uniform angle on the arc, chi_2 radius.
  Eigen::VectorXd x(2);
  do {
    const double phi = arc.anchor + rng.uniform() * arc.arc_length;
    const double radius = std::sqrt(-2.0 * std::log(rng.uniform()));
    x << radius * std::cos(phi), radius * std::sin(phi);
  } while (!arc.contains(Eigen::Vector2d(x(0), x(1))));

  EssToyResult out;
  out.angles.reserve(static_cast<std::size_t>(steps));
  out.trials.reserve(static_cast<std::size_t>(steps));
  long long total = 0;
  for (long long s = 0; s < steps; ++s) {
    EssResult r = ess_step(target, x, rng, max_shrink, 0.0);
    x = std::move(r.latent);
    out.trials.push_back(r.trials);
    out.angles.push_back(arc.offset(Eigen::Vector2d(x(0), x(1))));
    total += r.trials;
  }
  out.mean_trials = static_cast<double>(total) / static_cast<double>(steps);
  return out;
}

std::vector<double> default_arc_grid(int points, double smallest) {
  if (points < 1) throw ConfigError("toy: grid needs at least one point");
  const double largest = baseline_arc_length();
  if (points == 1) return {largest};
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double lo = std::log(smallest);
  const double hi = std::log(largest);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / (points - 1));
  }
  grid.front() = smallest;
  grid.back() = largest;
  return grid;
}

std::vector<SweepRow> sweep_arc_costs(const std::vector<double>& arc_grid,
                                     const SweepOptions& options) {
  if (arc_grid.empty()) throw ConfigError("toy: arc grid is empty");
  for (double a : arc_grid) make_arc(a);

  std::vector<SweepRow> rows(arc_grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t g = next.fetch_add(1);
      if (g >= arc_grid.size()) return;
      try {
        const ArcSpec arc = make_arc(arc_grid[g]);
        Rng rng(options.seed, kToyStreamBase + g);
        SweepRow& row = rows[g];
        row.arc_length = arc.arc_length;
        row.ar_expected_analytic = ar_expected_trials(arc.arc_length);
        row.ar_mc_mean = ar_mc_trials(arc, options.ar_reps, rng).mean_trials;
        const EssToyResult ess = ess_mean_trials(arc, options.ess_steps, rng);
        row.ess_mc_mean = ess.mean_trials;
        const Eigen::Map<const Eigen::VectorXd> angles(ess.angles.data(),
                                                       static_cast<Eigen::Index>(ess.angles.size()));
        const double e = univariate_ess(angles, options.batch_size)(0);
        row.ess_draws_per_iid = e > 0.0 ? static_cast<double>(ess.angles.size()) / e
                                        : std::numeric_limits<double>::quiet_NaN();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = arc_grid.size();
        return;
      }
    }
  };

  const int nthreads =
      std::clamp(options.workers, 1, static_cast<int>(std::min<std::size_t>(arc_grid.size(), 256)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "arc_length,ar_expected_analytic,ar_mc_mean,ess_mc_mean,ess_draws_per_iid\n";
  for (const auto& r : rows) {
    out << format_double(r.arc_length) << ',' << format_double(r.ar_expected_analytic) << ','
        << format_double(r.ar_mc_mean) << ',' << format_double(r.ess_mc_mean) << ','
        << format_double(r.ess_draws_per_iid) << '\n';
  }
}

}  // namespace signvar
