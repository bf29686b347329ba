#include "signvar/pipeline.hpp"

#include "signvar/accept_reject.hpp"
#include "signvar/error.hpp"
#include "signvar/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

namespace signvar {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct LoadedData {
  Eigen::MatrixXd raw;
  std::vector<std::string> names;
  CsvTable table;
};

LoadedData load_data(const RunConfig& c) {
  LoadedData d;
  d.table = load_csv(c.data_path);
  auto column_index = [&](const std::string& name) {
    const auto it = std::find(d.table.columns.begin(), d.table.columns.end(), name);
    if (it == d.table.columns.end()) {
      throw DataError("column '" + name + "' not found in " + c.data_path.string());
    }
    return static_cast<Eigen::Index>(it - d.table.columns.begin());
  };
  if (c.columns.empty()) {
    std::set<std::string> exo;
    for (const auto& t : c.deterministic) {
      if (t.kind == DeterministicTerm::Kind::Exogenous) exo.insert(t.column);
    }
    for (const auto& name : d.table.columns) {
      if (!exo.count(name)) d.names.push_back(name);
    }
  } else {
    d.names = c.columns;
  }
  if (d.names.empty()) throw DataError("no endogenous columns selected");
  d.raw.resize(d.table.values.rows(), static_cast<Eigen::Index>(d.names.size()));
  for (std::size_t j = 0; j < d.names.size(); ++j) {
    d.raw.col(static_cast<Eigen::Index>(j)) = d.table.values.col(column_index(d.names[j]));
  }
  return d;
}

/// Model spec plus the exogenous block for build_regressors, expanding trend,
/// seasonal and named columns in configuration order.
std::pair<ModelSpec, std::optional<Eigen::MatrixXd>> model_terms(const RunConfig& c,
                                                                 const LoadedData& d) {
  ModelSpec spec;
  spec.n = static_cast<int>(d.names.size());
  spec.p = c.lags;
  spec.deterministic.clear();
  const Eigen::Index T = d.raw.rows();
  std::vector<Eigen::VectorXd> exo;
  for (const auto& t : c.deterministic) {
    switch (t.kind) {
      case DeterministicTerm::Kind::Constant:
        spec.deterministic.push_back(DeterministicKind::Constant);
        break;
      case DeterministicTerm::Kind::Trend:
        spec.deterministic.push_back(DeterministicKind::Exogenous);
        exo.push_back(Eigen::VectorXd::LinSpaced(T, 1.0, static_cast<double>(T)));
        break;
      case DeterministicTerm::Kind::Seasonal:
        for (int k = 1; k < t.period; ++k) {
          Eigen::VectorXd col(T);
          for (Eigen::Index r = 0; r < T; ++r) col(r) = (r % t.period == k) ? 1.0 : 0.0;
          spec.deterministic.push_back(DeterministicKind::Exogenous);
          exo.push_back(col);
        }
        break;
      case DeterministicTerm::Kind::Exogenous: {
        const auto& cols = d.table.columns;
        const auto it = std::find(cols.begin(), cols.end(), t.column);
        if (it == cols.end()) throw DataError("exogenous column '" + t.column + "' not found");
        spec.deterministic.push_back(DeterministicKind::Exogenous);
        exo.push_back(d.table.values.col(static_cast<Eigen::Index>(it - cols.begin())));
        break;
      }
    }
  }
  spec.validate();
  if (exo.empty()) return {spec, std::nullopt};
  Eigen::MatrixXd block(T, static_cast<Eigen::Index>(exo.size()));
  for (std::size_t k = 0; k < exo.size(); ++k) block.col(static_cast<Eigen::Index>(k)) = exo[k];
  return {spec, block};
}

NiwParams make_prior(const RunConfig& c, const ModelSpec& spec, const TimeSeriesData& data) {
  const int n = spec.n;
  const int m = spec.m();
  switch (c.prior.kind) {
    case PriorConfig::Kind::Minnesota:
      return minnesota_niw(spec, data, c.prior.minnesota);
    case PriorConfig::Kind::Flat: {
      NiwParams p;
      p.nu = c.prior.flat_nu.value_or(n + 2);
      p.Phi = c.prior.flat_phi_scale * Eigen::MatrixXd::Identity(n, n);
      p.Psi = Eigen::MatrixXd::Zero(m, n);
      p.Omega = Eigen::MatrixXd::Identity(m, m);
      p.flat_coefficients = true;
      p.validate();
      return p;
    }
    case PriorConfig::Kind::Niw: {
      NiwParams p = c.prior.niw;
      if (p.Phi.rows() != n || p.Psi.rows() != m || p.Omega.rows() != m) {
        throw ConfigError("prior: explicit NIW needs Phi " + std::to_string(n) + "x" +
                          std::to_string(n) + ", Psi " + std::to_string(m) + "x" +
                          std::to_string(n) + ", Omega " + std::to_string(m) + "x" +
                          std::to_string(m));
      }
      p.validate();
      return p;
    }
  }
  throw ConfigError("prior: unknown kind");
}

ImpulseResponses reported_irfs(const OrthogonalParams& d, const ModelSpec& spec, int H,
                               bool normalize) {
  ImpulseResponses irf = compute_irfs(d, spec, H);
  if (normalize) {
    for (int j = 0; j < spec.n; ++j) {
      const double scale = std::abs(irf.L[0](j, j));
      if (scale == 0.0) continue;
      for (auto& L : irf.L) L.col(j) /= scale;
    }
  }
  return irf;
}

json counters(const StepCounters& s) {
  return {{"steps", s.steps}, {"trials", s.trials}, {"mean_trials", s.mean_trials()}};
}

template <typename F>
void parallel_for(int count, int workers, F&& body) {
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  const int nthreads = std::clamp(workers, 1, std::max(1, count));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

int worker_count() {
  const char* env = std::getenv("SIGNVAR_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) {
    throw ConfigError(std::string("SIGNVAR_WORKERS must be an integer in [1, 1024], got '") + env +
                      "'");
  }
  return static_cast<int>(v);
}

PipelineResult execute(const RunConfig& c, std::string& stage, std::ostream& log) {
  PipelineResult out;
  stage = "setup";
  const int workers = worker_count();

  stage = "load";
  const LoadedData data = load_data(c);
  out.variables = data.names;

  stage = "regressors";
  const auto [spec, exogenous] = model_terms(c, data);
  out.spec = spec;
  const TimeSeriesData ts = build_regressors(data.raw, spec, exogenous);

  stage = "prior";
  const NiwParams prior = make_prior(c, spec, ts);

  stage = "posterior";
  out.posterior = posterior_update(prior, ts);

  stage = "restrictions";
  out.restrictions = parse_restrictions(c.restrictions, data.names);
  out.restrictions.normalize_shocks = c.normalize_shocks;

  stage = "sampler";
  const auto& sc = c.sampler;
  const std::uint64_t seed = sc.gibbs.seed;
  json sampler_info;
  if (sc.algorithm == Algorithm::Gibbs) {
    if (sc.gibbs.stored_count() < 1) {
      throw ConfigError("sampler: iterations, burn_in and thin leave no stored draws");
    }
    const GibbsSampler sampler(out.posterior, out.restrictions, spec,
                               sc.gibbs.max_shrink_iterations);
    log << "signvar: gibbs, " << sc.chains << " chain(s) x " << sc.gibbs.iterations
        << " iterations, " << workers << " worker(s)\n";
    out.chains.resize(static_cast<std::size_t>(sc.chains));
    parallel_for(sc.chains, workers, [&](int chain) {
      Rng rng(seed, static_cast<std::uint64_t>(chain));
      out.chains[static_cast<std::size_t>(chain)] = sampler.run(sc.gibbs, rng);
    });
    json per_chain = json::array();
    for (const auto& ch : out.chains) {
      per_chain.push_back({{"stored_draws", ch.draws.size()},
                           {"iterations", ch.iterations},
                           {"init_attempts", ch.init_attempts},
                           {"q_step", counters(ch.q_step)},
                           {"sigma_step", counters(ch.sigma_step)},
                           {"b_step", counters(ch.b_step)}});
    }
    sampler_info = {{"algorithm", "gibbs"}, {"chains", per_chain}};
  } else {
    log << "signvar: accept-reject, " << sc.draws << " draws, " << workers << " worker(s)\n";
    ArRun ar = ar_run_blocked(out.posterior, out.restrictions, spec, sc.draws, seed, workers,
                              sc.proposal_budget);
    sampler_info = {{"algorithm", "accept-reject"},
                    {"accepted", ar.stats.accepted},
                    {"proposals", ar.stats.proposals},
                    {"proposals_per_accept", ar.stats.proposals_per_accept()}};
    out.chains.push_back(std::move(ar.draws));
  }

  stage = "summary";
  std::vector<ImpulseResponses> irfs;
  std::vector<OrthogonalParams> all_draws;
  for (const auto& ch : out.chains) {
    for (const auto& d : ch.draws) {
      irfs.push_back(reported_irfs(d, spec, c.output.irf_horizon, c.normalize_shocks));
      all_draws.push_back(d);
    }
  }
  out.bands = irf_bands(irfs, c.output.quantiles);

  stage = "diagnostics";
  std::vector<int> shocks = out.restrictions.identified_shocks();
  json diag;
  diag["sampler"] = sampler_info;
  diag["stored_draws"] = all_draws.size();
  diag["functional"] = {{"kind", "impact_responses"}, {"shocks", shocks}};
  json ess_json;
  std::vector<std::string> warnings;
  double total_mess = 0.0;
  bool ess_ok = true;
  json per_chain_ess = json::array();
  for (const auto& ch : out.chains) {
    if (static_cast<long long>(ch.draws.size()) < 2LL * c.output.batch_size) {
      warnings.push_back("a chain stored fewer than 2 * batch_size draws; mESS not computed");
      ess_ok = false;
      break;
    }
    const DiagnosticsReport rep = diagnose(contemporaneous_irf_matrix(ch.draws, shocks),
                                           c.output.batch_size);
    total_mess += rep.mess;
    per_chain_ess.push_back(to_json(rep));
    for (const auto& w : rep.warnings) warnings.push_back(w);
  }
  double wall_seconds = 0.0;
  for (const auto& ch : out.chains) wall_seconds += ch.wall_seconds;
  if (ess_ok) {
    diag["mess"] = total_mess;
    diag["draws_per_iid"] = draws_per_iid(static_cast<double>(all_draws.size()), total_mess);
    diag["per_chain"] = per_chain_ess;
  } else {
    diag["mess"] = nullptr;
    diag["draws_per_iid"] = nullptr;
  }
  if (c.output.record_timing) {
    diag["wall_minutes"] = wall_seconds / 60.0;
    diag["minutes_per_1000_effective"] =
        ess_ok && total_mess > 0.0 ? json(minutes_per_1000_effective(wall_seconds / 60.0, total_mess))
                                   : json();
  }
  diag["warnings"] = warnings;
  out.diagnostics = diag;

  stage = "output";
  const fs::path dir = c.output.directory;
  fs::create_directories(dir);

  json echo = to_json(c);
  echo["resolved"] = {{"variables", data.names},
                      {"n", spec.n},
                      {"m", spec.m()},
                      {"T", ts.T()},
                      {"restrictions", to_json(out.restrictions)}};
  atomic_write(dir / c.output.config_echo_path, [&](std::ostream& os) { os << echo.dump(2) << '\n'; });

  DrawsFile file{spec.n, spec.m(), spec.p, std::move(all_draws)};
  atomic_write(dir / c.output.draws_path, [&](std::ostream& os) { write_draws(os, file); });
  if (c.output.draws_csv) {
    fs::path csv = dir / c.output.draws_path;
    csv.replace_extension(".csv");
    atomic_write(csv, [&](std::ostream& os) { write_draws_csv(os, file); });
  }
  atomic_write(dir / c.output.summary_path,
               [&](std::ostream& os) { write_bands_csv(os, out.bands, data.names); });
  atomic_write(dir / c.output.diagnostics_path,
               [&](std::ostream& os) { os << diag.dump(2) << '\n'; });
  log << "signvar: wrote " << file.draws.size() << " draws to " << (dir / c.output.draws_path).string()
      << '\n';
  stage = "done";
  return out;
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  std::string stage = "setup";
  try {
    execute(config, stage, log);
    return 0;
  } catch (const InfeasibleError& e) {
    err << "signvar: " << stage << ": identification infeasible: " << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    err << "signvar: " << stage << ": " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "signvar: " << stage << ": " << e.what() << '\n';
    return 1;
  }
}

int run_file(const std::string& config_path, std::ostream& log, std::ostream& err) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const Error& e) {
    err << "signvar: config: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "signvar: config: " << e.what() << '\n';
    return 2;
  }
  return run(config, log, err);
}

}  // namespace signvar
