#include "fdrelay/harness.hpp"

#include "fdrelay/approx.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace fdrelay {

namespace {

constexpr std::uint64_t kTrainingStream = 0x747261696eULL;
constexpr const char* kApproxScheme = "APPROX";

struct Point {
  double v = 0.0;
  double v2 = 0.0;
};

bool is_contour(Experiment e) {
  return e == Experiment::kContour || e == Experiment::kApproxContour;
}

std::vector<Point> sweep_points(const ExperimentConfig& cfg) {
  std::vector<Point> pts;
  if (is_contour(cfg.experiment)) {
    for (double rho : cfg.rho_r_db_values) {
      for (double eta : cfg.eta_r_db_values) pts.push_back({rho, eta});
    }
  } else {
    for (double v : cfg.sweep_values) pts.push_back({v, 0.0});
  }
  return pts;
}

RegimeParams regime_of(const SystemParams& p) {
  RegimeParams r;
  r.n = p.n_s;
  r.m = p.m_r;
  r.rho_r = p.rho_r;
  r.rho_d = p.rho_d;
  r.eta_r = p.eta_r;
  r.kappa = p.kappa;
  r.beta = p.beta;
  return r;
}

std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, const Point& pt, int trial) {
  using clock = std::chrono::steady_clock;
  const SystemParams p = cfg.params_at(pt.v, pt.v2);
  const auto t = static_cast<std::uint64_t>(trial);
  // Draws depend only on the trial index, so every sweep value sees the
  // same channels and training noise.
  const ChannelSet ch = draw_channels(p, substream_seed(cfg.seed, {t}));
  Rng rng(cfg.seed, {t, kTrainingStream});
  const EstimateBundle est = estimate_links(ch, p, rng);

  std::vector<TrialRecord> out;
  for (Scheme s : cfg.schemes) {
    const auto start = clock::now();
    const OptResult r = optimize_scheme(est, p, s, cfg.tau_grid, cfg.gp);
    const Cancellation ic = s == Scheme::kTco2 ? Cancellation::kDisabled : Cancellation::kEnabled;
    const RateReport upper = end_to_end_rate(est, r.sched, p, BoundKind::kUpper, ic);
    TrialRecord rec;
    rec.trial_index = trial;
    rec.sweep_value = pt.v;
    rec.sweep_value_2 = pt.v2;
    rec.scheme = std::string(to_string(s));
    rec.rate_lower = r.rate.i_end;
    rec.rate_upper = upper.i_end;
    rec.tau_star = r.tau_star;
    rec.zeta = r.zeta;
    rec.converged = r.converged;
    rec.wall_time = std::chrono::duration<double>(clock::now() - start).count();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<Point> pts = sweep_points(cfg);

  if (cfg.experiment == Experiment::kApproxContour) {
    std::vector<TrialRecord> out;
    for (const Point& pt : pts) {
      TrialRecord rec;
      rec.sweep_value = pt.v;
      rec.sweep_value_2 = pt.v2;
      rec.scheme = kApproxScheme;
      rec.rate_lower = rec.rate_upper = approx_rate(regime_of(cfg.params_at(pt.v, pt.v2))).rate;
      out.push_back(std::move(rec));
    }
    return out;
  }

  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t jobs = pts.size() * trials;
  std::vector<std::vector<TrialRecord>> slots(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      try {
        slots[j] = run_trial(cfg, pts[j / trials], static_cast<int>(j % trials));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };

  std::size_t n_workers = cfg.workers > 0 ? static_cast<std::size_t>(cfg.workers)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min(n_workers, jobs);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<TrialRecord> out;
  out.reserve(jobs * cfg.schemes.size());
  for (auto& s : slots) {
    for (auto& r : s) out.push_back(std::move(r));
  }
  return out;
}

ContourGrid contour_from_records(const ExperimentConfig& cfg,
                                 const std::vector<TrialRecord>& records) {
  if (!is_contour(cfg.experiment)) {
    throw std::invalid_argument("contour grid requested for a non-contour experiment");
  }
  ContourGrid g;
  g.rho_r_db = cfg.rho_r_db_values;
  g.eta_r_db = cfg.eta_r_db_values;
  g.scheme = cfg.experiment == Experiment::kApproxContour
                 ? kApproxScheme
                 : std::string(to_string(cfg.schemes.front()));
  const std::size_t rows = g.rho_r_db.size();
  const std::size_t cols = g.eta_r_db.size();
  std::vector<std::vector<double>> sum(rows, std::vector<double>(cols, 0.0));
  std::vector<std::vector<int>> count(rows, std::vector<int>(cols, 0));
  for (const auto& r : records) {
    if (r.scheme != g.scheme) continue;
    const auto i = std::find(g.rho_r_db.begin(), g.rho_r_db.end(), r.sweep_value);
    const auto j = std::find(g.eta_r_db.begin(), g.eta_r_db.end(), r.sweep_value_2);
    if (i == g.rho_r_db.end() || j == g.eta_r_db.end()) continue;
    sum[i - g.rho_r_db.begin()][j - g.eta_r_db.begin()] += r.rate_lower;
    ++count[i - g.rho_r_db.begin()][j - g.eta_r_db.begin()];
  }
  g.mean_rate.assign(rows, std::vector<double>(cols, 0.0));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (count[i][j] == 0) throw std::runtime_error("contour cell without records");
      g.mean_rate[i][j] = sum[i][j] / count[i][j];
    }
  }
  return g;
}

ContourGrid contour_grid(const ExperimentConfig& cfg) {
  return contour_from_records(cfg, run_experiment(cfg));
}

}  // namespace fdrelay
