// Acceptance checks, one PASS/FAIL line each. `--only N` runs a single one.

#include "fdrelay/approx.hpp"
#include "fdrelay/harness.hpp"
#include "../oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace fdrelay;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Mean lower bound per (sweep value, scheme).
std::map<std::pair<double, std::string>, double> means(const std::vector<TrialRecord>& recs,
                                                       bool upper = false) {
  std::map<std::pair<double, std::string>, double> out;
  for (const SummaryRow& s : summarize(recs)) {
    out[{s.sweep_value, s.scheme}] = upper ? s.mean_upper : s.mean_lower;
  }
  return out;
}

Outcome training_error_covariance() {
  struct Case {
    int n, m, t;
  };
  const double alpha = 10.0;
  const double kappa = 0.01;
  const double beta = 0.01;
  oracle::Gauss g(2024);
  int checked = 0;
  double worst = 0.0;
  for (const Case c : {Case{1, 1, 1}, Case{2, 3, 2}}) {
    const CMatrix h = g.cn_matrix(c.m, c.n);
    const auto emp = oracle::training_error_cov(h, alpha, kappa, beta, c.t, 10000, 77 + c.n);
    const CMatrix d = estimation_error_cov(h, alpha, kappa, beta, c.n, c.t, ErrorCovForm::kExact);
    for (int i = 0; i < c.m; ++i) {
      for (int j = 0; j < c.m; ++j) {
        const double zr = std::abs(emp.mean(i, j).real() - d(i, j).real()) / emp.se_re(i, j);
        worst = std::max(worst, zr);
        ++checked;
        if (i != j) {
          const double zi = std::abs(emp.mean(i, j).imag() - d(i, j).imag()) / emp.se_im(i, j);
          worst = std::max(worst, zi);
          ++checked;
        }
      }
    }
  }
  return {worst <= 3.0, fmt("%d entries, worst |z| = %.2f", checked, worst)};
}

Outcome aggregate_noise_covariance() {
  oracle::Gauss g(99);
  const double kappa = 0.01;
  const double beta = 0.01;
  const int draws = 100000;
  double worst = 0.0;
  for (int dim : {1, 2}) {
    oracle::NoiseScenario s;
    s.h_sig = g.cn_matrix(dim, dim);
    s.h_int = g.cn_matrix(dim, dim);
    s.rho = 10.0;
    s.eta = 100.0;
    s.kappa = kappa;
    s.beta = beta;
    s.d_sig = conditional_error_cov(s.h_sig, s.rho, kappa, beta, dim, 2);
    s.d_int = conditional_error_cov(s.h_int, s.eta, kappa, beta, dim, 2);
    s.q_sig = oracle::random_psd(g, dim, 0.8);
    s.q_int = oracle::random_psd(g, dim, 0.9);

    SystemParams p;
    p.kappa = kappa;
    p.beta = beta;
    p.n_s = p.n_r = p.m_r = p.m_d = dim;
    CovarianceSchedule sched = CovarianceSchedule::zeros(dim, dim, 0.5);
    const LinkEstimate sig{s.h_sig, s.d_sig, s.rho};
    const LinkEstimate inter{s.h_int, s.d_int, s.eta};

    // Relay: desired source link, interfering loop-back link.
    EstimateBundle er{sig, inter, sig, inter};
    p.rho_r = s.rho;
    p.eta_r = s.eta;
    p.rho_d = s.rho;
    p.eta_d = s.eta;
    sched.q_s[0] = s.q_sig;
    sched.q_r[0] = s.q_int;
    const CMatrix lib_r = noise_cov_relay(er, sched, p, 0);
    const CMatrix mc_r = oracle::relay_noise_cov(s, draws, 5 + dim);

    // Destination: desired relay link, interfering direct link.
    sched.q_r[0] = s.q_sig;
    sched.q_s[0] = s.q_int;
    const CMatrix lib_d = noise_cov_dest(er, sched, p, 0);
    const CMatrix mc_d = oracle::dest_noise_cov(s, draws, 9 + dim);

    for (int i = 0; i < dim; ++i) {
      worst = std::max(worst, std::abs(mc_r(i, i).real() / lib_r(i, i).real() - 1.0));
      worst = std::max(worst, std::abs(mc_d(i, i).real() / lib_d(i, i).real() - 1.0));
    }
  }
  return {worst <= 0.03, fmt("worst diagonal deviation %.2f%%", 100.0 * worst)};
}

Outcome gradient_check() {
  oracle::Gauss g(31);
  double worst = 0.0;
  int instances = 0;
  for (int k = 0; k < 20; ++k) {
    SystemParams p;
    p.rho_r = std::pow(10.0, 0.5 + 2.0 * g.uniform());
    p.rho_d = p.rho_r / 2.0;
    p.eta_r = std::pow(10.0, 1.0 + 4.0 * g.uniform());
    p.eta_d = 1.0;
    p.kappa = std::pow(10.0, -2.0 - 2.0 * g.uniform());
    p.beta = std::pow(10.0, -2.0 - 2.0 * g.uniform());
    p.n_s = p.n_r = 3;
    p.m_r = p.m_d = 4;
    p.train_len = 5;
    auto link = [&](double a) {
      const CMatrix h = g.cn_matrix(4, 3);
      return LinkEstimate{h, conditional_error_cov(h, a, p.kappa, p.beta, 3, 5), a};
    };
    const EstimateBundle est{link(p.rho_r), link(p.eta_r), link(p.rho_d), link(p.eta_d)};
    CovarianceSchedule s = CovarianceSchedule::zeros(3, 3, 0.2 + 0.6 * g.uniform());
    for (std::size_t l = 0; l < 2; ++l) {
      s.q_s[l] = oracle::random_psd(g, 3, 0.9);
      s.q_r[l] = oracle::random_psd(g, 3, 0.9);
    }
    const double zeta = g.uniform();
    const Cancellation ic = k % 4 == 3 ? Cancellation::kDisabled : Cancellation::kEnabled;
    for (std::size_t l = 0; l < 2; ++l) {
      for (char node : {'r', 's'}) {
        auto f = [&](const CMatrix& q) {
          CovarianceSchedule t = s;
          (node == 'r' ? t.q_r[l] : t.q_s[l]) = q;
          return weighted_sum_rate(est, t, p, zeta, ic);
        };
        const CMatrix fd = oracle::fd_gradient(f, node == 'r' ? s.q_r[l] : s.q_s[l]);
        const CMatrix an = node == 'r' ? gradient_relay(est, s, p, zeta, l, ic)
                                       : gradient_source(est, s, p, zeta, l, ic);
        worst = std::max(worst, (an - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff());
      }
    }
    ++instances;
  }
  return {worst < 1e-5, fmt("%d instances, max relative error %.2e", instances, worst)};
}

Outcome projection_check() {
  CMatrix p = CMatrix::Zero(2, 2);
  p(0, 0) = 3.0;
  p(1, 1) = 1.0;
  CMatrix expect = CMatrix::Zero(2, 2);
  expect(0, 0) = 1.0;
  const auto [blocks, mu] = water_fill({p}, {1.0});
  const bool hand = blocks[0] == expect && mu == 2.0;

  oracle::Gauss g(4);
  double min_eig = 0.0;
  double trace_err = 0.0;
  double idem = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + static_cast<int>(4.0 * g.uniform());
    const double tau = g.uniform();
    const double scale = std::pow(10.0, 2.0 * g.uniform() - 1.0);
    auto herm = [&] {
      const CMatrix a = g.cn_matrix(n, n) * scale;
      return CMatrix(0.5 * (a + a.adjoint()));
    };
    const Projection r = project_constraint(herm(), herm(), tau);
    min_eig = std::min({min_eig, min_eigenvalue(r.q1), min_eigenvalue(r.q2)});
    if (r.mu > 0.0) {
      const double t = tau * r.q1.trace().real() + (1.0 - tau) * r.q2.trace().real();
      trace_err = std::max(trace_err, std::abs(t - 1.0));
    }
    const Projection again = project_constraint(r.q1, r.q2, tau);
    idem = std::max({idem, max_abs_diff(again.q1, r.q1), max_abs_diff(again.q2, r.q2)});
  }
  const bool ok = hand && min_eig >= -1e-10 && trace_err <= 1e-9 && idem <= 1e-9;
  return {ok, fmt("hand case %s, min eig %.1e, trace error %.1e, idempotence %.1e",
                  hand ? "exact" : "wrong", min_eig, trace_err, idem)};
}

Outcome gp_waterfilling() {
  oracle::Gauss g(55);
  double worst = 0.0;
  int violations = 0;
  int accepted = 0;
  for (int k = 0; k < 10; ++k) {
    SystemParams p;
    p.rho_r = std::pow(10.0, 2.0 * g.uniform());
    p.rho_d = p.rho_r / 2.0;
    p.n_s = p.n_r = 3;
    p.m_r = p.m_d = 4;
    EstimateBundle est;
    for (LinkEstimate* l : {&est.sr, &est.rr, &est.rd, &est.sd}) {
      l->h_hat = g.cn_matrix(4, 3);
      l->d_hat = CMatrix::Zero(4, 4);
    }
    GpConfig cfg;
    cfg.eps_stop = 1e-6;
    cfg.max_outer_iters = 2000;
    std::vector<GpStep> log;
    SolveOptions opts;
    opts.log = &log;
    const OptResult r =
        gp_optimize(est, p, 1.0, 0.5, naive_full_duplex(half_duplex_init(p, 0.5)), cfg, opts);
    worst = std::max(worst, std::abs(r.rate.sr_sum - oracle::waterfill_capacity(est.sr.h_hat, p.rho_r)));
    for (const GpStep& s : log) {
      if (!s.accepted) continue;
      ++accepted;
      if (s.objective_after - s.objective_before < cfg.sigma * s.gamma * s.directional - 1e-12) {
        ++violations;
      }
    }
  }
  return {worst < 1e-3 && violations == 0,
          fmt("max capacity gap %.2e bpcu, %d/%d accepted steps violate the step rule", worst,
              violations, accepted)};
}

Outcome training_shape() {
  ExperimentConfig c = default_config(Experiment::kTrainingSweep);
  c.sweep_values = {1.0, 5.0, 50.0};
  c.schemes = {Scheme::kTco2Ic};
  c.trials = 20;
  const auto recs = run_experiment(c);
  const auto lo = means(recs);
  const auto hi = means(recs, true);
  const std::string s = "TCO_2_IC";
  const double r1 = lo.at({1.0, s});
  const double r5 = lo.at({5.0, s});
  const double r50 = lo.at({50.0, s});
  const double gap = (hi.at({50.0, s}) - r50) / hi.at({50.0, s});
  return {r1 < r5 && r5 < r50 && gap < 0.03,
          fmt("lower bound %.3f / %.3f / %.3f at T = 1 / 5 / 50, gap at T = 50 %.2f%%", r1, r5, r50,
              100.0 * gap)};
}

Outcome inr_shape() {
  ExperimentConfig c = default_config(Experiment::kInrSweep);
  c.sweep_values = {0.0, 40.0, 100.0};
  c.schemes = {Scheme::kTco2Ic, Scheme::kTco2, Scheme::kTco1Ic, Scheme::kOhd};
  c.trials = 20;
  const auto m = means(run_experiment(c));
  double ohd_lo = 1e300;
  double ohd_hi = -1e300;
  bool dominates = true;
  for (double e : c.sweep_values) {
    const double ohd = m.at({e, "OHD"});
    ohd_lo = std::min(ohd_lo, ohd);
    ohd_hi = std::max(ohd_hi, ohd);
    dominates = dominates && m.at({e, "TCO_2_IC"}) >= ohd - 1e-2;
  }
  const bool flat = ohd_hi - ohd_lo <= 1e-2;
  const double tco1 = m.at({100.0, "TCO_1_IC"});
  const double ohd100 = m.at({100.0, "OHD"});
  const double ratio = m.at({40.0, "TCO_2"}) / m.at({40.0, "TCO_2_IC"});
  const bool ok = flat && dominates && tco1 < ohd100 && ratio <= 0.9;
  return {ok, fmt("OHD spread %.1e, TCO_2_IC >= OHD %s, TCO_1_IC %.3f vs OHD %.3f at 100 dB, "
                  "TCO_2 / TCO_2_IC %.3f at 40 dB",
                  ohd_hi - ohd_lo, dominates ? "yes" : "no", tco1, ohd100, ratio)};
}

Outcome snr_shape() {
  ExperimentConfig c = default_config(Experiment::kSnrSweep);
  c.sweep_values = {0.0, 10.0, 20.0, 30.0, 40.0};
  c.schemes = {Scheme::kTco2Ic, Scheme::kOhd};
  c.trials = 20;

  // Relative gain of TCO_2_IC over OHD per SNR point.
  auto gains = [&](double eta_db) {
    ExperimentConfig e = c;
    e.eta_r_db = eta_db;
    const auto m = means(run_experiment(e));
    std::vector<double> out;
    for (double v : c.sweep_values) {
      out.push_back(m.at({v, "TCO_2_IC"}) / m.at({v, "OHD"}) - 1.0);
    }
    return out;
  };
  const double track = 0.05;
  const std::vector<double> g60 = gains(60.0);
  std::size_t cross = 0;
  while (cross < g60.size() && g60[cross] <= track) ++cross;
  bool threshold = cross > 0 && cross < g60.size();
  for (std::size_t i = 0; i < g60.size(); ++i) {
    threshold = threshold && (i < cross ? std::abs(g60[i]) <= track : g60[i] > track);
  }
  const std::vector<double> g20 = gains(20.0);
  const bool exceeds = std::all_of(g20.begin(), g20.end(), [](double x) { return x > 0.0; });

  std::string detail = "gain at 60 dB:";
  for (double x : g60) detail += fmt(" %+.1f%%", 100.0 * x);
  detail += "; at 20 dB:";
  for (double x : g20) detail += fmt(" %+.1f%%", 100.0 * x);
  if (threshold) detail += fmt("; switch at %.0f dB", c.sweep_values[cross]);
  return {threshold && exceeds, detail};
}

Outcome approximation_vs_optimizer() {
  ExperimentConfig c = default_config(Experiment::kContour);
  c.rho_r_db_values = {0.0, 10.0, 20.0, 30.0, 40.0};
  c.eta_r_db_values = {0.0, 25.0, 50.0, 75.0, 100.0};
  c.schemes = {Scheme::kTco2Ic};
  c.trials = 10;
  const ContourGrid opt = contour_grid(c);
  ExperimentConfig a = c;
  a.experiment = Experiment::kApproxContour;
  const ContourGrid apx = contour_grid(a);

  double worst_out = 0.0;
  double worst_all = 0.0;
  std::string where_out;
  bool worst_in_band = false;
  int out_cells = 0;
  int out_ok = 0;
  for (std::size_t i = 0; i < opt.rho_r_db.size(); ++i) {
    for (std::size_t j = 0; j < opt.eta_r_db.size(); ++j) {
      const double dev = opt.mean_rate[i][j] / apx.mean_rate[i][j] - 1.0;
      const bool in_band = std::abs(opt.eta_r_db[j] - opt.rho_r_db[i]) <= 10.0;
      if (std::abs(dev) > worst_all) {
        worst_all = std::abs(dev);
        worst_in_band = in_band;
      }
      if (in_band) continue;
      ++out_cells;
      if (std::abs(dev) <= 0.15) ++out_ok;
      if (std::abs(dev) > worst_out) {
        worst_out = std::abs(dev);
        where_out = fmt("(%.0f, %.0f) dB %+.1f%%", opt.rho_r_db[i], opt.eta_r_db[j], 100.0 * dev);
      }
    }
  }
  return {out_ok == out_cells && worst_in_band,
          fmt("%d/%d off-band cells within 15%%, worst off-band %s, overall worst %s the band",
              out_ok, out_cells, where_out.c_str(), worst_in_band ? "inside" : "outside")};
}

Outcome antenna_split() {
  ExperimentConfig c = default_config(Experiment::kAntennaSweep);
  c.schemes = {Scheme::kTco2Ic};
  c.trials = 20;
  const auto m = means(run_experiment(c));
  std::vector<std::pair<double, double>> ranked;
  for (double n : c.sweep_values) ranked.emplace_back(m.at({n, "TCO_2_IC"}), n);
  std::sort(ranked.rbegin(), ranked.rend());
  const bool ok = ranked.size() >= 2 && std::min(ranked[0].second, ranked[1].second) == 3.0 &&
                  std::max(ranked[0].second, ranked[1].second) == 4.0;
  std::string detail = "N:";
  for (const auto& [rate, n] : ranked) detail += fmt(" %.0f=%.3f", n, rate);
  return {ok, detail};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "fdrelay_acceptance";
  std::filesystem::create_directories(dir);
  ExperimentConfig c = default_config(Experiment::kInrSweep);
  c.sweep_values = {20.0, 80.0};
  c.trials = 4;
  c.seed = 314;
  c.workers = 1;
  emit_csv(run_experiment(c), (dir / "a.csv").string());
  emit_csv(run_experiment(c), (dir / "b.csv").string());
  c.workers = 4;
  emit_csv(run_experiment(c), (dir / "c.csv").string());
  const std::string a = slurp(dir / "a.csv");
  const bool same = !a.empty() && a == slurp(dir / "b.csv") && a == slurp(dir / "c.csv");
  return {same, fmt("%zu bytes, identical across reruns and worker counts: %s", a.size(),
                    same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"training-error-covariance", training_error_covariance},
      {"aggregate-noise-covariance", aggregate_noise_covariance},
      {"gradient", gradient_check},
      {"projection", projection_check},
      {"gp-waterfilling", gp_waterfilling},
      {"training-sweep-shape", training_shape},
      {"inr-sweep-shape", inr_shape},
      {"snr-sweep-shape", snr_shape},
      {"approximation-vs-optimizer", approximation_vs_optimizer},
      {"antenna-split", antenna_split},
      {"determinism", determinism},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only != 0 && only != id) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %d %s (%s; %.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
