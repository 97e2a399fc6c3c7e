#include "fdrelay/optimizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fdrelay {

namespace {

constexpr double kLn2 = std::numbers::ln2;

struct HopTerms {
  CMatrix s_inv;
  CMatrix delta;  // S^-1 - Sigma^-1
};

CMatrix hpd_inverse(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("covariance is not positive definite");
  }
  return hermitize(llt.solve(CMatrix::Identity(a.rows(), a.cols())));
}

HopTerms relay_hop(const EstimateBundle& est, const CovarianceSchedule& sched,
                   const SystemParams& params, std::size_t l, Cancellation ic) {
  const CMatrix sigma = noise_cov_relay(est, sched, params, l, ic);
  const CMatrix& h = est.sr.h_hat;
  const CMatrix s = hermitize(params.rho_r * h * sched.q_s[l] * h.adjoint() + sigma);
  HopTerms t;
  t.s_inv = hpd_inverse(s);
  t.delta = t.s_inv - hpd_inverse(sigma);
  return t;
}

HopTerms dest_hop(const EstimateBundle& est, const CovarianceSchedule& sched,
                  const SystemParams& params, std::size_t l) {
  const CMatrix sigma = noise_cov_dest(est, sched, params, l);
  const CMatrix& h = est.rd.h_hat;
  const CMatrix s = hermitize(params.rho_d * h * sched.q_r[l] * h.adjoint() + sigma);
  HopTerms t;
  t.s_inv = hpd_inverse(s);
  t.delta = t.s_inv - hpd_inverse(sigma);
  return t;
}

// d/dQ of log det(Y) for the distortion-type terms of a covariance Y that
// depends on Q through  k * H diag(Q) H^H + b * diag(H Q H^H) + D tr(Q),
// contracted with `delta` (difference of the two inverse matrices).
CMatrix distortion_terms(const CMatrix& h, const CMatrix& delta, const CMatrix& d_hat, double k,
                         double b) {
  const Eigen::Index n = h.cols();
  CMatrix g = k * diag_part(h.adjoint() * delta * h);
  g += b * h.adjoint() * diag_part(delta) * h;
  g += inner(d_hat, delta).real() * CMatrix::Identity(n, n);
  return g;
}

void check_weight(double zeta) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw std::invalid_argument("zeta must lie in [0, 1]");
}

void check_tau(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0, 1]");
}

double max_change(const CovarianceSchedule& a, const CovarianceSchedule& b) {
  double c = 0.0;
  for (std::size_t l = 0; l < 2; ++l) {
    c = std::max(c, max_abs_diff(a.q_s[l], b.q_s[l]));
    c = std::max(c, max_abs_diff(a.q_r[l], b.q_r[l]));
  }
  return c;
}

// Forces `sched` onto the requested structure without changing its budget.
CovarianceSchedule conform(CovarianceSchedule sched, double tau, Structure structure) {
  const double old_tau = sched.tau;
  sched.tau = tau;
  switch (structure) {
    case Structure::kFree:
      break;
    case Structure::kTied:
      for (auto* q : {&sched.q_s, &sched.q_r}) {
        const CMatrix shared = hermitize(old_tau * (*q)[0] + (1.0 - old_tau) * (*q)[1]);
        (*q)[0] = shared;
        (*q)[1] = shared;
      }
      break;
    case Structure::kHalfDuplex:
      sched.q_s[1].setZero();
      sched.q_r[0].setZero();
      break;
  }
  return sched;
}

class GradientProjection {
 public:
  GradientProjection(const EstimateBundle& est, const SystemParams& params, double zeta,
                     const GpConfig& cfg, const SolveOptions& opts)
      : est_(est), params_(params), zeta_(zeta), cfg_(cfg), opts_(opts) {}

  double objective(const CovarianceSchedule& q) const {
    return weighted_sum_rate(est_, q, params_, zeta_, opts_.ic);
  }

  // One gradient/projection/Armijo update of the relay ('r') or source ('s')
  // covariances. Returns the new objective.
  double block_step(CovarianceSchedule& q, double f, char block, int outer) {
    const bool relay = block == 'r';
    auto& mats = relay ? q.q_r : q.q_s;
    auto grad = [&](std::size_t l) {
      return relay ? gradient_relay(est_, q, params_, zeta_, l, opts_.ic)
                   : gradient_source(est_, q, params_, zeta_, l, opts_.ic);
    };

    std::array<CMatrix, 2> g;
    std::array<CMatrix, 2> d = {CMatrix::Zero(mats[0].rows(), mats[0].cols()),
                                CMatrix::Zero(mats[1].rows(), mats[1].cols())};
    double directional = 0.0;
    const double s = cfg_.s_step;

    switch (opts_.structure) {
      case Structure::kFree: {
        g = {grad(0), grad(1)};
        const Projection p = project_constraint(hermitize(mats[0] + s * g[0]),
                                                hermitize(mats[1] + s * g[1]), q.tau);
        d[0] = p.q1 - mats[0];
        d[1] = p.q2 - mats[1];
        directional = inner(g[0], d[0]).real() + inner(g[1], d[1]).real();
        break;
      }
      case Structure::kTied: {
        const CMatrix gsum = grad(0) + grad(1);
        auto [blocks, mu] = water_fill({hermitize(mats[0] + s * gsum)}, {1.0});
        d[0] = blocks[0] - mats[0];
        d[1] = d[0];
        directional = inner(gsum, d[0]).real();
        break;
      }
      case Structure::kHalfDuplex: {
        const std::size_t l = relay ? 1 : 0;
        const CMatrix gl = grad(l);
        auto [blocks, mu] = water_fill({hermitize(mats[l] + s * gl)}, {q.weight(l)});
        d[l] = blocks[0] - mats[l];
        directional = inner(gl, d[l]).real();
        break;
      }
    }

    GpStep step;
    step.outer = outer;
    step.block = block;
    step.objective_before = f;
    step.objective_after = f;
    step.directional = directional;

    if (directional > 1e-13 * std::max(1.0, std::abs(f))) {
      double gamma = 1.0;
      for (int m = 0; m < cfg_.max_armijo_steps; ++m, gamma *= cfg_.nu) {
        CovarianceSchedule cand = q;
        auto& cm = relay ? cand.q_r : cand.q_s;
        for (std::size_t l = 0; l < 2; ++l) cm[l] = hermitize(mats[l] + gamma * d[l]);
        const double fc = objective(cand);
        if (fc - f >= cfg_.sigma * gamma * directional) {
          q = std::move(cand);
          f = fc;
          step.gamma = gamma;
          step.armijo_m = m;
          step.accepted = true;
          step.objective_after = fc;
          break;
        }
      }
    }
    const double budget = relay ? q.relay_budget() : q.source_budget();
    step.budget_residual = std::max(0.0, budget - 1.0);
    if (opts_.log != nullptr) opts_.log->push_back(step);
    return f;
  }

 private:
  const EstimateBundle& est_;
  const SystemParams& params_;
  double zeta_;
  const GpConfig& cfg_;
  const SolveOptions& opts_;
};

double min_rate_of(const OptResult& r) { return r.rate.i_end; }

}  // namespace

void GpConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("GpConfig." + field + ": " + why);
  };
  if (!(sigma >= 1e-5 && sigma <= 1e-1)) fail("sigma", "must lie in [1e-5, 1e-1]");
  if (!(nu >= 0.1 && nu <= 0.5)) fail("nu", "must lie in [0.1, 0.5]");
  if (!(eps_stop > 0.0)) fail("eps_stop", "must be > 0");
  if (max_outer_iters < 1) fail("max_outer_iters", "must be >= 1");
  if (!(s_step > 0.0)) fail("s_step", "must be > 0");
  if (max_armijo_steps < 1) fail("max_armijo_steps", "must be >= 1");
  if (!(bisect_tol > 0.0)) fail("bisect_tol", "must be > 0");
  if (bisect_max_iters < 1) fail("bisect_max_iters", "must be >= 1");
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kTco2Ic: return "TCO_2_IC";
    case Scheme::kTco2: return "TCO_2";
    case Scheme::kTco1Ic: return "TCO_1_IC";
    case Scheme::kOhd: return "OHD";
    case Scheme::kNfd: return "NFD";
  }
  return "?";
}

std::optional<Scheme> scheme_from_string(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '_' || c == '-' || c == ' ') continue;
    key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (key == "TCO2IC") return Scheme::kTco2Ic;
  if (key == "TCO2") return Scheme::kTco2;
  if (key == "TCO1IC") return Scheme::kTco1Ic;
  if (key == "OHD") return Scheme::kOhd;
  if (key == "NFD") return Scheme::kNfd;
  return std::nullopt;
}

double weighted_sum_rate(const EstimateBundle& est, const CovarianceSchedule& sched,
                         const SystemParams& params, double zeta, Cancellation ic) {
  check_weight(zeta);
  const RateReport r = end_to_end_rate(est, sched, params, BoundKind::kLower, ic);
  return zeta * r.sr_sum + (1.0 - zeta) * r.rd_sum;
}

CMatrix gradient_relay(const EstimateBundle& est, const CovarianceSchedule& sched,
                       const SystemParams& params, double zeta, std::size_t l, Cancellation ic) {
  check_weight(zeta);
  const double w = sched.weight(l);
  const Eigen::Index n = sched.q_r[l].rows();
  if (w == 0.0) return CMatrix::Zero(n, n);
  const double k = params.kappa;
  const double b = params.beta;

  const HopTerms dst = dest_hop(est, sched, params, l);
  const CMatrix& h_rd = est.rd.h_hat;
  CMatrix g_dst = params.rho_d * h_rd.adjoint() * dst.s_inv * h_rd;
  g_dst += distortion_terms(h_rd, dst.delta, est.rd.d_hat, k * params.rho_d, b * params.rho_d);

  const HopTerms rel = relay_hop(est, sched, params, l, ic);
  const CMatrix& h_rr = est.rr.h_hat;
  CMatrix g_rel = distortion_terms(h_rr, rel.delta, est.rr.d_hat, k * params.eta_r,
                                   b * params.eta_r);
  if (ic == Cancellation::kDisabled) g_rel += params.eta_r * h_rr.adjoint() * rel.delta * h_rr;

  return hermitize((2.0 * w / kLn2) * ((1.0 - zeta) * g_dst + zeta * g_rel));
}

CMatrix gradient_source(const EstimateBundle& est, const CovarianceSchedule& sched,
                        const SystemParams& params, double zeta, std::size_t l, Cancellation ic) {
  check_weight(zeta);
  const double w = sched.weight(l);
  const Eigen::Index n = sched.q_s[l].rows();
  if (w == 0.0) return CMatrix::Zero(n, n);
  const double k = params.kappa;
  const double b = params.beta;

  const HopTerms rel = relay_hop(est, sched, params, l, ic);
  const CMatrix& h_sr = est.sr.h_hat;
  CMatrix g_rel = params.rho_r * h_sr.adjoint() * rel.s_inv * h_sr;
  g_rel += distortion_terms(h_sr, rel.delta, est.sr.d_hat, k * params.rho_r, b * params.rho_r);

  // The source reaches the destination only as uncancelled interference,
  // which enters S_d and Sigma_d identically.
  const HopTerms dst = dest_hop(est, sched, params, l);
  const CMatrix& h_sd = est.sd.h_hat;
  CMatrix g_dst = params.eta_d * h_sd.adjoint() * dst.delta * h_sd;
  g_dst += distortion_terms(h_sd, dst.delta, est.sd.d_hat, k * params.eta_d, b * params.eta_d);

  return hermitize((2.0 * w / kLn2) * (zeta * g_rel + (1.0 - zeta) * g_dst));
}

std::pair<std::vector<CMatrix>, double> water_fill(const std::vector<CMatrix>& blocks,
                                                   const std::vector<double>& weights) {
  if (blocks.size() != weights.size()) {
    throw std::invalid_argument("water_fill: blocks and weights differ in length");
  }
  struct Level {
    double lambda;
    double weight;
  };
  std::vector<Eigen::SelfAdjointEigenSolver<CMatrix>> eig;
  std::vector<Level> levels;
  double slack_use = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("water_fill: negative weight");
    eig.emplace_back(hermitize(blocks[i]));
    const RVector& lam = eig.back().eigenvalues();
    for (Eigen::Index j = 0; j < lam.size(); ++j) {
      if (weights[i] > 0.0) levels.push_back({lam(j), weights[i]});
      slack_use += weights[i] * std::max(lam(j), 0.0);
    }
  }

  double mu = 0.0;
  if (slack_use > 1.0) {
    // Piecewise-linear g(mu) = sum w (lambda - mu)^+ ; find g(mu) = 1 exactly.
    std::sort(levels.begin(), levels.end(),
              [](const Level& a, const Level& b) { return a.lambda > b.lambda; });
    double wsum = 0.0;
    double wl_sum = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      wsum += levels[k].weight;
      wl_sum += levels[k].weight * levels[k].lambda;
      const double candidate = (wl_sum - 1.0) / wsum;
      const double next = k + 1 < levels.size() ? levels[k + 1].lambda : -INFINITY;
      if (candidate >= next) {
        mu = candidate;
        break;
      }
    }
  }

  std::vector<CMatrix> out;
  out.reserve(blocks.size());
  for (const auto& es : eig) {
    const RVector lam = (es.eigenvalues().array() - mu).cwiseMax(0.0);
    out.push_back(hermitize(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint()));
  }
  return {std::move(out), mu};
}

Projection project_constraint(const CMatrix& p1, const CMatrix& p2, double tau) {
  check_tau(tau);
  auto [blocks, mu] = water_fill({p1, p2}, {tau, 1.0 - tau});
  return {std::move(blocks[0]), std::move(blocks[1]), mu};
}

OptResult gp_optimize(const EstimateBundle& est, const SystemParams& params, double zeta,
                      double tau, const CovarianceSchedule& init, const GpConfig& cfg,
                      const SolveOptions& opts) {
  cfg.validate();
  check_weight(zeta);
  check_tau(tau);
  CovarianceSchedule q = conform(init, tau, opts.structure);
  q.validate();

  GradientProjection gp(est, params, zeta, cfg, opts);
  double f = gp.objective(q);
  OptResult res;
  res.zeta = zeta;
  res.tau_star = tau;
  for (int outer = 1; outer <= cfg.max_outer_iters; ++outer) {
    const CovarianceSchedule prev = q;
    f = gp.block_step(q, f, 'r', outer);
    f = gp.block_step(q, f, 's', outer);
    res.iterations = outer;
    if (max_change(q, prev) < cfg.eps_stop) {
      res.converged = true;
      break;
    }
  }
  res.sched = std::move(q);
  res.rate = end_to_end_rate(est, res.sched, params, BoundKind::kLower, opts.ic);
  return res;
}

OptResult bisect_zeta(const EstimateBundle& est, const SystemParams& params, double tau,
                      const CovarianceSchedule& init, const GpConfig& cfg,
                      const SolveOptions& opts) {
  cfg.validate();
  double lo = 0.0;
  double hi = 1.0;
  OptResult best;
  bool have_best = false;
  int total_iters = 0;
  int steps = 0;
  std::vector<std::array<double, 2>> intervals;
  for (int it = 0; it < cfg.bisect_max_iters; ++it) {
    intervals.push_back({lo, hi});
    const double zeta = 0.5 * (lo + hi);
    OptResult r = gp_optimize(est, params, zeta, tau, init, cfg, opts);
    total_iters += r.iterations;
    steps = it + 1;
    const double gap = r.rate.rd_sum - r.rate.sr_sum;
    if (!have_best || min_rate_of(r) > min_rate_of(best)) {
      best = std::move(r);
      have_best = true;
    }
    if (std::abs(gap) < cfg.bisect_tol) break;
    if (gap > 0.0) {
      lo = zeta;  // relay-to-destination is ahead: weight the first hop more
    } else {
      hi = zeta;
    }
  }
  best.iterations = total_iters;
  best.bisection_steps = steps;
  best.zeta_intervals = std::move(intervals);
  return best;
}

CovarianceSchedule half_duplex_init(const SystemParams& params, double tau) {
  check_tau(tau);
  CovarianceSchedule s = CovarianceSchedule::zeros(params.n_s, params.n_r, tau);
  if (tau > 0.0) s.q_s[0] = CMatrix::Identity(params.n_s, params.n_s) / (tau * params.n_s);
  if (tau < 1.0) s.q_r[1] = CMatrix::Identity(params.n_r, params.n_r) / ((1.0 - tau) * params.n_r);
  return s;
}

CovarianceSchedule naive_full_duplex(const CovarianceSchedule& hd) {
  CovarianceSchedule s = hd;
  const CMatrix src = hd.weight(0) * hd.q_s[0];
  const CMatrix rel = hd.weight(1) * hd.q_r[1];
  s.q_s = {src, src};
  s.q_r = {rel, rel};
  return s;
}

OptResult optimize_scheme(const EstimateBundle& est, const SystemParams& params, Scheme scheme,
                          const std::vector<double>& tau_grid, const GpConfig& cfg) {
  if (tau_grid.empty()) throw std::invalid_argument("optimize_scheme: empty tau grid");
  OptResult best;
  bool have_best = false;

  for (double tau : tau_grid) {
    check_tau(tau);
    const SolveOptions hd_opts{Structure::kHalfDuplex, Cancellation::kEnabled, nullptr};
    OptResult hd = gp_optimize(est, params, 0.5, tau, half_duplex_init(params, tau), cfg, hd_opts);

    OptResult cand;
    switch (scheme) {
      case Scheme::kOhd:
        cand = std::move(hd);
        break;
      case Scheme::kNfd: {
        cand.sched = naive_full_duplex(hd.sched);
        cand.rate = end_to_end_rate(est, cand.sched, params);
        cand.zeta = 0.5;
        cand.iterations = hd.iterations;
        cand.converged = hd.converged;
        break;
      }
      case Scheme::kTco2Ic:
      case Scheme::kTco2: {
        const Cancellation ic =
            scheme == Scheme::kTco2Ic ? Cancellation::kEnabled : Cancellation::kDisabled;
        const SolveOptions opts{Structure::kFree, ic, nullptr};
        const CovarianceSchedule nfd = naive_full_duplex(hd.sched);
        // The half-duplex design is itself feasible for the two-period problem.
        cand = hd;
        cand.rate = end_to_end_rate(est, hd.sched, params, BoundKind::kLower, ic);
        std::vector<InitOutcome> runs;
        const std::pair<InitKind, const CovarianceSchedule*> inits[] = {
            {InitKind::kHalfDuplex, &hd.sched}, {InitKind::kNaiveFullDuplex, &nfd}};
        for (const auto& [kind, init] : inits) {
          OptResult r = bisect_zeta(est, params, tau, *init, cfg, opts);
          runs.push_back(InitOutcome{kind, r.rate.i_end, r.zeta});
          if (r.rate.i_end > cand.rate.i_end) cand = std::move(r);
        }
        cand.init_runs = std::move(runs);
        break;
      }
      case Scheme::kTco1Ic: {
        const SolveOptions opts{Structure::kTied, Cancellation::kEnabled, nullptr};
        cand = bisect_zeta(est, params, tau, naive_full_duplex(hd.sched), cfg, opts);
        cand.init_runs = {{InitKind::kNaiveFullDuplex, cand.rate.i_end, cand.zeta}};
        break;
      }
    }
    cand.tau_star = tau;

    const bool better = !have_best || cand.rate.i_end > best.rate.i_end + 1e-12 ||
                        (std::abs(cand.rate.i_end - best.rate.i_end) <= 1e-12 &&
                         std::abs(tau - 0.5) < std::abs(best.tau_star - 0.5));
    if (better) {
      best = std::move(cand);
      have_best = true;
    }
  }
  return best;
}

}  // namespace fdrelay
