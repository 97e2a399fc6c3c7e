#include "fdrelay/approx.hpp"
#include "fdrelay/optimizer.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fdrelay;

namespace {

CMatrix random_hermitian(oracle::Gauss& g, int n, double scale) {
  const CMatrix a = g.cn_matrix(n, n) * scale;
  return 0.5 * (a + a.adjoint());
}

SystemParams params(oracle::Gauss& g) {
  SystemParams p;
  p.rho_r = std::pow(10.0, 2.0 * g.uniform());
  p.rho_d = std::pow(10.0, 2.0 * g.uniform());
  p.eta_r = std::pow(10.0, 5.0 * g.uniform());
  p.eta_d = std::pow(10.0, g.uniform());
  p.kappa = std::pow(10.0, -1.0 - 4.0 * g.uniform());
  p.beta = std::pow(10.0, -1.0 - 4.0 * g.uniform());
  p.n_s = p.n_r = 1 + static_cast<int>(3.0 * g.uniform());
  p.m_r = p.m_d = 1 + static_cast<int>(3.0 * g.uniform());
  p.train_len = 1 + static_cast<int>(10.0 * g.uniform());
  return p;
}

EstimateBundle estimates(oracle::Gauss& g, const SystemParams& p) {
  auto link = [&](int m, int n, double alpha) {
    LinkEstimate e;
    e.h_hat = g.cn_matrix(m, n);
    e.alpha = alpha;
    e.d_hat = conditional_error_cov(e.h_hat, alpha, p.kappa, p.beta, n, p.train_len);
    return e;
  };
  EstimateBundle est;
  est.sr = link(p.m_r, p.n_s, p.rho_r);
  est.rr = link(p.m_r, p.n_r, p.eta_r);
  est.rd = link(p.m_d, p.n_r, p.rho_d);
  est.sd = link(p.m_d, p.n_s, p.eta_d);
  return est;
}

CovarianceSchedule schedule(oracle::Gauss& g, const SystemParams& p) {
  CovarianceSchedule s = CovarianceSchedule::zeros(p.n_s, p.n_r, 0.1 + 0.8 * g.uniform());
  for (std::size_t l = 0; l < 2; ++l) {
    s.q_s[l] = oracle::random_psd(g, p.n_s, g.uniform());
    s.q_r[l] = oracle::random_psd(g, p.n_r, g.uniform());
  }
  return s;
}

}  // namespace

TEST_CASE("projection output is feasible, tight and idempotent") {
  oracle::Gauss g(1);
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + static_cast<int>(4.0 * g.uniform());
    const double tau = g.uniform();
    const double scale = std::pow(10.0, 2.0 * g.uniform() - 1.0);
    const CMatrix p1 = random_hermitian(g, n, scale);
    const CMatrix p2 = random_hermitian(g, n, scale);
    const Projection r = project_constraint(p1, p2, tau);
    CHECK(is_hermitian(r.q1));
    CHECK(min_eigenvalue(r.q1) >= -1e-12);
    CHECK(min_eigenvalue(r.q2) >= -1e-12);
    const double budget = tau * r.q1.trace().real() + (1.0 - tau) * r.q2.trace().real();
    CHECK(budget <= 1.0 + 1e-9);
    if (r.mu > 0.0) CHECK(budget == doctest::Approx(1.0).epsilon(1e-9));
    const Projection again = project_constraint(r.q1, r.q2, tau);
    CHECK(max_abs_diff(again.q1, r.q1) < 1e-9);
    CHECK(max_abs_diff(again.q2, r.q2) < 1e-9);
  }
}

TEST_CASE("projection is the nearest feasible point") {
  // Any feasible point is at least as far from the input.
  oracle::Gauss g(2);
  for (int i = 0; i < 50; ++i) {
    const int n = 2 + static_cast<int>(2.0 * g.uniform());
    const double tau = 0.2 + 0.6 * g.uniform();
    const CMatrix p1 = random_hermitian(g, n, 2.0);
    const CMatrix p2 = random_hermitian(g, n, 2.0);
    const Projection r = project_constraint(p1, p2, tau);
    auto dist = [&](const CMatrix& a, const CMatrix& b) {
      return tau * (a - p1).squaredNorm() + (1.0 - tau) * (b - p2).squaredNorm();
    };
    const double best = dist(r.q1, r.q2);
    for (int k = 0; k < 20; ++k) {
      const CMatrix a = oracle::random_psd(g, n, g.uniform());
      const CMatrix b = oracle::random_psd(g, n, g.uniform());
      CHECK(dist(a, b) >= best - 1e-9);
    }
  }
}

TEST_CASE("noise covariances are Hermitian positive definite") {
  oracle::Gauss g(3);
  for (int i = 0; i < 100; ++i) {
    const SystemParams p = params(g);
    const EstimateBundle est = estimates(g, p);
    const CovarianceSchedule s = schedule(g, p);
    for (std::size_t l = 0; l < 2; ++l) {
      for (const CMatrix& c : {noise_cov_relay(est, s, p, l), noise_cov_dest(est, s, p, l)}) {
        CHECK(is_hermitian(c));
        CHECK(min_eigenvalue(c) >= 1.0 - 1e-9);
      }
    }
  }
}

TEST_CASE("upper bound dominates the lower bound") {
  oracle::Gauss g(4);
  for (int i = 0; i < 100; ++i) {
    const SystemParams p = params(g);
    const EstimateBundle est = estimates(g, p);
    const CovarianceSchedule s = schedule(g, p);
    const RateReport lo = end_to_end_rate(est, s, p);
    const RateReport hi = end_to_end_rate(est, s, p, BoundKind::kUpper);
    CHECK(hi.sr_sum >= lo.sr_sum - 1e-12);
    CHECK(hi.rd_sum >= lo.rd_sum - 1e-12);
    CHECK(lo.i_end >= 0.0);
    CHECK(lo.i_end == std::min(lo.sr_sum, lo.rd_sum));
  }
}

TEST_CASE("cancellation never hurts") {
  oracle::Gauss g(5);
  for (int i = 0; i < 100; ++i) {
    const SystemParams p = params(g);
    const EstimateBundle est = estimates(g, p);
    const CovarianceSchedule s = schedule(g, p);
    const RateReport on = end_to_end_rate(est, s, p);
    const RateReport off = end_to_end_rate(est, s, p, BoundKind::kLower, Cancellation::kDisabled);
    CHECK(on.sr_sum >= off.sr_sum - 1e-12);
  }
}

TEST_CASE("rate is nonincreasing in distortion and interference") {
  oracle::Gauss g(6);
  for (int i = 0; i < 100; ++i) {
    const SystemParams p = params(g);
    const EstimateBundle est = estimates(g, p);
    const CovarianceSchedule s = schedule(g, p);
    const double base = end_to_end_rate(est, s, p).i_end;
    SystemParams q = p;
    q.kappa *= 2.0;
    CHECK(end_to_end_rate(est, s, q).i_end <= base + 1e-12);
    q = p;
    q.beta *= 2.0;
    CHECK(end_to_end_rate(est, s, q).i_end <= base + 1e-12);
    q = p;
    q.eta_r *= 2.0;
    CHECK(end_to_end_rate(est, s, q).i_end <= base + 1e-12);
  }
}

TEST_CASE("more training data lowers the error covariance") {
  oracle::Gauss g(7);
  for (int i = 0; i < 50; ++i) {
    const CMatrix h = g.cn_matrix(3, 2);
    const double a = std::pow(10.0, 3.0 * g.uniform());
    const CMatrix d1 = conditional_error_cov(h, a, 1e-3, 1e-3, 2, 2);
    const CMatrix d2 = conditional_error_cov(h, a, 1e-3, 1e-3, 2, 3);
    CHECK(min_eigenvalue(d1 - d2) >= -1e-12);
  }
}

TEST_CASE("gradient projection iterates are monotone and feasible") {
  oracle::Gauss g(8);
  for (int i = 0; i < 8; ++i) {
    const SystemParams p = params(g);
    const EstimateBundle est = estimates(g, p);
    const CovarianceSchedule s = schedule(g, p);
    std::vector<GpStep> log;
    SolveOptions opts;
    opts.log = &log;
    const double zeta = g.uniform();
    const OptResult r = gp_optimize(est, p, zeta, s.tau, s, GpConfig{}, opts);
    for (const GpStep& st : log) {
      CHECK(st.objective_after >= st.objective_before);
      CHECK(st.budget_residual <= 1e-9);
    }
    CHECK(r.sched.source_budget() <= 1.0 + 1e-9);
    CHECK(r.sched.relay_budget() <= 1.0 + 1e-9);
    CHECK(min_eigenvalue(r.sched.q_s[0]) >= -1e-12);
    CHECK(min_eigenvalue(r.sched.q_r[1]) >= -1e-12);
  }
}

TEST_CASE("approximate rate is monotone in its powers") {
  oracle::Gauss g(9);
  for (int i = 0; i < 300; ++i) {
    RegimeParams p;
    p.n = 1 + static_cast<int>(5.0 * g.uniform());
    p.m = 1 + static_cast<int>(5.0 * g.uniform());
    p.kappa = std::pow(10.0, -1.0 - 5.0 * g.uniform());
    p.beta = std::pow(10.0, -1.0 - 5.0 * g.uniform());
    p.rho_r = std::pow(10.0, 4.0 * g.uniform());
    p.rho_d = std::pow(10.0, 4.0 * g.uniform());
    p.eta_r = std::pow(10.0, 12.0 * g.uniform());
    const double base = approx_rate(p).rate;
    RegimeParams q = p;
    q.eta_r *= 1.5;
    CHECK(approx_rate(q).rate <= base + 1e-12);
    q = p;
    q.rho_d *= 1.5;
    CHECK(approx_rate(q).rate >= base - 1e-12);
    q = p;
    q.rho_r *= 1.5;
    CHECK(approx_rate(q).rate >= base - 1e-12);
    q = p;
    q.kappa *= 1.5;
    CHECK(approx_rate(q).rate <= base + 1e-12);
    CHECK(base >= 0.0);
  }
}
