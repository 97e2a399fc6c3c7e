#include "fdrelay/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fdrelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double distortion(const RegimeParams& p) { return p.kappa + p.beta; }

}  // namespace

double RegimeParams::theta() const {
  const double d = kappa + beta;
  return d > 0.0 ? r() / (m * d) : kInf;
}

void RegimeParams::validate() const {
  auto fail = [](const char* field, const char* why) {
    throw std::invalid_argument(std::string("RegimeParams.") + field + ": " + why);
  };
  if (n < 1) fail("n", "must be >= 1");
  if (m < 1) fail("m", "must be >= 1");
  if (!(rho_r >= 0.0 && std::isfinite(rho_r))) fail("rho_r", "must be finite and >= 0");
  if (!(rho_d >= 0.0 && std::isfinite(rho_d))) fail("rho_d", "must be finite and >= 0");
  if (!(eta_r >= 0.0 && std::isfinite(eta_r))) fail("eta_r", "must be finite and >= 0");
  if (!(kappa >= 0.0 && kappa < 1.0)) fail("kappa", "must lie in [0, 1)");
  if (!(beta >= 0.0 && beta < 1.0)) fail("beta", "must lie in [0, 1)");
}

std::string_view to_string(DuplexMode mode) {
  return mode == DuplexMode::kFull ? "full" : "half";
}

double approx_rate_fd(const RegimeParams& p) {
  p.validate();
  const double r = p.r();
  const double rm = r / p.m;
  const double d = distortion(p);
  if (p.rho_r / p.rho_d >= 1.0 + d * p.eta_r / rm) {
    return r * std::log2(1.0 + p.rho_d / (rm + d * p.rho_d));
  }
  return r * std::log2(1.0 + p.rho_r / (rm + d * (p.rho_r + p.eta_r)));
}

double approx_rate_hd(const RegimeParams& p) {
  p.validate();
  const double r = p.r();
  const double rm2 = r / (2.0 * p.m);
  const double d = distortion(p);
  const double rho = p.rho_r >= p.rho_d ? p.rho_d : p.rho_r;
  return 0.5 * r * std::log2(1.0 + rho / (rm2 + d * rho));
}

ApproxRate approx_rate(const RegimeParams& p) {
  const double fd = approx_rate_fd(p);
  const double hd = approx_rate_hd(p);
  if (fd >= hd) return {fd, DuplexMode::kFull};
  return {hd, DuplexMode::kHalf};
}

double eta_critical(const RegimeParams& p) {
  p.validate();
  const double ratio = p.rho_r / p.rho_d;
  if (ratio <= 1.0) return 0.0;
  if (distortion(p) == 0.0) return kInf;
  return (ratio - 1.0) * p.theta();
}

double duplex_boundary(const RegimeParams& p) {
  p.validate();
  const double d = distortion(p);
  if (d == 0.0) return kInf;
  const double theta = p.theta();
  const double ratio = p.rho_r / p.rho_d;
  if (ratio <= 1.0) {
    const double a = theta + 2.0 * p.rho_r;
    return 0.5 * std::sqrt(a * a + 2.0 * p.rho_r / d * a) - 0.5 * theta;
  }
  // Never below eta_critical, so it also covers the always-full-duplex case.
  const double a = theta + 2.0 * p.rho_d;
  return 0.5 * ratio * std::sqrt(a * a + 2.0 * p.rho_d / d * a) - theta * (1.0 - 0.5 * ratio);
}

double diagonal_channel_rate(const RegimeParams& p, const CovarianceSchedule& sched) {
  p.validate();
  const int r = p.r();
  const double gain = std::sqrt(static_cast<double>(p.n) * p.m / r);
  CMatrix h = CMatrix::Zero(p.m, p.n);
  for (int i = 0; i < r; ++i) h(i, i) = gain;

  LinkEstimate link;
  link.h_hat = h;
  link.d_hat = CMatrix::Zero(p.m, p.m);
  link.alpha = 1.0;
  EstimateBundle est{link, link, link, link};

  SystemParams sp;
  sp.rho_r = p.rho_r;
  sp.rho_d = p.rho_d;
  sp.eta_r = p.eta_r;
  sp.eta_d = 0.0;
  sp.kappa = p.kappa;
  sp.beta = p.beta;
  sp.n_s = sp.n_r = p.n;
  sp.m_r = sp.m_d = p.m;
  return end_to_end_rate(est, sched, sp).i_end;
}

CovarianceSchedule full_duplex_schedule(int n) {
  CovarianceSchedule s = CovarianceSchedule::zeros(n, n, 0.5);
  const CMatrix q = CMatrix::Identity(n, n) / n;
  s.q_s = {q, q};
  s.q_r = {q, q};
  return s;
}

CovarianceSchedule half_duplex_schedule(int n) {
  CovarianceSchedule s = CovarianceSchedule::zeros(n, n, 0.5);
  s.q_s[0] = CMatrix::Identity(n, n) * (2.0 / n);
  s.q_r[1] = CMatrix::Identity(n, n) * (2.0 / n);
  return s;
}

}  // namespace fdrelay
