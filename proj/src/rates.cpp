#include "fdrelay/rates.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fdrelay {

namespace {

void check_period(std::size_t l) {
  if (l > 1) throw std::invalid_argument("period index must be 0 or 1");
}

void check_dims(const CMatrix& h, const CMatrix& q, const char* what) {
  if (h.cols() != q.rows() || q.rows() != q.cols()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

double trace_re(const CMatrix& q) { return q.trace().real(); }

}  // namespace

double CovarianceSchedule::source_budget() const {
  return weight(0) * trace_re(q_s[0]) + weight(1) * trace_re(q_s[1]);
}

double CovarianceSchedule::relay_budget() const {
  return weight(0) * trace_re(q_r[0]) + weight(1) * trace_re(q_r[1]);
}

CovarianceSchedule CovarianceSchedule::zeros(int n_s, int n_r, double tau) {
  CovarianceSchedule s;
  s.q_s = {CMatrix::Zero(n_s, n_s), CMatrix::Zero(n_s, n_s)};
  s.q_r = {CMatrix::Zero(n_r, n_r), CMatrix::Zero(n_r, n_r)};
  s.tau = tau;
  return s;
}

void CovarianceSchedule::validate(double tol) const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("schedule: tau outside [0, 1]");
  for (const auto& q : q_s) require_hermitian_psd(q, "schedule.q_s");
  for (const auto& q : q_r) require_hermitian_psd(q, "schedule.q_r");
  if (source_budget() > 1.0 + tol) throw std::invalid_argument("schedule: source power exceeded");
  if (relay_budget() > 1.0 + tol) throw std::invalid_argument("schedule: relay power exceeded");
}

EstimateBundle EstimateBundle::perfect_csi() const {
  EstimateBundle out = *this;
  for (LinkEstimate* link : {&out.sr, &out.rr, &out.rd, &out.sd}) link->d_hat.setZero();
  return out;
}

EstimateBundle estimate_links(const ChannelSet& channels, const SystemParams& params, Rng& rng) {
  params.validate();
  const PilotMatrix source_pilot(params.n_s, params.train_len);
  const PilotMatrix relay_pilot(params.n_r, params.train_len);
  const double k = params.kappa;
  const double b = params.beta;
  // Source trains in the first period (seen by relay and destination), the
  // relay in the second.
  EstimateBundle est;
  est.sr = estimate_link(channels.h_sr, params.rho_r, source_pilot, k, b, rng);
  est.sd = estimate_link(channels.h_sd, params.eta_d, source_pilot, k, b, rng);
  est.rr = estimate_link(channels.h_rr, params.eta_r, relay_pilot, k, b, rng);
  est.rd = estimate_link(channels.h_rd, params.rho_d, relay_pilot, k, b, rng);
  return est;
}

CMatrix noise_cov_relay(const EstimateBundle& est, const CovarianceSchedule& sched,
                        const SystemParams& params, std::size_t l, Cancellation ic) {
  check_period(l);
  const CMatrix& h_sr = est.sr.h_hat;
  const CMatrix& h_rr = est.rr.h_hat;
  const CMatrix& q_s = sched.q_s[l];
  const CMatrix& q_r = sched.q_r[l];
  check_dims(h_sr, q_s, "noise_cov_relay(source)");
  check_dims(h_rr, q_r, "noise_cov_relay(relay)");
  if (h_sr.rows() != h_rr.rows()) throw std::invalid_argument("noise_cov_relay: receive dims differ");

  const double k = params.kappa;
  const double b = params.beta;
  const CMatrix src = h_sr * q_s * h_sr.adjoint();
  const CMatrix self = h_rr * q_r * h_rr.adjoint();

  CMatrix sigma = CMatrix::Identity(h_sr.rows(), h_sr.rows());
  sigma += k * params.rho_r * h_sr * diag_part(q_s) * h_sr.adjoint();
  sigma += est.sr.d_hat * trace_re(q_s);
  sigma += k * params.eta_r * h_rr * diag_part(q_r) * h_rr.adjoint();
  sigma += est.rr.d_hat * trace_re(q_r);
  sigma += b * params.rho_r * diag_part(src);
  sigma += b * params.eta_r * diag_part(self);
  if (ic == Cancellation::kDisabled) sigma += params.eta_r * self;
  return hermitize(sigma);
}

CMatrix noise_cov_dest(const EstimateBundle& est, const CovarianceSchedule& sched,
                       const SystemParams& params, std::size_t l) {
  check_period(l);
  const CMatrix& h_rd = est.rd.h_hat;
  const CMatrix& h_sd = est.sd.h_hat;
  const CMatrix& q_s = sched.q_s[l];
  const CMatrix& q_r = sched.q_r[l];
  check_dims(h_rd, q_r, "noise_cov_dest(relay)");
  check_dims(h_sd, q_s, "noise_cov_dest(source)");
  if (h_rd.rows() != h_sd.rows()) throw std::invalid_argument("noise_cov_dest: receive dims differ");

  const double k = params.kappa;
  const double b = params.beta;
  const CMatrix relay = h_rd * q_r * h_rd.adjoint();
  const CMatrix interf = h_sd * q_s * h_sd.adjoint();

  CMatrix sigma = CMatrix::Identity(h_rd.rows(), h_rd.rows());
  sigma += k * params.rho_d * h_rd * diag_part(q_r) * h_rd.adjoint();
  sigma += est.rd.d_hat * trace_re(q_r);
  sigma += params.eta_d * (interf + k * h_sd * diag_part(q_s) * h_sd.adjoint());
  sigma += est.sd.d_hat * trace_re(q_s);
  sigma += b * params.rho_d * diag_part(relay);
  sigma += b * params.eta_d * diag_part(interf);
  return hermitize(sigma);
}

double rate_sr(const EstimateBundle& est, const CovarianceSchedule& sched,
               const SystemParams& params, std::size_t l, Cancellation ic) {
  const CMatrix sigma = noise_cov_relay(est, sched, params, l, ic);
  const CMatrix& h = est.sr.h_hat;
  const CMatrix s = hermitize(params.rho_r * h * sched.q_s[l] * h.adjoint() + sigma);
  return std::max(0.0, log2det_hpd(s) - log2det_hpd(sigma));
}

double rate_rd(const EstimateBundle& est, const CovarianceSchedule& sched,
               const SystemParams& params, std::size_t l) {
  const CMatrix sigma = noise_cov_dest(est, sched, params, l);
  const CMatrix& h = est.rd.h_hat;
  const CMatrix s = hermitize(params.rho_d * h * sched.q_r[l] * h.adjoint() + sigma);
  return std::max(0.0, log2det_hpd(s) - log2det_hpd(sigma));
}

RateReport end_to_end_rate(const EstimateBundle& est, const CovarianceSchedule& sched,
                           const SystemParams& params, BoundKind bound, Cancellation ic) {
  const bool upper = bound == BoundKind::kUpper;
  const EstimateBundle perfect = upper ? est.perfect_csi() : EstimateBundle{};
  const EstimateBundle* e = upper ? &perfect : &est;
  RateReport r;
  r.bound_kind = bound;
  for (std::size_t l = 0; l < 2; ++l) {
    r.i_sr[l] = rate_sr(*e, sched, params, l, ic);
    r.i_rd[l] = rate_rd(*e, sched, params, l);
  }
  r.sr_sum = sched.weight(0) * r.i_sr[0] + sched.weight(1) * r.i_sr[1];
  r.rd_sum = sched.weight(0) * r.i_rd[0] + sched.weight(1) * r.i_rd[1];
  r.i_end = std::min(r.sr_sum, r.rd_sum);
  return r;
}

}  // namespace fdrelay
