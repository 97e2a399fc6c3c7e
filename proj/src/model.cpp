#include "fdrelay/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fdrelay {

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw std::invalid_argument("SystemParams." + field + ": " + why);
}

// Spatial correlation of the pilot per channel use, X X^H / (T N).
CMatrix pilot_correlation(const PilotMatrix& pilot) {
  return hermitize(pilot.x() * pilot.x().adjoint() / static_cast<double>(pilot.x().cols()));
}

}  // namespace

void SystemParams::validate() const {
  for (auto [name, v] : {std::pair{"rho_r", rho_r}, {"rho_d", rho_d}, {"eta_r", eta_r},
                         {"eta_d", eta_d}}) {
    require(std::isfinite(v) && v >= 0.0, name, "must be finite and >= 0");
  }
  require(kappa >= 0.0 && kappa < 1.0, "kappa", "must lie in [0, 1)");
  require(beta >= 0.0 && beta < 1.0, "beta", "must lie in [0, 1)");
  for (auto [name, v] : {std::pair{"n_s", n_s}, {"n_r", n_r}, {"m_r", m_r}, {"m_d", m_d},
                         {"train_len", train_len}}) {
    require(v >= 1, name, "must be >= 1");
  }
}

PilotMatrix::PilotMatrix(int antennas, int blocks) : antennas_(antennas), blocks_(blocks) {
  if (antennas < 1 || blocks < 1) {
    throw std::invalid_argument("PilotMatrix: antennas and blocks must be >= 1");
  }
  // sqrt(2) times the unitary DFT, tiled over the T blocks.
  const double scale = std::sqrt(2.0 / antennas);
  CMatrix block(antennas, antennas);
  for (int n = 0; n < antennas; ++n) {
    for (int k = 0; k < antennas; ++k) {
      const double phase = -2.0 * std::numbers::pi * n * k / antennas;
      block(n, k) = scale * Complex(std::cos(phase), std::sin(phase));
    }
  }
  x_.resize(antennas, static_cast<Eigen::Index>(antennas) * blocks);
  for (int b = 0; b < blocks; ++b) x_.middleCols(b * antennas, antennas) = block;
}

PilotMatrix build_pilot(int n, int t) { return PilotMatrix(n, t); }

ChannelSet draw_channels(const SystemParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed, {0x6368616eULL});
  ChannelSet ch;
  ch.h_sr = rng.complex_normal_matrix(params.m_r, params.n_s);
  ch.h_rr = rng.complex_normal_matrix(params.m_r, params.n_r);
  ch.h_rd = rng.complex_normal_matrix(params.m_d, params.n_r);
  ch.h_sd = rng.complex_normal_matrix(params.m_d, params.n_s);
  return ch;
}

CMatrix transmitter_noise_cov(const CMatrix& q, double kappa) {
  require_hermitian_psd(q, "transmitter_noise_cov");
  if (kappa < 0.0) throw std::invalid_argument("transmitter_noise_cov: kappa < 0");
  return kappa * diag_part(hermitize(q));
}

CMatrix receiver_distortion_cov(const CMatrix& phi, double beta) {
  require_hermitian_psd(phi, "receiver_distortion_cov");
  if (beta < 0.0) throw std::invalid_argument("receiver_distortion_cov: beta < 0");
  return beta * diag_part(hermitize(phi));
}

CVector draw_transmitter_noise(const CMatrix& q, double kappa, Rng& rng) {
  const CMatrix cov = transmitter_noise_cov(q, kappa);
  CVector c(cov.rows());
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.complex_normal(cov(i, i).real());
  return c;
}

CVector draw_receiver_distortion(const CMatrix& phi, double beta, Rng& rng) {
  const CMatrix cov = receiver_distortion_cov(phi, beta);
  CVector e(cov.rows());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = rng.complex_normal(cov(i, i).real());
  return e;
}

CMatrix simulate_training(const CMatrix& h, double alpha, const PilotMatrix& pilot, double kappa,
                          double beta, Rng& rng, bool include_awgn) {
  if (h.cols() != pilot.antennas()) {
    throw std::invalid_argument("simulate_training: channel columns != pilot antennas");
  }
  const Eigen::Index m = h.rows();
  const Eigen::Index len = pilot.x().cols();
  const double amp = std::sqrt(alpha);

  const CMatrix q_pilot = pilot_correlation(pilot);
  const RVector c_std = (kappa * q_pilot.diagonal().real()).cwiseSqrt();
  const CMatrix phi = hermitize(alpha * h * (q_pilot + kappa * diag_part(q_pilot)) * h.adjoint() +
                                CMatrix::Identity(m, m));
  const RVector e_std = (beta * phi.diagonal().real()).cwiseSqrt();

  CMatrix y = amp * h * pilot.x();
  for (Eigen::Index t = 0; t < len; ++t) {
    if (kappa > 0.0) {
      CVector c(h.cols());
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = c_std(i) * rng.complex_normal();
      y.col(t) += amp * h * c;
    }
    if (include_awgn) {
      for (Eigen::Index i = 0; i < m; ++i) y(i, t) += rng.complex_normal();
    }
    if (beta > 0.0) {
      for (Eigen::Index i = 0; i < m; ++i) y(i, t) += e_std(i) * rng.complex_normal();
    }
  }
  return y;
}

CMatrix simulate_training(const CMatrix& h, double alpha, const PilotMatrix& pilot, double kappa,
                          double beta, std::uint64_t seed, bool include_awgn) {
  Rng rng(seed);
  return simulate_training(h, alpha, pilot, kappa, beta, rng, include_awgn);
}

CMatrix ls_estimate(const CMatrix& y, const PilotMatrix& pilot, double alpha) {
  if (y.cols() != pilot.x().cols()) {
    throw std::invalid_argument("ls_estimate: observation length " + std::to_string(y.cols()) +
                                " != pilot length " + std::to_string(pilot.x().cols()));
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("ls_estimate: alpha must be > 0");
  return y * pilot.x().adjoint() / (2.0 * pilot.blocks() * std::sqrt(alpha));
}

CMatrix estimation_error_cov(const CMatrix& h, double alpha, double kappa, double beta, int n, int t,
                             ErrorCovForm form) {
  const Eigen::Index m = h.rows();
  const CMatrix hh = h * h.adjoint();
  const CMatrix eye = CMatrix::Identity(m, m);
  CMatrix d;
  if (form == ErrorCovForm::kExact) {
    d = (1.0 + beta) * eye + alpha * (2.0 * kappa / n) * hh +
        alpha * (2.0 * beta / n) * (1.0 + kappa) * diag_part(hh);
  } else {
    d = eye + alpha * (2.0 * kappa / n) * hh + alpha * (2.0 * beta / n) * diag_part(hh);
  }
  return hermitize(d / (2.0 * t));
}

CMatrix conditional_error_cov(const CMatrix& h_hat, double alpha, double kappa, double beta, int n,
                              int t) {
  return estimation_error_cov(h_hat, alpha, kappa, beta, n, t, ErrorCovForm::kApproximate);
}

LinkEstimate estimate_link(const CMatrix& h, double alpha, const PilotMatrix& pilot, double kappa,
                           double beta, Rng& rng) {
  LinkEstimate est;
  est.alpha = alpha;
  if (alpha > 0.0) {
    const CMatrix y = simulate_training(h, alpha, pilot, kappa, beta, rng);
    est.h_hat = ls_estimate(y, pilot, alpha);
    est.d_hat =
        conditional_error_cov(est.h_hat, alpha, kappa, beta, pilot.antennas(), pilot.blocks());
  } else {
    // A zero-gain link is known to be absent: nothing to estimate, no error.
    est.h_hat = CMatrix::Zero(h.rows(), h.cols());
    est.d_hat = CMatrix::Zero(h.rows(), h.rows());
  }
  return est;
}

}  // namespace fdrelay
