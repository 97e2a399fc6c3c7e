#pragma once

// Channel, hardware-impairment and channel-estimation model of a
// decode-and-forward full-duplex MIMO relay link budget.
//
// Power quantities are linear ratios. The transmitter adds independent
// Gaussian noise with covariance kappa * diag(Q) to the intended signal of
// covariance Q, and the receiver adds independent Gaussian distortion with
// covariance beta * diag(Phi) where Phi is the covariance of the undistorted
// receive vector.

#include "fdrelay/linalg.hpp"
#include "fdrelay/random.hpp"

#include <cstdint>

namespace fdrelay {

struct SystemParams {
  double rho_r = 1.0;  ///< SNR at the relay
  double rho_d = 1.0;  ///< SNR at the destination
  double eta_r = 0.0;  ///< relay self-interference INR
  double eta_d = 0.0;  ///< source-to-destination INR
  double kappa = 0.0;  ///< transmitter-noise fraction
  double beta = 0.0;   ///< receiver-distortion fraction
  int n_s = 1;         ///< source transmit antennas
  int n_r = 1;         ///< relay transmit antennas
  int m_r = 1;         ///< relay receive antennas
  int m_d = 1;         ///< destination receive antennas
  int train_len = 1;   ///< pilot blocks per training period

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// True propagation matrices.
struct ChannelSet {
  CMatrix h_sr;  ///< m_r x n_s
  CMatrix h_rr;  ///< m_r x n_r
  CMatrix h_rd;  ///< m_d x n_r
  CMatrix h_sd;  ///< m_d x n_s
};

/// N x TN pilot block with (1 / 2T) X X^H = I.
class PilotMatrix {
 public:
  PilotMatrix(int antennas, int blocks);

  const CMatrix& x() const { return x_; }
  int antennas() const { return antennas_; }
  int blocks() const { return blocks_; }

 private:
  int antennas_;
  int blocks_;
  CMatrix x_;
};

/// Estimated channel with the covariance of its estimation error.
struct LinkEstimate {
  CMatrix h_hat;
  CMatrix d_hat;  ///< receive-side Hermitian PSD error covariance
  double alpha = 0.0;
};

/// Which of the two error-covariance expressions to evaluate.
enum class ErrorCovForm {
  kExact,        ///< keeps the beta and beta*kappa cross terms
  kApproximate,  ///< first order in kappa and beta
};

/// Four i.i.d. CN(0, 1) matrices; bitwise reproducible for a fixed seed.
ChannelSet draw_channels(const SystemParams& params, std::uint64_t seed);

/// Covariance kappa * diag(q) of the transmitter noise for intended covariance q.
CMatrix transmitter_noise_cov(const CMatrix& q, double kappa);

/// Covariance beta * diag(phi) of the receiver distortion.
CMatrix receiver_distortion_cov(const CMatrix& phi, double beta);

PilotMatrix build_pilot(int n, int t);

/// Received training block Y = sqrt(alpha) H (X + C) + N + E.
///
/// C has per-column covariance kappa * diag(XX^H / TN), N is unit AWGN and E
/// has per-column covariance beta * diag(Phi) with Phi the H-conditional
/// covariance of the undistorted receive vector. With `include_awgn` false
/// and kappa = beta = 0 the result is exactly sqrt(alpha) H X.
CMatrix simulate_training(const CMatrix& h, double alpha, const PilotMatrix& pilot, double kappa,
                          double beta, Rng& rng, bool include_awgn = true);
CMatrix simulate_training(const CMatrix& h, double alpha, const PilotMatrix& pilot, double kappa,
                          double beta, std::uint64_t seed, bool include_awgn = true);

/// Least-squares estimate: sqrt(alpha) H_hat = (1 / 2T) Y X^H.
CMatrix ls_estimate(const CMatrix& y, const PilotMatrix& pilot, double alpha);

/// H-conditional covariance of the LS error sqrt(alpha) (H_hat - H).
CMatrix estimation_error_cov(const CMatrix& h, double alpha, double kappa, double beta, int n, int t,
                             ErrorCovForm form = ErrorCovForm::kExact);

/// Estimate-conditional error covariance used by the rate expressions:
/// (1/2T) (I + alpha (2 kappa / N) H_hat H_hat^H + alpha (2 beta / N) diag(H_hat H_hat^H)).
CMatrix conditional_error_cov(const CMatrix& h_hat, double alpha, double kappa, double beta, int n,
                              int t);

/// Trains one link (simulated pilots + LS) and attaches its conditional error covariance.
LinkEstimate estimate_link(const CMatrix& h, double alpha, const PilotMatrix& pilot, double kappa,
                           double beta, Rng& rng);

/// Draws one transmitter-noise vector for intended covariance q.
CVector draw_transmitter_noise(const CMatrix& q, double kappa, Rng& rng);

/// Draws one receiver-distortion vector for undistorted covariance phi.
CVector draw_receiver_distortion(const CMatrix& phi, double beta, Rng& rng);

}  // namespace fdrelay
