#pragma once

// Estimate-conditional aggregate-noise covariances and achievable-rate
// bounds of the two relay hops. Periods are indexed 0 and 1; period 0 lasts
// a fraction tau of the data epoch and period 1 the remaining 1 - tau.

#include "fdrelay/linalg.hpp"
#include "fdrelay/model.hpp"

#include <array>
#include <cstddef>

namespace fdrelay {

/// Transmit covariances of source and relay in both data periods.
struct CovarianceSchedule {
  std::array<CMatrix, 2> q_s;  ///< n_s x n_s each
  std::array<CMatrix, 2> q_r;  ///< n_r x n_r each
  double tau = 0.5;

  /// Duration weight of period l: tau for l = 0, 1 - tau for l = 1.
  double weight(std::size_t l) const { return l == 0 ? tau : 1.0 - tau; }

  /// Sum over periods of weight * trace, for the source and the relay.
  double source_budget() const;
  double relay_budget() const;

  static CovarianceSchedule zeros(int n_s, int n_r, double tau);

  /// Throws std::invalid_argument unless every Q is Hermitian PSD and both
  /// weighted traces are at most 1 + tol.
  void validate(double tol = 1e-9) const;
};

/// One estimate per link; alphas are (rho_r, eta_r, rho_d, eta_d).
struct EstimateBundle {
  LinkEstimate sr;
  LinkEstimate rr;
  LinkEstimate rd;
  LinkEstimate sd;

  /// Same estimates with every error covariance set to zero.
  EstimateBundle perfect_csi() const;
};

/// Trains all four links of `channels` with T = params.train_len pilot blocks.
EstimateBundle estimate_links(const ChannelSet& channels, const SystemParams& params, Rng& rng);

enum class BoundKind { kLower, kUpper };

/// Whether the relay subtracts its known self-interference.
enum class Cancellation { kEnabled, kDisabled };

struct RateReport {
  std::array<double, 2> i_sr{};  ///< bpcu per period
  std::array<double, 2> i_rd{};
  double i_end = 0.0;  ///< min of the tau-weighted hop rates
  double sr_sum = 0.0;  ///< tau-weighted source-to-relay rate
  double rd_sum = 0.0;  ///< tau-weighted relay-to-destination rate
  BoundKind bound_kind = BoundKind::kLower;
};

/// Covariance of the relay's aggregate noise after cancellation in period l.
/// With cancellation disabled the known self-interference
/// eta_r H_rr Q_r H_rr^H stays in the noise.
CMatrix noise_cov_relay(const EstimateBundle& est, const CovarianceSchedule& sched,
                        const SystemParams& params, std::size_t l,
                        Cancellation ic = Cancellation::kEnabled);

/// Covariance of the destination's aggregate noise in period l. The
/// source-to-destination interference is not cancelled.
CMatrix noise_cov_dest(const EstimateBundle& est, const CovarianceSchedule& sched,
                       const SystemParams& params, std::size_t l);

/// log2 det(S_r) - log2 det(Sigma_r) with S_r = rho_r H_sr Q_s H_sr^H + Sigma_r.
double rate_sr(const EstimateBundle& est, const CovarianceSchedule& sched,
               const SystemParams& params, std::size_t l, Cancellation ic = Cancellation::kEnabled);

/// log2 det(S_d) - log2 det(Sigma_d) with S_d = rho_d H_rd Q_r H_rd^H + Sigma_d.
double rate_rd(const EstimateBundle& est, const CovarianceSchedule& sched,
               const SystemParams& params, std::size_t l);

/// Per-period hop rates and the end-to-end rate. kUpper evaluates with all
/// error covariances forced to zero.
RateReport end_to_end_rate(const EstimateBundle& est, const CovarianceSchedule& sched,
                           const SystemParams& params, BoundKind bound = BoundKind::kLower,
                           Cancellation ic = Cancellation::kEnabled);

}  // namespace fdrelay
