#pragma once

// Closed-form rate approximation for a relay with N transmit and M receive
// antennas per node, eta_d = 0 and tau = 1/2, and the full/half-duplex
// regime boundaries it implies.

#include "fdrelay/rates.hpp"

#include <string_view>

namespace fdrelay {

struct RegimeParams {
  int n = 3;
  int m = 4;
  double rho_r = 1.0;
  double rho_d = 1.0;
  double eta_r = 0.0;
  double kappa = 0.0;
  double beta = 0.0;

  int r() const { return n < m ? n : m; }
  /// R / (M (kappa + beta)); +inf without distortion.
  double theta() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class DuplexMode { kFull, kHalf };
std::string_view to_string(DuplexMode mode);

struct ApproxRate {
  double rate = 0.0;  ///< bpcu
  DuplexMode mode = DuplexMode::kFull;
};

/// Rate of the schedule (I/N, I/N, I/N, I/N).
double approx_rate_fd(const RegimeParams& p);
/// Rate of the schedule (2I/N, 0, 0, 2I/N); does not depend on eta_r.
double approx_rate_hd(const RegimeParams& p);
/// Larger of the two; ties count as full duplex.
ApproxRate approx_rate(const RegimeParams& p);

/// INR below which full duplex is always used; +inf without distortion,
/// 0 when rho_r <= rho_d.
double eta_critical(const RegimeParams& p);

/// INR at which approx_rate switches from full to half duplex.
double duplex_boundary(const RegimeParams& p);

/// Lower-bound rate of `sched` on the diagonal channel used by the
/// approximation (gains sqrt(NM/R), exact estimates, no direct link).
double diagonal_channel_rate(const RegimeParams& p, const CovarianceSchedule& sched);
CovarianceSchedule full_duplex_schedule(int n);
CovarianceSchedule half_duplex_schedule(int n);

}  // namespace fdrelay
