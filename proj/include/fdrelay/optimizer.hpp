#pragma once

// Transmit-covariance optimization of the relay rate lower bound.
//
// The max-min problem over the two hops is handled by bisection on a weight
// zeta of the weighted sum  zeta * I_sr + (1 - zeta) * I_rd ; each weighted
// problem is solved by gradient projection with an Armijo step rule, the
// projection being a tau-weighted water-filling of the eigenvalues. The
// outermost loop is a grid search over the time share tau.

#include "fdrelay/rates.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fdrelay {

struct GpConfig {
  double sigma = 0.01;       ///< Armijo sufficient-increase fraction
  double nu = 0.2;           ///< Armijo backtracking factor
  double eps_stop = 0.01;    ///< stop when no covariance entry moves more than this
  int max_outer_iters = 200;
  double s_step = 1.0;       ///< gradient stepsize inside the projection
  int max_armijo_steps = 40;
  double bisect_tol = 1e-2;  ///< |I_rd - I_sr| threshold in bpcu
  int bisect_max_iters = 30;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class Scheme {
  kTco2Ic,  ///< two periods, self-interference cancellation
  kTco2,    ///< two periods, no cancellation
  kTco1Ic,  ///< one shared covariance per node, cancellation
  kOhd,     ///< optimized half duplex
  kNfd,     ///< naive full duplex: half-duplex covariances reused in both periods
};

std::string_view to_string(Scheme s);
/// Accepts the canonical names ("TCO_2_IC", "TCO-2-IC", "tco2ic", ...).
std::optional<Scheme> scheme_from_string(std::string_view name);

/// Shape restrictions imposed on a schedule during optimization.
enum class Structure {
  kFree,        ///< both periods independent
  kTied,        ///< Q[0] = Q[1] for each node
  kHalfDuplex,  ///< source silent in period 1, relay silent in period 0
};

/// One block update of the gradient-projection loop.
struct GpStep {
  int outer = 0;
  char block = 'r';           ///< 'r' relay, 's' source
  double objective_before = 0.0;
  double objective_after = 0.0;
  double gamma = 0.0;         ///< accepted step (0 when no step was taken)
  int armijo_m = 0;
  double directional = 0.0;   ///< sum_l tr(G_l^H (Q~_l - Q_l))
  double budget_residual = 0.0;  ///< max(0, weighted trace - 1) after the step
  bool accepted = false;
};

struct SolveOptions {
  Structure structure = Structure::kFree;
  Cancellation ic = Cancellation::kEnabled;
  std::vector<GpStep>* log = nullptr;  ///< optional iteration log
};

/// How a bisection run was initialized.
enum class InitKind { kHalfDuplex, kNaiveFullDuplex };

struct InitOutcome {
  InitKind kind = InitKind::kHalfDuplex;
  double min_rate = 0.0;
  double zeta = 0.0;
};

struct OptResult {
  CovarianceSchedule sched;
  double zeta = 0.5;
  RateReport rate;        ///< lower bound at `sched`
  double tau_star = 0.5;
  int iterations = 0;     ///< gradient-projection outer iterations, summed
  int bisection_steps = 0;
  bool converged = false;
  std::vector<std::array<double, 2>> zeta_intervals;  ///< search interval before each step
  std::vector<InitOutcome> init_runs;
};

double weighted_sum_rate(const EstimateBundle& est, const CovarianceSchedule& sched,
                         const SystemParams& params, double zeta,
                         Cancellation ic = Cancellation::kEnabled);

/// Gradient of the weighted sum rate with respect to Q_r[l], in the
/// convention G = 2 (dI / dQ)^*.
CMatrix gradient_relay(const EstimateBundle& est, const CovarianceSchedule& sched,
                       const SystemParams& params, double zeta, std::size_t l,
                       Cancellation ic = Cancellation::kEnabled);

/// Gradient of the weighted sum rate with respect to Q_s[l].
CMatrix gradient_source(const EstimateBundle& est, const CovarianceSchedule& sched,
                        const SystemParams& params, double zeta, std::size_t l,
                        Cancellation ic = Cancellation::kEnabled);

struct Projection {
  CMatrix q1;
  CMatrix q2;
  double mu = 0.0;  ///< shared water level (0 when the budget is slack)
};

/// Projects (p1, p2) onto {Q_l >= 0, tau tr(Q_1) + (1 - tau) tr(Q_2) <= 1}:
/// Q_l = U_l (Lambda_l - mu I)^+ U_l^H with one water level mu.
Projection project_constraint(const CMatrix& p1, const CMatrix& p2, double tau);

/// Weighted water-filling over any number of Hermitian blocks. Returns the
/// projected blocks and the water level.
std::pair<std::vector<CMatrix>, double> water_fill(const std::vector<CMatrix>& blocks,
                                                   const std::vector<double>& weights);

/// Maximizes the zeta-weighted sum rate from `init` by gradient projection.
OptResult gp_optimize(const EstimateBundle& est, const SystemParams& params, double zeta,
                      double tau, const CovarianceSchedule& init, const GpConfig& cfg,
                      const SolveOptions& opts = {});

/// Bisection on zeta toward a link-equalizing design; each step runs
/// gp_optimize from `init`. Returns the step with the largest min rate.
OptResult bisect_zeta(const EstimateBundle& est, const SystemParams& params, double tau,
                      const CovarianceSchedule& init, const GpConfig& cfg,
                      const SolveOptions& opts = {});

/// Uniform half-duplex starting point: source uses period 0, relay period 1,
/// both spend the whole budget.
CovarianceSchedule half_duplex_init(const SystemParams& params, double tau);

/// Reuses the active half-duplex covariances in both periods, rescaled to
/// keep each node's weighted budget.
CovarianceSchedule naive_full_duplex(const CovarianceSchedule& half_duplex);

/// Runs `scheme` for every tau in `tau_grid` and keeps the best min rate
/// (ties go to the tau closest to 0.5).
OptResult optimize_scheme(const EstimateBundle& est, const SystemParams& params, Scheme scheme,
                          const std::vector<double>& tau_grid, const GpConfig& cfg);

}  // namespace fdrelay
