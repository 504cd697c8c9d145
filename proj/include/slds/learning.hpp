#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "slds/inference.hpp"
#include "slds/lds.hpp"

namespace slds {

// Sufficient statistics summed over time and over training sequences; the
// sole input to the M-step. With per-sequence smoothed moments these are
//   S_lag   = sum_i sum_{t=2..T_i} M_{t-1|T}       (l x l)
//   S_cross = sum_i sum_{t=2..T_i} M_{t,t-1|T}     (l x l)
//   S_all   = sum_i sum_{t=1..T_i} M_{t|T}         (l x l)
//   S_tail  = sum_i sum_{t=2..T_i} M_{t|T}         (l x l)
//   S_yz    = sum_i sum_{t=1..T_i} y_t zhat_t'     (d x l)
//   S_yy    = sum_i sum_{t=1..T_i} y_t y_t'        (d x d)
//   z1_sum  = sum_i zhat_{1|T},  M1_sum = sum_i M_{1|T}
struct PooledStats {
  Eigen::MatrixXd S_lag, S_cross, S_all, S_tail;
  Eigen::MatrixXd S_yz;
  Eigen::MatrixXd S_yy;
  Eigen::VectorXd z1_sum;
  Eigen::MatrixXd M1_sum;
  int N = 0;
  long long T_total = 0;
};

struct FitConfig {
  int l = 1;               // hidden dimension
  double beta = 0.0;       // Laplacian prior scale; 0 trains an ordinary LDS
  int em_max_iter = 200;
  double em_tol = 1e-6;    // relative change of the penalized objective
  int prox_max_iter = 500;
  double prox_tol = 1e-8;  // relative Frobenius change of A per prox step
  double jitter = 1e-9;
  std::uint64_t seed = 0;
  bool record_params_trace = false;
};

struct FitDiagnostics {
  // Penalized log posterior (log likelihood - beta*||A||_1, prior
  // normalization constant excluded) per EM iteration, evaluated under the
  // parameters entering that iteration's E-step.
  std::vector<double> objective_trace;
  // One f(A) trace per M-step prox run.
  std::vector<std::vector<double>> prox_f_traces;
  int iterations_run = 0;
  bool converged = false;
  double zero_fraction_A = 0.0;  // fraction of |A_ij| < 1e-12 in the final A
  // EM iterations (1-based) whose objective fell by more than
  // 1e-8 * (1 + |previous|). Surfaced, never silently accepted.
  std::vector<int> monotonicity_breaches;
  // Parameter sequence per EM iteration, recorded when
  // FitConfig::record_params_trace is set.
  std::vector<ModelParams> params_trace;
};

struct ClosedFormUpdates {
  Eigen::MatrixXd C, R, Q, V1;
  Eigen::VectorXd pi1;
};

struct ProxResult {
  Eigen::MatrixXd A;
  std::vector<double> f_trace;  // f(A) per iterate, starting at the initial A
};

// Exact sums over the aligned (stats, sequence) lists; no normalization.
PooledStats pool_stats(const std::vector<SmoothedStats>& stats_list,
                       const std::vector<ObservationSequence>& sequences);

// Stationary-point updates for everything except A:
//   C  = S_yz S_all^{-1}
//   R  = (S_yy - C S_yz') / T_total
//   Q  = (S_tail - A_for_Q S_cross') / (T_total - N)
//   pi1 = z1_sum / N,  V1 = M1_sum / N - pi1 pi1'
// R, Q, V1 are symmetrized and eigenvalue-floored at `jitter`.
ClosedFormUpdates closed_form_updates(const PooledStats& stats,
                                      const Eigen::MatrixXd& A_for_Q,
                                      double jitter = kDefaultJitter);

// Maximum-likelihood transition update A = S_cross S_lag^{-1}; also the
// initial iterate of the prox loop.
Eigen::MatrixXd closed_form_transition(const PooledStats& stats,
                                       double jitter = kDefaultJitter);

// Gradient of the smooth quadratic part of the transition objective:
// Q^{-1} (A S_lag - S_cross).
Eigen::MatrixXd transition_gradient(const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& Q,
                                    const PooledStats& stats,
                                    double jitter = kDefaultJitter);

// Fixed step size 1 / (||Q^{-1}||_F * ||S_lag||_F), the reciprocal of the
// Lipschitz bound on the gradient above.
double lipschitz_step_size(const Eigen::MatrixXd& Q, const PooledStats& stats,
                           double jitter = kDefaultJitter);

// Elementwise shrink-toward-zero; the proximal map of tau*||.||_1.
Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& A, double tau);

// f(A) = 1/2 tr(Q^{-1} (S_tail - A S_cross' - S_cross A' + A S_lag A'))
//        + beta * ||A||_1
double transition_objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                            const PooledStats& stats, double beta,
                            double jitter = kDefaultJitter);

// Proximal gradient descent on the transition objective with the fixed step
// above: A <- soft_threshold(A - step * grad, beta * step) until the relative
// Frobenius change drops below cfg.prox_tol or cfg.prox_max_iter is hit.
// The returned f_trace is non-increasing.
ProxResult prox_gradient_transition(const Eigen::MatrixXd& A0,
                                    const Eigen::MatrixXd& Q,
                                    const PooledStats& stats, double beta,
                                    const FitConfig& cfg);

// Deterministic initialization: emission from the principal directions of
// the pooled mean-centered observations, A = 0.5 I, Q = V1 = I, diagonal
// residual R, pi1 from a least-squares fit of the mean first observation.
ModelParams init_params(const std::vector<ObservationSequence>& sequences,
                        int l, std::uint64_t seed);

// MAP EM. E-step: kalman_filter + rts_smooth per sequence, pooled. M-step:
// closed-form updates (Q uses the maximum-likelihood A), then the prox loop
// for the final A. beta = 0 drops the prior term, making this ordinary
// maximum-likelihood EM. Numerical failures carry the EM iteration index.
std::pair<ModelParams, FitDiagnostics> em_fit(
    const std::vector<ObservationSequence>& sequences, const FitConfig& cfg);

// Ordinary-LDS reference path: identical EM loop but A taken directly from
// the closed-form update, no prox loop. Used as the internal oracle for the
// beta = 0 equivalence checks; cfg.beta must be 0.
std::pair<ModelParams, FitDiagnostics> olds_em_reference(
    const std::vector<ObservationSequence>& sequences, const FitConfig& cfg);

}  // namespace slds
