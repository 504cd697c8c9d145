#include "slds/learning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slds/errors.hpp"
#include "slds/rng.hpp"

namespace slds {

namespace {

void check_fit_config(const FitConfig& cfg) {
  if (cfg.l < 1) throw InputError("FitConfig: l must be positive");
  if (cfg.beta < 0.0) throw InputError("FitConfig: beta must be >= 0");
  if (cfg.em_max_iter < 1 || cfg.prox_max_iter < 1) {
    throw InputError("FitConfig: iteration limits must be positive");
  }
  if (!(cfg.em_tol > 0.0) || !(cfg.prox_tol > 0.0) || !(cfg.jitter > 0.0)) {
    throw InputError("FitConfig: tolerances must be positive");
  }
}

void check_training_set(const std::vector<ObservationSequence>& sequences) {
  if (sequences.empty()) throw InputError("training set is empty");
  const Eigen::Index d = sequences.front().dim();
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (sequences[i].dim() != d) {
      throw InputError("sequence " + std::to_string(i) +
                       " has mismatched observation dimension");
    }
    if (sequences[i].length() < 2) {
      throw InputError("sequence " + std::to_string(i) +
                       " has fewer than 2 observations");
    }
  }
}

double l1_norm(const Eigen::MatrixXd& A) { return A.cwiseAbs().sum(); }

// S_tail - A S_cross' - S_cross A' + A S_lag A', the expected residual
// second moment of the transition equation.
Eigen::MatrixXd transition_residual_moment(const Eigen::MatrixXd& A,
                                           const PooledStats& s) {
  return s.S_tail - A * s.S_cross.transpose() - s.S_cross * A.transpose() +
         A * s.S_lag * A.transpose();
}

}  // namespace

PooledStats pool_stats(const std::vector<SmoothedStats>& stats_list,
                       const std::vector<ObservationSequence>& sequences) {
  if (stats_list.empty() || stats_list.size() != sequences.size()) {
    throw InputError("pool_stats: stats and sequence lists must align and be nonempty");
  }
  const Eigen::Index l = stats_list.front().zhat.front().size();
  const Eigen::Index d = sequences.front().dim();

  PooledStats out;
  out.S_lag = Eigen::MatrixXd::Zero(l, l);
  out.S_cross = Eigen::MatrixXd::Zero(l, l);
  out.S_all = Eigen::MatrixXd::Zero(l, l);
  out.S_tail = Eigen::MatrixXd::Zero(l, l);
  out.S_yz = Eigen::MatrixXd::Zero(d, l);
  out.S_yy = Eigen::MatrixXd::Zero(d, d);
  out.z1_sum = Eigen::VectorXd::Zero(l);
  out.M1_sum = Eigen::MatrixXd::Zero(l, l);

  for (std::size_t i = 0; i < stats_list.size(); ++i) {
    const SmoothedStats& s = stats_list[i];
    const ObservationSequence& y = sequences[i];
    const Eigen::Index T = y.length();
    if (T < 2) throw InputError("pool_stats: sequences must have T >= 2");
    if (static_cast<Eigen::Index>(s.zhat.size()) != T ||
        static_cast<Eigen::Index>(s.Mcross.size()) != T - 1 ||
        y.dim() != d) {
      throw InputError("pool_stats: stats/sequence " + std::to_string(i) +
                       " misaligned");
    }
    for (Eigen::Index t = 0; t < T; ++t) {
      out.S_all += s.M[t];
      out.S_yz += y.values.row(t).transpose() * s.zhat[t].transpose();
      out.S_yy += y.values.row(t).transpose() * y.values.row(t);
      if (t > 0) {
        out.S_lag += s.M[t - 1];
        out.S_tail += s.M[t];
        out.S_cross += s.Mcross[t - 1];
      }
    }
    out.z1_sum += s.zhat[0];
    out.M1_sum += s.M[0];
    out.N += 1;
    out.T_total += T;
  }
  return out;
}

ClosedFormUpdates closed_form_updates(const PooledStats& s,
                                      const Eigen::MatrixXd& A_for_Q,
                                      double jitter) {
  ClosedFormUpdates u;
  const SpdSolver s_all(s.S_all, jitter, "S_all");
  u.C = s_all.solve(s.S_yz.transpose()).transpose();
  u.R = psd_floor((s.S_yy - u.C * s.S_yz.transpose()) /
                      static_cast<double>(s.T_total),
                  jitter);
  u.Q = psd_floor((s.S_tail - A_for_Q * s.S_cross.transpose()) /
                      static_cast<double>(s.T_total - s.N),
                  jitter);
  u.pi1 = s.z1_sum / static_cast<double>(s.N);
  u.V1 = psd_floor(s.M1_sum / static_cast<double>(s.N) - u.pi1 * u.pi1.transpose(),
                   jitter);
  return u;
}

Eigen::MatrixXd closed_form_transition(const PooledStats& s, double jitter) {
  const SpdSolver s_lag(s.S_lag, jitter, "S_lag");
  return s_lag.solve(s.S_cross.transpose()).transpose();
}

Eigen::MatrixXd transition_gradient(const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& Q,
                                    const PooledStats& s, double jitter) {
  const SpdSolver q(Q, jitter, "Q");
  return q.solve(A * s.S_lag - s.S_cross);
}

double lipschitz_step_size(const Eigen::MatrixXd& Q, const PooledStats& s,
                           double jitter) {
  const double lag_norm = s.S_lag.norm();
  if (lag_norm == 0.0) {
    throw InputError("lipschitz_step_size: S_lag is zero, step undefined");
  }
  const SpdSolver q(Q, jitter, "Q");
  return 1.0 / (q.inverse().norm() * lag_norm);
}

Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& A, double tau) {
  if (tau < 0.0) throw InputError("soft_threshold: tau must be >= 0");
  return A.unaryExpr([tau](double a) {
    if (a > tau) return a - tau;
    if (a < -tau) return a + tau;
    return 0.0;
  });
}

double transition_objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                            const PooledStats& s, double beta, double jitter) {
  const SpdSolver q(Q, jitter, "Q");
  return 0.5 * q.solve(transition_residual_moment(A, s)).trace() +
         beta * l1_norm(A);
}

ProxResult prox_gradient_transition(const Eigen::MatrixXd& A0,
                                    const Eigen::MatrixXd& Q,
                                    const PooledStats& s, double beta,
                                    const FitConfig& cfg) {
  if (beta < 0.0) throw InputError("prox_gradient_transition: beta must be >= 0");
  const SpdSolver q(Q, cfg.jitter, "Q");
  const Eigen::MatrixXd Q_inv = q.inverse();  // constant within the M-step

  const double lag_norm = s.S_lag.norm();
  if (lag_norm == 0.0) {
    throw InputError("prox_gradient_transition: S_lag is zero, step undefined");
  }
  const double step = 1.0 / (Q_inv.norm() * lag_norm);

  const auto objective = [&](const Eigen::MatrixXd& A) {
    return 0.5 * (Q_inv * transition_residual_moment(A, s)).trace() +
           beta * l1_norm(A);
  };

  ProxResult out;
  out.A = A0;
  out.f_trace.push_back(objective(out.A));
  for (int k = 0; k < cfg.prox_max_iter; ++k) {
    const Eigen::MatrixXd grad = Q_inv * (out.A * s.S_lag - s.S_cross);
    const Eigen::MatrixXd next = soft_threshold(out.A - step * grad, beta * step);
    const double rel_change = (next - out.A).norm() / (1.0 + out.A.norm());
    out.A = next;
    out.f_trace.push_back(objective(out.A));
    if (rel_change < cfg.prox_tol) break;
  }
  return out;
}

ModelParams init_params(const std::vector<ObservationSequence>& sequences,
                        int l, std::uint64_t seed) {
  check_training_set(sequences);
  if (l < 1) throw InputError("init_params: l must be positive");

  Eigen::Index n = 0;
  const Eigen::Index d = sequences.front().dim();
  for (const auto& s : sequences) n += s.length();
  if (n < l) throw InputError("init_params: fewer pooled observations than hidden states");

  Eigen::MatrixXd X(n, d);
  Eigen::Index row = 0;
  for (const auto& s : sequences) {
    X.middleRows(row, s.length()) = s.values;
    row += s.length();
  }
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd Xc = X.rowwise() - mean;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xc, Eigen::ComputeThinV);
  const Eigen::Index k = std::min<Eigen::Index>(l, svd.matrixV().cols());

  ModelParams p;
  p.C = Eigen::MatrixXd::Zero(d, l);
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::VectorXd dir = svd.matrixV().col(j);
    // Sign convention: largest-magnitude entry positive.
    Eigen::Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir[arg] < 0.0) dir = -dir;
    p.C.col(j) = dir * (svd.singularValues()[j] / std::sqrt(double(n)));
  }
  if (k < l) {
    // More hidden states than observed directions: seed the remaining
    // emission columns with small random loadings so those states couple to
    // the data instead of staying permanently dead under the EM updates.
    Rng rng(mix_seed(seed, 0x1717));
    const double scale =
        std::sqrt(Xc.squaredNorm() / double(n * d)) / std::sqrt(double(l));
    for (Eigen::Index j = k; j < l; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) p.C(i, j) = scale * rng.normal();
    }
  }

  p.A = 0.5 * Eigen::MatrixXd::Identity(l, l);
  p.Q = Eigen::MatrixXd::Identity(l, l);
  p.V1 = Eigen::MatrixXd::Identity(l, l);

  // Residual variance per dimension after projecting onto the retained
  // principal subspace, floored at 1e-6.
  const Eigen::MatrixXd W = svd.matrixV().leftCols(k);
  const Eigen::MatrixXd resid = Xc - Xc * W * W.transpose();
  p.R = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    p.R(j, j) = std::max(resid.col(j).squaredNorm() / double(n), 1e-6);
  }

  Eigen::VectorXd first_mean = Eigen::VectorXd::Zero(d);
  for (const auto& s : sequences) first_mean += s.values.row(0).transpose();
  first_mean /= double(sequences.size());
  p.pi1 = p.C.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(first_mean);
  return p;
}

namespace {

std::pair<ModelParams, FitDiagnostics> em_loop(
    const std::vector<ObservationSequence>& sequences, const FitConfig& cfg,
    bool use_prox) {
  check_fit_config(cfg);
  check_training_set(sequences);

  ModelParams params = init_params(sequences, cfg.l, cfg.seed);
  FitDiagnostics diag;
  double prev_obj = 0.0;

  for (int iter = 1; iter <= cfg.em_max_iter; ++iter) {
    try {
      // E-step, sequence by sequence in index order so the pooled sums are
      // bit-reproducible.
      double ll = 0.0;
      std::vector<SmoothedStats> stats_list;
      stats_list.reserve(sequences.size());
      for (const auto& seq : sequences) {
        const FilterResult filt = kalman_filter(params, seq, cfg.jitter);
        ll += filt.log_likelihood;
        stats_list.push_back(rts_smooth(params, filt, cfg.jitter));
      }
      const PooledStats stats = pool_stats(stats_list, sequences);

      const double obj =
          cfg.beta > 0.0 ? ll - cfg.beta * params.A.cwiseAbs().sum() : ll;
      diag.objective_trace.push_back(obj);
      if (cfg.record_params_trace) diag.params_trace.push_back(params);
      diag.iterations_run = iter;

      if (iter >= 2) {
        if (obj - prev_obj < -1e-8 * (1.0 + std::abs(prev_obj))) {
          diag.monotonicity_breaches.push_back(iter);
        }
        if (std::abs(obj - prev_obj) / (1.0 + std::abs(obj)) < cfg.em_tol) {
          diag.converged = true;
          break;
        }
      }
      prev_obj = obj;

      // M-step. The maximum-likelihood A feeds the Q update, then the prox
      // loop refines A against the freshly updated Q.
      const Eigen::MatrixXd A_ml = closed_form_transition(stats, cfg.jitter);
      const ClosedFormUpdates upd = closed_form_updates(stats, A_ml, cfg.jitter);
      if (use_prox) {
        ProxResult prox =
            prox_gradient_transition(A_ml, upd.Q, stats, cfg.beta, cfg);
        params.A = std::move(prox.A);
        diag.prox_f_traces.push_back(std::move(prox.f_trace));
      } else {
        params.A = A_ml;
      }
      params.C = upd.C;
      params.Q = upd.Q;
      params.R = upd.R;
      params.pi1 = upd.pi1;
      params.V1 = upd.V1;
    } catch (const NumericalError& e) {
      throw NumericalError("EM iteration " + std::to_string(iter) + ": " +
                           e.what());
    }
  }

  const Eigen::Index l2 = params.A.size();
  diag.zero_fraction_A =
      double((params.A.cwiseAbs().array() < 1e-12).count()) / double(l2);
  return {std::move(params), std::move(diag)};
}

}  // namespace

std::pair<ModelParams, FitDiagnostics> em_fit(
    const std::vector<ObservationSequence>& sequences, const FitConfig& cfg) {
  return em_loop(sequences, cfg, /*use_prox=*/true);
}

std::pair<ModelParams, FitDiagnostics> olds_em_reference(
    const std::vector<ObservationSequence>& sequences, const FitConfig& cfg) {
  if (cfg.beta != 0.0) {
    throw InputError("olds_em_reference: beta must be 0");
  }
  return em_loop(sequences, cfg, /*use_prox=*/false);
}

}  // namespace slds
