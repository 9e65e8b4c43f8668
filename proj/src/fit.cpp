// Copyright 2026 The ddsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ddsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "ddsim/analytic.hpp"

namespace ddsim {

std::string_view decay_model_name(DecayModel model) {
  return model == DecayModel::GaussianEnvelope ? "gaussian" : "exponential";
}

FitError::FitError(const std::string& what, std::vector<std::string> diagnostics)
    : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

double DecayFit::evaluate(double t) const {
  const double x = t / tau_c;
  const double envelope = model == DecayModel::GaussianEnvelope ? std::exp(-x * x) : std::exp(-x);
  const double carrier = oscillating ? std::cos(frequency * t + phase) : 1.0;
  return amplitude * carrier * envelope + offset;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Problem {
  std::span<const double> t;
  std::span<const double> y;
  std::vector<double> weight;  // sqrt of the least-squares weight
  DecayModel model;
  bool oscillating;
  double log_tau_min;
  double log_tau_max;

  Eigen::Index n_params() const { return oscillating ? 5 : 3; }
  Eigen::Index log_tau_index() const { return oscillating ? 3 : 1; }
};

// Parameter vectors: [A, w, phi, log tau_c, c] or [A, log tau_c, c].
void evaluate(const Problem& pr, const VectorXd& p, VectorXd& r, MatrixXd* jac) {
  const bool osc = pr.oscillating;
  const double amp = p(0);
  const double w = osc ? p(1) : 0.0;
  const double phi = osc ? p(2) : 0.0;
  const double q = p(pr.log_tau_index());
  const double c = p(pr.n_params() - 1);
  const double tau = std::exp(q);
  const auto n = static_cast<Eigen::Index>(pr.t.size());
  r.resize(n);
  if (jac) jac->resize(n, pr.n_params());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = pr.t[i];
    const double x = t / tau;
    double env = 0.0;
    double denv_dq = 0.0;
    if (pr.model == DecayModel::GaussianEnvelope) {
      env = std::exp(-x * x);
      denv_dq = 2 * x * x * env;
    } else {
      env = std::exp(-x);
      denv_dq = x * env;
    }
    const double cu = osc ? std::cos(w * t + phi) : 1.0;
    const double su = osc ? std::sin(w * t + phi) : 0.0;
    const double sw = pr.weight[i];
    r(i) = sw * (pr.y[i] - (amp * cu * env + c));
    if (!jac) continue;
    auto row = jac->row(i);
    row(0) = sw * cu * env;
    if (osc) {
      row(1) = -sw * amp * su * t * env;
      row(2) = -sw * amp * su * env;
    }
    row(pr.log_tau_index()) = sw * amp * cu * denv_dq;
    row(pr.n_params() - 1) = sw;
  }
}

struct LmResult {
  VectorXd p;
  double ssr = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::string reason;
};

LmResult levenberg_marquardt(const Problem& pr, VectorXd p, int max_iterations) {
  LmResult out;
  VectorXd r;
  MatrixXd jac;
  evaluate(pr, p, r, &jac);
  double ssr = r.squaredNorm();
  if (!std::isfinite(ssr)) {
    out.reason = "non-finite residual at the start";
    return out;
  }
  double mu = 1e-3;
  VectorXd r_new;
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    const MatrixXd jtj = jac.transpose() * jac;
    const VectorXd grad = jac.transpose() * r;
    bool accepted = false;
    VectorXd step;
    double ssr_new = ssr;
    while (!accepted) {
      MatrixXd damped = jtj;
      for (Eigen::Index k = 0; k < damped.rows(); ++k) {
        damped(k, k) += mu * std::max(jtj(k, k), 1e-12);
      }
      step = damped.ldlt().solve(grad);
      VectorXd trial = p + step;
      const Eigen::Index iq = pr.log_tau_index();
      trial(iq) = std::clamp(trial(iq), pr.log_tau_min, pr.log_tau_max);
      step = trial - p;
      evaluate(pr, trial, r_new, nullptr);
      ssr_new = r_new.squaredNorm();
      if (std::isfinite(ssr_new) && ssr_new < ssr) {
        accepted = true;
        p = trial;
        mu = std::max(mu / 3, 1e-12);
      } else {
        mu *= 4;
        if (mu > 1e16) {
          // No downhill step left: p is a local minimum to working precision.
          out.p = p;
          out.ssr = ssr;
          out.converged = true;
          return out;
        }
      }
    }
    const double decrease = ssr - ssr_new;
    evaluate(pr, p, r, &jac);
    ssr = r.squaredNorm();
    const bool small_step = step.norm() <= 1e-12 * (p.norm() + 1e-12);
    const bool flat = decrease <= 1e-15 * ssr;
    if (small_step || flat || ssr == 0.0) {
      out.p = p;
      out.ssr = ssr;
      out.converged = true;
      return out;
    }
  }
  out.p = p;
  out.ssr = ssr;
  out.reason = "iteration limit reached";
  return out;
}

double wrap_phase(double phi) {
  phi = std::remainder(phi, 2 * kPi);
  if (phi <= -kPi) phi += 2 * kPi;
  return phi;
}

// Up to `count` frequencies at the largest local maxima of the spectrum of
// the detrended data, strongest first, each with the phase of its line.
std::vector<std::pair<double, double>> spectral_peaks(std::span<const double> t,
                                                      std::span<const double> y,
                                                      std::size_t count) {
  const std::size_t n = t.size();
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (t[i] - tm) * (y[i] - ym);
    sxx += (t[i] - tm) * (t[i] - tm);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = y[i] - ym - slope * (t[i] - tm);

  std::vector<double> gaps;
  for (std::size_t i = 1; i < n; ++i) {
    if (t[i] > t[i - 1]) gaps.push_back(t[i] - t[i - 1]);
  }
  if (gaps.empty()) return {};
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double nyquist = kPi / gaps[gaps.size() / 2];

  const std::size_t n_freq = 8 * n;
  std::vector<double> power(n_freq + 1, 0.0);
  std::vector<std::complex<double>> line(n_freq + 1);
  for (std::size_t k = 1; k <= n_freq; ++k) {
    const double w = nyquist * static_cast<double>(k) / n_freq;
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += d[i] * std::polar(1.0, -w * t[i]);
    line[k] = s;
    power[k] = std::norm(s);
  }
  std::vector<std::size_t> peaks;
  for (std::size_t k = 1; k <= n_freq; ++k) {
    const bool left = k == 1 || power[k] > power[k - 1];
    const bool right = k == n_freq || power[k] >= power[k + 1];
    if (left && right) peaks.push_back(k);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](std::size_t a, std::size_t b) { return power[a] > power[b]; });
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < std::min(count, peaks.size()); ++i) {
    const std::size_t k = peaks[i];
    out.emplace_back(nyquist * static_cast<double>(k) / n_freq, std::arg(line[k]));
  }
  return out;
}

// First time the suffix maximum of |y - c| drops below 1/e of its start.
double envelope_crossing(std::span<const double> t, std::span<const double> y, double c) {
  const std::size_t n = t.size();
  std::vector<double> suffix(n);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    running = std::max(running, std::abs(y[i] - c));
    suffix[i] = running;
  }
  const double threshold = suffix[0] / std::exp(1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (suffix[i] < threshold && t[i] > 0.0) return t[i];
  }
  return 0.0;
}

}  // namespace

DecayFit fit_decay(std::span<const double> t, std::span<const double> y,
                   const FitOptions& options, std::span<const double> sigma) {
  const std::size_t n = t.size();
  if (y.size() != n) throw std::invalid_argument("time and signal lengths differ");
  const std::size_t min_points = 6;
  if (n < min_points) {
    throw FitError("need at least 6 data points, got " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i])) {
      throw FitError("non-finite data at point " + std::to_string(i));
    }
  }
  const auto [tmin_it, tmax_it] = std::minmax_element(t.begin(), t.end());
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const double t_span = *tmax_it - *tmin_it;
  const double y_range = *ymax_it - *ymin_it;
  const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double tss = 0.0;
  for (double v : y) tss += (v - y_mean) * (v - y_mean);
  if (!(t_span > 0.0)) throw FitError("all data points share one time");
  if (!(y_range > 1e-12 * std::max(1.0, std::abs(y_mean))) || !(tss > 0.0)) {
    throw FitError("data are flat; no decay to fit");
  }

  Problem pr{t, y, std::vector<double>(n, 1.0), options.model, options.oscillating,
             std::log(1e-6 * t_span), std::log(1e6 * t_span)};
  const bool weighted = options.use_stderr_weights && sigma.size() == n &&
                        std::all_of(sigma.begin(), sigma.end(),
                                    [](double s) { return s > 0.0 && std::isfinite(s); });
  if (weighted) {
    for (std::size_t i = 0; i < n; ++i) pr.weight[i] = 1.0 / sigma[i];
  }

  // Offsets: mid-range and the mean of the last fifth of the record.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
  const std::size_t tail = std::max<std::size_t>(1, n / 5);
  double tail_mean = 0.0;
  for (std::size_t k = n - tail; k < n; ++k) tail_mean += y[order[k]];
  tail_mean /= tail;
  const double offsets[2] = {0.5 * (*ymax_it + *ymin_it), tail_mean};

  std::vector<double> ts(n);
  std::vector<double> ys(n);
  for (std::size_t k = 0; k < n; ++k) {
    ts[k] = t[order[k]];
    ys[k] = y[order[k]];
  }

  std::vector<VectorXd> starts;
  const double tau_scales[3] = {1.0, 0.5, 2.0};
  if (options.oscillating) {
    auto peaks = spectral_peaks(ts, ys, 3);
    if (peaks.empty()) peaks.emplace_back(0.0, 0.0);
    for (const auto& [w, phi] : peaks) {
      for (double c : offsets) {
        double tau0 = envelope_crossing(ts, ys, c);
        if (!(tau0 > 0.0)) tau0 = 2 * ts.back();
        for (double scale : tau_scales) {
          VectorXd p(5);
          p << 0.5 * y_range, w, phi, std::log(tau0 * scale), c;
          starts.push_back(p);
        }
      }
    }
  } else {
    for (double c : offsets) {
      double tau0 = envelope_crossing(ts, ys, c);
      if (!(tau0 > 0.0)) tau0 = 2 * ts.back();
      for (double scale : tau_scales) {
        VectorXd p(3);
        p << ys.front() - c, std::log(tau0 * scale), c;
        starts.push_back(p);
      }
    }
  }
  const std::size_t max_starts = static_cast<std::size_t>(std::max(0, options.max_restarts)) + 1;
  if (starts.size() > max_starts) starts.resize(max_starts);

  LmResult best;
  std::vector<std::string> diagnostics;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    VectorXd p0 = starts[s];
    const Eigen::Index iq = pr.log_tau_index();
    p0(iq) = std::clamp(p0(iq), pr.log_tau_min, pr.log_tau_max);
    LmResult res = levenberg_marquardt(pr, p0, options.max_iterations);
    if (!res.converged) {
      diagnostics.push_back("start " + std::to_string(s) + ": " + res.reason + ", ssr " +
                            format_number(res.ssr));
      continue;
    }
    if (res.ssr < best.ssr) best = std::move(res);
  }
  if (!best.converged) {
    throw FitError("no start converged after " + std::to_string(starts.size()) + " attempts",
                   diagnostics);
  }

  VectorXd r;
  MatrixXd jac;
  evaluate(pr, best.p, r, &jac);
  const auto n_params = pr.n_params();
  const double dof = static_cast<double>(n) - static_cast<double>(n_params);
  const double s2 = dof > 0 ? best.ssr / dof : 0.0;
  Eigen::FullPivLU<MatrixXd> lu(jac.transpose() * jac);
  const Eigen::Index iq = pr.log_tau_index();
  double log_tau_var = std::numeric_limits<double>::quiet_NaN();
  if (lu.isInvertible()) log_tau_var = s2 * lu.inverse()(iq, iq);

  DecayFit fit;
  fit.model = options.model;
  fit.oscillating = options.oscillating;
  fit.amplitude = best.p(0);
  fit.tau_c = std::exp(best.p(iq));
  fit.tau_c_err = fit.tau_c * std::sqrt(std::max(0.0, log_tau_var));
  if (std::isnan(log_tau_var)) fit.tau_c_err = log_tau_var;
  fit.offset = best.p(n_params - 1);
  if (options.oscillating) {
    double w = best.p(1);
    double phi = best.p(2);
    if (w < 0) {
      w = -w;
      phi = -phi;
    }
    if (fit.amplitude < 0) {
      fit.amplitude = -fit.amplitude;
      phi += kPi;
    }
    fit.frequency = w;
    fit.phase = wrap_phase(phi);
  }
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - fit.evaluate(t[i]);
    ssr += e * e;
  }
  fit.residual_norm = ssr / tss;
  fit.n_points = n;
  fit.iterations = best.iterations;
  fit.starts_tried = static_cast<int>(starts.size());
  if (!std::isfinite(fit.tau_c) || !(fit.tau_c > 0.0)) {
    throw FitError("fit produced a non-positive decay constant", diagnostics);
  }
  return fit;
}

DecayFit fit_decay(const SignalCurve& curve, const FitOptions& options) {
  return fit_decay(curve.taus, curve.means, options,
                   curve.has_errors() ? std::span<const double>(curve.stderrs)
                                      : std::span<const double>());
}

SignalCurve with_total_time(const SignalCurve& curve, SequenceKind kind) {
  SignalCurve out = curve;
  for (double& t : out.taus) t = total_free_time(kind, t);
  return out;
}

}  // namespace ddsim
