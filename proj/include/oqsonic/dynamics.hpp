// Copyright 2026 The oqsonic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Time evolution of a LindbladModel.
//
// Two routes are provided:
//   * integrate_lindblad: fixed-step RK4 on the master equation
//       drho/dt = -(i/hbar)[H, rho] + (1/hbar) sum_k (L rho L^+ - {L^+ L, rho}/2)
//   * run_ensemble: Euler-Maruyama on the diffusive stochastic Schroedinger
//     equation, averaged over independently seeded trajectories.
// Both return a StateTrajectory sampled every `frame_stride` steps.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oqsonic/models.hpp"
#include "oqsonic/operators.hpp"
#include "oqsonic/parallel.hpp"

namespace oqs {

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  double dt = 1e-3;
  std::int64_t frame_stride = 1;

  void validate() const {
    if (!(t_end > t_start)) throw InvalidParameter("t_end must exceed t_start");
    if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
    if (frame_stride < 1) throw InvalidParameter("frame_stride must be >= 1");
    if (steps() < 1) throw InvalidParameter("time span shorter than one step");
  }

  // Number of whole steps; spans within 1e-9 of a multiple of dt round up.
  std::int64_t steps() const {
    const double n = (t_end - t_start) / dt;
    return static_cast<std::int64_t>(std::floor(n + 1e-9));
  }
  std::int64_t frame_count() const { return steps() / frame_stride + 1; }
  double time_at_step(std::int64_t k) const { return t_start + static_cast<double>(k) * dt; }
  double frame_spacing() const { return dt * static_cast<double>(frame_stride); }
};

struct StateTrajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> frames;

  std::size_t size() const noexcept { return frames.size(); }
  bool empty() const noexcept { return frames.empty(); }
  Index dim() const { return frames.empty() ? 0 : frames.front().dim(); }

  void push(double t, DensityMatrix rho) {
    if (!times.empty() && !(t > times.back())) {
      throw InvalidParameter("trajectory times must be strictly increasing");
    }
    if (!frames.empty() && rho.dim() != frames.front().dim()) {
      throw DimensionError("trajectory frame dimension changed");
    }
    times.push_back(t);
    frames.push_back(std::move(rho));
  }
};

// ---------------------------------------------------------------------------
// Master equation

// Precomputes K = -(i/hbar) H - (1/2hbar) sum L^+L so that
//   rhs = K rho + rho K^+ + (1/hbar) sum L rho L^+.
class LindbladGenerator {
 public:
  explicit LindbladGenerator(const LindbladModel& model) : hbar_(model.hbar) {
    const Index d = model.dim();
    Matrix lsum = Matrix::Zero(d, d);
    for (const auto& l : model.jumps) {
      jumps_.push_back(l.matrix());
      jumps_dag_.push_back(l.matrix().adjoint());
      lsum += jumps_dag_.back() * jumps_.back();
    }
    k_ = (-kI / hbar_) * model.h_eff.matrix() - (0.5 / hbar_) * lsum;
    k_dag_ = k_.adjoint();
  }

  Index dim() const noexcept { return k_.rows(); }

  void apply(const Matrix& rho, Matrix& out) const {
    out.noalias() = k_ * rho;
    out.noalias() += rho * k_dag_;
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      tmp_.noalias() = jumps_[k] * rho;
      out.noalias() += (1.0 / hbar_) * (tmp_ * jumps_dag_[k]);
    }
  }

 private:
  double hbar_;
  Matrix k_, k_dag_;
  std::vector<Matrix> jumps_, jumps_dag_;
  mutable Matrix tmp_;
};

inline Operator lindblad_rhs(const DensityMatrix& rho, const LindbladModel& model) {
  model.h_eff.check_same(rho.op());
  const LindbladGenerator gen(model);
  Matrix out(rho.dim(), rho.dim());
  gen.apply(rho.matrix(), out);
  return Operator(std::move(out));
}

struct IntegrationOptions {
  // Re-run at dt/2 and require the final frames to agree within this bound.
  bool step_halving_check = false;
  double step_halving_tolerance = 1e-6;
  // Smallest eigenvalue allowed before aborting.
  double positivity_abort = -1e-6;
};

struct IntegrationStats {
  std::int64_t steps = 0;
  // Largest pre-symmetrization Hermiticity residue seen after a step.
  double max_hermiticity_drift = 0.0;
  double max_trace_correction = 0.0;
  double step_halving_difference = -1.0;
};

namespace detail {

inline StateTrajectory integrate_rk4(const LindbladModel& model, const DensityMatrix& rho0,
                                     const TimeGrid& grid, const IntegrationOptions& opt,
                                     IntegrationStats& stats) {
  const LindbladGenerator gen(model);
  const Index d = model.dim();
  const std::int64_t steps = grid.steps();
  const double dt = grid.dt;

  Matrix rho = rho0.matrix();
  Matrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), stage(d, d);

  StateTrajectory traj;
  traj.times.reserve(static_cast<std::size_t>(grid.frame_count()));
  traj.frames.reserve(static_cast<std::size_t>(grid.frame_count()));
  traj.push(grid.time_at_step(0), rho0);

  for (std::int64_t s = 1; s <= steps; ++s) {
    gen.apply(rho, k1);
    stage = rho + (0.5 * dt) * k1;
    gen.apply(stage, k2);
    stage = rho + (0.5 * dt) * k2;
    gen.apply(stage, k3);
    stage = rho + dt * k3;
    gen.apply(stage, k4);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    stats.max_hermiticity_drift = std::max(stats.max_hermiticity_drift, hermiticity_residue(rho));
    stage = 0.5 * (rho + rho.adjoint());
    rho = stage;
    const Complex tr = rho.trace();
    const double dev = std::abs(tr - Complex(1.0));
    if (dev > 1e-12) {
      rho /= tr.real();
      stats.max_trace_correction = std::max(stats.max_trace_correction, dev);
    }
    if (!rho.allFinite()) {
      throw NumericalFailure("non-finite density matrix at t = " +
                             std::to_string(grid.time_at_step(s)) + " (dt too large?)");
    }

    if (s % grid.frame_stride == 0) {
      const double lam = min_eigenvalue(rho);
      if (lam < opt.positivity_abort) {
        throw NumericalFailure("positivity violated at t = " +
                               std::to_string(grid.time_at_step(s)) +
                               ": smallest eigenvalue " + std::to_string(lam) +
                               " (dt too large or model inconsistent)");
      }
      traj.push(grid.time_at_step(s), DensityMatrix(Operator(rho)));
    }
  }
  stats.steps = steps;
  return traj;
}

}  // namespace detail

inline StateTrajectory integrate_lindblad(const LindbladModel& model, const DensityMatrix& rho0,
                                          const TimeGrid& grid,
                                          const IntegrationOptions& opt = {},
                                          IntegrationStats* stats_out = nullptr) {
  grid.validate();
  model.h_eff.check_same(rho0.op());
  IntegrationStats stats;
  StateTrajectory traj = detail::integrate_rk4(model, rho0, grid, opt, stats);

  if (opt.step_halving_check) {
    TimeGrid half = grid;
    half.dt = grid.dt / 2.0;
    half.frame_stride = half.steps();
    IntegrationStats unused;
    const StateTrajectory fine = detail::integrate_rk4(model, rho0, half, opt, unused);
    const double diff = max_norm(fine.frames.back().matrix() - traj.frames.back().matrix());
    stats.step_halving_difference = diff;
    if (diff > opt.step_halving_tolerance) {
      throw NumericalFailure("step-halving check failed: final frames differ by " +
                             std::to_string(diff));
    }
  }
  if (stats_out) *stats_out = stats;
  return traj;
}

// ---------------------------------------------------------------------------
// Counter-based Gaussian noise

namespace noise {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t trajectory) {
  return splitmix64(splitmix64(base_seed) ^ splitmix64(trajectory + 0x5851f42d4c957f2dULL));
}

// Standard normal variate keyed by (trajectory seed, step, channel).
inline double standard_normal(std::uint64_t traj_seed, std::uint64_t step, std::uint64_t channel) {
  const std::uint64_t a = splitmix64(traj_seed ^ splitmix64(step * 0x2545f4914f6cdd1dULL + channel));
  const std::uint64_t b = splitmix64(a);
  // 53-bit uniforms in (0, 1] and [0, 1)
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace noise

// ---------------------------------------------------------------------------
// Stochastic Schroedinger equation

class SseStepper {
 public:
  explicit SseStepper(const LindbladModel& model)
      : hbar_(model.hbar), h_(model.h_eff.matrix()) {
    const Index d = model.dim();
    ldl_ = Matrix::Zero(d, d);
    for (const auto& l : model.jumps) {
      jumps_.push_back(l.matrix());
      ldl_ += l.matrix().adjoint() * l.matrix();
    }
  }

  std::size_t channels() const noexcept { return jumps_.size(); }
  Index dim() const noexcept { return h_.rows(); }

  // One Euler-Maruyama step followed by renormalization. `dw` holds one
  // Wiener increment (variance dt) per jump operator. Safe to call
  // concurrently on one stepper.
  void step(Vector& psi, double dt, std::span<const double> dw) const {
    if (dw.size() != jumps_.size()) throw DimensionError("one noise increment per jump required");
    Vector drift(psi.size()), diffusion(psi.size()), lpsi(psi.size());
    drift.noalias() = (-kI / hbar_) * (h_ * psi);
    drift.noalias() -= (0.5 / hbar_) * (ldl_ * psi);
    diffusion.setZero(psi.size());
    const double inv_sqrt_hbar = 1.0 / std::sqrt(hbar_);
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      lpsi.noalias() = jumps_[k] * psi;
      const Complex mean = psi.dot(lpsi);  // <L>
      const Complex mean_dag = std::conj(mean);
      drift += (1.0 / hbar_) * (mean_dag * lpsi - (0.5 * mean_dag * mean) * psi);
      diffusion += (inv_sqrt_hbar * dw[k]) * (lpsi - mean * psi);
    }
    psi += dt * drift + diffusion;
    const double n = psi.norm();
    if (!(n >= 1e-8) || !std::isfinite(n)) {
      throw NumericalFailure("SSE norm collapsed to " + std::to_string(n) + " (dt too large)");
    }
    psi /= n;
  }

 private:
  double hbar_;
  Matrix h_, ldl_;
  std::vector<Matrix> jumps_;
};

inline StateVector sse_step(const StateVector& psi, const LindbladModel& model, double dt,
                            std::span<const double> dw) {
  if (psi.dim() != model.dim()) throw DimensionError("state/model dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > tol::kNorm) throw InvalidParameter("state not normalized");
  const SseStepper stepper(model);
  Vector v = psi.amplitudes();
  stepper.step(v, dt, dw);
  return StateVector(std::move(v));
}

struct EnsembleSpec {
  std::int64_t n_traj = 100;
  std::uint64_t base_seed = 0;

  void validate() const {
    if (n_traj < 1) throw InvalidParameter("n_traj must be >= 1");
  }
};

struct EnsembleOptions {
  // Trajectories per merge unit. Fixed, so the summation tree (and the
  // floating-point result) is independent of the thread count.
  std::int64_t chunk = 16;
  std::size_t threads = default_thread_count();
};

// Propagates one trajectory, adding |psi><psi| at each stored frame to `acc`.
inline void accumulate_trajectory(const SseStepper& stepper, const Vector& psi0,
                                  const TimeGrid& grid, std::uint64_t seed,
                                  std::vector<Matrix>& acc) {
  Vector psi = psi0;
  std::vector<double> dw(stepper.channels());
  const double sqrt_dt = std::sqrt(grid.dt);
  acc[0].noalias() += psi * psi.adjoint();
  const std::int64_t steps = grid.steps();
  for (std::int64_t s = 1; s <= steps; ++s) {
    for (std::size_t k = 0; k < dw.size(); ++k) {
      dw[k] = sqrt_dt * noise::standard_normal(seed, static_cast<std::uint64_t>(s), k);
    }
    stepper.step(psi, grid.dt, dw);
    if (s % grid.frame_stride == 0) {
      acc[static_cast<std::size_t>(s / grid.frame_stride)].noalias() += psi * psi.adjoint();
    }
  }
}

inline StateTrajectory run_ensemble(const LindbladModel& model, const StateVector& psi0,
                                    const TimeGrid& grid, const EnsembleSpec& spec,
                                    const EnsembleOptions& opt = {}) {
  grid.validate();
  spec.validate();
  if (psi0.dim() != model.dim()) throw DimensionError("state/model dimension mismatch");
  const SseStepper stepper(model);
  const Index d = model.dim();
  const auto frames = static_cast<std::size_t>(grid.frame_count());
  const std::int64_t chunk = std::max<std::int64_t>(1, opt.chunk);
  const std::int64_t n_chunks = (spec.n_traj + chunk - 1) / chunk;

  std::vector<Matrix> total(frames, Matrix::Zero(d, d));
  const auto wave = static_cast<std::int64_t>(std::max<std::size_t>(1, opt.threads));
  for (std::int64_t first = 0; first < n_chunks; first += wave) {
    const std::int64_t count = std::min(wave, n_chunks - first);
    std::vector<std::vector<Matrix>> partial(static_cast<std::size_t>(count));
    parallel_for(
        static_cast<std::size_t>(count),
        [&](std::size_t w) {
          auto& acc = partial[w];
          acc.assign(frames, Matrix::Zero(d, d));
          const std::int64_t c = first + static_cast<std::int64_t>(w);
          const std::int64_t lo = c * chunk;
          const std::int64_t hi = std::min(spec.n_traj, lo + chunk);
          for (std::int64_t i = lo; i < hi; ++i) {
            try {
              accumulate_trajectory(stepper, psi0.amplitudes(), grid,
                                    noise::trajectory_seed(spec.base_seed,
                                                           static_cast<std::uint64_t>(i)),
                                    acc);
            } catch (const NumericalFailure& e) {
              throw NumericalFailure("trajectory " + std::to_string(i) + ": " + e.what());
            }
          }
        },
        opt.threads);
    for (const auto& acc : partial) {
      for (std::size_t f = 0; f < frames; ++f) total[f] += acc[f];
    }
  }

  StateTrajectory traj;
  const double inv = 1.0 / static_cast<double>(spec.n_traj);
  for (std::size_t f = 0; f < frames; ++f) {
    Matrix rho = total[f] * inv;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    traj.push(grid.time_at_step(static_cast<std::int64_t>(f) * grid.frame_stride),
              DensityMatrix(Operator(std::move(rho))));
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Observables

struct NamedOperator {
  std::string name;
  Operator op;
};

// Column-oriented table of real time series; "time" is column 0.
struct SeriesTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return columns[i];
    }
    throw InvalidParameter("no column named '" + name + "'");
  }

  std::vector<double>& add(std::string name) {
    names.push_back(std::move(name));
    columns.emplace_back();
    return columns.back();
  }
};

// Real expectation of each Hermitian observable per frame, then purity, then
// for chains (`transverse` non-empty) |<s+_j>| and arg <s+_j> per site.
inline SeriesTable observables_series(const StateTrajectory& traj,
                                      const std::vector<NamedOperator>& obs,
                                      const std::vector<Operator>& transverse = {}) {
  for (const auto& o : obs) {
    const double res = hermiticity_residue(o.op.matrix());
    if (res > tol::kHermiticity) throw HermiticityError("observable '" + o.name + "'", res);
    if (!traj.empty()) traj.frames.front().op().check_same(o.op);
  }
  for (const auto& t : transverse) {
    if (!traj.empty()) traj.frames.front().op().check_same(t);
  }
  SeriesTable table;
  table.add("time") = traj.times;
  for (const auto& o : obs) {
    auto& col = table.add(o.name);
    col.reserve(traj.size());
    for (const auto& f : traj.frames) col.push_back(expectation(f, o.op).real());
  }
  auto& pur = table.add("purity");
  for (const auto& f : traj.frames) pur.push_back(purity(f));
  for (std::size_t j = 0; j < transverse.size(); ++j) {
    std::vector<double> mag, arg;
    for (const auto& f : traj.frames) {
      const Complex m = expectation(f, transverse[j]);
      mag.push_back(std::abs(m));
      arg.push_back(std::arg(m));
    }
    table.add("abs_splus_" + std::to_string(j + 1)) = std::move(mag);
    table.add("arg_splus_" + std::to_string(j + 1)) = std::move(arg);
  }
  return table;
}

}  // namespace oqs
