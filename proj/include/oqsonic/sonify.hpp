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

// Binaural rendering of a density-matrix trajectory.
//
// Each frame is expressed in the Hamiltonian eigenbasis, rho_kl = r e^{i theta}.
// Level n sounds at f_n = f0 * E'_n / E'_0 (E' = E + shift > 0). Every entry
// of the lower triangle (k >= l) contributes
//     left  += r sin(2 pi f_k tau + theta)
//     right += r sin(2 pi f_l tau - theta)
// so populations are heard in both ears and coherences split between them.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "oqsonic/dynamics.hpp"
#include "oqsonic/operators.hpp"
#include "oqsonic/parallel.hpp"

namespace oqs {

struct SonificationParams {
  double f0 = 220.0;
  std::int64_t sample_rate = 44100;
  double duration = 10.0;
  double amplitude_floor = 1e-4;
  double headroom = 0.89;

  void validate() const {
    if (!(f0 > 0.0)) throw InvalidParameter("f0 must be positive");
    if (sample_rate < 2000) throw InvalidParameter("sample_rate must be >= 2000 Hz");
    if (!(duration > 0.0)) throw InvalidParameter("duration must be positive");
    if (!(amplitude_floor >= 0.0)) throw InvalidParameter("amplitude_floor must be >= 0");
    if (!(headroom > 0.0 && headroom <= 1.0)) throw InvalidParameter("headroom must be in (0, 1]");
  }
  std::int64_t sample_count() const {
    return static_cast<std::int64_t>(std::llround(duration * static_cast<double>(sample_rate)));
  }
};

struct StereoBuffer {
  std::int64_t sample_rate = 44100;
  std::vector<double> left;
  std::vector<double> right;

  std::size_t size() const noexcept { return left.size(); }
  double seconds() const {
    return static_cast<double>(left.size()) / static_cast<double>(sample_rate);
  }
};

// ---------------------------------------------------------------------------
// Eigenbasis expression

// Rotates every frame into the eigenbasis: rho -> U_r^+ rho U_r. With
// rank < dim the projected frames are renormalized to unit trace.
inline StateTrajectory to_energy_basis(const StateTrajectory& traj, const EnergyBasis& basis) {
  if (traj.empty()) return {};
  if (traj.dim() != basis.dim()) {
    throw DimensionError("trajectory dim " + std::to_string(traj.dim()) +
                         " does not match basis dim " + std::to_string(basis.dim()));
  }
  const Matrix u = basis.truncated();
  StateTrajectory out;
  out.times = traj.times;
  out.frames.reserve(traj.size());
  for (const auto& f : traj.frames) {
    Matrix m = u.adjoint() * f.matrix() * u;
    m = 0.5 * (m + m.adjoint()).eval();
    if (basis.rank < basis.dim()) {
      const double tr = m.trace().real();
      if (!(tr > 0.0)) throw NumericalFailure("frame has no weight inside the retained levels");
      m /= tr;
    }
    out.frames.emplace_back(Operator(std::move(m)));
  }
  return out;
}

// Phase of rho_kl, 0 below `eps` magnitude.
inline double entry_phase(Complex z, double eps = 1e-12) {
  return std::abs(z) < eps ? 0.0 : std::arg(z);
}

// max_{k,l} |theta_kl + theta_lk| (wrapped); zero for a Hermitian frame.
inline double phase_antisymmetry_residue(const Matrix& rho) {
  double worst = 0.0;
  for (Index k = 0; k < rho.rows(); ++k) {
    for (Index l = 0; l < k; ++l) {
      const double s = entry_phase(rho(k, l)) + entry_phase(rho(l, k));
      worst = std::max(worst, std::abs(std::remainder(s, 2.0 * std::numbers::pi)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Frequency map

struct FrequencyMap {
  std::vector<double> hz;
  double shift = 0.0;
};

// f_n = f0 (E_n + s) / (E_0 + s). For E_0 <= 0 the spectrum is lifted so that
// E_0 + s equals the first nonzero gap above the ground level.
inline FrequencyMap map_frequencies(const EnergyBasis& basis, const SonificationParams& params) {
  params.validate();
  if (basis.rank < 2) throw InvalidParameter("frequency map needs rank >= 2");
  const Eigen::VectorXd e = basis.truncated_energies();
  const double e0 = e(0);
  FrequencyMap out;
  if (e0 <= 0.0) {
    const double scale = std::max(1.0, e.cwiseAbs().maxCoeff());
    double gap = 0.0;
    for (Index n = 1; n < e.size(); ++n) {
      if (e(n) - e0 > 1e-12 * scale) {
        gap = e(n) - e0;
        break;
      }
    }
    if (gap <= 0.0) throw InvalidParameter("retained levels are degenerate; cannot map frequencies");
    out.shift = -e0 + gap;
  }
  const double base = e0 + out.shift;
  out.hz.resize(static_cast<std::size_t>(e.size()));
  for (Index n = 0; n < e.size(); ++n) {
    out.hz[static_cast<std::size_t>(n)] = (e(n) + out.shift) / base * params.f0;
  }
  const double limit = static_cast<double>(params.sample_rate) / 2.0 - 1000.0;
  if (out.hz.back() > limit) {
    throw AliasingError("highest mapped frequency " + std::to_string(out.hz.back()) +
                        " Hz exceeds " + std::to_string(limit) +
                        " Hz; lower the truncation rank or f0");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

struct RenderInfo {
  // Simulation time per second of audio.
  double dilation = 0.0;
  // Global gain applied to reach `headroom`.
  double normalization = 1.0;
  double raw_peak = 0.0;
  // Fastest coherence phase rotation in rad per audio second.
  double max_phase_rate = 0.0;
  double max_antisymmetry_residue = 0.0;
  std::vector<std::string> warnings;
};

struct RenderOptions {
  std::size_t threads = default_thread_count();
  std::int64_t block = 8192;
};

inline StereoBuffer render_binaural(const StateTrajectory& traj, const std::vector<double>& freqs,
                                    const SonificationParams& params, RenderInfo* info_out = nullptr,
                                    const RenderOptions& opt = {}) {
  params.validate();
  if (traj.empty()) throw InvalidParameter("cannot render an empty trajectory");
  const Index rank = traj.dim();
  if (static_cast<std::size_t>(rank) != freqs.size()) {
    throw DimensionError("trajectory rank " + std::to_string(rank) + " but " +
                         std::to_string(freqs.size()) + " frequencies");
  }
  const std::size_t n_frames = traj.size();
  double span = 0.0;
  if (n_frames > 1) {
    span = traj.times.back() - traj.times.front();
    const double spacing = span / static_cast<double>(n_frames - 1);
    for (std::size_t i = 1; i < n_frames; ++i) {
      const double d = traj.times[i] - traj.times[i - 1];
      if (std::abs(d - spacing) > 1e-6 * spacing) {
        throw InvalidParameter("trajectory frames are not uniformly spaced");
      }
    }
  }

  RenderInfo info;
  info.dilation = span / params.duration;
  for (const auto& f : traj.frames) {
    info.max_antisymmetry_residue =
        std::max(info.max_antisymmetry_residue, phase_antisymmetry_residue(f.matrix()));
  }
  if (info.max_antisymmetry_residue > 1e-10) {
    throw HermiticityError("phase antisymmetry violated before rendering",
                           info.max_antisymmetry_residue);
  }

  // Lower-triangle entries of each frame, packed.
  std::vector<std::pair<Index, Index>> pairs;
  for (Index k = 0; k < rank; ++k) {
    for (Index l = 0; l <= k; ++l) pairs.emplace_back(k, l);
  }
  const std::size_t n_pairs = pairs.size();
  std::vector<Complex> packed(n_frames * n_pairs);
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t p = 0; p < n_pairs; ++p) {
      packed[f * n_pairs + p] = traj.frames[f](pairs[p].first, pairs[p].second);
    }
  }

  const double audio_per_frame =
      n_frames > 1 ? params.duration / static_cast<double>(n_frames - 1) : params.duration;
  for (std::size_t f = 1; f < n_frames; ++f) {
    for (std::size_t p = 0; p < n_pairs; ++p) {
      if (pairs[p].first == pairs[p].second) continue;
      const Complex a = packed[(f - 1) * n_pairs + p];
      const Complex b = packed[f * n_pairs + p];
      if (std::abs(a) < params.amplitude_floor || std::abs(b) < params.amplitude_floor) continue;
      const double dtheta = std::abs(std::arg(b / a));
      info.max_phase_rate = std::max(info.max_phase_rate, dtheta / audio_per_frame);
    }
  }
  if (info.max_phase_rate > 0.2 * 2.0 * std::numbers::pi * params.f0) {
    info.warnings.push_back(
        "coherence phases rotate faster than 0.2 * 2 pi f0 per audio second; use a longer "
        "duration");
  }

  const std::int64_t n_samples = params.sample_count();
  StereoBuffer buf;
  buf.sample_rate = params.sample_rate;
  buf.left.assign(static_cast<std::size_t>(n_samples), 0.0);
  buf.right.assign(static_cast<std::size_t>(n_samples), 0.0);

  const double floor2 = params.amplitude_floor * params.amplitude_floor;
  const double two_pi = 2.0 * std::numbers::pi;
  const double sr = static_cast<double>(params.sample_rate);
  const std::int64_t block = std::max<std::int64_t>(1, opt.block);
  const std::int64_t n_blocks = (n_samples + block - 1) / block;

  parallel_for(
      static_cast<std::size_t>(n_blocks),
      [&](std::size_t b) {
        std::vector<double> s(static_cast<std::size_t>(rank)), c(static_cast<std::size_t>(rank));
        const std::int64_t lo = static_cast<std::int64_t>(b) * block;
        const std::int64_t hi = std::min(n_samples, lo + block);
        for (std::int64_t i = lo; i < hi; ++i) {
          const double tau = static_cast<double>(i) / sr;
          std::size_t f0 = 0;
          double frac = 0.0;
          if (n_frames > 1) {
            const double u = tau / params.duration * static_cast<double>(n_frames - 1);
            f0 = std::min(static_cast<std::size_t>(u), n_frames - 2);
            frac = u - static_cast<double>(f0);
          }
          for (Index k = 0; k < rank; ++k) {
            const double phase = two_pi * freqs[static_cast<std::size_t>(k)] * tau;
            s[static_cast<std::size_t>(k)] = std::sin(phase);
            c[static_cast<std::size_t>(k)] = std::cos(phase);
          }
          const Complex* a = &packed[f0 * n_pairs];
          const Complex* bnext = n_frames > 1 ? &packed[(f0 + 1) * n_pairs] : a;
          double left = 0.0;
          double right = 0.0;
          for (std::size_t p = 0; p < n_pairs; ++p) {
            Complex z = a[p];
            if (frac != 0.0) z += frac * (bnext[p] - a[p]);
            const double r2 = std::norm(z);
            if (r2 < floor2 || r2 == 0.0) continue;
            const auto k = static_cast<std::size_t>(pairs[p].first);
            const auto l = static_cast<std::size_t>(pairs[p].second);
            if (k == l) {
              const double term = z.real() * s[k];
              left += term;
              right += term;
              continue;
            }
            double re = z.real();
            double im = z.imag();
            if (std::sqrt(r2) < 1e-12) {
              re = std::sqrt(r2);
              im = 0.0;
            }
            // r sin(x + theta) = Re z sin x + Im z cos x
            left += re * s[k] + im * c[k];
            right += re * s[l] - im * c[l];
          }
          buf.left[static_cast<std::size_t>(i)] = left;
          buf.right[static_cast<std::size_t>(i)] = right;
        }
      },
      opt.threads);

  double peak = 0.0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    peak = std::max({peak, std::abs(buf.left[i]), std::abs(buf.right[i])});
  }
  info.raw_peak = peak;
  info.normalization = peak > 0.0 ? params.headroom / peak : 1.0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf.left[i] *= info.normalization;
    buf.right[i] *= info.normalization;
  }
  if (info_out) *info_out = std::move(info);
  return buf;
}

// ---------------------------------------------------------------------------
// Analysis

struct CoherenceSeries {
  std::vector<double> time;  // window centres, seconds
  std::vector<double> value;
};

// Zero-lag normalized cross-correlation of left and right over consecutive
// non-overlapping windows.
inline CoherenceSeries channel_coherence_metric(const StereoBuffer& buf, double window) {
  if (window < 0.01) throw InvalidParameter("coherence window must be >= 10 ms");
  const auto w = static_cast<std::size_t>(std::llround(window * static_cast<double>(buf.sample_rate)));
  if (w > buf.size() || w == 0) throw InvalidParameter("coherence window longer than buffer");
  CoherenceSeries out;
  for (std::size_t start = 0; start + w <= buf.size(); start += w) {
    double lr = 0.0, ll = 0.0, rr = 0.0;
    bool identical = true;
    for (std::size_t i = start; i < start + w; ++i) {
      const double l = buf.left[i];
      const double r = buf.right[i];
      lr += l * r;
      ll += l * l;
      rr += r * r;
      identical = identical && l == r;
    }
    double v = 0.0;
    if (identical) {
      v = 1.0;
    } else if (ll > 0.0 && rr > 0.0) {
      v = std::clamp(lr / std::sqrt(ll * rr), -1.0, 1.0);
    }
    out.time.push_back((static_cast<double>(start) + 0.5 * static_cast<double>(w)) /
                       static_cast<double>(buf.sample_rate));
    out.value.push_back(v);
  }
  return out;
}

// sum_{k>l} |rho_kl| for each frame.
inline std::vector<double> off_diagonal_weight(const StateTrajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& f : traj.frames) {
    double s = 0.0;
    for (Index k = 0; k < f.dim(); ++k) {
      for (Index l = 0; l < k; ++l) s += std::abs(f(k, l));
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace oqs
