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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Usage: acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oqsonic/cli/commands.hpp"
#include "test_support.hpp"

using namespace oqs;
using namespace oqs::cli;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets, fixed here so that a run can be audited.
constexpr double kTraceTol = 1e-8;
constexpr double kHermTol = 1e-10;
constexpr double kPosTol = -1e-8;
constexpr double kDecayRelTol = 1e-6;
constexpr double kPeriodRelTol = 0.01;
constexpr double kSseMaxDistanceAt500 = 0.1;
constexpr double kSseScalingFactor = 3.0;
constexpr double kTrendMin = 0.5;         // |Spearman rank correlation| of each smoothed series
constexpr double kHelixPurityMin = 0.9;
constexpr double kHelixPhaseTol = 0.1;    // rad
constexpr double kWavMaxDeviation = 1.0 / 32767.0;

constexpr double kBudgetConservation = 60.0;  // seconds
constexpr double kBudgetDecay = 1.0;
constexpr double kBudgetPeriod = 30.0;
constexpr double kBudgetSse = 60.0;
constexpr double kBudgetMono = 60.0;
constexpr double kBudgetSpectral = 5.0;
constexpr double kBudgetHelix = 300.0;
constexpr double kBudgetWav = 1.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

fs::path g_work;

RunConfig load_scenario(const std::string& name, const fs::path& out) {
  RunConfig cfg = parse_config(oqs::testing::read_text(oqs::testing::scenario_path(name)));
  cfg.outputs.dir = out.string();
  cfg.outputs.overwrite = true;
  return cfg;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

// Spearman rank correlation of a series against its index.
double trend(const std::vector<double>& y) {
  const std::vector<double> ry = ranks(y);
  std::vector<double> rx(y.size());
  std::iota(rx.begin(), rx.end(), 0.0);
  const double n = static_cast<double>(y.size());
  const double mx = (n - 1) / 2;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - mx);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - mx) * (ry[i] - mx);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> moving_average(const std::vector<double>& y, std::size_t half) {
  std::vector<double> out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(y.size(), i + half + 1);
    double s = 0;
    for (std::size_t k = lo; k < hi; ++k) s += y[k];
    out.push_back(s / static_cast<double>(hi - lo));
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome conservation() {
  double worst_trace = 0, worst_herm = 0, worst_pos = 0;
  std::size_t frames = 0;
  for (const char* name : {"double_well_shallow", "double_well_deep", "xxz_helix"}) {
    const RunConfig cfg = load_scenario(name, g_work / "c1");
    const PreparedModel pm = prepare_model(cfg.model);
    const EvolveResult r = simulate(cfg, pm);
    for (const auto& f : r.trajectory.frames) {
      const DensityCheck c = check_density(f.matrix());
      worst_trace = std::max(worst_trace, c.trace_error);
      worst_herm = std::max(worst_herm, c.hermiticity);
      worst_pos = std::min(worst_pos, c.min_eigenvalue);
      ++frames;
    }
  }
  const bool ok = worst_trace <= kTraceTol && worst_herm <= kHermTol && worst_pos >= kPosTol;
  return {ok, std::to_string(frames) + " frames; max|Tr-1|=" + fmt(worst_trace) +
                  " max herm=" + fmt(worst_herm) + " min eig=" + fmt(worst_pos)};
}

Outcome amplitude_decay() {
  const RunConfig cfg = load_scenario("qubit_damping", g_work / "c2");
  if (cfg.model.qubit_gamma != 1.0) return {false, "scenario gamma is not 1"};
  const EvolveResult r = simulate(cfg, prepare_model(cfg.model));
  double worst = 0;
  int found = 0;
  for (double t : {0.5, 1.0, 2.0}) {
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
      if (std::abs(r.trajectory.times[i] - t) < 1e-9) {
        const double p = r.trajectory.frames[i](0, 0).real();
        worst = std::max(worst, std::abs(p - std::exp(-t)) / std::exp(-t));
        ++found;
      }
    }
  }
  return {found == 3 && worst <= kDecayRelTol, "max relative error " + fmt(worst)};
}

Outcome tunnelling_period() {
  const RunConfig cfg = load_scenario("double_well_shallow", g_work / "c3");
  const PreparedModel pm = prepare_model(cfg.model);
  const EvolveResult r = simulate(cfg, pm);
  const auto& t = r.observables.column("time");
  const auto& x = r.observables.column("x");
  const auto cross = oqs::testing::upward_zero_crossings(t, x);
  const Eigen::VectorXd& e = pm.grid->basis.energies;
  const double expected = 2.0 * std::numbers::pi * pm.model.hbar / (e(1) - e(0));
  const double measured = oqs::testing::mean_interval(cross);
  const double rel = std::abs(measured - expected) / expected;
  return {cross.size() >= 3 && rel <= kPeriodRelTol,
          "measured " + fmt(measured) + " expected " + fmt(expected) + " (" +
              std::to_string(cross.size()) + " crossings, rel " + fmt(rel) + ")"};
}

Outcome sse_consistency() {
  const RunConfig base = load_scenario("qubit_damping_sse", g_work / "c4");
  const PreparedModel pm = prepare_model(base.model);
  RunConfig det = base;
  det.dynamics->kind = DynamicsKind::kLindblad;
  const StateTrajectory exact = simulate(det, pm).trajectory;
  std::vector<double> dist;
  std::string detail;
  for (std::int64_t m : {125, 500, 2000}) {
    RunConfig cfg = base;
    cfg.dynamics->ensemble.n_traj = m;
    const StateTrajectory avg = simulate(cfg, pm).trajectory;
    double d = 0;
    for (std::size_t i = 0; i < avg.size(); ++i) {
      d = std::max(d, trace_distance(avg.frames[i].matrix(), exact.frames[i].matrix()));
    }
    dist.push_back(d);
    detail += "d(" + std::to_string(m) + ")=" + fmt(d) + " ";
  }
  const bool decreasing = dist[0] > dist[1] && dist[1] > dist[2];
  std::vector<double> scaled{dist[0] * std::sqrt(125.0), dist[1] * std::sqrt(500.0),
                             dist[2] * std::sqrt(2000.0)};
  const double spread = *std::max_element(scaled.begin(), scaled.end()) /
                        *std::min_element(scaled.begin(), scaled.end());
  detail += "d*sqrt(M) spread " + fmt(spread);
  return {decreasing && dist[1] <= kSseMaxDistanceAt500 && spread <= kSseScalingFactor, detail};
}

Outcome mono_and_thermalisation() {
  // Diagonal trajectories: random populations, mapped through a real spectrum.
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool mono = true;
  for (int trial = 0; trial < 5; ++trial) {
    StateTrajectory traj;
    for (int f = 0; f < 20; ++f) {
      Eigen::VectorXd d(6);
      for (Index i = 0; i < 6; ++i) d(i) = u(rng);
      d /= d.sum();
      traj.push(f, DensityMatrix(Operator::diagonal(d)));
    }
    SonificationParams p;
    p.duration = 1.0;
    const StereoBuffer b = render_binaural(traj, {220, 261, 330, 392, 440, 523}, p);
    mono = mono && b.left == b.right;
  }

  const RunConfig cfg = load_scenario("double_well_thermal", g_work / "c5");
  const PreparedModel pm = prepare_model(cfg.model);
  const EvolveResult r = simulate(cfg, pm);
  const RenderProducts prod = render_trajectory(r.trajectory, pm, *cfg.sonification);
  const std::vector<double> weight = off_diagonal_weight(prod.energy_frames);
  // Smooth both series over about one tenth of the run.
  const auto coh = moving_average(prod.coherence.value, prod.coherence.value.size() / 20);
  const auto w = moving_average(weight, weight.size() / 20);
  const double tc = trend(coh);
  const double tw = trend(w);
  const bool opposite = tc >= kTrendMin && tw <= -kTrendMin;
  return {mono && opposite, std::string("diagonal renders mono: ") + (mono ? "yes" : "no") +
                                "; coherence trend " + fmt(tc) + ", off-diagonal trend " +
                                fmt(tw) + " (first " + fmt(prod.coherence.value.front()) +
                                " last " + fmt(prod.coherence.value.back()) + ")"};
}

Outcome spectral_fidelity() {
  Eigen::VectorXd e(2);
  e << 1.0, 1.5;
  const EnergyBasis basis = hermitian_eig(Operator::diagonal(e));
  SonificationParams p;
  p.duration = 2.0;
  const FrequencyMap fm = map_frequencies(basis, p);
  StateTrajectory traj;
  const Vector psi = (basis.vectors.col(0) + basis.vectors.col(1)) / std::sqrt(2.0);
  const DensityMatrix rho(Operator(Matrix(psi * psi.adjoint())));
  traj.push(0.0, rho);
  traj.push(1.0, rho);
  const StereoBuffer buf = render_binaural(to_energy_basis(traj, basis), fm.hz, p);
  const double bin = 1.0 / p.duration;
  const double split = 0.5 * (fm.hz[0] + fm.hz[1]);
  auto peak = [&](const std::vector<double>& x, double lo, double hi) {
    double best = -1, at = 0;
    for (double f = lo; f <= hi; f += bin) {
      const double v = oqs::testing::dft_magnitude(x, static_cast<std::size_t>(std::lround(f / bin)));
      if (v > best) {
        best = v;
        at = f;
      }
    }
    return std::pair{at, best};
  };
  const auto [l0, l0v] = peak(buf.left, fm.hz[0] - 40, split);
  const auto [l1, l1v] = peak(buf.left, split, fm.hz[1] + 40);
  const auto [r0, r0v] = peak(buf.right, fm.hz[0] - 40, split);
  const auto [r1, r1v] = peak(buf.right, split, fm.hz[1] + 40);
  const bool located = std::abs(l0 - fm.hz[0]) <= bin && std::abs(l1 - fm.hz[1]) <= bin &&
                       std::abs(r0 - fm.hz[0]) <= bin && std::abs(r1 - fm.hz[1]) <= bin;
  // The coherence term sounds f1 in the left ear and f0 in the right ear.
  const bool channels = l1v > l0v && r0v > r1v;
  return {located && channels, "f0=" + fmt(fm.hz[0]) + " f1=" + fmt(fm.hz[1]) + " left peaks " +
                                   fmt(l0) + "/" + fmt(l1) + " right peaks " + fmt(r0) + "/" +
                                   fmt(r1) + ", left f1:f0 " + fmt(l1v / l0v) + ", right f0:f1 " +
                                   fmt(r0v / r1v)};
}

Outcome spin_helix() {
  const RunConfig cfg = load_scenario("xxz_helix", g_work / "c7");
  if (cfg.initial_state.kind != InitKind::kMaximallyMixed || cfg.model.xxz.n_sites != 4) {
    return {false, "scenario is not the N=4 maximally mixed start"};
  }
  const PreparedModel pm = prepare_model(cfg.model);
  const EvolveResult r = simulate(cfg, pm);
  const DensityMatrix& last = r.trajectory.frames.back();
  const double pur = purity(last);
  std::vector<double> phase;
  for (const auto& sp : pm.transverse) phase.push_back(std::arg(expectation(last, sp)));
  std::vector<double> inc;
  for (std::size_t j = 0; j + 1 < phase.size(); ++j) {
    inc.push_back(std::remainder(phase[j + 1] - phase[j], 2.0 * std::numbers::pi));
  }
  const double mean = std::accumulate(inc.begin(), inc.end(), 0.0) / static_cast<double>(inc.size());
  double dev = 0;
  for (double d : inc) dev = std::max(dev, std::abs(d - mean));
  std::string incs;
  for (double d : inc) incs += fmt(d) + " ";
  return {pur >= kHelixPurityMin && dev <= kHelixPhaseTol,
          "purity " + fmt(pur) + " at t=" + fmt(r.trajectory.times.back()) + "; increments " +
              incs + "(max deviation " + fmt(dev) + ")"};
}

Outcome wav_round_trip() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 5; ++trial) {
    StereoBuffer buf;
    buf.sample_rate = trial % 2 ? 48000 : 44100;
    for (int i = 0; i < 20000 + trial; ++i) {
      buf.left.push_back(u(rng));
      buf.right.push_back(u(rng));
    }
    const fs::path p = g_work / "c8" / ("rt" + std::to_string(trial) + ".wav");
    fs::create_directories(p.parent_path());
    write_wav(buf, p, true);
    const StereoBuffer back = read_wav(p);
    if (back.size() != buf.size() || back.sample_rate != buf.sample_rate) {
      return {false, "length or rate changed"};
    }
    for (std::size_t i = 0; i < buf.size(); ++i) {
      worst = std::max({worst, std::abs(back.left[i] - buf.left[i]),
                        std::abs(back.right[i] - buf.right[i])});
    }
  }
  // Header bytes against the documented layout.
  StereoBuffer one;
  one.left = {1.0, -1.0};
  one.right = {0.0, 0.5};
  const std::vector<unsigned char> hdr = encode_wav(one);
  const unsigned char expected[] = {'R', 'I', 'F', 'F', 44, 0, 0, 0, 'W', 'A', 'V', 'E',
                                    'f', 'm', 't', ' ', 16, 0, 0, 0, 1, 0, 2, 0,
                                    0x44, 0xac, 0, 0, 0x10, 0xb1, 0x02, 0, 4, 0, 16, 0,
                                    'd', 'a', 't', 'a', 8, 0, 0, 0,
                                    0xff, 0x7f, 0, 0, 0x01, 0x80, 0x00, 0x40};
  const bool header_ok =
      hdr.size() == sizeof expected && std::equal(hdr.begin(), hdr.end(), expected);
  return {worst <= kWavMaxDeviation && header_ok,
          "max deviation " + fmt(worst * 32767.0) + " LSB; header " +
              (header_ok ? "matches" : "differs")};
}

// Runs a scenario end to end into `dir` and returns the files to compare.
std::vector<fs::path> run_scenario(const std::string& name, const fs::path& dir) {
  RunConfig cfg = load_scenario(name, dir);
  fs::remove_all(dir);
  const PreparedModel pm = prepare_model(cfg.model);
  bool renderable = true;
  try {
    map_frequencies(pm.basis, cfg.sonification->params);
  } catch (const InvalidParameter&) {
    renderable = false;  // fully degenerate spectrum (H = 0), nothing to map
  }
  cmd_spectrum(cfg);
  std::vector<fs::path> files{"spectrum.csv", "observables.csv", "trajectory.oqs"};
  if (pm.grid) files.push_back("densities.csv");
  if (renderable) {
    cmd_render(cfg);
    files.push_back("render.wav");
    files.push_back("coherence.csv");
  } else {
    cmd_evolve(cfg);
  }
  return files;
}

Outcome determinism() {
  std::string detail;
  bool ok = true;
  int wavs = 0, compared = 0;
  for (const char* name : {"double_well_shallow", "double_well_deep", "double_well_thermal",
                           "xxz_helix", "qubit_damping", "qubit_damping_sse"}) {
    const auto files = run_scenario(name, g_work / "c9a" / name);
    run_scenario(name, g_work / "c9b" / name);
    for (const auto& f : files) {
      const std::string a = oqs::testing::read_text(g_work / "c9a" / name / f);
      const std::string b = oqs::testing::read_text(g_work / "c9b" / name / f);
      ++compared;
      if (f.extension() == ".wav") ++wavs;
      if (a.empty() || a != b) {
        ok = false;
        detail += std::string(name) + "/" + f.string() + " differs; ";
      }
    }
  }
  detail += std::to_string(compared) + " files compared (" + std::to_string(wavs) + " WAV)";
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  g_work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "oqsonic_acceptance";
  fs::create_directories(g_work);

  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "conservation suite", kBudgetConservation, conservation},
      {2, "amplitude-damping oracle", kBudgetDecay, amplitude_decay},
      {3, "tunnelling period", kBudgetPeriod, tunnelling_period},
      {4, "SSE/Lindblad consistency", kBudgetSse, sse_consistency},
      {5, "mono limit and thermalisation trends", kBudgetMono, mono_and_thermalisation},
      {6, "spectral fidelity", kBudgetSpectral, spectral_fidelity},
      {7, "spin-helix recoherence", kBudgetHelix, spin_helix},
      {8, "WAV round trip", kBudgetWav, wav_round_trip},
      {9, "determinism", 0.0, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_budget = c.budget <= 0.0 || secs <= c.budget;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name
              << "): " << o.detail << " [" << fmt(secs) << " s"
              << (c.budget > 0.0 ? ", budget " + fmt(c.budget) + " s" : "")
              << (in_budget ? "" : ", OVER BUDGET") << "]" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
