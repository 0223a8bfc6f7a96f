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

// spectrum / evolve / render pipelines behind the command-line front end.
//
// Files written into the output directory:
//   spectrum:  spectrum.csv, densities.csv (grid models), spectrum.config.yaml
//   evolve:    observables.csv, trajectory.oqs, evolve.yaml, evolve.config.yaml
//   render:    render.wav, render.yaml, coherence.csv, render.config.yaml
//              (+ the evolve outputs when no trajectory store exists yet)

#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "oqsonic/cli/config.hpp"
#include "oqsonic/dynamics.hpp"
#include "oqsonic/io.hpp"
#include "oqsonic/models.hpp"
#include "oqsonic/sonify.hpp"
#include "oqsonic/wav.hpp"

namespace oqs::cli {

namespace fs = std::filesystem;

struct GridData {
  Eigen::VectorXd x;
  Eigen::VectorXd potential;
  EnergyBasis basis;  // full-grid eigenbasis of the closed-system Hamiltonian
};

// A model in working coordinates: the truncated eigenbasis for grid models,
// the natural product basis for spin models.
struct PreparedModel {
  LindbladModel model;
  EnergyBasis basis;  // eigenbasis of model.h_system, working coordinates
  std::vector<NamedOperator> observables;
  std::vector<Operator> transverse;
  std::optional<GridData> grid;
};

inline PreparedModel prepare_model(const ModelConfig& cfg) {
  switch (cfg.kind) {
    case ModelKind::kDoubleWell: {
      const LindbladModel full = build_double_well(cfg.grid, cfg.well);
      GridData grid;
      grid.x = cfg.grid.positions();
      grid.potential.resize(grid.x.size());
      for (Index i = 0; i < grid.x.size(); ++i) grid.potential(i) = cfg.well.potential(grid.x(i));
      grid.basis = hermitian_eig(full.h_system);
      LindbladModel model = truncate_to_eigenbasis(full, grid.basis, cfg.rank);
      EnergyBasis basis = hermitian_eig(model.h_system);
      const auto [x, p] = build_position_operators(cfg.grid, full.hbar);
      auto hermitian = [](const Operator& o) {
        return Operator(0.5 * (o.matrix() + o.matrix().adjoint()));
      };
      std::vector<NamedOperator> obs{
          {"x", hermitian(project_operator(x, grid.basis, cfg.rank))},
          {"p", hermitian(project_operator(p, grid.basis, cfg.rank))},
          {"energy", model.h_system}};
      return {std::move(model), std::move(basis), std::move(obs), {}, std::move(grid)};
    }
    case ModelKind::kXXZ: {
      LindbladModel model = build_xxz_chain(cfg.xxz);
      EnergyBasis basis = hermitian_eig(model.h_system);
      std::vector<NamedOperator> obs;
      std::vector<Operator> transverse;
      const int n = cfg.xxz.n_sites;
      for (int j = 0; j < n; ++j) {
        const std::string s = std::to_string(j + 1);
        obs.push_back({"sx_" + s, site_operator(pauli::x(), j, n)});
        obs.push_back({"sy_" + s, site_operator(pauli::y(), j, n)});
        obs.push_back({"sz_" + s, site_operator(pauli::z(), j, n)});
        transverse.push_back(site_operator(pauli::plus(), j, n));
      }
      obs.push_back({"energy", model.h_system});
      return {std::move(model), std::move(basis), std::move(obs), std::move(transverse), {}};
    }
    case ModelKind::kQubitDamping: {
      LindbladModel model = build_qubit_damping(cfg.qubit_gamma);
      // H = 0: every state is stationary, so use the computational basis.
      EnergyBasis basis{Eigen::VectorXd::Zero(2), Matrix::Identity(2, 2), 2};
      std::vector<NamedOperator> obs{
          {"rho_upup", Operator((Matrix(2, 2) << 1, 0, 0, 0).finished())},
          {"sx", pauli::x()},
          {"sy", pauli::y()},
          {"sz", pauli::z()}};
      return {std::move(model), std::move(basis), std::move(obs), {}, {}};
    }
  }
  throw InvalidParameter("unknown model kind");
}

// Pure initial state in working coordinates; nullopt for mixed states.
inline std::optional<StateVector> initial_pure_state(const InitialStateConfig& s,
                                                     const PreparedModel& pm) {
  const Matrix& u = pm.basis.vectors;
  switch (s.kind) {
    case InitKind::kEigenstate:
      return StateVector(u.col(s.n));
    case InitKind::kSymmetricCombo:
      return StateVector(Vector(u.col(s.levels[0]) +
                                std::exp(kI * s.relative_phase) * u.col(s.levels[1])));
    case InitKind::kProductSpins: {
      Vector psi = Vector::Ones(1);
      for (const auto& a : s.angles) {
        Vector site(2);
        site << std::cos(a.theta / 2.0), std::exp(kI * a.phi) * std::sin(a.theta / 2.0);
        Vector next(psi.size() * 2);
        for (Index i = 0; i < psi.size(); ++i) next.segment(2 * i, 2) = psi(i) * site;
        psi = std::move(next);
      }
      return StateVector(std::move(psi));
    }
    case InitKind::kCustom: {
      Vector v(static_cast<Index>(s.amplitudes.size()));
      for (std::size_t i = 0; i < s.amplitudes.size(); ++i) v(static_cast<Index>(i)) = s.amplitudes[i];
      return StateVector(std::move(v));
    }
    case InitKind::kMaximallyMixed:
      return std::nullopt;
  }
  return std::nullopt;
}

inline DensityMatrix initial_density(const InitialStateConfig& s, const PreparedModel& pm) {
  if (auto psi = initial_pure_state(s, pm)) return DensityMatrix::pure(*psi);
  return DensityMatrix::maximally_mixed(pm.model.dim());
}

// ---------------------------------------------------------------------------

struct CommandContext {
  fs::path out_dir;
  bool overwrite = false;
  std::ostream* log = nullptr;

  void note(const std::string& msg) const {
    if (log) *log << msg << '\n';
  }
  fs::path file(const std::string& name) const { return out_dir / name; }
};

inline CommandContext make_context(const RunConfig& cfg, std::ostream* log) {
  CommandContext ctx{cfg.outputs.dir, cfg.outputs.overwrite, log};
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + ctx.out_dir.string());
  return ctx;
}

inline std::string yaml_text(const YAML::Emitter& e) { return std::string(e.c_str()) + "\n"; }

// Frequency column for the spectrum table: the guard-free frequency map, NaN
// when the retained levels are fully degenerate.
inline std::vector<double> spectrum_frequencies(const EnergyBasis& basis, double f0) {
  SonificationParams p;
  p.f0 = f0;
  p.sample_rate = std::numeric_limits<std::int32_t>::max();
  try {
    return map_frequencies(basis, p).hz;
  } catch (const InvalidParameter&) {
    return std::vector<double>(static_cast<std::size_t>(basis.rank),
                               std::numeric_limits<double>::quiet_NaN());
  }
}

inline void cmd_spectrum(const RunConfig& cfg, std::ostream* log = nullptr) {
  const CommandContext ctx = make_context(cfg, log);
  const PreparedModel pm = prepare_model(cfg.model);
  const double f0 = cfg.sonification ? cfg.sonification->params.f0 : SonificationParams{}.f0;

  const EnergyBasis& b = pm.basis;
  std::vector<double> index, energy;
  for (Index n = 0; n < b.rank; ++n) {
    index.push_back(static_cast<double>(n));
    energy.push_back(b.energies(n));
  }
  write_text(to_csv({"index", "energy", "frequency_hz"},
                    {index, energy, spectrum_frequencies(b, f0)}),
             ctx.file("spectrum.csv"), ctx.overwrite);

  if (pm.grid) {
    const GridData& g = *pm.grid;
    const double h = cfg.model.grid.spacing();
    std::vector<std::string> names{"x", "potential"};
    std::vector<std::vector<double>> cols{
        std::vector<double>(g.x.data(), g.x.data() + g.x.size()),
        std::vector<double>(g.potential.data(), g.potential.data() + g.potential.size())};
    const Index shown = std::min<Index>(3, g.basis.dim());
    for (Index n = 0; n < shown; ++n) {
      names.push_back("density_" + std::to_string(n));
      std::vector<double> col;
      for (Index i = 0; i < g.x.size(); ++i) col.push_back(std::norm(g.basis.vectors(i, n)) / h);
      cols.push_back(std::move(col));
    }
    std::vector<double> sym, anti;
    for (Index i = 0; i < g.x.size(); ++i) {
      const Complex a = g.basis.vectors(i, 0);
      const Complex c = g.basis.vectors(i, 1);
      sym.push_back(std::norm(a + c) / (2.0 * h));
      anti.push_back(std::norm(a - c) / (2.0 * h));
    }
    names.push_back("symmetric");
    cols.push_back(std::move(sym));
    names.push_back("antisymmetric");
    cols.push_back(std::move(anti));
    write_text(to_csv(names, cols), ctx.file("densities.csv"), ctx.overwrite);
  }
  write_text(emit_config(cfg), ctx.file("spectrum.config.yaml"), ctx.overwrite);
  ctx.note("spectrum: " + std::to_string(b.rank) + " levels written to " + ctx.out_dir.string());
}

struct EvolveResult {
  StateTrajectory trajectory;
  SeriesTable observables;
  IntegrationStats stats;
};

inline EvolveResult simulate(const RunConfig& cfg, const PreparedModel& pm) {
  if (!cfg.dynamics) throw ConfigError("dynamics: block is required for this command");
  const DynamicsConfig& d = *cfg.dynamics;
  EvolveResult r;
  if (d.kind == DynamicsKind::kLindblad) {
    IntegrationOptions opt;
    opt.step_halving_check = d.step_halving_check;
    r.trajectory =
        integrate_lindblad(pm.model, initial_density(cfg.initial_state, pm), d.grid, opt, &r.stats);
  } else {
    const auto psi = initial_pure_state(cfg.initial_state, pm);
    if (!psi) throw ConfigError("initial_state: sse dynamics needs a pure state");
    r.trajectory = run_ensemble(pm.model, *psi, d.grid, d.ensemble);
    r.stats.steps = d.grid.steps();
  }
  r.observables = observables_series(r.trajectory, pm.observables, pm.transverse);
  return r;
}

inline StateTrajectory evolve_and_write(const RunConfig& cfg, const PreparedModel& pm,
                                        const CommandContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  EvolveResult r = simulate(cfg, pm);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const DynamicsConfig& d = *cfg.dynamics;

  write_text(to_csv(r.observables), ctx.file("observables.csv"), ctx.overwrite);
  write_trajectory(r.trajectory, ctx.file("trajectory.oqs"), ctx.overwrite);

  YAML::Emitter meta;
  meta.SetDoublePrecision(17);
  meta << YAML::BeginMap;
  meta << YAML::Key << "name" << YAML::Value << cfg.name;
  meta << YAML::Key << "model" << YAML::Value << pm.model.label;
  meta << YAML::Key << "dim" << YAML::Value << pm.model.dim();
  meta << YAML::Key << "method" << YAML::Value
       << (d.kind == DynamicsKind::kLindblad ? "lindblad_rk4" : "sse_euler_maruyama");
  meta << YAML::Key << "steps" << YAML::Value << r.stats.steps;
  meta << YAML::Key << "frames" << YAML::Value << r.trajectory.size();
  meta << YAML::Key << "dt" << YAML::Value << d.grid.dt;
  if (d.kind == DynamicsKind::kSse) {
    meta << YAML::Key << "n_traj" << YAML::Value << d.ensemble.n_traj;
    meta << YAML::Key << "base_seed" << YAML::Value << d.ensemble.base_seed;
  } else {
    meta << YAML::Key << "max_hermiticity_drift" << YAML::Value << r.stats.max_hermiticity_drift;
    meta << YAML::Key << "max_trace_correction" << YAML::Value << r.stats.max_trace_correction;
    if (d.step_halving_check) {
      meta << YAML::Key << "step_halving_difference" << YAML::Value
           << r.stats.step_halving_difference;
    }
  }
  meta << YAML::Key << "wall_time_s" << YAML::Value << wall;
  meta << YAML::EndMap;
  write_text(yaml_text(meta), ctx.file("evolve.yaml"), ctx.overwrite);
  write_text(emit_config(cfg), ctx.file("evolve.config.yaml"), ctx.overwrite);
  ctx.note("evolve: " + std::to_string(r.trajectory.size()) + " frames in " +
           format_double(wall) + " s");
  return std::move(r.trajectory);
}

inline void cmd_evolve(const RunConfig& cfg, std::ostream* log = nullptr) {
  const CommandContext ctx = make_context(cfg, log);
  const PreparedModel pm = prepare_model(cfg.model);
  evolve_and_write(cfg, pm, ctx);
}

struct RenderProducts {
  StereoBuffer audio;
  FrequencyMap frequencies;
  RenderInfo info;
  CoherenceSeries coherence;
  StateTrajectory energy_frames;
};

// Pure rendering stage, no I/O.
inline RenderProducts render_trajectory(const StateTrajectory& traj, const PreparedModel& pm,
                                        const SonificationConfig& son) {
  RenderProducts out;
  out.energy_frames = to_energy_basis(traj, pm.basis);
  out.frequencies = map_frequencies(pm.basis, son.params);
  out.audio = render_binaural(out.energy_frames, out.frequencies.hz, son.params, &out.info);
  out.coherence = channel_coherence_metric(out.audio, son.coherence_window);
  return out;
}

inline void cmd_render(const RunConfig& cfg, std::ostream* log = nullptr) {
  if (!cfg.dynamics || !cfg.sonification) {
    throw ConfigError("render needs dynamics and sonification blocks");
  }
  const CommandContext ctx = make_context(cfg, log);
  const PreparedModel pm = prepare_model(cfg.model);

  StateTrajectory traj;
  const fs::path store = ctx.file("trajectory.oqs");
  if (fs::exists(store)) {
    traj = read_trajectory(store);
    if (traj.dim() != pm.model.dim() ||
        static_cast<std::int64_t>(traj.size()) != cfg.dynamics->grid.frame_count()) {
      throw IoError("trajectory store " + store.string() + " does not match this config");
    }
    ctx.note("render: reusing " + store.string());
  } else {
    traj = evolve_and_write(cfg, pm, ctx);
  }

  const RenderProducts prod = render_trajectory(traj, pm, *cfg.sonification);
  for (const auto& w : prod.info.warnings) ctx.note("warning: " + w);

  const auto& p = cfg.sonification->params;
  YAML::Emitter meta;
  meta.SetDoublePrecision(17);
  meta << YAML::BeginMap;
  meta << YAML::Key << "f0" << YAML::Value << p.f0;
  meta << YAML::Key << "energy_shift" << YAML::Value << prod.frequencies.shift;
  meta << YAML::Key << "frequencies_hz" << YAML::Value << YAML::Flow << prod.frequencies.hz;
  meta << YAML::Key << "energies" << YAML::Value << YAML::Flow
       << std::vector<double>(pm.basis.energies.data(), pm.basis.energies.data() + pm.basis.rank);
  meta << YAML::Key << "dilation" << YAML::Value << prod.info.dilation;
  meta << YAML::Key << "normalization" << YAML::Value << prod.info.normalization;
  meta << YAML::Key << "amplitude_floor" << YAML::Value << p.amplitude_floor;
  meta << YAML::Key << "headroom" << YAML::Value << p.headroom;
  meta << YAML::Key << "sample_rate" << YAML::Value << p.sample_rate;
  meta << YAML::Key << "duration" << YAML::Value << p.duration;
  meta << YAML::Key << "samples" << YAML::Value << prod.audio.size();
  meta << YAML::Key << "max_phase_rate" << YAML::Value << prod.info.max_phase_rate;
  meta << YAML::Key << "warnings" << YAML::Value << YAML::BeginSeq;
  for (const auto& w : prod.info.warnings) meta << w;
  meta << YAML::EndSeq;
  meta << YAML::EndMap;

  write_wav(prod.audio, ctx.file("render.wav"), ctx.overwrite);
  write_text(yaml_text(meta), ctx.file("render.yaml"), ctx.overwrite);
  write_text(to_csv({"time", "coherence"}, {prod.coherence.time, prod.coherence.value}),
             ctx.file("coherence.csv"), ctx.overwrite);
  write_text(emit_config(cfg), ctx.file("render.config.yaml"), ctx.overwrite);
  ctx.note("render: " + format_double(prod.audio.seconds()) + " s of audio written to " +
           ctx.file("render.wav").string());
}

// Process exit codes.
enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalError = 2, kIoError = 3 };

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kIoError;
  if (dynamic_cast<const NumericalFailure*>(&e) || dynamic_cast<const HermiticityError*>(&e)) {
    return kNumericalError;
  }
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kIoError;
  return kConfigError;
}

}  // namespace oqs::cli
