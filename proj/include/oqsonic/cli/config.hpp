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

// Run configuration: YAML text <-> RunConfig.
//
// Every key is validated against the schema of its block; unknown keys are
// errors that name the closest valid key. `emit_config` writes a config with
// all defaults spelled out, which parses back to the same RunConfig.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "oqsonic/dynamics.hpp"
#include "oqsonic/models.hpp"
#include "oqsonic/sonify.hpp"

namespace oqs::cli {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = -1, int column = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line + 1) + ", column " +
                              std::to_string(column + 1) + ")"
                        : what),
        line_(line),
        column_(column) {}
  // 0-based; -1 when unknown.
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

enum class ModelKind { kDoubleWell, kXXZ, kQubitDamping };
enum class InitKind { kEigenstate, kSymmetricCombo, kProductSpins, kCustom, kMaximallyMixed };
enum class DynamicsKind { kLindblad, kSse };

struct ModelConfig {
  ModelKind kind = ModelKind::kDoubleWell;
  DoubleWellParams well;
  GridSpec grid;
  Index rank = 16;
  XXZParams xxz;
  double qubit_gamma = 1.0;

  Index working_dim() const {
    switch (kind) {
      case ModelKind::kDoubleWell: return rank;
      case ModelKind::kXXZ: return Index{1} << xxz.n_sites;
      case ModelKind::kQubitDamping: return 2;
    }
    return 0;
  }
};

struct SpinAngles {
  double theta = 0.0;
  double phi = 0.0;
};

struct InitialStateConfig {
  InitKind kind = InitKind::kEigenstate;
  int n = 0;
  std::vector<int> levels{0, 1};
  double relative_phase = 0.0;
  std::vector<SpinAngles> angles;
  std::vector<Complex> amplitudes;
};

struct DynamicsConfig {
  DynamicsKind kind = DynamicsKind::kLindblad;
  TimeGrid grid;
  EnsembleSpec ensemble;
  bool step_halving_check = false;
};

struct SonificationConfig {
  SonificationParams params;
  double coherence_window = 0.1;
};

struct OutputConfig {
  std::string dir = "out";
  bool overwrite = false;
};

struct RunConfig {
  std::string name = "run";
  ModelConfig model;
  InitialStateConfig initial_state;
  std::optional<DynamicsConfig> dynamics;
  std::optional<SonificationConfig> sonification;
  OutputConfig outputs;
};

// ---------------------------------------------------------------------------

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string nearest_key(const std::string& key, const std::vector<std::string>& allowed) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& k : allowed) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

namespace detail {

inline std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

// Typed, schema-checked view of one YAML mapping.
class Block {
 public:
  Block(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) fail(path_.empty() ? "document" : path_, "must be a mapping", node_);
  }

  void allow(const std::vector<std::string>& keys) const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const auto key = it->first.as<std::string>();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("unknown key '" + join_path(path_, key) + "'; did you mean '" +
                              join_path(path_, nearest_key(key, keys)) + "'?",
                          it->first.Mark().line, it->first.Mark().column);
      }
    }
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
  std::string path(const std::string& key) const { return join_path(path_, key); }

  YAML::Node child(const std::string& key) const { return node_[key]; }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    const YAML::Node n = node_[key];
    if (!n) return fallback;
    return convert<T>(n, path(key));
  }

  template <typename T>
  T require(const std::string& key) const {
    const YAML::Node n = node_[key];
    if (!n) fail(path(key), "is required", node_);
    return convert<T>(n, path(key));
  }

  Complex get_complex(const std::string& key, Complex fallback) const {
    const YAML::Node n = node_[key];
    if (!n) return fallback;
    return to_complex(n, path(key));
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& msg,
                                const YAML::Node& at) {
    const YAML::Mark m = at.Mark();
    throw ConfigError(path + ": " + msg, m.line, m.column);
  }

  template <typename T>
  static T convert(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) fail(path, "expected a scalar value", n);
    try {
      return n.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(path, "cannot convert '" + n.Scalar() + "'", n);
    }
  }

  static Complex to_complex(const YAML::Node& n, const std::string& path) {
    if (n.IsSequence()) {
      if (n.size() != 2) fail(path, "complex values are [re, im]", n);
      return {convert<double>(n[0], path + "[0]"), convert<double>(n[1], path + "[1]")};
    }
    return {convert<double>(n, path), 0.0};
  }

 private:
  YAML::Node node_;
  std::string path_;
};

template <typename Enum>
Enum parse_enum(const Block& b, const std::string& key, const std::string& fallback,
                const std::vector<std::pair<std::string, Enum>>& table) {
  const auto text = b.get<std::string>(key, fallback);
  for (const auto& [name, value] : table) {
    if (name == text) return value;
  }
  std::vector<std::string> names;
  for (const auto& e : table) names.push_back(e.first);
  Block::fail(b.path(key), "unknown value '" + text + "'; did you mean '" +
                               nearest_key(text, names) + "'?",
              b.has(key) ? b.child(key) : YAML::Node());
}

inline const std::vector<std::pair<std::string, ModelKind>> kModelKinds = {
    {"double_well", ModelKind::kDoubleWell},
    {"xxz", ModelKind::kXXZ},
    {"qubit_damping", ModelKind::kQubitDamping}};
inline const std::vector<std::pair<std::string, InitKind>> kInitKinds = {
    {"eigenstate", InitKind::kEigenstate},
    {"symmetric_combo", InitKind::kSymmetricCombo},
    {"product_spins", InitKind::kProductSpins},
    {"custom", InitKind::kCustom},
    {"maximally_mixed", InitKind::kMaximallyMixed}};
inline const std::vector<std::pair<std::string, DynamicsKind>> kDynamicsKinds = {
    {"lindblad", DynamicsKind::kLindblad}, {"sse", DynamicsKind::kSse}};

template <typename Enum>
std::string enum_name(Enum v, const std::vector<std::pair<std::string, Enum>>& table) {
  for (const auto& [name, value] : table) {
    if (value == v) return name;
  }
  return "?";
}

// Runs a builder-level validator and rethrows its message against a path.
template <typename Fn>
void validate_at(const std::string& path, const YAML::Node& at, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    Block::fail(path, e.what(), at);
  }
}

inline ModelConfig parse_model(const YAML::Node& node) {
  const Block b(node, "model");
  ModelConfig m;
  m.kind = parse_enum(b, "type", "double_well", kModelKinds);
  switch (m.kind) {
    case ModelKind::kDoubleWell: {
      b.allow({"type", "c4", "c2", "gamma", "kT", "mass", "rank", "grid"});
      m.well.c4 = b.get("c4", m.well.c4);
      m.well.c2 = b.get("c2", m.well.c2);
      m.well.gamma = b.get("gamma", m.well.gamma);
      m.well.kT = b.get("kT", m.well.kT);
      m.well.mass = b.get("mass", m.well.mass);
      m.rank = b.get<Index>("rank", m.rank);
      m.grid.mass = m.well.mass;
      if (b.has("grid")) {
        const Block g(b.child("grid"), "model.grid");
        g.allow({"n_points", "x_max"});
        m.grid.n_points = g.get<Index>("n_points", m.grid.n_points);
        m.grid.x_max = g.get("x_max", m.grid.x_max);
      }
      validate_at("model", node, [&] {
        m.well.validate();
        m.grid.validate();
      });
      if (m.rank < 2 || m.rank > m.grid.n_points) {
        Block::fail("model.rank", "must lie in [2, grid.n_points]", node);
      }
      break;
    }
    case ModelKind::kXXZ: {
      b.allow({"type", "n_sites", "J", "delta", "alpha_l", "beta_l", "alpha_r", "beta_r", "r",
               "phi"});
      auto& x = m.xxz;
      x.n_sites = b.get("n_sites", x.n_sites);
      x.J = b.get("J", x.J);
      x.delta = b.get("delta", x.delta);
      x.alpha_l = b.get_complex("alpha_l", x.alpha_l);
      x.beta_l = b.get_complex("beta_l", x.beta_l);
      x.alpha_r = b.get_complex("alpha_r", x.alpha_r);
      x.beta_r = b.get_complex("beta_r", x.beta_r);
      x.r = b.get("r", x.r);
      x.phi = b.get("phi", x.phi);
      validate_at("model", node, [&] { x.validate(); });
      break;
    }
    case ModelKind::kQubitDamping: {
      b.allow({"type", "gamma"});
      m.qubit_gamma = b.get("gamma", m.qubit_gamma);
      if (!(m.qubit_gamma >= 0.0)) Block::fail("model.gamma", "must be non-negative", node);
      break;
    }
  }
  return m;
}

inline InitialStateConfig parse_initial_state(const YAML::Node& node, const ModelConfig& model) {
  InitialStateConfig s;
  if (!node) return s;
  const Block b(node, "initial_state");
  s.kind = parse_enum(b, "type", "eigenstate", kInitKinds);
  const Index dim = model.working_dim();
  switch (s.kind) {
    case InitKind::kEigenstate:
      b.allow({"type", "n"});
      s.n = b.get("n", s.n);
      if (s.n < 0 || s.n >= dim) Block::fail(b.path("n"), "level index out of range", node);
      break;
    case InitKind::kSymmetricCombo: {
      b.allow({"type", "levels", "relative_phase"});
      if (b.has("levels")) {
        const YAML::Node lv = b.child("levels");
        if (!lv.IsSequence() || lv.size() != 2) {
          Block::fail(b.path("levels"), "expected [n1, n2]", lv);
        }
        s.levels = {Block::convert<int>(lv[0], b.path("levels[0]")),
                    Block::convert<int>(lv[1], b.path("levels[1]"))};
      }
      s.relative_phase = b.get("relative_phase", s.relative_phase);
      for (int l : s.levels) {
        if (l < 0 || l >= dim) Block::fail(b.path("levels"), "level index out of range", node);
      }
      if (s.levels[0] == s.levels[1]) Block::fail(b.path("levels"), "levels must differ", node);
      break;
    }
    case InitKind::kProductSpins: {
      b.allow({"type", "angles"});
      if (model.kind == ModelKind::kDoubleWell) {
        Block::fail(b.path("type"), "product_spins requires a spin model", node);
      }
      const int sites = model.kind == ModelKind::kXXZ ? model.xxz.n_sites : 1;
      const YAML::Node a = b.child("angles");
      if (!a || !a.IsSequence() || static_cast<int>(a.size()) != sites) {
        Block::fail(b.path("angles"),
                    "expected one [theta, phi] pair per site (" + std::to_string(sites) + ")",
                    a ? a : node);
      }
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string p = b.path("angles[" + std::to_string(i) + "]");
        if (!a[i].IsSequence() || a[i].size() != 2) Block::fail(p, "expected [theta, phi]", a[i]);
        s.angles.push_back({Block::convert<double>(a[i][0], p), Block::convert<double>(a[i][1], p)});
      }
      break;
    }
    case InitKind::kCustom: {
      b.allow({"type", "amplitudes"});
      const YAML::Node a = b.child("amplitudes");
      if (!a || !a.IsSequence() || static_cast<Index>(a.size()) != dim) {
        Block::fail(b.path("amplitudes"), "expected " + std::to_string(dim) + " amplitudes",
                    a ? a : node);
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        s.amplitudes.push_back(
            Block::to_complex(a[i], b.path("amplitudes[" + std::to_string(i) + "]")));
        norm += std::norm(s.amplitudes.back());
      }
      if (!(norm > 0.0)) Block::fail(b.path("amplitudes"), "state has zero norm", a);
      break;
    }
    case InitKind::kMaximallyMixed:
      b.allow({"type"});
      break;
  }
  return s;
}

inline DynamicsConfig parse_dynamics(const YAML::Node& node) {
  const Block b(node, "dynamics");
  DynamicsConfig d;
  d.kind = parse_enum(b, "method", "lindblad", kDynamicsKinds);
  if (d.kind == DynamicsKind::kSse) {
    b.allow({"method", "t_start", "t_end", "dt", "frame_stride", "n_traj", "seed"});
  } else {
    b.allow({"method", "t_start", "t_end", "dt", "frame_stride", "step_halving_check"});
  }
  d.grid.t_start = b.get("t_start", 0.0);
  d.grid.t_end = b.require<double>("t_end");
  d.grid.dt = b.get("dt", 0.01);
  d.grid.frame_stride = b.get<std::int64_t>("frame_stride", 1);
  d.ensemble.n_traj = b.get<std::int64_t>("n_traj", d.ensemble.n_traj);
  d.ensemble.base_seed = b.get<std::uint64_t>("seed", d.ensemble.base_seed);
  d.step_halving_check = b.get("step_halving_check", false);
  validate_at("dynamics", node, [&] {
    d.grid.validate();
    d.ensemble.validate();
  });
  return d;
}

inline SonificationConfig parse_sonification(const YAML::Node& node) {
  SonificationConfig s;
  if (!node) return s;
  const Block b(node, "sonification");
  b.allow({"f0", "sample_rate", "duration", "amplitude_floor", "headroom", "coherence_window"});
  auto& p = s.params;
  p.f0 = b.get("f0", p.f0);
  p.sample_rate = b.get<std::int64_t>("sample_rate", p.sample_rate);
  p.duration = b.get("duration", p.duration);
  p.amplitude_floor = b.get("amplitude_floor", p.amplitude_floor);
  p.headroom = b.get("headroom", p.headroom);
  s.coherence_window = b.get("coherence_window", s.coherence_window);
  validate_at("sonification", node, [&] { p.validate(); });
  if (s.coherence_window < 0.01 || s.coherence_window > p.duration) {
    Block::fail("sonification.coherence_window", "must lie in [0.01, duration]", node);
  }
  return s;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("syntax error: " + e.msg, e.mark.line, e.mark.column);
  }
  if (!root || root.IsNull()) throw ConfigError("empty configuration");
  const detail::Block top(root, "");
  top.allow({"name", "model", "initial_state", "dynamics", "sonification", "outputs"});

  RunConfig cfg;
  cfg.name = top.get<std::string>("name", cfg.name);
  if (!top.has("model")) detail::Block::fail("model", "is required", root);
  cfg.model = detail::parse_model(top.child("model"));
  cfg.initial_state = detail::parse_initial_state(top.child("initial_state"), cfg.model);
  if (top.has("dynamics")) cfg.dynamics = detail::parse_dynamics(top.child("dynamics"));
  if (top.has("sonification") && !cfg.dynamics) {
    detail::Block::fail("sonification", "requires a dynamics block", top.child("sonification"));
  }
  if (cfg.dynamics) cfg.sonification = detail::parse_sonification(top.child("sonification"));
  if (cfg.dynamics && cfg.dynamics->kind == DynamicsKind::kSse &&
      cfg.initial_state.kind == InitKind::kMaximallyMixed) {
    detail::Block::fail("initial_state.type", "sse dynamics needs a pure initial state",
                        top.child("initial_state"));
  }
  if (top.has("outputs")) {
    const detail::Block o(top.child("outputs"), "outputs");
    o.allow({"dir", "overwrite"});
    cfg.outputs.dir = o.get<std::string>("dir", cfg.outputs.dir);
    cfg.outputs.overwrite = o.get("overwrite", cfg.outputs.overwrite);
  }
  return cfg;
}

namespace detail {

inline void emit_complex(YAML::Emitter& out, Complex z) {
  if (z.imag() == 0.0) {
    out << z.real();
  } else {
    out << YAML::Flow << YAML::BeginSeq << z.real() << z.imag() << YAML::EndSeq;
  }
}

}  // namespace detail

// Canonical YAML with every default materialized.
inline std::string emit_config(const RunConfig& cfg) {
  using detail::enum_name;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << cfg.name;

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  const auto& m = cfg.model;
  out << YAML::Key << "type" << YAML::Value << enum_name(m.kind, detail::kModelKinds);
  switch (m.kind) {
    case ModelKind::kDoubleWell:
      out << YAML::Key << "c4" << YAML::Value << m.well.c4;
      out << YAML::Key << "c2" << YAML::Value << m.well.c2;
      out << YAML::Key << "gamma" << YAML::Value << m.well.gamma;
      out << YAML::Key << "kT" << YAML::Value << m.well.kT;
      out << YAML::Key << "mass" << YAML::Value << m.well.mass;
      out << YAML::Key << "rank" << YAML::Value << m.rank;
      out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "n_points" << YAML::Value << m.grid.n_points;
      out << YAML::Key << "x_max" << YAML::Value << m.grid.x_max;
      out << YAML::EndMap;
      break;
    case ModelKind::kXXZ:
      out << YAML::Key << "n_sites" << YAML::Value << m.xxz.n_sites;
      out << YAML::Key << "J" << YAML::Value << m.xxz.J;
      out << YAML::Key << "delta" << YAML::Value << m.xxz.delta;
      out << YAML::Key << "alpha_l" << YAML::Value;
      detail::emit_complex(out, m.xxz.alpha_l);
      out << YAML::Key << "beta_l" << YAML::Value;
      detail::emit_complex(out, m.xxz.beta_l);
      out << YAML::Key << "alpha_r" << YAML::Value;
      detail::emit_complex(out, m.xxz.alpha_r);
      out << YAML::Key << "beta_r" << YAML::Value;
      detail::emit_complex(out, m.xxz.beta_r);
      out << YAML::Key << "r" << YAML::Value << m.xxz.r;
      out << YAML::Key << "phi" << YAML::Value << m.xxz.phi;
      break;
    case ModelKind::kQubitDamping:
      out << YAML::Key << "gamma" << YAML::Value << m.qubit_gamma;
      break;
  }
  out << YAML::EndMap;

  const auto& s = cfg.initial_state;
  out << YAML::Key << "initial_state" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << enum_name(s.kind, detail::kInitKinds);
  switch (s.kind) {
    case InitKind::kEigenstate:
      out << YAML::Key << "n" << YAML::Value << s.n;
      break;
    case InitKind::kSymmetricCombo:
      out << YAML::Key << "levels" << YAML::Value << YAML::Flow << YAML::BeginSeq << s.levels[0]
          << s.levels[1] << YAML::EndSeq;
      out << YAML::Key << "relative_phase" << YAML::Value << s.relative_phase;
      break;
    case InitKind::kProductSpins:
      out << YAML::Key << "angles" << YAML::Value << YAML::BeginSeq;
      for (const auto& a : s.angles) {
        out << YAML::Flow << YAML::BeginSeq << a.theta << a.phi << YAML::EndSeq;
      }
      out << YAML::EndSeq;
      break;
    case InitKind::kCustom:
      out << YAML::Key << "amplitudes" << YAML::Value << YAML::BeginSeq;
      for (const auto& z : s.amplitudes) {
        out << YAML::Flow << YAML::BeginSeq << z.real() << z.imag() << YAML::EndSeq;
      }
      out << YAML::EndSeq;
      break;
    case InitKind::kMaximallyMixed:
      break;
  }
  out << YAML::EndMap;

  if (cfg.dynamics) {
    const auto& d = *cfg.dynamics;
    out << YAML::Key << "dynamics" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "method" << YAML::Value << enum_name(d.kind, detail::kDynamicsKinds);
    out << YAML::Key << "t_start" << YAML::Value << d.grid.t_start;
    out << YAML::Key << "t_end" << YAML::Value << d.grid.t_end;
    out << YAML::Key << "dt" << YAML::Value << d.grid.dt;
    out << YAML::Key << "frame_stride" << YAML::Value << d.grid.frame_stride;
    if (d.kind == DynamicsKind::kSse) {
      out << YAML::Key << "n_traj" << YAML::Value << d.ensemble.n_traj;
      out << YAML::Key << "seed" << YAML::Value << d.ensemble.base_seed;
    } else {
      out << YAML::Key << "step_halving_check" << YAML::Value << d.step_halving_check;
    }
    out << YAML::EndMap;
  }
  if (cfg.sonification) {
    const auto& p = cfg.sonification->params;
    out << YAML::Key << "sonification" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "f0" << YAML::Value << p.f0;
    out << YAML::Key << "sample_rate" << YAML::Value << p.sample_rate;
    out << YAML::Key << "duration" << YAML::Value << p.duration;
    out << YAML::Key << "amplitude_floor" << YAML::Value << p.amplitude_floor;
    out << YAML::Key << "headroom" << YAML::Value << p.headroom;
    out << YAML::Key << "coherence_window" << YAML::Value << cfg.sonification->coherence_window;
    out << YAML::EndMap;
  }
  out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << cfg.outputs.dir;
  out << YAML::Key << "overwrite" << YAML::Value << cfg.outputs.overwrite;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace oqs::cli
