// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Text checkpoints holding one or more named networks:
//
//   barycoal-checkpoint v1
//   stage <tag>
//   seed <u64>
//   networks <count>
//   network <name>
//   noise <gaussian|uniform|none> <dim>
//   layers <count>
//   dense <in> <out> <activation>        (one line per layer)
//   ternary <delta> <scale>              (one line per layer, ternary only)
//   weight <l> <v> <v> ...               (row-major, one line per layer)
//   bias <l> <v> <v> ...
//   end
//
// Reals are written with 17 significant digits and round-trip exactly.

#pragma once

#include "barycoal/adversarial.hpp"
#include "barycoal/ternary.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace barycoal {

struct TernaryRecord {
  double delta;
  double scale;
};

struct NamedNetwork {
  std::string name;
  MLPParams params;
  std::optional<NoisePrior> noise;    // generators only
  std::vector<TernaryRecord> ternary;  // empty unless ternary

  GeneratorModel generator() const;  // throws ParseError without a noise prior
  CriticModel critic() const { return {params}; }
};

struct Checkpoint {
  std::string stage;
  std::uint64_t seed = 0;
  std::vector<NamedNetwork> networks;

  const NamedNetwork& get(const std::string& name) const;  // throws ParseError
  void add_generator(const std::string& name, const GeneratorModel& g);
  void add_critic(const std::string& name, const CriticModel& c);
  void add_ternary_generator(const std::string& name, const TernaryGenerator& g);
};

std::string serialize_checkpoint(const Checkpoint& c);
Checkpoint parse_checkpoint(const std::string& text);  // ParseError names the line
void write_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

// Rebuilds a ternary generator (full-precision weights plus thresholds).
TernaryGenerator ternary_generator(const NamedNetwork& n);

}  // namespace barycoal
