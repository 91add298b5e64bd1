#pragma once

#include <filesystem>
#include <iosfwd>

#include "asyncts/network.hpp"

namespace asyncts {

// Text checkpoint, one token group per line:
//
//   asyncts-checkpoint 1
//   input_dim <n>
//   lstm_layers <n>
//   hidden_dim <n>
//   fc_dims <d1> <d2> ... 1
//   version <n>
//   segments <count>
//   <name> <offset> <rows> <cols>      (count lines, layout order)
//   values <count>
//   <hexfloat>                         (count lines)
//
// Values are written as C99 hexadecimal floats so a load reproduces the exact
// bits that were saved.
struct Checkpoint {
  NetworkConfig network;
  ParameterVector params;
};

void write_checkpoint(std::ostream& out, const ParameterVector& params, const NetworkConfig& cfg);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ParameterVector& params, const NetworkConfig& cfg);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace asyncts
