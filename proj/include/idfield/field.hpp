#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idfield/geometry.hpp"

namespace idfield {

struct Counters {
  std::uint64_t summands = 0;
  std::uint64_t random_variables = 0;
};

/// Field values at a list of target points plus how they were produced.
struct FieldRealization {
  std::vector<double> values;  // one per target, in target order
  std::string method;
  std::string measure;
  std::string kernel;
  int n = 0;            // step resolution or finest wavelet level
  double epsilon = 0.0; // requested accuracy, 0 when n was given directly
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  Counters counters;
  double coefficient_ms = 0.0;
  double synthesis_ms = 0.0;
};

}  // namespace idfield
