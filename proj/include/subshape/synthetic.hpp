#pragma once

#include "subshape/dataset.hpp"

#include <cstdint>
#include <string>

namespace subshape {

struct BlobOptions {
  int points = 900;
  int dims = 10;
  int clusters = 3;
  double spread = 0.08;   // per-axis standard deviation
  double outlier_fraction = 0.0;
  std::uint64_t seed = 7;
};

/// Gaussian clusters with centers drawn uniformly in [0,1]^D. Points are
/// assigned round-robin so cluster sizes differ by at most one.
Dataset make_blobs(const BlobOptions& options);

/// Comma-delimited text with a "cluster" label column, readable by load_table.
std::string to_csv(const Dataset& data);

}  // namespace subshape
