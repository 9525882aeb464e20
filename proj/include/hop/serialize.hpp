#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hop/grad_check.hpp"
#include "hop/tensor.hpp"

namespace hop {

// Binary tensor container, little-endian:
//   magic "TNS1"
//   u32 count
//   per entry: u32 name_len, name bytes, u32 ndim, u32 dims[ndim], f64 payload
// Used for checkpoints and hint-set interchange. See docs/formats.md.
void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, Tensor>>& entries);
std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path);

// Named-parameter checkpoints on top of the container. Loading matches by
// name and shape and copies values in place; unknown or missing names throw.
void save_checkpoint(const std::string& path, const Params& params);
void load_checkpoint(const std::string& path, Params& params);

// Binary P6 image; rgb is [rows*cols, 3] in [0,1], row-major over the grid.
void write_ppm(const std::string& path, const Tensor& rgb, int rows, int cols);

// Shortest round-trip decimal text for a double, locale-independent.
std::string fmt_double(double v);

}  // namespace hop
