#pragma once

#include <string>
#include <vector>

#include "mks/grid.hpp"

namespace mks::io {

// Reads a NumPy .npy file holding unsigned-8-bit cells of shape (N, H, W),
// C order. Values outside {0, 1} raise FormatError listing the first
// offending records.
std::vector<UnitCell> read_npy_cells(const std::string& path);

} // namespace mks::io
