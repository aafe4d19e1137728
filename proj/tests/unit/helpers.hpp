#pragma once

#include <string>
#include <vector>

#include "mks/cell_rng.hpp"
#include "mks/grid.hpp"

namespace mks::test {

// Build a cell from rows like {"10", "01"}; '1' is solid.
inline UnitCell cell_from(const std::vector<std::string>& rows) {
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(rows[0].size());
    UnitCell cell(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            cell.at(x, y) = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] == '1';
    return cell;
}

inline UnitCell constant_cell(int w, int h, std::uint8_t v) {
    UnitCell cell(w, h, v);
    return cell;
}

inline UnitCell random_cell(int w, int h, double solid_prob, std::uint64_t seed) {
    Rng rng(seed);
    UnitCell cell(w, h);
    for (auto& v : cell.cells()) v = rng.uniform() < solid_prob ? 1 : 0;
    return cell;
}

// Vertical stripes: solid where (x / stripe_width) is even. Stripes run
// along y, so the layer normal is the x axis.
inline UnitCell stripes_normal_x(int w, int h, int stripe_width) {
    UnitCell cell(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            cell.at(x, y) = (x / stripe_width) % 2 == 0 ? 1 : 0;
    return cell;
}

// Horizontal stripes: layer normal is the y axis; layers run along x.
inline UnitCell stripes_normal_y(int w, int h, int stripe_height) {
    UnitCell cell(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            cell.at(x, y) = (y / stripe_height) % 2 == 0 ? 1 : 0;
    return cell;
}

} // namespace mks::test
