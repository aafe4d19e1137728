#pragma once

#include <cstdint>
#include <vector>

#include "mks/errors.hpp"

namespace mks {

// Row-major 2D grid, periodic in both directions by convention of every
// consumer. (x, y) indexes column x of row y.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height),
          cells_(static_cast<std::size_t>(check_dims(width, height)), fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return cells_.size(); }

    T& at(int x, int y) { return cells_[idx(x, y)]; }
    const T& at(int x, int y) const { return cells_[idx(x, y)]; }

    // Periodic access: any integer coordinate is wrapped into range.
    const T& wrap(int x, int y) const {
        x %= width_;  if (x < 0) x += width_;
        y %= height_; if (y < 0) y += height_;
        return cells_[idx(x, y)];
    }

    std::vector<T>& cells() { return cells_; }
    const std::vector<T>& cells() const { return cells_; }

    T* data() { return cells_.data(); }
    const T* data() const { return cells_.data(); }

    bool same_shape(const Grid& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static long check_dims(int w, int h) {
        if (w <= 0 || h <= 0)
            throw ArgumentError("grid dimensions must be positive");
        return static_cast<long>(w) * h;
    }
    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> cells_;
};

// Binary occupancy grid: 1 = solid, 0 = void.
using UnitCell = Grid<std::uint8_t>;

// Real scalar field (pre-threshold Gaussian field, correlation values, ...).
using RealField = Grid<double>;

// Binary indicator for one local state h (0 void, 1 solid, 2 interface).
struct PhaseMask {
    Grid<std::uint8_t> grid;
    int phase_id = 0;

    int width() const { return grid.width(); }
    int height() const { return grid.height(); }
};

// True iff every pixel is exactly 0 or 1.
template <typename G>
bool is_binary(const G& grid) {
    for (auto v : grid.cells())
        if (v != 0 && v != 1) return false;
    return true;
}

// Solid pixel count divided by total pixel count.
double volume_fraction(const Grid<std::uint8_t>& grid);
double volume_fraction(const PhaseMask& mask);

} // namespace mks
