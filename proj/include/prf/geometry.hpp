#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace prf {

// Smallest cell volume accepted; BPRF cells shrink geometrically with depth.
inline constexpr double kMinVolume = 1e-300;

// Read-only view of one cell prod_i [lower_i, upper_i).
struct CellView {
    std::span<const double> lower;
    std::span<const double> upper;

    std::size_t dim() const { return lower.size(); }
    double volume() const;
    bool contains(std::span<const double> x) const;
};

// Owning cell, for building partitions by hand and for tests.
struct Cell {
    std::vector<double> lower;
    std::vector<double> upper;

    CellView view() const { return {lower, upper}; }
    double volume() const { return view().volume(); }
};

// Per-coordinate distances from x to its cell's faces: alpha = x - A, beta = B - x.
struct FaceDistances {
    std::vector<double> alpha;
    std::vector<double> beta;
};

// Node of a recorded split tree. A child >= 0 is a node index; a child < 0
// encodes the cell index ~child.
struct SplitNode {
    std::uint32_t coord;
    double threshold;
    std::int64_t child[2];
};

// A partition of [0,1)^d into half-open hyperrectangles, stored flat. The
// optional locator (regular grid, sorted breakpoints or split tree) is a fast
// path; the linear scan is always available and is the reference.
class Partition {
public:
    enum class Locator { Scan, Grid, Breakpoints, Tree };

    explicit Partition(std::size_t dim = 1);

    static Partition unit(std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return n_cells_; }
    CellView cell(std::size_t i) const;
    Cell cell_copy(std::size_t i) const;
    Locator locator() const { return locator_; }

    // Index of the cell containing x. Throws DomainError if x is off the cube
    // and InvariantError if no cell contains it.
    std::size_t locate(std::span<const double> x) const;
    std::size_t locate_scan(std::span<const double> x) const;
    FaceDistances cell_bounds_at(std::span<const double> x) const;

    // Checks volume additivity and, for each probe point, unique membership.
    void validate(std::span<const double> probes = {}) const;

    // --- construction (used by the samplers) ---
    void clear(std::size_t dim);
    std::size_t add_cell(std::span<const double> lower, std::span<const double> upper);
    // 1-D only: cells are consecutive intervals in increasing order.
    void mark_breakpoints();
    // 1-D only: cell 0 is [0, offset), then width-h cells, clipped at 1.
    void mark_grid(double offset, double width);
    // Splits cell c along coord at t; c keeps the left part, the right part
    // is appended. Returns the new cell's index and records the split.
    std::size_t split_cell(std::size_t c, std::size_t coord, double t);
    std::span<double> mutable_lower(std::size_t i);
    std::span<double> mutable_upper(std::size_t i);

    const std::vector<SplitNode>& nodes() const { return nodes_; }

private:
    void check_point(std::span<const double> x) const;
    std::size_t locate_fast(std::span<const double> x) const;

    std::size_t dim_;
    std::size_t n_cells_ = 0;
    std::vector<double> lower_;
    std::vector<double> upper_;
    Locator locator_ = Locator::Scan;
    double grid_offset_ = 0.0;
    double grid_width_ = 0.0;
    // Split-tree state: slot_[c] = (node, side) pointing at cell c, or node -1 for the root.
    std::vector<SplitNode> nodes_;
    std::vector<std::pair<std::int64_t, int>> slot_;
};

}  // namespace prf
