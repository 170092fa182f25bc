#include "prf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "prf/errors.hpp"

namespace prf {

double CellView::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
    return v;
}

bool CellView::contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] <= x[i] && x[i] < upper[i])) return false;
    }
    return true;
}

Partition::Partition(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw ParameterError("partition dimension must be positive");
}

Partition Partition::unit(std::size_t dim) {
    Partition p(dim);
    std::vector<double> lo(dim, 0.0), hi(dim, 1.0);
    p.add_cell(lo, hi);
    return p;
}

void Partition::clear(std::size_t dim) {
    if (dim == 0) throw ParameterError("partition dimension must be positive");
    dim_ = dim;
    n_cells_ = 0;
    lower_.clear();
    upper_.clear();
    nodes_.clear();
    slot_.clear();
    locator_ = Locator::Scan;
}

CellView Partition::cell(std::size_t i) const {
    return {std::span<const double>(lower_.data() + i * dim_, dim_),
            std::span<const double>(upper_.data() + i * dim_, dim_)};
}

Cell Partition::cell_copy(std::size_t i) const {
    const auto c = cell(i);
    return {{c.lower.begin(), c.lower.end()}, {c.upper.begin(), c.upper.end()}};
}

std::span<double> Partition::mutable_lower(std::size_t i) {
    return {lower_.data() + i * dim_, dim_};
}

std::span<double> Partition::mutable_upper(std::size_t i) {
    return {upper_.data() + i * dim_, dim_};
}

std::size_t Partition::add_cell(std::span<const double> lower, std::span<const double> upper) {
    if (lower.size() != dim_ || upper.size() != dim_) {
        throw ParameterError("cell dimension does not match partition dimension");
    }
    double vol = 1.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        if (!(0.0 <= lower[i] && lower[i] < upper[i] && upper[i] <= 1.0)) {
            std::ostringstream os;
            os << "invalid cell side [" << lower[i] << ", " << upper[i] << ") on coordinate " << i;
            throw ParameterError(os.str());
        }
        vol *= upper[i] - lower[i];
    }
    if (vol < kMinVolume) throw ParameterError("cell volume below 1e-300");
    lower_.insert(lower_.end(), lower.begin(), lower.end());
    upper_.insert(upper_.end(), upper.begin(), upper.end());
    slot_.emplace_back(-1, 0);
    return n_cells_++;
}

void Partition::mark_breakpoints() {
    if (dim_ != 1) throw InvariantError("breakpoint locator requires d = 1");
    locator_ = Locator::Breakpoints;
}

void Partition::mark_grid(double offset, double width) {
    if (dim_ != 1) throw InvariantError("grid locator requires d = 1");
    grid_offset_ = offset;
    grid_width_ = width;
    locator_ = Locator::Grid;
}

std::size_t Partition::split_cell(std::size_t c, std::size_t coord, double t) {
    if (c >= n_cells_ || coord >= dim_) throw InvariantError("split_cell index out of range");
    const double lo = lower_[c * dim_ + coord];
    const double hi = upper_[c * dim_ + coord];
    if (!(lo < t && t < hi)) throw InvariantError("split point outside the cell side");

    // New right cell: copy of c with lower[coord] = t.
    const std::size_t right = n_cells_;
    lower_.resize(lower_.size() + dim_);
    upper_.resize(upper_.size() + dim_);
    std::copy_n(lower_.begin() + static_cast<std::ptrdiff_t>(c * dim_), dim_,
                lower_.begin() + static_cast<std::ptrdiff_t>(right * dim_));
    std::copy_n(upper_.begin() + static_cast<std::ptrdiff_t>(c * dim_), dim_,
                upper_.begin() + static_cast<std::ptrdiff_t>(right * dim_));
    lower_[right * dim_ + coord] = t;
    upper_[c * dim_ + coord] = t;
    ++n_cells_;
    if (cell(c).volume() < kMinVolume || cell(right).volume() < kMinVolume) {
        throw NumericError("cell volume below 1e-300 after split");
    }

    const auto node = static_cast<std::int64_t>(nodes_.size());
    nodes_.push_back({static_cast<std::uint32_t>(coord), t,
                      {~static_cast<std::int64_t>(c), ~static_cast<std::int64_t>(right)}});
    const auto [parent, side] = slot_[c];
    if (parent >= 0) nodes_[static_cast<std::size_t>(parent)].child[side] = node;
    slot_[c] = {node, 0};
    slot_.emplace_back(node, 1);
    locator_ = Locator::Tree;
    return right;
}

void Partition::check_point(std::span<const double> x) const {
    if (x.size() != dim_) throw DomainError("point dimension does not match partition dimension");
    for (std::size_t i = 0; i < dim_; ++i) {
        if (!(x[i] >= 0.0 && x[i] < 1.0)) {
            std::ostringstream os;
            os << "coordinate " << i << " = " << x[i] << " is outside [0,1)";
            throw DomainError(os.str());
        }
    }
}

std::size_t Partition::locate_scan(std::span<const double> x) const {
    check_point(x);
    for (std::size_t c = 0; c < n_cells_; ++c) {
        if (cell(c).contains(x)) return c;
    }
    throw InvariantError("no cell contains the point; partition is corrupt");
}

std::size_t Partition::locate_fast(std::span<const double> x) const {
    switch (locator_) {
        case Locator::Grid: {
            const double v = x[0];
            auto i = static_cast<std::size_t>(
                std::max(0.0, std::floor((v - grid_offset_) / grid_width_) + 1.0));
            if (v < grid_offset_) i = 0;
            i = std::min(i, n_cells_ - 1);
            while (i > 0 && v < lower_[i]) --i;
            while (i + 1 < n_cells_ && v >= upper_[i]) ++i;
            return i;
        }
        case Locator::Breakpoints: {
            const auto it = std::upper_bound(upper_.begin(), upper_.begin() + static_cast<std::ptrdiff_t>(n_cells_), x[0]);
            return static_cast<std::size_t>(it - upper_.begin());
        }
        case Locator::Tree: {
            std::int64_t node = 0;
            for (;;) {
                const SplitNode& nd = nodes_[static_cast<std::size_t>(node)];
                const std::int64_t next = nd.child[x[nd.coord] >= nd.threshold ? 1 : 0];
                if (next < 0) return static_cast<std::size_t>(~next);
                node = next;
            }
        }
        case Locator::Scan:
            break;
    }
    return locate_scan(x);
}

std::size_t Partition::locate(std::span<const double> x) const {
    check_point(x);
    if (n_cells_ == 1) {
        if (!cell(0).contains(x)) throw InvariantError("no cell contains the point; partition is corrupt");
        return 0;
    }
    const std::size_t c = locate_fast(x);
    if (c >= n_cells_ || !cell(c).contains(x)) {
        throw InvariantError("no cell contains the point; partition is corrupt");
    }
    return c;
}

FaceDistances Partition::cell_bounds_at(std::span<const double> x) const {
    const CellView c = cell(locate(x));
    FaceDistances fd{std::vector<double>(dim_), std::vector<double>(dim_)};
    for (std::size_t i = 0; i < dim_; ++i) {
        fd.alpha[i] = x[i] - c.lower[i];
        fd.beta[i] = c.upper[i] - x[i];
    }
    return fd;
}

void Partition::validate(std::span<const double> probes) const {
    if (n_cells_ == 0) throw InvariantError("partition has no cells");
    std::vector<double> vols(n_cells_);
    for (std::size_t c = 0; c < n_cells_; ++c) {
        const CellView cv = cell(c);
        for (std::size_t i = 0; i < dim_; ++i) {
            if (!(0.0 <= cv.lower[i] && cv.lower[i] < cv.upper[i] && cv.upper[i] <= 1.0)) {
                throw InvariantError("cell side violates 0 <= lower < upper <= 1");
            }
        }
        vols[c] = cv.volume();
    }
    std::sort(vols.begin(), vols.end());
    double total = 0.0, comp = 0.0;
    for (double v : vols) {
        const double y = v - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "cell volumes sum to " << total << ", not 1";
        throw InvariantError(os.str());
    }
    if (probes.size() % dim_ != 0) throw ParameterError("probe array length is not a multiple of d");
    for (std::size_t p = 0; p < probes.size(); p += dim_) {
        const auto x = probes.subspan(p, dim_);
        std::size_t hits = 0;
        for (std::size_t c = 0; c < n_cells_; ++c) hits += cell(c).contains(x) ? 1 : 0;
        if (hits != 1) throw InvariantError("probe point is not in exactly one cell");
        if (locate(x) != locate_scan(x)) throw InvariantError("fast locator disagrees with scan");
    }
}

}  // namespace prf
