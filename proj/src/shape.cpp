#include "shssa/shape.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace shssa {

std::string to_string(const IndexPair& p)
{
    return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

namespace {

void check_period(const std::optional<Coord>& t, const char* axis)
{
    if (t && (*t < 1 || *t > max_period)) {
        throw TopologyError(std::string("period along ") + axis + " must be in [1, 2^31-1], got " + std::to_string(*t));
    }
}

std::string period_string(const std::optional<Coord>& t)
{
    return t ? std::to_string(*t) : std::string("inf");
}

Coord add_axis(Coord a, Coord b, const std::optional<Coord>& period)
{
    Coord s = 0;
    if (__builtin_add_overflow(a, b, &s) || __builtin_sub_overflow(s, Coord{2}, &s)) {
        throw ArithmeticError("coordinate overflow in cyclic addition");
    }
    if (period) {
        s %= *period;
        if (s < 0) s += *period;
    }
    Coord r = 0;
    if (__builtin_add_overflow(s, Coord{1}, &r)) throw ArithmeticError("coordinate overflow in cyclic addition");
    return r;
}

} // namespace

Topology::Topology(std::optional<Coord> period_x, std::optional<Coord> period_y)
    : tx_(period_x), ty_(period_y)
{
    check_period(tx_, "x");
    check_period(ty_, "y");
}

TopologyKind Topology::kind() const noexcept
{
    if (tx_ && ty_) return TopologyKind::toroidal;
    if (tx_ || ty_) return TopologyKind::cylindrical;
    return TopologyKind::planar;
}

bool Topology::valid(const IndexPair& p) const noexcept
{
    if (p.x < 1 || p.y < 1) return false;
    if (tx_ && p.x > *tx_) return false;
    if (ty_ && p.y > *ty_) return false;
    return true;
}

std::string to_string(const Topology& t)
{
    return period_string(t.period_x()) + "," + period_string(t.period_y());
}

IndexPair cyclic_add(const IndexPair& a, const IndexPair& b, const Topology& topo)
{
    return {add_axis(a.x, b.x, topo.period_x()), add_axis(a.y, b.y, topo.period_y())};
}

Shape::Shape(Topology topo, std::vector<IndexPair> indices)
{
    if (indices.empty()) throw ShapeError("shape must be non-empty");
    for (const auto& p : indices) {
        if (!topo.valid(p)) {
            throw TopologyError("index " + to_string(p) + " is invalid under topology " + to_string(topo));
        }
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());

    BoundingBox box{indices.front(), indices.front()};
    for (const auto& p : indices) {
        box.min.x = std::min(box.min.x, p.x);
        box.min.y = std::min(box.min.y, p.y);
        box.max.x = std::max(box.max.x, p.x);
        box.max.y = std::max(box.max.y, p.y);
    }
    impl_ = std::make_shared<const Impl>(Impl{topo, std::move(indices), box});
}

std::optional<std::size_t> Shape::position(const IndexPair& p) const noexcept
{
    const auto& idx = impl_->indices;
    auto it = std::lower_bound(idx.begin(), idx.end(), p);
    if (it == idx.end() || *it != p) return std::nullopt;
    return static_cast<std::size_t>(it - idx.begin());
}

bool Shape::subset_of(const Shape& other) const
{
    if (topology() != other.topology()) throw TopologyError("subset test across different topologies");
    return std::includes(other.begin(), other.end(), begin(), end());
}

bool operator==(const Shape& a, const Shape& b)
{
    if (a.impl_ == b.impl_) return true;
    return a.topology() == b.topology() && std::ranges::equal(a.indices(), b.indices());
}

Shape minkowski_sum(const Shape& a, const Shape& b)
{
    if (a.topology() != b.topology()) {
        throw TopologyError("Minkowski sum of shapes in topologies " + to_string(a.topology()) + " and "
                            + to_string(b.topology()));
    }
    std::vector<IndexPair> out;
    out.reserve(a.size() * b.size());
    for (const auto& p : a) {
        for (const auto& q : b) out.push_back(cyclic_add(p, q, a.topology()));
    }
    return {a.topology(), std::move(out)};
}

Shape translate(const Shape& s, const IndexPair& delta)
{
    std::vector<IndexPair> out;
    out.reserve(s.size());
    for (const auto& p : s) out.push_back(cyclic_add(p, delta, s.topology()));
    return {s.topology(), std::move(out)};
}

Shape difference(const Shape& s, const Shape& removed)
{
    std::vector<IndexPair> out;
    std::ranges::set_difference(s.indices(), removed.indices(), std::back_inserter(out));
    return {s.topology(), std::move(out)};
}

std::optional<Shape> intersection(const Shape& a, const Shape& b)
{
    if (a.topology() != b.topology()) throw TopologyError("intersection across different topologies");
    std::vector<IndexPair> out;
    std::ranges::set_intersection(a.indices(), b.indices(), std::back_inserter(out));
    if (out.empty()) return std::nullopt;
    return Shape{a.topology(), std::move(out)};
}

namespace shapes {

namespace {

void check_extent(Coord first, Coord count, const std::optional<Coord>& period, const char* axis)
{
    if (count < 1) throw ShapeError(std::string("shape extent along ") + axis + " must be positive");
    if (first < 1) throw ShapeError(std::string("shape starts below 1 along ") + axis);
    if (period && first + count - 1 > *period) {
        throw TopologyError(std::string("shape extent along ") + axis + " exceeds the period "
                            + std::to_string(*period));
    }
}

} // namespace

Shape rectangle(Coord nx, Coord ny, const Topology& topo, IndexPair origin)
{
    check_extent(origin.x, nx, topo.period_x(), "x");
    check_extent(origin.y, ny, topo.period_y(), "y");
    std::vector<IndexPair> idx;
    idx.reserve(static_cast<std::size_t>(nx * ny));
    for (Coord i = 0; i < nx; ++i) {
        for (Coord j = 0; j < ny; ++j) idx.push_back({origin.x + i, origin.y + j});
    }
    return {topo, std::move(idx)};
}

Shape segment(Coord first, Coord last, std::span<const Coord> gaps, const Topology& topo)
{
    check_extent(first, last - first + 1, topo.period_x(), "x");
    std::vector<IndexPair> idx;
    for (Coord i = first; i <= last; ++i) {
        if (std::ranges::find(gaps, i) == gaps.end()) idx.push_back({i, 1});
    }
    if (idx.empty()) throw ShapeError("segment has no points left after removing gaps");
    return {topo, std::move(idx)};
}

Shape stacked(std::span<const Coord> lengths, const Topology& topo)
{
    if (lengths.empty()) throw ShapeError("stacked shape needs at least one series");
    check_extent(1, static_cast<Coord>(lengths.size()), topo.period_y(), "y");
    std::vector<IndexPair> idx;
    for (std::size_t j = 0; j < lengths.size(); ++j) {
        check_extent(1, lengths[j], topo.period_x(), "x");
        for (Coord i = 1; i <= lengths[j]; ++i) idx.push_back({i, static_cast<Coord>(j + 1)});
    }
    return {topo, std::move(idx)};
}

Shape disc(IndexPair center, double radius, const Topology& topo)
{
    if (!(radius >= 0.0)) throw ShapeError("disc radius must be non-negative");
    const auto reach = static_cast<Coord>(std::floor(radius));
    check_extent(center.x - reach, 2 * reach + 1, topo.period_x(), "x");
    check_extent(center.y - reach, 2 * reach + 1, topo.period_y(), "y");
    const double r2 = radius * radius;
    std::vector<IndexPair> idx;
    for (Coord dx = -reach; dx <= reach; ++dx) {
        for (Coord dy = -reach; dy <= reach; ++dy) {
            if (static_cast<double>(dx * dx + dy * dy) <= r2) idx.push_back({center.x + dx, center.y + dy});
        }
    }
    return {topo, std::move(idx)};
}

Shape from_mask(std::span<const std::uint8_t> mask, std::size_t nrows, std::size_t ncols, const Topology& topo)
{
    if (mask.size() != nrows * ncols) throw ShapeError("mask size does not match its dimensions");
    std::vector<IndexPair> idx;
    for (std::size_t i = 0; i < nrows; ++i) {
        for (std::size_t j = 0; j < ncols; ++j) {
            if (mask[i * ncols + j]) idx.push_back({static_cast<Coord>(i + 1), static_cast<Coord>(j + 1)});
        }
    }
    if (idx.empty()) throw ShapeError("mask selects no cells");
    return {topo, std::move(idx)};
}

} // namespace shapes

bool contains_square(const Shape& s, Coord n)
{
    if (n <= 0) return true;
    const auto& topo = s.topology();
    for (const auto& alpha : s) {
        bool ok = true;
        for (Coord i = 1; i <= n && ok; ++i) {
            for (Coord j = 1; j <= n && ok; ++j) ok = s.contains(cyclic_add({i, j}, alpha, topo));
        }
        if (ok) return true;
    }
    return false;
}

} // namespace shssa
