#pragma once

#include <compare>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shssa/error.hpp"

namespace shssa {

using Coord = std::int64_t;

/// Largest finite period accepted by Topology.
inline constexpr Coord max_period = 2147483647;

/// 1-based lattice index. Member order gives the x-major lexicographic order used everywhere.
struct IndexPair {
    Coord x = 1;
    Coord y = 1;

    friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

std::string to_string(const IndexPair& p);

enum class TopologyKind { planar, cylindrical, toroidal };

/// Per-axis periods (T_x, T_y); an empty optional is an infinite (non-circular) axis.
class Topology {
public:
    Topology() = default;
    Topology(std::optional<Coord> period_x, std::optional<Coord> period_y);

    static Topology planar() { return {}; }

    [[nodiscard]] const std::optional<Coord>& period_x() const noexcept { return tx_; }
    [[nodiscard]] const std::optional<Coord>& period_y() const noexcept { return ty_; }
    [[nodiscard]] bool circular_x() const noexcept { return tx_.has_value(); }
    [[nodiscard]] bool circular_y() const noexcept { return ty_.has_value(); }
    [[nodiscard]] TopologyKind kind() const noexcept;

    [[nodiscard]] bool valid(const IndexPair& p) const noexcept;

    friend bool operator==(const Topology&, const Topology&) = default;

private:
    std::optional<Coord> tx_;
    std::optional<Coord> ty_;
};

std::string to_string(const Topology& t);

/// ((a+b-2) mod T + 1) on each axis; identity arithmetic on infinite axes.
/// Throws ArithmeticError on 64-bit overflow.
IndexPair cyclic_add(const IndexPair& a, const IndexPair& b, const Topology& topo);

struct BoundingBox {
    IndexPair min;
    IndexPair max;

    [[nodiscard]] Coord extent_x() const noexcept { return max.x - min.x + 1; }
    [[nodiscard]] Coord extent_y() const noexcept { return max.y - min.y + 1; }
};

/// Finite, non-empty, lexicographically sorted set of indices inside a topology.
/// Immutable; copies share storage.
class Shape {
public:
    /// Sorts and deduplicates `indices`; throws ShapeError if empty, TopologyError if an index is invalid.
    Shape(Topology topo, std::vector<IndexPair> indices);

    [[nodiscard]] const Topology& topology() const noexcept { return impl_->topo; }
    [[nodiscard]] std::span<const IndexPair> indices() const noexcept { return impl_->indices; }
    [[nodiscard]] std::size_t size() const noexcept { return impl_->indices.size(); }
    [[nodiscard]] const IndexPair& operator[](std::size_t i) const noexcept { return impl_->indices[i]; }
    [[nodiscard]] auto begin() const noexcept { return impl_->indices.begin(); }
    [[nodiscard]] auto end() const noexcept { return impl_->indices.end(); }
    [[nodiscard]] const BoundingBox& bounds() const noexcept { return impl_->box; }

    [[nodiscard]] bool contains(const IndexPair& p) const noexcept { return position(p).has_value(); }
    /// Position of `p` in the lexicographic order.
    [[nodiscard]] std::optional<std::size_t> position(const IndexPair& p) const noexcept;

    /// True if every index of this shape lies in `other` (topologies must match).
    [[nodiscard]] bool subset_of(const Shape& other) const;

    friend bool operator==(const Shape& a, const Shape& b);

private:
    struct Impl {
        Topology topo;
        std::vector<IndexPair> indices;
        BoundingBox box;
    };
    std::shared_ptr<const Impl> impl_;
};

/// {a ⊕ b | a ∈ A, b ∈ B}. Throws TopologyError on mismatched topologies.
Shape minkowski_sum(const Shape& a, const Shape& b);

/// A ⊕ {delta}.
Shape translate(const Shape& s, const IndexPair& delta);

/// Indices of `s` not in `removed`; throws ShapeError if nothing remains.
Shape difference(const Shape& s, const Shape& removed);
std::optional<Shape> intersection(const Shape& a, const Shape& b);

/// Constructors for the shapes behind the classical SSA variants.
namespace shapes {

/// {x0..x0+nx-1} × {y0..y0+ny-1}. On a circular axis the extent may not exceed the period.
Shape rectangle(Coord nx, Coord ny, const Topology& topo, IndexPair origin = {});

/// Series layout {first..last} × {1} with the listed gap positions removed.
Shape segment(Coord first, Coord last, std::span<const Coord> gaps, const Topology& topo);

/// Stacked series: series j (1-based) occupies {1..lengths[j-1]} × {j}.
Shape stacked(std::span<const Coord> lengths, const Topology& topo);

/// Lattice points with (x-cx)² + (y-cy)² ≤ r². Radius 1 gives the 4-neighbourhood.
/// Throws ShapeError if the disc reaches coordinates below 1.
Shape disc(IndexPair center, double radius, const Topology& topo);

/// Row i, column j of `mask` (row-major, nrows × ncols) maps to (i+1, j+1).
Shape from_mask(std::span<const std::uint8_t> mask, std::size_t nrows, std::size_t ncols, const Topology& topo);

} // namespace shapes

/// True if {1..n}² ⊕ {alpha} ⊂ s for some alpha ∈ s.
bool contains_square(const Shape& s, Coord n);

/// Real (or complex, or integer) values attached to a shape in its lexicographic order.
template<class T>
class BasicShapedArray {
public:
    using value_type = T;

    BasicShapedArray(Shape shape, std::vector<T> values) : shape_(std::move(shape)), values_(std::move(values))
    {
        if (values_.size() != shape_.size()) {
            throw ShapeError("shaped array: " + std::to_string(values_.size()) + " values for a shape of "
                             + std::to_string(shape_.size()) + " indices");
        }
    }

    static BasicShapedArray zeros(Shape shape)
    {
        std::vector<T> v(shape.size(), T{});
        return {std::move(shape), std::move(v)};
    }

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return values_; }
    [[nodiscard]] std::span<T> values() noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] const T& operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] T& operator[](std::size_t i) noexcept { return values_[i]; }

    [[nodiscard]] const T& at(const IndexPair& p) const
    {
        auto pos = shape_.position(p);
        if (!pos) throw ShapeError("index " + to_string(p) + " is not in the shape");
        return values_[*pos];
    }

    friend bool operator==(const BasicShapedArray& a, const BasicShapedArray& b)
    {
        return a.shape_ == b.shape_ && a.values_ == b.values_;
    }

private:
    Shape shape_;
    std::vector<T> values_;
};

using ShapedArray = BasicShapedArray<double>;
using ComplexShapedArray = BasicShapedArray<std::complex<double>>;
using CountArray = BasicShapedArray<std::int64_t>;

/// Dense vector in lexicographic shape order.
template<class T>
std::vector<T> vectorize(const BasicShapedArray<T>& arr)
{
    return {arr.values().begin(), arr.values().end()};
}

/// Inverse of vectorize.
template<class T>
BasicShapedArray<T> shape_back(const Shape& shape, std::span<const T> values)
{
    return {shape, std::vector<T>(values.begin(), values.end())};
}

/// Values of `arr` on `sub`, which must be a subset of arr's shape.
template<class T>
BasicShapedArray<T> restrict_to(const BasicShapedArray<T>& arr, const Shape& sub)
{
    std::vector<T> out;
    out.reserve(sub.size());
    for (const auto& p : sub) out.push_back(arr.at(p));
    return {sub, std::move(out)};
}

} // namespace shssa
