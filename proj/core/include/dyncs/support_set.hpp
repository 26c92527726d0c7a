#pragma once

#include <initializer_list>
#include <vector>

#include "dyncs/types.hpp"

namespace dyncs {

/// Sorted, duplicate-free set of 0-based signal indices.
class SupportSet {
public:
    SupportSet() = default;
    SupportSet(std::initializer_list<Index> idx);
    explicit SupportSet(std::vector<Index> idx);

    static SupportSet from_nonzeros(const Vec& v, double threshold = 0.0);
    static SupportSet full(Index m);

    Index size() const { return static_cast<Index>(idx_.size()); }
    bool empty() const { return idx_.empty(); }
    bool contains(Index i) const;
    Index operator[](Index k) const { return idx_[static_cast<std::size_t>(k)]; }
    const std::vector<Index>& indices() const { return idx_; }

    SupportSet set_union(const SupportSet& other) const;
    SupportSet set_difference(const SupportSet& other) const;
    SupportSet set_intersection(const SupportSet& other) const;
    SupportSet complement(Index m) const;

    void insert(Index i);
    void check_range(Index m) const; // throws if any index outside [0, m)

    bool operator==(const SupportSet& other) const { return idx_ == other.idx_; }

    auto begin() const { return idx_.begin(); }
    auto end() const { return idx_.end(); }

private:
    std::vector<Index> idx_;
    void normalize();
};

/// Gathers v at the set's indices (length |S|).
Vec gather(const Vec& v, const SupportSet& s);
/// Scatters length-|S| values into a length-m vector, zero elsewhere.
Vec scatter(const Vec& vals, const SupportSet& s, Index m);

} // namespace dyncs
