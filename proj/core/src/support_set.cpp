#include "dyncs/support_set.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dyncs/rng.hpp"

namespace dyncs {

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index) {
    // FNV-1a over the stream name, then splitmix over (master, index)
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : stream) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1) + h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SupportSet::SupportSet(std::initializer_list<Index> idx) : idx_(idx) { normalize(); }
SupportSet::SupportSet(std::vector<Index> idx) : idx_(std::move(idx)) { normalize(); }

void SupportSet::normalize() {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
    if (!idx_.empty() && idx_.front() < 0) throw std::invalid_argument("SupportSet: negative index");
}

SupportSet SupportSet::from_nonzeros(const Vec& v, double threshold) {
    std::vector<Index> idx;
    for (Index i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > threshold) idx.push_back(i);
    return SupportSet(std::move(idx));
}

SupportSet SupportSet::full(Index m) {
    std::vector<Index> idx(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
    return SupportSet(std::move(idx));
}

bool SupportSet::contains(Index i) const {
    return std::binary_search(idx_.begin(), idx_.end(), i);
}

SupportSet SupportSet::set_union(const SupportSet& other) const {
    std::vector<Index> out;
    out.reserve(idx_.size() + other.idx_.size());
    std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                   std::back_inserter(out));
    return SupportSet(std::move(out));
}

SupportSet SupportSet::set_difference(const SupportSet& other) const {
    std::vector<Index> out;
    std::set_difference(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                        std::back_inserter(out));
    return SupportSet(std::move(out));
}

SupportSet SupportSet::set_intersection(const SupportSet& other) const {
    std::vector<Index> out;
    std::set_intersection(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                          std::back_inserter(out));
    return SupportSet(std::move(out));
}

SupportSet SupportSet::complement(Index m) const {
    check_range(m);
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(m) - idx_.size());
    std::size_t p = 0;
    for (Index i = 0; i < m; ++i) {
        if (p < idx_.size() && idx_[p] == i) {
            ++p;
        } else {
            out.push_back(i);
        }
    }
    return SupportSet(std::move(out));
}

void SupportSet::insert(Index i) {
    auto it = std::lower_bound(idx_.begin(), idx_.end(), i);
    if (it == idx_.end() || *it != i) idx_.insert(it, i);
}

void SupportSet::check_range(Index m) const {
    if (!idx_.empty() && (idx_.front() < 0 || idx_.back() >= m))
        throw std::out_of_range("SupportSet: index outside [0, m)");
}

Vec gather(const Vec& v, const SupportSet& s) {
    Vec out(s.size());
    for (Index k = 0; k < s.size(); ++k) out[k] = v[s[k]];
    return out;
}

Vec scatter(const Vec& vals, const SupportSet& s, Index m) {
    Vec out = Vec::Zero(m);
    for (Index k = 0; k < s.size(); ++k) out[s[k]] = vals[k];
    return out;
}

} // namespace dyncs
