#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mwalk/errors.hpp"

namespace mwalk {

using Coords = std::vector<int64_t>; // tangential position, length m-1

// Periodic cell U = [0,k_2) x ... x [0,k_m). Classes are indexed either by
// their coordinate tuple or by a row-major linear index; all arithmetic is
// componentwise mod k_i with nonnegative representatives.
class PeriodLattice {
  public:
    PeriodLattice() = default;

    explicit PeriodLattice(std::vector<int> periods) : periods_(std::move(periods)) {
        for (int k : periods_) {
            if (k < 1) throw BadPeriod("period must be >= 1, got " + std::to_string(k));
        }
        size_ = 1;
        for (int k : periods_) size_ *= static_cast<size_t>(k);
    }

    const std::vector<int>& periods() const { return periods_; }
    size_t dims() const { return periods_.size(); }
    size_t size() const { return size_; }

    size_t linear(const std::vector<int>& tuple) const {
        size_t idx = 0;
        for (size_t i = 0; i < periods_.size(); ++i)
            idx = idx * static_cast<size_t>(periods_[i]) + static_cast<size_t>(tuple[i]);
        return idx;
    }

    std::vector<int> tuple(size_t linear_index) const {
        std::vector<int> t(periods_.size());
        for (size_t i = periods_.size(); i-- > 0;) {
            t[i] = static_cast<int>(linear_index % static_cast<size_t>(periods_[i]));
            linear_index /= static_cast<size_t>(periods_[i]);
        }
        return t;
    }

    // class of a lattice position y (componentwise nonnegative residue)
    size_t class_of(const Coords& y) const {
        if (y.size() != periods_.size())
            throw DimensionMismatch("class_of: position has " + std::to_string(y.size()) +
                                    " coordinates, expected " + std::to_string(periods_.size()));
        size_t idx = 0;
        for (size_t i = 0; i < periods_.size(); ++i) {
            int64_t k = periods_[i];
            int64_t r = y[i] % k;
            if (r < 0) r += k;
            idx = idx * static_cast<size_t>(k) + static_cast<size_t>(r);
        }
        return idx;
    }

    // class reached from class j after a shift by delta
    size_t shift(size_t j, const Coords& delta) const {
        if (delta.size() != periods_.size())
            throw DimensionMismatch("shift: delta has " + std::to_string(delta.size()) +
                                    " coordinates, expected " + std::to_string(periods_.size()));
        std::vector<int> t = tuple(j);
        size_t idx = 0;
        for (size_t i = 0; i < periods_.size(); ++i) {
            int64_t k = periods_[i];
            int64_t r = (t[i] + delta[i]) % k;
            if (r < 0) r += k;
            idx = idx * static_cast<size_t>(k) + static_cast<size_t>(r);
        }
        return idx;
    }

    // difference class (j - jprime) mod periods
    size_t diff(size_t j, size_t jprime) const {
        std::vector<int> a = tuple(j), b = tuple(jprime);
        size_t idx = 0;
        for (size_t i = 0; i < periods_.size(); ++i) {
            int k = periods_[i];
            int r = (a[i] - b[i]) % k;
            if (r < 0) r += k;
            idx = idx * static_cast<size_t>(k) + static_cast<size_t>(r);
        }
        return idx;
    }

    std::string class_name(size_t j) const {
        std::vector<int> t = tuple(j);
        std::string s = "(";
        for (size_t i = 0; i < t.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(t[i]);
        }
        s += ")";
        return s;
    }

  private:
    std::vector<int> periods_;
    size_t size_ = 1;
};

} // namespace mwalk
