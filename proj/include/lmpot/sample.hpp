#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "lmpot/errors.hpp"

namespace lmpot {

// Ascending-sorted vector of finite observations. All statistics in this
// library are linear combinations of order statistics, so sortedness is the
// class invariant rather than a per-call cost.
class ObservationSample {
public:
    static ObservationSample from_unsorted(std::vector<double> values) {
        std::sort(values.begin(), values.end());
        return ObservationSample(std::move(values));
    }

    // Input must already be non-decreasing.
    static ObservationSample from_sorted(std::vector<double> values) {
        for (std::size_t i = 1; i < values.size(); ++i) {
            if (values[i] < values[i - 1])
                throw domain_error("sample values not sorted ascending");
        }
        return ObservationSample(std::move(values));
    }

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    double min() const { return values_.front(); }
    double max() const { return values_.back(); }

private:
    explicit ObservationSample(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty())
            throw insufficient_sample_error("sample is empty");
        for (double v : values_) {
            if (!std::isfinite(v))
                throw domain_error("sample contains a non-finite value");
        }
    }

    std::vector<double> values_;
};

} // namespace lmpot
