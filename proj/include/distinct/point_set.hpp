#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "distinct/error.hpp"

namespace distinct {

// Dense row-major set of points in 64-bit precision. All statistics run on
// PointSets; tables are converted on extraction.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t dim) : dim_(dim) {}
    PointSet(std::size_t rows, std::size_t dim) : dim_(dim), data_(rows * dim, 0.0) {}
    PointSet(std::initializer_list<std::initializer_list<double>> rows) {
        for (const auto& r : rows) push_back(std::vector<double>(r));
    }

    [[nodiscard]] std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::span<const double> operator[](std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }
    [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

    void push_back(std::span<const double> v) {
        if (dim_ == 0 && data_.empty()) dim_ = v.size();
        if (v.size() != dim_ || dim_ == 0) throw InvalidArgument("point dimension mismatch");
        data_.insert(data_.end(), v.begin(), v.end());
    }
    void reserve(std::size_t rows) { data_.reserve(rows * dim_); }

    [[nodiscard]] PointSet select(std::span<const std::size_t> idx) const {
        PointSet out(dim_);
        out.data_.reserve(idx.size() * dim_);
        for (std::size_t i : idx) {
            if (i >= size()) throw InvalidArgument("point index out of range");
            auto r = (*this)[i];
            out.data_.insert(out.data_.end(), r.begin(), r.end());
        }
        return out;
    }

    // Rows of `a` followed by rows of `b`.
    [[nodiscard]] static PointSet concat(const PointSet& a, const PointSet& b) {
        if (a.dim_ != b.dim_ && !a.empty() && !b.empty())
            throw InvalidArgument("cannot pool point sets of different dimension");
        PointSet out(a.empty() ? b.dim_ : a.dim_);
        out.data_.reserve(a.data_.size() + b.data_.size());
        out.data_.insert(out.data_.end(), a.data_.begin(), a.data_.end());
        out.data_.insert(out.data_.end(), b.data_.begin(), b.data_.end());
        return out;
    }

    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }
    [[nodiscard]] std::vector<double>& data() noexcept { return data_; }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

}  // namespace distinct
