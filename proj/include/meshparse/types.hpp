#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "meshparse/error.hpp"
#include "meshparse/geometry.hpp"

namespace meshparse {

using Label = std::uint16_t;
using Triangle = std::array<std::uint32_t, 3>;

// Indexed triangle mesh. Triangle order is draw order; the last index of each
// triangle is its provoking vertex.
struct Mesh {
    std::vector<Vec3f> vertices;
    std::vector<Triangle> triangles;

    // Throws ValidationError when a face references a missing vertex or the
    // mesh has no vertices.
    void validate() const {
        if (vertices.empty()) throw ValidationError("mesh has no vertices");
        const auto n = vertices.size();
        for (std::size_t t = 0; t < triangles.size(); ++t)
            for (auto idx : triangles[t])
                if (idx >= n)
                    throw ValidationError("triangle " + std::to_string(t) + " references vertex " +
                                          std::to_string(idx) + " but mesh has " + std::to_string(n) +
                                          " vertices");
    }
};

struct LabelSpace {
    std::string name;
    std::vector<std::string> labels;

    std::size_t size() const { return labels.size(); }

    void validate() const {
        if (labels.empty() || labels.front() != "background")
            throw ValidationError("label space '" + name + "': index 0 must be named \"background\"");
        std::set<std::string> seen;
        for (const auto& l : labels)
            if (!seen.insert(l).second)
                throw ValidationError("label space '" + name + "': duplicate label \"" + l + "\"");
    }

    // Index of `label`, or throws ContractError.
    Label index_of(const std::string& label) const {
        auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) throw ContractError("label \"" + label + "\" not in label space '" + name + "'");
        return static_cast<Label>(it - labels.begin());
    }

    friend bool operator==(const LabelSpace&, const LabelSpace&) = default;
};

using LabelSpacePtr = std::shared_ptr<const LabelSpace>;

struct LabeledCloud {
    std::vector<Vec3f> points;
    std::vector<Label> labels;
    LabelSpacePtr label_space;

    std::size_t size() const { return points.size(); }

    void validate() const {
        if (!label_space) throw ContractError("labeled cloud has no label space");
        if (points.size() != labels.size())
            throw ContractError("labeled cloud has " + std::to_string(points.size()) + " points but " +
                                std::to_string(labels.size()) + " labels");
        const auto n = label_space->size();
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] >= n)
                throw ContractError("point " + std::to_string(i) + " has label " + std::to_string(labels[i]) +
                                    " outside label space of size " + std::to_string(n));
    }
};

// Counts indexed [true][predicted].
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const { return n_; }
    std::uint64_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * n_ + predicted]; }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }

    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (auto c : counts_) s += c;
        return s;
    }
    // t_i: points whose true class is i.
    std::uint64_t row_sum(std::size_t i) const {
        std::uint64_t s = 0;
        for (std::size_t j = 0; j < n_; ++j) s += at(i, j);
        return s;
    }
    // Points predicted as class j.
    std::uint64_t col_sum(std::size_t j) const {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < n_; ++i) s += at(i, j);
        return s;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> counts_;
};

// Row-major W x H raster.
template <typename T>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }

    friend bool operator==(const Image&, const Image&) = default;
};

using LabelImage = Image<std::uint8_t>;

}  // namespace meshparse
