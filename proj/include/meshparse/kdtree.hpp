#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "meshparse/error.hpp"
#include "meshparse/geometry.hpp"

namespace meshparse {

struct Neighbor {
    std::uint32_t index = 0;  // index into the point array given to the tree
    double distance2 = 0;

    friend bool operator<(const Neighbor& a, const Neighbor& b) {
        return a.distance2 != b.distance2 ? a.distance2 < b.distance2 : a.index < b.index;
    }
    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Static 3-d tree for exact k-nearest-neighbor queries. Results are ordered by
// (squared distance, index), so equidistant points resolve to the lower index.
// The tree references `points`; the caller keeps them alive.
class KdTree {
public:
    KdTree() = default;

    explicit KdTree(std::span<const Vec3f> points) : points_(points) {
        std::vector<std::uint32_t> all(points.size());
        std::iota(all.begin(), all.end(), 0u);
        build(std::move(all));
    }

    // Tree over a subset of `points`; query results still report indices into `points`.
    KdTree(std::span<const Vec3f> points, std::vector<std::uint32_t> subset) : points_(points) {
        for (auto i : subset) require(i < points.size(), "KdTree: subset index out of range");
        build(std::move(subset));
    }

    std::size_t size() const { return index_.size(); }
    bool empty() const { return index_.empty(); }

    std::vector<Neighbor> knn(const Vec3f& query, std::size_t k) const {
        std::vector<Neighbor> best;
        if (k == 0 || nodes_.empty()) return best;
        best.reserve(k + 1);
        const Vec3d q = query.cast<double>();
        search(0, q, k, best);
        return best;
    }

    Neighbor nearest(const Vec3f& query) const {
        require(!empty(), "KdTree::nearest on empty tree");
        return knn(query, 1).front();
    }

private:
    struct Node {
        std::uint32_t begin = 0, end = 0;  // range into index_ (leaves)
        std::int32_t left = -1, right = -1;
        int axis = 0;
        double split = 0;
    };

    static constexpr std::uint32_t kLeafSize = 12;

    void build(std::vector<std::uint32_t> indices) {
        index_ = std::move(indices);
        nodes_.clear();
        if (index_.empty()) return;
        nodes_.reserve(2 * index_.size() / kLeafSize + 1);
        build_node(0, static_cast<std::uint32_t>(index_.size()));
    }

    std::int32_t build_node(std::uint32_t begin, std::uint32_t end) {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back({begin, end, -1, -1, 0, 0});
        if (end - begin <= kLeafSize) return id;
        Vec3f lo = points_[index_[begin]], hi = lo;
        for (auto i = begin; i < end; ++i)
            for (std::size_t a = 0; a < 3; ++a) {
                lo[a] = std::min(lo[a], points_[index_[i]][a]);
                hi[a] = std::max(hi[a], points_[index_[i]][a]);
            }
        int axis = 0;
        for (int a = 1; a < 3; ++a)
            if (hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)] >
                hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)])
                axis = a;
        if (hi[static_cast<std::size_t>(axis)] == lo[static_cast<std::size_t>(axis)]) return id;  // all coincident
        const auto mid = begin + (end - begin) / 2;
        const auto ax = static_cast<std::size_t>(axis);
        std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) { return points_[a][ax] < points_[b][ax]; });
        const double split = points_[index_[mid]][ax];
        const auto left = build_node(begin, mid);
        const auto right = build_node(mid, end);
        auto& n = nodes_[static_cast<std::size_t>(id)];
        n.left = left;
        n.right = right;
        n.axis = axis;
        n.split = split;
        return id;
    }

    void offer(const Neighbor& cand, std::size_t k, std::vector<Neighbor>& best) const {
        if (best.size() == k && !(cand < best.back())) return;
        auto it = std::upper_bound(best.begin(), best.end(), cand);
        best.insert(it, cand);
        if (best.size() > k) best.pop_back();
    }

    void search(std::int32_t node_id, const Vec3d& q, std::size_t k, std::vector<Neighbor>& best) const {
        const Node& n = nodes_[static_cast<std::size_t>(node_id)];
        if (n.left < 0) {
            for (auto i = n.begin; i < n.end; ++i) {
                const auto idx = index_[i];
                offer({idx, distance2(q, points_[idx].cast<double>())}, k, best);
            }
            return;
        }
        const double diff = q[static_cast<std::size_t>(n.axis)] - n.split;
        const auto near = diff < 0 ? n.left : n.right;
        const auto far = diff < 0 ? n.right : n.left;
        search(near, q, k, best);
        // <= keeps equidistant candidates on the far side reachable for the index tie-break.
        if (best.size() < k || diff * diff <= best.back().distance2) search(far, q, k, best);
    }

    std::span<const Vec3f> points_;
    std::vector<std::uint32_t> index_;
    std::vector<Node> nodes_;
};

}  // namespace meshparse
