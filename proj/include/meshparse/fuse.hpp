#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "meshparse/dbscan.hpp"
#include "meshparse/error.hpp"
#include "meshparse/kdtree.hpp"
#include "meshparse/parallel.hpp"
#include "meshparse/render.hpp"
#include "meshparse/types.hpp"

namespace meshparse {

// Sparse per-vertex label histogram.
struct VoteTable {
    std::vector<std::map<Label, std::uint32_t>> votes;

    std::size_t voted_count() const {
        return static_cast<std::size_t>(std::count_if(votes.begin(), votes.end(), [](const auto& m) { return !m.empty(); }));
    }
    bool voted(std::size_t v) const { return !votes[v].empty(); }
};

// One rendered view paired with the label image a 2D parser produced for it.
struct LabeledView {
    const RenderBuffers& buffers;
    const LabelImage& labels;
};

// Each covered pixel casts one vote for (provoking vertex of its triangle, its
// label). Label 0 over geometry is a vote for background like any other.
inline VoteTable accumulate_votes(const Mesh& mesh, std::span<const LabeledView> views, std::size_t label_count) {
    VoteTable table;
    table.votes.resize(mesh.vertices.size());
    for (std::size_t v = 0; v < views.size(); ++v) {
        const auto& b = views[v].buffers;
        const auto& img = views[v].labels;
        require(img.width == b.width() && img.height == b.height(),
                "accumulate_votes: view " + std::to_string(v) + " label image is " + std::to_string(img.width) + "x" +
                    std::to_string(img.height) + ", buffers are " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
        const auto provoking = visible_vertices(mesh, b);
        for (std::size_t p = 0; p < provoking.data.size(); ++p) {
            const auto vertex = provoking.data[p];
            if (vertex < 0) continue;
            const Label label = img.data[p];
            require(label < label_count, "accumulate_votes: view " + std::to_string(v) + " has label " +
                                             std::to_string(label) + " outside the label space");
            ++table.votes[static_cast<std::size_t>(vertex)][label];
        }
    }
    return table;
}

// Most-voted label per vertex (lower label on ties). Vertices without votes
// take the label of the nearest voted vertex.
inline LabeledCloud finalize_labels(const Mesh& mesh, const VoteTable& votes, LabelSpacePtr space) {
    require(votes.votes.size() == mesh.vertices.size(), "finalize_labels: vote table does not match mesh");
    require(space != nullptr, "finalize_labels: no label space");
    LabeledCloud cloud{mesh.vertices, std::vector<Label>(mesh.vertices.size(), 0), std::move(space)};
    std::vector<std::uint32_t> voted;
    for (std::size_t v = 0; v < votes.votes.size(); ++v) {
        const auto& m = votes.votes[v];
        if (m.empty()) continue;
        voted.push_back(static_cast<std::uint32_t>(v));
        Label best = m.begin()->first;
        std::uint32_t best_count = 0;
        for (const auto& [label, count] : m)
            if (count > best_count) {
                best = label;
                best_count = count;
            }
        cloud.labels[v] = best;
    }
    if (voted.empty()) throw FusionError("finalize_labels: no vertex received a vote");
    if (voted.size() < mesh.vertices.size()) {
        const KdTree tree(cloud.points, voted);
        for (std::size_t v = 0; v < votes.votes.size(); ++v)
            if (votes.votes[v].empty()) cloud.labels[v] = cloud.labels[tree.nearest(cloud.points[v]).index];
    }
    cloud.validate();
    return cloud;
}

namespace detail {

// Translates to the origin and scales by the largest axis extent, so the cloud
// fits [0,1]^3 with its aspect ratio intact.
inline std::vector<Vec3f> normalize_isotropic(std::span<const Vec3f> points) {
    if (points.empty()) return {};
    Vec3f lo = points[0], hi = points[0];
    for (const auto& p : points)
        for (std::size_t a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    const float extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    const float scale = extent > 0 ? 1.0f / extent : 1.0f;
    std::vector<Vec3f> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = (points[i] - lo) * scale;
    return out;
}

// Majority label among `neighbors` (lower label on ties).
inline Label majority_label(std::span<const Neighbor> neighbors, std::span<const Label> labels) {
    std::map<Label, std::size_t> counts;
    for (const auto& n : neighbors) ++counts[labels[n.index]];
    Label best = 0;
    std::size_t best_count = 0;
    for (const auto& [label, count] : counts)
        if (count > best_count) {
            best = label;
            best_count = count;
        }
    return best;
}

}  // namespace detail

struct DenoiseStats {
    std::size_t demoted = 0;  // points moved out of their class before k-NN relabeling
    std::size_t relabeled = 0;  // demoted points that ended with a different label
};

// Per non-background class, clusters its points with DBSCAN (epsilon in units
// of the cloud's largest extent) and keeps only the largest cluster (lowest
// cluster id on ties). Every other point of the class is demoted and then takes
// the majority label of its knn_k nearest kept points. A class too sparse to
// form any cluster is left untouched.
inline LabeledCloud denoise_labels(const LabeledCloud& cloud, const DbscanParams& params, DenoiseStats* stats = nullptr) {
    cloud.validate();
    params.validate();
    const auto unit = detail::normalize_isotropic(cloud.points);
    const std::size_t classes = cloud.label_space->size();

    std::vector<std::vector<std::uint32_t>> members(classes);
    for (std::uint32_t i = 0; i < cloud.size(); ++i) members[cloud.labels[i]].push_back(i);

    std::vector<char> demoted(cloud.size(), 0);
    parallel_for(classes, [&](std::size_t label) {
        if (label == 0 || members[label].empty()) return;
        const auto& idx = members[label];
        std::vector<Vec3f> pts(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) pts[i] = unit[idx[i]];
        const auto ids = dbscan(pts, params);
        std::map<std::int32_t, std::size_t> sizes;
        for (auto id : ids)
            if (id != kNoise) ++sizes[id];
        std::int32_t keep = kNoise;
        std::size_t keep_size = 0;
        for (const auto& [id, size] : sizes)
            if (size > keep_size) {
                keep = id;
                keep_size = size;
            }
        if (keep == kNoise) return;
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (ids[i] != keep) demoted[idx[i]] = 1;
    });

    std::vector<std::uint32_t> kept;
    std::size_t demoted_count = 0;
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
        if (demoted[i]) ++demoted_count;
        else kept.push_back(i);
    }
    LabeledCloud out = cloud;
    if (demoted_count == 0) {
        if (stats) *stats = {};
        return out;
    }
    if (kept.empty()) throw FusionError("denoise_labels: every point was demoted");

    const KdTree tree(unit, kept);
    std::size_t changed = 0;
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
        if (!demoted[i]) continue;
        const auto nn = tree.knn(unit[i], params.knn_k);
        out.labels[i] = detail::majority_label(nn, cloud.labels);
        changed += out.labels[i] != cloud.labels[i];
    }
    if (stats) *stats = {demoted_count, changed};
    return out;
}

// ---------------------------------------------------------------------------
// Relabel rules: ordered {from, to, where, fraction} entries. A point labeled
// `from` whose height, as a fraction of the cloud's vertical (y) extent, lies
// above (v_above) or below (v_below) `fraction` becomes `to`.

struct RelabelRule {
    enum class Where { above, below };
    Label from = 0;
    Label to = 0;
    Where where = Where::above;
    double fraction = 0.5;
};

inline std::vector<RelabelRule> rules_from_json(const nlohmann::json& j, const LabelSpace& space) {
    if (!j.is_array()) throw ParseError("rule file must be a JSON array");
    auto label_of = [&](const nlohmann::json& v) -> Label {
        if (v.is_string()) return space.index_of(v.get<std::string>());
        if (v.is_number_unsigned() || v.is_number_integer()) {
            const auto l = v.get<long long>();
            if (l < 0 || static_cast<std::size_t>(l) >= space.size()) throw ValidationError("rule label out of range");
            return static_cast<Label>(l);
        }
        throw ParseError("rule label must be an index or a label name");
    };
    std::vector<RelabelRule> rules;
    for (const auto& e : j) {
        for (const char* key : {"from", "to", "where", "fraction"})
            if (!e.contains(key)) throw ParseError(std::string("rule is missing \"") + key + "\"");
        RelabelRule r;
        r.from = label_of(e.at("from"));
        r.to = label_of(e.at("to"));
        const auto where = e.at("where").get<std::string>();
        if (where == "v_above") r.where = RelabelRule::Where::above;
        else if (where == "v_below") r.where = RelabelRule::Where::below;
        else throw ParseError("rule \"where\" must be v_above or v_below, got \"" + where + "\"");
        r.fraction = e.at("fraction").get<double>();
        if (!(r.fraction >= 0 && r.fraction <= 1)) throw ValidationError("rule fraction must lie in [0,1]");
        rules.push_back(r);
    }
    return rules;
}

inline std::vector<RelabelRule> load_rules(const std::filesystem::path& path, const LabelSpace& space) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open rule file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return rules_from_json(j, space);
}

inline LabeledCloud apply_rules(const LabeledCloud& cloud, std::span<const RelabelRule> rules) {
    LabeledCloud out = cloud;
    if (rules.empty() || cloud.size() == 0) return out;
    float lo = cloud.points[0].y, hi = lo;
    for (const auto& p : cloud.points) {
        lo = std::min(lo, p.y);
        hi = std::max(hi, p.y);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (const auto& r : rules)
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out.labels[i] != r.from) continue;
            const double f = (out.points[i].y - lo) / span;
            if ((r.where == RelabelRule::Where::above && f > r.fraction) ||
                (r.where == RelabelRule::Where::below && f < r.fraction))
                out.labels[i] = r.to;
        }
    return out;
}

// ---------------------------------------------------------------------------

// Each full-resolution point takes the majority label of its 3 nearest sampled
// points. Without a majority it takes the nearest sample's label (lower sample
// index on distance ties). A point coinciding exactly with a sample keeps that
// sample's label.
inline LabeledCloud upsample_labels(const LabeledCloud& sampled, std::span<const Vec3f> full_points) {
    sampled.validate();
    require(sampled.size() > 0, "upsample_labels: sampled cloud is empty");
    const KdTree tree(sampled.points);
    LabeledCloud out{std::vector<Vec3f>(full_points.begin(), full_points.end()),
                     std::vector<Label>(full_points.size(), 0), sampled.label_space};
    parallel_for((full_points.size() + 4095) / 4096, [&](std::size_t chunk) {
        const std::size_t end = std::min(full_points.size(), (chunk + 1) * 4096);
        for (std::size_t i = chunk * 4096; i < end; ++i) {
            const auto nn = tree.knn(full_points[i], 3);
            const Label nearest = sampled.labels[nn.front().index];
            if (nn.front().distance2 == 0) {
                out.labels[i] = nearest;
                continue;
            }
            std::map<Label, std::size_t> counts;
            for (const auto& n : nn) ++counts[sampled.labels[n.index]];
            std::size_t best_count = 0;
            for (const auto& [label, count] : counts) best_count = std::max(best_count, count);
            std::size_t leaders = 0;
            Label leader = nearest;
            for (const auto& [label, count] : counts)
                if (count == best_count) {
                    ++leaders;
                    leader = label;
                }
            out.labels[i] = leaders == 1 ? leader : nearest;
        }
    });
    return out;
}

}  // namespace meshparse
