#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "meshparse/align.hpp"
#include "meshparse/confusion.hpp"
#include "meshparse/error.hpp"
#include "meshparse/fps.hpp"
#include "meshparse/fuse.hpp"
#include "meshparse/hash.hpp"
#include "meshparse/image_io.hpp"
#include "meshparse/label_space.hpp"
#include "meshparse/mesh_io.hpp"
#include "meshparse/metrics.hpp"
#include "meshparse/morton.hpp"
#include "meshparse/render.hpp"
#include "meshparse/synth.hpp"

namespace meshparse {

namespace fs = std::filesystem;

inline constexpr int kPipelineConfigVersion = 1;

struct PipelineConfig {
    fs::path mesh;
    std::string label_space;  // path to a label-space JSON, or a built-in name
    std::optional<fs::path> ground_truth;

    enum class LabelSource { images, oracle };
    LabelSource label_source = LabelSource::images;
    fs::path label_dir;                // images: view_XX.png / view_XX.pgm
    fs::path oracle_triangle_labels;   // oracle: one label per triangle
    double oracle_noise = 0;

    enum class KeypointSource { none, oracle, command, file };
    bool align = true;
    int max_iters = 10;
    KeypointSource keypoint_source = KeypointSource::none;
    fs::path keypoint_path;   // oracle JSON or keypoint file
    std::string keypoint_command;

    int render_size = 1024;
    double fov_deg = 40;
    std::optional<fs::path> views_file;

    DbscanParams fuse;
    std::optional<fs::path> rules;

    std::size_t k = 10000;
    std::size_t window_size = 5000;
    int bits_per_axis = 16;
    std::map<std::string, double> oversample;

    fs::path output_dir = "pipeline_out";
    std::uint64_t seed = 0;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ValidationError(where + ": unknown key \"" + key + "\"");
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

inline bool is_builtin_label_space(const std::string& name) {
    return name == "cihp" || name == "sapiens-v1" || name == "sapiens-v2" || name == "synthetic";
}

}  // namespace detail

// Parses a pipeline config. Relative paths resolve against `base_dir`. Unknown
// keys and a missing or wrong version are rejected.
inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
    using detail::reject_unknown;
    using detail::resolve;
    reject_unknown(j, {"version", "mesh", "label_space", "ground_truth", "labels", "align", "render", "fuse", "sample",
                       "output_dir", "seed"},
                   "config");
    if (!j.contains("version") || j.at("version") != kPipelineConfigVersion)
        throw ValidationError("config: \"version\" must be " + std::to_string(kPipelineConfigVersion));
    for (const char* key : {"mesh", "label_space", "labels"})
        if (!j.contains(key)) throw ValidationError(std::string("config: missing \"") + key + "\"");
    PipelineConfig c;
    try {
        c.mesh = resolve(base_dir, j.at("mesh").get<std::string>());
        const auto ls = j.at("label_space").get<std::string>();
        c.label_space = detail::is_builtin_label_space(ls) ? ls : resolve(base_dir, ls).string();
        if (j.contains("ground_truth")) c.ground_truth = resolve(base_dir, j.at("ground_truth").get<std::string>());

        const auto& labels = j.at("labels");
        reject_unknown(labels, {"source", "dir", "triangle_labels", "noise"}, "config.labels");
        const auto source = labels.at("source").get<std::string>();
        if (source == "images") {
            c.label_source = PipelineConfig::LabelSource::images;
            c.label_dir = resolve(base_dir, labels.at("dir").get<std::string>());
        } else if (source == "oracle") {
            c.label_source = PipelineConfig::LabelSource::oracle;
            c.oracle_triangle_labels = resolve(base_dir, labels.at("triangle_labels").get<std::string>());
            c.oracle_noise = labels.value("noise", 0.0);
        } else {
            throw ValidationError("config.labels.source must be \"images\" or \"oracle\"");
        }

        if (j.contains("align")) {
            const auto& a = j.at("align");
            reject_unknown(a, {"enabled", "max_iters", "keypoints"}, "config.align");
            c.align = a.value("enabled", true);
            c.max_iters = a.value("max_iters", 10);
            if (a.contains("keypoints")) {
                const auto& kp = a.at("keypoints");
                reject_unknown(kp, {"source", "file", "command"}, "config.align.keypoints");
                const auto s = kp.at("source").get<std::string>();
                if (s == "none") c.keypoint_source = PipelineConfig::KeypointSource::none;
                else if (s == "oracle") c.keypoint_source = PipelineConfig::KeypointSource::oracle;
                else if (s == "file") c.keypoint_source = PipelineConfig::KeypointSource::file;
                else if (s == "command") c.keypoint_source = PipelineConfig::KeypointSource::command;
                else throw ValidationError("config.align.keypoints.source must be none|oracle|file|command");
                if (kp.contains("file")) c.keypoint_path = resolve(base_dir, kp.at("file").get<std::string>());
                if (kp.contains("command")) c.keypoint_command = kp.at("command").get<std::string>();
            }
        }
        if (j.contains("render")) {
            const auto& r = j.at("render");
            reject_unknown(r, {"size", "fov", "views"}, "config.render");
            c.render_size = r.value("size", 1024);
            c.fov_deg = r.value("fov", 40.0);
            if (r.contains("views") && r.at("views") != "default")
                c.views_file = resolve(base_dir, r.at("views").get<std::string>());
        }
        if (j.contains("fuse")) {
            const auto& f = j.at("fuse");
            reject_unknown(f, {"eps", "min_samples", "knn", "rules"}, "config.fuse");
            c.fuse.epsilon = f.value("eps", 0.03);
            c.fuse.min_samples = f.value("min_samples", std::size_t{100});
            c.fuse.knn_k = f.value("knn", std::size_t{40});
            if (f.contains("rules") && !f.at("rules").is_null()) c.rules = resolve(base_dir, f.at("rules").get<std::string>());
        }
        if (j.contains("sample")) {
            const auto& s = j.at("sample");
            reject_unknown(s, {"k", "window_size", "bits", "oversample"}, "config.sample");
            c.k = s.value("k", std::size_t{10000});
            c.window_size = s.value("window_size", std::size_t{5000});
            c.bits_per_axis = s.value("bits", 16);
            if (s.contains("oversample")) c.oversample = s.at("oversample").get<std::map<std::string, double>>();
        }
        if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        else c.output_dir = base_dir / "pipeline_out";
        c.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return c;
}

inline PipelineConfig load_pipeline_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return pipeline_config_from_json(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

inline void validate(const PipelineConfig& c) {
    auto must_exist = [](const fs::path& p, const std::string& what) {
        if (!fs::exists(p)) throw ValidationError(what + " not found: " + p.string());
    };
    must_exist(c.mesh, "mesh");
    if (!detail::is_builtin_label_space(c.label_space)) must_exist(c.label_space, "label space");
    if (c.ground_truth) must_exist(*c.ground_truth, "ground truth");
    if (c.label_source == PipelineConfig::LabelSource::images) must_exist(c.label_dir, "label image directory");
    else must_exist(c.oracle_triangle_labels, "oracle triangle labels");
    if (c.align && (c.keypoint_source == PipelineConfig::KeypointSource::oracle ||
                    c.keypoint_source == PipelineConfig::KeypointSource::file))
        must_exist(c.keypoint_path, "keypoint file");
    if (c.align && c.keypoint_source == PipelineConfig::KeypointSource::command && c.keypoint_command.empty())
        throw ValidationError("config.align.keypoints.command is empty");
    if (c.views_file) must_exist(*c.views_file, "views file");
    if (c.rules) must_exist(*c.rules, "rule file");
    if (c.max_iters < 1) throw ValidationError("config.align.max_iters must be >= 1");
    if (c.render_size < 1) throw ValidationError("config.render.size must be >= 1");
    if (!(c.fov_deg > 0 && c.fov_deg < 180)) throw ValidationError("config.render.fov must lie in (0, 180)");
    if (c.window_size == 0) throw ValidationError("config.sample.window_size must be positive");
    if (c.bits_per_axis < 1 || c.bits_per_axis > kMaxMortonBits) throw ValidationError("config.sample.bits must be in [1, 21]");
    if (!(c.fuse.epsilon > 0) || c.fuse.min_samples < 1 || c.fuse.knn_k < 1)
        throw ValidationError("config.fuse: eps > 0, min_samples >= 1 and knn >= 1 required");
}

inline LabelSpacePtr resolve_label_space(const std::string& spec) {
    if (detail::is_builtin_label_space(spec) && !fs::exists(spec))
        return std::make_shared<const LabelSpace>(label_spaces::by_name(spec));
    return load_label_space(spec);
}

// Views as a JSON array of {"azimuth": deg, "elevation": deg}.
inline std::vector<ViewSpec> load_views(const fs::path& path, int size, double fov_deg) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open views file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        if (!j.is_array()) throw ParseError(path.string() + ": views file must be a JSON array");
        std::vector<ViewSpec> views;
        for (const auto& e : j) {
            ViewSpec v;
            v.azimuth_deg = e.at("azimuth").get<double>();
            v.elevation_deg = e.at("elevation").get<double>();
            v.width = v.height = size;
            v.fov_deg = fov_deg;
            v.validate();
            views.push_back(v);
        }
        return views;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline nlohmann::json to_json(const ViewSpec& v) {
    return {{"azimuth", v.azimuth_deg}, {"elevation", v.elevation_deg}, {"width", v.width},
            {"height", v.height},       {"fov", v.fov_deg},             {"distance", v.distance}};
}

inline std::string view_stem(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "view_%02zu", i);
    return buf;
}

// Estimator backed by an external command: the front-view depth preview is
// written to `<workdir>/pose_input.pgm`, the command is run with that path as
// its last argument and must print keypoint JSON on stdout.
inline PoseEstimator command_estimator(std::string command, fs::path workdir) {
    return [command = std::move(command), workdir = std::move(workdir)](const RenderBuffers& buffers) {
        const fs::path image = workdir / "pose_input.pgm";
        write_pgm(depth_preview(buffers), image);
        const std::string cmd = command + " '" + image.string() + "'";
        std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
        if (!pipe) throw IoError("cannot run keypoint command: " + command);
        std::string out;
        char buf[4096];
        while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe.get())) out.append(buf, n);
        const int status = pclose(pipe.release());
        if (status != 0) throw IoError("keypoint command exited with status " + std::to_string(status));
        try {
            return keypoints_from_json(nlohmann::json::parse(out));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("keypoint command output: ") + e.what());
        }
    };
}

inline KeypointSet load_keypoints(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open keypoint file " + path.string());
    try {
        nlohmann::json j;
        in >> j;
        return keypoints_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline KeypointOracle load_keypoint_oracle(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open keypoint oracle " + path.string());
    try {
        nlohmann::json j;
        in >> j;
        return keypoint_oracle_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline std::map<Label, double> resolve_weights(const std::map<std::string, double>& named, const LabelSpace& space) {
    std::map<Label, double> out;
    for (const auto& [name, w] : named) {
        Label l;
        if (auto idx = detail::parse_number<unsigned>(name); idx && *idx < space.size()) l = static_cast<Label>(*idx);
        else l = space.index_of(name);
        out[l] = w;
    }
    return out;
}

struct PipelineResult {
    fs::path output_dir;
    nlohmann::json manifest;
    Mesh aligned;
    std::optional<OrientationResult> orientation;
    VoteTable votes;
    LabeledCloud fused;
    LabeledCloud denoised;
    LabeledCloud sampled;
    std::vector<std::uint32_t> sample_indices;
    std::optional<MetricReport> metrics;          // all vertices
    std::optional<MetricReport> metrics_visible;  // vertices with at least one vote
};

namespace detail {

[[noreturn]] inline void rethrow_in_stage(const std::string& stage) {
    const std::string prefix = "stage '" + stage + "': ";
    try {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError(prefix + e.what());
    } catch (const ContractError& e) {
        throw ContractError(prefix + e.what());
    } catch (const ParseError& e) {
        throw ParseError(prefix + e.what());
    } catch (const IoError& e) {
        throw IoError(prefix + e.what());
    } catch (const AlignmentError& e) {
        throw AlignmentError(prefix + e.what());
    } catch (const FusionError& e) {
        throw FusionError(prefix + e.what());
    } catch (const std::exception& e) {
        throw Error(prefix + e.what());
    }
}

inline void write_json(const nlohmann::json& j, const fs::path& path) {
    write_file(path, j.dump(2) + "\n");
}

inline nlohmann::json mat_json(const Mat3& m) {
    nlohmann::json out = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) out.push_back({m(r, 0), m(r, 1), m(r, 2)});
    return out;
}

}  // namespace detail

// align -> render -> fuse -> denoise -> sample, every intermediate written
// under config.output_dir and listed with its SHA-256 in manifest.json.
inline PipelineResult run_pipeline(const PipelineConfig& config) {
    validate(config);
    PipelineResult res;
    res.output_dir = config.output_dir;
    fs::create_directories(config.output_dir);
    std::mt19937_64 rng(config.seed);

    nlohmann::json stages = nlohmann::json::array();
    auto record = [&](const std::string& name, const std::vector<fs::path>& files) {
        nlohmann::json artifacts = nlohmann::json::array();
        for (const auto& f : files)
            artifacts.push_back({{"path", fs::relative(f, config.output_dir).generic_string()}, {"sha256", sha256_file(f)}});
        stages.push_back({{"name", name}, {"artifacts", artifacts}});
    };
    auto stage = [&](const std::string& name, auto&& fn) {
        const fs::path dir = config.output_dir / name;
        try {
            fs::create_directories(dir);
            record(name, fn(dir));
        } catch (...) {
            detail::rethrow_in_stage(name);
        }
    };

    LabelSpacePtr space;
    try {
        space = resolve_label_space(config.label_space);
    } catch (...) {
        detail::rethrow_in_stage("config");
    }

    stage("align", [&](const fs::path& dir) {
        const Mesh input = load_mesh(config.mesh);
        nlohmann::json info;
        if (config.align) {
            auto pca = align_pca(input);
            info["pca"] = {{"mean", {pca.mean.x, pca.mean.y, pca.mean.z}},
                           {"rotation", detail::mat_json(pca.rotation)},
                           {"eigenvalues", pca.eigenvalues}};
            res.aligned = std::move(pca.mesh);
            PoseEstimator estimator;
            OrientationOptions opts;
            opts.max_iters = config.max_iters;
            switch (config.keypoint_source) {
                case PipelineConfig::KeypointSource::none: break;
                case PipelineConfig::KeypointSource::oracle:
                    estimator = load_keypoint_oracle(config.keypoint_path);
                    break;
                case PipelineConfig::KeypointSource::file: {
                    // A static file describes one render only.
                    const KeypointSet kp = load_keypoints(config.keypoint_path);
                    estimator = [kp](const RenderBuffers&) { return kp; };
                    opts.max_iters = 1;
                    break;
                }
                case PipelineConfig::KeypointSource::command:
                    estimator = command_estimator(config.keypoint_command, dir);
                    break;
            }
            if (estimator) {
                res.orientation = correct_orientation(res.aligned, estimator, default_renderer(), opts);
                res.aligned = res.orientation->mesh;
                nlohmann::json trace = nlohmann::json::array();
                for (const auto& r : res.orientation->trace) trace.push_back(to_json(r));
                info["orientation"] = {{"trace", trace},
                                       {"estimator_calls", res.orientation->estimator_calls},
                                       {"converged", res.orientation->converged},
                                       {"keypoints", to_json(res.orientation->last_keypoints)}};
            }
        } else {
            res.aligned = input;
        }
        const auto mesh_path = dir / "aligned_mesh.ply", info_path = dir / "alignment.json";
        save_ply(res.aligned, mesh_path);
        detail::write_json(info, info_path);
        std::remove((dir / "pose_input.pgm").c_str());
        return std::vector<fs::path>{mesh_path, info_path};
    });

    const auto views = config.views_file ? load_views(*config.views_file, config.render_size, config.fov_deg)
                                         : default_views(config.render_size, config.render_size, config.fov_deg);
    std::vector<RenderBuffers> buffers(views.size());
    stage("render", [&](const fs::path& dir) {
        const auto framing = bounding_sphere(res.aligned.vertices);
        parallel_for(views.size(), [&](std::size_t i) { buffers[i] = rasterize(res.aligned, views[i], framing); });
        std::vector<fs::path> files;
        nlohmann::json listing = nlohmann::json::array();
        for (std::size_t i = 0; i < views.size(); ++i) {
            const auto stem = view_stem(i);
            write_triangle_ids(buffers[i].triangle_id, dir / (stem + ".tid"));
            write_depth(buffers[i].depth, dir / (stem + ".depth"));
            write_pgm(depth_preview(buffers[i]), dir / (stem + ".pgm"));
            for (const char* ext : {".tid", ".depth", ".pgm"}) files.push_back(dir / (stem + ext));
            listing.push_back(to_json(views[i]));
        }
        detail::write_json(listing, dir / "views.json");
        files.push_back(dir / "views.json");
        return files;
    });

    stage("fuse", [&](const fs::path& dir) {
        std::vector<LabelImage> images(views.size());
        if (config.label_source == PipelineConfig::LabelSource::images) {
            for (std::size_t i = 0; i < views.size(); ++i) {
                const auto stem = view_stem(i);
                std::optional<fs::path> found;
                for (const char* ext : {".png", ".pgm"})
                    if (fs::exists(config.label_dir / (stem + ext))) {
                        found = config.label_dir / (stem + ext);
                        break;
                    }
                if (!found)
                    throw ValidationError("no label image for view " + std::to_string(i) + " (elevation " +
                                          std::to_string(static_cast<int>(views[i].elevation_deg)) + ", azimuth " +
                                          std::to_string(static_cast<int>(views[i].azimuth_deg)) + "): expected " +
                                          (config.label_dir / (stem + ".png")).string() + " or .pgm");
                images[i] = read_label_image(*found);
            }
        } else {
            const auto tri_labels = load_labels_txt(config.oracle_triangle_labels);
            if (tri_labels.size() != res.aligned.triangles.size())
                throw ValidationError("oracle triangle labels: " + std::to_string(tri_labels.size()) + " labels for " +
                                      std::to_string(res.aligned.triangles.size()) + " triangles");
            for (std::size_t i = 0; i < views.size(); ++i) {
                images[i] = oracle_label_image(buffers[i], tri_labels);
                add_label_noise(images[i], config.oracle_noise, space->size(), rng);
            }
        }
        std::vector<LabeledView> lv;
        for (std::size_t i = 0; i < views.size(); ++i) lv.push_back({buffers[i], images[i]});
        res.votes = accumulate_votes(res.aligned, lv, space->size());
        res.fused = finalize_labels(res.aligned, res.votes, space);
        const auto path = dir / "fused.ply";
        save_labeled_cloud(res.fused, path);
        return std::vector<fs::path>{path, sidecar_path(path)};
    });

    stage("denoise", [&](const fs::path& dir) {
        DenoiseStats stats;
        res.denoised = denoise_labels(res.fused, config.fuse, &stats);
        if (config.rules) {
            const auto rules = load_rules(*config.rules, *space);
            res.denoised = apply_rules(res.denoised, rules);
        }
        const auto path = dir / "denoised.ply", info = dir / "denoise.json";
        save_labeled_cloud(res.denoised, path);
        detail::write_json({{"demoted", stats.demoted}, {"relabeled", stats.relabeled}}, info);
        return std::vector<fs::path>{path, sidecar_path(path), info};
    });

    stage("sample", [&](const fs::path& dir) {
        const auto& pts = res.denoised.points;
        const std::size_t k = std::min(config.k, pts.size());
        const auto part = partition(pts, {config.window_size, config.bits_per_axis});
        const auto weights = resolve_weights(config.oversample, *space);
        const auto plan = build_plan(part, k, res.denoised.labels, weights);
        res.sample_indices = fps_windowed(pts, part, plan);
        res.sampled = {{}, {}, space};
        for (auto i : res.sample_indices) {
            res.sampled.points.push_back(pts[i]);
            res.sampled.labels.push_back(res.denoised.labels[i]);
        }
        const auto cloud = dir / "sampled.ply", idx = dir / "sample_indices.txt", plan_path = dir / "plan.json";
        save_labeled_cloud(res.sampled, cloud);
        std::string lines;
        for (auto i : res.sample_indices) lines += std::to_string(i) + "\n";
        detail::write_file(idx, lines);
        nlohmann::json w = nlohmann::json::object();
        for (const auto& [l, v] : weights) w[std::to_string(l)] = v;
        detail::write_json({{"k", k}, {"window_size", config.window_size}, {"windows", part.window_count()},
                            {"pad_count", part.pad_count}, {"quota", plan.per_window_quota}, {"weights", w}},
                           plan_path);
        return std::vector<fs::path>{cloud, sidecar_path(cloud), idx, plan_path};
    });

    nlohmann::json manifest{{"version", kPipelineConfigVersion}, {"seed", config.seed}, {"stages", stages}};
    if (config.ground_truth) {
        try {
            const auto gt = load_labeled_cloud(*config.ground_truth, space);
            res.metrics = evaluate(confusion(gt, res.denoised));
            LabeledCloud gt_vis{{}, {}, space}, pred_vis{{}, {}, space};
            for (std::size_t v = 0; v < gt.size(); ++v)
                if (res.votes.voted(v)) {
                    gt_vis.points.push_back(gt.points[v]);
                    gt_vis.labels.push_back(gt.labels[v]);
                    pred_vis.points.push_back(res.denoised.points[v]);
                    pred_vis.labels.push_back(res.denoised.labels[v]);
                }
            if (gt_vis.size() > 0) res.metrics_visible = evaluate(confusion(gt_vis, pred_vis));
            nlohmann::json report{{"all_vertices", to_json(*res.metrics, space.get())}};
            if (res.metrics_visible) report["visible_vertices"] = to_json(*res.metrics_visible, space.get());
            const auto path = config.output_dir / "report.json";
            detail::write_json(report, path);
            manifest["evaluation"] = {{"path", "report.json"}, {"sha256", sha256_file(path)}};
        } catch (...) {
            detail::rethrow_in_stage("evaluate");
        }
    }
    detail::write_json(manifest, config.output_dir / "manifest.json");
    res.manifest = std::move(manifest);
    return res;
}

struct SyntheticDataset {
    fs::path dir;
    fs::path config;         // label images read from disk
    fs::path oracle_config;  // label images rasterized from triangle labels at run time
    HumanoidBundle bundle;
};

// Writes a synthetic humanoid with everything a pipeline run needs: mesh,
// ground truth, label space, keypoint oracle, triangle labels, one label image
// per default view and two configs. The label images are rendered after the
// same alignment the pipeline performs, as a 2D parser would see them.
inline SyntheticDataset write_synthetic_dataset(const fs::path& dir, const HumanoidOptions& opts, std::size_t k = 10000) {
    SyntheticDataset d;
    d.dir = dir;
    fs::create_directories(dir / "labels");
    d.bundle = generate_humanoid(opts);
    const auto& h = d.bundle.humanoid;
    const auto space = h.ground_truth.label_space;
    save_ply(h.mesh, dir / "mesh.ply");
    save_labeled_cloud(h.ground_truth, dir / "ground_truth.ply");
    save_label_space(*space, dir / "label_space.json");
    detail::write_json(to_json(d.bundle.oracle), dir / "oracle.json");
    save_labels_txt(h.triangle_labels, dir / "triangle_labels.txt");
    detail::write_json(to_json(d.bundle.keypoints.front()), dir / "keypoints_front.json");

    auto aligned = align_pca(h.mesh).mesh;
    aligned = correct_orientation(aligned, d.bundle.oracle, default_renderer()).mesh;
    const auto views = default_views(opts.image_size, opts.image_size);
    const auto framing = bounding_sphere(aligned.vertices);
    std::mt19937_64 noise_rng(opts.seed ^ 0x9E3779B97F4A7C15ull);
    for (std::size_t i = 0; i < views.size(); ++i) {
        auto img = oracle_label_image(rasterize(aligned, views[i], framing), h.triangle_labels);
        add_label_noise(img, opts.label_noise, space->size(), noise_rng);
        write_png_gray(img, dir / "labels" / (view_stem(i) + ".png"));
    }

    nlohmann::json cfg{
        {"version", kPipelineConfigVersion},
        {"mesh", "mesh.ply"},
        {"label_space", "label_space.json"},
        {"ground_truth", "ground_truth.ply"},
        {"labels", {{"source", "images"}, {"dir", "labels"}}},
        {"align", {{"enabled", true}, {"max_iters", 10}, {"keypoints", {{"source", "oracle"}, {"file", "oracle.json"}}}}},
        {"render", {{"size", opts.image_size}, {"fov", 40.0}, {"views", "default"}}},
        {"fuse", {{"eps", 0.03}, {"min_samples", 100}, {"knn", 40}}},
        {"sample", {{"k", k}, {"window_size", 5000}, {"bits", 16}}},
        {"output_dir", "out"},
        {"seed", opts.seed}};
    d.config = dir / "config.json";
    detail::write_json(cfg, d.config);
    cfg["labels"] = {{"source", "oracle"}, {"triangle_labels", "triangle_labels.txt"}, {"noise", opts.label_noise}};
    cfg["output_dir"] = "out_oracle";
    d.oracle_config = dir / "config_oracle.json";
    detail::write_json(cfg, d.oracle_config);
    return d;
}

}  // namespace meshparse
