// meshparse command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "meshparse/meshparse.hpp"

namespace mp = meshparse;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool g_json = false;

void emit(const json& j, const std::string& text) {
    if (g_json) std::cout << j.dump(2) << "\n";
    else std::cout << text;
}

mp::LabelSpacePtr space_arg(const std::string& s) { return mp::resolve_label_space(s); }

json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw mp::IoError("cannot open " + p.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw mp::ParseError(p.string() + ": " + e.what());
    }
}

void write_json(const json& j, const fs::path& p) { mp::detail::write_file(p, j.dump(2) + "\n"); }

// A path to an existing file is read as keypoints; anything else runs as a command.
mp::PoseEstimator estimator_from(const std::string& spec, const fs::path& workdir, int& max_iters) {
    if (fs::is_regular_file(spec)) {
        const auto kp = mp::load_keypoints(spec);
        max_iters = 1;
        return [kp](const mp::RenderBuffers&) { return kp; };
    }
    return mp::command_estimator(spec, workdir);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string report_text(const mp::MetricReport& r, const mp::LabelSpace& space) {
    std::string s = fmt("mIoU %.4f  fw mIoU %.4f  Acc %.4f\n", r.miou, r.fw_miou, r.acc);
    for (const auto& c : r.per_class_iou)
        s += fmt("  %-20s %s\n", space.labels[c.label].c_str(), c.iou ? fmt("%.4f", *c.iou).c_str() : "n/a");
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-vertex semantic parsing of human meshes"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = hardware concurrency)");
    app.add_flag("--json", g_json, "Machine-readable output");

    // align
    auto* align = app.add_subcommand("align", "PCA alignment plus keypoint-driven orientation correction");
    std::string a_mesh, a_out, a_kp, a_oracle, a_info;
    int a_iters = 10;
    bool a_no_pca = false;
    align->add_option("mesh", a_mesh)->required()->check(CLI::ExistingFile);
    align->add_option("-o,--out", a_out, "Aligned mesh (.ply/.obj)")->required();
    align->add_option("--keypoints-from", a_kp, "Keypoint JSON file, or a command run on the rendered PGM");
    align->add_option("--oracle", a_oracle, "Keypoint oracle JSON (from synth)")->check(CLI::ExistingFile);
    align->add_option("--max-iters", a_iters)->capture_default_str();
    align->add_option("--info", a_info, "Write the alignment record as JSON");
    align->add_flag("--no-pca", a_no_pca);

    // render
    auto* render = app.add_subcommand("render", "Triangle-ID and depth buffers for a view set");
    std::string r_mesh, r_out, r_views;
    int r_size = 1024;
    double r_fov = 40;
    render->add_option("mesh", r_mesh)->required()->check(CLI::ExistingFile);
    render->add_option("-o,--out-dir", r_out)->required();
    render->add_option("--size", r_size)->capture_default_str();
    render->add_option("--fov", r_fov)->capture_default_str();
    render->add_option("--views", r_views, "JSON array of {azimuth, elevation}")->check(CLI::ExistingFile);

    // fuse
    auto* fuse = app.add_subcommand("fuse", "Back-project label images, then DBSCAN / k-NN denoise");
    std::string f_mesh, f_buffers, f_labels, f_space, f_out, f_rules;
    mp::DbscanParams f_params;
    bool f_raw = false;
    fuse->add_option("mesh", f_mesh)->required()->check(CLI::ExistingFile);
    fuse->add_option("--buffers", f_buffers, "Directory written by `render`")->required()->check(CLI::ExistingDirectory);
    fuse->add_option("--labels", f_labels, "Directory of view_XX.png|pgm label images")->required()->check(CLI::ExistingDirectory);
    fuse->add_option("--label-space", f_space)->required();
    fuse->add_option("-o,--out", f_out)->required();
    fuse->add_option("--eps", f_params.epsilon)->capture_default_str();
    fuse->add_option("--min-samples", f_params.min_samples)->capture_default_str();
    fuse->add_option("--knn", f_params.knn_k)->capture_default_str();
    fuse->add_option("--rules", f_rules)->check(CLI::ExistingFile);
    fuse->add_flag("--no-denoise", f_raw, "Write the raw vote result");

    // serialize
    auto* serialize = app.add_subcommand("serialize", "Morton-order a point set and report its windows");
    std::string s_in, s_out;
    mp::PartitionOptions s_opts;
    serialize->add_option("points", s_in)->required()->check(CLI::ExistingFile);
    serialize->add_option("-o,--out", s_out, "Write `index code` lines in Morton order");
    serialize->add_option("--bits", s_opts.bits_per_axis)->capture_default_str();
    serialize->add_option("--window-size", s_opts.window_size)->capture_default_str();

    // sample
    auto* sample = app.add_subcommand("sample", "Windowed farthest point sampling of a labeled cloud");
    std::string p_in, p_space, p_out, p_indices;
    std::size_t p_k = 10000;
    mp::PartitionOptions p_opts;
    std::vector<std::string> p_over;
    bool p_exact = false;
    sample->add_option("cloud", p_in)->required()->check(CLI::ExistingFile);
    sample->add_option("--label-space", p_space)->required();
    sample->add_option("-k", p_k)->capture_default_str();
    sample->add_option("--window-size", p_opts.window_size)->capture_default_str();
    sample->add_option("--bits", p_opts.bits_per_axis)->capture_default_str();
    sample->add_option("--oversample", p_over, "label=weight, repeatable");
    sample->add_option("-o,--out", p_out)->required();
    sample->add_option("--indices", p_indices);
    sample->add_flag("--exact", p_exact, "Plain FPS over the whole cloud");

    // upsample
    auto* upsample = app.add_subcommand("upsample", "Transfer sampled labels to a full point set (3-NN)");
    std::string u_sampled, u_full, u_space, u_out;
    upsample->add_option("sampled", u_sampled)->required()->check(CLI::ExistingFile);
    upsample->add_option("full", u_full)->required()->check(CLI::ExistingFile);
    upsample->add_option("--label-space", u_space)->required();
    upsample->add_option("-o,--out", u_out)->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "mIoU, fw mIoU and accuracy of a prediction");
    std::string e_gt, e_pred, e_space;
    bool e_include_bg = true;
    evaluate->add_option("ground_truth", e_gt)->required()->check(CLI::ExistingFile);
    evaluate->add_option("prediction", e_pred)->required()->check(CLI::ExistingFile);
    evaluate->add_option("--label-space", e_space)->required();
    evaluate->add_flag("--include-background,!--no-background", e_include_bg, "Count class 0 in the mIoU mean (default on)");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "Run align -> render -> fuse -> denoise -> sample from a config");
    std::string c_config;
    pipeline->add_option("config", c_config)->required()->check(CLI::ExistingFile);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic humanoid and its oracles");
    std::string y_out;
    mp::HumanoidOptions y_opts;
    std::size_t y_k = 10000;
    synth->add_option("-o,--out-dir", y_out)->required();
    synth->add_option("--seed", y_opts.seed)->capture_default_str();
    synth->add_option("--tessellation", y_opts.tessellation)->capture_default_str();
    synth->add_option("--image-size", y_opts.image_size)->capture_default_str();
    synth->add_option("--noise", y_opts.label_noise, "Fraction of covered label pixels repainted")->capture_default_str();
    synth->add_option("--sample-k", y_k, "k written into the generated configs")->capture_default_str();

    // bench
    auto* bench = app.add_subcommand("bench", "Exact vs windowed FPS timing");
    mp::BenchOptions b_opts;
    std::string b_csv;
    bench->add_option("-n", b_opts.n)->capture_default_str();
    bench->add_option("-k", b_opts.k)->capture_default_str();
    bench->add_option("--window-size", b_opts.window_size)->capture_default_str();
    bench->add_option("--trials", b_opts.trials)->capture_default_str();
    bench->add_option("--seed", b_opts.seed)->capture_default_str();
    bench->add_option("--csv", b_csv, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        mp::set_thread_count(threads);

        if (*align) {
            const auto input = mp::load_mesh(a_mesh);
            json info;
            mp::Mesh mesh = input;
            if (!a_no_pca) {
                const auto pca = mp::align_pca(input);
                mesh = pca.mesh;
                info["pca"] = {{"mean", {pca.mean.x, pca.mean.y, pca.mean.z}},
                               {"rotation", mp::detail::mat_json(pca.rotation)},
                               {"eigenvalues", pca.eigenvalues}};
            }
            mp::PoseEstimator est;
            mp::OrientationOptions opts;
            opts.max_iters = a_iters;
            const fs::path workdir = fs::temp_directory_path();
            if (!a_kp.empty() && !a_oracle.empty()) throw mp::ValidationError("--keypoints-from and --oracle are exclusive");
            if (!a_kp.empty()) est = estimator_from(a_kp, workdir, opts.max_iters);
            if (!a_oracle.empty()) est = mp::load_keypoint_oracle(a_oracle);
            std::string text = "aligned " + std::to_string(mesh.vertices.size()) + " vertices\n";
            if (est) {
                const auto res = mp::correct_orientation(mesh, est, mp::default_renderer(), opts);
                mesh = res.mesh;
                json trace = json::array();
                for (const auto& r : res.trace) {
                    trace.push_back(mp::to_json(r));
                    text += fmt("  %-13s %c %+.4f rad\n", r.rule.c_str(), r.axis, r.angle);
                }
                info["orientation"] = {{"trace", trace},
                                       {"estimator_calls", res.estimator_calls},
                                       {"converged", res.converged},
                                       {"mean_ear_confidence", mp::mean_ear_confidence(res.last_keypoints)}};
                text += fmt("  estimator calls %d, converged %s\n", res.estimator_calls, res.converged ? "yes" : "no");
            }
            mp::save_mesh(mesh, a_out);
            if (!a_info.empty()) write_json(info, a_info);
            emit(info, text);
        } else if (*render) {
            const auto mesh = mp::load_mesh(r_mesh);
            const auto views = r_views.empty() ? mp::default_views(r_size, r_size, r_fov) : mp::load_views(r_views, r_size, r_fov);
            fs::create_directories(r_out);
            const auto framing = mp::bounding_sphere(mesh.vertices);
            json listing = json::array();
            std::size_t covered = 0;
            for (std::size_t i = 0; i < views.size(); ++i) {
                const auto b = mp::rasterize(mesh, views[i], framing);
                const auto stem = mp::view_stem(i);
                mp::write_triangle_ids(b.triangle_id, fs::path(r_out) / (stem + ".tid"));
                mp::write_depth(b.depth, fs::path(r_out) / (stem + ".depth"));
                mp::write_pgm(mp::depth_preview(b), fs::path(r_out) / (stem + ".pgm"));
                listing.push_back(mp::to_json(views[i]));
                for (auto id : b.triangle_id.data) covered += id >= 0;
            }
            write_json(listing, fs::path(r_out) / "views.json");
            emit({{"views", listing}, {"covered_pixels", covered}},
                 fmt("rendered %zu views, %zu covered pixels\n", views.size(), covered));
        } else if (*fuse) {
            const auto mesh = mp::load_mesh(f_mesh);
            const auto space = space_arg(f_space);
            const auto listing = read_json(fs::path(f_buffers) / "views.json");
            std::vector<mp::RenderBuffers> buffers;
            std::vector<mp::LabelImage> images;
            for (std::size_t i = 0; i < listing.size(); ++i) {
                const auto stem = mp::view_stem(i);
                buffers.push_back({mp::read_triangle_ids(fs::path(f_buffers) / (stem + ".tid")),
                                   mp::read_depth(fs::path(f_buffers) / (stem + ".depth"))});
                fs::path img = fs::path(f_labels) / (stem + ".png");
                if (!fs::exists(img)) img = fs::path(f_labels) / (stem + ".pgm");
                if (!fs::exists(img)) throw mp::ValidationError("no label image for view " + std::to_string(i) + " in " + f_labels);
                images.push_back(mp::read_label_image(img));
            }
            std::vector<mp::LabeledView> lv;
            for (std::size_t i = 0; i < buffers.size(); ++i) lv.push_back({buffers[i], images[i]});
            const auto votes = mp::accumulate_votes(mesh, lv, space->size());
            auto cloud = mp::finalize_labels(mesh, votes, space);
            mp::DenoiseStats stats;
            if (!f_raw) {
                f_params.validate();
                cloud = mp::denoise_labels(cloud, f_params, &stats);
                if (!f_rules.empty()) cloud = mp::apply_rules(cloud, mp::load_rules(f_rules, *space));
            }
            mp::save_labeled_cloud(cloud, f_out);
            emit({{"vertices", cloud.size()}, {"voted", votes.voted_count()}, {"demoted", stats.demoted},
                  {"relabeled", stats.relabeled}},
                 fmt("%zu vertices, %zu voted, %zu demoted, %zu relabeled\n", cloud.size(), votes.voted_count(),
                     stats.demoted, stats.relabeled));
        } else if (*serialize) {
            const auto pts = mp::load_points(s_in);
            const auto part = mp::partition(pts, s_opts);
            if (!s_out.empty()) {
                std::string lines;
                for (std::size_t i = 0; i < part.order.size(); ++i)
                    lines += std::to_string(part.order[i]) + " " + std::to_string(part.codes[i]) + "\n";
                mp::detail::write_file(s_out, lines);
            }
            emit({{"points", pts.size()}, {"windows", part.window_count()}, {"pad_count", part.pad_count}},
                 fmt("%zu points, %zu windows, %zu virtual pads\n", pts.size(), part.window_count(), part.pad_count));
        } else if (*sample) {
            const auto space = space_arg(p_space);
            const auto cloud = mp::load_labeled_cloud(p_in, space);
            const std::size_t k = std::min(p_k, cloud.size());
            std::vector<std::uint32_t> idx;
            json plan_json;
            if (p_exact) {
                idx = mp::fps_exact(cloud.points, k);
            } else {
                std::map<std::string, double> named;
                for (const auto& o : p_over) {
                    const auto eq = o.rfind('=');
                    if (eq == std::string::npos) throw mp::ValidationError("--oversample expects label=weight, got " + o);
                    try {
                        named[o.substr(0, eq)] = std::stod(o.substr(eq + 1));
                    } catch (const std::exception&) {
                        throw mp::ValidationError("bad weight in --oversample " + o);
                    }
                }
                const auto part = mp::partition(cloud.points, p_opts);
                const auto plan = mp::build_plan(part, k, cloud.labels, mp::resolve_weights(named, *space));
                idx = mp::fps_windowed(cloud.points, part, plan);
                plan_json = {{"windows", part.window_count()}, {"quota", plan.per_window_quota}};
            }
            mp::LabeledCloud out{{}, {}, space};
            for (auto i : idx) {
                out.points.push_back(cloud.points[i]);
                out.labels.push_back(cloud.labels[i]);
            }
            mp::save_labeled_cloud(out, p_out);
            if (!p_indices.empty()) {
                std::string lines;
                for (auto i : idx) lines += std::to_string(i) + "\n";
                mp::detail::write_file(p_indices, lines);
            }
            const double r = mp::covering_radius(cloud.points, idx);
            emit({{"samples", idx.size()}, {"covering_radius", r}, {"plan", plan_json}},
                 fmt("%zu samples, covering radius %.6g\n", idx.size(), r));
        } else if (*upsample) {
            const auto space = space_arg(u_space);
            const auto sampled = mp::load_labeled_cloud(u_sampled, space);
            const auto full = mp::upsample_labels(sampled, mp::load_points(u_full));
            mp::save_labeled_cloud(full, u_out);
            emit({{"points", full.size()}}, fmt("upsampled to %zu points\n", full.size()));
        } else if (*evaluate) {
            const auto space = space_arg(e_space);
            const auto gt = mp::load_labeled_cloud(e_gt, space);
            const auto pred = mp::load_labeled_cloud(e_pred, space);
            const auto report = mp::evaluate(mp::confusion(gt, pred), {e_include_bg});
            emit(mp::to_json(report, space.get()), report_text(report, *space));
        } else if (*pipeline) {
            const auto res = mp::run_pipeline(mp::load_pipeline_config(c_config));
            std::string text = "output " + res.output_dir.string() + "\n";
            for (const auto& s : res.manifest.at("stages"))
                text += fmt("  %-8s %zu artifacts\n", s.at("name").get<std::string>().c_str(), s.at("artifacts").size());
            json out = res.manifest;
            if (res.metrics) {
                out["metrics"] = mp::to_json(*res.metrics);
                text += "all vertices: " + report_text(*res.metrics, *res.fused.label_space);
            }
            if (res.metrics_visible) {
                out["metrics_visible"] = mp::to_json(*res.metrics_visible);
                text += fmt("visible vertices: Acc %.4f\n", res.metrics_visible->acc);
            }
            emit(out, text);
        } else if (*synth) {
            const auto ds = mp::write_synthetic_dataset(y_out, y_opts, y_k);
            const auto& h = ds.bundle.humanoid;
            const auto space = h.ground_truth.label_space;
            std::map<std::string, std::size_t> hist;
            for (auto l : h.ground_truth.labels) ++hist[space->labels[l]];
            std::string text = fmt("%zu vertices, %zu triangles\n", h.mesh.vertices.size(), h.mesh.triangles.size());
            for (const auto& [name, n] : hist) text += fmt("  %-14s %zu\n", name.c_str(), n);
            emit({{"vertices", h.mesh.vertices.size()}, {"triangles", h.mesh.triangles.size()}, {"label_histogram", hist}},
                 text);
        } else if (*bench) {
            const auto r = mp::bench_fps(b_opts);
            std::ostringstream csv;
            mp::write_bench_csv(r, b_opts, csv);
            if (!b_csv.empty()) mp::detail::write_file(b_csv, csv.str());
            json rows = json::array();
            for (const auto& row : r.rows)
                rows.push_back({{"method", row.method}, {"median_seconds", row.median_seconds},
                                {"covering_radius", row.covering_radius}});
            emit({{"rows", rows}, {"speedup", r.speedup()}, {"identical_sets", r.identical_sets}},
                 (b_csv.empty() ? csv.str() : "") + fmt("speedup %.2fx\n", r.speedup()));
        }
    } catch (const mp::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mp::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mp::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
