#include <gtest/gtest.h>

#include <random>

#include "meshparse/confusion.hpp"
#include "meshparse/label_space.hpp"
#include "meshparse/mesh_io.hpp"
#include "test_util.hpp"

using namespace meshparse;

TEST(MeshIo, MinimalObj) {
    TempDir tmp("obj_min");
    write_text(tmp / "a.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    const auto m = load_mesh(tmp / "a.obj");
    EXPECT_EQ(m.vertices.size(), 3u);
    ASSERT_EQ(m.triangles.size(), 1u);
    EXPECT_EQ(m.triangles[0], (Triangle{0, 1, 2}));
}

TEST(MeshIo, ObjIndexOutOfRange) {
    TempDir tmp("obj_oob");
    write_text(tmp / "a.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5\n");
    EXPECT_THROW(load_mesh(tmp / "a.obj"), ValidationError);
}

TEST(MeshIo, ObjParseErrorNamesLine) {
    TempDir tmp("obj_bad");
    write_text(tmp / "a.obj", "v 0 0 0\nv 1 zz 0\n");
    try {
        load_mesh(tmp / "a.obj");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(MeshIo, ObjQuadsAndNegativeIndices) {
    TempDir tmp("obj_quad");
    write_text(tmp / "a.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4/1 -3/2 -2/3 -1/4\n");
    const auto m = load_mesh(tmp / "a.obj");
    ASSERT_EQ(m.triangles.size(), 2u);
    EXPECT_EQ(m.triangles[0], (Triangle{0, 1, 2}));
    EXPECT_EQ(m.triangles[1], (Triangle{0, 2, 3}));
}

static Mesh random_mesh(std::size_t nv, std::size_t nt, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-5, 5);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(nv - 1));
    Mesh m;
    for (std::size_t i = 0; i < nv; ++i) m.vertices.push_back({u(rng), u(rng), u(rng)});
    for (std::size_t i = 0; i < nt; ++i) m.triangles.push_back({pick(rng), pick(rng), pick(rng)});
    return m;
}

TEST(MeshIo, RoundTripPlyAndObj) {
    TempDir tmp("roundtrip");
    const auto m = random_mesh(10000, 20000, 7);
    for (const char* name : {"m.ply", "m.obj"}) {
        save_mesh(m, tmp / name);
        const auto back = load_mesh(tmp / name);
        ASSERT_EQ(back.vertices.size(), m.vertices.size()) << name;
        for (std::size_t i = 0; i < m.vertices.size(); ++i) {
            ASSERT_EQ(back.vertices[i].x, m.vertices[i].x) << name << " vertex " << i;
            ASSERT_EQ(back.vertices[i].y, m.vertices[i].y);
            ASSERT_EQ(back.vertices[i].z, m.vertices[i].z);
        }
        EXPECT_EQ(back.triangles, m.triangles) << name;
    }
}

TEST(MeshIo, AsciiPly) {
    TempDir tmp("ascii_ply");
    write_text(tmp / "a.ply",
               "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
               "property int label\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n"
               "0 0 0 1\n1 0 0 2\n0 1 0 3\n3 0 1 2\n");
    const auto m = load_mesh(tmp / "a.ply");
    EXPECT_EQ(m.vertices.size(), 3u);
    EXPECT_EQ(m.triangles.size(), 1u);
    const auto c = load_labeled_cloud(tmp / "a.ply", std::make_shared<const LabelSpace>(label_spaces::synthetic()));
    EXPECT_EQ(c.labels, (std::vector<Label>{1, 2, 3}));
}

TEST(MeshIo, TruncatedBinaryPly) {
    TempDir tmp("trunc_ply");
    const auto m = random_mesh(10, 5, 1);
    save_mesh(m, tmp / "m.ply");
    auto bytes = read_text(tmp / "m.ply");
    bytes.resize(bytes.size() - 7);
    write_text(tmp / "m.ply", bytes);
    EXPECT_THROW(load_mesh(tmp / "m.ply"), ParseError);
}

TEST(LabeledCloudIo, SinglePointAndSidecar) {
    TempDir tmp("cloud1");
    auto space = std::make_shared<const LabelSpace>(label_spaces::cihp());
    LabeledCloud c{{{1, 2, 3}}, {0}, space};
    save_labeled_cloud(c, tmp / "c.ply");
    EXPECT_NE(read_text(tmp / "c.ply").find("property ushort label"), std::string::npos);
    EXPECT_EQ(read_text(tmp / "c.labels.txt"), "0\n");
    const auto back = load_labeled_cloud(tmp / "c.ply", space);
    EXPECT_EQ(back.labels, c.labels);
}

TEST(LabeledCloudIo, RoundTrip) {
    TempDir tmp("cloudrt");
    auto space = std::make_shared<const LabelSpace>(label_spaces::sapiens_v2());
    std::mt19937_64 rng(3);
    LabeledCloud c{{}, {}, space};
    for (int i = 0; i < 5000; ++i) {
        c.points.push_back({float(i), float(i % 7), float(i % 11)});
        c.labels.push_back(static_cast<Label>(rng() % space->size()));
    }
    save_labeled_cloud(c, tmp / "c.ply");
    const auto back = load_labeled_cloud(tmp / "c.ply", space);
    EXPECT_EQ(back.labels, c.labels);
    ASSERT_EQ(back.points.size(), c.points.size());
    EXPECT_EQ(load_labels_txt(tmp / "c.labels.txt"), c.labels);
}

TEST(LabeledCloudIo, UnwritablePath) {
    auto space = std::make_shared<const LabelSpace>(label_spaces::cihp());
    LabeledCloud c{{{0, 0, 0}}, {0}, space};
    EXPECT_THROW(save_labeled_cloud(c, "/nonexistent_dir/x/c.ply"), IoError);
}

TEST(LabeledCloudIo, PaletteDeterministic) {
    TempDir tmp("palette");
    auto space = std::make_shared<const LabelSpace>(label_spaces::cihp());
    LabeledCloud c{{}, {}, space};
    for (Label l = 0; l < space->size(); ++l) {
        c.points.push_back({float(l), 0, 0});
        c.labels.push_back(l);
    }
    save_labeled_cloud(c, tmp / "a.ply");
    save_labeled_cloud(c, tmp / "b.ply");
    EXPECT_EQ(read_text(tmp / "a.ply"), read_text(tmp / "b.ply"));
    EXPECT_EQ(palette_color(0), (std::array<std::uint8_t, 3>{0, 0, 0}));
}

TEST(LabelSpace, BuiltinsValid) {
    for (const char* name : {"cihp", "sapiens-v1", "sapiens-v2", "synthetic"}) {
        const auto s = label_spaces::by_name(name);
        EXPECT_NO_THROW(s.validate()) << name;
        EXPECT_EQ(s.labels.front(), "background");
    }
    EXPECT_EQ(label_spaces::cihp().size(), 20u);
}

TEST(LabelSpace, RejectsDuplicatesAndMissingBackground) {
    EXPECT_THROW((LabelSpace{"custom", {"background", "a", "a"}}.validate()), ValidationError);
    EXPECT_THROW((LabelSpace{"custom", {"a", "background"}}.validate()), ValidationError);
}

TEST(LabelSpace, JsonRoundTrip) {
    TempDir tmp("ls");
    save_label_space(label_spaces::sapiens_v1(), tmp / "ls.json");
    EXPECT_EQ(*load_label_space(tmp / "ls.json"), label_spaces::sapiens_v1());
}

namespace {
LabeledCloud cloud_of(std::vector<Label> labels, LabelSpacePtr space) {
    LabeledCloud c{std::vector<Vec3f>(labels.size()), std::move(labels), std::move(space)};
    return c;
}
}  // namespace

TEST(Confusion, Diagonal) {
    auto space = std::make_shared<const LabelSpace>(label_spaces::synthetic());
    const auto cm = confusion(cloud_of({1, 1, 2}, space), cloud_of({1, 1, 2}, space));
    EXPECT_EQ(cm.at(1, 1), 2u);
    EXPECT_EQ(cm.at(2, 2), 1u);
    EXPECT_EQ(cm.total(), 3u);
}

TEST(Confusion, OffDiagonalMatchesPairCount) {
    auto space = std::make_shared<const LabelSpace>(label_spaces::synthetic());
    const std::vector<Label> gt{1, 1, 2, 2}, pred{1, 2, 2, 1};
    const auto cm = confusion(cloud_of(gt, space), cloud_of(pred, space));
    for (std::size_t i = 0; i < space->size(); ++i)
        for (std::size_t j = 0; j < space->size(); ++j) {
            std::uint64_t n = 0;
            for (std::size_t p = 0; p < gt.size(); ++p) n += gt[p] == i && pred[p] == j;
            EXPECT_EQ(cm.at(i, j), n) << i << "," << j;
        }
}

TEST(Confusion, EmptyAndMismatch) {
    auto a = std::make_shared<const LabelSpace>(label_spaces::synthetic());
    auto b = std::make_shared<const LabelSpace>(label_spaces::cihp());
    EXPECT_EQ(confusion(cloud_of({}, a), cloud_of({}, a)).total(), 0u);
    EXPECT_THROW(confusion(cloud_of({1}, a), cloud_of({1, 1}, a)), ContractError);
    EXPECT_THROW(confusion(cloud_of({1}, a), cloud_of({1}, b)), ContractError);
}
