#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "meshparse/error.hpp"
#include "meshparse/types.hpp"

namespace meshparse {

namespace label_spaces {

inline LabelSpace cihp() {
    return {"cihp",
            {"background", "hat", "hair", "gloves", "sunglasses", "upper clothes", "dress", "coat", "socks",
             "pants", "torso-skin", "scarf", "skirt", "face", "left arm", "right arm", "left leg", "right leg",
             "left shoe", "right shoe"}};
}

inline LabelSpace sapiens_v1() {
    return {"sapiens-v1",
            {"background", "apparel", "face and neck", "hair", "left foot", "left hand", "left arm", "left leg",
             "lower clothing", "right foot", "right hand", "right arm", "right leg", "torso", "upper clothing"}};
}

inline LabelSpace sapiens_v2() {
    LabelSpace s = sapiens_v1();
    s.name = "sapiens-v2";
    for (const char* extra : {"lip", "teeth", "tongue"}) s.labels.emplace_back(extra);
    return s;
}

// Reduced part set produced by the synthetic humanoid generator.
inline LabelSpace synthetic() {
    return {"custom",
            {"background", "hair", "face and neck", "torso", "left arm", "right arm", "left hand", "right hand",
             "left leg", "right leg", "left foot", "right foot"}};
}

inline LabelSpace by_name(const std::string& name) {
    if (name == "cihp") return cihp();
    if (name == "sapiens-v1") return sapiens_v1();
    if (name == "sapiens-v2") return sapiens_v2();
    if (name == "synthetic") return synthetic();
    throw ContractError("unknown built-in label space '" + name + "'");
}

}  // namespace label_spaces

inline nlohmann::json to_json(const LabelSpace& space) {
    return {{"name", space.name}, {"labels", space.labels}};
}

inline LabelSpace label_space_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("name") || !j.contains("labels"))
        throw ParseError("label space JSON needs \"name\" and \"labels\"");
    LabelSpace s;
    s.name = j.at("name").get<std::string>();
    s.labels = j.at("labels").get<std::vector<std::string>>();
    s.validate();
    return s;
}

inline LabelSpacePtr load_label_space(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open label space file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return std::make_shared<const LabelSpace>(label_space_from_json(j));
}

inline void save_label_space(const LabelSpace& space, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(space).dump(2) << '\n';
}

// Fixed inspection palette. Index 0 (background) is black.
inline constexpr std::array<std::array<std::uint8_t, 3>, 64> kPalette{{
    {{0, 0, 0}}, {{57, 115, 255}}, {{131, 225, 0}}, {{196, 66, 179}},
    {{19, 166, 141}}, {{255, 191, 115}}, {{94, 51, 225}}, {{8, 196, 0}},
    {{166, 56, 93}}, {{29, 170, 255}}, {{215, 225, 101}}, {{164, 44, 196}},
    {{0, 166, 83}}, {{255, 121, 86}}, {{25, 42, 225}}, {{129, 196, 88}},
    {{166, 37, 123}}, {{0, 245, 255}}, {{225, 188, 76}}, {{101, 22, 196}},
    {{75, 166, 90}}, {{255, 57, 83}}, {{0, 94, 225}}, {{158, 196, 66}},
    {{165, 19, 166}}, {{115, 255, 214}}, {{225, 123, 51}}, {{24, 0, 196}},
    {{75, 166, 56}}, {{255, 29, 133}}, {{101, 195, 225}}, {{196, 189, 44}},
    {{110, 0, 166}}, {{86, 255, 149}}, {{225, 41, 25}}, {{88, 111, 196}},
    {{102, 166, 37}}, {{255, 0, 203}}, {{76, 225, 212}}, {{196, 130, 22}},
    {{105, 75, 166}}, {{57, 255, 65}}, {{225, 0, 58}}, {{66, 137, 196}},
    {{142, 166, 19}}, {{237, 115, 255}}, {{51, 225, 151}}, {{196, 56, 0}},
    {{56, 57, 166}}, {{96, 255, 29}}, {{225, 101, 174}}, {{44, 178, 196}},
    {{166, 137, 0}}, {{176, 86, 255}}, {{25, 225, 74}}, {{196, 88, 93}},
    {{37, 81, 166}}, {{161, 255, 0}}, {{225, 76, 214}}, {{22, 196, 158}},
    {{166, 119, 75}}, {{97, 57, 255}}, {{21, 225, 0}}, {{196, 66, 116}},}};

inline std::array<std::uint8_t, 3> palette_color(Label label) { return kPalette[label % kPalette.size()]; }

}  // namespace meshparse
