#include "fxctl/scene.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fxctl/error.hpp"

namespace fxctl {

using nlohmann::json;

namespace {

constexpr const char* kStage = "scene";

Vec3 parse_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorKind::validation, kStage, what + " must be a 3-element array");
  }
  Vec3 v{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
    throw Error(ErrorKind::validation, kStage, what + " is not finite");
  }
  return v;
}

json parse_json(std::string_view document, const char* what) {
  try {
    return json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, kStage, std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

SceneManifest parse_scene(std::string_view document) {
  const json j = parse_json(document, "scene manifest");
  try {
    SceneManifest scene;
    scene.template_kind = parse_template_kind(j.at("template").get<std::string>());
    scene.seed = j.value("seed", std::uint64_t{0});
    for (const auto& o : j.value("objects", json::array())) {
      const auto name = o.at("name").get<std::string>();
      scene.objects.push_back({name, parse_vec3(o.at("position"), "position of '" + name + "'")});
    }
    return scene;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, kStage, std::string("invalid scene manifest: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::validation, kStage, e.reason());
  }
}

SceneManifest load_scene_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, kStage, "cannot read scene file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

std::string serialize_scene(const SceneManifest& scene) {
  nlohmann::ordered_json j;
  j["format"] = "fxctl.scene";
  j["version"] = 1;
  j["template"] = std::string(to_string(scene.template_kind));
  j["seed"] = scene.seed;
  j["objects"] = nlohmann::ordered_json::array();
  for (const auto& o : scene.objects) {
    j["objects"].push_back({{"name", o.name}, {"position", {o.position.x, o.position.y, o.position.z}}});
  }
  return j.dump(2);
}

SketchSubmission parse_sketch(std::string_view document) {
  const json j = parse_json(document, "sketch");
  try {
    SketchSubmission s;
    for (const auto& st : j.value("strokes", json::array())) {
      SketchStroke stroke;
      stroke.brush_id = st.value("brush_id", 0);
      for (const auto& p : st.at("points")) stroke.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      s.strokes.push_back(std::move(stroke));
    }
    for (const auto& b : j.value("used_brushes", json::array())) {
      s.used_brushes.push_back(
          {b.value("brush_id", 0), b.at("color").get<std::string>(), b.at("functionality").get<std::string>()});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, kStage, std::string("invalid sketch: ") + e.what());
  }
}

}  // namespace fxctl
