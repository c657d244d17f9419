#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fxctl/engine.hpp"

namespace fxctl {

struct SceneObject {
  std::string name;
  Vec3 position;

  bool operator==(const SceneObject&) const = default;
};

struct SceneManifest {
  std::vector<SceneObject> objects;
  TemplateKind template_kind = TemplateKind::fire;
  std::uint64_t seed = 0;

  bool operator==(const SceneManifest&) const = default;
};

// Throws Error(parse) on malformed JSON, Error(validation) on bad values.
SceneManifest parse_scene(std::string_view document);
SceneManifest load_scene_file(const std::string& path);
std::string serialize_scene(const SceneManifest& scene);

struct StrokePoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const StrokePoint&) const = default;
};

// brush_id 0 marks an untagged annotation stroke.
struct SketchStroke {
  int brush_id = 0;
  std::vector<StrokePoint> points;

  bool operator==(const SketchStroke&) const = default;
};

struct UsedBrush {
  int brush_id = 0;
  std::string color;
  std::string functionality;

  bool operator==(const UsedBrush&) const = default;
};

struct SketchSubmission {
  std::vector<SketchStroke> strokes;
  std::vector<UsedBrush> used_brushes;
  std::optional<std::string> overlay_png;  // opaque image bytes

  bool operator==(const SketchSubmission&) const = default;
};

SketchSubmission parse_sketch(std::string_view document);

}  // namespace fxctl
