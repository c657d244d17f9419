#include "fxctl/panel_io.hpp"

#include <json.hpp>

#include "fxctl/error.hpp"

namespace fxctl {

namespace {

constexpr const char* kStage = "panel_io";
using ojson = nlohmann::ordered_json;

ojson node_to_json(const ControlNode& n) {
  ojson j;
  j["id"] = n.id;
  j["name"] = n.name;
  j["level"] = std::string(to_string(n.level));
  j["description"] = n.description;
  j["range"] = {{"min", n.range.min}, {"max", n.range.max}};
  j["value"] = n.value;
  j["children"] = ojson::array();
  for (const auto& c : n.children) j["children"].push_back({{"id", c.id}, {"weight", c.weight}});
  j["step_labels"] = n.step_labels;
  j["presets"] = ojson::array();
  for (const auto& p : n.presets) {
    ojson values = ojson::object();
    for (const auto& [id, v] : p.values) values[id] = v;
    j["presets"].push_back({{"label", p.label}, {"values", values}});
  }
  j["locked"] = n.locked;
  return j;
}

ControlNode node_from_json(const ojson& j) {
  ControlNode n;
  n.id = j.at("id").get<std::string>();
  n.name = j.at("name").get<std::string>();
  n.level = parse_level(j.at("level").get<std::string>());
  n.description = j.value("description", std::string{});
  n.range.min = j.at("range").at("min").get<double>();
  n.range.max = j.at("range").at("max").get<double>();
  n.value = j.at("value").get<double>();
  for (const auto& c : j.at("children")) n.children.push_back({c.at("id").get<std::string>(), c.at("weight").get<double>()});
  n.step_labels = j.value("step_labels", std::vector<std::string>{});
  for (const auto& p : j.value("presets", ojson::array())) {
    DropdownPreset preset;
    preset.label = p.at("label").get<std::string>();
    for (const auto& [id, v] : p.at("values").items()) preset.values.emplace_back(id, v.get<double>());
    n.presets.push_back(std::move(preset));
  }
  n.locked = j.value("locked", false);
  return n;
}

}  // namespace

std::string serialize_panel(const PanelConfig& panel) {
  ojson j;
  j["format"] = kPanelFormat;
  j["version"] = kPanelVersion;
  j["panel_name"] = panel.panel_name;
  j["system_type"] = panel.system_type;
  j["roots"] = panel.roots;
  j["nodes"] = ojson::array();
  for (const auto& n : panel.nodes) j["nodes"].push_back(node_to_json(n));
  j["bindings"] = ojson::object();
  for (const auto& [id, param] : panel.bindings) j["bindings"][id] = param;
  return j.dump(2);
}

PanelConfig parse_panel(std::string_view document) {
  ojson j;
  try {
    j = ojson::parse(document);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::parse, kStage, std::string("panel document is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", std::string{}) != kPanelFormat) {
    throw Error(ErrorKind::parse, kStage, "not a panel document");
  }
  if (j.value("version", -1) != kPanelVersion) {
    throw Error(ErrorKind::version_mismatch, kStage,
                "panel version " + j.value("version", ojson(nullptr)).dump() + " is not supported (expected " +
                    std::to_string(kPanelVersion) + ")");
  }
  try {
    PanelConfig p;
    p.panel_name = j.at("panel_name").get<std::string>();
    p.system_type = j.at("system_type").get<std::string>();
    p.roots = j.at("roots").get<std::vector<std::string>>();
    for (const auto& n : j.at("nodes")) p.nodes.push_back(node_from_json(n));
    for (const auto& [id, param] : j.at("bindings").items()) p.bindings[id] = param.get<std::string>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, kStage, std::string("malformed panel document: ") + e.what());
  }
}

}  // namespace fxctl
