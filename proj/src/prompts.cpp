#include "fxctl/prompts.hpp"

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fxctl/error.hpp"

namespace fxctl {

namespace {

constexpr const char* kStage = "prompt";

const std::regex& slot_pattern() {
  static const std::regex re(R"(\[[A-Z][A-Z0-9_]*\])");
  return re;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      return lines;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
}

std::string substitute(const std::string& line, const SlotMap& slots, const SlotMap* item,
                       std::set<std::string>& missing) {
  std::string out;
  auto last = line.cbegin();
  for (std::sregex_iterator it(line.begin(), line.end(), slot_pattern()), end; it != end; ++it) {
    const auto& m = *it;
    out.append(last, m[0].first);
    const std::string name = m.str().substr(1, m.length() - 2);
    const std::string* value = nullptr;
    if (item != nullptr) {
      if (auto f = item->find(name); f != item->end()) value = &f->second;
    }
    if (value == nullptr) {
      if (auto f = slots.find(name); f != slots.end()) value = &f->second;
    }
    if (value == nullptr) {
      missing.insert(name);
    } else {
      out += *value;
    }
    last = m[0].second;
  }
  out.append(last, line.cend());
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, kStage, "cannot read template '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(PromptId id) noexcept {
  switch (id) {
    case PromptId::add_edit: return "add_edit";
    case PromptId::brush_system: return "brush_system";
    case PromptId::brush_user: return "brush_user";
    case PromptId::intent_decomposition: return "intent_decomposition";
    case PromptId::concept_ui: return "concept_ui";
    case PromptId::attribute_ui: return "attribute_ui";
    case PromptId::default_value: return "default_value";
  }
  return "add_edit";
}

PromptId parse_prompt_id(std::string_view name) {
  for (auto id : kAllPrompts)
    if (to_string(id) == name) return id;
  throw Error(ErrorKind::validation, kStage, "unknown prompt template '" + std::string(name) + "'");
}

PromptSettings prompt_settings(PromptId id) {
  switch (id) {
    case PromptId::add_edit: return {0.1, 4000, true, true, false};
    case PromptId::brush_system:
    case PromptId::brush_user: return {0.1, 1000, false, true, true};
    case PromptId::intent_decomposition: return {0.1, 4000, true, true, false};
    case PromptId::concept_ui: return {0.2, 1200, false, false, false};
    case PromptId::attribute_ui: return {0.1, 3000, false, true, false};
    case PromptId::default_value: return {0.1, 300, false, true, false};
  }
  return {};
}

std::vector<std::string> template_slots(std::string_view body) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  const std::string text(body);
  for (std::sregex_iterator it(text.begin(), text.end(), slot_pattern()), end; it != end; ++it) {
    auto name = it->str().substr(1, it->length() - 2);
    if (seen.insert(name).second) out.push_back(std::move(name));
  }
  return out;
}

std::string render_template(std::string_view body, const SlotMap& slots, const std::vector<SlotMap>& loop_items) {
  const auto lines = split_lines(body);
  std::vector<std::string> out;
  std::set<std::string> missing;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i] == kLoopMarker && i + 1 < lines.size()) {
      ++i;
      for (const auto& item : loop_items) out.push_back(substitute(lines[i], slots, &item, missing));
      continue;
    }
    out.push_back(substitute(lines[i], slots, nullptr, missing));
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw Error(ErrorKind::render, kStage, "unresolved template slot(s): " + names);
  }
  std::string text;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i > 0) text += '\n';
    text += out[i];
  }
  return text;
}

TemplateBundle TemplateBundle::load(const std::filesystem::path& dir) {
  TemplateBundle b;
  for (auto id : kAllPrompts) b.bodies_[id] = read_text(dir / (std::string(to_string(id)) + ".txt"));
  b.sketch_block_ = read_text(dir / "sketch_context_block.txt");
  try {
    const auto j = nlohmann::json::parse(read_text(dir / "conditional.json"));
    for (const auto& [slot, texts] : j.items()) {
      b.conditionals_[slot] = {texts.value("present", ""), texts.value("absent", "")};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, kStage, std::string("malformed conditional.json: ") + e.what());
  }
  return b;
}

const std::string& TemplateBundle::body(PromptId id) const { return bodies_.at(id); }

const ConditionalText& TemplateBundle::conditional(std::string_view slot) const {
  auto it = conditionals_.find(slot);
  if (it == conditionals_.end()) {
    throw Error(ErrorKind::render, kStage, "no conditional text for slot " + std::string(slot));
  }
  return it->second;
}

std::string prompt_type_name(TemplateKind kind) {
  return kind == TemplateKind::trail ? "trail-effect" : std::string(to_string(kind));
}

GenerationContext make_context(const SystemState& state, const Catalog& catalog, std::string user_prompt,
                               std::vector<SceneObject> scene_objects) {
  GenerationContext ctx;
  ctx.template_kind = state.template_kind;
  ctx.system_type = prompt_type_name(state.template_kind);
  ctx.user_prompt = std::move(user_prompt);
  ctx.scene_objects = std::move(scene_objects);
  if (!state.emitters.empty()) {
    const auto& c = state.emitters.front().config;
    ctx.system_position = {c.position_x, c.position_y, c.position_z};
  }
  for (const auto& spec : catalog.specs()) ctx.current_values[spec.name] = read_parameter(state, spec.name);
  return ctx;
}

std::string scene_objects_text(const std::vector<SceneObject>& objects) {
  if (objects.empty()) return "no objects";
  std::string out;
  for (const auto& o : objects) {
    if (!out.empty()) out += ", ";
    out += o.name + " at [" + format_number(o.position.x) + ", " + format_number(o.position.y) + ", " +
           format_number(o.position.z) + "]";
  }
  return out;
}

std::string brush_descriptions_json(const std::vector<UsedBrush>& brushes) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& b : brushes) arr.push_back({{"color", b.color}, {"functionality", b.functionality}});
  return arr.dump(2);
}

std::string sketch_info_text(const SketchSubmission& sketch) {
  nlohmann::ordered_json j;
  j["strokes"] = nlohmann::ordered_json::array();
  for (const auto& s : sketch.strokes) {
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : s.points) pts.push_back({p.x, p.y});
    j["strokes"].push_back({{"brush_id", s.brush_id}, {"points", pts}});
  }
  j["used_brushes"] = nlohmann::ordered_json::array();
  for (const auto& b : sketch.used_brushes) {
    j["used_brushes"].push_back({{"brush_id", b.brush_id}, {"color", b.color}, {"functionality", b.functionality}});
  }
  return j.dump();
}

bool has_used_brushes(const GenerationContext& context) {
  return context.sketch.has_value() && !context.sketch->used_brushes.empty();
}

SlotMap context_slots(const GenerationContext& context, const Catalog& catalog, const TemplateBundle& bundle) {
  SlotMap s;
  s["PARTICLE_SYSTEM_TYPE"] = context.system_type;
  s["CURRENT_TYPE"] = context.system_type;
  s["USER_PROMPT"] = context.user_prompt;
  s["USER_INTENT"] = context.user_prompt;
  s["AVAILABLE_TYPES"] = template_library_list();
  s["PARAMETER_DETAILS"] = catalog_details_lines(catalog);
  s["TECHNICAL_PARAMETERS"] = catalog_names_list(catalog);
  s["PARAMETER_DESCRIPTIONS_JSON"] = catalog_descriptions_json(catalog);
  s["SCENE_OBJECTS"] = scene_objects_text(context.scene_objects);
  s["SCENE_INFO"] = s["SCENE_OBJECTS"];
  s["POSITION_JSON"] = nlohmann::ordered_json{{"x", context.system_position.x},
                                               {"y", context.system_position.y},
                                               {"z", context.system_position.z}}
                           .dump();

  const bool sketched = has_used_brushes(context);
  for (const char* slot : {"AND_SKETCH_IF_PRESENT", "BRUSH_CONTEXT_IF_SKETCH", "VISUAL_CONTEXT_GUIDANCE"}) {
    const auto& c = bundle.conditional(slot);
    s[slot] = sketched ? c.present : c.absent;
  }
  if (sketched) {
    s["BRUSH_DESCRIPTIONS_JSON"] = brush_descriptions_json(context.sketch->used_brushes);
    s["SKETCH_CONTEXT_BLOCK"] = render_template(bundle.sketch_context_block(), s);
  } else {
    s["BRUSH_DESCRIPTIONS_JSON"] = "[]";
    s["SKETCH_CONTEXT_BLOCK"] = "";
  }
  s["SKETCH_INFO"] =
      context.sketch.has_value() ? sketch_info_text(*context.sketch) : bundle.conditional("SKETCH_INFO").absent;
  return s;
}

std::string render_prompt(PromptId id, const GenerationContext& context, const Catalog& catalog,
                          const TemplateBundle& bundle, const SlotMap& extra,
                          const std::vector<SlotMap>& loop_items) {
  auto slots = context_slots(context, catalog, bundle);
  for (const auto& [k, v] : extra) slots[k] = v;
  return render_template(bundle.body(id), slots, loop_items);
}

}  // namespace fxctl
