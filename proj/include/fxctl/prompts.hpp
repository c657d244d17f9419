#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fxctl/catalog.hpp"
#include "fxctl/engine.hpp"
#include "fxctl/scene.hpp"

namespace fxctl {

enum class PromptId { add_edit, brush_system, brush_user, intent_decomposition, concept_ui, attribute_ui, default_value };

inline constexpr PromptId kAllPrompts[] = {PromptId::add_edit,     PromptId::brush_system,
                                           PromptId::brush_user,   PromptId::intent_decomposition,
                                           PromptId::concept_ui,   PromptId::attribute_ui,
                                           PromptId::default_value};

std::string_view to_string(PromptId id) noexcept;
PromptId parse_prompt_id(std::string_view name);

// Model call settings that accompany each template.
struct PromptSettings {
  double temperature = 0.1;
  int max_tokens = 1000;
  bool structured_output = false;
  bool images = false;
  bool stream = false;
};

PromptSettings prompt_settings(PromptId id);

using SlotMap = std::map<std::string, std::string, std::less<>>;

inline constexpr std::string_view kLoopMarker = "[FOR EACH PARAMETER:]";

// Slot names in order of first appearance, loop line included.
std::vector<std::string> template_slots(std::string_view body);

// Single pass: substituted text is never rescanned for slots. The line after
// kLoopMarker is emitted once per loop item, each item's slots shadowing
// `slots`. Throws Error(render) naming every unresolved slot.
std::string render_template(std::string_view body, const SlotMap& slots,
                            const std::vector<SlotMap>& loop_items = {});

struct ConditionalText {
  std::string present;
  std::string absent;
};

class TemplateBundle {
 public:
  // Reads <id>.txt for every prompt, sketch_context_block.txt and
  // conditional.json. Throws Error(io) on a missing file.
  static TemplateBundle load(const std::filesystem::path& dir);

  const std::string& body(PromptId id) const;
  const std::string& sketch_context_block() const noexcept { return sketch_block_; }
  const ConditionalText& conditional(std::string_view slot) const;

 private:
  std::map<PromptId, std::string> bodies_;
  std::string sketch_block_;
  std::map<std::string, ConditionalText, std::less<>> conditionals_;
};

struct GenerationContext {
  TemplateKind template_kind = TemplateKind::fire;
  std::string system_type;  // prompt-facing template name
  std::string user_prompt;
  std::vector<SceneObject> scene_objects;
  Vec3 system_position;
  std::map<std::string, double> current_values;  // live parameter values
  std::optional<SketchSubmission> sketch;
  std::optional<std::string> screenshot_png;
};

// Reads the live emitter state into a context.
GenerationContext make_context(const SystemState& state, const Catalog& catalog, std::string user_prompt,
                               std::vector<SceneObject> scene_objects = {});

std::string prompt_type_name(TemplateKind kind);  // "trail" -> "trail-effect"
std::string scene_objects_text(const std::vector<SceneObject>& objects);  // "a at [0, 0, 0], b at ..."
std::string brush_descriptions_json(const std::vector<UsedBrush>& brushes);
std::string sketch_info_text(const SketchSubmission& sketch);

bool has_used_brushes(const GenerationContext& context);

// Slots every template can draw on, derived from the context and catalog.
SlotMap context_slots(const GenerationContext& context, const Catalog& catalog, const TemplateBundle& bundle);

// context_slots overridden by `extra`, then render_template.
std::string render_prompt(PromptId id, const GenerationContext& context, const Catalog& catalog,
                          const TemplateBundle& bundle, const SlotMap& extra = {},
                          const std::vector<SlotMap>& loop_items = {});

}  // namespace fxctl
