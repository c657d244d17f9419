#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fxctl/catalog.hpp"
#include "fxctl/control_tree.hpp"
#include "fxctl/engine.hpp"
#include "fxctl/prompts.hpp"
#include "fxctl/provider.hpp"

namespace fxctl {

struct AddEditDecision {
  bool should_add_particle = false;
  std::optional<TemplateKind> particle_type;
  std::string reason;
};

struct BrushSpec {
  int brushid = 0;
  std::string functionality;
  std::string color;
  std::string icon;

  bool operator==(const BrushSpec&) const = default;
};

inline constexpr std::size_t kPaletteSize = 7;
inline constexpr std::size_t kMaxFunctionalityWords = 5;

struct TechnicalSpec {
  std::string name;
  std::string description;
};

struct AttributeSpec {
  std::string name;
  std::string description;
  std::vector<TechnicalSpec> technical_parameters;
};

struct ConceptSpec {
  std::string name;
  std::string description;
  std::vector<AttributeSpec> attributes;
};

struct HierarchySpec {
  std::string panel_name;
  std::vector<ConceptSpec> concepts;
};

// Shared shape of concept configs and the attributeConfig block.
// Weights and preset coordinates follow the child order of the hierarchy.
struct ParentUiConfig {
  std::string parameter_name;
  std::vector<std::string> step_labels;
  std::vector<DropdownPreset> presets;
  std::vector<double> weights;
};

using ConceptUiConfig = ParentUiConfig;

struct TechnicalUiConfig {
  std::string parameter_name;
  double min = 0.0;  // live current value
  double max = 1.0;  // goal value, may be below min
  std::vector<std::string> step_labels;
  std::vector<std::pair<std::string, double>> options;  // label -> raw value
};

struct AttributeUiConfig {
  ParentUiConfig attribute;
  std::vector<TechnicalUiConfig> technical;
};

inline constexpr std::size_t kConceptPresetCount = 3;

std::set<std::string> load_icon_vocabulary(const std::filesystem::path& path);

// Parses a model response as JSON. One repair attempt strips code fences or
// keeps the outermost {...}. Throws Error(pipeline) tagged with `stage`.
nlohmann::json parse_model_json(std::string_view text, const std::string& stage);

// Validators turning raw model documents into typed, checked values. Each
// throws Error(validation) listing every offender it finds.
AddEditDecision validate_add_edit(const nlohmann::json& doc);
BrushSpec validate_brush(const nlohmann::json& doc, const std::set<std::string>& icons);
std::vector<BrushSpec> validate_brushes(const nlohmann::json& doc, const std::set<std::string>& icons);
HierarchySpec validate_hierarchy(const nlohmann::json& doc, const Catalog& catalog);
ConceptUiConfig validate_concept_ui(const nlohmann::json& doc, const std::vector<std::string>& children);
AttributeUiConfig validate_attribute_ui(const nlohmann::json& doc, const AttributeSpec& attribute,
                                        const std::map<std::string, double>& current, const Catalog& catalog);
// Applies current-to-goal rules: min is the live value, max is clipped to
// the catalog and moved to the farther bound if it would equal min.
TechnicalUiConfig validate_technical_ui(const nlohmann::json& doc, const ParamSpec& spec, double current);
// In-range response value, otherwise the midpoint of [lo, hi].
double resolve_default(const std::optional<nlohmann::json>& doc, double lo, double hi);

// Complete brush objects found so far in a partially streamed palette.
class BrushStreamParser {
 public:
  std::vector<nlohmann::json> feed(std::string_view chunk);

 private:
  std::string pending_;
  int depth_ = 0;
  bool in_string_ = false;
  bool escaped_ = false;
};

struct GeneratedPanel {
  HierarchySpec hierarchy;
  std::vector<ConceptUiConfig> concepts;     // hierarchy order
  std::vector<AttributeUiConfig> attributes; // hierarchy order (concept-major)
  std::map<std::string, double> defaults;    // technical parameter -> raw value
  PanelConfig panel;
};

// Builds the control-tree panel. Node ids are the generated names; the
// technical leaves start at their inferred defaults and parents are weighted means
// aggregates. Throws Error(pipeline) if the result breaks a tree invariant.
PanelConfig assemble_panel(const HierarchySpec& hierarchy, const std::vector<ConceptUiConfig>& concepts,
                           const std::vector<AttributeUiConfig>& attributes,
                           const std::map<std::string, double>& defaults, const Catalog& catalog,
                           TemplateKind kind);

class GenerationPipeline {
 public:
  GenerationPipeline(const Catalog& catalog, const TemplateBundle& bundle, std::set<std::string> icons,
                     std::shared_ptr<Provider> provider);

  AddEditDecision decide_add_or_edit(const GenerationContext& context) const;
  std::vector<BrushSpec> generate_brushes(const GenerationContext& context,
                                          const std::function<void(const BrushSpec&)>& on_brush = {}) const;
  HierarchySpec decompose_intent(const GenerationContext& context) const;
  ConceptUiConfig generate_concept_ui(const ConceptSpec& concept_spec, const HierarchySpec& hierarchy,
                                      const GenerationContext& context) const;
  AttributeUiConfig generate_attribute_ui(const AttributeSpec& attribute, const ConceptSpec& parent,
                                          const GenerationContext& context) const;
  double infer_default(const TechnicalUiConfig& technical, const GenerationContext& context) const;

  // Concept and attribute configs are requested in parallel; defaults follow.
  GeneratedPanel generate_panel(const HierarchySpec& hierarchy, const GenerationContext& context) const;

  ProviderRequest build_request(PromptId id, const std::string& text, const GenerationContext& context) const;

 private:
  std::string call(PromptId id, const std::string& text, const GenerationContext& context,
                   const StreamCallback& on_delta = {}) const;
  AttributeUiConfig attribute_ui_individually(const AttributeSpec& attribute, const ConceptSpec& parent,
                                              const GenerationContext& context) const;
  std::string render_attribute_prompt(const AttributeSpec& attribute, const ConceptSpec& parent,
                                      const std::vector<const TechnicalSpec*>& params,
                                      const GenerationContext& context) const;

  const Catalog& catalog_;
  const TemplateBundle& bundle_;
  std::set<std::string> icons_;
  std::shared_ptr<Provider> provider_;
};

}  // namespace fxctl
