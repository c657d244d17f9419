#include "fxctl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <regex>
#include <sstream>

#include "fxctl/error.hpp"

namespace fxctl {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

[[noreturn]] void fail(const std::string& stage, const std::vector<std::string>& problems) {
  throw Error(ErrorKind::validation, stage, join(problems, "; "));
}

std::size_t word_count(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

bool is_hex_color(const std::string& text) {
  static const std::regex re("^#([0-9A-Fa-f]{6}|[0-9A-Fa-f]{3})$");
  return std::regex_match(text, re);
}

std::optional<std::string> trimmed_string(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string()) return std::nullopt;
  return j[key].get<std::string>();
}

std::vector<std::string> step_labels(const json& parent, const std::string& who, std::vector<std::string>& problems) {
  std::vector<std::string> labels;
  const auto it = parent.find("sliderStepLabels");
  if (it == parent.end() || !it->is_array()) {
    problems.push_back(who + ": sliderStepLabels missing");
    return labels;
  }
  for (const auto& l : *it) {
    if (!l.is_string()) {
      problems.push_back(who + ": step label is not text");
      continue;
    }
    labels.push_back(l.get<std::string>());
  }
  if (labels.size() < 3 || labels.size() > 5) {
    problems.push_back(who + ": needs 3-5 step labels, got " + std::to_string(labels.size()));
  }
  return labels;
}

// Validates the shared concept / attributeConfig shape. `coordinate` maps a
// child name and raw preset number to the stored coordinate.
ParentUiConfig parent_config(const json& doc, const std::string& who, const std::vector<std::string>& children,
                             const std::function<double(const std::string&, double)>& coordinate,
                             std::vector<std::string>& problems) {
  ParentUiConfig cfg;
  if (!doc.is_object()) {
    problems.push_back(who + ": configuration is not an object");
    return cfg;
  }
  cfg.parameter_name = doc.value("parameter_name", std::string());
  cfg.step_labels = step_labels(doc, who, problems);

  const std::set<std::string> expected(children.begin(), children.end());
  auto check_keys = [&](const json& obj, const std::string& what) {
    std::vector<std::string> unknown, missing;
    for (const auto& [k, v] : obj.items())
      if (!expected.contains(k)) unknown.push_back(k);
    for (const auto& c : children)
      if (!obj.contains(c)) missing.push_back(c);
    if (!unknown.empty()) problems.push_back(who + ": " + what + " names unknown child(ren) " + join(unknown));
    if (!missing.empty()) problems.push_back(who + ": " + what + " is missing child(ren) " + join(missing));
    return unknown.empty() && missing.empty();
  };

  const auto opts = doc.find("dropDownOptions");
  if (opts == doc.end() || !opts->is_array()) {
    problems.push_back(who + ": dropDownOptions missing");
  } else {
    if (opts->size() != kConceptPresetCount) {
      problems.push_back(who + ": needs exactly 3 dropdown presets, got " + std::to_string(opts->size()));
    }
    for (const auto& o : *opts) {
      const auto label = trimmed_string(o, "label");
      if (!label || label->empty()) {
        problems.push_back(who + ": dropdown preset without a label");
        continue;
      }
      if (!o.contains("value") || !o["value"].is_object()) {
        problems.push_back(who + ": preset '" + *label + "' has no value map");
        continue;
      }
      const auto& values = o["value"];
      if (!check_keys(values, "preset '" + *label + "'")) continue;
      DropdownPreset p{*label, {}};
      for (const auto& c : children) {
        if (!values[c].is_number()) {
          problems.push_back(who + ": preset '" + *label + "' value for " + c + " is not a number");
          continue;
        }
        p.values.emplace_back(c, coordinate(c, values[c].get<double>()));
      }
      cfg.presets.push_back(std::move(p));
    }
  }

  const auto w = doc.find("childWeights");
  if (w == doc.end() || w->is_null()) {
    cfg.weights = normalize_weights({}, children.size());
  } else if (!w->is_object()) {
    problems.push_back(who + ": childWeights is not an object");
  } else if (check_keys(*w, "childWeights")) {
    std::vector<double> raw;
    for (const auto& c : children) {
      const auto& v = (*w)[c];
      if (!v.is_number() || !std::isfinite(v.get<double>()) || v.get<double>() < 0.0) {
        problems.push_back(who + ": weight for " + c + " must be a non-negative number");
        raw.push_back(0.0);
      } else {
        raw.push_back(v.get<double>());
      }
    }
    cfg.weights = normalize_weights(raw, children.size());
  }
  return cfg;
}

const std::vector<std::vector<std::string>>& channel_groups() {
  static const std::vector<std::vector<std::string>> groups = {
      {"color_start_red", "color_start_green", "color_start_blue"},
      {"color_end_red", "color_end_green", "color_end_blue"},
      {"position_x", "position_y", "position_z"},
      {"force_x", "force_y", "force_z"},
  };
  return groups;
}

}  // namespace

std::set<std::string> load_icon_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "brushes", "cannot read icon vocabulary '" + path.string() + "'");
  std::set<std::string> icons;
  for (std::string line; std::getline(in, line);) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (!line.empty() && line.front() != '#') icons.insert(line);
  }
  return icons;
}

json parse_model_json(std::string_view text, const std::string& stage) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
  }
  std::string repaired(text);
  const auto first = repaired.find('{');
  const auto last = repaired.rfind('}');
  if (first != std::string::npos && last != std::string::npos && last > first) {
    repaired = repaired.substr(first, last - first + 1);
  }
  try {
    return json::parse(repaired);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::pipeline, stage, std::string("model response is not valid JSON: ") + e.what());
  }
}

AddEditDecision validate_add_edit(const json& doc) {
  const std::string stage = "add_edit";
  if (!doc.is_object() || !doc.contains("should_add_particle") || !doc["should_add_particle"].is_boolean()) {
    throw Error(ErrorKind::validation, stage, "should_add_particle must be a boolean");
  }
  AddEditDecision d;
  d.should_add_particle = doc["should_add_particle"].get<bool>();
  d.reason = trimmed_string(doc, "reason").value_or("");
  const auto type = trimmed_string(doc, "particle_type").value_or("");
  if (d.should_add_particle) {
    d.particle_type = try_parse_template_kind(type);
    if (!d.particle_type) {
      throw Error(ErrorKind::validation, stage,
                  "particle type '" + type + "' is not in the template library (" + template_library_list() + ")");
    }
  }
  return d;
}

BrushSpec validate_brush(const json& doc, const std::set<std::string>& icons) {
  std::vector<std::string> problems;
  BrushSpec b;
  if (!doc.is_object()) fail("brushes", {"brush is not an object"});
  if (doc.contains("brushid") && doc["brushid"].is_number_integer()) b.brushid = doc["brushid"].get<int>();
  const std::string who = "brush " + std::to_string(b.brushid);
  if (b.brushid < 1 || b.brushid > static_cast<int>(kPaletteSize)) problems.push_back(who + ": brushid must be 1-7");
  b.functionality = trimmed_string(doc, "functionality").value_or("");
  b.color = trimmed_string(doc, "color").value_or("");
  b.icon = trimmed_string(doc, "icon").value_or("");
  const auto words = word_count(b.functionality);
  if (words == 0 || words > kMaxFunctionalityWords) {
    problems.push_back(who + ": functionality must be 1-5 words ('" + b.functionality + "')");
  }
  if (!is_hex_color(b.color)) problems.push_back(who + ": color '" + b.color + "' is not a hex color");
  if (!icons.contains(b.icon)) problems.push_back(who + ": icon '" + b.icon + "' is not in the icon vocabulary");
  if (!problems.empty()) fail("brushes", problems);
  return b;
}

std::vector<BrushSpec> validate_brushes(const json& doc, const std::set<std::string>& icons) {
  if (!doc.is_object() || !doc.contains("brushes") || !doc["brushes"].is_array()) {
    fail("brushes", {"response has no brushes array"});
  }
  std::vector<std::string> problems;
  std::vector<BrushSpec> out;
  std::set<int> ids;
  for (const auto& b : doc["brushes"]) {
    try {
      out.push_back(validate_brush(b, icons));
      if (!ids.insert(out.back().brushid).second) {
        problems.push_back("brush " + std::to_string(out.back().brushid) + ": duplicate brushid");
      }
    } catch (const Error& e) {
      problems.push_back(e.reason());
    }
  }
  if (doc["brushes"].size() != kPaletteSize) {
    problems.insert(problems.begin(),
                    "palette must hold exactly 7 brushes, got " + std::to_string(doc["brushes"].size()));
  }
  if (!problems.empty()) fail("brushes", problems);
  return out;
}

HierarchySpec validate_hierarchy(const json& doc, const Catalog& catalog) {
  const std::string stage = "intent_decomposition";
  std::vector<std::string> problems;
  HierarchySpec h;
  if (!doc.is_object()) fail(stage, {"hierarchy is not an object"});
  h.panel_name = trimmed_string(doc, "panel_name").value_or("");
  if (h.panel_name.empty()) problems.push_back("panel_name missing");
  if (!doc.contains("concepts") || !doc["concepts"].is_array() || doc["concepts"].empty()) {
    fail(stage, {"hierarchy has no concepts"});
  }

  std::set<std::string> names;
  std::vector<std::string> unknown;
  auto claim = [&](const std::string& name, const char* level) {
    if (name.empty()) {
      problems.push_back(std::string(level) + " without a name");
    } else if (!names.insert(name).second) {
      problems.push_back("name '" + name + "' is used more than once");
    }
  };

  for (const auto& c : doc["concepts"]) {
    ConceptSpec cs{trimmed_string(c, "name").value_or(""), trimmed_string(c, "description").value_or(""), {}};
    claim(cs.name, "concept");
    if (!c.contains("attributes") || !c["attributes"].is_array() || c["attributes"].empty()) {
      problems.push_back("concept '" + cs.name + "' has no attributes");
    } else {
      for (const auto& a : c["attributes"]) {
        AttributeSpec as{trimmed_string(a, "name").value_or(""), trimmed_string(a, "description").value_or(""), {}};
        claim(as.name, "attribute");
        if (!a.contains("technical_parameters") || !a["technical_parameters"].is_array() ||
            a["technical_parameters"].empty()) {
          problems.push_back("attribute '" + as.name + "' has no technical parameters");
        } else {
          for (const auto& t : a["technical_parameters"]) {
            TechnicalSpec ts{trimmed_string(t, "name").value_or(""), trimmed_string(t, "description").value_or("")};
            if (!ts.name.empty() && !catalog.contains(ts.name)) {
              unknown.push_back(ts.name);
              continue;
            }
            claim(ts.name, "technical parameter");
            as.technical_parameters.push_back(std::move(ts));
          }
        }
        cs.attributes.push_back(std::move(as));
      }
    }
    h.concepts.push_back(std::move(cs));
  }
  if (!unknown.empty()) problems.insert(problems.begin(), "unknown technical parameter(s): " + join(unknown));

  for (const auto& c : h.concepts) {
    for (const auto& a : c.attributes) {
      std::set<std::string> present;
      for (const auto& t : a.technical_parameters) present.insert(t.name);
      for (const auto& group : channel_groups()) {
        std::vector<std::string> have, lack;
        for (const auto& g : group) (present.contains(g) ? have : lack).push_back(g);
        if (!have.empty() && !lack.empty()) {
          problems.push_back("attribute '" + a.name + "' uses " + join(have) + " without " + join(lack));
        }
      }
    }
  }
  if (!problems.empty()) fail(stage, problems);
  return h;
}

ConceptUiConfig validate_concept_ui(const json& doc, const std::vector<std::string>& children) {
  std::vector<std::string> problems;
  auto cfg = parent_config(doc, "concept " + doc.value("parameter_name", std::string("?")), children,
                           [](const std::string&, double v) { return std::clamp(v, 0.0, 100.0); }, problems);
  if (!problems.empty()) fail("concept_ui", problems);
  return cfg;
}

TechnicalUiConfig validate_technical_ui(const json& doc, const ParamSpec& spec, double current) {
  std::vector<std::string> problems;
  TechnicalUiConfig t;
  t.parameter_name = spec.name;
  const std::string who = "parameter " + spec.name;
  t.min = current;
  if (!doc.contains("max") || !doc["max"].is_number() || !std::isfinite(doc["max"].get<double>())) {
    problems.push_back(who + ": max is not a number");
  } else {
    t.max = std::clamp(doc["max"].get<double>(), spec.min, spec.max);
    if (t.max == t.min) t.max = (spec.max - current >= current - spec.min) ? spec.max : spec.min;
  }
  t.step_labels = step_labels(doc, who, problems);
  if (doc.contains("dropDownOptions") && doc["dropDownOptions"].is_array()) {
    for (const auto& o : doc["dropDownOptions"]) {
      const auto label = trimmed_string(o, "label");
      if (!label || !o.contains("value") || !o["value"].is_number()) {
        problems.push_back(who + ": dropdown option needs a label and a numeric value");
        continue;
      }
      t.options.emplace_back(*label, std::clamp(o["value"].get<double>(), spec.min, spec.max));
    }
  }
  if (!problems.empty()) fail("attribute_ui", problems);
  return t;
}

AttributeUiConfig validate_attribute_ui(const json& doc, const AttributeSpec& attribute,
                                        const std::map<std::string, double>& current, const Catalog& catalog) {
  std::vector<std::string> problems;
  AttributeUiConfig out;
  std::vector<std::string> children;
  for (const auto& t : attribute.technical_parameters) children.push_back(t.name);
  if (!doc.is_object() || !doc.contains("attributeConfig")) fail("attribute_ui", {"attributeConfig missing"});

  out.attribute = parent_config(
      doc["attributeConfig"], "attribute " + attribute.name, children,
      [&](const std::string& c, double v) { return catalog.clamp_to_range(c, v); }, problems);

  std::map<std::string, const json*> by_name;
  if (!doc.contains("technicalParameterConfigs") || !doc["technicalParameterConfigs"].is_array()) {
    problems.push_back("technicalParameterConfigs missing");
  } else {
    for (const auto& t : doc["technicalParameterConfigs"]) {
      const auto name = trimmed_string(t, "parameter_name").value_or("");
      if (std::find(children.begin(), children.end(), name) == children.end()) {
        problems.push_back("technical config for unexpected parameter '" + name + "'");
      } else if (!by_name.emplace(name, &t).second) {
        problems.push_back("technical config for '" + name + "' appears twice");
      }
    }
  }
  for (const auto& c : children) {
    auto it = by_name.find(c);
    if (it == by_name.end()) {
      problems.push_back("no technical config for '" + c + "'");
      continue;
    }
    auto cur = current.find(c);
    if (cur == current.end()) {
      problems.push_back("no current value for '" + c + "'");
      continue;
    }
    try {
      out.technical.push_back(validate_technical_ui(*it->second, catalog.at(c), cur->second));
    } catch (const Error& e) {
      problems.push_back(e.reason());
    }
  }
  if (!problems.empty()) fail("attribute_ui", problems);
  return out;
}

double resolve_default(const std::optional<json>& doc, double lo, double hi) {
  const double mid = (lo + hi) / 2.0;
  if (!doc || !doc->is_object() || !doc->contains("defaultValue")) return mid;
  const auto& v = (*doc)["defaultValue"];
  if (!v.is_number()) return mid;
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < std::min(lo, hi) || x > std::max(lo, hi)) return mid;
  return x;
}

std::vector<json> BrushStreamParser::feed(std::string_view chunk) {
  std::vector<json> out;
  for (char ch : chunk) {
    if (depth_ >= 2) pending_ += ch;
    if (in_string_) {
      if (escaped_) {
        escaped_ = false;
      } else if (ch == '\\') {
        escaped_ = true;
      } else if (ch == '"') {
        in_string_ = false;
      }
      continue;
    }
    if (ch == '"') {
      in_string_ = true;
    } else if (ch == '{') {
      if (++depth_ == 2) pending_ = "{";
    } else if (ch == '}') {
      if (depth_-- == 2) {
        try {
          out.push_back(json::parse(pending_));
        } catch (const json::parse_error&) {
        }
        pending_.clear();
      }
    }
  }
  return out;
}

PanelConfig assemble_panel(const HierarchySpec& hierarchy, const std::vector<ConceptUiConfig>& concepts,
                           const std::vector<AttributeUiConfig>& attributes,
                           const std::map<std::string, double>& defaults, const Catalog& catalog,
                           TemplateKind kind) {
  const std::string stage = "assemble";
  PanelConfig panel;
  panel.panel_name = hierarchy.panel_name;
  panel.system_type = std::string(to_string(kind));
  if (concepts.size() != hierarchy.concepts.size()) {
    throw Error(ErrorKind::pipeline, stage, "concept configuration count does not match the hierarchy");
  }

  std::size_t attr_index = 0;
  for (std::size_t ci = 0; ci < hierarchy.concepts.size(); ++ci) {
    const auto& cs = hierarchy.concepts[ci];
    const auto& cc = concepts[ci];
    if (cc.weights.size() != cs.attributes.size()) {
      throw Error(ErrorKind::pipeline, stage, "weights of concept '" + cs.name + "' do not match its attributes");
    }
    ControlNode cn;
    cn.id = cn.name = cs.name;
    cn.level = Level::conceptual;
    cn.description = cs.description;
    cn.range = {0, 100};
    cn.step_labels = cc.step_labels;
    cn.presets = cc.presets;
    panel.roots.push_back(cn.id);

    std::vector<ControlNode> below;
    for (std::size_t ai = 0; ai < cs.attributes.size(); ++ai, ++attr_index) {
      const auto& as = cs.attributes[ai];
      cn.children.push_back({as.name, cc.weights[ai]});
      if (attr_index >= attributes.size()) {
        throw Error(ErrorKind::pipeline, stage, "missing configuration for attribute '" + as.name + "'");
      }
      const auto& ac = attributes[attr_index];
      if (ac.attribute.weights.size() != as.technical_parameters.size() ||
          ac.technical.size() != as.technical_parameters.size()) {
        throw Error(ErrorKind::pipeline, stage, "configuration of attribute '" + as.name + "' does not match");
      }
      ControlNode an;
      an.id = an.name = as.name;
      an.level = Level::attribute;
      an.description = as.description;
      an.range = {0, 100};
      an.step_labels = ac.attribute.step_labels;
      an.presets = ac.attribute.presets;
      for (std::size_t ti = 0; ti < as.technical_parameters.size(); ++ti) {
        const auto& ts = as.technical_parameters[ti];
        const auto& tc = ac.technical[ti];
        an.children.push_back({ts.name, ac.attribute.weights[ti]});
        auto d = defaults.find(ts.name);
        if (d == defaults.end()) {
          throw Error(ErrorKind::pipeline, stage, "no default value for '" + ts.name + "'");
        }
        ControlNode tn;
        tn.id = tn.name = ts.name;
        tn.level = Level::technical;
        tn.description = ts.description;
        tn.range = {tc.min, tc.max};
        tn.value = normalize(tn.range, d->second);
        tn.step_labels = tc.step_labels;
        for (const auto& [label, value] : tc.options) tn.presets.push_back({label, {{ts.name, value}}});
        panel.bindings[ts.name] = ts.name;
        below.push_back(std::move(tn));
      }
      below.insert(below.begin() + static_cast<std::ptrdiff_t>(below.size() - as.technical_parameters.size()),
                   std::move(an));
    }
    panel.nodes.push_back(std::move(cn));
    for (auto& n : below) panel.nodes.push_back(std::move(n));
  }

  ControlTree tree(panel);
  tree.recompute_all();
  const auto problems = tree.check_invariants(&catalog);
  if (!problems.empty()) throw Error(ErrorKind::pipeline, stage, join(problems, "; "));
  return tree.config();
}

GenerationPipeline::GenerationPipeline(const Catalog& catalog, const TemplateBundle& bundle,
                                       std::set<std::string> icons, std::shared_ptr<Provider> provider)
    : catalog_(catalog), bundle_(bundle), icons_(std::move(icons)), provider_(std::move(provider)) {}

ProviderRequest GenerationPipeline::build_request(PromptId id, const std::string& text,
                                                  const GenerationContext& context) const {
  const auto s = prompt_settings(id);
  ProviderRequest r;
  r.temperature = s.temperature;
  r.max_tokens = s.max_tokens;
  r.structured_output = s.structured_output;
  r.stream = s.stream;
  ChatMessage user{"user", {ContentPart::make_text(text)}};
  if (s.images) {
    if (context.screenshot_png) user.parts.push_back(ContentPart::make_image(*context.screenshot_png));
    const bool sketch_image = id == PromptId::intent_decomposition || id == PromptId::attribute_ui;
    if (sketch_image && context.sketch && context.sketch->overlay_png) {
      user.parts.push_back(ContentPart::make_image(*context.sketch->overlay_png));
    }
  }
  r.messages.push_back(std::move(user));
  return r;
}

std::string GenerationPipeline::call(PromptId id, const std::string& text, const GenerationContext& context,
                                     const StreamCallback& on_delta) const {
  try {
    return provider_->send(build_request(id, text, context), on_delta).text;
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(to_string(id)), e.reason());
  }
}

AddEditDecision GenerationPipeline::decide_add_or_edit(const GenerationContext& context) const {
  const auto text = call(PromptId::add_edit, render_prompt(PromptId::add_edit, context, catalog_, bundle_), context);
  return validate_add_edit(parse_model_json(text, "add_edit"));
}

std::vector<BrushSpec> GenerationPipeline::generate_brushes(const GenerationContext& context,
                                                            const std::function<void(const BrushSpec&)>& on_brush) const {
  const auto settings = prompt_settings(PromptId::brush_system);
  ProviderRequest r;
  r.temperature = settings.temperature;
  r.max_tokens = settings.max_tokens;
  r.stream = settings.stream;
  r.messages.push_back(
      {"system", {ContentPart::make_text(render_prompt(PromptId::brush_system, context, catalog_, bundle_))}});
  ChatMessage user{"user", {ContentPart::make_text(render_prompt(PromptId::brush_user, context, catalog_, bundle_))}};
  if (context.screenshot_png) user.parts.push_back(ContentPart::make_image(*context.screenshot_png));
  r.messages.push_back(std::move(user));

  BrushStreamParser parser;
  StreamCallback on_delta;
  if (on_brush) {
    on_delta = [&](std::string_view d) {
      for (const auto& doc : parser.feed(d)) {
        try {
          on_brush(validate_brush(doc, icons_));
        } catch (const Error&) {
          // The full palette check below reports it.
        }
      }
    };
  }
  std::string text;
  try {
    text = provider_->send(r, on_delta).text;
  } catch (const Error& e) {
    throw Error(e.kind(), "brushes", e.reason());
  }
  return validate_brushes(parse_model_json(text, "brushes"), icons_);
}

HierarchySpec GenerationPipeline::decompose_intent(const GenerationContext& context) const {
  const auto prompt = render_prompt(PromptId::intent_decomposition, context, catalog_, bundle_);
  return validate_hierarchy(parse_model_json(call(PromptId::intent_decomposition, prompt, context),
                                             "intent_decomposition"),
                            catalog_);
}

ConceptUiConfig GenerationPipeline::generate_concept_ui(const ConceptSpec& concept_spec,
                                                        const HierarchySpec& hierarchy,
                                                        const GenerationContext& context) const {
  std::vector<std::string> children, siblings;
  for (const auto& a : concept_spec.attributes) children.push_back(a.name);
  for (const auto& c : hierarchy.concepts)
    if (c.name != concept_spec.name) siblings.push_back(c.name);
  SlotMap extra{{"CONCEPT_NAME", concept_spec.name},
                {"RELEVANCE_EXPLANATION", concept_spec.description},
                {"DESCRIPTION", concept_spec.description},
                {"SIBLING_PARAMETERS", siblings.empty() ? "none" : join(siblings)},
                {"CHILD_ATTRIBUTE_NAMES", join(children)}};
  const auto prompt = render_prompt(PromptId::concept_ui, context, catalog_, bundle_, extra);
  return validate_concept_ui(parse_model_json(call(PromptId::concept_ui, prompt, context), "concept_ui"), children);
}

std::string GenerationPipeline::render_attribute_prompt(const AttributeSpec& attribute, const ConceptSpec& parent,
                                                        const std::vector<const TechnicalSpec*>& params,
                                                        const GenerationContext& context) const {
  std::vector<std::string> names;
  std::vector<SlotMap> loop;
  for (const auto* t : params) {
    names.push_back(t->name);
    const auto& spec = catalog_.at(t->name);
    nlohmann::ordered_json info;
    if (auto cur = context.current_values.find(t->name); cur != context.current_values.end()) {
      info["current"] = cur->second;
    }
    info["default"] = spec.default_value;
    loop.push_back({{"PARAM_NAME", t->name},
                    {"RELEVANCE", t->description},
                    {"DESCRIPTION", spec.description},
                    {"MIN", format_number(spec.min)},
                    {"MAX", format_number(spec.max)},
                    {"INFO_JSON", info.dump()}});
  }
  SlotMap extra{{"ATTRIBUTE_NAME", attribute.name},
                {"CONCEPT_CONTEXT", parent.name},
                {"ATTRIBUTE_DESCRIPTION", attribute.description},
                {"TECH_PARAM_NAMES", join(names)}};
  return render_prompt(PromptId::attribute_ui, context, catalog_, bundle_, extra, loop);
}

AttributeUiConfig GenerationPipeline::generate_attribute_ui(const AttributeSpec& attribute, const ConceptSpec& parent,
                                                            const GenerationContext& context) const {
  std::vector<const TechnicalSpec*> all;
  for (const auto& t : attribute.technical_parameters) all.push_back(&t);
  try {
    const auto text = call(PromptId::attribute_ui, render_attribute_prompt(attribute, parent, all, context), context);
    return validate_attribute_ui(parse_model_json(text, "attribute_ui"), attribute, context.current_values, catalog_);
  } catch (const Error&) {
    return attribute_ui_individually(attribute, parent, context);
  }
}

AttributeUiConfig GenerationPipeline::attribute_ui_individually(const AttributeSpec& attribute,
                                                                const ConceptSpec& parent,
                                                                const GenerationContext& context) const {
  AttributeUiConfig merged;
  merged.attribute.parameter_name = attribute.name;
  std::vector<double> raw_weights;
  try {
    for (const auto& t : attribute.technical_parameters) {
      const auto text = call(PromptId::attribute_ui, render_attribute_prompt(attribute, parent, {&t}, context), context);
      const auto doc = parse_model_json(text, "attribute_ui");
      const AttributeSpec single{attribute.name, attribute.description, {t}};
      auto cfg = validate_attribute_ui(doc, single, context.current_values, catalog_);

      double w = 1.0;
      const auto& cw = doc["attributeConfig"].value("childWeights", json::object());
      if (cw.is_object() && cw.contains(t.name) && cw[t.name].is_number()) w = cw[t.name].get<double>();
      raw_weights.push_back(w);

      if (merged.attribute.step_labels.empty()) {
        merged.attribute.step_labels = cfg.attribute.step_labels;
        for (const auto& p : cfg.attribute.presets) merged.attribute.presets.push_back({p.label, {}});
      }
      for (std::size_t k = 0; k < merged.attribute.presets.size() && k < cfg.attribute.presets.size(); ++k) {
        for (const auto& v : cfg.attribute.presets[k].values) merged.attribute.presets[k].values.push_back(v);
      }
      merged.technical.push_back(std::move(cfg.technical.front()));
    }
  } catch (const Error& e) {
    throw Error(ErrorKind::pipeline, "attribute_ui",
                "attribute '" + attribute.name + "' failed after per-parameter fallback: " + e.reason());
  }
  // A preset index some parameter did not supply cannot be applied as a whole.
  std::erase_if(merged.attribute.presets, [&](const DropdownPreset& p) {
    return p.values.size() != attribute.technical_parameters.size();
  });
  merged.attribute.weights = normalize_weights(raw_weights, raw_weights.size());
  return merged;
}

double GenerationPipeline::infer_default(const TechnicalUiConfig& technical, const GenerationContext& context) const {
  SlotMap extra{{"PARAMETER_NAME", technical.parameter_name},
                {"DESCRIPTION", catalog_.at(technical.parameter_name).description},
                {"MIN", format_number(technical.min)},
                {"MAX", format_number(technical.max)}};
  std::optional<json> doc;
  try {
    const auto prompt = render_prompt(PromptId::default_value, context, catalog_, bundle_, extra);
    doc = parse_model_json(call(PromptId::default_value, prompt, context), "default_value");
  } catch (const Error&) {
    doc.reset();
  }
  return resolve_default(doc, technical.min, technical.max);
}

GeneratedPanel GenerationPipeline::generate_panel(const HierarchySpec& hierarchy,
                                                  const GenerationContext& context) const {
  GeneratedPanel out;
  out.hierarchy = hierarchy;

  std::vector<std::future<ConceptUiConfig>> concept_jobs;
  std::vector<std::future<AttributeUiConfig>> attribute_jobs;
  for (const auto& c : hierarchy.concepts) {
    concept_jobs.push_back(std::async(std::launch::async, [&, cp = &c] {
      return generate_concept_ui(*cp, hierarchy, context);
    }));
    for (const auto& a : c.attributes) {
      attribute_jobs.push_back(std::async(std::launch::async, [&, cp = &c, ap = &a] {
        return generate_attribute_ui(*ap, *cp, context);
      }));
    }
  }
  // Collect every job before rethrowing so no task outlives this frame.
  std::optional<Error> first_error;
  auto collect = [&](auto& jobs, auto& into) {
    for (auto& j : jobs) {
      try {
        into.push_back(j.get());
      } catch (const Error& e) {
        if (!first_error) first_error = e;
      }
    }
  };
  collect(concept_jobs, out.concepts);
  collect(attribute_jobs, out.attributes);
  if (first_error) throw *first_error;

  std::vector<std::pair<std::string, std::future<double>>> default_jobs;
  for (const auto& a : out.attributes) {
    for (const auto& t : a.technical) {
      default_jobs.emplace_back(t.parameter_name,
                                std::async(std::launch::async, [&, tp = &t] { return infer_default(*tp, context); }));
    }
  }
  for (auto& [name, job] : default_jobs) out.defaults[name] = job.get();

  out.panel = assemble_panel(hierarchy, out.concepts, out.attributes, out.defaults, catalog_, context.template_kind);
  return out;
}

}  // namespace fxctl
