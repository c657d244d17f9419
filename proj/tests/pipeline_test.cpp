#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fxctl/catalog.hpp"
#include "fxctl/control_tree.hpp"
#include "fxctl/engine.hpp"
#include "fxctl/error.hpp"
#include "fxctl/pipeline.hpp"
#include "fxctl/prompts.hpp"
#include "fxctl/provider.hpp"

namespace fxctl {
namespace {

using nlohmann::json;

const Catalog& catalog() {
  static const Catalog c = load_catalog_file(FXCTL_DATA_DIR "/catalog.json");
  return c;
}

const TemplateBundle& bundle() {
  static const TemplateBundle b = TemplateBundle::load(FXCTL_DATA_DIR "/templates");
  return b;
}

const std::set<std::string>& icons() {
  static const auto v = load_icon_vocabulary(FXCTL_DATA_DIR "/icons.txt");
  return v;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::io;
}

std::string reason_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.reason();
  }
  ADD_FAILURE() << "expected an Error";
  return {};
}

GenerationContext fountain_context(const std::string& prompt) {
  const auto state = instantiate_template(TemplateKind::fountain, catalog(), 7);
  return make_context(state, catalog(), prompt, {{"fountain_basin", {0, 0, 0}}, {"park_bench", {6, 0, 2}}});
}

std::shared_ptr<Provider> playful_script() {
  return std::make_shared<ScriptedProvider>(
      ScriptedProvider::rules_from_file(FXCTL_TEST_DIR "/fixtures/scripted/playful_fountain.json"));
}

json brush(int id, std::string functionality, std::string color = "#FF8800", std::string icon = "Flame") {
  return {{"brushid", id}, {"functionality", functionality}, {"color", color}, {"icon", icon}};
}

json palette_of(int n) {
  json doc{{"brushes", json::array()}};
  for (int i = 1; i <= n; ++i) doc["brushes"].push_back(brush(i, "Taller flames near tent"));
  return doc;
}

TEST(ModelJson, ParsesAndRepairsOnce) {
  EXPECT_EQ(parse_model_json(R"({"a": 1})", "s")["a"], 1);
  EXPECT_EQ(parse_model_json("```json\n{\"a\": 2}\n```", "s")["a"], 2);
  EXPECT_EQ(parse_model_json("Here you go: {\"a\": {\"b\": 3}} hope it helps", "s")["a"]["b"], 3);
  EXPECT_EQ(kind_of([] { parse_model_json("not json at all", "add_edit"); }), ErrorKind::pipeline);
  EXPECT_EQ(kind_of([] { parse_model_json("{\"a\": }", "add_edit"); }), ErrorKind::pipeline);
}

TEST(AddEdit, AcceptsLibraryTypes) {
  const auto d = validate_add_edit({{"should_add_particle", true}, {"particle_type", "firework"}, {"reason", "r"}});
  EXPECT_TRUE(d.should_add_particle);
  EXPECT_EQ(d.particle_type, TemplateKind::firework);
  EXPECT_EQ(validate_add_edit({{"should_add_particle", true}, {"particle_type", "trail-effect"}}).particle_type,
            TemplateKind::trail);
  const auto edit = validate_add_edit({{"should_add_particle", false}, {"particle_type", ""}});
  EXPECT_FALSE(edit.should_add_particle);
  EXPECT_FALSE(edit.particle_type.has_value());
}

TEST(AddEdit, RejectsUnknownTypeAndShape) {
  const auto why = reason_of([] { validate_add_edit({{"should_add_particle", true}, {"particle_type", "smoke"}}); });
  EXPECT_NE(why.find("smoke"), std::string::npos);
  EXPECT_EQ(kind_of([] { validate_add_edit({{"should_add_particle", true}, {"particle_type", "smoke"}}); }),
            ErrorKind::validation);
  EXPECT_EQ(kind_of([] { validate_add_edit({{"should_add_particle", "yes"}}); }), ErrorKind::validation);
  EXPECT_EQ(kind_of([] { validate_add_edit(json::array()); }), ErrorKind::validation);
}

TEST(Brushes, SevenValidBrushesPass) {
  const auto out = validate_brushes(palette_of(7), icons());
  ASSERT_EQ(out.size(), 7u);
  EXPECT_EQ(out[6].brushid, 7);
  EXPECT_EQ(out[0].icon, "Flame");
}

TEST(Brushes, CountMustBeSeven) {
  EXPECT_NE(reason_of([] { validate_brushes(palette_of(6), icons()); }).find("exactly 7"), std::string::npos);
  EXPECT_EQ(kind_of([] { validate_brushes(palette_of(8), icons()); }), ErrorKind::validation);
}

TEST(Brushes, PerBrushRules) {
  EXPECT_EQ(kind_of([] { validate_brush(brush(1, "Blow smoke away", "#FFF", "NotARealIcon"), icons()); }),
            ErrorKind::validation);
  EXPECT_NE(reason_of([] { validate_brush(brush(1, "x", "#FFF", "NotARealIcon"), icons()); }).find("NotARealIcon"),
            std::string::npos);
  EXPECT_NO_THROW(validate_brush(brush(2, "Gust bends the flames", "#abc", "Wind"), icons()));
  EXPECT_THROW(validate_brush(brush(2, "one two three four five six"), icons()), Error);
  EXPECT_THROW(validate_brush(brush(2, ""), icons()), Error);
  EXPECT_THROW(validate_brush(brush(2, "Hotter", "orange"), icons()), Error);
  EXPECT_THROW(validate_brush(brush(2, "Hotter", "#12345"), icons()), Error);
  EXPECT_THROW(validate_brush(brush(0, "Hotter"), icons()), Error);
  EXPECT_THROW(validate_brush(brush(8, "Hotter"), icons()), Error);
}

TEST(Brushes, DuplicateIdsRejectedWithAllOffenders) {
  auto doc = palette_of(7);
  doc["brushes"][3]["brushid"] = 2;
  doc["brushes"][5]["icon"] = "NotARealIcon";
  const auto why = reason_of([&] { validate_brushes(doc, icons()); });
  EXPECT_NE(why.find("duplicate"), std::string::npos);
  EXPECT_NE(why.find("NotARealIcon"), std::string::npos);
}

TEST(BrushStream, EmitsObjectsAsTheyComplete) {
  const std::string text =
      R"({"brushes": [{"brushid": 1, "functionality": "a {brace} \"q\"", "color": "#fff", "icon": "Wind"}, )"
      R"({"brushid": 2, "functionality": "b", "color": "#000", "icon": "Zap"}]})";
  BrushStreamParser p;
  std::vector<json> seen;
  std::vector<std::size_t> when;
  for (std::size_t i = 0; i < text.size(); i += 5) {
    for (auto& j : p.feed(std::string_view(text).substr(i, 5))) {
      seen.push_back(j);
      when.push_back(i);
    }
  }
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_EQ(seen[0]["functionality"], "a {brace} \"q\"");
  EXPECT_EQ(seen[1]["icon"], "Zap");
  EXPECT_LT(when[0], when[1]);
  EXPECT_LT(when[0], text.find("\"brushid\": 2"));
}

json hierarchy_doc(json attributes_a, json attributes_b = json::array()) {
  json doc{{"panel_name", "p"}, {"concepts", json::array()}};
  doc["concepts"].push_back({{"name", "warmth"}, {"description", "d"}, {"attributes", attributes_a}});
  if (!attributes_b.empty()) {
    doc["concepts"].push_back({{"name", "motion"}, {"description", "d"}, {"attributes", attributes_b}});
  }
  return doc;
}

json attr(const std::string& name, std::vector<std::string> params) {
  json a{{"name", name}, {"description", "d"}, {"technical_parameters", json::array()}};
  for (const auto& p : params) a["technical_parameters"].push_back({{"name", p}, {"description", "r"}});
  return a;
}

TEST(Hierarchy, ValidTreeParses) {
  const auto h = validate_hierarchy(
      hierarchy_doc({attr("glow", {"color_start_red", "color_start_green", "color_start_blue"})},
                    {attr("sway", {"force_x", "force_y", "force_z", "velocity_theta"})}),
      catalog());
  ASSERT_EQ(h.concepts.size(), 2u);
  EXPECT_EQ(h.concepts[1].attributes[0].technical_parameters[3].name, "velocity_theta");
}

TEST(Hierarchy, GroupingRule) {
  const auto doc = hierarchy_doc({attr("glow", {"color_start_red", "alpha_start"})});
  EXPECT_EQ(kind_of([&] { validate_hierarchy(doc, catalog()); }), ErrorKind::validation);
  const auto why = reason_of([&] { validate_hierarchy(doc, catalog()); });
  EXPECT_NE(why.find("color_start_green"), std::string::npos);
  EXPECT_NE(why.find("color_start_blue"), std::string::npos);

  // Split across attributes is still a violation.
  const auto split = hierarchy_doc({attr("left", {"position_x", "position_y"}), attr("up", {"position_z"})});
  EXPECT_THROW(validate_hierarchy(split, catalog()), Error);
}

TEST(Hierarchy, UnknownParametersListed) {
  const auto doc = hierarchy_doc({attr("glow", {"smokiness", "alpha_end", "glow_radius"})});
  const auto why = reason_of([&] { validate_hierarchy(doc, catalog()); });
  EXPECT_NE(why.find("smokiness"), std::string::npos);
  EXPECT_NE(why.find("glow_radius"), std::string::npos);
}

TEST(Hierarchy, NamesUniqueAcrossLevels) {
  EXPECT_THROW(validate_hierarchy(hierarchy_doc({attr("flicker", {"alpha_end"})}, {attr("flicker", {"alpha_start"})}),
                                  catalog()),
               Error);
  EXPECT_THROW(validate_hierarchy(hierarchy_doc({attr("warmth", {"alpha_end"})}), catalog()), Error);
  EXPECT_THROW(validate_hierarchy(hierarchy_doc({attr("a", {"alpha_end"}), attr("b", {"alpha_end"})}), catalog()),
               Error);
  EXPECT_THROW(validate_hierarchy(hierarchy_doc(json::array()), catalog()), Error);
  EXPECT_THROW(validate_hierarchy(hierarchy_doc({attr("a", {})}), catalog()), Error);
}

json concept_doc() {
  return {{"parameter_name", "warmth"},
          {"sliderStepLabels", {"Cool", "Warm", "Hot", "Blazing"}},
          {"dropDownOptions",
           {{{"label", "One"}, {"value", {{"a", 10}, {"b", 20}}}},
            {{"label", "Two"}, {"value", {{"a", 150}, {"b", -5}}}},
            {{"label", "Three"}, {"value", {{"a", 50}, {"b", 50}}}}}},
          {"childWeights", {{"a", 0.7}, {"b", 0.7}}}};
}

TEST(ConceptUi, WeightsNormalizedPostHoc) {
  const auto cfg = validate_concept_ui(concept_doc(), {"a", "b"});
  EXPECT_EQ(cfg.weights, (std::vector<double>{0.5, 0.5}));
  ASSERT_EQ(cfg.presets.size(), 3u);
  EXPECT_EQ(cfg.presets[1].values, (std::vector<std::pair<std::string, double>>{{"a", 100}, {"b", 0}}));
  EXPECT_EQ(cfg.step_labels.size(), 4u);
}

TEST(ConceptUi, MissingWeightsFallBackToUniform) {
  auto doc = concept_doc();
  doc.erase("childWeights");
  EXPECT_EQ(validate_concept_ui(doc, {"a", "b"}).weights, (std::vector<double>{0.5, 0.5}));
  auto three = concept_doc();
  three.erase("childWeights");
  for (auto& o : three["dropDownOptions"]) o["value"]["c"] = 1;
  const auto w = validate_concept_ui(three, {"a", "b", "c"}).weights;
  ASSERT_EQ(w.size(), 3u);
  for (double x : w) EXPECT_EQ(x, 1.0 / 3.0);
}

TEST(ConceptUi, RejectsWrongKeysAndCounts) {
  auto unknown = concept_doc();
  unknown["dropDownOptions"][0]["value"]["zzz"] = 3;
  EXPECT_NE(reason_of([&] { validate_concept_ui(unknown, {"a", "b"}); }).find("zzz"), std::string::npos);

  auto missing = concept_doc();
  missing["dropDownOptions"][2]["value"].erase("b");
  EXPECT_THROW(validate_concept_ui(missing, {"a", "b"}), Error);

  auto weights = concept_doc();
  weights["childWeights"] = {{"a", 1}, {"q", 1}};
  EXPECT_THROW(validate_concept_ui(weights, {"a", "b"}), Error);

  auto negative = concept_doc();
  negative["childWeights"]["b"] = -1;
  EXPECT_THROW(validate_concept_ui(negative, {"a", "b"}), Error);

  auto two_labels = concept_doc();
  two_labels["sliderStepLabels"] = {"x", "y"};
  EXPECT_THROW(validate_concept_ui(two_labels, {"a", "b"}), Error);
  auto six_labels = concept_doc();
  six_labels["sliderStepLabels"] = {"1", "2", "3", "4", "5", "6"};
  EXPECT_THROW(validate_concept_ui(six_labels, {"a", "b"}), Error);

  auto two_presets = concept_doc();
  two_presets["dropDownOptions"].erase(2);
  EXPECT_THROW(validate_concept_ui(two_presets, {"a", "b"}), Error);
}

json technical_doc(double min, double max) {
  return {{"parameter_name", "velocity_theta"},
          {"min", min},
          {"max", max},
          {"sliderStepLabels", {"Narrow", "Open", "Wide"}},
          {"dropDownOptions", {{{"label", "Way out"}, {"value", 999}}}}};
}

TEST(TechnicalUi, CurrentToGoalRules) {
  const auto& theta = catalog().at("velocity_theta");
  const auto coerced = validate_technical_ui(technical_doc(10, 90), theta, 0);
  EXPECT_EQ(coerced.min, 0);
  EXPECT_EQ(coerced.max, 90);

  EXPECT_EQ(validate_technical_ui(technical_doc(0, 250), theta, 0).max, 180);

  const auto inverted = validate_technical_ui(technical_doc(100, 20), theta, 100);
  EXPECT_EQ(inverted.min, 100);
  EXPECT_EQ(inverted.max, 20);

  // max equal to current moves to the farther catalog bound
  EXPECT_EQ(validate_technical_ui(technical_doc(30, 30), theta, 30).max, 180);
  EXPECT_EQ(validate_technical_ui(technical_doc(150, 150), theta, 150).max, 0);

  EXPECT_EQ(validate_technical_ui(technical_doc(0, 90), theta, 0).options.front().second, 180);
  auto no_max = technical_doc(0, 90);
  no_max.erase("max");
  EXPECT_THROW(validate_technical_ui(no_max, theta, 0), Error);
}

json attribute_doc() {
  return {{"attributeConfig",
           {{"parameter_name", "spread"},
            {"sliderStepLabels", {"Tight", "Loose", "Wild"}},
            {"dropDownOptions",
             {{{"label", "A"}, {"value", {{"velocity_theta", 400}, {"velocity_radius", 20}}}},
              {{"label", "B"}, {"value", {{"velocity_theta", 30}, {"velocity_radius", -3}}}},
              {{"label", "C"}, {"value", {{"velocity_theta", 60}, {"velocity_radius", 40}}}}}},
            {"childWeights", {{"velocity_theta", 3}, {"velocity_radius", 1}}}}},
          {"technicalParameterConfigs",
           {technical_doc(10, 250),
            {{"parameter_name", "velocity_radius"}, {"min", 5}, {"max", 40}, {"sliderStepLabels", {"a", "b", "c"}}}}}};
}

AttributeSpec spread_spec() {
  return {"spread", "d", {{"velocity_theta", "r"}, {"velocity_radius", "r"}}};
}

TEST(AttributeUi, ValidatesEveryPart) {
  const std::map<std::string, double> current{{"velocity_theta", 0}, {"velocity_radius", 5}};
  const auto cfg = validate_attribute_ui(attribute_doc(), spread_spec(), current, catalog());
  EXPECT_EQ(cfg.attribute.weights, (std::vector<double>{0.75, 0.25}));
  EXPECT_EQ(cfg.attribute.presets[0].values[0].second, 180);
  EXPECT_EQ(cfg.attribute.presets[1].values[1].second, 0);
  ASSERT_EQ(cfg.technical.size(), 2u);
  EXPECT_EQ(cfg.technical[0].min, 0);
  EXPECT_EQ(cfg.technical[0].max, 180);
  EXPECT_EQ(cfg.technical[1].min, 5);
  EXPECT_EQ(cfg.technical[1].max, 40);
}

TEST(AttributeUi, TechnicalConfigsMustMatchChildren) {
  const std::map<std::string, double> current{{"velocity_theta", 0}, {"velocity_radius", 5}};
  auto missing = attribute_doc();
  missing["technicalParameterConfigs"].erase(1);
  EXPECT_THROW(validate_attribute_ui(missing, spread_spec(), current, catalog()), Error);
  auto extra = attribute_doc();
  extra["technicalParameterConfigs"].push_back(technical_doc(0, 1));
  EXPECT_THROW(validate_attribute_ui(extra, spread_spec(), current, catalog()), Error);
}

TEST(Defaults, MidpointFallback) {
  EXPECT_EQ(resolve_default(json{{"defaultValue", 400}}, 0, 180), 90);
  EXPECT_EQ(resolve_default(std::nullopt, 0, 180), 90);
  EXPECT_EQ(resolve_default(json{{"defaultValue", 45}}, 0, 180), 45);
  EXPECT_EQ(resolve_default(json{{"defaultValue", "45"}}, 0, 180), 90);
  EXPECT_EQ(resolve_default(json{{"defaultValue", 50}}, 100, 20), 50);
  EXPECT_EQ(resolve_default(json{{"defaultValue", 10}}, 100, 20), 60);
}

TEST(Pipeline, RequestSettingsFollowPromptTable) {
  auto ctx = fountain_context("make it more playful");
  ctx.screenshot_png = std::string("\x89PNG", 4);
  ctx.sketch = SketchSubmission{{}, {{1, "#fff", "Splash"}}, std::string("overlay")};
  GenerationPipeline p(catalog(), bundle(), icons(), playful_script());

  const auto add = p.build_request(PromptId::add_edit, "t", ctx);
  EXPECT_EQ(add.temperature, 0.1);
  EXPECT_EQ(add.max_tokens, 4000);
  EXPECT_TRUE(add.structured_output);
  EXPECT_EQ(add.messages[0].parts.size(), 2u);

  const auto intent = p.build_request(PromptId::intent_decomposition, "t", ctx);
  EXPECT_EQ(intent.messages[0].parts.size(), 3u);

  const auto concept_req = p.build_request(PromptId::concept_ui, "t", ctx);
  EXPECT_EQ(concept_req.temperature, 0.2);
  EXPECT_EQ(concept_req.max_tokens, 1200);
  EXPECT_EQ(concept_req.messages[0].parts.size(), 1u);

  EXPECT_EQ(p.build_request(PromptId::attribute_ui, "t", ctx).max_tokens, 3000);
  EXPECT_EQ(p.build_request(PromptId::default_value, "t", ctx).max_tokens, 300);
}

TEST(Pipeline, DecisionFromScript) {
  GenerationPipeline p(catalog(), bundle(), icons(), playful_script());
  const auto d = p.decide_add_or_edit(fountain_context("make it more playful"));
  EXPECT_FALSE(d.should_add_particle);

  auto junk = std::make_shared<ScriptedProvider>(std::vector<ScriptedProvider::Rule>{{{}, "I think you should ADD"}});
  GenerationPipeline bad(catalog(), bundle(), icons(), junk);
  EXPECT_EQ(kind_of([&] { bad.decide_add_or_edit(fountain_context("x")); }), ErrorKind::pipeline);
}

TEST(Pipeline, BrushesStreamProgressively) {
  GenerationPipeline p(catalog(), bundle(), icons(), playful_script());
  std::vector<BrushSpec> streamed;
  const auto all = p.generate_brushes(fountain_context(""), [&](const BrushSpec& b) { streamed.push_back(b); });
  ASSERT_EQ(all.size(), 7u);
  EXPECT_EQ(streamed, all);
}

TEST(Pipeline, DefaultFallsBackOnFailedCall) {
  auto empty = std::make_shared<ScriptedProvider>(std::vector<ScriptedProvider::Rule>{});
  GenerationPipeline p(catalog(), bundle(), icons(), empty);
  TechnicalUiConfig theta{"velocity_theta", 0, 180, {}, {}};
  EXPECT_EQ(p.infer_default(theta, fountain_context("x")), 90);
}

TEST(Pipeline, AttributeFallsBackToIndividualCalls) {
  GenerationPipeline p(catalog(), bundle(), icons(), playful_script());
  const auto ctx = fountain_context("make it more playful");
  const AttributeSpec attr{"movement_variability", "Wider, more varied jets",
                           {{"velocity_theta", "wider spray cone"}, {"velocity_radius", "higher jumps"}}};
  const ConceptSpec parent{"dynamic_movement", "d", {attr}};
  const auto cfg = p.generate_attribute_ui(attr, parent, ctx);
  EXPECT_EQ(cfg.attribute.weights, normalize_weights(std::vector<double>{0.6, 0.4}, 2));
  ASSERT_EQ(cfg.attribute.presets.size(), 3u);
  EXPECT_EQ(cfg.attribute.presets[2].label, "Sprinkler");
  EXPECT_EQ(cfg.attribute.presets[2].values,
            (std::vector<std::pair<std::string, double>>{{"velocity_theta", 70}, {"velocity_radius", 25}}));
  ASSERT_EQ(cfg.technical.size(), 2u);
  EXPECT_EQ(cfg.technical[0].min, 12);
  EXPECT_EQ(cfg.technical[1].max, 25);

  // Same failing response, same fallback result.
  const auto again = p.generate_attribute_ui(attr, parent, ctx);
  EXPECT_EQ(again.attribute.presets, cfg.attribute.presets);
  EXPECT_EQ(again.attribute.weights, cfg.attribute.weights);
  EXPECT_EQ(again.technical[1].step_labels, cfg.technical[1].step_labels);
}

TEST(Pipeline, PersistentAttributeFailureIsPipelineError) {
  auto junk = std::make_shared<ScriptedProvider>(std::vector<ScriptedProvider::Rule>{{{}, "{}"}});
  GenerationPipeline p(catalog(), bundle(), icons(), junk);
  const AttributeSpec attr{"a", "d", {{"velocity_theta", "r"}}};
  EXPECT_EQ(kind_of([&] { p.generate_attribute_ui(attr, {"c", "d", {attr}}, fountain_context("x")); }),
            ErrorKind::pipeline);
}

double weighted_mean(const ControlTree& tree, const ControlNode& n) {
  double num = 0, den = 0;
  for (const auto& c : n.children) {
    num += c.weight * tree.node(c.id).value;
    den += c.weight;
  }
  return num / den;
}

TEST(Pipeline, PlayfulPanelAssembles) {
  GenerationPipeline p(catalog(), bundle(), icons(), playful_script());
  const auto ctx = fountain_context("make it more playful");
  const auto h = p.decompose_intent(ctx);
  ASSERT_EQ(h.concepts.size(), 2u);
  const auto gen = p.generate_panel(h, ctx);

  ControlTree tree(gen.panel);
  EXPECT_TRUE(tree.check_invariants(&catalog()).empty());
  EXPECT_EQ(gen.defaults.at("velocity_radius"), 17.5);  // 400 is outside (10, 25)
  EXPECT_EQ(gen.defaults.at("velocity_theta"), 30);
  for (const auto& n : gen.panel.nodes) {
    if (n.level == Level::technical) {
      EXPECT_NEAR(denormalize(n.range, n.value), gen.defaults.at(n.id), 1e-9) << n.id;
    } else {
      EXPECT_NEAR(n.value, weighted_mean(tree, n), 1e-12) << n.id;
    }
  }
  EXPECT_EQ(tree.node("vibrancy").children[0].weight, 0.7);

  // Parallel generation must not change the assembled result.
  const auto again = p.generate_panel(h, ctx);
  EXPECT_EQ(again.panel, gen.panel);
}

TEST(Assemble, RefusesMismatchedInputs) {
  const HierarchySpec h{"p", {{"c", "d", {{"a", "d", {{"velocity_theta", "r"}}}}}}};
  const ConceptUiConfig c{"c", {"x", "y", "z"}, {}, {1.0}};
  const AttributeUiConfig a{{"a", {"x", "y", "z"}, {}, {1.0}}, {{"velocity_theta", 0, 90, {"x", "y", "z"}, {}}}};
  EXPECT_NO_THROW(assemble_panel(h, {c}, {a}, {{"velocity_theta", 45}}, catalog(), TemplateKind::fire));
  EXPECT_THROW(assemble_panel(h, {}, {a}, {{"velocity_theta", 45}}, catalog(), TemplateKind::fire), Error);
  EXPECT_THROW(assemble_panel(h, {c}, {a}, {}, catalog(), TemplateKind::fire), Error);
  auto wide = a;
  wide.technical[0].max = 500;
  EXPECT_EQ(kind_of([&] { assemble_panel(h, {c}, {wide}, {{"velocity_theta", 45}}, catalog(), TemplateKind::fire); }),
            ErrorKind::pipeline);
  const auto panel = assemble_panel(h, {c}, {a}, {{"velocity_theta", 45}}, catalog(), TemplateKind::fire);
  EXPECT_EQ(panel.system_type, "fire");
  EXPECT_EQ(panel.bindings.at("velocity_theta"), "velocity_theta");
  EXPECT_EQ(panel.nodes.back().value, 0.5);
}

}  // namespace
}  // namespace fxctl
