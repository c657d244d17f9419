#include "fxctl/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "fxctl/error.hpp"
#include "fxctl/http_service.hpp"
#include "fxctl/panel_io.hpp"
#include "fxctl/service.hpp"

#ifndef FXCTL_DATA_DIR
#define FXCTL_DATA_DIR "data"
#endif

namespace fxctl {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kStage = "cli";

std::pair<std::string, std::string> split_assignment(const std::string& text, const char* flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw Error(ErrorKind::validation, kStage, std::string(flag) + " expects node=value, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    throw Error(ErrorKind::validation, kStage, what + ": '" + text + "' is not a number");
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, kStage, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, kStage, "cannot write '" + path.string() + "'");
  out << text;
}

std::shared_ptr<Provider> make_provider(const CliConfig& c) {
  auto live = [&]() -> std::shared_ptr<Provider> {
    return std::make_shared<LiveProvider>(c.live_config.empty() ? LiveConfig{} : load_live_config(c.live_config));
  };
  auto scripted = [&]() -> std::shared_ptr<Provider> {
    return std::make_shared<ScriptedProvider>(ScriptedProvider::rules_from_file(c.script));
  };
  if (c.provider == "live") return live();
  if (c.provider == "scripted") return scripted();
  const auto mode = parse_fixture_mode(c.fixture_mode);
  std::shared_ptr<Provider> upstream;
  if (mode != FixtureMode::replay) upstream = c.script.empty() ? live() : scripted();
  return std::make_shared<FixtureProvider>(c.fixtures, mode, upstream);
}

std::string with_default(const std::string& value, const char* fallback) {
  return value.empty() ? std::string(FXCTL_DATA_DIR) + "/" + fallback : value;
}

}  // namespace

void check_config(const CliConfig& c) {
  if (c.scene.empty()) throw Error(ErrorKind::validation, kStage, "--scene is required");
  if (c.provider != "fixture" && c.provider != "live" && c.provider != "scripted") {
    throw Error(ErrorKind::validation, kStage, "--provider must be fixture, live or scripted");
  }
  if (c.provider == "fixture" && c.fixtures.empty()) {
    throw Error(ErrorKind::validation, kStage, "fixture mode requires --fixtures");
  }
  if (c.provider == "scripted" && c.script.empty()) {
    throw Error(ErrorKind::validation, kStage, "scripted mode requires --script");
  }
  parse_fixture_mode(c.fixture_mode);
  if (c.steps < 0) throw Error(ErrorKind::validation, kStage, "--steps must be >= 0");
  if (!(c.dt > 0) || !std::isfinite(c.dt)) throw Error(ErrorKind::validation, kStage, "--dt must be > 0");
}

int run_cli(const CliConfig& c, std::ostream& out, std::ostream& err) {
  try {
    check_config(c);
    const auto catalog = load_catalog_file(with_default(c.catalog, "catalog.json"));
    const auto bundle = TemplateBundle::load(with_default(c.templates, "templates"));
    auto icons = load_icon_vocabulary(with_default(c.icons, "icons.txt"));
    auto provider = make_provider(c);

    auto scene = load_scene_file(c.scene);
    if (c.seed) scene.seed = *c.seed;

    ServiceOptions options;
    options.palette_on_create = false;  // requested explicitly below, in order
    SessionManager sm(catalog, bundle, std::move(icons), provider, options);
    const auto id = sm.create_session(scene);
    out << "scene: " << scene.objects.size() << " objects, " << to_string(scene.template_kind) << " system, seed "
        << scene.seed << "\n";

    ordered_json manifest;
    manifest["format"] = "fxctl.run";
    manifest["version"] = 1;
    manifest["scene"] = ordered_json::parse(serialize_scene(scene));
    manifest["steps"] = c.steps;
    manifest["dt"] = c.dt;
    manifest["palette"] = nullptr;

    if (c.palette) {
      const auto brushes = sm.palette(id);
      out << "palette: " << brushes.size() << " brushes\n";
      manifest["palette"] = brushes_json(brushes)["brushes"];
    }

    if (!c.load_panel.empty()) {
      sm.load_panel(id, read_file(c.load_panel));
      out << "panel loaded from " << c.load_panel << "\n";
    }

    manifest["prompts"] = ordered_json::array();
    for (const auto& prompt : c.prompts) {
      const auto r = sm.submit_intent(id, prompt);
      ordered_json entry{{"prompt", prompt}, {"action", r.added ? "add" : "edit"}};
      if (r.added) {
        entry["particle_type"] = std::string(to_string(*r.particle_type));
        out << "intent \"" << prompt << "\": add " << to_string(*r.particle_type) << "\n";
        if (auto snap = sm.snapshot(id); c.palette && snap->palette) {
          manifest["palette"] = brushes_json(*snap->palette)["brushes"];
        }
      } else {
        out << "intent \"" << prompt << "\": edit, panel \"" << r.panel->panel_name << "\" with "
            << r.panel->roots.size() << " concepts, " << r.panel->nodes.size() << " nodes\n";
      }
      manifest["prompts"].push_back(entry);
    }

    manifest["controls"] = ordered_json::array();
    auto control = [&](ControlUpdate u, ordered_json entry) {
      const auto r = sm.update_control(id, u);
      entry["changed"] = r.event.changes.size();
      out << "control " << u.node_id << ": " << r.event.changes.size() << " nodes changed\n";
      manifest["controls"].push_back(entry);
    };
    for (const auto& node : c.locks) {
      ControlUpdate u;
      u.node_id = node;
      u.lock = true;
      control(u, {{"node", node}, {"lock", true}});
    }
    for (const auto& s : c.sets) {
      auto [node, text] = split_assignment(s, "--set");
      ControlUpdate u;
      u.node_id = node;
      u.value = parse_number(text, "--set " + node);
      control(u, {{"node", node}, {"value", *u.value}});
    }
    for (const auto& s : c.presets) {
      auto [node, label] = split_assignment(s, "--preset");
      ControlUpdate u;
      u.node_id = node;
      u.preset = label;
      control(u, {{"node", node}, {"preset", label}});
    }

    const fs::path dump = c.dump_frames;
    if (!c.dump_frames.empty()) {
      std::error_code ec;
      fs::create_directories(dump, ec);
      if (ec) throw Error(ErrorKind::io, kStage, "cannot create '" + dump.string() + "': " + ec.message());
    }
    auto sub = sm.subscribe(id);
    manifest["frames"] = ordered_json::array();
    for (int i = 0; i < c.steps; ++i) {
      sm.advance(id, 1, c.dt);
      const auto frame = sub->next(std::chrono::seconds(5));
      if (!frame) throw Error(ErrorKind::session, "simulation", "no frame published for step " + std::to_string(i + 1));
      if (!c.dump_frames.empty()) {
        std::ostringstream name;
        name << "frame_" << std::setw(6) << std::setfill('0') << frame->index << ".json";
        const auto doc = frame_document(frame->snapshot) + "\n";
        write_file(dump / name.str(), doc);
        manifest["frames"].push_back({{"index", frame->index},
                                      {"file", name.str()},
                                      {"particle_count", frame->snapshot.particle_count},
                                      {"sha256", sha256_hex(doc)}});
      }
    }
    const auto snap = sm.snapshot(id);
    out << "simulated " << c.steps << " steps, " << snap->view.particle_count << " particles alive\n";

    manifest["system_type"] = std::string(to_string(snap->state.template_kind));
    manifest["panel_sha256"] = nullptr;
    if (snap->panel) {
      const auto panel_doc = serialize_panel(*snap->panel);
      if (!c.dump_frames.empty()) {
        write_file(dump / "panel.json", panel_doc);
        manifest["panel_sha256"] = sha256_hex(panel_doc);
      }
      if (!c.save_panel.empty()) {
        write_file(c.save_panel, panel_doc);
        out << "panel saved to " << c.save_panel << "\n";
      }
    } else if (!c.save_panel.empty()) {
      throw Error(ErrorKind::session, "panel", "no panel to save; submit an edit prompt or --load-panel first");
    }
    if (!c.dump_frames.empty()) {
      write_file(dump / "manifest.json", manifest.dump(2) + "\n");
      out << "frames written to " << dump.string() << "\n";
    }
    if (auto* fixture = dynamic_cast<FixtureProvider*>(provider.get())) {
      out << "fixtures: " << fixture->hits() << " hits, " << fixture->misses() << " misses\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "error [" << e.stage() << "] " << to_string(e.kind()) << ": " << e.reason() << "\n";
    return 1;
  }
}

int cli_main(int argc, char** argv) {
  CliConfig c;
  CLI::App app{"Headless particle-effect editing workflow"};
  app.add_option("--scene", c.scene, "scene manifest JSON")->required();
  app.add_option("--catalog", c.catalog, "parameter catalog JSON");
  app.add_option("--templates", c.templates, "prompt template directory");
  app.add_option("--icons", c.icons, "icon vocabulary file");
  app.add_option("--provider", c.provider, "fixture | live | scripted")->check(
      CLI::IsMember({"fixture", "live", "scripted"}));
  app.add_option("--fixtures", c.fixtures, "fixture directory");
  app.add_option("--fixture-mode", c.fixture_mode, "replay | record | replay-or-record");
  app.add_option("--script", c.script, "scripted responses (scripted mode or record upstream)");
  app.add_option("--live-config", c.live_config, "endpoint / model config JSON");
  app.add_option("--prompt", c.prompts, "intent text; repeat to submit several in order");
  app.add_option("--set", c.sets, "node=value in the node's display units");
  app.add_option("--preset", c.presets, "node=preset label");
  app.add_option("--lock", c.locks, "node id to lock");
  app.add_option("--steps", c.steps, "simulation steps");
  app.add_option("--dt", c.dt, "step size in seconds");
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "override the scene seed");
  app.add_option("--dump-frames", c.dump_frames, "directory for frame documents and manifest");
  app.add_option("--save-panel", c.save_panel, "write the final panel document");
  app.add_option("--load-panel", c.load_panel, "load a panel document before prompts");
  bool no_palette = false;
  app.add_flag("--no-palette", no_palette, "skip brush palette generation");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (seed_opt->count() > 0) c.seed = seed;
  c.palette = !no_palette;
  return run_cli(c, std::cout, std::cerr);
}

}  // namespace fxctl
