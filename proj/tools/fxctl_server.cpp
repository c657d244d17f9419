#include <httplib.h>

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "fxctl/error.hpp"
#include "fxctl/http_service.hpp"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string catalog_path = FXCTL_DATA_DIR "/catalog.json";
  std::string templates = FXCTL_DATA_DIR "/templates";
  std::string icons_path = FXCTL_DATA_DIR "/icons.txt";
  std::string provider = "fixture", fixtures, fixture_mode = "replay-or-record", script, live_config;

  CLI::App app{"Particle-effect editing service"};
  app.add_option("--host", host);
  app.add_option("--port", port);
  app.add_option("--catalog", catalog_path);
  app.add_option("--templates", templates);
  app.add_option("--icons", icons_path);
  app.add_option("--provider", provider)->check(CLI::IsMember({"fixture", "live", "scripted"}));
  app.add_option("--fixtures", fixtures);
  app.add_option("--fixture-mode", fixture_mode);
  app.add_option("--script", script);
  app.add_option("--live-config", live_config);
  CLI11_PARSE(app, argc, argv);

  try {
    const auto catalog = fxctl::load_catalog_file(catalog_path);
    const auto bundle = fxctl::TemplateBundle::load(templates);
    std::shared_ptr<fxctl::Provider> upstream;
    auto live = [&]() -> std::shared_ptr<fxctl::Provider> {
      return std::make_shared<fxctl::LiveProvider>(live_config.empty() ? fxctl::LiveConfig{}
                                                                       : fxctl::load_live_config(live_config));
    };
    std::shared_ptr<fxctl::Provider> p;
    if (provider == "live") {
      p = live();
    } else if (provider == "scripted") {
      p = std::make_shared<fxctl::ScriptedProvider>(fxctl::ScriptedProvider::rules_from_file(script));
    } else {
      if (fixtures.empty()) throw fxctl::Error(fxctl::ErrorKind::validation, "server", "fixture mode requires --fixtures");
      const auto mode = fxctl::parse_fixture_mode(fixture_mode);
      if (mode != fxctl::FixtureMode::replay) {
        upstream = script.empty() ? live()
                                  : std::make_shared<fxctl::ScriptedProvider>(
                                        fxctl::ScriptedProvider::rules_from_file(script));
      }
      p = std::make_shared<fxctl::FixtureProvider>(fixtures, mode, upstream);
    }
    fxctl::SessionManager sessions(catalog, bundle, fxctl::load_icon_vocabulary(icons_path), p);
    httplib::Server server;
    fxctl::install_routes(server, sessions);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    if (!server.listen(host, port)) {
      std::cerr << "error [server] io: cannot listen on " << host << ":" << port << "\n";
      return 1;
    }
  } catch (const fxctl::Error& e) {
    std::cerr << "error [" << e.stage() << "] " << fxctl::to_string(e.kind()) << ": " << e.reason() << "\n";
    return 1;
  }
  return 0;
}
