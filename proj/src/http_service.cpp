#include "fxctl/http_service.hpp"

#include <httplib.h>

#include <chrono>

#include "fxctl/panel_io.hpp"
#include "fxctl/scene.hpp"

namespace fxctl {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json brushes_json(const std::vector<BrushSpec>& brushes) {
  ordered_json arr = ordered_json::array();
  for (const auto& b : brushes) {
    arr.push_back({{"brushid", b.brushid}, {"functionality", b.functionality}, {"color", b.color}, {"icon", b.icon}});
  }
  return {{"brushes", arr}};
}

ordered_json control_result_json(const ControlResult& r) {
  ordered_json changes = ordered_json::array();
  for (const auto& c : r.event.changes) {
    changes.push_back({{"id", c.id}, {"old", c.old_value}, {"new", c.new_value}, {"raw", r.raw_values.at(c.id)}});
  }
  ordered_json engine = ordered_json::object();
  for (const auto& [k, v] : r.engine_writes) engine[k] = v;
  return {{"seq", r.seq},
          {"event",
           {{"origin", r.event.origin},
            {"iterations", r.event.iterations},
            {"residual", r.event.residual},
            {"changes", changes}}},
          {"engine", engine}};
}

ordered_json intent_result_json(const IntentResult& r) {
  ordered_json j{{"seq", r.seq}, {"action", r.added ? "add" : "edit"}, {"reason", r.reason}};
  j["particle_type"] = r.particle_type ? ordered_json(std::string(to_string(*r.particle_type))) : ordered_json();
  j["panel"] = r.panel ? ordered_json::parse(serialize_panel(*r.panel)) : ordered_json();
  return j;
}

ordered_json session_json(const SessionSnapshot& s) {
  return {{"session_id", s.id},
          {"seq", s.seq},
          {"frame", s.frame},
          {"system_type", std::string(to_string(s.state.template_kind))},
          {"scene", ordered_json::parse(serialize_scene(s.scene))},
          {"has_panel", s.panel.has_value()},
          {"palette_ready", s.palette.has_value()},
          {"palette_error", s.palette_error}};
}

ordered_json error_json(const Error& e) {
  return {{"error", {{"kind", to_string(e.kind())}, {"stage", e.stage()}, {"reason", e.reason()}}}};
}

int http_status(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::parse:
    case ErrorKind::validation:
    case ErrorKind::unknown_parameter:
    case ErrorKind::range_violation: return 400;
    case ErrorKind::unknown_node: return 404;
    case ErrorKind::session: return e.stage() == "session" ? 404 : 409;
    case ErrorKind::locked:
    case ErrorKind::binding_mismatch:
    case ErrorKind::version_mismatch: return 409;
    case ErrorKind::render:
    case ErrorKind::transport:
    case ErrorKind::fixture_miss:
    case ErrorKind::pipeline: return 502;
    case ErrorKind::io: return 500;
  }
  return 500;
}

namespace {

constexpr const char* kJson = "application/json";

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, "request", std::string("request body is not JSON: ") + e.what());
  }
}

void reply(httplib::Response& res, const ordered_json& doc, int status = 200) {
  res.status = status;
  res.set_content(doc.dump(), kJson);
}

// Wraps a handler so every fxctl::Error becomes a labelled error body.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      reply(res, error_json(e), http_status(e));
    } catch (const json::exception& e) {
      reply(res, error_json(Error(ErrorKind::validation, "request", e.what())), 400);
    }
  };
}

std::string frame_event(const Frame& f) {
  return "event: frame\nid: " + std::to_string(f.index) + "\ndata: {\"index\":" + std::to_string(f.index) +
         ",\"seq\":" + std::to_string(f.seq) + ",\"frame\":" + frame_document(f.snapshot) + "}\n\n";
}

}  // namespace

void install_routes(httplib::Server& server, SessionManager& sm) {
  const std::string id = R"(/sessions/([^/]+))";

  server.Get("/health", guarded([&](const httplib::Request&, httplib::Response& res) {
               reply(res, {{"status", "ok"}, {"sessions", sm.session_ids().size()}});
             }));

  server.Post("/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto sid = sm.create_session(parse_scene(req.body));
                reply(res, session_json(*sm.snapshot(sid)), 201);
              }));

  server.Get(id, guarded([&](const httplib::Request& req, httplib::Response& res) {
               reply(res, session_json(*sm.snapshot(req.matches[1])));
             }));

  server.Delete(id, guarded([&](const httplib::Request& req, httplib::Response& res) {
                  sm.close_session(req.matches[1]);
                  res.status = 204;
                }));

  server.Put(id + "/scene", guarded([&](const httplib::Request& req, httplib::Response& res) {
               sm.set_scene(req.matches[1], parse_scene(req.body));
               reply(res, session_json(*sm.snapshot(req.matches[1])));
             }));

  server.Get(id + "/palette", guarded([&](const httplib::Request& req, httplib::Response& res) {
               reply(res, brushes_json(sm.palette(req.matches[1])));
             }));

  server.Post(id + "/palette/refresh", guarded([&](const httplib::Request& req, httplib::Response& res) {
                reply(res, brushes_json(sm.refresh_palette(req.matches[1])));
              }));

  server.Post(id + "/intent", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto body = body_of(req);
                if (!body.contains("prompt") || !body["prompt"].is_string()) {
                  throw Error(ErrorKind::validation, "intent", "prompt must be a string");
                }
                std::optional<SketchSubmission> sketch;
                if (body.contains("sketch") && !body["sketch"].is_null()) {
                  sketch = parse_sketch(body["sketch"].dump());
                  if (body["sketch"].contains("overlay_base64")) {
                    sketch->overlay_png = base64_decode(body["sketch"]["overlay_base64"].get<std::string>());
                  }
                }
                std::optional<std::string> screenshot;
                if (body.contains("screenshot_base64") && body["screenshot_base64"].is_string()) {
                  screenshot = base64_decode(body["screenshot_base64"].get<std::string>());
                }
                reply(res, intent_result_json(
                               sm.submit_intent(req.matches[1], body["prompt"].get<std::string>(), sketch, screenshot)));
              }));

  server.Post(id + R"(/controls/([^/]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto body = body_of(req);
                ControlUpdate u;
                u.node_id = req.matches[2];
                if (body.contains("value")) u.value = body["value"].get<double>();
                if (body.contains("preset")) u.preset = body["preset"].get<std::string>();
                reply(res, control_result_json(sm.update_control(req.matches[1], u)));
              }));

  server.Post(id + R"(/controls/([^/]+)/lock)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto body = body_of(req);
                ControlUpdate u;
                u.node_id = req.matches[2];
                u.lock = body.value("locked", true);
                reply(res, control_result_json(sm.update_control(req.matches[1], u)));
              }));

  server.Get(id + "/panel", guarded([&](const httplib::Request& req, httplib::Response& res) {
               res.set_content(sm.save_panel(req.matches[1]), kJson);
             }));

  server.Put(id + "/panel", guarded([&](const httplib::Request& req, httplib::Response& res) {
               sm.load_panel(req.matches[1], req.body);
               reply(res, {{"seq", sm.snapshot(req.matches[1])->seq}});
             }));

  server.Post(id + "/step", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto body = body_of(req);
                const auto frame = sm.advance(req.matches[1], body.value("steps", 1), body.value("dt", 1.0 / 60.0));
                reply(res, {{"frame", frame}});
              }));

  server.Post(id + "/autorun", guarded([&](const httplib::Request& req, httplib::Response& res) {
                sm.set_autorun(req.matches[1], body_of(req).value("fps", 0.0));
                reply(res, {{"ok", true}});
              }));

  server.Get(id + "/state", guarded([&](const httplib::Request& req, httplib::Response& res) {
               const auto snap = sm.snapshot(req.matches[1]);
               res.set_content("{\"seq\":" + std::to_string(snap->seq) + ",\"index\":" + std::to_string(snap->frame) +
                                   ",\"frame\":" + frame_document(snap->view) + "}",
                               kJson);
             }));

  server.Get(id + "/stream", guarded([&](const httplib::Request& req, httplib::Response& res) {
               const std::string sid = req.matches[1];
               auto sub = sm.subscribe(sid);
               const double fps = req.has_param("fps") ? std::stod(req.get_param_value("fps")) : 0.0;
               const long limit = req.has_param("frames") ? std::stol(req.get_param_value("frames")) : -1;
               if (fps > 0) sm.set_autorun(sid, fps);
               auto sent = std::make_shared<long>(0);
               res.set_chunked_content_provider(
                   "text/event-stream", [sub, sent, limit](std::size_t, httplib::DataSink& sink) {
                     if (limit >= 0 && *sent >= limit) {
                       sink.done();
                       return true;
                     }
                     auto f = sub->next(std::chrono::milliseconds(500));
                     if (!f) {
                       if (sub->closed()) {
                         sink.done();
                         return true;
                       }
                       const std::string ping = ": keepalive\n\n";
                       return sink.write(ping.data(), ping.size());
                     }
                     const auto ev = frame_event(*f);
                     ++*sent;
                     return sink.write(ev.data(), ev.size());
                   });
             }));
}

}  // namespace fxctl
