#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fxctl/error.hpp"
#include "fxctl/service.hpp"

namespace httplib {
class Server;
}

namespace fxctl {

// Wire documents shared by the HTTP service and the CLI.
nlohmann::ordered_json brushes_json(const std::vector<BrushSpec>& brushes);
nlohmann::ordered_json control_result_json(const ControlResult& result);
nlohmann::ordered_json intent_result_json(const IntentResult& result);
nlohmann::ordered_json session_json(const SessionSnapshot& snap);
// {"error": {"kind", "stage", "reason"}}
nlohmann::ordered_json error_json(const Error& error);
int http_status(const Error& error);

// Routes, all JSON unless noted:
//   GET    /health
//   POST   /sessions                          scene manifest -> session
//   GET    /sessions/{id}
//   DELETE /sessions/{id}
//   PUT    /sessions/{id}/scene               scene manifest
//   GET    /sessions/{id}/palette
//   POST   /sessions/{id}/palette/refresh
//   POST   /sessions/{id}/intent              {prompt, sketch?, screenshot_base64?}
//   POST   /sessions/{id}/controls/{node}     {value} | {preset}
//   POST   /sessions/{id}/controls/{node}/lock {locked}
//   GET    /sessions/{id}/panel               panel document
//   PUT    /sessions/{id}/panel               panel document
//   POST   /sessions/{id}/step                {steps, dt}
//   POST   /sessions/{id}/autorun             {fps}
//   GET    /sessions/{id}/state               latest frame (polling)
//   GET    /sessions/{id}/stream?fps=&frames= text/event-stream of frames
void install_routes(httplib::Server& server, SessionManager& sessions);

}  // namespace fxctl
