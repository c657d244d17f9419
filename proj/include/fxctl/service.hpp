#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fxctl/catalog.hpp"
#include "fxctl/control_tree.hpp"
#include "fxctl/engine.hpp"
#include "fxctl/pipeline.hpp"
#include "fxctl/prompts.hpp"
#include "fxctl/provider.hpp"
#include "fxctl/scene.hpp"

namespace fxctl {

// Exactly one of value / preset / lock is set.
struct ControlUpdate {
  std::string node_id;
  std::optional<double> value;  // display units of the node
  std::optional<std::string> preset;
  std::optional<bool> lock;
};

struct ControlResult {
  std::uint64_t seq = 0;
  SyncEvent event;
  std::map<std::string, double> raw_values;     // every changed node, display units
  std::map<std::string, double> engine_writes;  // catalog parameter -> value written
};

struct IntentResult {
  std::uint64_t seq = 0;
  bool added = false;
  std::optional<TemplateKind> particle_type;
  std::string reason;
  std::optional<PanelConfig> panel;
};

// Immutable copy of one committed session state.
struct SessionSnapshot {
  std::string id;
  std::uint64_t seq = 0;  // bumped by every committed mutation
  std::uint64_t frame = 0;
  SceneManifest scene;
  SystemState state;
  Snapshot view;
  std::optional<PanelConfig> panel;
  std::optional<std::vector<BrushSpec>> palette;
  std::string palette_error;  // last failed generation, empty when none
};

struct Frame {
  std::uint64_t index = 0;
  std::uint64_t seq = 0;
  Snapshot snapshot;
};

// Frames published to one subscriber, in publication order.
class FrameSubscription {
 public:
  // nullopt once the session is closed and the queue drained, or on timeout.
  std::optional<Frame> next(std::chrono::milliseconds timeout);
  bool closed() const;

 private:
  friend class Session;
  void push(const Frame& f);
  void close();

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Frame> frames_;
  bool closed_ = false;
};

struct ServiceOptions {
  bool palette_on_create = true;
  std::size_t max_queued_frames = 256;  // per subscriber; oldest dropped first
};

class Session;

// In-memory sessions. Every mutation of a session runs on that session's
// single worker in arrival order; reads return the last committed snapshot.
class SessionManager {
 public:
  SessionManager(const Catalog& catalog, const TemplateBundle& bundle, std::set<std::string> icons,
                 std::shared_ptr<Provider> provider, ServiceOptions options = {});
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  std::string create_session(const SceneManifest& scene);
  void close_session(const std::string& id);
  std::vector<std::string> session_ids() const;

  std::shared_ptr<const SessionSnapshot> snapshot(const std::string& id) const;

  void set_scene(const std::string& id, const SceneManifest& scene);
  // Waits for any scheduled generation. Throws the stored failure if no
  // palette could be generated.
  std::vector<BrushSpec> palette(const std::string& id);
  std::vector<BrushSpec> refresh_palette(const std::string& id);

  IntentResult submit_intent(const std::string& id, const std::string& prompt,
                             std::optional<SketchSubmission> sketch = std::nullopt,
                             std::optional<std::string> screenshot_png = std::nullopt);

  ControlResult update_control(const std::string& id, const ControlUpdate& update);

  std::string save_panel(const std::string& id);
  void load_panel(const std::string& id, std::string_view document);

  // Steps the simulation and publishes one frame per step.
  std::uint64_t advance(const std::string& id, int steps, double dt);
  std::shared_ptr<FrameSubscription> subscribe(const std::string& id);
  // Background stepping at `fps` with dt = 1 / fps; 0 stops it.
  void set_autorun(const std::string& id, double fps);

  const Catalog& catalog() const noexcept { return catalog_; }

 private:
  std::shared_ptr<Session> find(const std::string& id) const;

  const Catalog& catalog_;
  GenerationPipeline pipeline_;
  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace fxctl
