#include "fxctl/service.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <thread>

#include "fxctl/error.hpp"
#include "fxctl/panel_io.hpp"

namespace fxctl {

std::optional<Frame> FrameSubscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !frames_.empty() || closed_; });
  if (frames_.empty()) return std::nullopt;
  Frame f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

bool FrameSubscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_ && frames_.empty();
}

void FrameSubscription::push(const Frame& f) {
  {
    std::lock_guard lock(mu_);
    frames_.push_back(f);
  }
  cv_.notify_all();
}

void FrameSubscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

class Session {
 public:
  Session(std::string id, const SceneManifest& scene, const Catalog& catalog, const GenerationPipeline& pipeline,
          ServiceOptions options)
      : catalog_(catalog), pipeline_(pipeline), options_(options) {
    id_ = std::move(id);
    scene_ = scene;
    state_ = instantiate_template(scene.template_kind, catalog, scene.seed);
    commit();
    worker_ = std::thread([this] { work(); });
  }

  ~Session() { stop(); }

  void stop() {
    set_autorun(0);
    {
      std::lock_guard lock(queue_mu_);
      if (stopping_) return;
      stopping_ = true;
    }
    queue_cv_.notify_all();
    if (worker_.joinable()) worker_.join();
    std::lock_guard lock(sub_mu_);
    for (auto& s : subscribers_) s->close();
    subscribers_.clear();
  }

  // Runs `f` on the worker after everything queued before it.
  template <class F>
  auto run(F&& f) -> decltype(f()) {
    using R = decltype(f());
    auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(f));
    auto result = task->get_future();
    {
      std::lock_guard lock(queue_mu_);
      if (stopping_) throw Error(ErrorKind::session, "session", "session '" + id_ + "' is closed");
      queue_.push_back([task] { (*task)(); });
    }
    queue_cv_.notify_one();
    return result.get();
  }

  void post(std::function<void()> f) {
    {
      std::lock_guard lock(queue_mu_);
      if (stopping_) return;
      queue_.push_back(std::move(f));
    }
    queue_cv_.notify_one();
  }

  std::shared_ptr<const SessionSnapshot> snapshot() const {
    std::lock_guard lock(snap_mu_);
    return snapshot_;
  }

  std::shared_ptr<FrameSubscription> subscribe() {
    auto s = std::make_shared<FrameSubscription>();
    std::lock_guard lock(sub_mu_);
    subscribers_.push_back(s);
    return s;
  }

  void set_autorun(double fps) {
    std::thread old;
    {
      std::lock_guard lock(ticker_mu_);
      ticker_stop_ = true;
      old = std::move(ticker_);
    }
    ticker_cv_.notify_all();
    if (old.joinable()) old.join();
    if (fps <= 0) return;
    std::lock_guard lock(ticker_mu_);
    ticker_stop_ = false;
    ticker_ = std::thread([this, fps] { tick_loop(fps); });
  }

  // --- worker-owned state, touched only from tasks passed to run/post ---

  void commit() {
    auto s = std::make_shared<SessionSnapshot>();
    s->id = id_;
    s->seq = ++seq_;
    s->frame = frame_;
    s->scene = scene_;
    s->state = state_;
    s->view = fxctl::snapshot(state_);
    if (tree_) s->panel = tree_->config();
    s->palette = palette_;
    s->palette_error = palette_error_;
    std::lock_guard lock(snap_mu_);
    snapshot_ = std::move(s);
  }

  void regenerate_palette() {
    try {
      auto ctx = make_context(state_, catalog_, "", scene_.objects);
      palette_ = pipeline_.generate_brushes(ctx);
      palette_error_.clear();
    } catch (const Error& e) {
      palette_.reset();
      palette_error_ = std::string(e.stage()) + ": " + e.reason();
      palette_error_kind_ = e.kind();
    }
  }

  void write_technical_to_engine(const std::string& node_id, std::map<std::string, double>* writes) {
    const auto& cfg = tree_->config();
    auto b = cfg.bindings.find(node_id);
    if (b == cfg.bindings.end()) return;
    const double raw = catalog_.clamp_to_range(b->second, tree_->raw_value(node_id));
    apply_parameter(state_, b->second, raw, catalog_);
    if (writes) (*writes)[b->second] = raw;
  }

  void write_all_technical() {
    for (const auto& n : tree_->config().nodes) {
      if (n.level == Level::technical) write_technical_to_engine(n.id, nullptr);
    }
  }

  std::uint64_t advance(int steps, double dt) {
    for (int i = 0; i < steps; ++i) {
      step(state_, dt);
      ++frame_;
      publish(Frame{frame_, seq_, fxctl::snapshot(state_)});
    }
    commit();
    return frame_;
  }

  std::string id_;
  SceneManifest scene_;
  SystemState state_;
  std::optional<ControlTree> tree_;
  std::optional<std::vector<BrushSpec>> palette_;
  std::string palette_error_;
  ErrorKind palette_error_kind_ = ErrorKind::pipeline;
  std::uint64_t seq_ = 0;
  std::uint64_t frame_ = 0;

  const Catalog& catalog_;
  const GenerationPipeline& pipeline_;

 private:
  void work() {
    while (true) {
      std::function<void()> job;
      {
        std::unique_lock lock(queue_mu_);
        queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      job();
    }
  }

  void publish(const Frame& f) {
    std::lock_guard lock(sub_mu_);
    std::erase_if(subscribers_, [](const auto& s) { return s.use_count() == 1; });
    for (auto& s : subscribers_) {
      s->push(f);
      std::lock_guard q(s->mu_);
      while (s->frames_.size() > options_.max_queued_frames) s->frames_.pop_front();
    }
  }

  void tick_loop(double fps) {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / fps));
    auto next = std::chrono::steady_clock::now();
    std::unique_lock lock(ticker_mu_);
    while (!ticker_stop_) {
      next += period;
      if (ticker_cv_.wait_until(lock, next, [&] { return ticker_stop_; })) return;
      lock.unlock();
      try {
        run([&] { return advance(1, 1.0 / fps); });
      } catch (const Error&) {
        return;
      }
      lock.lock();
    }
  }

  ServiceOptions options_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<std::function<void()>> queue_;
  bool stopping_ = false;
  std::thread worker_;

  mutable std::mutex snap_mu_;
  std::shared_ptr<const SessionSnapshot> snapshot_;

  std::mutex sub_mu_;
  std::vector<std::shared_ptr<FrameSubscription>> subscribers_;

  std::mutex ticker_mu_;
  std::condition_variable ticker_cv_;
  bool ticker_stop_ = true;
  std::thread ticker_;
};

namespace {

void check_sketch(const SketchSubmission& sketch, const std::optional<std::vector<BrushSpec>>& palette) {
  std::set<int> known;
  if (palette) {
    for (const auto& b : *palette) known.insert(b.brushid);
  }
  std::set<int> unknown;
  for (const auto& s : sketch.strokes)
    if (s.brush_id != 0 && !known.contains(s.brush_id)) unknown.insert(s.brush_id);
  for (const auto& b : sketch.used_brushes)
    if (!known.contains(b.brush_id)) unknown.insert(b.brush_id);
  if (!unknown.empty()) {
    std::string ids;
    for (int i : unknown) ids += (ids.empty() ? "" : ", ") + std::to_string(i);
    throw Error(ErrorKind::validation, "intent", "sketch references brush id(s) not in the palette: " + ids);
  }
}

}  // namespace

SessionManager::SessionManager(const Catalog& catalog, const TemplateBundle& bundle, std::set<std::string> icons,
                               std::shared_ptr<Provider> provider, ServiceOptions options)
    : catalog_(catalog), pipeline_(catalog, bundle, std::move(icons), std::move(provider)), options_(options) {}

SessionManager::~SessionManager() {
  std::map<std::string, std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mu_);
    all.swap(sessions_);
  }
  for (auto& [id, s] : all) s->stop();
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorKind::session, "session", "unknown session '" + id + "'");
  return it->second;
}

std::string SessionManager::create_session(const SceneManifest& scene) {
  for (const auto& o : scene.objects) {
    if (!std::isfinite(o.position.x) || !std::isfinite(o.position.y) || !std::isfinite(o.position.z)) {
      throw Error(ErrorKind::validation, "scene", "object '" + o.name + "' has a non-finite position");
    }
  }
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = "s" + std::to_string(next_id_++);
  }
  auto s = std::make_shared<Session>(id, scene, catalog_, pipeline_, options_);
  if (options_.palette_on_create) {
    s->post([raw = s.get()] {
      raw->regenerate_palette();
      raw->commit();
    });
  }
  std::lock_guard lock(mu_);
  sessions_[id] = std::move(s);
  return id;
}

void SessionManager::close_session(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorKind::session, "session", "unknown session '" + id + "'");
    s = std::move(it->second);
    sessions_.erase(it);
  }
  s->stop();
}

std::vector<std::string> SessionManager::session_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

std::shared_ptr<const SessionSnapshot> SessionManager::snapshot(const std::string& id) const {
  return find(id)->snapshot();
}

void SessionManager::set_scene(const std::string& id, const SceneManifest& scene) {
  auto s = find(id);
  s->run([&, raw = s.get()] {
    raw->state_ = instantiate_template(scene.template_kind, catalog_, scene.seed);
    raw->scene_ = scene;
    raw->tree_.reset();
    raw->frame_ = 0;
    if (options_.palette_on_create) raw->regenerate_palette();
    raw->commit();
  });
}

std::vector<BrushSpec> SessionManager::palette(const std::string& id) {
  auto s = find(id);
  return s->run([raw = s.get()] {
    if (!raw->palette_) {
      if (raw->palette_error_.empty()) raw->regenerate_palette();
      raw->commit();
      if (!raw->palette_) throw Error(raw->palette_error_kind_, "brushes", raw->palette_error_);
    }
    return *raw->palette_;
  });
}

std::vector<BrushSpec> SessionManager::refresh_palette(const std::string& id) {
  auto s = find(id);
  return s->run([raw = s.get()] {
    raw->regenerate_palette();
    raw->commit();
    if (!raw->palette_) throw Error(raw->palette_error_kind_, "brushes", raw->palette_error_);
    return *raw->palette_;
  });
}

IntentResult SessionManager::submit_intent(const std::string& id, const std::string& prompt,
                                           std::optional<SketchSubmission> sketch,
                                           std::optional<std::string> screenshot_png) {
  auto s = find(id);
  return s->run([&, raw = s.get()] {
    if (sketch) check_sketch(*sketch, raw->palette_);
    auto ctx = make_context(raw->state_, catalog_, prompt, raw->scene_.objects);
    ctx.sketch = sketch;
    ctx.screenshot_png = screenshot_png;

    IntentResult r;
    const auto decision = pipeline_.decide_add_or_edit(ctx);
    r.reason = decision.reason;
    if (decision.should_add_particle) {
      r.added = true;
      r.particle_type = decision.particle_type;
      raw->scene_.template_kind = *decision.particle_type;
      raw->state_ = instantiate_template(*decision.particle_type, catalog_, raw->scene_.seed);
      raw->tree_.reset();
      raw->regenerate_palette();
    } else {
      const auto hierarchy = pipeline_.decompose_intent(ctx);
      auto generated = pipeline_.generate_panel(hierarchy, ctx);
      raw->tree_.emplace(std::move(generated.panel));
      raw->write_all_technical();
      r.panel = raw->tree_->config();
    }
    raw->commit();
    r.seq = raw->seq_;
    return r;
  });
}

ControlResult SessionManager::update_control(const std::string& id, const ControlUpdate& update) {
  auto s = find(id);
  return s->run([&, raw = s.get()] {
    if (!raw->tree_) throw Error(ErrorKind::session, "controls", "session has no active panel");
    auto& tree = *raw->tree_;
    const int actions = update.value.has_value() + update.preset.has_value() + update.lock.has_value();
    if (actions != 1) throw Error(ErrorKind::validation, "controls", "give exactly one of value, preset or lock");

    ControlResult r;
    if (update.lock) {
      tree.lock_node(update.node_id, *update.lock);
      r.event.origin = update.node_id;
    } else if (update.value) {
      const auto& n = tree.node(update.node_id);
      const double lo = std::min(n.range.min, n.range.max), hi = std::max(n.range.min, n.range.max);
      if (!(*update.value >= lo && *update.value <= hi)) {
        throw Error(ErrorKind::range_violation, "controls",
                    "value " + format_number(*update.value) + " for '" + n.id + "' is outside [" + format_number(lo) +
                        ", " + format_number(hi) + "]");
      }
      r.event = tree.set_node_value(update.node_id, *update.value);
    } else {
      r.event = tree.apply_preset(update.node_id, *update.preset);
    }
    for (const auto& c : r.event.changes) {
      r.raw_values[c.id] = tree.raw_value(c.id);
      if (tree.node(c.id).level == Level::technical) raw->write_technical_to_engine(c.id, &r.engine_writes);
    }
    raw->commit();
    r.seq = raw->seq_;
    return r;
  });
}

std::string SessionManager::save_panel(const std::string& id) {
  const auto snap = snapshot(id);
  if (!snap->panel) throw Error(ErrorKind::session, "panel", "session has no active panel");
  return serialize_panel(*snap->panel);
}

void SessionManager::load_panel(const std::string& id, std::string_view document) {
  auto panel = parse_panel(document);
  auto s = find(id);
  s->run([&, raw = s.get()] {
    const std::string active(to_string(raw->state_.template_kind));
    if (panel.system_type != active) {
      throw Error(ErrorKind::binding_mismatch, "panel",
                  "panel targets a " + panel.system_type + " system but the session runs " + active);
    }
    for (const auto& [node, param] : panel.bindings) {
      if (!catalog_.contains(param)) {
        throw Error(ErrorKind::binding_mismatch, "panel", "node '" + node + "' is bound to unknown parameter '" + param + "'");
      }
    }
    ControlTree tree(std::move(panel));
    const auto problems = tree.check_invariants(&catalog_);
    if (!problems.empty()) throw Error(ErrorKind::validation, "panel", problems.front());
    raw->tree_.emplace(std::move(tree));
    raw->write_all_technical();
    raw->commit();
  });
}

std::uint64_t SessionManager::advance(const std::string& id, int steps, double dt) {
  if (steps < 0 || !(dt > 0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::validation, "simulation", "steps must be >= 0 and dt > 0");
  }
  auto s = find(id);
  return s->run([&, raw = s.get()] { return raw->advance(steps, dt); });
}

std::shared_ptr<FrameSubscription> SessionManager::subscribe(const std::string& id) { return find(id)->subscribe(); }

void SessionManager::set_autorun(const std::string& id, double fps) {
  if (!(fps >= 0) || fps > 240) throw Error(ErrorKind::validation, "stream", "frame rate must be in [0, 240]");
  find(id)->set_autorun(fps);
}

}  // namespace fxctl
