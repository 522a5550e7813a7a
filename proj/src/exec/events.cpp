#include "intentflow/exec/events.hpp"

#include "intentflow/error.hpp"
#include "intentflow/model/serialize.hpp"

#include <fstream>

namespace intentflow::exec {

using nlohmann::json;

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::run_started: return "run_started";
    case EventKind::step_started: return "step_started";
    case EventKind::step_completed: return "step_completed";
    case EventKind::step_failed: return "step_failed";
    case EventKind::run_completed: return "run_completed";
    case EventKind::run_failed: return "run_failed";
  }
  return "run_failed";
}

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::run_started, EventKind::step_started, EventKind::step_completed,
                 EventKind::step_failed, EventKind::run_completed, EventKind::run_failed}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool is_terminal(EventKind k) { return k == EventKind::run_completed || k == EventKind::run_failed; }

json to_json(const RunEvent& e) {
  return json{{"run_id", e.run_id},
              {"seq", e.seq},
              {"kind", std::string(to_string(e.kind))},
              {"step_index", e.step_index ? json(*e.step_index) : json(nullptr)},
              {"payload", e.payload},
              {"at", format_utc(e.at)}};
}

RunEvent run_event_from_json(const json& j) {
  RunEvent e;
  try {
    e.run_id = j.at("run_id").get<std::string>();
    e.seq = j.at("seq").get<std::uint64_t>();
    auto kind = parse_event_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::parse_error, "unknown event kind");
    e.kind = *kind;
    if (j.contains("step_index") && !j["step_index"].is_null()) e.step_index = j["step_index"].get<std::size_t>();
    e.payload = j.value("payload", std::string{});
    e.at = parse_utc(j.at("at").get<std::string>());
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::parse_error, std::string("malformed run event: ") + ex.what());
  }
  return e;
}

std::optional<std::string> check_sequence(const std::vector<RunEvent>& events) {
  if (events.empty()) return "no events";
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].seq != i) return "seq gap at position " + std::to_string(i);
    if (events[i].run_id != events[0].run_id) return "mixed run ids";
  }
  if (events.front().kind != EventKind::run_started) return "first event must be run_started";
  std::optional<std::size_t> last_step;
  std::size_t i = 1;
  bool failed = false;
  while (i < events.size() && events[i].kind == EventKind::step_started) {
    const auto& start = events[i];
    if (!start.step_index) return "step_started without step_index";
    if (last_step && *start.step_index <= *last_step) return "step indices must increase";
    if (i + 1 >= events.size()) return "step " + std::to_string(*start.step_index) + " never finished";
    const auto& end = events[i + 1];
    if (end.kind != EventKind::step_completed && end.kind != EventKind::step_failed) {
      return "step_started must be followed by step_completed or step_failed";
    }
    if (end.step_index != start.step_index) return "step end index differs from its start";
    last_step = start.step_index;
    i += 2;
    if (end.kind == EventKind::step_failed) {
      failed = true;
      break;
    }
  }
  if (i + 1 != events.size()) return "exactly one terminal event must close the run";
  const EventKind last = events[i].kind;
  if (!is_terminal(last)) return "last event must be run_completed or run_failed";
  if (failed && last != EventKind::run_failed) return "a failed step must end in run_failed";
  return std::nullopt;
}

EventLog::EventLog(std::string run_id, std::filesystem::path file, Clock clock)
    : run_id_(std::move(run_id)), file_(std::move(file)), clock_(std::move(clock)) {
  std::filesystem::create_directories(file_.parent_path());
  std::ofstream(file_, std::ios::trunc);
}

RunEvent EventLog::append(EventKind kind, std::optional<std::size_t> step_index, std::string payload) {
  RunEvent e;
  Listener listener;
  {
    std::lock_guard lock(mutex_);
    if (finished_) throw Error(ErrorCode::internal, "event log of run " + run_id_ + " is closed");
    e.run_id = run_id_;
    e.seq = events_.size();
    e.kind = kind;
    e.step_index = step_index;
    e.payload = std::move(payload);
    e.at = clock_();
    {
      std::ofstream out(file_, std::ios::app);
      out << model::canonical_line(to_json(e)) << "\n";
      if (!out) throw Error(ErrorCode::internal, "cannot append to " + file_.string());
    }
    events_.push_back(e);
    if (is_terminal(kind)) finished_ = true;
    listener = listener_;
  }
  cv_.notify_all();
  if (listener) listener(e);
  return e;
}

std::vector<RunEvent> EventLog::snapshot() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::vector<RunEvent> EventLog::wait_after(std::optional<std::uint64_t> after,
                                           std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  const std::size_t from = after ? static_cast<std::size_t>(*after + 1) : 0;
  cv_.wait_for(lock, timeout, [&] { return events_.size() > from || finished_; });
  if (events_.size() <= from) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(from), events_.end()};
}

bool EventLog::finished() const {
  std::lock_guard lock(mutex_);
  return finished_;
}

void EventLog::set_listener(Listener l) {
  std::lock_guard lock(mutex_);
  listener_ = std::move(l);
}

std::vector<RunEvent> read_event_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::not_found, "no event log at " + file.string());
  std::vector<RunEvent> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    // A torn final line from a concurrent writer is simply not visible yet.
    if (j.is_discarded()) break;
    out.push_back(run_event_from_json(j));
  }
  return out;
}

std::vector<RunEvent> events_after(const std::vector<RunEvent>& events, std::optional<std::uint64_t> after) {
  std::vector<RunEvent> out;
  for (const auto& e : events) {
    if (!after || e.seq > *after) out.push_back(e);
  }
  return out;
}

}  // namespace intentflow::exec
