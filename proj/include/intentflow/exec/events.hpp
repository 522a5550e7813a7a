#pragma once

#include "intentflow/time.hpp"

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace intentflow::exec {

enum class EventKind { run_started, step_started, step_completed, step_failed, run_completed, run_failed };

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);
bool is_terminal(EventKind k);

struct RunEvent {
  std::string run_id;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::run_started;
  std::optional<std::size_t> step_index;
  std::string payload;
  Timestamp at{};

  bool operator==(const RunEvent&) const = default;
};

nlohmann::json to_json(const RunEvent& e);
RunEvent run_event_from_json(const nlohmann::json& j);

/// Checks a run's events against
///   run_started (step_started (step_completed|step_failed))* (run_completed|run_failed)
/// with seq 0.. contiguous, strictly increasing step indices and nothing
/// after a step_failed but run_failed. Returns a description of the first
/// problem, or nullopt.
std::optional<std::string> check_sequence(const std::vector<RunEvent>& events);

/// Append-only event log of one run, mirrored to an events.jsonl file.
/// Readers block on wait_after until newer events or the terminal event
/// arrive.
class EventLog {
public:
  EventLog(std::string run_id, std::filesystem::path file, Clock clock);

  /// Assigns the next seq and the timestamp, appends, wakes waiters.
  RunEvent append(EventKind kind, std::optional<std::size_t> step_index, std::string payload);

  std::vector<RunEvent> snapshot() const;
  /// Events with seq > after (all when after is nullopt); waits up to
  /// `timeout` when there are none yet and the run is still going.
  std::vector<RunEvent> wait_after(std::optional<std::uint64_t> after, std::chrono::milliseconds timeout) const;
  bool finished() const;

  using Listener = std::function<void(const RunEvent&)>;
  /// Called synchronously for every appended event, in order.
  void set_listener(Listener l);

private:
  std::string run_id_;
  std::filesystem::path file_;
  Clock clock_;
  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  std::vector<RunEvent> events_;
  bool finished_ = false;
  Listener listener_;
};

/// Events stored in an events.jsonl file. Errors: not_found, parse_error.
std::vector<RunEvent> read_event_file(const std::filesystem::path& file);

/// Events with seq strictly greater than `after`.
std::vector<RunEvent> events_after(const std::vector<RunEvent>& events, std::optional<std::uint64_t> after);

}  // namespace intentflow::exec
