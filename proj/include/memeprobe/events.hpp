#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace memeprobe {

/// One entry of the run event log. `seq` and `ts` are assigned when the event
/// is committed to an EventLog; buffered events carry seq 0.
struct Event {
    std::uint64_t seq = 0;
    std::string ts;
    std::string stage;
    std::string kind;
    nlohmann::json payload;

    std::string to_line() const;
    static Event from_line(const std::string& line);
};

/// Events produced by one unit of work. Stages collect events per unit, then
/// commit the buffers in a deterministic order so the log does not depend on
/// thread scheduling.
class EventBuffer {
public:
    void add(std::string stage, std::string kind, nlohmann::json payload);
    void splice(EventBuffer&& other);

    const std::vector<Event>& events() const noexcept { return events_; }
    bool empty() const noexcept { return events_.empty(); }

private:
    std::vector<Event> events_;
};

/// Append-only, gapless, line-delimited JSON event log.
///
/// In replay mode (used by resume) the first events committed are compared
/// against the events already on disk instead of being written again; once
/// the on-disk tail is passed, commits append as usual.
class EventLog {
public:
    /// In-memory log, for tests and dry runs.
    EventLog();
    /// Opens (creating if needed) a log file and positions after its last
    /// event. Throws CorruptLog if the existing content is not a valid log.
    explicit EventLog(const std::filesystem::path& path);

    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    void append(std::string stage, std::string kind, nlohmann::json payload);
    void commit(EventBuffer&& buffer);

    /// Starts verifying commits against on-disk events with seq >= `from_seq`.
    void begin_replay(std::uint64_t from_seq);
    bool replaying() const;

    std::uint64_t last_seq() const;
    /// Every event this log holds: loaded from disk plus committed since.
    std::vector<Event> events() const;

    void set_clock(std::function<std::string()> clock);

private:
    void commit_locked(Event e);

    mutable std::mutex mutex_;
    std::optional<std::filesystem::path> path_;
    std::ofstream out_;
    std::vector<Event> events_;
    std::uint64_t replay_cursor_ = 0; ///< next on-disk seq to verify; 0 = not replaying
    std::function<std::string()> clock_;
};

/// Parses a whole log. Throws CorruptLog naming the first bad sequence
/// number: an unparseable line (typically a torn final write) or a gap.
std::vector<Event> read_event_log(const std::filesystem::path& path);

/// Drops a torn trailing line so the log can be resumed. Returns true when
/// something was removed.
bool repair_event_log(const std::filesystem::path& path);

std::string utc_timestamp();

} // namespace memeprobe
