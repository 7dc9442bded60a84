#include "memeprobe/events.hpp"

#include "memeprobe/domain.hpp"
#include "memeprobe/errors.hpp"
#include "memeprobe/text.hpp"

#include <chrono>
#include <ctime>

namespace memeprobe {

using nlohmann::json;

std::string Event::to_line() const
{
    json j = {{"seq", seq}, {"ts", ts}, {"stage", stage}, {"kind", kind}, {"payload", payload}};
    return j.dump();
}

Event Event::from_line(const std::string& line)
{
    auto j = json::parse(line);
    Event e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.ts = j.at("ts").get<std::string>();
    e.stage = j.at("stage").get<std::string>();
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.at("payload");
    return e;
}

void EventBuffer::add(std::string stage, std::string kind, json payload)
{
    events_.push_back({0, {}, std::move(stage), std::move(kind), std::move(payload)});
}

void EventBuffer::splice(EventBuffer&& other)
{
    events_.insert(events_.end(), std::make_move_iterator(other.events_.begin()),
                   std::make_move_iterator(other.events_.end()));
    other.events_.clear();
}

std::string utc_timestamp()
{
    using namespace std::chrono;
    auto now = system_clock::now();
    auto secs = system_clock::to_time_t(now);
    auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

EventLog::EventLog() : clock_(utc_timestamp) {}

EventLog::EventLog(const std::filesystem::path& path) : path_(path), clock_(utc_timestamp)
{
    bool needs_newline = false;
    if (std::filesystem::exists(path)) {
        events_ = read_event_log(path);
        auto content = read_file(path);
        needs_newline = !content.empty() && content.back() != '\n';
    } else if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) {
        throw std::runtime_error("cannot open event log " + path.string());
    }
    if (needs_newline) {
        out_ << '\n';
        out_.flush();
    }
}

void EventLog::set_clock(std::function<std::string()> clock)
{
    std::lock_guard lock(mutex_);
    clock_ = std::move(clock);
}

std::uint64_t EventLog::last_seq() const
{
    std::lock_guard lock(mutex_);
    return events_.empty() ? 0 : events_.back().seq;
}

std::vector<Event> EventLog::events() const
{
    std::lock_guard lock(mutex_);
    return events_;
}

void EventLog::begin_replay(std::uint64_t from_seq)
{
    std::lock_guard lock(mutex_);
    std::uint64_t last = events_.empty() ? 0 : events_.back().seq;
    replay_cursor_ = (from_seq >= 1 && from_seq <= last) ? from_seq : 0;
}

bool EventLog::replaying() const
{
    std::lock_guard lock(mutex_);
    return replay_cursor_ != 0;
}

void EventLog::append(std::string stage, std::string kind, json payload)
{
    std::lock_guard lock(mutex_);
    commit_locked({0, {}, std::move(stage), std::move(kind), std::move(payload)});
}

void EventLog::commit(EventBuffer&& buffer)
{
    std::lock_guard lock(mutex_);
    for (const auto& e : buffer.events()) {
        commit_locked(e);
    }
    buffer = EventBuffer{};
}

void EventLog::commit_locked(Event e)
{
    if (replay_cursor_ != 0) {
        const Event& logged = events_.at(replay_cursor_ - 1);
        bool same = logged.stage == e.stage && logged.kind == e.kind;
        if (same && e.kind == "model_call") {
            same = logged.payload.value("digest", "") == e.payload.value("digest", "");
        }
        if (!same) {
            throw CorruptLog(logged.seq, "replay diverges from the logged run (logged " + logged.stage + "/" +
                                             logged.kind + ", replay produced " + e.stage + "/" + e.kind + ")");
        }
        replay_cursor_ = replay_cursor_ < events_.size() ? replay_cursor_ + 1 : 0;
        return;
    }
    e.seq = events_.empty() ? 1 : events_.back().seq + 1;
    e.ts = clock_();
    if (path_) {
        out_ << e.to_line() << '\n';
        out_.flush();
    }
    events_.push_back(std::move(e));
}

std::vector<Event> read_event_log(const std::filesystem::path& path)
{
    auto content = read_file(path);
    std::vector<Event> events;
    auto lines = text::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.empty() && i + 1 == lines.size()) {
            break; // trailing newline
        }
        std::uint64_t expected = events.size() + 1;
        Event e;
        try {
            e = Event::from_line(line);
        } catch (const json::exception&) {
            bool last = i + 1 == lines.size() || (i + 2 == lines.size() && lines.back().empty());
            throw CorruptLog(expected, last ? "torn final line; run `resume --repair` to drop it"
                                            : "unparseable line in the middle of the log");
        }
        if (e.seq != expected) {
            throw CorruptLog(expected, "sequence gap (found " + std::to_string(e.seq) + ")");
        }
        events.push_back(std::move(e));
    }
    return events;
}

bool repair_event_log(const std::filesystem::path& path)
{
    auto content = read_file(path);
    auto lines = text::split_lines(content);
    std::string kept;
    bool dropped = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        try {
            (void)Event::from_line(lines[i]);
        } catch (const json::exception&) {
            if (i + 1 == lines.size() || (i + 2 == lines.size() && lines.back().empty())) {
                dropped = true;
                break;
            }
            throw CorruptLog(i + 1, "unparseable line in the middle of the log cannot be repaired");
        }
        kept += lines[i];
        kept += '\n';
    }
    if (dropped) {
        write_file_atomic(path, kept);
    }
    return dropped;
}

} // namespace memeprobe
