#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace memeprobe {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable tag that ends up in the event log.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// ---- ingestion -------------------------------------------------------------

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line_no, const std::string& why)
        : Error("MalformedRecord", "malformed record at line " + std::to_string(line_no) + ": " + why),
          line_no_(line_no) {}
    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::size_t line_no_;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(std::string id)
        : Error("DuplicateId", "duplicate id: " + id), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& path)
        : Error("MissingFile", "no such file: " + path) {}
};

// ---- model gateway ---------------------------------------------------------

class TemplateError : public Error {
public:
    explicit TemplateError(std::string placeholder)
        : Error("TemplateError", "unresolved template placeholder {" + placeholder + "}"),
          placeholder_(std::move(placeholder)) {}
    const std::string& placeholder() const noexcept { return placeholder_; }

private:
    std::string placeholder_;
};

class BackendUnreachable : public Error {
public:
    explicit BackendUnreachable(const std::string& why)
        : Error("BackendUnreachable", "backend unreachable: " + why) {}
};

class RateLimited : public Error {
public:
    explicit RateLimited(int attempts)
        : Error("RateLimited", "rate limited after " + std::to_string(attempts) + " attempts"),
          attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class BackendRejected : public Error {
public:
    BackendRejected(int status, const std::string& body)
        : Error("BackendRejected", "backend rejected request with HTTP " + std::to_string(status) + ": " + body),
          status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

class BackendProtocolError : public Error {
public:
    explicit BackendProtocolError(const std::string& why)
        : Error("BackendProtocolError", "unexpected backend response: " + why) {}
};

class UnscriptedRequest : public Error {
public:
    UnscriptedRequest(std::string role, std::string digest, const std::string& preview)
        : Error("UnscriptedRequest",
                "no scripted response for role " + role + " digest " + digest + "\n--- request ---\n" + preview),
          role_(std::move(role)), digest_(std::move(digest)) {}
    const std::string& role() const noexcept { return role_; }
    const std::string& digest() const noexcept { return digest_; }

private:
    std::string role_;
    std::string digest_;
};

class MalformedScenario : public Error {
public:
    explicit MalformedScenario(const std::string& why)
        : Error("MalformedScenario", "malformed mock scenario: " + why) {}
};

// ---- mining ----------------------------------------------------------------

class UnparseableVote : public Error {
public:
    explicit UnparseableVote(int miner_index)
        : Error("UnparseableVote", "miner " + std::to_string(miner_index) + " produced no parseable vote"),
          miner_index_(miner_index) {}
    int miner_index() const noexcept { return miner_index_; }

private:
    int miner_index_;
};

class UnparseableVerdict : public Error {
public:
    explicit UnparseableVerdict(std::string agent)
        : Error("UnparseableVerdict", agent + " produced no parseable yes/no verdict"), agent_(std::move(agent)) {}
    const std::string& agent() const noexcept { return agent_; }

private:
    std::string agent_;
};

class EmptyNarration : public Error {
public:
    EmptyNarration() : Error("EmptyNarration", "narrator returned no misbelief statement") {}
};

// ---- scoring ---------------------------------------------------------------

class MissingCandidate : public Error {
public:
    explicit MissingCandidate(int index)
        : Error("MissingCandidate", "candidate answer " + std::to_string(index) + " is empty"), index_(index) {}
    int index() const noexcept { return index_; }

private:
    int index_;
};

class UnparseableSummary : public Error {
public:
    UnparseableSummary() : Error("UnparseableSummary", "summarizer output has no usable reference answer") {}
};

class TargetUnreachable : public Error {
public:
    explicit TargetUnreachable(const std::string& why)
        : Error("TargetUnreachable", "target model unreachable: " + why) {}
};

class UnparseableScore : public Error {
public:
    UnparseableScore() : Error("UnparseableScore", "scorer output contains no integer score") {}
};

class OutOfRangeScore : public Error {
public:
    explicit OutOfRangeScore(long long value)
        : Error("OutOfRangeScore", "score " + std::to_string(value) + " is outside [1,10]"), value_(value) {}
    long long value() const noexcept { return value_; }

private:
    long long value_;
};

class EmptyStageInput : public Error {
public:
    explicit EmptyStageInput(const std::string& stage)
        : Error("EmptyStageInput", stage + " stage received no input samples") {}
};

// ---- retrieval / refinement -----------------------------------------------

class UnknownDocument : public Error {
public:
    explicit UnknownDocument(const std::string& id)
        : Error("UnknownDocument", "no indexed document " + id) {}
};

class PoolExhausted : public Error {
public:
    explicit PoolExhausted(std::string category)
        : Error("PoolExhausted", "sample pool exhausted for category " + category), category_(std::move(category)) {}
    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

class InsufficientSamples : public Error {
public:
    InsufficientSamples(std::size_t wanted, std::size_t available)
        : Error("InsufficientSamples", "seed set of " + std::to_string(wanted) + " requested from " +
                                           std::to_string(available) + " samples") {}
};

class DegenerateRefinement : public Error {
public:
    DegenerateRefinement() : Error("DegenerateRefinement", "refiner kept returning empty or unchanged text") {}
};

// ---- metrics ---------------------------------------------------------------

class EmptySampleSet : public Error {
public:
    EmptySampleSet() : Error("EmptySampleSet", "metric requested over an empty sample set") {}
};

class CategoryMismatch : public Error {
public:
    explicit CategoryMismatch(const std::string& category)
        : Error("CategoryMismatch", "category " + category + " missing from one side of the comparison") {}
};

// ---- runner ----------------------------------------------------------------

class InvalidConfig : public Error {
public:
    InvalidConfig(std::string field, const std::string& reason)
        : Error("InvalidConfig", "invalid config field '" + field + "': " + reason), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class MissingPriorArtifact : public Error {
public:
    MissingPriorArtifact(std::string stage, const std::string& path)
        : Error("MissingPriorArtifact", "run the '" + stage + "' stage first (missing " + path + ")"),
          stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class CorruptLog : public Error {
public:
    CorruptLog(std::uint64_t sequence, const std::string& why)
        : Error("CorruptLog", "event log corrupt at sequence " + std::to_string(sequence) + ": " + why),
          sequence_(sequence) {}
    std::uint64_t sequence() const noexcept { return sequence_; }

private:
    std::uint64_t sequence_;
};

} // namespace memeprobe
