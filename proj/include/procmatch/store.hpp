#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "procmatch/reference.hpp"
#include "procmatch/session.hpp"

namespace procmatch {

struct SessionState {
    Session session;
    std::optional<MergePlan> plan;
};

/// Models and sessions keyed by id, persisted as one JSON file per entity
/// under `root` (models/<id>.json, sessions/<id>.json). An empty root keeps
/// everything in memory.
///
/// Mutations of one session are serialized; readers take the latest
/// published snapshot and never wait for a writer.
class SessionStore {
public:
    /// Loads any persisted state. Throws Error{store_corrupt} naming the
    /// first unreadable file.
    explicit SessionStore(std::filesystem::path root = {});

    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    /// Stores a validated model. Uses the model's own id when it is free,
    /// assigns "m<n>" when the id is empty; a taken id is duplicate_id.
    Id add_model(ProcessModel model);
    std::shared_ptr<const ProcessModel> model(const Id& id) const;
    std::vector<Id> model_ids() const;

    Id create_session(const Id& left_model, const Id& right_model, const Weights& weights, double name_threshold);
    std::shared_ptr<const SessionState> snapshot(const Id& session_id) const;
    std::vector<Id> session_ids() const;

    /// Runs `change` on a private copy of the session state under the
    /// session's write lock, persists the result, then publishes it. A throw
    /// from `change` leaves the published state untouched.
    void mutate(const Id& session_id, const std::function<void(SessionState&)>& change);

    const std::filesystem::path& root() const noexcept { return root_; }

private:
    struct Slot {
        std::mutex write;
        mutable std::mutex publish;
        std::shared_ptr<const SessionState> current;
    };

    std::shared_ptr<Slot> slot(const Id& session_id) const;
    void persist_model(const ProcessModel& model) const;
    void persist_session(const SessionState& state) const;

    std::filesystem::path root_;
    mutable std::mutex mutex_;
    std::map<Id, std::shared_ptr<const ProcessModel>> models_;
    std::map<Id, std::shared_ptr<Slot>> sessions_;
    std::size_t next_model_ = 1;
    std::size_t next_session_ = 1;
};

} // namespace procmatch
