#include "procmatch/store.hpp"

#include <algorithm>

#include "procmatch/session_io.hpp"

namespace procmatch {

namespace fs = std::filesystem;

namespace {

std::size_t numbered(const Id& id, char prefix) {
    if (id.size() < 2 || id[0] != prefix) return 0;
    std::size_t n = 0;
    for (std::size_t i = 1; i < id.size(); ++i) {
        if (id[i] < '0' || id[i] > '9') return 0;
        n = n * 10 + static_cast<std::size_t>(id[i] - '0');
    }
    return n;
}

std::vector<fs::path> json_files(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) {
    if (root_.empty()) return;
    std::error_code ec;
    fs::create_directories(root_ / "models", ec);
    fs::create_directories(root_ / "sessions", ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create store under '" + root_.string() + "'", root_.string());

    for (const auto& path : json_files(root_ / "models")) {
        try {
            auto model = parse_model(io::read_file(path.string()));
            if (model.id.empty()) model.id = path.stem().string();
            next_model_ = std::max(next_model_, numbered(model.id, 'm') + 1);
            Id id = model.id;
            models_.emplace(std::move(id), std::make_shared<const ProcessModel>(std::move(model)));
        } catch (const Error& e) {
            throw Error(ErrorCode::store_corrupt, "corrupt store file '" + path.string() + "': " + e.what(),
                        path.string());
        }
    }
    for (const auto& path : json_files(root_ / "sessions")) {
        try {
            auto doc = io::session_from_json(io::parse_json(io::read_file(path.string())));
            auto slot = std::make_shared<Slot>();
            const Id id = doc.session.id();
            next_session_ = std::max(next_session_, numbered(id, 's') + 1);
            slot->current = std::make_shared<const SessionState>(SessionState{std::move(doc.session), std::move(doc.plan)});
            sessions_.emplace(id, std::move(slot));
        } catch (const Error& e) {
            throw Error(ErrorCode::store_corrupt, "corrupt store file '" + path.string() + "': " + e.what(),
                        path.string());
        }
    }
}

void SessionStore::persist_model(const ProcessModel& model) const {
    if (root_.empty()) return;
    io::write_file((root_ / "models" / (model.id + ".json")).string(), serialize_model(model));
}

void SessionStore::persist_session(const SessionState& state) const {
    if (root_.empty()) return;
    io::write_file((root_ / "sessions" / (state.session.id() + ".json")).string(),
                   io::dump(io::session_to_json(state.session, state.plan)));
}

Id SessionStore::add_model(ProcessModel model) {
    require_valid(model);
    std::lock_guard lock(mutex_);
    if (model.id.empty()) {
        do model.id = "m" + std::to_string(next_model_++);
        while (models_.contains(model.id));
    } else if (models_.contains(model.id)) {
        throw Error(ErrorCode::duplicate_id, "model id '" + model.id + "' is taken", model.id);
    }
    persist_model(model);
    Id id = model.id;
    models_.emplace(id, std::make_shared<const ProcessModel>(std::move(model)));
    return id;
}

std::shared_ptr<const ProcessModel> SessionStore::model(const Id& id) const {
    std::lock_guard lock(mutex_);
    auto it = models_.find(id);
    if (it == models_.end()) throw Error(ErrorCode::unknown_model, "no model with id '" + id + "'", id);
    return it->second;
}

std::vector<Id> SessionStore::model_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<Id> out;
    for (const auto& [id, _] : models_) out.push_back(id);
    return out;
}

Id SessionStore::create_session(const Id& left_model, const Id& right_model, const Weights& weights,
                                double name_threshold) {
    auto left = model(left_model);
    auto right = model(right_model);
    std::lock_guard lock(mutex_);
    Id id;
    do id = "s" + std::to_string(next_session_++);
    while (sessions_.contains(id));
    SessionState state{Session(id, left, right, weights, name_threshold), std::nullopt};
    persist_session(state);
    auto slot = std::make_shared<Slot>();
    slot->current = std::make_shared<const SessionState>(std::move(state));
    sessions_.emplace(id, std::move(slot));
    return id;
}

std::shared_ptr<SessionStore::Slot> SessionStore::slot(const Id& session_id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end())
        throw Error(ErrorCode::unknown_session, "no session with id '" + session_id + "'", session_id);
    return it->second;
}

std::shared_ptr<const SessionState> SessionStore::snapshot(const Id& session_id) const {
    auto s = slot(session_id);
    std::lock_guard lock(s->publish);
    return s->current;
}

std::vector<Id> SessionStore::session_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<Id> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
}

void SessionStore::mutate(const Id& session_id, const std::function<void(SessionState&)>& change) {
    auto s = slot(session_id);
    std::lock_guard write(s->write);
    std::shared_ptr<const SessionState> base;
    {
        std::lock_guard lock(s->publish);
        base = s->current;
    }
    auto next = std::make_shared<SessionState>(*base);
    change(*next);
    persist_session(*next);
    std::lock_guard lock(s->publish);
    s->current = std::move(next);
}

} // namespace procmatch
