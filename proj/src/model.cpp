#include "procmatch/model.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <utility>

#include "procmatch/json_io.hpp"

namespace procmatch {

std::string_view to_string(AccessMode mode) {
    switch (mode) {
    case AccessMode::produce: return "produce";
    case AccessMode::consume: return "consume";
    case AccessMode::modify: return "modify";
    }
    return "consume";
}

AccessMode access_mode_from_string(std::string_view text) {
    if (text == "produce") return AccessMode::produce;
    if (text == "consume") return AccessMode::consume;
    if (text == "modify") return AccessMode::modify;
    throw Error(ErrorCode::schema_error, "unknown access mode '" + std::string(text) + "'", std::string(text));
}

const CharacterizationEntry* CharacterizationVector::find(std::string_view factor,
                                                          std::string_view characteristic) const {
    for (const auto& e : entries)
        if (e.customization_factor == factor && e.characteristic == characteristic) return &e;
    return nullptr;
}

const ProcessEntity& ProcessModel::process(const Id& pid) const {
    auto it = processes.find(pid);
    if (it == processes.end())
        throw Error(ErrorCode::unknown_process, "unknown process '" + pid + "' in model '" + name + "'", pid);
    return it->second;
}

const ProductEntity& ProcessModel::product(const Id& pid) const {
    auto it = products.find(pid);
    if (it == products.end())
        throw Error(ErrorCode::unknown_entity, "unknown product '" + pid + "' in model '" + name + "'", pid);
    return it->second;
}

std::string normalize_name(std::string_view name) {
    auto is_space = [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    std::string out;
    out.reserve(name.size());
    bool pending_space = false;
    for (unsigned char c : name) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_name(std::vector<Violation>& out, const Id& id, const std::string& name, std::string_view kind) {
    if (id.empty()) out.push_back({id, "empty-id", std::string(kind) + " with empty id"});
    if (normalize_name(name).empty())
        out.push_back({id, "empty-name", std::string(kind) + " '" + id + "' has an empty name"});
}

template <class Map>
void check_keys(std::vector<Violation>& out, const Map& map, std::string_view kind) {
    for (const auto& [key, entity] : map)
        if (key != entity.id)
            out.push_back({entity.id, "id-mismatch",
                           std::string(kind) + " stored under '" + key + "' carries id '" + entity.id + "'"});
}

} // namespace

std::vector<Violation> validate_model(const ProcessModel& model) {
    std::vector<Violation> out;

    check_keys(out, model.processes, "process");
    check_keys(out, model.products, "product");
    check_keys(out, model.roles, "role");
    check_keys(out, model.tools, "tool");

    // Ids are unique across entity kinds.
    std::map<Id, int> kinds_per_id;
    for (const auto& [id, _] : model.processes) ++kinds_per_id[id];
    for (const auto& [id, _] : model.products) ++kinds_per_id[id];
    for (const auto& [id, _] : model.roles) ++kinds_per_id[id];
    for (const auto& [id, _] : model.tools) ++kinds_per_id[id];
    for (const auto& [id, n] : kinds_per_id)
        if (n > 1) out.push_back({id, "duplicate-id", "id '" + id + "' is used by more than one entity"});

    for (const auto& [id, p] : model.products) check_name(out, id, p.name, "product");
    for (const auto& [id, r] : model.roles) check_name(out, id, r.name, "role");
    for (const auto& [id, t] : model.tools) check_name(out, id, t.name, "tool");

    std::map<Id, std::vector<Id>> parents;
    for (const auto& [id, p] : model.processes) {
        check_name(out, id, p.name, "process");

        std::set<Id> seen_children;
        for (const auto& child : p.sub_processes) {
            if (!model.processes.contains(child)) {
                out.push_back({child, "dangling-reference",
                               "process '" + id + "' lists undeclared sub-process '" + child + "'"});
                continue;
            }
            if (!seen_children.insert(child).second) {
                out.push_back({child, "duplicate-subprocess",
                               "process '" + id + "' lists sub-process '" + child + "' twice"});
                continue;
            }
            parents[child].push_back(id);
        }

        std::set<std::pair<Id, AccessMode>> seen_access;
        for (const auto& access : p.product_accesses) {
            if (!model.products.contains(access.product))
                out.push_back({access.product, "dangling-reference",
                               "process '" + id + "' accesses undeclared product '" + access.product + "'"});
            if (!seen_access.emplace(access.product, access.mode).second)
                out.push_back({id, "duplicate-access",
                               "process '" + id + "' repeats access (" + access.product + ", " +
                                   std::string(to_string(access.mode)) + ")"});
        }
        for (const auto& role : p.role_ids)
            if (!model.roles.contains(role))
                out.push_back({role, "dangling-reference",
                               "process '" + id + "' references undeclared role '" + role + "'"});
        for (const auto& tool : p.tool_ids)
            if (!model.tools.contains(tool))
                out.push_back({tool, "dangling-reference",
                               "process '" + id + "' references undeclared tool '" + tool + "'"});
    }

    for (const auto& [child, ps] : parents)
        if (ps.size() > 1)
            out.push_back({child, "multiple-parents",
                           "process '" + child + "' is a sub-process of " + std::to_string(ps.size()) +
                               " parents"});

    // Cycle detection: one violation per back edge, which is one per simple cycle.
    enum class Color { white, grey, black };
    std::map<Id, Color> color;
    for (const auto& [id, _] : model.processes) color[id] = Color::white;
    for (const auto& [start, _] : model.processes) {
        if (color[start] != Color::white) continue;
        std::vector<std::pair<Id, std::size_t>> stack{{start, 0}};
        color[start] = Color::grey;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            const auto& children = model.processes.at(node).sub_processes;
            if (next == children.size()) {
                color[node] = Color::black;
                stack.pop_back();
                continue;
            }
            const Id child = children[next++];
            auto it = color.find(child);
            if (it == color.end()) continue;
            if (it->second == Color::grey) {
                out.push_back({child, "cycle", "sub-process hierarchy has a cycle through '" + child + "'"});
            } else if (it->second == Color::white) {
                it->second = Color::grey;
                stack.emplace_back(child, 0);
            }
        }
    }

    std::set<Id> roots_seen;
    for (const auto& root : model.root_processes) {
        if (!model.processes.contains(root)) {
            out.push_back({root, "dangling-reference", "root list names undeclared process '" + root + "'"});
            continue;
        }
        if (!roots_seen.insert(root).second)
            out.push_back({root, "roots-mismatch", "root list names '" + root + "' twice"});
        else if (parents.contains(root))
            out.push_back({root, "roots-mismatch", "root list names '" + root + "' which has a parent"});
    }
    for (const auto& [id, _] : model.processes)
        if (!parents.contains(id) && !roots_seen.contains(id))
            out.push_back({id, "roots-mismatch", "parentless process '" + id + "' missing from the root list"});

    std::set<std::pair<std::string, std::string>> seen_context;
    for (const auto& e : model.context.entries)
        if (!seen_context.emplace(e.customization_factor, e.characteristic).second)
            out.push_back({e.customization_factor + "/" + e.characteristic, "duplicate-characterization",
                           "characterization entry (" + e.customization_factor + ", " + e.characteristic +
                               ") appears twice"});

    return out;
}

namespace {

ErrorCode code_for_rule(std::string_view rule) {
    if (rule == "dangling-reference") return ErrorCode::dangling_reference;
    if (rule == "duplicate-id" || rule == "id-mismatch") return ErrorCode::duplicate_id;
    if (rule == "cycle") return ErrorCode::cyclic_hierarchy;
    if (rule == "multiple-parents") return ErrorCode::multiple_parents;
    return ErrorCode::invalid_model;
}

[[noreturn]] void throw_violation(const Violation& v) {
    throw Error(code_for_rule(v.rule), v.rule + ": " + v.message, v.entity);
}

} // namespace

void require_valid(const ProcessModel& model) {
    auto violations = validate_model(model);
    if (!violations.empty()) throw_violation(violations.front());
}

// ---------------------------------------------------------------------------
// Queries

std::set<Id> descendants(const ProcessModel& model, const Id& process_id, int max_depth) {
    if (max_depth < 1) throw Error(ErrorCode::invalid_model, "descendant depth must be at least 1");
    model.process(process_id);
    std::set<Id> out;
    std::deque<std::pair<Id, int>> queue{{process_id, 0}};
    while (!queue.empty()) {
        auto [node, depth] = queue.front();
        queue.pop_front();
        if (depth == max_depth) continue;
        for (const auto& child : model.process(node).sub_processes)
            if (child != process_id && out.insert(child).second) queue.emplace_back(child, depth + 1);
    }
    return out;
}

std::set<Id> accessed_products(const ProcessModel& model, const Id& process_id) {
    std::set<Id> out;
    for (const auto& access : model.process(process_id).product_accesses) out.insert(access.product);
    return out;
}

// ---------------------------------------------------------------------------
// Documents

ModelDocument read_model_document(std::string_view text) { return io::model_from_json(io::parse_json(text)); }

ProcessModel parse_model(std::string_view text) {
    auto doc = read_model_document(text);
    if (!doc.violations.empty()) throw_violation(doc.violations.front());
    require_valid(doc.model);
    return std::move(doc.model);
}

std::string serialize_model(const ProcessModel& model) {
    require_valid(model);
    return io::dump(io::model_to_json(model));
}

} // namespace procmatch
