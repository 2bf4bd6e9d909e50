#include "procmatch/json_io.hpp"

#include <algorithm>

namespace procmatch::io {

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    // nlohmann reports the 1-based byte index of the offending character.
    std::size_t line = 1, column = 1;
    std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

std::vector<Id> id_list(const json& obj, const char* key, const std::string& where) {
    std::vector<Id> out;
    if (!obj.contains(key)) return out;
    const auto& arr = obj.at(key);
    if (!arr.is_array()) throw Error(ErrorCode::schema_error, where + ": '" + key + "' must be a list", where);
    for (const auto& item : arr) {
        if (!item.is_string())
            throw Error(ErrorCode::schema_error, where + ": '" + key + "' must contain ids", where);
        out.push_back(item.get<std::string>());
    }
    return out;
}

const json& list_field(const json& obj, const char* key) {
    static const json empty = json::array();
    if (!obj.contains(key)) return empty;
    const auto& arr = obj.at(key);
    if (!arr.is_array())
        throw Error(ErrorCode::schema_error, std::string("'") + key + "' must be a list", key);
    return arr;
}

template <class Entity>
void read_named(const json& doc, const char* key, std::string_view kind, std::map<Id, Entity>& into,
                std::vector<Violation>& violations) {
    for (const auto& item : list_field(doc, key)) {
        if (!item.is_object()) throw Error(ErrorCode::schema_error, std::string(kind) + " entries must be objects");
        Entity e;
        e.id = require_string(item, "id", std::string(kind));
        const std::string where = std::string(kind) + " '" + e.id + "'";
        e.name = require_string(item, "name", where);
        e.description = optional_string(item, "description", where);
        if (!into.emplace(e.id, e).second)
            violations.push_back({e.id, "duplicate-id", std::string(kind) + " id '" + e.id + "' declared twice"});
    }
}

template <class Entity>
json named_list(const std::map<Id, Entity>& entities) {
    json arr = json::array();
    for (const auto& [id, e] : entities)
        arr.push_back({{"id", e.id}, {"name", e.name}, {"description", e.description}});
    return arr;
}

} // namespace

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        auto [line, column] = line_column(text, e.byte);
        std::string what = e.what();
        if (auto pos = what.find("; "); pos != std::string::npos) what = what.substr(pos + 2);
        throw SyntaxError(what, line, column);
    }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw Error(ErrorCode::schema_error, where + ": missing field '" + key + "'", where);
    return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_string()) throw Error(ErrorCode::schema_error, where + ": field '" + key + "' must be text", where);
    return v.get<std::string>();
}

std::string optional_string(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return {};
    return require_string(obj, key, where);
}

double require_number(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_number()) throw Error(ErrorCode::schema_error, where + ": field '" + key + "' must be a number", where);
    return v.get<double>();
}

json context_to_json(const CharacterizationVector& context) {
    json arr = json::array();
    for (const auto& e : context.entries)
        arr.push_back({{"factor", e.customization_factor}, {"characteristic", e.characteristic}, {"value", e.value}});
    return arr;
}

CharacterizationVector context_from_json(const json& arr) {
    if (!arr.is_array()) throw Error(ErrorCode::schema_error, "'context' must be a list", "context");
    CharacterizationVector out;
    for (const auto& item : arr)
        out.entries.push_back({require_string(item, "factor", "context"),
                               require_string(item, "characteristic", "context"),
                               optional_string(item, "value", "context")});
    return out;
}

json model_to_json(const ProcessModel& model) {
    json doc = json::object();
    if (!model.id.empty()) doc["id"] = model.id;
    doc["name"] = model.name;
    doc["context"] = context_to_json(model.context);
    doc["products"] = named_list(model.products);
    doc["roles"] = named_list(model.roles);
    doc["tools"] = named_list(model.tools);

    json processes = json::array();
    for (const auto& [id, p] : model.processes) {
        json accesses = json::array();
        for (const auto& a : p.product_accesses)
            accesses.push_back({{"product", a.product}, {"mode", std::string(to_string(a.mode))}});
        processes.push_back({{"id", p.id},
                             {"name", p.name},
                             {"description", p.description},
                             {"subprocesses", p.sub_processes},
                             {"accesses", accesses},
                             {"roles", p.role_ids},
                             {"tools", p.tool_ids}});
    }
    doc["processes"] = processes;
    doc["roots"] = model.root_processes;
    return doc;
}

ModelDocument model_from_json(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::schema_error, "model document must be an object");
    ModelDocument out;
    auto& model = out.model;
    model.id = optional_string(doc, "id", "model");
    model.name = require_string(doc, "name", "model");
    if (doc.contains("context")) model.context = context_from_json(doc.at("context"));

    read_named(doc, "products", "product", model.products, out.violations);
    read_named(doc, "roles", "role", model.roles, out.violations);
    read_named(doc, "tools", "tool", model.tools, out.violations);

    std::vector<Id> order;
    for (const auto& item : list_field(doc, "processes")) {
        if (!item.is_object()) throw Error(ErrorCode::schema_error, "process entries must be objects");
        ProcessEntity p;
        p.id = require_string(item, "id", "process");
        const std::string where = "process '" + p.id + "'";
        p.name = require_string(item, "name", where);
        p.description = optional_string(item, "description", where);
        p.sub_processes = id_list(item, "subprocesses", where);
        p.role_ids = id_list(item, "roles", where);
        p.tool_ids = id_list(item, "tools", where);
        if (item.contains("accesses")) {
            const auto& accesses = item.at("accesses");
            if (!accesses.is_array())
                throw Error(ErrorCode::schema_error, where + ": 'accesses' must be a list", p.id);
            for (const auto& a : accesses)
                p.product_accesses.push_back(
                    {require_string(a, "product", where), access_mode_from_string(require_string(a, "mode", where))});
        }
        if (!model.processes.emplace(p.id, p).second) {
            out.violations.push_back({p.id, "duplicate-id", "process id '" + p.id + "' declared twice"});
            continue;
        }
        order.push_back(p.id);
    }

    if (doc.contains("roots") && !doc.at("roots").is_null()) {
        model.root_processes = id_list(doc, "roots", "model");
    } else {
        std::set<Id> has_parent;
        for (const auto& [_, p] : model.processes)
            for (const auto& c : p.sub_processes) has_parent.insert(c);
        for (const auto& id : order)
            if (!has_parent.contains(id)) model.root_processes.push_back(id);
    }
    return out;
}

} // namespace procmatch::io
