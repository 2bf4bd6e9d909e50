#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "procmatch/error.hpp"

namespace procmatch {

using Id = std::string;

enum class AccessMode { produce, consume, modify };

std::string_view to_string(AccessMode mode);
AccessMode access_mode_from_string(std::string_view text);

struct ProductAccess {
    Id product;
    AccessMode mode = AccessMode::consume;

    bool operator==(const ProductAccess&) const = default;
};

struct ProcessEntity {
    Id id;
    std::string name;
    std::string description;
    std::vector<Id> sub_processes;
    std::vector<ProductAccess> product_accesses;
    std::vector<Id> role_ids;
    std::vector<Id> tool_ids;

    bool operator==(const ProcessEntity&) const = default;
};

struct ProductEntity {
    Id id;
    std::string name;
    std::string description;

    bool operator==(const ProductEntity&) const = default;
};

// Roles and tools are carried for display only.
struct NamedEntity {
    Id id;
    std::string name;
    std::string description;

    bool operator==(const NamedEntity&) const = default;
};

struct CharacterizationEntry {
    std::string customization_factor;
    std::string characteristic;
    std::string value;

    bool operator==(const CharacterizationEntry&) const = default;
};

/// Context in which a model was elicited: (factor, characteristic) -> value.
struct CharacterizationVector {
    std::vector<CharacterizationEntry> entries;

    const CharacterizationEntry* find(std::string_view factor, std::string_view characteristic) const;

    bool operator==(const CharacterizationVector&) const = default;
};

/// A descriptive process model. Treated as immutable once built: sessions
/// share it through `std::shared_ptr<const ProcessModel>`.
struct ProcessModel {
    Id id;
    std::string name;
    CharacterizationVector context;
    std::map<Id, ProcessEntity> processes;
    std::map<Id, ProductEntity> products;
    std::map<Id, NamedEntity> roles;
    std::map<Id, NamedEntity> tools;
    std::vector<Id> root_processes;

    const ProcessEntity& process(const Id& id) const;
    const ProductEntity& product(const Id& id) const;
    bool has_process(const Id& id) const { return processes.contains(id); }
    bool has_product(const Id& id) const { return products.contains(id); }

    bool operator==(const ProcessModel&) const = default;
};

struct Violation {
    Id entity;
    std::string rule; // e.g. "dangling-reference", "multiple-parents", "cycle"
    std::string message;

    bool operator==(const Violation&) const = default;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, std::size_t line, std::size_t column)
        : Error(ErrorCode::syntax_error,
                "syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                    ": " + message,
                std::to_string(line) + ":" + std::to_string(column)),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Result of reading a model document without enforcing the structural
/// invariants. Duplicate ids cannot be represented in the keyed collections,
/// so they are reported here alongside the model.
struct ModelDocument {
    ProcessModel model;
    std::vector<Violation> violations;
};

/// Reads the JSON model document. Throws SyntaxError on malformed JSON and
/// Error{schema_error} on structurally wrong fields. Invariant violations are
/// collected, not thrown.
ModelDocument read_model_document(std::string_view text);

/// Parses and enforces every invariant; the first violation is thrown with
/// the matching error code and the offending entity as subject.
ProcessModel parse_model(std::string_view text);

std::vector<Violation> validate_model(const ProcessModel& model);

/// Throws Error{invalid_model or a more specific code} when validation fails.
void require_valid(const ProcessModel& model);

/// Deterministic document: entities sorted by id, keys sorted.
std::string serialize_model(const ProcessModel& model);

std::set<Id> descendants(const ProcessModel& model, const Id& process_id, int max_depth);

std::set<Id> accessed_products(const ProcessModel& model, const Id& process_id);

/// Lowercase, trim, collapse whitespace runs to one space.
std::string normalize_name(std::string_view name);

} // namespace procmatch
