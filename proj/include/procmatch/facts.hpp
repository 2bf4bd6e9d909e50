#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "procmatch/model.hpp"

namespace procmatch {

enum class Verdict { equal, different };
enum class EntityKind { process, product };

std::string_view to_string(Verdict verdict);
std::string_view to_string(EntityKind kind);
Verdict verdict_from_string(std::string_view text);
EntityKind entity_kind_from_string(std::string_view text);

/// Engineer-confirmed verdict on a (left entity, right entity) pair.
struct Fact {
    Id id;
    Id left;
    Id right;
    EntityKind kind = EntityKind::process;
    Verdict verdict = Verdict::equal;
    std::string rationale;
    std::string created_at; // ISO-8601 UTC

    bool operator==(const Fact&) const = default;
};

/// At most one fact per (left, right) pair. Left ids come from the left
/// model and right ids from the right model, so the pair is unambiguous even
/// when both models reuse the same identifiers.
class FactSet {
public:
    using Key = std::pair<Id, Id>;

    /// Returns false (and stores nothing) when the pair is already covered.
    bool insert(Fact fact);
    std::optional<Fact> erase(const Id& fact_id);

    std::optional<Verdict> verdict(const Id& left, const Id& right) const;
    const Fact* find_pair(const Id& left, const Id& right) const;
    const Fact* find(const Id& fact_id) const;
    bool contains_pair(const Id& left, const Id& right) const { return facts_.contains({left, right}); }

    std::size_t size() const noexcept { return facts_.size(); }
    bool empty() const noexcept { return facts_.empty(); }

    /// Facts ordered by (left, right).
    std::vector<Fact> facts() const;

    /// Content hash over (left, right, kind, verdict) of every fact, as 16 hex
    /// digits. Rationale and timestamps do not affect scoring and are excluded.
    std::string digest() const;

    auto begin() const { return facts_.begin(); }
    auto end() const { return facts_.end(); }

    bool operator==(const FactSet&) const = default;

private:
    std::map<Key, Fact> facts_;
};

} // namespace procmatch
