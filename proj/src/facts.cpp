#include "procmatch/facts.hpp"

#include <cstdint>
#include <cstdio>

namespace procmatch {

std::string_view to_string(Verdict verdict) { return verdict == Verdict::equal ? "equal" : "different"; }
std::string_view to_string(EntityKind kind) { return kind == EntityKind::process ? "process" : "product"; }

Verdict verdict_from_string(std::string_view text) {
    if (text == "equal" || text == "=") return Verdict::equal;
    if (text == "different" || text == "!=" || text == "\xE2\x89\xA0") return Verdict::different;
    throw Error(ErrorCode::schema_error, "unknown verdict '" + std::string(text) + "'", std::string(text));
}

EntityKind entity_kind_from_string(std::string_view text) {
    if (text == "process") return EntityKind::process;
    if (text == "product") return EntityKind::product;
    throw Error(ErrorCode::schema_error, "unknown entity kind '" + std::string(text) + "'", std::string(text));
}

bool FactSet::insert(Fact fact) {
    Key key{fact.left, fact.right};
    return facts_.emplace(std::move(key), std::move(fact)).second;
}

std::optional<Fact> FactSet::erase(const Id& fact_id) {
    for (auto it = facts_.begin(); it != facts_.end(); ++it) {
        if (it->second.id == fact_id) {
            Fact out = std::move(it->second);
            facts_.erase(it);
            return out;
        }
    }
    return std::nullopt;
}

std::optional<Verdict> FactSet::verdict(const Id& left, const Id& right) const {
    if (const Fact* f = find_pair(left, right)) return f->verdict;
    return std::nullopt;
}

const Fact* FactSet::find_pair(const Id& left, const Id& right) const {
    auto it = facts_.find({left, right});
    return it == facts_.end() ? nullptr : &it->second;
}

const Fact* FactSet::find(const Id& fact_id) const {
    for (const auto& [_, f] : facts_)
        if (f.id == fact_id) return &f;
    return nullptr;
}

std::vector<Fact> FactSet::facts() const {
    std::vector<Fact> out;
    out.reserve(facts_.size());
    for (const auto& [_, f] : facts_) out.push_back(f);
    return out;
}

std::string FactSet::digest() const {
    // FNV-1a, 64 bit. Fields are separated by a byte that cannot occur in UTF-8.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xFF;
        h *= 0x100000001b3ULL;
    };
    for (const auto& [key, f] : facts_) {
        feed(f.left);
        feed(f.right);
        feed(to_string(f.kind));
        feed(to_string(f.verdict));
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace procmatch
