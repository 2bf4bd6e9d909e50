#include "procmatch/reference.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "procmatch/json_io.hpp"

namespace procmatch {

std::string_view to_string(Side side) { return side == Side::left ? "left" : "right"; }

Side side_from_string(std::string_view text) {
    if (text == "left") return Side::left;
    if (text == "right") return Side::right;
    throw Error(ErrorCode::schema_error, "side must be 'left' or 'right'", std::string(text));
}

std::string to_string(const ProcessRef& ref) { return std::string(to_string(ref.side)) + ":" + ref.id; }

std::string_view to_string(OptionalReason reason) {
    return reason == OptionalReason::no_counterpart ? "no-counterpart" : "skipped-but-important";
}

OptionalReason optional_reason_from_string(std::string_view text) {
    if (text == "no-counterpart") return OptionalReason::no_counterpart;
    if (text == "skipped-but-important") return OptionalReason::skipped_but_important;
    throw Error(ErrorCode::schema_error, "unknown optional reason '" + std::string(text) + "'", std::string(text));
}

std::string_view to_string(BoxKind kind) { return kind == BoxKind::OPT ? "OPT" : "ALT"; }

namespace {

const ProcessModel& model_of(const Session& s, Side side) { return side == Side::left ? s.left() : s.right(); }

bool exists(const Session& s, const ProcessRef& ref) { return model_of(s, ref.side).has_process(ref.id); }

bool has_equal_fact(const Session& s, const Id& left, const Id& right) {
    auto v = s.facts().verdict(left, right);
    return v && *v == Verdict::equal;
}

bool has_different_fact(const Session& s, const Id& left, const Id& right) {
    auto v = s.facts().verdict(left, right);
    return v && *v == Verdict::different;
}

/// Different facts against every process of the other model, and no equal fact.
bool exhausted(const Session& s, const ProcessRef& ref) {
    const auto& others = model_of(s, ref.side == Side::left ? Side::right : Side::left).processes;
    if (others.empty()) return false;
    for (const auto& [other, _] : others) {
        const Id& l = ref.side == Side::left ? ref.id : other;
        const Id& r = ref.side == Side::left ? other : ref.id;
        if (!has_different_fact(s, l, r)) return false;
    }
    return true;
}

[[noreturn]] void plan_error(const std::string& message, const std::string& subject = {}) {
    throw Error(ErrorCode::plan_invalid, message, subject);
}

std::vector<ProcessRef> entries_of(const MergePlan& plan) {
    std::vector<ProcessRef> out;
    for (const auto& g : plan.common_groups) {
        out.push_back({Side::left, g.left});
        out.push_back({Side::right, g.right});
    }
    for (const auto& c : plan.optional_candidates) out.push_back(c.process);
    for (const auto& g : plan.alternative_groups) {
        for (const auto& id : g.left_members) out.push_back({Side::left, id});
        for (const auto& id : g.right_members) out.push_back({Side::right, id});
    }
    for (const auto& e : plan.exclusions) out.push_back(e);
    return out;
}

void normalize_order(MergePlan& plan) {
    std::sort(plan.common_groups.begin(), plan.common_groups.end(),
              [](const CommonGroup& a, const CommonGroup& b) {
                  return std::tie(a.left, a.right) < std::tie(b.left, b.right);
              });
    std::sort(plan.optional_candidates.begin(), plan.optional_candidates.end(),
              [](const OptionalCandidate& a, const OptionalCandidate& b) { return a.process < b.process; });
    for (auto& g : plan.alternative_groups) {
        std::sort(g.left_members.begin(), g.left_members.end());
        std::sort(g.right_members.begin(), g.right_members.end());
    }
    std::sort(plan.exclusions.begin(), plan.exclusions.end());
}

} // namespace

void check_plan(const Session& session, const MergePlan& plan) {
    std::map<Id, int> left_uses, right_uses;
    for (const auto& g : plan.common_groups) {
        if (++left_uses[g.left] > 1)
            throw Error(ErrorCode::conflicting_merge, "left process '" + g.left + "' is merged twice", g.left);
        if (++right_uses[g.right] > 1)
            throw Error(ErrorCode::conflicting_merge,
                        "right process '" + g.right + "' is merged with two left processes", g.right);
    }
    for (const auto& g : plan.common_groups) {
        if (!session.left().has_process(g.left)) plan_error("unknown left process '" + g.left + "'", g.left);
        if (!session.right().has_process(g.right)) plan_error("unknown right process '" + g.right + "'", g.right);
        if (!has_equal_fact(session, g.left, g.right))
            plan_error("common group (" + g.left + ", " + g.right + ") has no equal fact", g.left + "/" + g.right);
    }

    std::set<Id> group_ids;
    for (const auto& g : plan.alternative_groups) {
        if (g.id.empty()) plan_error("alternative group without id");
        if (!group_ids.insert(g.id).second) plan_error("alternative group '" + g.id + "' declared twice", g.id);
        if (g.purpose.empty()) plan_error("alternative group '" + g.id + "' needs a purpose note", g.id);
        if (g.left_members.empty() && g.right_members.empty())
            plan_error("alternative group '" + g.id + "' has no members", g.id);
        for (const auto& id : g.left_members)
            if (!session.left().has_process(id)) plan_error("unknown left process '" + id + "'", id);
        for (const auto& id : g.right_members)
            if (!session.right().has_process(id)) plan_error("unknown right process '" + id + "'", id);
    }

    for (const auto& c : plan.optional_candidates) {
        if (!exists(session, c.process)) plan_error("unknown process '" + to_string(c.process) + "'", c.process.id);
        if (!c.within_alternative) continue;
        auto it = std::find_if(plan.alternative_groups.begin(), plan.alternative_groups.end(),
                               [&](const AlternativeGroup& g) { return g.id == *c.within_alternative; });
        if (it == plan.alternative_groups.end())
            plan_error("optional '" + to_string(c.process) + "' nests into unknown group '" + *c.within_alternative +
                           "'",
                       c.process.id);
        const auto& side_members = c.process.side == Side::left ? it->left_members : it->right_members;
        if (side_members.empty())
            plan_error("group '" + it->id + "' has no " + std::string(to_string(c.process.side)) +
                           " alternative to nest '" + c.process.id + "' into",
                       c.process.id);
    }
    for (const auto& e : plan.exclusions)
        if (!exists(session, e)) plan_error("unknown process '" + to_string(e) + "'", e.id);

    std::set<ProcessRef> seen;
    for (const auto& ref : entries_of(plan))
        if (!seen.insert(ref).second)
            plan_error("process '" + to_string(ref) + "' appears in more than one plan entry", ref.id);
}

std::vector<ProcessRef> unaccounted(const Session& session, const MergePlan& plan) {
    std::set<ProcessRef> placed;
    for (const auto& ref : entries_of(plan)) placed.insert(ref);
    std::vector<ProcessRef> out;
    for (Side side : {Side::left, Side::right})
        for (const auto& [id, _] : model_of(session, side).processes)
            if (!placed.contains({side, id})) out.push_back({side, id});
    return out;
}

// ---------------------------------------------------------------------------
// Proposal

MergePlan propose_plan(const Session& session, std::span<const Annotation> annotations) {
    if (session.iterations().empty())
        throw Error(ErrorCode::no_iteration, "propose a merge plan after at least one recomputation");

    std::map<ProcessRef, const Annotation*> by_process;
    for (const auto& a : annotations) {
        if (!exists(session, a.process))
            throw Error(ErrorCode::annotation_invalid, "annotation names unknown process '" + to_string(a.process) + "'",
                        a.process.id);
        if (!by_process.emplace(a.process, &a).second)
            throw Error(ErrorCode::annotation_invalid, "process '" + to_string(a.process) + "' is annotated twice",
                        a.process.id);
    }

    MergePlan plan;
    std::set<ProcessRef> placed;
    for (const auto& [key, f] : session.facts()) {
        if (f.kind != EntityKind::process || f.verdict != Verdict::equal) continue;
        if (placed.contains({Side::left, f.left}) || placed.contains({Side::right, f.right}))
            throw Error(ErrorCode::conflicting_merge,
                        "equal facts do not pair processes one-to-one around (" + f.left + ", " + f.right + ")",
                        f.left + "/" + f.right);
        plan.common_groups.push_back({f.left, f.right, session.left().process(f.left).name});
        placed.insert({Side::left, f.left});
        placed.insert({Side::right, f.right});
    }

    std::map<std::string, std::pair<std::vector<Id>, std::vector<Id>>> by_purpose;
    for (const auto& [ref, a] : by_process) {
        if (a->purpose.empty() || placed.contains(ref)) continue;
        auto& [lefts, rights] = by_purpose[a->purpose];
        (ref.side == Side::left ? lefts : rights).push_back(ref.id);
    }
    for (const auto& [purpose, sides] : by_purpose) {
        const auto& [lefts, rights] = sides;
        AlternativeGroup group;
        group.purpose = purpose;
        for (const auto& l : lefts)
            if (std::any_of(rights.begin(), rights.end(), [&](const Id& r) { return has_different_fact(session, l, r); }))
                group.left_members.push_back(l);
        for (const auto& r : rights)
            if (std::any_of(lefts.begin(), lefts.end(), [&](const Id& l) { return has_different_fact(session, l, r); }))
                group.right_members.push_back(r);
        if (group.left_members.empty() || group.right_members.empty()) continue;
        group.id = "ALT" + std::to_string(plan.alternative_groups.size() + 1);
        for (const auto& id : group.left_members) placed.insert({Side::left, id});
        for (const auto& id : group.right_members) placed.insert({Side::right, id});
        plan.alternative_groups.push_back(std::move(group));
    }

    for (Side side : {Side::left, Side::right}) {
        for (const auto& [id, _] : model_of(session, side).processes) {
            ProcessRef ref{side, id};
            if (placed.contains(ref)) continue;
            auto it = by_process.find(ref);
            if (it != by_process.end() && it->second->skipped_but_important)
                plan.optional_candidates.push_back({ref, OptionalReason::skipped_but_important, std::nullopt});
            else if (exhausted(session, ref))
                plan.optional_candidates.push_back({ref, OptionalReason::no_counterpart, std::nullopt});
        }
    }

    normalize_order(plan);
    check_plan(session, plan);
    return plan;
}

// ---------------------------------------------------------------------------
// Decisions

namespace {

void remove_from_plan(MergePlan& plan, const ProcessRef& ref) {
    std::erase_if(plan.common_groups, [&](const CommonGroup& g) {
        return (ref.side == Side::left && g.left == ref.id) || (ref.side == Side::right && g.right == ref.id);
    });
    std::erase_if(plan.optional_candidates, [&](const OptionalCandidate& c) { return c.process == ref; });
    for (auto& g : plan.alternative_groups)
        std::erase(ref.side == Side::left ? g.left_members : g.right_members, ref.id);
    std::erase(plan.exclusions, ref);

    // Groups left without members disappear; boxes nested into them move up.
    std::set<Id> emptied;
    for (const auto& g : plan.alternative_groups)
        if (g.left_members.empty() && g.right_members.empty()) emptied.insert(g.id);
    std::erase_if(plan.alternative_groups, [&](const AlternativeGroup& g) { return emptied.contains(g.id); });
    for (auto& c : plan.optional_candidates)
        if (c.within_alternative && emptied.contains(*c.within_alternative)) c.within_alternative.reset();
}

} // namespace

MergePlan decide(const Session& session, MergePlan plan, const Decision& decision) {
    if (std::holds_alternative<Accept>(decision)) {
        check_plan(session, plan);
        plan.final = true;
        return plan;
    }

    const auto& [ref, to] = std::get<Reassign>(decision);
    if (!exists(session, ref)) plan_error("unknown process '" + to_string(ref) + "'", ref.id);
    remove_from_plan(plan, ref);

    std::visit(
        [&](const auto& target) {
            using T = std::decay_t<decltype(target)>;
            if constexpr (std::is_same_v<T, ToCommon>) {
                const Side other = ref.side == Side::left ? Side::right : Side::left;
                if (!model_of(session, other).has_process(target.counterpart))
                    plan_error("unknown counterpart '" + target.counterpart + "'", target.counterpart);
                const Id& l = ref.side == Side::left ? ref.id : target.counterpart;
                const Id& r = ref.side == Side::left ? target.counterpart : ref.id;
                if (!has_equal_fact(session, l, r))
                    plan_error("a common group needs an equal fact on (" + l + ", " + r + ")", l + "/" + r);
                remove_from_plan(plan, {other, target.counterpart});
                plan.common_groups.push_back(
                    {l, r, target.merged_name.empty() ? session.left().process(l).name : target.merged_name});
            } else if constexpr (std::is_same_v<T, ToOptional>) {
                plan.optional_candidates.push_back({ref, target.reason, target.within_alternative});
            } else if constexpr (std::is_same_v<T, ToAlternative>) {
                auto it = std::find_if(plan.alternative_groups.begin(), plan.alternative_groups.end(),
                                       [&](const AlternativeGroup& g) { return g.id == target.group; });
                if (it == plan.alternative_groups.end()) {
                    if (target.purpose.empty())
                        plan_error("a new alternative group needs a purpose note", target.group);
                    AlternativeGroup g;
                    g.id = target.group.empty() ? "ALT" + std::to_string(plan.alternative_groups.size() + 1)
                                                : target.group;
                    g.purpose = target.purpose;
                    plan.alternative_groups.push_back(std::move(g));
                    it = std::prev(plan.alternative_groups.end());
                }
                (ref.side == Side::left ? it->left_members : it->right_members).push_back(ref.id);
            } else {
                plan.exclusions.push_back(ref);
            }
        },
        to);

    plan.final = false;
    normalize_order(plan);
    check_plan(session, plan);
    return plan;
}

// ---------------------------------------------------------------------------
// Building

std::vector<VariationReason> variation_reasons(const CharacterizationVector& left,
                                               const CharacterizationVector& right) {
    std::vector<VariationReason> out;
    for (const auto& e : left.entries) {
        const auto* other = right.find(e.customization_factor, e.characteristic);
        if (!other || other->value != e.value)
            out.push_back({e.customization_factor, e.characteristic, e.value, other ? other->value : "", ""});
    }
    for (const auto& e : right.entries)
        if (!left.find(e.customization_factor, e.characteristic))
            out.push_back({e.customization_factor, e.characteristic, "", e.value, ""});
    return out;
}

namespace {

struct Builder {
    const Session& session;
    const MergePlan& plan;
    ReferenceProcessModel ref;

    std::map<Id, Id> left_to_ref;   // process ids
    std::map<Id, Id> right_to_ref;
    std::map<Id, Id> left_product;  // product ids
    std::map<Id, Id> right_product;
    std::map<Id, Id> parent_of;     // in the reference base
    std::vector<VariationReason> reasons;

    static Id ref_id(Side side, const Id& id) { return std::string(to_string(side)) + ":" + id; }

    const std::map<Id, Id>& process_map(Side side) const { return side == Side::left ? left_to_ref : right_to_ref; }

    void map_processes() {
        for (const auto& g : plan.common_groups) {
            left_to_ref[g.left] = ref_id(Side::left, g.left);
            right_to_ref[g.right] = ref_id(Side::left, g.left);
        }
        auto add = [&](const ProcessRef& r) {
            (r.side == Side::left ? left_to_ref : right_to_ref)[r.id] = ref_id(r.side, r.id);
        };
        for (const auto& c : plan.optional_candidates) add(c.process);
        for (const auto& g : plan.alternative_groups) {
            for (const auto& id : g.left_members) add({Side::left, id});
            for (const auto& id : g.right_members) add({Side::right, id});
        }
    }

    void map_products() {
        for (const auto& [id, _] : session.left().products) left_product[id] = ref_id(Side::left, id);
        for (const auto& [id, _] : session.right().products) {
            right_product[id] = ref_id(Side::right, id);
            for (const auto& [lid, _l] : session.left().products)
                if (has_equal_fact(session, lid, id)) {
                    right_product[id] = ref_id(Side::left, lid);
                    break;
                }
        }
    }

    void copy_entities() {
        auto& base = ref.base;
        for (const auto& [id, p] : session.left().products)
            base.products.emplace(left_product[id], ProductEntity{left_product[id], p.name, p.description});
        for (const auto& [id, p] : session.right().products)
            base.products.try_emplace(right_product[id], ProductEntity{right_product[id], p.name, p.description});
        for (Side side : {Side::left, Side::right}) {
            const auto& m = model_of(session, side);
            for (const auto& [id, r] : m.roles) base.roles.emplace(ref_id(side, id), NamedEntity{ref_id(side, id), r.name, r.description});
            for (const auto& [id, t] : m.tools) base.tools.emplace(ref_id(side, id), NamedEntity{ref_id(side, id), t.name, t.description});
        }
    }

    bool is_ancestor(const Id& candidate, Id node) const {
        for (;;) {
            if (node == candidate) return true;
            auto it = parent_of.find(node);
            if (it == parent_of.end()) return false;
            node = it->second;
        }
    }

    void add_process(Side side, const ProcessEntity& source) {
        const auto& map = process_map(side);
        const Id& rid = map.at(source.id);
        auto [it, inserted] = ref.base.processes.try_emplace(rid);
        auto& p = it->second;
        if (inserted) {
            p.id = rid;
            p.name = source.name;
            p.description = source.description;
        }
        const auto& products = side == Side::left ? left_product : right_product;
        for (const auto& a : source.product_accesses) {
            ProductAccess mapped{products.at(a.product), a.mode};
            if (std::find(p.product_accesses.begin(), p.product_accesses.end(), mapped) == p.product_accesses.end())
                p.product_accesses.push_back(mapped);
        }
        for (const auto& r : source.role_ids) {
            Id mapped = ref_id(side, r);
            if (std::find(p.role_ids.begin(), p.role_ids.end(), mapped) == p.role_ids.end()) p.role_ids.push_back(mapped);
        }
        for (const auto& t : source.tool_ids) {
            Id mapped = ref_id(side, t);
            if (std::find(p.tool_ids.begin(), p.tool_ids.end(), mapped) == p.tool_ids.end()) p.tool_ids.push_back(mapped);
        }
    }

    void link_children(Side side, const ProcessEntity& source) {
        const auto& map = process_map(side);
        const Id& rid = map.at(source.id);
        for (const auto& child : source.sub_processes) {
            auto cit = map.find(child);
            if (cit == map.end()) continue; // excluded
            const Id& rc = cit->second;
            // First claim wins; an edge that would close a cycle is dropped.
            if (parent_of.contains(rc) || is_ancestor(rc, rid)) continue;
            parent_of[rc] = rid;
            ref.base.processes.at(rid).sub_processes.push_back(rc);
        }
    }

    void build_hierarchy() {
        for (Side side : {Side::left, Side::right})
            for (const auto& [id, p] : model_of(session, side).processes)
                if (process_map(side).contains(id)) add_process(side, p);
        for (Side side : {Side::left, Side::right})
            for (const auto& [id, p] : model_of(session, side).processes)
                if (process_map(side).contains(id)) link_children(side, p);

        std::set<Id> rooted;
        auto push_root = [&](const Id& rid) {
            if (!parent_of.contains(rid) && rooted.insert(rid).second) ref.base.root_processes.push_back(rid);
        };
        for (Side side : {Side::left, Side::right})
            for (const auto& root : model_of(session, side).root_processes) {
                auto it = process_map(side).find(root);
                if (it != process_map(side).end()) push_root(it->second);
            }
        for (const auto& [rid, _] : ref.base.processes) push_root(rid);
    }

    void build_provenance() {
        const Id& lm = session.left().id;
        const Id& rm = session.right().id;
        std::map<std::pair<int, Id>, ProvenanceEntry> entries;
        auto entry = [&](EntityKind kind, const Id& rid) -> ProvenanceEntry& {
            auto& e = entries[{static_cast<int>(kind), rid}];
            e.entity = rid;
            e.kind = kind;
            return e;
        };
        for (const auto& [id, rid] : left_to_ref) entry(EntityKind::process, rid).sources.push_back({Side::left, lm, id});
        for (const auto& [id, rid] : right_to_ref) {
            auto& e = entry(EntityKind::process, rid);
            e.sources.push_back({Side::right, rm, id});
            if (e.sources.size() > 1) e.aliases.push_back(session.right().process(id).name);
        }
        for (const auto& [id, rid] : left_product) entry(EntityKind::product, rid).sources.push_back({Side::left, lm, id});
        for (const auto& [id, rid] : right_product) {
            auto& e = entry(EntityKind::product, rid);
            e.sources.push_back({Side::right, rm, id});
            if (e.sources.size() > 1) e.aliases.push_back(session.right().product(id).name);
        }
        for (auto& [_, e] : entries) ref.provenance.push_back(std::move(e));
    }

    // A renamed common group keeps the left source name as a further alias.
    void apply_merged_names() {
        for (const auto& g : plan.common_groups) {
            if (g.merged_name.empty()) continue;
            auto& p = ref.base.processes.at(ref_id(Side::left, g.left));
            if (p.name == g.merged_name) continue;
            for (auto& e : ref.provenance)
                if (e.kind == EntityKind::process && e.entity == p.id) e.aliases.insert(e.aliases.begin(), p.name);
            p.name = g.merged_name;
        }
    }

    VariationBox box(BoxKind kind, Id id) const {
        VariationBox b;
        b.kind = kind;
        b.id = std::move(id);
        b.reasons = reasons;
        return b;
    }

    // Optional candidates grouped by (side, reason, source parent), in plan order.
    std::vector<VariationBox> optional_boxes(const std::vector<const OptionalCandidate*>& candidates, int& counter) {
        std::vector<VariationBox> out;
        std::map<std::tuple<Side, OptionalReason, Id>, std::size_t> slot;
        for (const auto* c : candidates) {
            const auto& m = model_of(session, c->process.side);
            Id parent;
            for (const auto& [pid, p] : m.processes)
                if (std::find(p.sub_processes.begin(), p.sub_processes.end(), c->process.id) != p.sub_processes.end())
                    parent = pid;
            auto key = std::make_tuple(c->process.side, c->reason, parent);
            auto it = slot.find(key);
            if (it == slot.end()) {
                it = slot.emplace(key, out.size()).first;
                out.push_back(box(BoxKind::OPT, "OPT" + std::to_string(++counter)));
            }
            out[it->second].members.push_back(process_map(c->process.side).at(c->process.id));
        }
        return out;
    }

    void build_boxes() {
        int opt_counter = 0;
        std::vector<const OptionalCandidate*> top;
        for (const auto& c : plan.optional_candidates)
            if (!c.within_alternative) top.push_back(&c);
        for (auto& b : optional_boxes(top, opt_counter)) ref.boxes.push_back(std::move(b));

        for (const auto& g : plan.alternative_groups) {
            for (Side side : {Side::left, Side::right}) {
                const auto& members = side == Side::left ? g.left_members : g.right_members;
                std::vector<const OptionalCandidate*> nested;
                for (const auto& c : plan.optional_candidates)
                    if (c.within_alternative == g.id && c.process.side == side) nested.push_back(&c);
                if (members.empty() && nested.empty()) continue;
                VariationBox b = box(BoxKind::ALT, g.id + (side == Side::left ? "a" : "b"));
                b.group = g.id;
                b.purpose = g.purpose;
                for (const auto& id : members) b.members.push_back(process_map(side).at(id));
                b.nested = optional_boxes(nested, opt_counter);
                ref.boxes.push_back(std::move(b));
            }
        }
    }

    ReferenceProcessModel run() {
        ref.base.id = "reference";
        ref.base.name = "Reference: " + session.left().name + " + " + session.right().name;
        ref.left_context = session.left().context;
        ref.right_context = session.right().context;
        reasons = variation_reasons(ref.left_context, ref.right_context);
        map_processes();
        map_products();
        copy_entities();
        build_hierarchy();
        build_provenance();
        apply_merged_names();
        build_boxes();
        for (const auto& e : plan.exclusions)
            ref.exclusions.push_back({e.side, e.side == Side::left ? session.left().id : session.right().id, e.id});
        return std::move(ref);
    }
};

} // namespace

ReferenceProcessModel build_reference_model(const Session& session, const MergePlan& plan) {
    if (!plan.final) throw Error(ErrorCode::plan_not_final, "accept the merge plan before building");
    check_plan(session, plan);
    auto missing = unaccounted(session, plan);
    if (!missing.empty()) {
        std::string list;
        for (const auto& r : missing) list += (list.empty() ? "" : ", ") + to_string(r);
        throw Error(ErrorCode::unaccounted_process,
                    std::to_string(missing.size()) + " process(es) not accounted for: " + list, list);
    }
    Builder builder{session, plan, {}, {}, {}, {}, {}, {}, {}};
    auto ref = builder.run();
    if (auto problems = validate_reference_model(ref); !problems.empty())
        throw Error(ErrorCode::reference_invalid, problems.front());
    return ref;
}

// ---------------------------------------------------------------------------
// Accounting and validation

namespace {

void collect_members(const std::vector<VariationBox>& boxes, std::vector<Id>& out) {
    for (const auto& b : boxes) {
        out.insert(out.end(), b.members.begin(), b.members.end());
        collect_members(b.nested, out);
    }
}

} // namespace

Accounting account(const ReferenceProcessModel& ref, const ProcessModel& left, const ProcessModel& right) {
    Accounting a;
    a.left_processes = left.processes.size();
    a.right_processes = right.processes.size();
    for (const auto& e : ref.provenance)
        if (e.kind == EntityKind::process && e.sources.size() == 2) ++a.common_pairs;
    std::vector<Id> members;
    collect_members(ref.boxes, members);
    a.box_members = members.size();
    a.exclusions = ref.exclusions.size();
    return a;
}

std::vector<std::string> accounting_problems(const ReferenceProcessModel& ref, const ProcessModel& left,
                                             const ProcessModel& right) {
    std::vector<std::string> out;
    std::map<ProcessRef, int> seen;
    std::map<Id, const ProvenanceEntry*> provenance;
    for (const auto& e : ref.provenance) {
        if (e.kind != EntityKind::process) continue;
        provenance[e.entity] = &e;
        for (const auto& s : e.sources) ++seen[{s.side, s.entity}];
    }
    for (const auto& x : ref.exclusions) ++seen[{x.side, x.entity}];

    for (Side side : {Side::left, Side::right}) {
        const auto& m = side == Side::left ? left : right;
        for (const auto& [id, _] : m.processes) {
            int n = seen[{side, id}];
            if (n != 1)
                out.push_back("source process " + to_string(ProcessRef{side, id}) + " accounted " + std::to_string(n) +
                              " times");
        }
    }
    for (const auto& [r, n] : seen)
        if (!(r.side == Side::left ? left : right).has_process(r.id))
            out.push_back("provenance names unknown source process " + to_string(r));

    std::vector<Id> members;
    collect_members(ref.boxes, members);
    std::set<Id> member_set(members.begin(), members.end());
    for (const auto& [rid, e] : provenance) {
        const bool merged = e->sources.size() == 2;
        if (merged && member_set.contains(rid)) out.push_back("merged process " + rid + " also sits in a box");
        if (!merged && !member_set.contains(rid)) out.push_back("unmerged process " + rid + " is in no box");
    }
    if (!account(ref, left, right).balanced()) out.push_back("process totals do not balance");
    return out;
}

std::vector<std::string> validate_reference_model(const ReferenceProcessModel& ref) {
    std::vector<std::string> out;
    for (const auto& v : validate_model(ref.base)) out.push_back("base model: " + v.rule + ": " + v.message);

    std::set<Id> box_ids;
    std::function<void(const std::vector<VariationBox>&, bool)> walk = [&](const std::vector<VariationBox>& boxes,
                                                                           bool nested) {
        std::set<Id> sibling_members;
        for (const auto& b : boxes) {
            if (!box_ids.insert(b.id).second) out.push_back("box id " + b.id + " used twice");
            if (b.members.empty() && b.nested.empty()) out.push_back("box " + b.id + " is empty");
            if (nested && b.kind != BoxKind::OPT) out.push_back("box " + b.id + ": only OPT boxes nest");
            std::vector<Id> all(b.members);
            collect_members(b.nested, all);
            for (const auto& m : all) {
                if (!ref.base.has_process(m)) out.push_back("box " + b.id + " names unknown process " + m);
                if (!sibling_members.insert(m).second) out.push_back("process " + m + " sits in two sibling boxes");
            }
            walk(b.nested, true);
        }
    };
    walk(ref.boxes, false);

    std::set<std::pair<int, Id>> covered;
    for (const auto& e : ref.provenance) {
        covered.insert({static_cast<int>(e.kind), e.entity});
        if (e.sources.empty()) out.push_back("provenance of " + e.entity + " lists no source");
    }
    for (const auto& [id, _] : ref.base.processes)
        if (!covered.contains({static_cast<int>(EntityKind::process), id}))
            out.push_back("process " + id + " has no provenance");
    for (const auto& [id, _] : ref.base.products)
        if (!covered.contains({static_cast<int>(EntityKind::product), id}))
            out.push_back("product " + id + " has no provenance");
    return out;
}

// ---------------------------------------------------------------------------
// Reference document

namespace {

using io::json;

json reasons_to_json(const std::vector<VariationReason>& reasons) {
    json arr = json::array();
    for (const auto& r : reasons)
        arr.push_back({{"factor", r.factor},
                       {"characteristic", r.characteristic},
                       {"left", r.left_value},
                       {"right", r.right_value},
                       {"note", r.note}});
    return arr;
}

json box_to_json(const VariationBox& b) {
    json nested = json::array();
    for (const auto& n : b.nested) nested.push_back(box_to_json(n));
    json doc = {{"id", b.id},
                {"kind", std::string(to_string(b.kind))},
                {"members", b.members},
                {"boxes", nested},
                {"reasons", reasons_to_json(b.reasons)}};
    if (b.kind == BoxKind::ALT) {
        doc["group"] = b.group;
        doc["purpose"] = b.purpose;
    }
    return doc;
}

VariationBox box_from_json(const json& doc) {
    VariationBox b;
    b.id = io::require_string(doc, "id", "box");
    const std::string where = "box '" + b.id + "'";
    auto kind = io::require_string(doc, "kind", where);
    if (kind == "OPT")
        b.kind = BoxKind::OPT;
    else if (kind == "ALT")
        b.kind = BoxKind::ALT;
    else
        throw Error(ErrorCode::schema_error, where + ": kind must be OPT or ALT", b.id);
    for (const auto& m : io::require(doc, "members", where)) b.members.push_back(m.get<std::string>());
    if (doc.contains("boxes"))
        for (const auto& n : doc.at("boxes")) b.nested.push_back(box_from_json(n));
    if (doc.contains("reasons"))
        for (const auto& r : doc.at("reasons"))
            b.reasons.push_back({io::require_string(r, "factor", where), io::optional_string(r, "characteristic", where),
                                 io::optional_string(r, "left", where), io::optional_string(r, "right", where),
                                 io::optional_string(r, "note", where)});
    b.group = io::optional_string(doc, "group", where);
    b.purpose = io::optional_string(doc, "purpose", where);
    return b;
}

json source_to_json(const SourceRef& s) {
    return {{"side", std::string(to_string(s.side))}, {"model", s.model}, {"id", s.entity}};
}

SourceRef source_from_json(const json& doc) {
    return {side_from_string(io::require_string(doc, "side", "source")), io::optional_string(doc, "model", "source"),
            io::require_string(doc, "id", "source")};
}

} // namespace

std::string serialize_reference_model(const ReferenceProcessModel& ref) {
    if (auto problems = validate_reference_model(ref); !problems.empty())
        throw Error(ErrorCode::reference_invalid, problems.front());
    json doc = io::model_to_json(ref.base);
    json boxes = json::array();
    for (const auto& b : ref.boxes) boxes.push_back(box_to_json(b));
    doc["boxes"] = boxes;
    json provenance = json::array();
    for (const auto& e : ref.provenance) {
        json sources = json::array();
        for (const auto& s : e.sources) sources.push_back(source_to_json(s));
        provenance.push_back(
            {{"entity", e.entity}, {"kind", std::string(to_string(e.kind))}, {"sources", sources}, {"aliases", e.aliases}});
    }
    doc["provenance"] = provenance;
    json exclusions = json::array();
    for (const auto& x : ref.exclusions) exclusions.push_back(source_to_json(x));
    doc["exclusions"] = exclusions;
    doc["context_pair"] = {{"left", io::context_to_json(ref.left_context)},
                           {"right", io::context_to_json(ref.right_context)}};
    return io::dump(doc);
}

ReferenceProcessModel parse_reference_model(std::string_view text) {
    const json doc = io::parse_json(text);
    auto base = io::model_from_json(doc);
    ReferenceProcessModel ref;
    ref.base = std::move(base.model);
    if (!base.violations.empty())
        throw Error(ErrorCode::reference_invalid, "base model: " + base.violations.front().message);
    if (doc.contains("boxes"))
        for (const auto& b : doc.at("boxes")) ref.boxes.push_back(box_from_json(b));
    if (doc.contains("provenance"))
        for (const auto& e : doc.at("provenance")) {
            ProvenanceEntry p;
            p.entity = io::require_string(e, "entity", "provenance");
            p.kind = entity_kind_from_string(io::require_string(e, "kind", "provenance"));
            for (const auto& s : io::require(e, "sources", "provenance")) p.sources.push_back(source_from_json(s));
            if (e.contains("aliases"))
                for (const auto& a : e.at("aliases")) p.aliases.push_back(a.get<std::string>());
            ref.provenance.push_back(std::move(p));
        }
    if (doc.contains("exclusions"))
        for (const auto& x : doc.at("exclusions")) ref.exclusions.push_back(source_from_json(x));
    if (doc.contains("context_pair")) {
        const auto& cp = doc.at("context_pair");
        if (cp.contains("left")) ref.left_context = io::context_from_json(cp.at("left"));
        if (cp.contains("right")) ref.right_context = io::context_from_json(cp.at("right"));
    }
    if (auto problems = validate_reference_model(ref); !problems.empty())
        throw Error(ErrorCode::reference_invalid, problems.front());
    return ref;
}

} // namespace procmatch
