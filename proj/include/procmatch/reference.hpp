#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "procmatch/model.hpp"
#include "procmatch/session.hpp"

namespace procmatch {

enum class Side { left, right };
std::string_view to_string(Side side);
Side side_from_string(std::string_view text);

struct ProcessRef {
    Side side = Side::left;
    Id id;

    auto operator<=>(const ProcessRef&) const = default;
};

std::string to_string(const ProcessRef& ref); // "left:<id>"

enum class OptionalReason { no_counterpart, skipped_but_important };
std::string_view to_string(OptionalReason reason);
OptionalReason optional_reason_from_string(std::string_view text);

struct CommonGroup {
    Id left;
    Id right;
    std::string merged_name;

    bool operator==(const CommonGroup&) const = default;
};

struct OptionalCandidate {
    ProcessRef process;
    OptionalReason reason = OptionalReason::no_counterpart;
    /// Alternative group the box nests into, on the candidate's side.
    std::optional<Id> within_alternative;

    bool operator==(const OptionalCandidate&) const = default;
};

struct AlternativeGroup {
    Id id;
    std::vector<Id> left_members;
    std::vector<Id> right_members;
    std::string purpose;

    bool operator==(const AlternativeGroup&) const = default;
};

struct MergePlan {
    std::vector<CommonGroup> common_groups;
    std::vector<OptionalCandidate> optional_candidates;
    std::vector<AlternativeGroup> alternative_groups;
    std::vector<ProcessRef> exclusions;
    bool final = false;

    bool operator==(const MergePlan&) const = default;
};

/// Engineer input to plan proposal. An empty purpose means none given.
struct Annotation {
    ProcessRef process;
    bool skipped_but_important = false;
    std::string purpose;
};

/// Classifies processes from the session's facts and the annotations:
/// equal facts become common groups; processes sharing a purpose note and
/// separated by a different fact become alternative groups; flagged or
/// exhausted (different from every counterpart) processes become optional
/// candidates. Everything else stays unclassified.
MergePlan propose_plan(const Session& session, std::span<const Annotation> annotations);

// Decisions on a plan.
struct ToCommon {
    Id counterpart;
    std::string merged_name; // empty: use the left name
};
struct ToOptional {
    OptionalReason reason = OptionalReason::no_counterpart;
    std::optional<Id> within_alternative;
};
struct ToAlternative {
    Id group;
    std::string purpose; // required when `group` does not exist yet
};
struct ToExcluded {};

using Classification = std::variant<ToCommon, ToOptional, ToAlternative, ToExcluded>;

struct Accept {};
struct Reassign {
    ProcessRef process;
    Classification to;
};
using Decision = std::variant<Accept, Reassign>;

/// Applies one decision. Any reassignment clears `final`; Accept sets it.
/// Throws Error{plan_invalid / conflicting_merge} when the result would
/// break the plan invariants.
MergePlan decide(const Session& session, MergePlan plan, const Decision& decision);

/// Throws on the first broken invariant.
void check_plan(const Session& session, const MergePlan& plan);

/// Processes of either model not placed in any plan entry.
std::vector<ProcessRef> unaccounted(const Session& session, const MergePlan& plan);

// ---------------------------------------------------------------------------
// Reference model

enum class BoxKind { OPT, ALT };
std::string_view to_string(BoxKind kind);

struct VariationReason {
    std::string factor;
    std::string characteristic;
    std::string left_value;
    std::string right_value;
    std::string note;

    bool operator==(const VariationReason&) const = default;
};

struct VariationBox {
    Id id;
    BoxKind kind = BoxKind::OPT;
    std::vector<Id> members; // ids in the reference base model
    std::vector<VariationBox> nested;
    std::vector<VariationReason> reasons;
    Id group;            // alternative group id, ALT boxes only
    std::string purpose; // ALT boxes only

    bool operator==(const VariationBox&) const = default;
};

struct SourceRef {
    Side side = Side::left;
    Id model;
    Id entity;

    bool operator==(const SourceRef&) const = default;
};

struct ProvenanceEntry {
    Id entity;
    EntityKind kind = EntityKind::process;
    std::vector<SourceRef> sources;
    std::vector<std::string> aliases;

    bool operator==(const ProvenanceEntry&) const = default;
};

struct ReferenceProcessModel {
    ProcessModel base;
    std::vector<VariationBox> boxes;
    std::vector<ProvenanceEntry> provenance; // sorted by (kind, entity)
    std::vector<SourceRef> exclusions;
    CharacterizationVector left_context;
    CharacterizationVector right_context;

    bool operator==(const ReferenceProcessModel&) const = default;
};

/// Characterization entries whose values differ between the two contexts,
/// including entries present on one side only.
std::vector<VariationReason> variation_reasons(const CharacterizationVector& left, const CharacterizationVector& right);

/// Requires a final plan accounting for every process. Errors:
/// plan_not_final, unaccounted_process (subject lists them),
/// conflicting_merge, plan_invalid.
ReferenceProcessModel build_reference_model(const Session& session, const MergePlan& plan);

struct Accounting {
    std::size_t left_processes = 0;
    std::size_t right_processes = 0;
    std::size_t common_pairs = 0;
    std::size_t box_members = 0;
    std::size_t exclusions = 0;

    bool balanced() const noexcept {
        return left_processes + right_processes == 2 * common_pairs + box_members + exclusions;
    }
};

/// Counts taken from the reference model itself. Source sizes come from
/// the models passed in.
Accounting account(const ReferenceProcessModel& ref, const ProcessModel& left, const ProcessModel& right);

/// Every way `ref` fails to account for each source process exactly once;
/// empty when it does.
std::vector<std::string> accounting_problems(const ReferenceProcessModel& ref, const ProcessModel& left,
                                             const ProcessModel& right);

std::string serialize_reference_model(const ReferenceProcessModel& ref);
ReferenceProcessModel parse_reference_model(std::string_view text);

/// Structural checks: base model valid, box members exist, no orphan boxes,
/// sibling boxes disjoint, provenance covers every base entity.
std::vector<std::string> validate_reference_model(const ReferenceProcessModel& ref);

} // namespace procmatch
