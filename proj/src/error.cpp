#include "procmatch/error.hpp"

namespace procmatch {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::syntax_error: return "syntax_error";
    case ErrorCode::schema_error: return "schema_error";
    case ErrorCode::dangling_reference: return "dangling_reference";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::cyclic_hierarchy: return "cyclic_hierarchy";
    case ErrorCode::multiple_parents: return "multiple_parents";
    case ErrorCode::invalid_model: return "invalid_model";
    case ErrorCode::unknown_process: return "unknown_process";
    case ErrorCode::unknown_entity: return "unknown_entity";
    case ErrorCode::weights_invalid: return "weights_invalid";
    case ErrorCode::policy_invalid: return "policy_invalid";
    case ErrorCode::duplicate_fact: return "duplicate_fact";
    case ErrorCode::cross_kind_fact: return "cross_kind_fact";
    case ErrorCode::unknown_fact: return "unknown_fact";
    case ErrorCode::scope_invalid: return "scope_invalid";
    case ErrorCode::no_iteration: return "no_iteration";
    case ErrorCode::no_plan: return "no_plan";
    case ErrorCode::thresholds_invalid: return "thresholds_invalid";
    case ErrorCode::pair_outside_matrix: return "pair_outside_matrix";
    case ErrorCode::annotation_invalid: return "annotation_invalid";
    case ErrorCode::plan_invalid: return "plan_invalid";
    case ErrorCode::plan_not_final: return "plan_not_final";
    case ErrorCode::unaccounted_process: return "unaccounted_process";
    case ErrorCode::conflicting_merge: return "conflicting_merge";
    case ErrorCode::reference_invalid: return "reference_invalid";
    case ErrorCode::unknown_model: return "unknown_model";
    case ErrorCode::unknown_session: return "unknown_session";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::store_corrupt: return "store_corrupt";
    }
    return "unknown";
}

} // namespace procmatch
