#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace procmatch {

// One code per failure path across the library. The service layer maps these
// one-to-one onto its error tokens.
enum class ErrorCode {
    syntax_error,
    schema_error,
    dangling_reference,
    duplicate_id,
    cyclic_hierarchy,
    multiple_parents,
    invalid_model,
    unknown_process,
    unknown_entity,
    weights_invalid,
    policy_invalid,
    duplicate_fact,
    cross_kind_fact,
    unknown_fact,
    scope_invalid,
    no_iteration,
    no_plan,
    thresholds_invalid,
    pair_outside_matrix,
    annotation_invalid,
    plan_invalid,
    plan_not_final,
    unaccounted_process,
    conflicting_merge,
    reference_invalid,
    unknown_model,
    unknown_session,
    io_error,
    store_corrupt,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string subject = {})
        : std::runtime_error(message), code_(code), subject_(std::move(subject)) {}

    ErrorCode code() const noexcept { return code_; }

    /// Offending entity, file, or field, when there is one.
    const std::string& subject() const noexcept { return subject_; }

private:
    ErrorCode code_;
    std::string subject_;
};

} // namespace procmatch
