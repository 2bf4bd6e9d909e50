#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "procmatch/facts.hpp"
#include "procmatch/model.hpp"
#include "procmatch/similarity.hpp"

namespace procmatch {

/// Phases are the root processes; processes are the children of the roots,
/// walked in root order.
enum class Scope { phases, processes };

std::string_view to_string(Scope scope);
Scope scope_from_string(std::string_view text);
std::vector<Id> scope_ids(const ProcessModel& model, Scope scope);

struct Assumption {
    Id left;
    Id right;
    CellScore score;
    std::size_t rank = 0;

    bool operator==(const Assumption&) const = default;
};

/// Unpinned cells of `matrix`, ordered by descending pcm, then (left, right).
std::vector<Assumption> rank_assumptions(const SimilarityMatrix& matrix);

struct Iteration {
    Weights weights;
    std::string fact_digest;
    std::vector<Id> scope_left;
    std::vector<Id> scope_right;
    std::shared_ptr<const SimilarityMatrix> matrix;
};

struct RecomputeResult {
    std::shared_ptr<const SimilarityMatrix> matrix;
    std::vector<Assumption> assumptions;
};

class Session {
public:
    /// Both models must validate; throws Error{invalid_model...} naming the
    /// first violation, or Error{weights_invalid / policy_invalid}.
    Session(Id id, std::shared_ptr<const ProcessModel> left, std::shared_ptr<const ProcessModel> right,
            Weights weights = {}, double name_threshold = 0.9);

    /// Rebuilds a session from persisted state.
    static Session restore(Id id, std::shared_ptr<const ProcessModel> left, std::shared_ptr<const ProcessModel> right,
                           Weights weights, double name_threshold, FactSet facts, std::vector<Iteration> iterations,
                           std::size_t next_fact_number);

    const Id& id() const noexcept { return id_; }
    const ProcessModel& left() const noexcept { return *left_; }
    const ProcessModel& right() const noexcept { return *right_; }
    std::shared_ptr<const ProcessModel> left_ptr() const noexcept { return left_; }
    std::shared_ptr<const ProcessModel> right_ptr() const noexcept { return right_; }
    const Weights& weights() const noexcept { return weights_; }
    double name_threshold() const noexcept { return name_threshold_; }
    const FactSet& facts() const noexcept { return facts_; }
    const std::vector<Iteration>& iterations() const noexcept { return iterations_; }
    std::size_t next_fact_number() const noexcept { return next_fact_number_; }

    /// Kind is inferred from where the ids resolve. Errors: unknown_entity,
    /// cross_kind_fact, duplicate_fact.
    const Fact& establish_fact(const Id& left, const Id& right, Verdict verdict, std::string rationale = {},
                               std::string created_at = {});
    Fact retract_fact(const Id& fact_id);
    void set_weights(const Weights& weights);

    RecomputeResult recompute(std::span<const Id> scope_left, std::span<const Id> scope_right);
    RecomputeResult recompute(Scope scope);

    /// Latest matrix, or nullptr before the first recompute.
    std::shared_ptr<const SimilarityMatrix> latest_matrix() const;

    MatchPolicy policy() const;

private:
    Id id_;
    std::shared_ptr<const ProcessModel> left_;
    std::shared_ptr<const ProcessModel> right_;
    Weights weights_;
    double name_threshold_;
    FactSet facts_;
    std::vector<Iteration> iterations_;
    std::size_t next_fact_number_ = 1;
};

enum class RowStatus { similar, different, unmatched_left, unmatched_right };
std::string_view to_string(RowStatus status);

struct CommonalityRow {
    std::optional<Id> left;
    std::optional<Id> right;
    EntityKind kind = EntityKind::process;
    RowStatus status = RowStatus::similar;

    bool operator==(const CommonalityRow&) const = default;
};

struct CommonalityTable {
    std::vector<CommonalityRow> rows;
    std::size_t pending_entities = 0; // entities without any fact
    std::size_t pending_pairs = 0;    // same-kind pairs without a fact
};

/// similar: one row per equal fact. unmatched-left/right: an entity with
/// different facts against every same-kind counterpart. different: the
/// remaining different facts.
CommonalityTable commonality_table(const Session& session);

using IdPair = std::pair<Id, Id>;

struct ExpectationReport {
    std::vector<IdPair> expected_pairs;
    std::vector<IdPair> weak_expected;     // expected, pcm < low
    std::vector<IdPair> strong_unexpected; // not expected, pcm > high

    bool operator==(const ExpectationReport&) const = default;
};

inline constexpr double default_expectation_low = 0.3;
inline constexpr double default_expectation_high = 0.7;

ExpectationReport expectation_report(const SimilarityMatrix& matrix, std::span<const IdPair> expected_pairs,
                                     double low = default_expectation_low, double high = default_expectation_high);

/// (left_ids[i], right_ids[i]) for i < min(rows, cols).
std::vector<IdPair> diagonal_pairs(const SimilarityMatrix& matrix);

/// Comma-separated grid: header row of right display names, one row per left
/// entity, values with four decimals.
std::string export_heatmap(const SimilarityMatrix& matrix);

/// ISO-8601 UTC timestamp of now.
std::string utc_timestamp();

} // namespace procmatch
