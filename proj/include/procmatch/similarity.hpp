#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "procmatch/facts.hpp"
#include "procmatch/model.hpp"

namespace procmatch {

/// Relevance of the three structural rules in the aggregate score.
struct Weights {
    double pds = 1.0 / 3.0;
    double pcs = 1.0 / 3.0;
    double pch = 1.0 / 3.0;

    static constexpr double sum_tolerance = 1e-9;

    bool is_valid() const noexcept;
    /// Throws Error{weights_invalid}.
    void validate() const;

    bool operator==(const Weights&) const = default;
};

/// Decides which entity pairs count as matches inside the set comparison:
/// an equal fact always matches, a different fact never does, and otherwise
/// the normalized names must reach `name_threshold`.
struct MatchPolicy {
    double name_threshold = 0.9;
    std::shared_ptr<const FactSet> facts;

    void validate() const;
    std::optional<Verdict> fact(const Id& left, const Id& right) const;
    bool matchable(const Id& left, const Id& right, double name_similarity) const;
};

/// Exact m/n result of the set comparison.
struct Fraction {
    std::size_t numerator = 0;
    std::size_t denominator = 1;

    double value() const noexcept {
        return static_cast<double>(numerator) / static_cast<double>(denominator);
    }

    /// Rational equality (1/3 == 2/6).
    friend bool operator==(const Fraction& a, const Fraction& b) noexcept {
        return a.numerator * b.denominator == b.numerator * a.denominator;
    }
};

/// Maps an entity id to its normalized name.
using NameLookup = std::function<std::string(const Id&)>;

NameLookup process_names(const ProcessModel& model);
NameLookup product_names(const ProcessModel& model);

/// Size of a maximum matching between `a` and `b` under the policy, over
/// max(|a|, |b|). Both empty gives 1/1, exactly one empty gives 0/n.
Fraction structure_compatibility_ratio(std::span<const Id> a, std::span<const Id> b, const MatchPolicy& policy,
                                       const NameLookup& left_names, const NameLookup& right_names);

double structure_compatibility(std::span<const Id> a, std::span<const Id> b, const MatchPolicy& policy,
                               const NameLookup& left_names, const NameLookup& right_names);

double pch(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
           const MatchPolicy& policy);
double pds(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
           const MatchPolicy& policy);
double pcs(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
           const MatchPolicy& policy);

// Exact forms of pds / pcs.
Fraction pds_ratio(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
                   const MatchPolicy& policy);
Fraction pcs_ratio(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
                   const MatchPolicy& policy);

/// Levels of the aggregation tree considered by the hierarchy rule.
inline constexpr int hierarchy_depth = 3;

struct CellScore {
    double pcm = 0.0;
    double pds = 0.0;
    double pcs = 0.0;
    double pch = 0.0;
    double name = 0.0;
    std::optional<Verdict> pinned;
    // A rule is inactive when both of its underlying sets are empty. An
    // inactive hierarchy rule means pch holds the name fallback.
    bool pds_active = false;
    bool pcs_active = false;
    bool pch_active = false;

    bool operator==(const CellScore&) const = default;
};

/// Weighted aggregate of pds, pcs and pch.
///
/// A fact on (p1, p2) pins the result to 1 (equal) or 0 (different). When
/// some rules are inactive their weight is redistributed proportionally over
/// the active ones; with no active rule the name similarity is used; when the
/// active rules all carry zero weight the plain weighted sum applies. The
/// per-rule values are filled in either way.
CellScore pcm(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
              const Weights& weights, const MatchPolicy& policy);

struct SimilarityMatrix {
    std::vector<Id> left_ids;
    std::vector<Id> right_ids;
    std::vector<std::string> left_names;  // display names, scope order
    std::vector<std::string> right_names;
    std::vector<CellScore> cells;         // row-major, left x right
    Weights weights_used;
    double name_threshold = 0.9;
    std::string fact_digest;

    std::size_t rows() const noexcept { return left_ids.size(); }
    std::size_t cols() const noexcept { return right_ids.size(); }
    const CellScore& at(std::size_t row, std::size_t col) const { return cells.at(row * cols() + col); }

    std::optional<std::size_t> row_of(const Id& id) const;
    std::optional<std::size_t> col_of(const Id& id) const;

    bool operator==(const SimilarityMatrix&) const = default;
};

SimilarityMatrix compute_matrix(const ProcessModel& left, const ProcessModel& right,
                                std::span<const Id> scope_left, std::span<const Id> scope_right,
                                const Weights& weights, const MatchPolicy& policy);

/// Precomputed per-model data the rules read repeatedly: normalized names as
/// scalar values, access sets, direct children and three-level descendants.
class ModelIndex {
public:
    explicit ModelIndex(const ProcessModel& model);

    const ProcessModel& model() const noexcept { return *model_; }

    struct ProcessData {
        std::u32string name;
        std::vector<Id> products;      // sorted, unique
        std::vector<Id> children;      // sorted, unique
        std::vector<Id> descendants;   // levels 1..hierarchy_depth, sorted
    };

    const ProcessData& process(const Id& id) const;
    const std::u32string& process_name(const Id& id) const;
    const std::u32string& product_name(const Id& id) const;

private:
    const ProcessModel* model_;
    std::map<Id, ProcessData> processes_;
    std::map<Id, std::u32string> products_;
};

/// Same contract as pcm(), reading from prebuilt indexes.
CellScore score_pair(const ModelIndex& left, const Id& p1, const ModelIndex& right, const Id& p2,
                     const Weights& weights, const MatchPolicy& policy);

} // namespace procmatch
