#include "procmatch/session.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <map>
#include <set>

namespace procmatch {

std::string_view to_string(Scope scope) { return scope == Scope::phases ? "phases" : "processes"; }

Scope scope_from_string(std::string_view text) {
    if (text == "phases") return Scope::phases;
    if (text == "processes") return Scope::processes;
    throw Error(ErrorCode::scope_invalid, "scope must be 'phases' or 'processes'", std::string(text));
}

std::vector<Id> scope_ids(const ProcessModel& model, Scope scope) {
    if (scope == Scope::phases) return model.root_processes;
    std::vector<Id> out;
    for (const auto& root : model.root_processes)
        for (const auto& child : model.process(root).sub_processes) out.push_back(child);
    return out;
}

std::vector<Assumption> rank_assumptions(const SimilarityMatrix& matrix) {
    std::vector<Assumption> out;
    for (std::size_t i = 0; i < matrix.rows(); ++i)
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            const auto& cell = matrix.at(i, j);
            if (!cell.pinned) out.push_back({matrix.left_ids[i], matrix.right_ids[j], cell, 0});
        }
    std::sort(out.begin(), out.end(), [](const Assumption& a, const Assumption& b) {
        if (a.score.pcm != b.score.pcm) return a.score.pcm > b.score.pcm;
        if (a.left != b.left) return a.left < b.left;
        return a.right < b.right;
    });
    for (std::size_t k = 0; k < out.size(); ++k) out[k].rank = k + 1;
    return out;
}

// ---------------------------------------------------------------------------
// Session

Session::Session(Id id, std::shared_ptr<const ProcessModel> left, std::shared_ptr<const ProcessModel> right,
                 Weights weights, double name_threshold)
    : id_(std::move(id)), left_(std::move(left)), right_(std::move(right)), weights_(weights),
      name_threshold_(name_threshold) {
    if (!left_ || !right_) throw Error(ErrorCode::invalid_model, "session needs two models");
    require_valid(*left_);
    require_valid(*right_);
    weights_.validate();
    policy().validate();
}

Session Session::restore(Id id, std::shared_ptr<const ProcessModel> left, std::shared_ptr<const ProcessModel> right,
                         Weights weights, double name_threshold, FactSet facts, std::vector<Iteration> iterations,
                         std::size_t next_fact_number) {
    Session s(std::move(id), std::move(left), std::move(right), weights, name_threshold);
    s.facts_ = std::move(facts);
    s.iterations_ = std::move(iterations);
    s.next_fact_number_ = next_fact_number;
    return s;
}

MatchPolicy Session::policy() const {
    return MatchPolicy{name_threshold_, std::make_shared<const FactSet>(facts_)};
}

namespace {

std::optional<EntityKind> kind_of(const ProcessModel& model, const Id& id) {
    if (model.has_process(id)) return EntityKind::process;
    if (model.has_product(id)) return EntityKind::product;
    return std::nullopt;
}

} // namespace

const Fact& Session::establish_fact(const Id& left, const Id& right, Verdict verdict, std::string rationale,
                                    std::string created_at) {
    auto lk = kind_of(*left_, left);
    if (!lk)
        throw Error(ErrorCode::unknown_entity, "'" + left + "' is not a process or product of the left model", left);
    auto rk = kind_of(*right_, right);
    if (!rk)
        throw Error(ErrorCode::unknown_entity, "'" + right + "' is not a process or product of the right model",
                    right);
    if (*lk != *rk)
        throw Error(ErrorCode::cross_kind_fact,
                    "cannot relate " + std::string(to_string(*lk)) + " '" + left + "' to " +
                        std::string(to_string(*rk)) + " '" + right + "'",
                    left + "/" + right);
    if (facts_.contains_pair(left, right))
        throw Error(ErrorCode::duplicate_fact, "pair (" + left + ", " + right + ") already has a fact",
                    facts_.find_pair(left, right)->id);

    Fact fact{"f" + std::to_string(next_fact_number_++),
              left,
              right,
              *lk,
              verdict,
              std::move(rationale),
              created_at.empty() ? utc_timestamp() : std::move(created_at)};
    facts_.insert(fact);
    return *facts_.find_pair(left, right);
}

Fact Session::retract_fact(const Id& fact_id) {
    auto removed = facts_.erase(fact_id);
    if (!removed) throw Error(ErrorCode::unknown_fact, "no fact with id '" + fact_id + "'", fact_id);
    return *removed;
}

void Session::set_weights(const Weights& weights) {
    weights.validate();
    weights_ = weights;
}

RecomputeResult Session::recompute(std::span<const Id> scope_left, std::span<const Id> scope_right) {
    auto policy = this->policy();
    auto matrix = std::make_shared<const SimilarityMatrix>(
        compute_matrix(*left_, *right_, scope_left, scope_right, weights_, policy));
    iterations_.push_back(Iteration{weights_, matrix->fact_digest, matrix->left_ids, matrix->right_ids, matrix});
    return {matrix, rank_assumptions(*matrix)};
}

RecomputeResult Session::recompute(Scope scope) {
    auto l = scope_ids(*left_, scope);
    auto r = scope_ids(*right_, scope);
    return recompute(l, r);
}

std::shared_ptr<const SimilarityMatrix> Session::latest_matrix() const {
    return iterations_.empty() ? nullptr : iterations_.back().matrix;
}

// ---------------------------------------------------------------------------
// Commonality table

std::string_view to_string(RowStatus status) {
    switch (status) {
    case RowStatus::similar: return "similar";
    case RowStatus::different: return "different";
    case RowStatus::unmatched_left: return "unmatched-left";
    case RowStatus::unmatched_right: return "unmatched-right";
    }
    return "similar";
}

namespace {

std::vector<Id> ids_of_kind(const ProcessModel& model, EntityKind kind) {
    std::vector<Id> out;
    if (kind == EntityKind::process)
        for (const auto& [id, _] : model.processes) out.push_back(id);
    else
        for (const auto& [id, _] : model.products) out.push_back(id);
    return out;
}

} // namespace

CommonalityTable commonality_table(const Session& session) {
    CommonalityTable table;
    for (EntityKind kind : {EntityKind::process, EntityKind::product}) {
        const auto left_ids = ids_of_kind(session.left(), kind);
        const auto right_ids = ids_of_kind(session.right(), kind);

        std::map<Id, std::size_t> left_diff, right_diff;
        std::set<Id> left_equal, right_equal, left_any, right_any;
        std::vector<const Fact*> equal, different;
        std::size_t kind_facts = 0;
        for (const auto& [_, f] : session.facts()) {
            if (f.kind != kind) continue;
            ++kind_facts;
            left_any.insert(f.left);
            right_any.insert(f.right);
            if (f.verdict == Verdict::equal) {
                left_equal.insert(f.left);
                right_equal.insert(f.right);
                equal.push_back(&f);
            } else {
                ++left_diff[f.left];
                ++right_diff[f.right];
                different.push_back(&f);
            }
        }

        std::set<Id> left_unmatched, right_unmatched;
        for (const auto& [id, n] : left_diff)
            if (!left_equal.contains(id) && n == right_ids.size()) left_unmatched.insert(id);
        for (const auto& [id, n] : right_diff)
            if (!right_equal.contains(id) && n == left_ids.size()) right_unmatched.insert(id);

        for (const Fact* f : equal) table.rows.push_back({f->left, f->right, kind, RowStatus::similar});
        for (const Fact* f : different)
            if (!left_unmatched.contains(f->left) && !right_unmatched.contains(f->right))
                table.rows.push_back({f->left, f->right, kind, RowStatus::different});
        for (const auto& id : left_unmatched)
            table.rows.push_back({id, std::nullopt, kind, RowStatus::unmatched_left});
        for (const auto& id : right_unmatched)
            table.rows.push_back({std::nullopt, id, kind, RowStatus::unmatched_right});

        for (const auto& id : left_ids)
            if (!left_any.contains(id)) ++table.pending_entities;
        for (const auto& id : right_ids)
            if (!right_any.contains(id)) ++table.pending_entities;
        table.pending_pairs += left_ids.size() * right_ids.size() - kind_facts;
    }
    return table;
}

// ---------------------------------------------------------------------------
// Expectation report and export

ExpectationReport expectation_report(const SimilarityMatrix& matrix, std::span<const IdPair> expected_pairs,
                                     double low, double high) {
    if (!(low >= 0.0 && high <= 1.0 && low <= high))
        throw Error(ErrorCode::thresholds_invalid, "thresholds must satisfy 0 <= low <= high <= 1");

    ExpectationReport report;
    std::set<std::pair<std::size_t, std::size_t>> expected_cells;
    for (const auto& [l, r] : expected_pairs) {
        auto i = matrix.row_of(l);
        auto j = matrix.col_of(r);
        if (!i || !j)
            throw Error(ErrorCode::pair_outside_matrix, "pair (" + l + ", " + r + ") is outside the matrix",
                        l + "/" + r);
        if (expected_cells.emplace(*i, *j).second) report.expected_pairs.emplace_back(l, r);
    }
    for (std::size_t i = 0; i < matrix.rows(); ++i)
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            const double v = matrix.at(i, j).pcm;
            const bool expected = expected_cells.contains({i, j});
            if (expected && v < low) report.weak_expected.emplace_back(matrix.left_ids[i], matrix.right_ids[j]);
            if (!expected && v > high)
                report.strong_unexpected.emplace_back(matrix.left_ids[i], matrix.right_ids[j]);
        }
    return report;
}

std::vector<IdPair> diagonal_pairs(const SimilarityMatrix& matrix) {
    std::vector<IdPair> out;
    for (std::size_t i = 0; i < std::min(matrix.rows(), matrix.cols()); ++i)
        out.emplace_back(matrix.left_ids[i], matrix.right_ids[i]);
    return out;
}

namespace {

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string fixed4(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
    return std::string(buf, res.ptr);
}

} // namespace

std::string export_heatmap(const SimilarityMatrix& matrix) {
    std::string out;
    for (const auto& name : matrix.right_names) out += "," + csv_field(name);
    out += "\n";
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        out += csv_field(matrix.left_names[i]);
        for (std::size_t j = 0; j < matrix.cols(); ++j) out += "," + fixed4(matrix.at(i, j).pcm);
        out += "\n";
    }
    return out;
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace procmatch
