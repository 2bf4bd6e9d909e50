#include "procmatch/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "procmatch/matching.hpp"
#include "procmatch/text.hpp"

namespace procmatch {

namespace {

// Name similarities are ratios of small integers; the slack keeps a ratio
// that equals the threshold from falling just under it.
constexpr double threshold_slack = 1e-12;

std::vector<Id> sorted_unique(std::vector<Id> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

} // namespace

bool Weights::is_valid() const noexcept {
    for (double w : {pds, pcs, pch})
        if (!std::isfinite(w) || w < 0.0 || w > 1.0) return false;
    return std::fabs(pds + pcs + pch - 1.0) <= sum_tolerance;
}

void Weights::validate() const {
    if (!is_valid())
        throw Error(ErrorCode::weights_invalid,
                    "weights must be non-negative and sum to 1 (got pds=" + std::to_string(pds) +
                        ", pcs=" + std::to_string(pcs) + ", pch=" + std::to_string(pch) + ")",
                    "weights");
}

void MatchPolicy::validate() const {
    if (!std::isfinite(name_threshold) || name_threshold < 0.0 || name_threshold > 1.0)
        throw Error(ErrorCode::policy_invalid, "name threshold must lie in [0, 1]", "name_threshold");
}

std::optional<Verdict> MatchPolicy::fact(const Id& left, const Id& right) const {
    if (!facts) return std::nullopt;
    return facts->verdict(left, right);
}

bool MatchPolicy::matchable(const Id& left, const Id& right, double similarity) const {
    if (auto v = fact(left, right)) return *v == Verdict::equal;
    return similarity + threshold_slack >= name_threshold;
}

NameLookup process_names(const ProcessModel& model) {
    return [&model](const Id& id) { return normalize_name(model.process(id).name); };
}

NameLookup product_names(const ProcessModel& model) {
    return [&model](const Id& id) { return normalize_name(model.product(id).name); };
}

namespace {

template <class LeftName, class RightName>
Fraction sc_ratio(std::span<const Id> a, std::span<const Id> b, const MatchPolicy& policy, LeftName left_name,
                  RightName right_name) {
    const std::size_t n = std::max(a.size(), b.size());
    if (n == 0) return {1, 1};
    if (a.empty() || b.empty()) return {0, n};
    auto m = maximum_matching(a.size(), b.size(), [&](std::size_t i, std::size_t j) {
        if (auto v = policy.fact(a[i], b[j])) return *v == Verdict::equal;
        return name_similarity(left_name(a[i]), right_name(b[j])) + threshold_slack >= policy.name_threshold;
    });
    return {m.size, n};
}

} // namespace

Fraction structure_compatibility_ratio(std::span<const Id> a, std::span<const Id> b, const MatchPolicy& policy,
                                       const NameLookup& left_names, const NameLookup& right_names) {
    // Set semantics: repeated ids count once.
    auto as = sorted_unique({a.begin(), a.end()});
    auto bs = sorted_unique({b.begin(), b.end()});
    auto decode = [](const NameLookup& names) {
        return [&names](const Id& id) { return decode_utf8(names(id)); };
    };
    return sc_ratio(std::span<const Id>(as), std::span<const Id>(bs), policy, decode(left_names),
                    decode(right_names));
}

double structure_compatibility(std::span<const Id> a, std::span<const Id> b, const MatchPolicy& policy,
                               const NameLookup& left_names, const NameLookup& right_names) {
    return structure_compatibility_ratio(a, b, policy, left_names, right_names).value();
}

// ---------------------------------------------------------------------------
// ModelIndex

ModelIndex::ModelIndex(const ProcessModel& model) : model_(&model) {
    for (const auto& [id, product] : model.products) products_.emplace(id, decode_utf8(normalize_name(product.name)));
    for (const auto& [id, process] : model.processes) {
        ProcessData data;
        data.name = decode_utf8(normalize_name(process.name));
        for (const auto& access : process.product_accesses) data.products.push_back(access.product);
        data.products = sorted_unique(std::move(data.products));
        data.children = sorted_unique(process.sub_processes);
        auto desc = procmatch::descendants(model, id, hierarchy_depth);
        data.descendants.assign(desc.begin(), desc.end());
        processes_.emplace(id, std::move(data));
    }
}

const ModelIndex::ProcessData& ModelIndex::process(const Id& id) const {
    auto it = processes_.find(id);
    if (it == processes_.end())
        throw Error(ErrorCode::unknown_process, "unknown process '" + id + "' in model '" + model_->name + "'", id);
    return it->second;
}

const std::u32string& ModelIndex::process_name(const Id& id) const { return process(id).name; }

const std::u32string& ModelIndex::product_name(const Id& id) const {
    auto it = products_.find(id);
    if (it == products_.end())
        throw Error(ErrorCode::unknown_entity, "unknown product '" + id + "' in model '" + model_->name + "'", id);
    return it->second;
}

// ---------------------------------------------------------------------------
// Rules

namespace {

double hierarchy_score(const ModelIndex& left, const ModelIndex::ProcessData& a, const ModelIndex& right,
                       const ModelIndex::ProcessData& b) {
    if (a.descendants.empty() && b.descendants.empty()) return name_similarity(a.name, b.name);
    if (a.descendants.empty() || b.descendants.empty()) return 0.0;
    double best = 0.0;
    for (const auto& u : a.descendants) {
        const auto& un = left.process_name(u);
        for (const auto& v : b.descendants) {
            best = std::max(best, name_similarity(un, right.process_name(v)));
            if (best == 1.0) return best;
        }
    }
    return best;
}

Fraction product_score(const ModelIndex& left, const ModelIndex::ProcessData& a, const ModelIndex& right,
                     const ModelIndex::ProcessData& b, const MatchPolicy& policy) {
    return sc_ratio(std::span<const Id>(a.products), std::span<const Id>(b.products), policy,
                    [&](const Id& id) -> const std::u32string& { return left.product_name(id); },
                    [&](const Id& id) -> const std::u32string& { return right.product_name(id); });
}

Fraction children_score(const ModelIndex& left, const ModelIndex::ProcessData& a, const ModelIndex& right,
                      const ModelIndex::ProcessData& b, const MatchPolicy& policy) {
    return sc_ratio(std::span<const Id>(a.children), std::span<const Id>(b.children), policy,
                    [&](const Id& id) -> const std::u32string& { return left.process_name(id); },
                    [&](const Id& id) -> const std::u32string& { return right.process_name(id); });
}

} // namespace

double pch(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2, const MatchPolicy&) {
    ModelIndex li(left), ri(right);
    return hierarchy_score(li, li.process(p1), ri, ri.process(p2));
}

Fraction pds_ratio(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
                   const MatchPolicy& policy) {
    ModelIndex li(left), ri(right);
    return product_score(li, li.process(p1), ri, ri.process(p2), policy);
}

Fraction pcs_ratio(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
                   const MatchPolicy& policy) {
    ModelIndex li(left), ri(right);
    return children_score(li, li.process(p1), ri, ri.process(p2), policy);
}

double pds(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
           const MatchPolicy& policy) {
    return pds_ratio(left, p1, right, p2, policy).value();
}

double pcs(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
           const MatchPolicy& policy) {
    return pcs_ratio(left, p1, right, p2, policy).value();
}

CellScore score_pair(const ModelIndex& left, const Id& p1, const ModelIndex& right, const Id& p2,
                     const Weights& weights, const MatchPolicy& policy) {
    weights.validate();
    const auto& a = left.process(p1);
    const auto& b = right.process(p2);

    CellScore cell;
    cell.name = name_similarity(a.name, b.name);
    cell.pds = product_score(left, a, right, b, policy).value();
    cell.pcs = children_score(left, a, right, b, policy).value();
    cell.pch = hierarchy_score(left, a, right, b);
    cell.pds_active = !(a.products.empty() && b.products.empty());
    cell.pcs_active = !(a.children.empty() && b.children.empty());
    cell.pch_active = !(a.descendants.empty() && b.descendants.empty());

    if (auto v = policy.fact(p1, p2)) {
        cell.pinned = *v;
        cell.pcm = *v == Verdict::equal ? 1.0 : 0.0;
        return cell;
    }

    const double plain = weights.pds * cell.pds + weights.pcs * cell.pcs + weights.pch * cell.pch;
    double score;
    if (!cell.pds_active && !cell.pcs_active && !cell.pch_active) {
        score = cell.name;
    } else if (cell.pds_active && cell.pcs_active && cell.pch_active) {
        score = plain;
    } else {
        // Inactive rules hand their weight to the active ones in proportion.
        double active_weight = 0.0, weighted = 0.0;
        if (cell.pds_active) active_weight += weights.pds, weighted += weights.pds * cell.pds;
        if (cell.pcs_active) active_weight += weights.pcs, weighted += weights.pcs * cell.pcs;
        if (cell.pch_active) active_weight += weights.pch, weighted += weights.pch * cell.pch;
        // No weight on any active rule: nothing to redistribute to.
        score = active_weight > 0.0 ? weighted / active_weight : plain;
    }
    cell.pcm = std::clamp(score, 0.0, 1.0);
    return cell;
}

CellScore pcm(const ProcessModel& left, const Id& p1, const ProcessModel& right, const Id& p2,
              const Weights& weights, const MatchPolicy& policy) {
    weights.validate();
    ModelIndex li(left), ri(right);
    return score_pair(li, p1, ri, p2, weights, policy);
}

// ---------------------------------------------------------------------------
// Matrix

std::optional<std::size_t> SimilarityMatrix::row_of(const Id& id) const {
    auto it = std::find(left_ids.begin(), left_ids.end(), id);
    if (it == left_ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - left_ids.begin());
}

std::optional<std::size_t> SimilarityMatrix::col_of(const Id& id) const {
    auto it = std::find(right_ids.begin(), right_ids.end(), id);
    if (it == right_ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - right_ids.begin());
}

namespace {

void check_scope(const ProcessModel& model, std::span<const Id> scope, std::string_view side) {
    std::set<Id> seen;
    for (const auto& id : scope) {
        if (!model.has_process(id))
            throw Error(ErrorCode::scope_invalid,
                        std::string(side) + " scope names unknown process '" + id + "'", id);
        if (!seen.insert(id).second)
            throw Error(ErrorCode::scope_invalid, std::string(side) + " scope names '" + id + "' twice", id);
    }
}

} // namespace

SimilarityMatrix compute_matrix(const ProcessModel& left, const ProcessModel& right,
                                std::span<const Id> scope_left, std::span<const Id> scope_right,
                                const Weights& weights, const MatchPolicy& policy) {
    weights.validate();
    policy.validate();
    check_scope(left, scope_left, "left");
    check_scope(right, scope_right, "right");

    const ModelIndex li(left), ri(right);
    SimilarityMatrix m;
    m.left_ids.assign(scope_left.begin(), scope_left.end());
    m.right_ids.assign(scope_right.begin(), scope_right.end());
    for (const auto& id : m.left_ids) m.left_names.push_back(left.process(id).name);
    for (const auto& id : m.right_ids) m.right_names.push_back(right.process(id).name);
    m.weights_used = weights;
    m.name_threshold = policy.name_threshold;
    m.fact_digest = policy.facts ? policy.facts->digest() : FactSet{}.digest();

    m.cells.reserve(m.left_ids.size() * m.right_ids.size());
    for (const auto& l : m.left_ids)
        for (const auto& r : m.right_ids) m.cells.push_back(score_pair(li, l, ri, r, weights, policy));
    return m;
}

} // namespace procmatch
