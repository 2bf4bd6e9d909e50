#pragma once

// Document forms of sessions and their by-products: facts files, weights,
// matrices, assumption listings, commonality tables, expectation reports,
// merge plans, plan decisions and annotations.

#include <string>
#include <string_view>
#include <vector>

#include "procmatch/json_io.hpp"
#include "procmatch/reference.hpp"
#include "procmatch/session.hpp"

namespace procmatch::io {

json weights_to_json(const Weights& w);
Weights weights_from_json(const json& doc);

/// One entry of a facts file: {left, right, kind, verdict, rationale}.
/// `kind` is optional on input.
struct FactInput {
    Id left;
    Id right;
    std::optional<EntityKind> kind;
    Verdict verdict = Verdict::equal;
    std::string rationale;
};

std::vector<FactInput> facts_file_from_json(const json& doc);
std::vector<FactInput> read_facts_file(std::string_view text);

/// Establishes every fact in order; a stated kind must agree with the ids.
void apply_facts(Session& session, const std::vector<FactInput>& facts);

json fact_to_json(const Fact& f);
Fact fact_from_json(const json& doc);

json cell_to_json(const CellScore& c);
CellScore cell_from_json(const json& doc);
json matrix_to_json(const SimilarityMatrix& m);
SimilarityMatrix matrix_from_json(const json& doc);

json assumptions_to_json(const std::vector<Assumption>& assumptions);
/// CSV listing: rank,left,right,pcm,pds,pcs,pch
std::string assumptions_to_csv(const std::vector<Assumption>& assumptions);

json commonality_to_json(const CommonalityTable& table);
json expectation_to_json(const ExpectationReport& report);

json plan_to_json(const MergePlan& plan);
MergePlan plan_from_json(const json& doc);

std::vector<Annotation> annotations_from_json(const json& doc);
Decision decision_from_json(const json& doc);
std::vector<Decision> decisions_from_json(const json& doc);

/// Self-contained session document: both models inline, weights, threshold,
/// facts, full iteration history, and the current merge plan if any.
json session_to_json(const Session& s, const std::optional<MergePlan>& plan = std::nullopt);

struct SessionDocument {
    Session session;
    std::optional<MergePlan> plan;
};
SessionDocument session_from_json(const json& doc);

std::string read_file(const std::string& path);
/// Writes through a temporary file and renames it into place.
void write_file(const std::string& path, std::string_view content);

} // namespace procmatch::io
