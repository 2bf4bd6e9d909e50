#include "procmatch/session_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace procmatch::io {

namespace {

// nlohmann type errors surface as schema errors with the library message.
template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::schema_error, std::string(what) + ": " + e.what(), what);
    }
}

std::vector<Id> strings(const json& arr) {
    std::vector<Id> out;
    for (const auto& v : arr) out.push_back(v.get<std::string>());
    return out;
}

json ref_to_json(const ProcessRef& r) { return {{"side", std::string(to_string(r.side))}, {"process", r.id}}; }

ProcessRef ref_from_json(const json& doc) {
    return {side_from_string(require_string(doc, "side", "process reference")),
            require_string(doc, "process", "process reference")};
}

std::string fixed(double v, int digits) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
    return std::string(buf, res.ptr);
}

} // namespace

json weights_to_json(const Weights& w) { return {{"pds", w.pds}, {"pcs", w.pcs}, {"pch", w.pch}}; }

Weights weights_from_json(const json& doc) {
    Weights w{require_number(doc, "pds", "weights"), require_number(doc, "pcs", "weights"),
              require_number(doc, "pch", "weights")};
    w.validate();
    return w;
}

std::vector<FactInput> facts_file_from_json(const json& doc) {
    return guarded("facts", [&] {
        if (!doc.is_array()) throw Error(ErrorCode::schema_error, "facts file must be a list", "facts");
        std::vector<FactInput> out;
        for (const auto& item : doc) {
            FactInput f;
            f.left = require_string(item, "left", "fact");
            f.right = require_string(item, "right", "fact");
            if (item.contains("kind")) f.kind = entity_kind_from_string(require_string(item, "kind", "fact"));
            f.verdict = verdict_from_string(require_string(item, "verdict", "fact"));
            f.rationale = optional_string(item, "rationale", "fact");
            out.push_back(std::move(f));
        }
        return out;
    });
}

std::vector<FactInput> read_facts_file(std::string_view text) { return facts_file_from_json(parse_json(text)); }

void apply_facts(Session& session, const std::vector<FactInput>& facts) {
    for (const auto& f : facts) {
        const Fact& stored = session.establish_fact(f.left, f.right, f.verdict, f.rationale);
        if (f.kind && *f.kind != stored.kind) {
            Id id = stored.id;
            session.retract_fact(id);
            throw Error(ErrorCode::cross_kind_fact,
                        "fact (" + f.left + ", " + f.right + ") declared as " + std::string(to_string(*f.kind)) +
                            " but relates " + std::string(to_string(stored.kind)) + "s",
                        f.left + "/" + f.right);
        }
    }
}

json fact_to_json(const Fact& f) {
    return {{"id", f.id},
            {"left", f.left},
            {"right", f.right},
            {"kind", std::string(to_string(f.kind))},
            {"verdict", std::string(to_string(f.verdict))},
            {"rationale", f.rationale},
            {"created_at", f.created_at}};
}

Fact fact_from_json(const json& doc) {
    return {require_string(doc, "id", "fact"),
            require_string(doc, "left", "fact"),
            require_string(doc, "right", "fact"),
            entity_kind_from_string(require_string(doc, "kind", "fact")),
            verdict_from_string(require_string(doc, "verdict", "fact")),
            optional_string(doc, "rationale", "fact"),
            optional_string(doc, "created_at", "fact")};
}

json cell_to_json(const CellScore& c) {
    json doc = {{"pcm", c.pcm},
                {"pds", c.pds},
                {"pcs", c.pcs},
                {"pch", c.pch},
                {"name", c.name},
                {"active", {{"pds", c.pds_active}, {"pcs", c.pcs_active}, {"pch", c.pch_active}}}};
    doc["pinned"] = c.pinned ? json(std::string(to_string(*c.pinned))) : json(nullptr);
    return doc;
}

CellScore cell_from_json(const json& doc) {
    CellScore c;
    c.pcm = require_number(doc, "pcm", "cell");
    c.pds = require_number(doc, "pds", "cell");
    c.pcs = require_number(doc, "pcs", "cell");
    c.pch = require_number(doc, "pch", "cell");
    c.name = require_number(doc, "name", "cell");
    const auto& active = require(doc, "active", "cell");
    c.pds_active = active.at("pds").get<bool>();
    c.pcs_active = active.at("pcs").get<bool>();
    c.pch_active = active.at("pch").get<bool>();
    if (doc.contains("pinned") && !doc.at("pinned").is_null())
        c.pinned = verdict_from_string(doc.at("pinned").get<std::string>());
    return c;
}

json matrix_to_json(const SimilarityMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(cell_to_json(m.at(i, j)));
        rows.push_back(std::move(row));
    }
    return {{"left_ids", m.left_ids},
            {"right_ids", m.right_ids},
            {"left_names", m.left_names},
            {"right_names", m.right_names},
            {"weights", weights_to_json(m.weights_used)},
            {"name_threshold", m.name_threshold},
            {"fact_digest", m.fact_digest},
            {"cells", rows}};
}

SimilarityMatrix matrix_from_json(const json& doc) {
    return guarded("matrix", [&] {
        SimilarityMatrix m;
        m.left_ids = strings(require(doc, "left_ids", "matrix"));
        m.right_ids = strings(require(doc, "right_ids", "matrix"));
        m.left_names = strings(require(doc, "left_names", "matrix"));
        m.right_names = strings(require(doc, "right_names", "matrix"));
        m.weights_used = weights_from_json(require(doc, "weights", "matrix"));
        m.name_threshold = require_number(doc, "name_threshold", "matrix");
        m.fact_digest = require_string(doc, "fact_digest", "matrix");
        const auto& rows = require(doc, "cells", "matrix");
        if (rows.size() != m.left_ids.size())
            throw Error(ErrorCode::schema_error, "matrix row count does not match its ids", "matrix");
        for (const auto& row : rows) {
            if (row.size() != m.right_ids.size())
                throw Error(ErrorCode::schema_error, "matrix column count does not match its ids", "matrix");
            for (const auto& c : row) m.cells.push_back(cell_from_json(c));
        }
        return m;
    });
}

json assumptions_to_json(const std::vector<Assumption>& assumptions) {
    json arr = json::array();
    for (const auto& a : assumptions)
        arr.push_back({{"rank", a.rank}, {"left", a.left}, {"right", a.right}, {"score", cell_to_json(a.score)}});
    return arr;
}

std::string assumptions_to_csv(const std::vector<Assumption>& assumptions) {
    std::string out = "rank,left,right,pcm,pds,pcs,pch\n";
    for (const auto& a : assumptions)
        out += std::to_string(a.rank) + "," + a.left + "," + a.right + "," + fixed(a.score.pcm, 4) + "," +
               fixed(a.score.pds, 4) + "," + fixed(a.score.pcs, 4) + "," + fixed(a.score.pch, 4) + "\n";
    return out;
}

json commonality_to_json(const CommonalityTable& table) {
    json rows = json::array();
    for (const auto& r : table.rows)
        rows.push_back({{"left", r.left ? json(*r.left) : json(nullptr)},
                        {"right", r.right ? json(*r.right) : json(nullptr)},
                        {"kind", std::string(to_string(r.kind))},
                        {"status", std::string(to_string(r.status))}});
    return {{"rows", rows}, {"pending_entities", table.pending_entities}, {"pending_pairs", table.pending_pairs}};
}

json expectation_to_json(const ExpectationReport& report) {
    auto pairs = [](const std::vector<IdPair>& ps) {
        json arr = json::array();
        for (const auto& [l, r] : ps) arr.push_back({{"left", l}, {"right", r}});
        return arr;
    };
    return {{"expected_pairs", pairs(report.expected_pairs)},
            {"weak_expected", pairs(report.weak_expected)},
            {"strong_unexpected", pairs(report.strong_unexpected)}};
}

json plan_to_json(const MergePlan& plan) {
    json common = json::array();
    for (const auto& g : plan.common_groups)
        common.push_back({{"left", g.left}, {"right", g.right}, {"name", g.merged_name}});
    json optional = json::array();
    for (const auto& c : plan.optional_candidates) {
        json item = ref_to_json(c.process);
        item["reason"] = std::string(to_string(c.reason));
        item["within"] = c.within_alternative ? json(*c.within_alternative) : json(nullptr);
        optional.push_back(std::move(item));
    }
    json alternative = json::array();
    for (const auto& g : plan.alternative_groups)
        alternative.push_back(
            {{"id", g.id}, {"left", g.left_members}, {"right", g.right_members}, {"purpose", g.purpose}});
    json exclusions = json::array();
    for (const auto& e : plan.exclusions) exclusions.push_back(ref_to_json(e));
    return {{"common", common},
            {"optional", optional},
            {"alternative", alternative},
            {"exclusions", exclusions},
            {"final", plan.final}};
}

MergePlan plan_from_json(const json& doc) {
    return guarded("plan", [&] {
        MergePlan plan;
        for (const auto& g : require(doc, "common", "plan"))
            plan.common_groups.push_back({require_string(g, "left", "common group"),
                                          require_string(g, "right", "common group"),
                                          optional_string(g, "name", "common group")});
        for (const auto& c : require(doc, "optional", "plan")) {
            OptionalCandidate oc{ref_from_json(c), optional_reason_from_string(require_string(c, "reason", "optional")),
                                 std::nullopt};
            if (c.contains("within") && !c.at("within").is_null()) oc.within_alternative = c.at("within").get<std::string>();
            plan.optional_candidates.push_back(std::move(oc));
        }
        for (const auto& g : require(doc, "alternative", "plan"))
            plan.alternative_groups.push_back({require_string(g, "id", "alternative group"),
                                               strings(require(g, "left", "alternative group")),
                                               strings(require(g, "right", "alternative group")),
                                               optional_string(g, "purpose", "alternative group")});
        if (doc.contains("exclusions"))
            for (const auto& e : doc.at("exclusions")) plan.exclusions.push_back(ref_from_json(e));
        plan.final = doc.value("final", false);
        return plan;
    });
}

std::vector<Annotation> annotations_from_json(const json& doc) {
    return guarded("annotations", [&] {
        if (!doc.is_array()) throw Error(ErrorCode::schema_error, "annotations must be a list", "annotations");
        std::vector<Annotation> out;
        for (const auto& a : doc)
            out.push_back({ref_from_json(a), a.value("skipped_but_important", false),
                           optional_string(a, "purpose", "annotation")});
        return out;
    });
}

Decision decision_from_json(const json& doc) {
    return guarded("decision", [&]() -> Decision {
        const auto kind = require_string(doc, "decision", "decision");
        if (kind == "accept") return Accept{};
        if (kind != "reassign")
            throw Error(ErrorCode::schema_error, "decision must be 'accept' or 'reassign'", kind);
        Reassign r{ref_from_json(doc), ToExcluded{}};
        const auto& to = require(doc, "to", "decision");
        const auto target = require_string(to, "kind", "decision target");
        if (target == "common") {
            r.to = ToCommon{require_string(to, "counterpart", "decision target"),
                            optional_string(to, "name", "decision target")};
        } else if (target == "optional") {
            ToOptional o;
            if (to.contains("reason")) o.reason = optional_reason_from_string(to.at("reason").get<std::string>());
            if (to.contains("within") && !to.at("within").is_null()) o.within_alternative = to.at("within").get<std::string>();
            r.to = o;
        } else if (target == "alternative") {
            r.to = ToAlternative{optional_string(to, "group", "decision target"),
                                 optional_string(to, "purpose", "decision target")};
        } else if (target == "excluded") {
            r.to = ToExcluded{};
        } else {
            throw Error(ErrorCode::schema_error, "unknown decision target '" + target + "'", target);
        }
        return r;
    });
}

std::vector<Decision> decisions_from_json(const json& doc) {
    if (!doc.is_array()) throw Error(ErrorCode::schema_error, "decisions must be a list", "decisions");
    std::vector<Decision> out;
    for (const auto& d : doc) out.push_back(decision_from_json(d));
    return out;
}

json session_to_json(const Session& s, const std::optional<MergePlan>& plan) {
    json facts = json::array();
    for (const auto& f : s.facts().facts()) facts.push_back(fact_to_json(f));
    json iterations = json::array();
    for (const auto& it : s.iterations())
        iterations.push_back({{"weights", weights_to_json(it.weights)},
                              {"fact_digest", it.fact_digest},
                              {"scope_left", it.scope_left},
                              {"scope_right", it.scope_right},
                              {"matrix", matrix_to_json(*it.matrix)}});
    return {{"id", s.id()},
            {"left", model_to_json(s.left())},
            {"right", model_to_json(s.right())},
            {"weights", weights_to_json(s.weights())},
            {"name_threshold", s.name_threshold()},
            {"facts", facts},
            {"next_fact", s.next_fact_number()},
            {"iterations", iterations},
            {"plan", plan ? plan_to_json(*plan) : json(nullptr)}};
}

SessionDocument session_from_json(const json& doc) {
    return guarded("session", [&] {
        auto load_model = [&](const char* key) {
            auto md = model_from_json(require(doc, key, "session"));
            if (!md.violations.empty())
                throw Error(ErrorCode::invalid_model, std::string(key) + " model: " + md.violations.front().message,
                            md.violations.front().entity);
            return std::make_shared<const ProcessModel>(std::move(md.model));
        };
        auto left = load_model("left");
        auto right = load_model("right");
        FactSet facts;
        std::size_t highest = 0;
        for (const auto& f : require(doc, "facts", "session")) {
            Fact fact = fact_from_json(f);
            if (fact.id.size() > 1 && fact.id[0] == 'f') {
                std::size_t n = 0;
                auto [p, ec] = std::from_chars(fact.id.data() + 1, fact.id.data() + fact.id.size(), n);
                if (ec == std::errc{} && p == fact.id.data() + fact.id.size()) highest = std::max(highest, n);
            }
            if (!facts.insert(fact))
                throw Error(ErrorCode::duplicate_fact, "session document repeats a fact pair", fact.id);
        }
        std::vector<Iteration> iterations;
        for (const auto& it : require(doc, "iterations", "session")) {
            auto matrix = std::make_shared<const SimilarityMatrix>(matrix_from_json(require(it, "matrix", "iteration")));
            iterations.push_back({weights_from_json(require(it, "weights", "iteration")),
                                  require_string(it, "fact_digest", "iteration"),
                                  strings(require(it, "scope_left", "iteration")),
                                  strings(require(it, "scope_right", "iteration")), matrix});
        }
        std::size_t next = doc.value("next_fact", highest + 1);
        Session session = Session::restore(require_string(doc, "id", "session"), left, right,
                                           weights_from_json(require(doc, "weights", "session")),
                                           doc.value("name_threshold", 0.9), std::move(facts), std::move(iterations),
                                           std::max(next, highest + 1));
        std::optional<MergePlan> plan;
        if (doc.contains("plan") && !doc.at("plan").is_null()) plan = plan_from_json(doc.at("plan"));
        return SessionDocument{std::move(session), std::move(plan)};
    });
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read '" + path + "'", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'", path);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'", path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot write '" + path + "': " + ec.message(), path);
}

} // namespace procmatch::io
