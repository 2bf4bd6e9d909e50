#include "procmatch/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "procmatch/service.hpp"
#include "procmatch/session_io.hpp"

namespace procmatch {

namespace {

// Raised for failures that map to exit_usage rather than exit_domain.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, std::string_view content) {
    try {
        io::write_file(path, content);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

std::string violation_line(const Violation& v) { return v.entity + ": " + v.rule + ": " + v.message; }

int cmd_validate(const std::string& path, std::ostream& out) {
    const auto text = read_input(path);
    std::vector<Violation> violations;
    try {
        auto doc = read_model_document(text);
        violations = doc.violations;
        for (auto& v : validate_model(doc.model)) violations.push_back(std::move(v));
    } catch (const Error& e) {
        out << e.what() << '\n';
        return exit_domain;
    }
    for (const auto& v : violations) out << violation_line(v) << '\n';
    return violations.empty() ? exit_ok : exit_domain;
}

struct CompareOptions {
    std::string left;
    std::string right;
    Weights weights;
    double name_threshold = 0.9;
    std::string facts;
    std::string scope = "processes";
    std::string out;
    std::string assumptions;
    std::string session_out;
    std::string report;
};

int cmd_compare(const CompareOptions& o, std::ostream& out) {
    if (!o.weights.is_valid()) throw UsageError("weights must be non-negative and sum to 1");
    if (!(o.name_threshold >= 0.0 && o.name_threshold <= 1.0))
        throw UsageError("--name-threshold must lie in [0, 1]");
    Scope scope;
    try {
        scope = scope_from_string(o.scope);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    auto left = std::make_shared<const ProcessModel>(parse_model(read_input(o.left)));
    auto right = std::make_shared<const ProcessModel>(parse_model(read_input(o.right)));
    Session session("cli", left, right, o.weights, o.name_threshold);
    if (!o.facts.empty()) io::apply_facts(session, io::read_facts_file(read_input(o.facts)));
    auto result = session.recompute(scope);

    if (!o.out.empty()) write_output(o.out, export_heatmap(*result.matrix));
    const auto listing = io::assumptions_to_csv(result.assumptions);
    if (o.assumptions.empty())
        out << listing;
    else
        write_output(o.assumptions, listing);
    if (!o.session_out.empty()) write_output(o.session_out, io::dump(io::session_to_json(session)));
    if (!o.report.empty()) {
        auto pairs = diagonal_pairs(*result.matrix);
        write_output(o.report, io::dump(io::expectation_to_json(expectation_report(*result.matrix, pairs))));
    }
    return exit_ok;
}

struct MergeOptions {
    std::string session;
    std::string annotations;
    std::string decisions;
    std::string out;
};

int cmd_merge(const MergeOptions& o, std::ostream& out, std::ostream& err) {
    auto doc = io::session_from_json(io::parse_json(read_input(o.session)));
    auto& session = doc.session;
    if (session.facts().facts().empty()) {
        err << "nothing to merge: the session has no facts\n";
        return exit_domain;
    }
    if (session.iterations().empty()) session.recompute(Scope::processes);

    auto annotations = io::annotations_from_json(io::parse_json(read_input(o.annotations)));
    auto plan = propose_plan(session, annotations);
    if (!o.decisions.empty())
        for (const auto& d : io::decisions_from_json(io::parse_json(read_input(o.decisions))))
            plan = decide(session, std::move(plan), d);

    if (auto missing = unaccounted(session, plan); !missing.empty()) {
        err << "unaccounted processes:\n";
        for (const auto& p : missing) err << "  " << to_string(p) << '\n';
        return exit_domain;
    }
    if (!plan.final) plan = decide(session, std::move(plan), Accept{});

    auto ref = build_reference_model(session, plan);
    write_output(o.out, serialize_reference_model(ref));

    const auto a = account(ref, session.left(), session.right());
    std::size_t opt = 0, alt = 0;
    for (const auto& box : ref.boxes) (box.kind == BoxKind::OPT ? opt : alt)++;
    out << "left processes:  " << a.left_processes << '\n'
        << "right processes: " << a.right_processes << '\n'
        << "common pairs:    " << a.common_pairs << '\n'
        << "box members:     " << a.box_members << '\n'
        << "exclusions:      " << a.exclusions << '\n'
        << "OPT boxes:       " << opt << '\n'
        << "ALT boxes:       " << alt << '\n'
        << "balanced:        " << (a.balanced() ? "yes" : "no") << '\n';
    return a.balanced() ? exit_ok : exit_domain;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Compare software process models and merge them into a reference model", "procmatch"};
    app.require_subcommand(1);

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a model document");
    validate->add_option("path", validate_path, "Model document")->required();

    CompareOptions co;
    double w_pds = 1.0 / 3.0, w_pcs = 1.0 / 3.0, w_pch = 1.0 / 3.0;
    auto* compare = app.add_subcommand("compare", "Compute the similarity matrix of two models");
    compare->add_option("left", co.left, "Left model document")->required();
    compare->add_option("right", co.right, "Right model document")->required();
    compare->add_option("--w-pds", w_pds, "Weight of the product-structure rule");
    compare->add_option("--w-pcs", w_pcs, "Weight of the sub-process-structure rule");
    compare->add_option("--w-pch", w_pch, "Weight of the hierarchy-name rule");
    compare->add_option("--name-threshold", co.name_threshold, "Name similarity needed for a structural match");
    compare->add_option("--facts", co.facts, "Facts file");
    compare->add_option("--scope", co.scope, "phases or processes")->check(CLI::IsMember({"phases", "processes"}));
    compare->add_option("--out", co.out, "Heatmap CSV output");
    compare->add_option("--assumptions", co.assumptions, "Assumption listing output (default: stdout)");
    compare->add_option("--session-out", co.session_out, "Session document output");
    compare->add_option("--report", co.report, "Expectation report output (diagonal pairs)");

    MergeOptions mo;
    auto* merge = app.add_subcommand("merge", "Build a reference model from a session");
    merge->add_option("session", mo.session, "Session document")->required();
    merge->add_option("annotations", mo.annotations, "Annotations file")->required();
    merge->add_option("--decisions", mo.decisions, "Plan decisions file");
    merge->add_option("--out", mo.out, "Reference document output")->required();

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string store;
    auto* srv = app.add_subcommand("serve", "Run the HTTP service");
    srv->add_option("--host", host, "Bind address");
    srv->add_option("--port", port, "Port")->check(CLI::Range(0, 65535));
    srv->add_option("--store", store, "Store directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*validate) return cmd_validate(validate_path, out);
        if (*compare) {
            co.weights = Weights{w_pds, w_pcs, w_pch};
            return cmd_compare(co, out);
        }
        if (*merge) return cmd_merge(mo, out, err);
        if (*srv) {
            serve(host, port, store);
            return exit_ok;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return e.code() == ErrorCode::io_error ? exit_usage : exit_domain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain;
    }
    return exit_usage;
}

} // namespace procmatch
