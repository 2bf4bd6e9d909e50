// Acceptance gate. Each criterion prints one PASS/FAIL line with its runtime;
// the exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "../oracles.hpp"
#include "../service_harness.hpp"
#include "../support.hpp"
#include "procmatch/reference.hpp"
#include "procmatch/session_io.hpp"
#include "procmatch/similarity.hpp"
#include "procmatch/text.hpp"

using namespace procmatch;
using io::json;
using testing::ModelBuilder;
namespace fs = std::filesystem;

namespace {

// Collects failures of one criterion; the first few are reported.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
    }
    bool ok() const { return failures_ == 0; }
    std::string summary() const {
        return failures_ <= 3 ? notes_ : notes_ + "; ... " + std::to_string(failures_) + " failures";
    }

private:
    std::size_t failures_ = 0;
    std::string notes_;
};

struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<void(Check&)> body;
};

template <class T>
std::string str(const T& v) {
    std::ostringstream o;
    o << v;
    return o.str();
}

fs::path scratch_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("procmatch-acc-" + tag + "-" + std::to_string(std::random_device{}()));
    fs::create_directories(p);
    return p;
}

std::shared_ptr<const ProcessModel> lifecycle_left() { return testing::load_model("lifecycle_pilot1.json"); }
std::shared_ptr<const ProcessModel> lifecycle_right() { return testing::load_model("lifecycle_pilot2.json"); }

std::vector<io::FactInput> facts_fixture(const std::string& name) {
    return io::read_facts_file(testing::read_fixture(name));
}

// ---------------------------------------------------------------------------

void worked_examples(Check& c) {
    c.expect(levenshtein("test", "test") == 0, "LD(test,test) != 0");
    c.expect(levenshtein("test", "tent") == 1, "LD(test,tent) != 1");

    auto left = ModelBuilder("L")
                    .product("a", "alpha")
                    .product("b", "beta")
                    .product("c", "gamma")
                    .process("p1", "p one", {}, {"a", "b", "c"})
                    .finish();
    auto right = ModelBuilder("R")
                     .product("d", "delta")
                     .product("e", "epsilon")
                     .product("f", "beta")
                     .process("p2", "p two", {}, {"d", "e", "f"})
                     .finish();
    std::vector<Id> A{"a", "b", "c"}, B{"d", "e", "f"};
    auto sc = structure_compatibility_ratio(A, B, MatchPolicy{}, product_names(left), product_names(right));
    c.expect(sc.numerator == 1 && sc.denominator == 3,
             "SC = " + str(sc.numerator) + "/" + str(sc.denominator));
    auto pd = pds_ratio(left, "p1", right, "p2", MatchPolicy{});
    c.expect(pd.numerator == 1 && pd.denominator == 3, "PdS != 1/3");

    auto sl = ModelBuilder("L")
                  .process("p1", "p1", {"s1", "s2", "s3"})
                  .process("s1", "alpha")
                  .process("s2", "beta")
                  .process("s3", "gamma")
                  .finish();
    auto sr = ModelBuilder("R")
                  .process("p2", "p2", {"t1", "t2", "t3"})
                  .process("t1", "delta")
                  .process("t2", "epsilon")
                  .process("t3", "beta")
                  .finish();
    auto ps = pcs_ratio(sl, "p1", sr, "p2", MatchPolicy{});
    c.expect(ps.numerator == 1 && ps.denominator == 3, "PcS != 1/3");

    auto hl = ModelBuilder("L")
                  .process("p1", "p1", {"w", "i", "r"})
                  .process("w", "write test cases")
                  .process("i", "implement test cases")
                  .process("r", "run test cases")
                  .finish();
    auto hr = ModelBuilder("R")
                  .process("p2", "p2", {"k", "r"})
                  .process("k", "code test cases")
                  .process("r", "run test cases")
                  .finish();
    c.expect(pch(hl, "p1", hr, "p2", MatchPolicy{}) == 1.0, "PcH != 1");

    // PcM equation on a pair where all three rules are active.
    auto ml = ModelBuilder("L")
                  .product("a", "spec")
                  .product("b", "code")
                  .process("p", "build", {"x1", "x2"}, {"a", "b"})
                  .process("x1", "compile sources")
                  .process("x2", "link binaries")
                  .finish();
    auto mr = ModelBuilder("R")
                  .product("u", "spec")
                  .product("v", "manual")
                  .product("w", "binary")
                  .process("q", "assemble", {"y1"}, {"u", "v", "w"})
                  .process("y1", "compile source")
                  .finish();
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 1000) {
        double a = u(rng), b = u(rng);
        if (a + b > 1.0) continue;
        Weights w{a, b, 1.0 - a - b};
        if (!w.is_valid()) continue;
        auto cell = pcm(ml, "p", mr, "q", w, MatchPolicy{});
        const double want = w.pds * cell.pds + w.pcs * cell.pcs + w.pch * cell.pch;
        c.expect(cell.pds_active && cell.pcs_active && cell.pch_active, "rule unexpectedly inactive");
        c.expect(std::abs(cell.pcm - want) <= 1e-9, "PcM differs from weighted sum by " + str(cell.pcm - want));
        ++checked;
    }
    for (const Weights& w : {Weights{1, 0, 0}, Weights{0, 1, 0}, Weights{0, 0, 1}}) {
        auto cell = pcm(ml, "p", mr, "q", w, MatchPolicy{});
        c.expect(std::abs(cell.pcm - (w.pds * cell.pds + w.pcs * cell.pcs + w.pch * cell.pch)) <= 1e-9,
                 "corner weights");
    }
}

void metric_laws(Check& c) {
    oracle::EditGraph graph("abc", 4);
    const auto& words = graph.nodes();
    const std::size_t n = words.size();
    std::vector<std::vector<std::size_t>> ld(n, std::vector<std::size_t>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            ld[i][j] = levenshtein(words[i], words[j]);
            c.expect(ld[i][j] == static_cast<std::size_t>(graph.distance(i, j)),
                     "LD(" + words[i] + "," + words[j] + ") = " + str(ld[i][j]) + ", paths say " +
                         str(graph.distance(i, j)));
            c.expect((ld[i][j] == 0) == (i == j), "identity at " + words[i] + "," + words[j]);
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            c.expect(ld[i][j] == ld[j][i], "symmetry at " + words[i] + "," + words[j]);
            for (std::size_t k = 0; k < n; ++k)
                if (ld[i][k] > ld[i][j] + ld[j][k]) c.expect(false, "triangle at " + words[i] + "," + words[j] + "," + words[k]);
        }
    c.expect(n * n >= 14000, "pair space too small: " + str(n * n));
}

void sc_oracle(Check& c) {
    std::mt19937 rng(2024);
    const char* vocabulary[] = {"plan", "plans", "test", "tests", "code", "review", "design", "build"};
    for (int round = 0; round < 500; ++round) {
        const std::size_t na = rng() % 6, nb = rng() % 6;
        ModelBuilder lb("L"), rb("R");
        std::vector<Id> A, B;
        std::vector<std::string> an, bn;
        for (std::size_t i = 0; i < na; ++i) {
            an.push_back(vocabulary[rng() % 8]);
            A.push_back("a" + str(i));
            lb.product(A.back(), an.back());
        }
        for (std::size_t j = 0; j < nb; ++j) {
            bn.push_back(vocabulary[rng() % 8]);
            B.push_back("b" + str(j));
            rb.product(B.back(), bn.back());
        }
        // random facts on about half the pairs
        auto facts = std::make_shared<FactSet>();
        std::vector<std::vector<int>> verdict(na, std::vector<int>(nb, -1));
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < nb; ++j)
                if (rng() % 2) {
                    verdict[i][j] = static_cast<int>(rng() % 2);
                    facts->insert({"f", A[i], B[j], EntityKind::product,
                                   verdict[i][j] ? Verdict::equal : Verdict::different, "", ""});
                }
        const double theta = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
        auto lm = lb.finish(), rm = rb.finish();
        MatchPolicy policy{theta, facts};
        auto got = structure_compatibility_ratio(A, B, policy, product_names(lm), product_names(rm));

        auto edge = [&](std::size_t i, std::size_t j) {
            if (verdict[i][j] >= 0) return verdict[i][j] == 1;
            std::u32string s(an[i].begin(), an[i].end()), t(bn[j].begin(), bn[j].end());
            const std::size_t longest = std::max(s.size(), t.size());
            const double sim = longest == 0 ? 1.0 : 1.0 - double(oracle::table_distance(s, t)) / double(longest);
            return sim + 1e-12 >= theta;
        };
        const std::size_t m = oracle::max_matching(na, nb, edge);
        const std::size_t denom = std::max<std::size_t>({na, nb, 1});
        const std::size_t want_num = (na == 0 && nb == 0) ? 1 : m;
        c.expect(got.numerator == want_num && got.denominator == denom,
                 "round " + str(round) + ": " + str(got.numerator) + "/" + str(got.denominator) + " vs " +
                     str(want_num) + "/" + str(denom));
    }
}

void fact_monotonicity(Check& c) {
    std::mt19937 rng(99);
    std::size_t comparisons = 0;
    for (int fixture = 0; fixture < 100; ++fixture) {
        auto left = testing::random_model(rng, "L", 5, 6);
        auto right = testing::random_model(rng, "R", 5, 6);
        auto base = std::make_shared<FactSet>();
        std::vector<std::pair<Id, Id>> open;
        auto consider = [&](const Id& l, const Id& r, EntityKind kind) {
            if (rng() % 5 == 0)
                base->insert({"f", l, r, kind, rng() % 2 ? Verdict::equal : Verdict::different, "", ""});
            else
                open.emplace_back(l, r);
        };
        for (const auto& [l, _] : left.processes)
            for (const auto& [r, _r] : right.processes) consider(l, r, EntityKind::process);
        for (const auto& [l, _] : left.products)
            for (const auto& [r, _r] : right.products) consider(l, r, EntityKind::product);

        auto ratios = [&](const std::shared_ptr<FactSet>& facts) {
            MatchPolicy pol{0.9, facts};
            std::vector<Fraction> out;
            for (const auto& [p, _] : left.processes)
                for (const auto& [q, _q] : right.processes) {
                    out.push_back(pds_ratio(left, p, right, q, pol));
                    out.push_back(pcs_ratio(left, p, right, q, pol));
                }
            return out;
        };
        const auto before = ratios(base);
        for (const auto& [l, r] : open)
            for (Verdict v : {Verdict::equal, Verdict::different}) {
                auto more = std::make_shared<FactSet>(*base);
                more->insert({"n", l, r, left.has_process(l) ? EntityKind::process : EntityKind::product, v, "", ""});
                const auto after = ratios(more);
                for (std::size_t k = 0; k < before.size(); ++k) {
                    const auto lhs = before[k].numerator * after[k].denominator;
                    const auto rhs = after[k].numerator * before[k].denominator;
                    const bool ok = v == Verdict::equal ? rhs >= lhs : rhs <= lhs;
                    c.expect(ok, "fixture " + str(fixture) + ": fact (" + l + "," + r + ") moved a ratio the wrong way");
                    ++comparisons;
                }
            }
    }
    c.expect(comparisons > 10000, "only " + str(comparisons) + " comparisons");
}

void iteration_loop(Check& c) {
    Session s("s", lifecycle_left(), lifecycle_right());
    io::apply_facts(s, facts_fixture("lifecycle_product_facts.json"));
    s.establish_fact("elicit", "gather", Verdict::equal);
    s.establish_fact("documenting", "plan_tests", Verdict::different);
    s.establish_fact("testing", "testing", Verdict::equal);

    for (Scope scope : {Scope::processes, Scope::phases}) {
        for (int step = 0; step < 3; ++step) {
            auto res = s.recompute(scope);
            const auto& m = *res.matrix;
            std::set<std::pair<Id, Id>> assumed;
            for (const auto& a : res.assumptions) {
                c.expect(assumed.emplace(a.left, a.right).second, "duplicate assumption");
                c.expect(!s.facts().contains_pair(a.left, a.right), "assumption on a fact pair");
            }
            std::size_t covered = 0;
            for (const auto& l : m.left_ids)
                for (const auto& r : m.right_ids) {
                    const bool fact = s.facts().contains_pair(l, r);
                    const bool assumption = assumed.contains({l, r});
                    c.expect(fact != assumption, "pair (" + l + "," + r + ") not partitioned");
                    covered += fact || assumption;
                }
            c.expect(covered == m.rows() * m.cols(), "partition does not cover the scope");
            auto again = s.recompute(scope);
            c.expect(*again.matrix == m, "recompute not idempotent");
            c.expect(again.assumptions == res.assumptions, "assumptions not idempotent");
            if (step == 0) s.establish_fact("specify", "specify", Verdict::equal);
            if (step == 1) s.establish_fact("release", "release", Verdict::different);
        }
        s.retract_fact(s.facts().find_pair("specify", "specify")->id);
        s.retract_fact(s.facts().find_pair("release", "release")->id);
    }

    // history is append-only
    const auto snapshot = s.iterations();
    s.recompute(Scope::processes);
    for (std::size_t i = 0; i < snapshot.size(); ++i)
        c.expect(s.iterations()[i].matrix == snapshot[i].matrix && s.iterations()[i].weights == snapshot[i].weights,
                 "iteration " + str(i) + " changed");

    // weight identity on both fixture pairs at both scopes
    std::vector<std::pair<std::shared_ptr<const ProcessModel>, std::shared_ptr<const ProcessModel>>> pairs{
        {lifecycle_left(), lifecycle_right()},
        {testing::load_model("test_acceptance_pilot1.json"), testing::load_model("test_acceptance_pilot2.json")}};
    for (const auto& [l, r] : pairs)
        for (int rule = 0; rule < 3; ++rule) {
            Weights w{rule == 0 ? 1.0 : 0.0, rule == 1 ? 1.0 : 0.0, rule == 2 ? 1.0 : 0.0};
            Session t("t", l, r, w);
            for (Scope scope : {Scope::processes, Scope::phases})
                for (const auto& cell : t.recompute(scope).matrix->cells) {
                    const double want = rule == 0 ? cell.pds : rule == 1 ? cell.pcs : cell.pch;
                    c.expect(cell.pcm == want, "unit weight " + str(rule) + " gives " + str(cell.pcm) + " vs " + str(want));
                }
        }
}

void lifecycle_fixture(Check& c) {
    auto t0 = std::chrono::steady_clock::now();
    Session s("s", lifecycle_left(), lifecycle_right(), Weights{0.8, 0.1, 0.1});
    io::apply_facts(s, facts_fixture("lifecycle_product_facts.json"));
    auto phases = s.recompute(Scope::phases).matrix;
    c.expect(phases->left_ids == std::vector<Id>{"requirements", "development", "testing"}, "left phase order");
    c.expect(phases->right_ids == std::vector<Id>{"requirements", "coding", "testing"}, "right phase order");
    auto pairs = diagonal_pairs(*phases);
    auto report = expectation_report(*phases, pairs);
    const IdPair dev{"development", "coding"}, cross{"requirements", "testing"};
    c.expect(std::find(report.weak_expected.begin(), report.weak_expected.end(), dev) != report.weak_expected.end(),
             "development/coding not flagged weak");
    c.expect(std::find(report.strong_unexpected.begin(), report.strong_unexpected.end(), cross) !=
                 report.strong_unexpected.end(),
             "requirements/testing not flagged strong-unexpected");
    c.expect(export_heatmap(*phases) == io::read_file(testing::golden_path("lifecycle_phases.csv")),
             "phase heatmap differs from golden");
    c.expect(io::assumptions_to_csv(rank_assumptions(*phases)) ==
                 io::read_file(testing::golden_path("lifecycle_phases_assumptions.csv")),
             "phase assumptions differ from golden");
    c.expect(io::dump(io::expectation_to_json(report)) ==
                 io::read_file(testing::golden_path("lifecycle_phases_report.json")),
             "report differs from golden");

    s.set_weights(Weights{1, 0, 0});
    auto procs = s.recompute(Scope::processes).matrix;
    c.expect(procs->rows() == 10 && procs->cols() == 12, "process matrix is " + str(procs->rows()) + "x" + str(procs->cols()));
    c.expect(export_heatmap(*procs) == io::read_file(testing::golden_path("lifecycle_processes.csv")),
             "process heatmap differs from golden");
    c.expect(io::assumptions_to_csv(rank_assumptions(*procs)) ==
                 io::read_file(testing::golden_path("lifecycle_processes_assumptions.csv")),
             "process assumptions differ from golden");
    const double fixture_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(fixture_seconds < 1.0, "fixture took " + str(fixture_seconds) + " s");

    // 50 x 50 processes, three levels deep
    auto big = [](const Id& id, unsigned seed) {
        std::mt19937 rng(seed);
        const char* words[] = {"plan", "test", "code", "review", "design", "build", "release", "specify"};
        ModelBuilder b(id);
        for (int i = 0; i < 40; ++i) b.product("d" + str(i), std::string(words[rng() % 8]) + " doc " + str(i % 7));
        auto prods = [&] {
            std::vector<Id> out;
            for (int k = 0; k < 6; ++k) out.push_back("d" + str(rng() % 40));
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
        };
        std::vector<Id> roots;
        for (int r = 0; r < 5; ++r) {
            std::vector<Id> kids;
            for (int k = 0; k < 9; ++k) {
                const Id kid = "p" + str(r) + "_" + str(k);
                kids.push_back(kid);
                std::vector<Id> grand;
                if (k % 3 == 0)
                    for (int g = 0; g < 2; ++g) {
                        grand.push_back(kid + "_" + str(g));
                        b.process(grand.back(), std::string(words[rng() % 8]) + " step " + str(g), {}, prods());
                    }
                b.process(kid, std::string(words[rng() % 8]) + " " + words[rng() % 8], grand, prods());
            }
            b.process("r" + str(r), std::string("phase ") + words[r], kids, prods());
        }
        return b.finish();
    };
    auto L = big("L", 5), R = big("R", 6);
    std::vector<Id> ls, rs;
    for (const auto& [id, p] : L.processes)
        if (id[0] == 'p' && ls.size() < 50) ls.push_back(id);
    for (const auto& [id, p] : R.processes)
        if (id[0] == 'p' && rs.size() < 50) rs.push_back(id);
    c.expect(validate_model(L).empty() && validate_model(R).empty(), "generated models invalid");
    c.expect(ls.size() == 50 && rs.size() == 50, "scope sizes " + str(ls.size()) + "x" + str(rs.size()));
    auto t1 = std::chrono::steady_clock::now();
    auto m = compute_matrix(L, R, ls, rs, Weights{}, MatchPolicy{});
    const double big_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
    c.expect(m.cells.size() == 2500, "50x50 matrix incomplete");
    c.expect(big_seconds < 1.0, "50x50 matrix took " + str(big_seconds) + " s");
}

void reference_totality(Check& c) {
    Session s("s", lifecycle_left(), lifecycle_right());
    io::apply_facts(s, facts_fixture("lifecycle_merge_facts.json"));
    s.recompute(Scope::processes);
    auto plan = propose_plan(s, io::annotations_from_json(io::parse_json(testing::read_fixture("lifecycle_annotations.json"))));
    for (const auto& d : io::decisions_from_json(io::parse_json(testing::read_fixture("lifecycle_decisions.json"))))
        plan = decide(s, std::move(plan), d);
    c.expect(plan.final, "plan not final");
    auto ref = build_reference_model(s, plan);

    // every source process exactly once: merged base, box, or exclusion
    std::map<std::pair<Side, Id>, int> seen;
    for (const auto& e : ref.provenance)
        if (e.kind == EntityKind::process)
            for (const auto& src : e.sources) ++seen[{src.side, src.entity}];
    for (const auto& x : ref.exclusions) ++seen[{x.side, x.entity}];
    for (Side side : {Side::left, Side::right})
        for (const auto& [id, _] : (side == Side::left ? s.left() : s.right()).processes)
            c.expect(seen[{side, id}] == 1,
                     std::string(to_string(side)) + ":" + id + " accounted " + str(seen[{side, id}]) + " times");
    auto a = account(ref, s.left(), s.right());
    c.expect(a.balanced(), "accounting unbalanced");
    c.expect(a.common_pairs == 11 && a.box_members == 5 && a.exclusions == 1, "unexpected accounting split");
    c.expect(accounting_problems(ref, s.left(), s.right()).empty(), "accounting problems reported");
    c.expect(validate_reference_model(ref).empty(), "reference model invalid");

    // OPT box for the planning processes pilot 1 lacks
    std::size_t top_opt = 0;
    bool plan_tests_boxed = false, nested = false;
    for (const auto& b : ref.boxes) {
        if (b.kind == BoxKind::OPT) {
            ++top_opt;
            plan_tests_boxed |= std::find(b.members.begin(), b.members.end(), "right:plan_tests") != b.members.end();
        }
        if (b.kind == BoxKind::ALT)
            for (const auto& n : b.nested)
                nested |= n.kind == BoxKind::OPT &&
                          std::find(n.members.begin(), n.members.end(), "left:documenting") != n.members.end();
    }
    c.expect(top_opt == 1, str(top_opt) + " top-level OPT boxes");
    c.expect(plan_tests_boxed, "plan tests not in an OPT box");
    c.expect(nested, "documenting not nested as OPT inside ALT");

    auto text = serialize_reference_model(ref);
    auto back = parse_reference_model(text);
    c.expect(back == ref, "reference document does not round-trip");
    c.expect(serialize_reference_model(back) == text, "re-serialization differs");
}

// round-trippable decimal for command lines
std::string exact(double v) {
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
}

int run_cli_binary(const std::string& args) {
    const std::string cmd = std::string("\"") + PROCMATCH_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void cli_service_equivalence(Check& c) {
    auto dir = scratch_dir("eq");
    const auto L = testing::fixture_path("lifecycle_pilot1.json");
    const auto R = testing::fixture_path("lifecycle_pilot2.json");
    const auto F = testing::fixture_path("lifecycle_product_facts.json");
    struct Variant {
        std::string scope;
        Weights w;
    };
    for (const auto& v : {Variant{"processes", Weights{}}, Variant{"phases", Weights{0.8, 0.1, 0.1}},
                          Variant{"processes", Weights{1, 0, 0}}}) {
        const std::string tag = v.scope + "-" + str(v.w.pds);
        const std::string flags = "--w-pds " + exact(v.w.pds) + " --w-pcs " + exact(v.w.pcs) + " --w-pch " + exact(v.w.pch) +
                                  " --scope " + v.scope + " --facts \"" + F + "\"";
        const auto out1 = (dir / (tag + "-1.csv")).string(), out2 = (dir / (tag + "-2.csv")).string();
        const auto ses1 = (dir / (tag + "-1.json")).string(), ses2 = (dir / (tag + "-2.json")).string();
        c.expect(run_cli_binary("compare \"" + L + "\" \"" + R + "\" " + flags + " --out \"" + out1 +
                                "\" --session-out \"" + ses1 + "\"") == 0,
                 "cli compare failed");
        c.expect(run_cli_binary("compare \"" + L + "\" \"" + R + "\" " + flags + " --out \"" + out2 +
                                "\" --session-out \"" + ses2 + "\"") == 0,
                 "cli compare failed");
        c.expect(io::read_file(out1) == io::read_file(out2), "cli heatmaps differ between runs");
        auto cli_session = io::session_from_json(io::parse_json(io::read_file(ses1)));
        auto cli_matrix = cli_session.session.latest_matrix();

        testing::LiveService svc;
        svc.post_text("/models", testing::read_fixture("lifecycle_pilot1.json"));
        svc.post_text("/models", testing::read_fixture("lifecycle_pilot2.json"));
        const std::string sid =
            svc.json_of(svc.post("/sessions", {{"left", "pilot1"}, {"right", "pilot2"}, {"weights", io::weights_to_json(v.w)}}))
                .at("id");
        for (const auto& f : io::parse_json(testing::read_fixture("lifecycle_product_facts.json")))
            svc.post("/sessions/" + sid + "/facts", f);
        svc.post("/sessions/" + sid + "/recompute?scope=" + v.scope, json::object());
        auto served = io::matrix_from_json(svc.json_of(svc.get("/sessions/" + sid + "/matrix")));
        c.expect(cli_matrix && served == *cli_matrix, "matrices differ for " + tag);
        c.expect(svc.get("/sessions/" + sid + "/matrix?format=csv")->body == io::read_file(out1),
                 "heatmap csv differs for " + tag);
    }
    fs::remove_all(dir);
}

void persistence_round_trip(Check& c) {
    auto dir = scratch_dir("store");
    std::string sid;
    json summary, matrix, plan, assumptions;
    std::string saved;
    {
        testing::LiveService svc(dir);
        svc.post_text("/models", testing::read_fixture("lifecycle_pilot1.json"));
        svc.post_text("/models", testing::read_fixture("lifecycle_pilot2.json"));
        sid = svc.json_of(svc.post("/sessions", {{"left", "pilot1"}, {"right", "pilot2"}})).at("id");
        for (const auto& f : io::parse_json(testing::read_fixture("lifecycle_merge_facts.json")))
            svc.post("/sessions/" + sid + "/facts", f);
        svc.post("/sessions/" + sid + "/recompute?scope=phases", json::object());
        svc.put("/sessions/" + sid + "/weights", {{"pds", 1}, {"pcs", 0}, {"pch", 0}});
        svc.post("/sessions/" + sid + "/recompute", json::object());
        svc.post("/sessions/" + sid + "/merge-plan",
                 {{"annotations", io::parse_json(testing::read_fixture("lifecycle_annotations.json"))}});
        summary = svc.json_of(svc.get("/sessions/" + sid));
        matrix = svc.json_of(svc.get("/sessions/" + sid + "/matrix"));
        plan = svc.json_of(svc.get("/sessions/" + sid + "/merge-plan"));
        assumptions = svc.json_of(svc.get("/sessions/" + sid + "/assumptions"));
        saved = io::read_file((dir / "sessions" / (sid + ".json")).string());
    }
    {
        testing::LiveService svc(dir);
        c.expect(svc.json_of(svc.get("/sessions/" + sid)) == summary, "session summary changed across restart");
        c.expect(svc.json_of(svc.get("/sessions/" + sid + "/matrix")) == matrix, "matrix changed across restart");
        c.expect(svc.json_of(svc.get("/sessions/" + sid + "/merge-plan")) == plan, "plan changed across restart");
        c.expect(svc.json_of(svc.get("/sessions/" + sid + "/assumptions")) == assumptions, "assumptions changed");
        c.expect(summary.at("iterations").size() == 2, "history length");
        c.expect(summary.at("facts").size() == io::parse_json(testing::read_fixture("lifecycle_merge_facts.json")).size(),
                 "fact count");
    }
    // the store rewrites an unchanged session byte for byte
    SessionStore store(dir);
    auto snap = store.snapshot(sid);
    c.expect(io::dump(io::session_to_json(snap->session, snap->plan)) == saved, "store reload not lossless");
    fs::remove_all(dir);
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"worked examples (LD, SC 1/3, PcH 1, PdS 1/3, PcM weighted sum)", 0.5, worked_examples},
        {"edit distance metric laws vs edit-path oracle, {a,b,c}^<=4", 10.0, metric_laws},
        {"structure compatibility vs enumerated matching, 500 cases", 5.0, sc_oracle},
        {"fact monotonicity of SC/PdS/PcS, 100 fixtures", 30.0, fact_monotonicity},
        {"iteration loop: partition, idempotence, weight identity", 5.0, iteration_loop},
        {"lifecycle fixture: expectation flags, goldens, 10x12 and 50x50 timing", 2.0, lifecycle_fixture},
        {"reference builder totality, OPT/ALT nesting, round-trip", 2.0, reference_totality},
        {"CLI/service equivalence and CLI determinism", 20.0, cli_service_equivalence},
        {"service persistence round-trip across restart", 20.0, persistence_round_trip},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Check check;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.body(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > cr.budget_seconds) check.expect(false, "runtime " + str(secs) + " s over budget " + str(cr.budget_seconds) + " s");
        std::cout << (check.ok() ? "PASS " : "FAIL ") << cr.name << " [" << std::fixed << std::setprecision(3) << secs
                  << " s]";
        if (!check.ok()) std::cout << " :: " << check.summary();
        std::cout << '\n';
        failed += !check.ok();
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
