#include <doctest.h>

#include <filesystem>

#include "../service_harness.hpp"
#include "../support.hpp"

using namespace procmatch;
using io::json;
using testing::LiveService;

namespace {

Id setup_session(LiveService& svc) {
    REQUIRE(svc.post_text("/models", testing::read_fixture("lifecycle_pilot1.json"))->status == 201);
    REQUIRE(svc.post_text("/models", testing::read_fixture("lifecycle_pilot2.json"))->status == 201);
    auto r = svc.post("/sessions", {{"left", "pilot1"}, {"right", "pilot2"}});
    REQUIRE(r->status == 201);
    return svc.json_of(r).at("id");
}

std::string code(LiveService& svc, const httplib::Result& r) { return svc.json_of(r).at("code"); }

} // namespace

TEST_CASE("posted models read back unchanged") {
    LiveService svc;
    const auto text = testing::read_fixture("lifecycle_pilot1.json");
    auto r = svc.post_text("/models", text);
    REQUIRE(r->status == 201);
    CHECK(svc.json_of(r).at("id") == "pilot1");
    auto g = svc.get("/models/pilot1");
    REQUIRE(g->status == 200);
    CHECK(g->body == serialize_model(parse_model(text)));
    CHECK(parse_model(g->body) == parse_model(text));
}

TEST_CASE("model errors") {
    LiveService svc;
    auto bad = svc.post_text("/models", "{ nope");
    CHECK(bad->status == 400);
    CHECK(code(svc, bad) == "syntax_error");
    auto dangling = svc.post_text("/models", R"({"name":"x","processes":[{"id":"p","name":"P","subprocesses":["q"]}]})");
    CHECK(dangling->status == 422);
    CHECK(code(svc, dangling) == "dangling_reference");
    CHECK(svc.json_of(dangling).at("details").at("subject") == "q");
    auto missing = svc.get("/models/none");
    CHECK(missing->status == 404);
    CHECK(code(svc, missing) == "unknown_model");
    svc.post_text("/models", testing::read_fixture("lifecycle_pilot1.json"));
    auto dup = svc.post_text("/models", testing::read_fixture("lifecycle_pilot1.json"));
    CHECK(dup->status == 409);
}

TEST_CASE("session lifecycle over http") {
    LiveService svc;
    const auto sid = setup_session(svc);
    auto info = svc.json_of(svc.get("/sessions/" + sid));
    CHECK(info.at("left_model") == "pilot1");
    CHECK(info.at("iterations").empty());

    CHECK(code(svc, svc.get("/sessions/" + sid + "/matrix")) == "no_iteration");

    auto f = svc.post("/sessions/" + sid + "/facts", {{"left", "elicit"}, {"right", "gather"}, {"verdict", "="}});
    REQUIRE(f->status == 201);
    const std::string fid = svc.json_of(f).at("id");
    auto again = svc.post("/sessions/" + sid + "/facts", {{"left", "elicit"}, {"right", "gather"}, {"verdict", "="}});
    CHECK(again->status == 409);
    CHECK(code(svc, again) == "duplicate_fact");

    auto rc = svc.post("/sessions/" + sid + "/recompute?scope=processes", json::object());
    REQUIRE(rc->status == 200);
    auto m = io::matrix_from_json(svc.json_of(rc).at("matrix"));
    CHECK(m.rows() == 10);
    CHECK(m.cols() == 12);
    const auto& pinned = m.at(*m.row_of("elicit"), *m.col_of("gather"));
    CHECK(pinned.pcm == 1.0);
    CHECK(pinned.pinned == Verdict::equal);
    CHECK(svc.json_of(rc).at("assumptions").size() == 119);

    auto served = io::matrix_from_json(svc.json_of(svc.get("/sessions/" + sid + "/matrix")));
    CHECK(served == m);
    auto csv = svc.get("/sessions/" + sid + "/matrix?format=csv");
    CHECK(csv->body == export_heatmap(m));
    CHECK(svc.json_of(svc.get("/sessions/" + sid + "/assumptions")).size() == 119);

    auto table = svc.json_of(svc.get("/sessions/" + sid + "/commonality-table"));
    CHECK(table.at("rows").size() == 1);

    auto phases = svc.post("/sessions/" + sid + "/recompute?scope=phases", json::object());
    CHECK(io::matrix_from_json(svc.json_of(phases).at("matrix")).rows() == 3);
    auto custom = svc.post("/sessions/" + sid + "/recompute",
                           {{"scope_left", {"elicit", "specify"}}, {"scope_right", {"gather"}}});
    CHECK(io::matrix_from_json(svc.json_of(custom).at("matrix")).rows() == 2);
    CHECK(svc.post("/sessions/" + sid + "/recompute?scope=all", json::object())->status == 422);

    CHECK(svc.del("/sessions/" + sid + "/facts/" + fid)->status == 204);
    CHECK(svc.del("/sessions/" + sid + "/facts/" + fid)->status == 404);
    CHECK(svc.json_of(svc.get("/sessions/" + sid)).at("iterations").size() == 3);
}

TEST_CASE("weights over http") {
    LiveService svc;
    const auto sid = setup_session(svc);
    auto bad = svc.put("/sessions/" + sid + "/weights", {{"pds", 0.5}, {"pcs", 0.5}, {"pch", 0.5}});
    CHECK(bad->status == 422);
    CHECK(code(svc, bad) == "weights_invalid");
    auto ok = svc.put("/sessions/" + sid + "/weights", {{"pds", 1}, {"pcs", 0}, {"pch", 0}});
    CHECK(ok->status == 200);
    auto rc = svc.json_of(svc.post("/sessions/" + sid + "/recompute", json::object()));
    for (const auto& c : io::matrix_from_json(rc.at("matrix")).cells) CHECK(c.pcm == c.pds);
}

TEST_CASE("expectation report over http") {
    LiveService svc;
    const auto sid = setup_session(svc);
    for (const auto& f : io::parse_json(testing::read_fixture("lifecycle_product_facts.json")))
        REQUIRE(svc.post("/sessions/" + sid + "/facts", f)->status == 201);
    svc.put("/sessions/" + sid + "/weights", {{"pds", 0.8}, {"pcs", 0.1}, {"pch", 0.1}});
    svc.post("/sessions/" + sid + "/recompute?scope=phases", json::object());
    auto rep = svc.json_of(svc.get("/sessions/" + sid + "/expectation-report"));
    CHECK(rep.at("weak_expected") == json::array({{{"left", "development"}, {"right", "coding"}}}));
    CHECK(rep.at("strong_unexpected") == json::array({{{"left", "requirements"}, {"right", "testing"}}}));
    auto custom = svc.json_of(
        svc.get("/sessions/" + sid + "/expectation-report?low=0.6&high=0.95&pairs=testing:testing"));
    CHECK(custom.at("weak_expected").size() == 1);
    CHECK(custom.at("strong_unexpected").empty());
    CHECK(svc.get("/sessions/" + sid + "/expectation-report?low=0.9&high=0.1")->status == 422);
    CHECK(svc.get("/sessions/" + sid + "/expectation-report?pairs=x:y")->status == 422);
}

TEST_CASE("merge plan and reference model over http") {
    LiveService svc;
    const auto sid = setup_session(svc);
    CHECK(svc.get("/sessions/" + sid + "/merge-plan")->status == 404);
    for (const auto& f : io::parse_json(testing::read_fixture("lifecycle_merge_facts.json")))
        REQUIRE(svc.post("/sessions/" + sid + "/facts", f)->status == 201);
    auto early = svc.post("/sessions/" + sid + "/merge-plan", {{"annotations", json::array()}});
    CHECK(early->status == 409);
    CHECK(code(svc, early) == "no_iteration");
    svc.post("/sessions/" + sid + "/recompute", json::object());

    auto notes = io::parse_json(testing::read_fixture("lifecycle_annotations.json"));
    auto proposed = svc.post("/sessions/" + sid + "/merge-plan", {{"annotations", notes}});
    REQUIRE(proposed->status == 200);
    CHECK(svc.json_of(proposed).at("common").size() == 11);
    CHECK(svc.post("/sessions/" + sid + "/reference-model", json::object())->status == 422);

    for (const auto& d : io::parse_json(testing::read_fixture("lifecycle_decisions.json")))
        REQUIRE(svc.post("/sessions/" + sid + "/merge-plan", d)->status == 200);
    auto plan = svc.json_of(svc.get("/sessions/" + sid + "/merge-plan"));
    CHECK(plan.at("final") == true);

    auto bad = svc.post("/sessions/" + sid + "/merge-plan",
                        {{"decision", "reassign"},
                         {"side", "left"},
                         {"process", "documenting"},
                         {"to", {{"kind", "common"}, {"counterpart", "gather"}}}});
    CHECK(bad->status == 422);
    CHECK(code(svc, bad) == "plan_invalid");

    auto ref = svc.post("/sessions/" + sid + "/reference-model", json::object());
    REQUIRE(ref->status == 200);
    auto model = parse_reference_model(ref->body);
    CHECK(model.exclusions.size() == 1);
    CHECK(svc.post("/sessions/" + sid + "/merge-plan", json::object())->status == 400);
}

TEST_CASE("unknown sessions") {
    LiveService svc;
    auto r = svc.get("/sessions/s42");
    CHECK(r->status == 404);
    CHECK(code(svc, r) == "unknown_session");
    CHECK(svc.post("/sessions", {{"left", "a"}, {"right", "b"}})->status == 404);
    CHECK(svc.post("/sessions", {{"left", "a"}})->status == 400);
}

TEST_CASE("status codes") {
    CHECK(http_status(ErrorCode::schema_error) == 400);
    CHECK(http_status(ErrorCode::weights_invalid) == 422);
    CHECK(http_status(ErrorCode::unknown_fact) == 404);
    CHECK(http_status(ErrorCode::duplicate_fact) == 409);
    CHECK(http_status(ErrorCode::io_error) == 500);
}

TEST_CASE("state survives a restart") {
    auto dir = std::filesystem::temp_directory_path() / ("procmatch-svc-" + std::to_string(std::random_device{}()));
    Id sid;
    json before;
    {
        LiveService svc(dir);
        sid = setup_session(svc);
        svc.post("/sessions/" + sid + "/facts", {{"left", "elicit"}, {"right", "gather"}, {"verdict", "="}});
        svc.post("/sessions/" + sid + "/recompute", json::object());
        before = svc.json_of(svc.get("/sessions/" + sid));
    }
    {
        LiveService svc(dir);
        CHECK(svc.json_of(svc.get("/sessions/" + sid)) == before);
        CHECK(svc.get("/models/pilot2")->status == 200);
    }
    std::filesystem::remove_all(dir);
}
