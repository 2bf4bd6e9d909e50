#include "procmatch/service.hpp"

#include <httplib.h>

#include <charconv>

#include "procmatch/session_io.hpp"

namespace procmatch {

using io::json;

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::syntax_error:
    case ErrorCode::schema_error: return 400;
    case ErrorCode::unknown_model:
    case ErrorCode::unknown_session:
    case ErrorCode::unknown_fact:
    case ErrorCode::unknown_entity:
    case ErrorCode::unknown_process:
    case ErrorCode::no_plan: return 404;
    case ErrorCode::duplicate_id:
    case ErrorCode::duplicate_fact:
    case ErrorCode::conflicting_merge:
    case ErrorCode::no_iteration: return 409;
    case ErrorCode::io_error:
    case ErrorCode::store_corrupt: return 500;
    default: return 422;
    }
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(io::dump(body), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
    json details = json::object();
    if (!e.subject().empty()) details["subject"] = e.subject();
    send_json(res, {{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"details", details}},
              http_status(e.code()));
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
        try {
            inner(req, res);
        } catch (const Error& e) {
            send_error(res, e);
        } catch (const json::exception& e) {
            send_error(res, Error(ErrorCode::schema_error, e.what()));
        } catch (const std::exception& e) {
            send_json(res, {{"code", "internal"}, {"message", e.what()}, {"details", json::object()}}, 500);
        }
    };
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    return io::parse_json(req.body);
}

double query_number(const httplib::Request& req, const char* key, double fallback) {
    if (!req.has_param(key)) return fallback;
    const auto text = req.get_param_value(key);
    double v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw Error(ErrorCode::thresholds_invalid, std::string("query parameter '") + key + "' must be a number", key);
    return v;
}

// "l1:r1,l2:r2"
std::vector<IdPair> parse_pairs(const std::string& text) {
    std::vector<IdPair> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        auto item = text.substr(start, end - start);
        if (!item.empty()) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
                throw Error(ErrorCode::schema_error, "pairs are written left:right", item);
            out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
        }
        start = end + 1;
    }
    return out;
}

json session_summary(const SessionState& state) {
    const auto& s = state.session;
    json facts = json::array();
    for (const auto& f : s.facts().facts()) facts.push_back(io::fact_to_json(f));
    json history = json::array();
    for (const auto& it : s.iterations())
        history.push_back({{"weights", io::weights_to_json(it.weights)},
                           {"fact_digest", it.fact_digest},
                           {"rows", it.scope_left.size()},
                           {"cols", it.scope_right.size()}});
    return {{"id", s.id()},
            {"left_model", s.left().id},
            {"right_model", s.right().id},
            {"weights", io::weights_to_json(s.weights())},
            {"name_threshold", s.name_threshold()},
            {"fact_digest", s.facts().digest()},
            {"facts", facts},
            {"iterations", history},
            {"has_plan", state.plan.has_value()}};
}

std::shared_ptr<const SimilarityMatrix> require_matrix(const SessionState& state) {
    auto m = state.session.latest_matrix();
    if (!m) throw Error(ErrorCode::no_iteration, "no computation has been run in this session");
    return m;
}

} // namespace

void register_routes(httplib::Server& server, SessionStore& store) {
    server.Post("/models", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        auto id = store.add_model(parse_model(req.body));
        send_json(res, {{"id", id}}, 201);
    }));

    server.Get(R"(/models/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        res.status = 200;
        res.set_content(serialize_model(*store.model(req.matches[1])), "application/json");
    }));

    server.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        auto body = body_of(req);
        Weights w;
        if (body.contains("weights")) w = io::weights_from_json(body.at("weights"));
        const double threshold = body.value("name_threshold", 0.9);
        auto id = store.create_session(io::require_string(body, "left", "session"),
                                       io::require_string(body, "right", "session"), w, threshold);
        send_json(res, session_summary(*store.snapshot(id)), 201);
    }));

    server.Get(R"(/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, session_summary(*store.snapshot(req.matches[1])));
    }));

    server.Put(R"(/sessions/([^/]+)/weights)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        auto w = io::weights_from_json(body_of(req));
        const std::string id = req.matches[1];
        store.mutate(id, [&](SessionState& s) { s.session.set_weights(w); });
        send_json(res, io::weights_to_json(store.snapshot(id)->session.weights()));
    }));

    server.Post(R"(/sessions/([^/]+)/facts)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        auto body = body_of(req);
        auto inputs = io::facts_file_from_json(json::array({body}));
        const std::string id = req.matches[1];
        Fact created;
        store.mutate(id, [&](SessionState& s) {
            io::apply_facts(s.session, inputs);
            created = *s.session.facts().find_pair(inputs.front().left, inputs.front().right);
        });
        send_json(res, io::fact_to_json(created), 201);
    }));

    server.Delete(R"(/sessions/([^/]+)/facts/([^/]+))",
                  guarded([&store](const httplib::Request& req, httplib::Response& res) {
                      const std::string fid = req.matches[2];
                      store.mutate(req.matches[1], [&](SessionState& s) { s.session.retract_fact(fid); });
                      res.status = 204;
                  }));

    server.Post(R"(/sessions/([^/]+)/recompute)",
                guarded([&store](const httplib::Request& req, httplib::Response& res) {
                    const Scope scope =
                        req.has_param("scope") ? scope_from_string(req.get_param_value("scope")) : Scope::processes;
                    auto body = body_of(req);
                    RecomputeResult result;
                    store.mutate(req.matches[1], [&](SessionState& s) {
                        if (body.contains("scope_left") || body.contains("scope_right")) {
                            auto l = body.value("scope_left", std::vector<Id>{});
                            auto r = body.value("scope_right", std::vector<Id>{});
                            result = s.session.recompute(l, r);
                        } else {
                            result = s.session.recompute(scope);
                        }
                    });
                    send_json(res, {{"matrix", io::matrix_to_json(*result.matrix)},
                                    {"assumptions", io::assumptions_to_json(result.assumptions)}});
                }));

    server.Get(R"(/sessions/([^/]+)/matrix)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        auto m = require_matrix(*store.snapshot(req.matches[1]));
        if (req.has_param("format") && req.get_param_value("format") == "csv") {
            res.status = 200;
            res.set_content(export_heatmap(*m), "text/csv");
            return;
        }
        send_json(res, io::matrix_to_json(*m));
    }));

    server.Get(R"(/sessions/([^/]+)/assumptions)",
               guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   auto m = require_matrix(*store.snapshot(req.matches[1]));
                   send_json(res, io::assumptions_to_json(rank_assumptions(*m)));
               }));

    server.Get(R"(/sessions/([^/]+)/commonality-table)",
               guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, io::commonality_to_json(commonality_table(store.snapshot(req.matches[1])->session)));
               }));

    server.Get(R"(/sessions/([^/]+)/expectation-report)",
               guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   auto m = require_matrix(*store.snapshot(req.matches[1]));
                   const double low = query_number(req, "low", default_expectation_low);
                   const double high = query_number(req, "high", default_expectation_high);
                   auto pairs =
                       req.has_param("pairs") ? parse_pairs(req.get_param_value("pairs")) : diagonal_pairs(*m);
                   send_json(res, io::expectation_to_json(expectation_report(*m, pairs, low, high)));
               }));

    server.Get(R"(/sessions/([^/]+)/merge-plan)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        auto state = store.snapshot(req.matches[1]);
        if (!state->plan) throw Error(ErrorCode::no_plan, "no merge plan has been proposed");
        send_json(res, io::plan_to_json(*state->plan));
    }));

    server.Post(R"(/sessions/([^/]+)/merge-plan)",
                guarded([&store](const httplib::Request& req, httplib::Response& res) {
                    auto body = body_of(req);
                    const std::string id = req.matches[1];
                    store.mutate(id, [&](SessionState& s) {
                        if (body.contains("annotations")) {
                            s.plan = propose_plan(s.session, io::annotations_from_json(body.at("annotations")));
                        } else if (body.contains("plan")) {
                            auto plan = io::plan_from_json(body.at("plan"));
                            check_plan(s.session, plan);
                            s.plan = std::move(plan);
                        } else if (body.contains("decision")) {
                            if (!s.plan) throw Error(ErrorCode::no_plan, "no merge plan has been proposed");
                            s.plan = decide(s.session, *s.plan, io::decision_from_json(body));
                        } else {
                            throw Error(ErrorCode::schema_error,
                                        "merge-plan body needs 'annotations', 'plan' or 'decision'");
                        }
                    });
                    send_json(res, io::plan_to_json(*store.snapshot(id)->plan));
                }));

    server.Post(R"(/sessions/([^/]+)/reference-model)",
                guarded([&store](const httplib::Request& req, httplib::Response& res) {
                    auto state = store.snapshot(req.matches[1]);
                    if (!state->plan) throw Error(ErrorCode::no_plan, "no merge plan has been proposed");
                    auto ref = build_reference_model(state->session, *state->plan);
                    res.status = 200;
                    res.set_content(serialize_reference_model(ref), "application/json");
                }));
}

void serve(const std::string& host, int port, const std::string& store_path) {
    SessionStore store(store_path);
    httplib::Server server;
    register_routes(server, store);
    if (!server.bind_to_port(host, port))
        throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port), std::to_string(port));
    server.listen_after_bind();
}

} // namespace procmatch
