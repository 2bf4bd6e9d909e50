// JSON text crosses the boundary; the Python package decodes it.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "procmatch/reference.hpp"
#include "procmatch/session_io.hpp"
#include "procmatch/text.hpp"

namespace py = pybind11;
using namespace procmatch;

namespace {

std::shared_ptr<const ProcessModel> model_of(const std::string& text) {
    return std::make_shared<const ProcessModel>(parse_model(text));
}

class PySession {
public:
    PySession(const std::string& left, const std::string& right, const Weights& w, double threshold)
        : session_("py", model_of(left), model_of(right), w, threshold) {}
    explicit PySession(io::SessionDocument doc) : session_(std::move(doc.session)), plan_(std::move(doc.plan)) {}

    std::string add_fact(const std::string& left, const std::string& right, bool equal, const std::string& rationale) {
        return io::dump(io::fact_to_json(
            session_.establish_fact(left, right, equal ? Verdict::equal : Verdict::different, rationale)));
    }
    void add_facts(const std::string& text) { io::apply_facts(session_, io::read_facts_file(text)); }
    void retract(const std::string& id) { session_.retract_fact(id); }
    void set_weights(const Weights& w) { session_.set_weights(w); }

    std::string recompute(const std::string& scope) {
        auto r = session_.recompute(scope_from_string(scope));
        return io::dump({{"matrix", io::matrix_to_json(*r.matrix)}, {"assumptions", io::assumptions_to_json(r.assumptions)}});
    }
    std::string heatmap() const { return export_heatmap(matrix()); }
    std::string expectation(double low, double high) const {
        const auto& m = matrix();
        auto pairs = diagonal_pairs(m);
        return io::dump(io::expectation_to_json(expectation_report(m, pairs, low, high)));
    }
    std::string commonality() const { return io::dump(io::commonality_to_json(commonality_table(session_))); }

    std::string merge(const std::string& annotations, const std::string& decisions) {
        if (session_.iterations().empty()) session_.recompute(Scope::processes);
        auto plan = propose_plan(session_, io::annotations_from_json(io::parse_json(annotations)));
        if (!decisions.empty())
            for (const auto& d : io::decisions_from_json(io::parse_json(decisions))) plan = decide(session_, std::move(plan), d);
        if (!plan.final) plan = decide(session_, std::move(plan), Accept{});
        plan_ = plan;
        return serialize_reference_model(build_reference_model(session_, plan));
    }

    std::string to_json() const { return io::dump(io::session_to_json(session_, plan_)); }
    std::size_t iterations() const { return session_.iterations().size(); }

private:
    const SimilarityMatrix& matrix() const {
        auto m = session_.latest_matrix();
        if (!m) throw Error(ErrorCode::no_iteration, "no computation has been run in this session");
        return *m;
    }

    Session session_;
    std::optional<MergePlan> plan_;
};

} // namespace

PYBIND11_MODULE(_procmatch, m) {
    // lives as long as the interpreter; the module keeps a reference too
    static PyObject* error = PyErr_NewException("procmatch._procmatch.Error", PyExc_Exception, nullptr);
    m.attr("Error") = py::handle(error);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::handle(error)(std::string(to_string(e.code())) + ": " + e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            exc.attr("subject") = e.subject();
            PyErr_SetObject(error, exc.ptr());
        }
    });

    m.def("levenshtein", py::overload_cast<std::string_view, std::string_view>(&levenshtein));
    m.def("name_similarity", py::overload_cast<std::string_view, std::string_view>(&name_similarity));
    m.def("normalize_name", &normalize_name);
    m.def("validate_model", [](const std::string& text) {
        auto doc = read_model_document(text);
        auto out = doc.violations;
        for (auto& v : validate_model(doc.model)) out.push_back(std::move(v));
        std::vector<std::tuple<std::string, std::string, std::string>> rows;
        for (const auto& v : out) rows.emplace_back(v.entity, v.rule, v.message);
        return rows;
    });
    m.def("canonical_model", [](const std::string& text) { return serialize_model(parse_model(text)); });

    py::class_<Weights>(m, "Weights")
        .def(py::init([](double pds, double pcs, double pch) {
                 Weights w{pds, pcs, pch};
                 w.validate();
                 return w;
             }),
             py::arg("pds") = 1.0 / 3.0, py::arg("pcs") = 1.0 / 3.0, py::arg("pch") = 1.0 / 3.0)
        .def_readonly("pds", &Weights::pds)
        .def_readonly("pcs", &Weights::pcs)
        .def_readonly("pch", &Weights::pch);

    py::class_<PySession>(m, "Session")
        .def(py::init<const std::string&, const std::string&, const Weights&, double>(), py::arg("left"),
             py::arg("right"), py::arg("weights") = Weights{}, py::arg("name_threshold") = 0.9)
        .def_static("from_json", [](const std::string& text) {
            return PySession(io::session_from_json(io::parse_json(text)));
        })
        .def("add_fact", &PySession::add_fact, py::arg("left"), py::arg("right"), py::arg("equal"),
             py::arg("rationale") = "")
        .def("add_facts", &PySession::add_facts)
        .def("retract_fact", &PySession::retract)
        .def("set_weights", &PySession::set_weights)
        .def("recompute", &PySession::recompute, py::arg("scope") = "processes")
        .def("heatmap", &PySession::heatmap)
        .def("expectation_report", &PySession::expectation, py::arg("low") = default_expectation_low,
             py::arg("high") = default_expectation_high)
        .def("commonality_table", &PySession::commonality)
        .def("merge", &PySession::merge, py::arg("annotations"), py::arg("decisions") = "")
        .def("to_json", &PySession::to_json)
        .def_property_readonly("iterations", &PySession::iterations);
}
