#pragma once

#include <algorithm>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "procmatch/model.hpp"
#include "procmatch/session_io.hpp"

namespace testing {

using procmatch::AccessMode;
using procmatch::Id;
using procmatch::ProcessModel;

inline std::string fixture_path(const std::string& name) { return std::string(PROCMATCH_FIXTURES) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(PROCMATCH_GOLDEN) + "/" + name; }

inline std::string read_fixture(const std::string& name) { return procmatch::io::read_file(fixture_path(name)); }

inline std::shared_ptr<const ProcessModel> load_model(const std::string& name) {
    return std::make_shared<const ProcessModel>(procmatch::parse_model(read_fixture(name)));
}

// Small in-code model construction. Roots are derived on finish().
class ModelBuilder {
public:
    explicit ModelBuilder(Id id = "m") { m_.id = id; m_.name = id; }

    ModelBuilder& product(const Id& id, const std::string& name) {
        m_.products[id] = {id, name, ""};
        return *this;
    }
    ModelBuilder& process(const Id& id, const std::string& name, std::vector<Id> children = {},
                          std::vector<Id> products = {}) {
        procmatch::ProcessEntity p{id, name, "", std::move(children), {}, {}, {}};
        for (auto& pr : products) p.product_accesses.push_back({pr, AccessMode::consume});
        m_.processes[id] = std::move(p);
        return *this;
    }
    ModelBuilder& access(const Id& process, const Id& product, AccessMode mode) {
        m_.processes.at(process).product_accesses.push_back({product, mode});
        return *this;
    }
    ModelBuilder& context(const std::string& factor, const std::string& characteristic, const std::string& value) {
        m_.context.entries.push_back({factor, characteristic, value});
        return *this;
    }

    ProcessModel finish() const {
        ProcessModel out = m_;
        std::vector<Id> children;
        for (const auto& [_, p] : out.processes) children.insert(children.end(), p.sub_processes.begin(), p.sub_processes.end());
        out.root_processes.clear();
        for (const auto& [id, _] : out.processes)
            if (std::find(children.begin(), children.end(), id) == children.end()) out.root_processes.push_back(id);
        return out;
    }
    std::shared_ptr<const ProcessModel> shared() const { return std::make_shared<const ProcessModel>(finish()); }

private:
    ProcessModel m_;
};

// Random valid model: a forest over p0..p(n-1) where each process picks at
// most one earlier parent, and random product accesses.
inline ProcessModel random_model(std::mt19937& rng, const Id& id, int max_products = 5, int max_processes = 6) {
    static const char* words[] = {"plan", "test", "tests", "code", "review", "design", "spec", "build"};
    const int np = 1 + static_cast<int>(rng() % max_products);
    const int nq = 1 + static_cast<int>(rng() % max_processes);
    std::vector<std::vector<Id>> kids(nq);
    for (int j = 1; j < nq; ++j) {
        const int parent = static_cast<int>(rng() % (j + 1));
        if (parent < j) kids[parent].push_back("p" + std::to_string(j));
    }
    ModelBuilder b(id);
    for (int i = 0; i < np; ++i) b.product("d" + std::to_string(i), words[rng() % 8]);
    for (int i = 0; i < nq; ++i) {
        std::vector<Id> prods;
        for (int j = 0; j < np; ++j)
            if (rng() % 3 == 0) prods.push_back("d" + std::to_string(j));
        b.process("p" + std::to_string(i), std::string(words[rng() % 8]) + " " + words[rng() % 8], kids[i], prods);
    }
    return b.finish();
}

} // namespace testing
