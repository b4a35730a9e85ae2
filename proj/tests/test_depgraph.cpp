#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "recalc/depgraph.hpp"

using namespace recalc;

namespace {

Workbook load_fig1() {
    std::ifstream in(std::string(RECALC_DATA_DIR) + "/fig1.xml", std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return Workbook::load(ss.str());
}

std::vector<CellRef> refs(std::initializer_list<const char*> list) {
    std::vector<CellRef> out;
    for (const char* s : list) out.push_back(CellRef::parse(s));
    return out;
}

std::vector<std::string> names(const std::vector<CellRef>& v) {
    std::vector<std::string> out;
    for (const CellRef& r : v) out.push_back(r.to_string());
    return out;
}

}  // namespace

TEST_CASE("direct dependents") {
    Workbook wb = load_fig1();
    CHECK(names(direct_dependents(wb, refs({"A1"}))) ==
          std::vector<std::string>{"B1", "C1"});
    CHECK(direct_dependents(wb, refs({"E1"})).empty());
    CHECK(names(direct_dependents(wb, refs({"B1", "D1"}))) ==
          std::vector<std::string>{"C1", "E1"});
    CHECK_THROWS_AS(direct_dependents(wb, refs({"Z9"})), UnknownCell);
}

TEST_CASE("dependency set for the worked example") {
    Workbook wb = load_fig1();

    auto [dep, trace] = dependency_set(wb, refs({"A1"}));
    CHECK(names(dep.members) == std::vector<std::string>{"B1", "C1", "E1", "F1"});
    CHECK(names(dep.origin) == std::vector<std::string>{"A1"});
    REQUIRE(trace.rounds.size() == 4);
    CHECK(names(trace.rounds[0]) == std::vector<std::string>{"A1"});
    CHECK(names(trace.rounds[1]) == std::vector<std::string>{"B1", "C1"});
    CHECK(names(trace.rounds[2]) == std::vector<std::string>{"E1", "F1"});
    CHECK(trace.rounds[3].empty());

    auto [dep_f1, trace_f1] = dependency_set(wb, refs({"F1"}));
    CHECK(dep_f1.members.empty());

    auto [dep_d1, trace_d1] = dependency_set(wb, refs({"D1"}));
    CHECK(names(dep_d1.members) == std::vector<std::string>{"C1", "E1", "F1"});

    CHECK_THROWS_AS(dependency_set(wb, refs({"Q5"})), UnknownCell);
}

TEST_CASE("origins are excluded even when they depend on each other") {
    Workbook wb = load_fig1();
    auto [dep, trace] = dependency_set(wb, refs({"A1", "C1"}));
    CHECK(names(dep.members) == std::vector<std::string>{"B1", "E1", "F1"});
}

TEST_CASE("completeness against the brute-force closure, and the round bound") {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 60; ++round) {
        auto raw = testutil::random_workbook_xml(rng, 2 + rng() % 200);
        Workbook wb = Workbook::load(raw.xml);
        for (int q = 0; q < 4; ++q) {
            CellRef origin = raw.refs[rng() % raw.refs.size()];
            auto [dep, trace] = dependency_set(wb, std::vector<CellRef>{origin});
            std::set<CellRef> expected = testutil::brute_dependents(wb, {origin});
            std::set<CellRef> got(dep.members.begin(), dep.members.end());
            CHECK(got == expected);
            CHECK(trace.rounds.size() - 1 <= wb.cell_count());
            CHECK(trace.rounds.back().empty());
        }
    }
}

TEST_CASE("monotonicity over growing changed sets") {
    std::mt19937_64 rng(77);
    for (int round = 0; round < 20; ++round) {
        auto raw = testutil::random_workbook_xml(rng, 5 + rng() % 100);
        Workbook wb = Workbook::load(raw.xml);
        CellRef a = raw.refs[rng() % raw.refs.size()];
        CellRef b = raw.refs[rng() % raw.refs.size()];
        auto [dep_a, ta] = dependency_set(wb, std::vector<CellRef>{a});
        auto [dep_ab, tab] = dependency_set(wb, std::vector<CellRef>{a, b});
        std::set<CellRef> combined(dep_ab.members.begin(), dep_ab.members.end());
        combined.insert(dep_ab.origin.begin(), dep_ab.origin.end());
        for (const CellRef& m : dep_a.members) CHECK(combined.contains(m));
    }
}

TEST_CASE("call tree expansion") {
    Workbook wb = load_fig1();

    CallTree t = build_call_tree(wb, CellRef::parse("E1"), refs({"D1"}));
    CHECK(t.root.ref == CellRef::parse("E1"));
    REQUIRE(t.root.children.size() == 2);
    const CallTreeNode& b1 = t.root.children[0];
    const CallTreeNode& c1 = t.root.children[1];
    CHECK(b1.ref == CellRef::parse("B1"));
    REQUIRE(b1.children.size() == 1);
    CHECK(b1.children[0].ref == CellRef::parse("A1"));
    CHECK(b1.children[0].children.empty());
    CHECK(c1.ref == CellRef::parse("C1"));
    REQUIRE(c1.children.size() == 2);
    CHECK(c1.children[0].ref == CellRef::parse("A1"));
    CHECK(c1.children[1].ref == CellRef::parse("D1"));
    CHECK(c1.children[1].children.empty());  // cut leaf

    CallTree d1 = build_call_tree(wb, CellRef::parse("D1"), {});
    CHECK(d1.root.children.empty());

    CallTree f1 = build_call_tree(wb, CellRef::parse("F1"), {});
    REQUIRE(f1.root.children.size() == 1);
    REQUIRE(f1.root.children[0].children.size() == 2);
    CHECK(f1.root.children[0].children[1].ref == CellRef::parse("D1"));

    CHECK_THROWS_AS(build_call_tree(wb, CellRef::parse("Z9"), {}), UnknownCell);
}

TEST_CASE("duplicate references duplicate call-tree nodes") {
    Workbook wb = Workbook::load(
        "<workbook name=\"dup\">"
        "<cell ref=\"A1\" formula=\"1\"/>"
        "<cell ref=\"B1\" formula=\"A1+A1\"/>"
        "</workbook>");
    CallTree t = build_call_tree(wb, CellRef::parse("B1"), {});
    REQUIRE(t.root.children.size() == 2);
    CHECK(t.root.children[0].ref == CellRef::parse("A1"));
    CHECK(t.root.children[1].ref == CellRef::parse("A1"));
}
