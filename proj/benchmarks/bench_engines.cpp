// Micro-benchmarks for the parsing, dependency, and recomputation paths.

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "recalc/bench.hpp"
#include "recalc/depgraph.hpp"
#include "recalc/eager.hpp"
#include "recalc/lazy.hpp"
#include "recalc/plan.hpp"
#include "recalc/workbook.hpp"

namespace {

using namespace recalc;

Workbook make_chain(std::uint32_t cells) {
    Workload wl = generate_workload({WorkloadShape::Chain, cells, 1, 1});
    return std::move(wl.workbook);
}

void BM_ParseFormula(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(parse_formula("B7+3*SUM(A1:A9)-C2^2"));
}
BENCHMARK(BM_ParseFormula);

void BM_ParserStringSegment(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(eval_parser_string("A1=2;B1=1+A1;A1=2;D1=10;C1=A1+D1;E1=B1+C1;"));
}
BENCHMARK(BM_ParserStringSegment);

void BM_LoadChain(benchmark::State& state) {
    Workload wl = generate_workload(
        {WorkloadShape::Chain, std::uint32_t(state.range(0)), 1, 1});
    std::string xml = "<workbook name=\"w\">\n";
    for (std::size_t i = 0; i < wl.workbook.cell_count(); ++i) {
        const Cell& c = wl.workbook.cell_at(i);
        xml += "<cell ref=\"" + c.ref.to_string() + "\" formula=\"" + c.formula_text +
               "\"/>\n";
    }
    xml += "</workbook>\n";
    for (auto _ : state) benchmark::DoNotOptimize(Workbook::load(xml));
}
BENCHMARK(BM_LoadChain)->Arg(100)->Arg(1000);

void BM_DependencySet(benchmark::State& state) {
    Workbook wb = make_chain(std::uint32_t(state.range(0)));
    std::vector<CellRef> origin{CellRef::parse("A1")};
    for (auto _ : state) benchmark::DoNotOptimize(dependency_set(wb, origin));
}
BENCHMARK(BM_DependencySet)->Arg(100)->Arg(10000);

void BM_EagerEdit(benchmark::State& state) {
    Workbook wb = make_chain(std::uint32_t(state.range(0)));
    double v = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(set_and_recompute_in_place(wb, CellRef::parse("A1"), ++v));
}
BENCHMARK(BM_EagerEdit)->Arg(100)->Arg(1000);

void BM_LazyEditRead(benchmark::State& state) {
    auto wb = std::make_shared<const Workbook>(make_chain(std::uint32_t(state.range(0))));
    CellRef head = CellRef::parse("A1");
    CellRef tail(1, std::uint32_t(state.range(0)));
    LazyRegistry reg(wb);
    double v = 0;
    for (auto _ : state) {
        reg.set_value(head, ++v);
        benchmark::DoNotOptimize(reg.get_value(tail));
    }
}
BENCHMARK(BM_LazyEditRead)->Arg(100)->Arg(1000);

void BM_CompiledEditRead(benchmark::State& state) {
    auto wb = make_chain(std::uint32_t(state.range(0)));
    auto plan = std::make_shared<const CompiledPlan>(compile_plan(wb));
    CellRef head = CellRef::parse("A1");
    CellRef tail(1, std::uint32_t(state.range(0)));
    LazyRegistry reg(plan);
    double v = 0;
    for (auto _ : state) {
        reg.set_value(head, ++v);
        benchmark::DoNotOptimize(reg.get_value(tail));
    }
}
BENCHMARK(BM_CompiledEditRead)->Arg(100)->Arg(1000)->Arg(10000);

void BM_CompilePlan(benchmark::State& state) {
    Workbook wb = make_chain(std::uint32_t(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(compile_plan(wb));
}
BENCHMARK(BM_CompilePlan)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
