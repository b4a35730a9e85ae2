// Command-line front end: workbook validation, dependency queries, what-if
// evaluation, parser-string traces, plan compilation, benchmarking, and an
// interactive what-if loop.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "recalc/bench.hpp"
#include "recalc/depgraph.hpp"
#include "recalc/eager.hpp"
#include "recalc/lazy.hpp"
#include "recalc/number_format.hpp"
#include "recalc/plan.hpp"
#include "recalc/workbook.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_domain_error = 1;
constexpr int exit_usage_error = 2;

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Usage {
    std::string message;
};

std::string must_read(const std::string& path) {
    auto text = read_file(path);
    if (!text) throw Usage{"cannot open file \"" + path + "\""};
    return *text;
}

struct SetArg {
    recalc::CellRef ref;
    double value;
};

std::vector<SetArg> parse_sets(const std::vector<std::string>& raw) {
    std::vector<SetArg> out;
    for (const std::string& s : raw) {
        std::size_t eq = s.find('=');
        double v = 0;
        if (eq == std::string::npos || !recalc::parse_number(s.substr(eq + 1), v))
            throw Usage{"bad --set value \"" + s + "\" (expected REF=VALUE)"};
        out.push_back({recalc::CellRef::parse(s.substr(0, eq)), v});
    }
    return out;
}

std::string witness_line(const std::vector<recalc::CellRef>& cycle) {
    std::string line;
    for (const auto& r : cycle) line += r.to_string() + " -> ";
    if (!cycle.empty()) line += cycle.front().to_string();
    return line;
}

int cmd_check(const std::string& path) {
    std::string text = must_read(path);
    try {
        recalc::Workbook wb = recalc::Workbook::load(text);
        std::cout << wb.cell_count() << " cells, " << wb.edge_count() << " edges, ACYCLIC\n";
        return exit_ok;
    } catch (const recalc::CircularReference& e) {
        std::cout << witness_line(e.cycle()) << "\n";
        return exit_domain_error;
    }
}

int cmd_deps(const std::string& path, const std::string& ref_text) {
    recalc::Workbook wb = recalc::Workbook::load(must_read(path));
    const recalc::CellRef changed[] = {recalc::CellRef::parse(ref_text)};
    auto [dep, trace] = recalc::dependency_set(wb, changed);
    for (const auto& r : dep.members) std::cout << r.to_string() << "\n";
    return exit_ok;
}

int cmd_eval(const std::string& path, const std::string& ref_text,
             const std::vector<std::string>& raw_sets, const std::string& mode_text,
             const std::string& plan_path) {
    recalc::EngineMode mode;
    if (!recalc::parse_mode(mode_text, mode))
        throw Usage{"bad --mode \"" + mode_text + "\" (eager|lazy|compiled)"};
    recalc::CellRef target = recalc::CellRef::parse(ref_text);
    std::vector<SetArg> sets = parse_sets(raw_sets);

    recalc::Workbook wb = recalc::Workbook::load(must_read(path));
    double value = 0;
    switch (mode) {
        case recalc::EngineMode::Eager: {
            for (const SetArg& s : sets) recalc::set_and_recompute_in_place(wb, s.ref, s.value);
            value = wb.value_at(wb.index_of(target));
            break;
        }
        case recalc::EngineMode::Lazy: {
            recalc::LazyRegistry reg(std::make_shared<const recalc::Workbook>(std::move(wb)));
            for (const SetArg& s : sets) reg.set_value(s.ref, s.value);
            value = reg.get_value(target);
            break;
        }
        case recalc::EngineMode::Compiled: {
            std::shared_ptr<const recalc::CompiledPlan> plan;
            if (plan_path.empty())
                plan = std::make_shared<const recalc::CompiledPlan>(recalc::compile_plan(wb));
            else
                plan = std::make_shared<const recalc::CompiledPlan>(
                    recalc::load_plan(must_read(plan_path)));
            recalc::LazyRegistry reg(plan);
            for (const SetArg& s : sets) reg.set_value(s.ref, s.value);
            value = reg.get_value(target);
            break;
        }
    }
    std::cout << recalc::format_number(value) << "\n";
    return exit_ok;
}

int cmd_trace(const std::string& path, const std::string& ref_text,
              const std::vector<std::string>& raw_sets, bool history) {
    recalc::CellRef root = recalc::CellRef::parse(ref_text);
    std::vector<SetArg> sets = parse_sets(raw_sets);
    recalc::Workbook wb = recalc::Workbook::load(must_read(path));

    std::vector<recalc::CellRef> changed;
    for (const SetArg& s : sets) {
        wb.set_constant_in_place(s.ref, s.value);
        changed.push_back(s.ref);
    }
    auto [dep, trace] = recalc::dependency_set(wb, changed);

    std::vector<std::string> prefixes;
    recalc::ParserString ps =
        recalc::build_parser_string(wb, root, dep, changed, history ? &prefixes : nullptr);
    if (history)
        for (const std::string& p : prefixes) std::cout << p << "\n";
    else
        std::cout << ps.text << "\n";
    return exit_ok;
}

int cmd_compile(const std::string& path, const std::string& out_path) {
    recalc::Workbook wb = recalc::Workbook::load(must_read(path));
    std::string bytes = recalc::save_plan(recalc::compile_plan(wb));
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Usage{"cannot write file \"" + out_path + "\""};
    out << bytes;
    return exit_ok;
}

int cmd_bench(const std::string& shape_text, std::uint32_t cells, std::uint32_t pairs,
              std::uint64_t seed, const std::string& modes_text, std::uint32_t trials,
              bool csv) {
    recalc::WorkloadSpec spec;
    if (!recalc::parse_shape(shape_text, spec.shape))
        throw Usage{"bad --shape \"" + shape_text +
                    "\" (chain|binary-tree|grid|random-dag)"};
    spec.cell_count = cells;
    spec.edit_read_pairs = pairs;
    spec.seed = seed;

    std::vector<recalc::EngineMode> modes;
    std::stringstream ss(modes_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        recalc::EngineMode m;
        if (!recalc::parse_mode(item, m))
            throw Usage{"bad mode \"" + item + "\" in --modes"};
        modes.push_back(m);
    }
    if (modes.empty()) throw Usage{"--modes must name at least one mode"};

    recalc::BenchReport report = recalc::run_bench(spec, modes, trials);
    std::cout << (csv ? recalc::format_report_csv(report)
                      : recalc::format_report_table(report));
    return exit_ok;
}

int cmd_repl(const std::string& path) {
    auto wb = std::make_shared<const recalc::Workbook>(recalc::Workbook::load(must_read(path)));
    recalc::LazyRegistry reg(wb);
    recalc::Workbook mirror = *wb;  // eager mirror backs `changed` and cross-checks
    std::optional<recalc::RecomputeReport> last_report;

    const bool interactive = isatty(fileno(stdin));
    std::string line;
    while (true) {
        if (interactive) std::cout << "> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        std::istringstream in(line);
        std::string cmd;
        in >> cmd;
        if (cmd.empty()) continue;
        try {
            if (cmd == "quit" || cmd == "exit") {
                break;
            } else if (cmd == "set") {
                std::string ref_text;
                std::string value_text;
                in >> ref_text >> value_text;
                double v = 0;
                if (ref_text.empty() || !recalc::parse_number(value_text, v)) {
                    std::cout << "error: usage: set REF VALUE\n";
                    continue;
                }
                recalc::CellRef ref = recalc::CellRef::parse(ref_text);
                reg.set_value(ref, v);
                last_report = recalc::set_and_recompute_in_place(mirror, ref, v);
            } else if (cmd == "get") {
                std::string ref_text;
                in >> ref_text;
                recalc::CellRef ref = recalc::CellRef::parse(ref_text);
                double v = reg.get_value(ref);
                double expected = mirror.value_at(mirror.index_of(ref));
                std::cout << recalc::format_number(v) << "\n";
                if (v != expected)
                    std::cout << "warning: eager cross-check disagrees ("
                              << recalc::format_number(expected) << ")\n";
            } else if (cmd == "deps") {
                std::string ref_text;
                in >> ref_text;
                const recalc::CellRef changed[] = {recalc::CellRef::parse(ref_text)};
                auto [dep, trace] = recalc::dependency_set(*wb, changed);
                for (const auto& r : dep.members) std::cout << r.to_string() << "\n";
            } else if (cmd == "changed") {
                if (!last_report) {
                    std::cout << "no changes yet\n";
                } else {
                    for (const auto& [ref, values] : last_report->changed_cells)
                        std::cout << ref.to_string() << ": "
                                  << recalc::format_number(values.first) << " -> "
                                  << recalc::format_number(values.second) << "\n";
                }
            } else {
                std::cout << "error: unknown command \"" << cmd << "\"\n";
            }
        } catch (const recalc::Error& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spreadsheet recomputation engine"};
    app.require_subcommand(1);

    std::string file, ref, plan_path, out_path;
    std::vector<std::string> sets;
    std::string mode = "eager";
    bool history = false, csv = false;
    std::string shape = "chain", modes = "eager,lazy,compiled";
    std::uint32_t cells = 1000, pairs = 100, trials = 10;
    std::uint64_t seed = 0;

    CLI::App* check = app.add_subcommand("check", "Validate a workbook file");
    check->add_option("file", file)->required();

    CLI::App* deps = app.add_subcommand("deps", "Print the dependency set of a cell");
    deps->add_option("file", file)->required();
    deps->add_option("ref", ref)->required();

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a cell after optional edits");
    eval->add_option("file", file)->required();
    eval->add_option("ref", ref)->required();
    eval->add_option("--set", sets, "Constant-cell edit REF=VALUE, applied in order");
    eval->add_option("--mode", mode, "eager|lazy|compiled (default eager)");
    eval->add_option("--plan", plan_path, "Compiled plan file (compiled mode)");

    CLI::App* trace = app.add_subcommand("trace", "Print a cell's parser string");
    trace->add_option("file", file)->required();
    trace->add_option("ref", ref)->required();
    trace->add_option("--set", sets, "Constant-cell edit REF=VALUE, applied in order");
    trace->add_flag("--history", history, "One line per append instead of the final string");

    CLI::App* compile = app.add_subcommand("compile", "Compile a workbook to a plan file");
    compile->add_option("file", file)->required();
    compile->add_option("-o,--output", out_path)->required();

    CLI::App* bench = app.add_subcommand("bench", "Generate a workload and time the modes");
    bench->add_option("--shape", shape, "chain|binary-tree|grid|random-dag");
    bench->add_option("--cells", cells, "Workbook size");
    bench->add_option("--pairs", pairs, "Edit/read pairs in the trace");
    bench->add_option("--seed", seed, "Workload seed");
    bench->add_option("--modes", modes, "Comma-separated mode list");
    bench->add_option("--trials", trials, "Timed trials after the discarded warm-up");
    bench->add_flag("--csv", csv, "Emit CSV instead of the aligned table");

    CLI::App* repl = app.add_subcommand("repl", "Interactive what-if session");
    repl->add_option("file", file)->required();

    try {
        app.parse(argc, argv);
        if (check->parsed()) return cmd_check(file);
        if (deps->parsed()) return cmd_deps(file, ref);
        if (eval->parsed()) return cmd_eval(file, ref, sets, mode, plan_path);
        if (trace->parsed()) return cmd_trace(file, ref, sets, history);
        if (compile->parsed()) return cmd_compile(file, out_path);
        if (bench->parsed()) return cmd_bench(shape, cells, pairs, seed, modes, trials, csv);
        if (repl->parsed()) return cmd_repl(file);
        return exit_usage_error;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage_error;
    } catch (const Usage& u) {
        std::cerr << "error: " << u.message << "\n";
        return exit_usage_error;
    } catch (const recalc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_domain_error;
    }
}
