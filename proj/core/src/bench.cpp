#include "recalc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

namespace recalc {

std::string_view shape_name(WorkloadShape s) {
    switch (s) {
        case WorkloadShape::Chain: return "chain";
        case WorkloadShape::BinaryTree: return "binary-tree";
        case WorkloadShape::Grid: return "grid";
        case WorkloadShape::RandomDag: return "random-dag";
    }
    return "?";
}

std::string_view mode_name(EngineMode m) {
    switch (m) {
        case EngineMode::Eager: return "eager";
        case EngineMode::Lazy: return "lazy";
        case EngineMode::Compiled: return "compiled";
    }
    return "?";
}

bool parse_shape(std::string_view text, WorkloadShape& out) {
    for (WorkloadShape s : {WorkloadShape::Chain, WorkloadShape::BinaryTree,
                            WorkloadShape::Grid, WorkloadShape::RandomDag})
        if (text == shape_name(s)) {
            out = s;
            return true;
        }
    return false;
}

bool parse_mode(std::string_view text, EngineMode& out) {
    for (EngineMode m : {EngineMode::Eager, EngineMode::Lazy, EngineMode::Compiled})
        if (text == mode_name(m)) {
            out = m;
            return true;
        }
    return false;
}

// ---------------------------------------------------------------------------
// Workload generation

namespace {

CellRef row_ref(std::uint32_t i) { return CellRef(1, i); }  // column A, row i

void append_cell(std::string& xml, const CellRef& ref, const std::string& formula) {
    xml += "  <cell ref=\"" + ref.to_string() + "\" formula=\"" + formula + "\"/>\n";
}

}  // namespace

Workload generate_workload(const WorkloadSpec& spec) {
    const std::uint32_t n = spec.cell_count;
    std::mt19937_64 rng(spec.seed);

    std::string xml = "<workbook name=\"" + std::string(shape_name(spec.shape)) + "\">\n";
    std::vector<CellRef> constants;
    std::vector<CellRef> all;

    switch (spec.shape) {
        case WorkloadShape::Chain:
            // Cell i adds 1 to its predecessor; the head is the only constant.
            for (std::uint32_t i = 1; i <= n; ++i) {
                CellRef ref = row_ref(i);
                all.push_back(ref);
                if (i == 1) {
                    append_cell(xml, ref, "1");
                    constants.push_back(ref);
                } else {
                    append_cell(xml, ref, row_ref(i - 1).to_string() + "+1");
                }
            }
            break;
        case WorkloadShape::BinaryTree:
            // Heap layout: node i sums nodes 2i and 2i+1; nodes without
            // children are unit leaves.
            for (std::uint32_t i = 1; i <= n; ++i) {
                CellRef ref = row_ref(i);
                all.push_back(ref);
                std::uint32_t left = 2 * i, right = 2 * i + 1;
                if (left > n) {
                    append_cell(xml, ref, "1");
                    constants.push_back(ref);
                } else if (right > n) {
                    append_cell(xml, ref, row_ref(left).to_string());
                } else {
                    append_cell(xml, ref,
                                row_ref(left).to_string() + "+" + row_ref(right).to_string());
                }
            }
            break;
        case WorkloadShape::Grid: {
            // Row-major fill; every cell sums its left and upper neighbors.
            auto width = static_cast<std::uint32_t>(std::ceil(std::sqrt(double(n))));
            for (std::uint32_t k = 0; k < n; ++k) {
                std::uint32_t r = k / width + 1, c = k % width + 1;
                CellRef ref(c, r);
                all.push_back(ref);
                std::string formula;
                if (c > 1) formula = CellRef(c - 1, r).to_string();
                if (r > 1) {
                    if (!formula.empty()) formula += "+";
                    formula += CellRef(c, r - 1).to_string();
                }
                if (formula.empty()) {
                    formula = "1";
                    constants.push_back(ref);
                }
                append_cell(xml, ref, formula);
            }
            break;
        }
        case WorkloadShape::RandomDag:
            // Each cell sums one to three random earlier cells.
            for (std::uint32_t i = 1; i <= n; ++i) {
                CellRef ref = row_ref(i);
                all.push_back(ref);
                if (i == 1) {
                    append_cell(xml, ref, "1");
                    constants.push_back(ref);
                    continue;
                }
                std::uint32_t k = std::min<std::uint32_t>(
                    1 + static_cast<std::uint32_t>(rng() % 3), i - 1);
                std::vector<std::uint32_t> picks;
                while (picks.size() < k) {
                    std::uint32_t p = 1 + static_cast<std::uint32_t>(rng() % (i - 1));
                    if (std::find(picks.begin(), picks.end(), p) == picks.end())
                        picks.push_back(p);
                }
                std::string formula;
                for (std::uint32_t p : picks) {
                    if (!formula.empty()) formula += "+";
                    formula += row_ref(p).to_string();
                }
                append_cell(xml, ref, formula);
            }
            break;
    }
    xml += "</workbook>\n";

    Workload wl{Workbook::load(xml), {}};
    wl.ops.reserve(std::size_t(spec.edit_read_pairs) * 2);
    for (std::uint32_t p = 0; p < spec.edit_read_pairs; ++p) {
        const CellRef& target = constants[rng() % constants.size()];
        wl.ops.push_back({TraceOp::Kind::Set, target, double(rng() % 10)});
        wl.ops.push_back({TraceOp::Kind::Get, all[rng() % all.size()], 0});
    }
    return wl;
}

// ---------------------------------------------------------------------------
// Sessions

EagerSession::EagerSession(const Workbook& wb) : wb_(wb) {
    evals_ = wb_.recompute_all();  // the eager strategy calculates everything up front
    recomputes_ = evals_;
}

void EagerSession::set(const CellRef& ref, double value) {
    RecomputeReport report = set_and_recompute_in_place(wb_, ref, value);
    evals_ += report.recompute_count;
    recomputes_ += report.recompute_count;
}

double EagerSession::get(const CellRef& ref) const {
    return wb_.value_at(wb_.index_of(ref));
}

LazySession::LazySession(std::shared_ptr<const Workbook> wb) : reg_(std::move(wb)) {}
LazySession::LazySession(std::shared_ptr<const CompiledPlan> plan) : reg_(std::move(plan)) {}

// ---------------------------------------------------------------------------
// Measurement

namespace {

struct TrialResult {
    double ms;
    std::uint64_t evals;
    std::uint64_t recomputes;
};

template <typename Session, typename Factory>
TrialResult run_trial(Factory make, const std::vector<TraceOp>& ops) {
    auto start = std::chrono::steady_clock::now();
    Session session = make();
    double sink = 0;
    for (const TraceOp& op : ops) {
        if (op.kind == TraceOp::Kind::Set)
            session.set(op.ref, op.value);
        else
            sink += session.get(op.ref);
    }
    auto stop = std::chrono::steady_clock::now();
    (void)sink;
    return {std::chrono::duration<double, std::milli>(stop - start).count(),
            session.evals(), session.recomputes()};
}

}  // namespace

BenchReport run_bench(const WorkloadSpec& spec, std::span<const EngineMode> modes,
                      std::uint32_t trials) {
    Workload wl = generate_workload(spec);
    auto wb = std::make_shared<const Workbook>(std::move(wl.workbook));
    std::shared_ptr<const CompiledPlan> plan;
    for (EngineMode m : modes)
        if (m == EngineMode::Compiled && !plan)
            plan = std::make_shared<const CompiledPlan>(compile_plan(*wb));

    BenchReport report;
    report.trials = trials;
    for (EngineMode m : modes) {
        ModeStats stats;
        stats.mode = m;
        for (std::uint32_t t = 0; t <= trials; ++t) {
            TrialResult r{};
            switch (m) {
                case EngineMode::Eager:
                    r = run_trial<EagerSession>([&] { return EagerSession(*wb); }, wl.ops);
                    break;
                case EngineMode::Lazy:
                    r = run_trial<LazySession>([&] { return LazySession(wb); }, wl.ops);
                    break;
                case EngineMode::Compiled:
                    r = run_trial<LazySession>([&] { return LazySession(plan); }, wl.ops);
                    break;
            }
            if (t == 0) continue;  // warm-up run discarded
            stats.trial_ms.push_back(r.ms);
            stats.evals = r.evals;
            stats.recomputes = r.recomputes;
        }
        double sum = 0;
        for (double v : stats.trial_ms) sum += v;
        stats.avg_ms = sum / double(stats.trial_ms.size());
        if (stats.trial_ms.size() > 1) {
            double ss = 0;
            for (double v : stats.trial_ms) ss += (v - stats.avg_ms) * (v - stats.avg_ms);
            stats.stddev_ms = std::sqrt(ss / double(stats.trial_ms.size() - 1));
        }
        report.modes.push_back(std::move(stats));
    }
    return report;
}

namespace {

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

std::string format_report_table(const BenchReport& report) {
    std::string out = "mode      avg_ms       stddev_ms    evals        recomputes\n";
    for (const ModeStats& s : report.modes) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-9s %-12s %-12s %-12llu %llu\n",
                      std::string(mode_name(s.mode)).c_str(), fixed3(s.avg_ms).c_str(),
                      fixed3(s.stddev_ms).c_str(),
                      static_cast<unsigned long long>(s.evals),
                      static_cast<unsigned long long>(s.recomputes));
        out += buf;
    }
    return out;
}

std::string format_report_csv(const BenchReport& report) {
    std::string out = "mode,avg_ms,stddev_ms,evals,recomputes\n";
    for (const ModeStats& s : report.modes) {
        out += std::string(mode_name(s.mode)) + ',' + fixed3(s.avg_ms) + ',' +
               fixed3(s.stddev_ms) + ',' + std::to_string(s.evals) + ',' +
               std::to_string(s.recomputes) + '\n';
    }
    return out;
}

}  // namespace recalc
