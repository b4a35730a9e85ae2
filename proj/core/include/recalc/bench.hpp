#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "recalc/eager.hpp"
#include "recalc/lazy.hpp"
#include "recalc/plan.hpp"
#include "recalc/workbook.hpp"

namespace recalc {

enum class WorkloadShape { Chain, BinaryTree, Grid, RandomDag };

enum class EngineMode { Eager, Lazy, Compiled };

std::string_view shape_name(WorkloadShape s);
std::string_view mode_name(EngineMode m);
bool parse_shape(std::string_view text, WorkloadShape& out);
bool parse_mode(std::string_view text, EngineMode& out);

struct WorkloadSpec {
    WorkloadShape shape = WorkloadShape::Chain;
    std::uint32_t cell_count = 1;
    std::uint32_t edit_read_pairs = 1;
    std::uint64_t seed = 0;
};

struct TraceOp {
    enum class Kind { Set, Get } kind;
    CellRef ref;
    double value = 0;  // Set only
};

struct Workload {
    Workbook workbook;
    std::vector<TraceOp> ops;
};

/// Deterministic synthetic workbook plus an edit/read trace. Edits target
/// constant cells, reads target arbitrary cells; all values are small
/// integers so cross-mode comparisons are exact.
Workload generate_workload(const WorkloadSpec& spec);

// ---------------------------------------------------------------------------
// Replay sessions. Each wraps one recomputation strategy behind a common
// set/get surface and counts the work it performs. A trial covers the
// session's construction (the eager strategy pays its full initial
// calculation there) plus the trace replay.

class EagerSession {
public:
    explicit EagerSession(const Workbook& wb);
    void set(const CellRef& ref, double value);
    double get(const CellRef& ref) const;
    std::uint64_t evals() const { return evals_; }
    std::uint64_t recomputes() const { return recomputes_; }

private:
    Workbook wb_;
    std::uint64_t evals_ = 0;
    std::uint64_t recomputes_ = 0;
};

class LazySession {
public:
    LazySession(std::shared_ptr<const Workbook> wb);
    LazySession(std::shared_ptr<const CompiledPlan> plan);
    void set(const CellRef& ref, double value) { reg_.set_value(ref, value); }
    double get(const CellRef& ref) { return reg_.get_value(ref); }
    std::uint64_t evals() const { return reg_.counters().evals; }
    std::uint64_t recomputes() const { return reg_.counters().recomputes; }
    const LazyRegistry& registry() const { return reg_; }

private:
    LazyRegistry reg_;
};

// ---------------------------------------------------------------------------
// Measurement

struct ModeStats {
    EngineMode mode;
    double avg_ms = 0;
    double stddev_ms = 0;  // unbiased sample standard deviation
    std::uint64_t evals = 0;
    std::uint64_t recomputes = 0;
    std::vector<double> trial_ms;  // retained trials (first run discarded)
};

struct BenchReport {
    std::vector<ModeStats> modes;
    std::uint32_t trials = 0;
};

/// Replays the workload trace per mode from an identical initial state,
/// `trials` timed runs each after one discarded warm-up run. Workload
/// generation and plan compilation are excluded from the timing.
BenchReport run_bench(const WorkloadSpec& spec, std::span<const EngineMode> modes,
                      std::uint32_t trials = 10);

std::string format_report_table(const BenchReport& report);

/// CSV with header "mode,avg_ms,stddev_ms,evals,recomputes".
std::string format_report_csv(const BenchReport& report);

}  // namespace recalc
