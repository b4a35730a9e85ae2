#include "recalc/lazy.hpp"

#include <algorithm>
#include <cmath>

namespace recalc {

LazyRegistry::LazyRegistry(std::shared_ptr<const Workbook> workbook)
    : workbook_(std::move(workbook)) {
    states_.resize(workbook_->cell_count());
}

LazyRegistry::LazyRegistry(std::shared_ptr<const CompiledPlan> plan)
    : plan_(std::move(plan)) {
    states_.resize(plan_->cell_count());
    code_.resize(plan_->cell_count());
    for (std::size_t i = 0; i < plan_->cell_count(); ++i) {
        const CompiledProgram& prog = plan_->program_at(i);
        code_[i].reserve(prog.instructions.size());
        for (const Instruction& in : prog.instructions) {
            std::uint32_t slot = 0;
            if (in.op == Opcode::Load)
                slot = static_cast<std::uint32_t>(plan_->index_of(in.ref));
            code_[i].push_back({in.op, in.value, slot, in.func, in.argc});
        }
    }
}

std::size_t LazyRegistry::resolve(const CellRef& ref) const {
    std::size_t idx = workbook_ ? workbook_->find(ref) : plan_->find(ref);
    if (idx == static_cast<std::size_t>(-1)) throw UnknownCell(ref);
    return idx;
}

CellRef LazyRegistry::ref_at(std::size_t idx) const {
    return workbook_ ? workbook_->cell_at(idx).ref : plan_->order()[idx];
}

const std::vector<std::size_t>& LazyRegistry::children_of(std::size_t idx) const {
    return workbook_ ? workbook_->children_of(idx) : plan_->children_of(idx);
}

void LazyRegistry::discover(std::size_t idx) {
    if (states_[idx].flags & flag_discovered) return;

    struct Frame {
        std::size_t idx;
        std::size_t next = 0;
    };
    auto instantiate = [this](std::size_t i) {
        states_[i].flags = flag_discovered | flag_dirty | flag_on_stack;
        ++counters_.discoveries;
    };

    instantiate(idx);
    std::vector<Frame> stack{{idx}};
    while (!stack.empty()) {
        Frame& top = stack.back();
        const std::vector<std::size_t>& children = children_of(top.idx);
        if (top.next < children.size()) {
            std::size_t child = children[top.next++];
            State& cs = states_[child];
            if (!(cs.flags & flag_discovered)) {
                instantiate(child);
                cs.ancestors.push_back(static_cast<std::uint32_t>(top.idx));
                stack.push_back({child});
            } else {
                if (cs.flags & flag_on_stack) {
                    // Load-time validation normally precludes this.
                    throw CircularReference(
                        {ref_at(child), ref_at(top.idx)});
                }
                cs.ancestors.push_back(static_cast<std::uint32_t>(top.idx));
            }
        } else {
            states_[top.idx].flags &= ~flag_on_stack;
            stack.pop_back();
        }
    }
}

void LazyRegistry::get_cell(const CellRef& ref) { discover(resolve(ref)); }

void LazyRegistry::set_value(const CellRef& ref, double value) {
    std::size_t idx = resolve(ref);
    if (!children_of(idx).empty()) throw NotConstant(ref);
    discover(idx);
    State& s = states_[idx];
    s.val = value;
    s.flags &= ~flag_dirty;  // the written value is authoritative

    // Mark every transitively discovered ancestor dirty; already-dirty
    // states terminate the walk (their ancestors were marked when they
    // were dirtied, or will surface dirty on discovery).
    std::vector<std::uint32_t> work(s.ancestors.begin(), s.ancestors.end());
    while (!work.empty()) {
        std::uint32_t a = work.back();
        work.pop_back();
        State& as = states_[a];
        if (as.flags & flag_dirty) continue;
        as.flags |= flag_dirty;
        work.insert(work.end(), as.ancestors.begin(), as.ancestors.end());
    }
}

double LazyRegistry::evaluate(std::size_t idx) {
    if (workbook_) {
        const Cell& cell = workbook_->cell_at(idx);
        return eval_formula(*cell.ast, [this](const CellRef& r) -> double {
            std::size_t j = workbook_->find(r);
            if (j == static_cast<std::size_t>(-1)) throw UnboundRef(r);
            return states_[j].val;
        });
    }
    const std::vector<SlotInstruction>& code = code_[idx];
    double stack[64];
    std::size_t sp = 0;
    auto check = [](double v) -> double {
        if (!std::isfinite(v)) throw EvalError("non-finite result");
        return v;
    };
    // Programs are stack-balance validated at plan construction, so the only
    // depth check needed here guards the fixed buffer size.
    for (const SlotInstruction& in : code) {
        switch (in.op) {
            case Opcode::Push:
                if (sp == 64) goto slow;
                stack[sp++] = in.value;
                break;
            case Opcode::Load:
                if (sp == 64) goto slow;
                stack[sp++] = states_[in.slot].val;
                break;
            case Opcode::Neg: stack[sp - 1] = -stack[sp - 1]; break;
            case Opcode::Add: --sp; stack[sp - 1] = check(stack[sp - 1] + stack[sp]); break;
            case Opcode::Sub: --sp; stack[sp - 1] = check(stack[sp - 1] - stack[sp]); break;
            case Opcode::Mul: --sp; stack[sp - 1] = check(stack[sp - 1] * stack[sp]); break;
            case Opcode::Div:
                --sp;
                if (stack[sp] == 0.0) throw EvalError("division by zero");
                stack[sp - 1] = check(stack[sp - 1] / stack[sp]);
                break;
            case Opcode::Pow:
                --sp;
                stack[sp - 1] = check(std::pow(stack[sp - 1], stack[sp]));
                break;
            case Opcode::Call: {
                std::size_t base = sp - in.argc;
                double acc = stack[base];
                switch (in.func) {
                    case Builtin::Sum:
                    case Builtin::Average:
                        for (std::size_t k = base + 1; k < sp; ++k) acc += stack[k];
                        if (in.func == Builtin::Average) acc /= in.argc;
                        break;
                    case Builtin::Min:
                        for (std::size_t k = base + 1; k < sp; ++k)
                            acc = std::min(acc, stack[k]);
                        break;
                    case Builtin::Max:
                        for (std::size_t k = base + 1; k < sp; ++k)
                            acc = std::max(acc, stack[k]);
                        break;
                }
                sp = base;
                stack[sp++] = check(acc);
                break;
            }
        }
    }
    return stack[0];
slow:
    // Rare path: program needs more than the fixed stack. Re-run through the
    // general executor against current state values.
    return exec_program(plan_->program_at(idx), [this](const CellRef& r) -> double {
        return states_[plan_->index_of(r)].val;
    });
}

double LazyRegistry::get_value(const CellRef& ref) {
    std::size_t idx = resolve(ref);
    discover(idx);
    if (!(states_[idx].flags & flag_dirty)) return states_[idx].val;

    // Iterative post-order recompute over dirty descendants.
    struct Frame {
        std::size_t idx;
        std::size_t next = 0;
    };
    std::vector<Frame> stack{{idx}};
    while (!stack.empty()) {
        Frame& top = stack.back();
        const std::vector<std::size_t>& children = children_of(top.idx);
        if (top.next < children.size()) {
            std::size_t child = children[top.next++];
            if (states_[child].flags & flag_dirty) stack.push_back({child});
        } else {
            State& s = states_[top.idx];
            s.val = evaluate(top.idx);
            s.flags &= ~flag_dirty;
            ++counters_.recomputes;
            if (!children.empty()) ++counters_.evals;
            stack.pop_back();
        }
    }
    return states_[idx].val;
}

bool LazyRegistry::is_discovered(const CellRef& ref) const {
    return states_[resolve(ref)].flags & flag_discovered;
}

bool LazyRegistry::is_dirty(const CellRef& ref) const {
    return states_[resolve(ref)].flags & flag_dirty;
}

std::vector<CellRef> LazyRegistry::discovered() const {
    std::vector<CellRef> out;
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (states_[i].flags & flag_discovered) out.push_back(ref_at(i));
    return out;
}

std::vector<CellRef> LazyRegistry::discovered_ancestors(const CellRef& ref) const {
    std::size_t idx = resolve(ref);
    std::vector<CellRef> out;
    for (std::uint32_t a : states_[idx].ancestors) out.push_back(ref_at(a));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace recalc
