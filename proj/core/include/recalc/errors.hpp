#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "recalc/cell_ref.hpp"

namespace recalc {

/// Base class for all domain errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedRef : public Error {
public:
    using Error::Error;
};

/// Formula text rejected by the lexer or parser. Carries the zero-based
/// character offset of the offending position.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, std::size_t offset)
        : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

    /// Wraps an inner error with location context (e.g. the cell it came from).
    SyntaxError(const std::string& prefix, const SyntaxError& inner)
        : Error(prefix + inner.what()), offset_(inner.offset()) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class XmlError : public Error {
public:
    using Error::Error;
};

class DanglingRef : public Error {
public:
    using Error::Error;
};

class DuplicateCell : public Error {
public:
    using Error::Error;
};

/// Directed cycle in the dependency graph. Carries one witness cycle;
/// the first element is implied to follow the last.
class CircularReference : public Error {
public:
    explicit CircularReference(std::vector<CellRef> cycle)
        : Error(format(cycle)), cycle_(std::move(cycle)) {}

    const std::vector<CellRef>& cycle() const { return cycle_; }

    static std::string format(const std::vector<CellRef>& cycle) {
        std::string s = "circular reference: ";
        for (const auto& r : cycle) s += r.to_string() + " -> ";
        if (!cycle.empty()) s += cycle.front().to_string();
        return s;
    }

private:
    std::vector<CellRef> cycle_;
};

class UnknownCell : public Error {
public:
    explicit UnknownCell(const CellRef& ref) : Error("unknown cell " + ref.to_string()) {}
    explicit UnknownCell(const std::string& message) : Error(message) {}
};

class NotConstant : public Error {
public:
    explicit NotConstant(const CellRef& ref)
        : Error("cell " + ref.to_string() + " does not have a constant formula") {}
};

class UnboundRef : public Error {
public:
    explicit UnboundRef(const CellRef& ref)
        : Error("reference " + ref.to_string() + " is not bound") {}
};

class EvalError : public Error {
public:
    using Error::Error;
};

class PlanFormatError : public Error {
public:
    using Error::Error;
};

}  // namespace recalc
