#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pacman/value.hpp"

namespace pacman {

struct ParseError : std::runtime_error {
    ParseError(int line, int col, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(col) +
                             ": " + msg),
          line(line), col(col) {}
    int line;
    int col;
};

// Integer/string expression over procedure params and read-assigned locals.
struct Expr {
    enum class Kind { literal, ref, add, sub };

    Kind kind = Kind::literal;
    Value literal{int64_t{0}};
    std::string name;  // ref only
    std::unique_ptr<Expr> lhs, rhs;

    Expr() = default;
    Expr(const Expr& other) { *this = other; }
    Expr& operator=(const Expr& other);
    Expr(Expr&&) = default;
    Expr& operator=(Expr&&) = default;

    static Expr make_literal(Value v);
    static Expr make_ref(std::string name);
    static Expr make_binary(Kind k, Expr l, Expr r);

    void collect_refs(std::vector<std::string>& out) const;
};

enum class OpKind { read, write, insert, del };

const char* op_kind_name(OpKind k);
inline bool is_modification(OpKind k) { return k != OpKind::read; }

// guard ops execute only when var's null-ness matches expect_null
struct Guard {
    int def_op = -1;  // read op that assigns var
    std::string var;
    bool expect_null = false;
};

struct Operation {
    OpKind kind = OpKind::read;
    std::string table;
    Expr key_expr;
    std::optional<Expr> value_expr;      // write/insert
    std::optional<std::string> out_var;  // read
    std::optional<Guard> guard;
};

enum class DepKind { flow, data };

struct DepEdge {
    int from = 0;
    int to = 0;
    DepKind kind = DepKind::flow;

    auto operator<=>(const DepEdge&) const = default;
};

struct ProcedureIR {
    std::string name;
    std::vector<std::string> params;
    std::vector<Operation> ops;

    // (guard_op_index, guarded_op_index), guard index < guarded index
    std::vector<std::pair<int, int>> control_edges() const;
    // op index that assigns each local, in definition order
    int def_op_of(const std::string& var) const;
};

// Parses the procedure DSL:
//   proc Name(p1, p2) {
//     v = read(Tbl, key);
//     write(Tbl, key, val);
//     insert(Tbl, key, val);
//     delete(Tbl, key);
//     if (v != null) { ... } else { ... }
//   }
// '#' starts a line comment. Statements are semicolon-terminated.
ProcedureIR parse_procedure(const std::string& text);

// All procedures in one source (or file); at least one required.
std::vector<ProcedureIR> parse_procedures(const std::string& text);

// define-use and control relations; edges point forward in program order
std::vector<DepEdge> extract_flow_deps(const ProcedureIR& ir);

// same table and at least one side modifies; stored with from < to
std::vector<DepEdge> extract_data_deps(const ProcedureIR& ir);

}  // namespace pacman
