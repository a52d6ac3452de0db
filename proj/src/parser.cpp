#include "pacman/procedure.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace pacman {

Expr& Expr::operator=(const Expr& other) {
    if (this == &other) return *this;
    kind = other.kind;
    literal = other.literal;
    name = other.name;
    lhs = other.lhs ? std::make_unique<Expr>(*other.lhs) : nullptr;
    rhs = other.rhs ? std::make_unique<Expr>(*other.rhs) : nullptr;
    return *this;
}

Expr Expr::make_literal(Value v) {
    Expr e;
    e.kind = Kind::literal;
    e.literal = std::move(v);
    return e;
}

Expr Expr::make_ref(std::string name) {
    Expr e;
    e.kind = Kind::ref;
    e.name = std::move(name);
    return e;
}

Expr Expr::make_binary(Kind k, Expr l, Expr r) {
    Expr e;
    e.kind = k;
    e.lhs = std::make_unique<Expr>(std::move(l));
    e.rhs = std::make_unique<Expr>(std::move(r));
    return e;
}

void Expr::collect_refs(std::vector<std::string>& out) const {
    switch (kind) {
        case Kind::ref: out.push_back(name); break;
        case Kind::add:
        case Kind::sub:
            lhs->collect_refs(out);
            rhs->collect_refs(out);
            break;
        case Kind::literal: break;
    }
}

const char* op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::read: return "read";
        case OpKind::write: return "write";
        case OpKind::insert: return "insert";
        case OpKind::del: return "delete";
    }
    return "?";
}

std::vector<std::pair<int, int>> ProcedureIR::control_edges() const {
    std::vector<std::pair<int, int>> edges;
    for (size_t i = 0; i < ops.size(); i++)
        if (ops[i].guard) edges.emplace_back(ops[i].guard->def_op, static_cast<int>(i));
    return edges;
}

int ProcedureIR::def_op_of(const std::string& var) const {
    for (size_t i = 0; i < ops.size(); i++)
        if (ops[i].out_var && *ops[i].out_var == var) return static_cast<int>(i);
    return -1;
}

namespace {

enum class Tok { ident, integer, string, punct, end };

struct Token {
    Tok kind;
    std::string text;
    int64_t ival = 0;
    int line = 1;
    int col = 1;
};

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(tok_.line, tok_.col, msg);
    }

  private:
    void advance() {
        skip_space();
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_ = {Tok::end, "", 0, line_, col_};
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                take();
            tok_.kind = Tok::ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) && minus_is_sign())) {
            size_t start = pos_;
            if (c == '-') take();
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                take();
            tok_.kind = Tok::integer;
            tok_.text = src_.substr(start, pos_ - start);
            tok_.ival = std::stoll(tok_.text);
            return;
        }
        if (c == '"') {
            take();
            std::string s;
            while (pos_ < src_.size() && src_[pos_] != '"') {
                if (src_[pos_] == '\n') throw ParseError(line_, col_, "unterminated string");
                s.push_back(src_[pos_]);
                take();
            }
            if (pos_ >= src_.size()) throw ParseError(line_, col_, "unterminated string");
            take();
            tok_.kind = Tok::string;
            tok_.text = std::move(s);
            return;
        }
        static const std::string two_char[] = {"!=", "=="};
        for (const auto& p : two_char) {
            if (src_.compare(pos_, 2, p) == 0) {
                tok_.kind = Tok::punct;
                tok_.text = p;
                take();
                take();
                return;
            }
        }
        if (std::string("(){},;=+-").find(c) != std::string::npos) {
            tok_.kind = Tok::punct;
            tok_.text = std::string(1, c);
            take();
            return;
        }
        throw ParseError(line_, col_, std::string("syntax error: unexpected character '") + c + "'");
    }

    // '-' begins a negative literal only where a term may start
    bool minus_is_sign() const {
        return tok_.kind != Tok::ident && tok_.kind != Tok::integer && tok_.text != ")";
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') take();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                take();
            } else {
                break;
            }
        }
    }

    void take() {
        if (src_[pos_] == '\n') {
            line_++;
            col_ = 1;
        } else {
            col_++;
        }
        pos_++;
    }

    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_{Tok::end, "", 0, 1, 1};
};

class Parser {
  public:
    explicit Parser(const std::string& src) : lex_(src) {}

    std::vector<ProcedureIR> parse_all() {
        std::vector<ProcedureIR> procs;
        while (lex_.peek().kind != Tok::end) procs.push_back(parse_proc());
        return procs;
    }

  private:
    Lexer lex_;
    ProcedureIR ir_;
    std::map<std::string, int> locals_;  // var -> defining op index

    void expect_punct(const std::string& p) {
        Token t = lex_.next();
        if (t.kind != Tok::punct || t.text != p)
            throw ParseError(t.line, t.col, "syntax error: expected '" + p + "'");
    }

    std::string expect_ident() {
        Token t = lex_.next();
        if (t.kind != Tok::ident)
            throw ParseError(t.line, t.col, "syntax error: expected identifier");
        return t.text;
    }

    bool peek_punct(const std::string& p) {
        return lex_.peek().kind == Tok::punct && lex_.peek().text == p;
    }

    bool is_keyword(const std::string& s) {
        return s == "proc" || s == "read" || s == "write" || s == "insert" ||
               s == "delete" || s == "if" || s == "else" || s == "null";
    }

    ProcedureIR parse_proc() {
        ir_ = ProcedureIR{};
        locals_.clear();
        Token t = lex_.next();
        if (t.kind != Tok::ident || t.text != "proc")
            throw ParseError(t.line, t.col, "syntax error: expected 'proc'");
        ir_.name = expect_ident();
        expect_punct("(");
        if (!peek_punct(")")) {
            while (true) {
                Token p = lex_.next();
                if (p.kind != Tok::ident)
                    throw ParseError(p.line, p.col, "syntax error: expected parameter name");
                if (std::find(ir_.params.begin(), ir_.params.end(), p.text) != ir_.params.end())
                    throw ParseError(p.line, p.col, "duplicate parameter '" + p.text + "'");
                ir_.params.push_back(p.text);
                if (peek_punct(")")) break;
                expect_punct(",");
            }
        }
        expect_punct(")");
        expect_punct("{");
        parse_block(std::nullopt);
        expect_punct("}");
        return std::move(ir_);
    }

    void parse_block(std::optional<Guard> guard) {
        while (!peek_punct("}")) parse_statement(guard);
    }

    void parse_statement(const std::optional<Guard>& guard) {
        Token t = lex_.peek();
        if (t.kind != Tok::ident)
            throw ParseError(t.line, t.col, "syntax error: expected statement");
        if (t.text == "if") {
            if (guard) throw ParseError(t.line, t.col, "nested if is not supported");
            parse_if();
            return;
        }
        if (t.text == "write" || t.text == "insert") {
            lex_.next();
            Operation op;
            op.kind = t.text == "write" ? OpKind::write : OpKind::insert;
            expect_punct("(");
            op.table = expect_ident();
            expect_punct(",");
            op.key_expr = parse_expr();
            expect_punct(",");
            op.value_expr = parse_expr();
            expect_punct(")");
            expect_punct(";");
            op.guard = guard;
            ir_.ops.push_back(std::move(op));
            return;
        }
        if (t.text == "delete") {
            lex_.next();
            Operation op;
            op.kind = OpKind::del;
            expect_punct("(");
            op.table = expect_ident();
            expect_punct(",");
            op.key_expr = parse_expr();
            expect_punct(")");
            expect_punct(";");
            op.guard = guard;
            ir_.ops.push_back(std::move(op));
            return;
        }
        // assignment: var = read(Tbl, key);
        Token var = lex_.next();
        if (is_keyword(var.text))
            throw ParseError(var.line, var.col, "syntax error: unexpected '" + var.text + "'");
        expect_punct("=");
        Token rd = lex_.next();
        if (rd.kind != Tok::ident || rd.text != "read")
            throw ParseError(rd.line, rd.col, "syntax error: only read() results can be assigned");
        if (locals_.count(var.text) ||
            std::find(ir_.params.begin(), ir_.params.end(), var.text) != ir_.params.end())
            throw ParseError(var.line, var.col, "duplicate assignment to '" + var.text + "'");
        Operation op;
        op.kind = OpKind::read;
        expect_punct("(");
        op.table = expect_ident();
        expect_punct(",");
        op.key_expr = parse_expr();
        expect_punct(")");
        expect_punct(";");
        op.out_var = var.text;
        op.guard = guard;
        locals_[var.text] = static_cast<int>(ir_.ops.size());
        ir_.ops.push_back(std::move(op));
    }

    void parse_if() {
        Token kw = lex_.next();  // 'if'
        expect_punct("(");
        Token var = lex_.next();
        if (var.kind != Tok::ident)
            throw ParseError(var.line, var.col, "syntax error: expected variable in condition");
        auto it = locals_.find(var.text);
        if (it == locals_.end()) {
            bool is_param = std::find(ir_.params.begin(), ir_.params.end(), var.text) !=
                            ir_.params.end();
            throw ParseError(var.line, var.col,
                             is_param ? "guard must test a variable assigned by read"
                                      : "unknown identifier '" + var.text + "'");
        }
        Token cmp = lex_.next();
        if (cmp.kind != Tok::punct || (cmp.text != "!=" && cmp.text != "=="))
            throw ParseError(cmp.line, cmp.col, "syntax error: expected '!=' or '=='");
        Token null_tok = lex_.next();
        if (null_tok.kind != Tok::ident || null_tok.text != "null")
            throw ParseError(null_tok.line, null_tok.col, "syntax error: expected 'null'");
        expect_punct(")");
        bool then_expects_null = cmp.text == "==";

        Guard then_guard{it->second, var.text, then_expects_null};
        expect_punct("{");
        parse_block(then_guard);
        expect_punct("}");
        if (lex_.peek().kind == Tok::ident && lex_.peek().text == "else") {
            lex_.next();
            Guard else_guard{it->second, var.text, !then_expects_null};
            expect_punct("{");
            parse_block(else_guard);
            expect_punct("}");
        }
        (void)kw;
    }

    Expr parse_expr() {
        Expr e = parse_term();
        while (peek_punct("+") || peek_punct("-")) {
            Token op = lex_.next();
            Expr r = parse_term();
            e = Expr::make_binary(op.text == "+" ? Expr::Kind::add : Expr::Kind::sub,
                                  std::move(e), std::move(r));
        }
        return e;
    }

    Expr parse_term() {
        Token t = lex_.next();
        if (t.kind == Tok::integer) return Expr::make_literal(Value{t.ival});
        if (t.kind == Tok::string) return Expr::make_literal(Value{t.text});
        if (t.kind == Tok::punct && t.text == "(") {
            Expr e = parse_expr();
            expect_punct(")");
            return e;
        }
        if (t.kind == Tok::ident) {
            if (is_keyword(t.text))
                throw ParseError(t.line, t.col, "syntax error: unexpected '" + t.text + "'");
            bool is_param = std::find(ir_.params.begin(), ir_.params.end(), t.text) !=
                            ir_.params.end();
            if (!is_param && !locals_.count(t.text))
                throw ParseError(t.line, t.col, "unknown identifier '" + t.text + "'");
            return Expr::make_ref(t.text);
        }
        throw ParseError(t.line, t.col, "syntax error: expected expression");
    }
};

}  // namespace

ProcedureIR parse_procedure(const std::string& text) {
    Parser p(text);
    auto procs = p.parse_all();
    if (procs.size() != 1) {
        throw ParseError(1, 1, procs.empty() ? "no procedure found"
                                             : "expected a single procedure");
    }
    return std::move(procs.front());
}

std::vector<ProcedureIR> parse_procedures(const std::string& text) {
    Parser p(text);
    auto procs = p.parse_all();
    if (procs.empty()) throw ParseError(1, 1, "no procedure found");
    return procs;
}

std::vector<DepEdge> extract_flow_deps(const ProcedureIR& ir) {
    std::set<DepEdge> edges;
    for (size_t j = 0; j < ir.ops.size(); j++) {
        const Operation& op = ir.ops[j];
        std::vector<std::string> refs;
        op.key_expr.collect_refs(refs);
        if (op.value_expr) op.value_expr->collect_refs(refs);
        for (const std::string& r : refs) {
            int def = ir.def_op_of(r);
            if (def >= 0 && def != static_cast<int>(j))
                edges.insert({def, static_cast<int>(j), DepKind::flow});
        }
        if (op.guard) edges.insert({op.guard->def_op, static_cast<int>(j), DepKind::flow});
    }
    return {edges.begin(), edges.end()};
}

std::vector<DepEdge> extract_data_deps(const ProcedureIR& ir) {
    std::vector<DepEdge> edges;
    for (size_t i = 0; i < ir.ops.size(); i++) {
        for (size_t j = i + 1; j < ir.ops.size(); j++) {
            if (ir.ops[i].table != ir.ops[j].table) continue;
            if (!is_modification(ir.ops[i].kind) && !is_modification(ir.ops[j].kind)) continue;
            edges.push_back({static_cast<int>(i), static_cast<int>(j), DepKind::data});
        }
    }
    return edges;
}

}  // namespace pacman
