#include "codesift/pysyntax.hpp"

#include <array>
#include <cstdint>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace codesift {
namespace pysyntax {
namespace {

struct Reject {
    std::string msg;
    int line;
};

[[noreturn]] void reject(const std::string& msg, int line) { throw Reject{msg, line}; }

enum class Kind { Name, Number, String, Op, Newline, Indent, Dedent, End };

struct Token {
    Kind kind;
    std::string text;
    int line;
};

bool is_ident_start(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}
bool is_ident_cont(unsigned char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_hex(unsigned char c) {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

bool valid_string_prefix(std::string_view p) {
    if (p.size() > 2) return false;
    std::string low;
    for (char c : p) low += static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c);
    static const std::unordered_set<std::string> kPrefixes = {"r",  "b",  "u",  "f",
                                                              "br", "rb", "fr", "rf"};
    return low.empty() || kPrefixes.count(low) > 0;
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(normalize(src)) {}

    std::vector<Token> run() {
        indents_.push_back(0);
        at_line_start_ = true;
        while (pos_ < src_.size()) step();
        finish();
        return std::move(tokens_);
    }

private:
    static std::string normalize(std::string_view src) {
        std::string out;
        out.reserve(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (src[i] == '\r') {
                out += '\n';
                if (i + 1 < src.size() && src[i + 1] == '\n') ++i;
            } else {
                out += src[i];
            }
        }
        return out;
    }

    char cur() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
    char at(std::size_t offset) const {
        return pos_ + offset < src_.size() ? src_[pos_ + offset] : '\0';
    }
    bool done() const { return pos_ >= src_.size(); }

    void emit(Kind kind, std::string text) { tokens_.push_back({kind, std::move(text), line_}); }

    void step() {
        if (at_line_start_ && depth_ == 0) {
            measure_indent();
            return;
        }
        char c = cur();
        if (c == '\n') {
            ++pos_;
            ++line_;
            if (depth_ == 0) {
                emit(Kind::Newline, "\n");
                at_line_start_ = true;
            }
            return;
        }
        if (c == ' ' || c == '\t' || c == '\f') {
            ++pos_;
            return;
        }
        if (c == '#') {
            while (!done() && cur() != '\n') ++pos_;
            return;
        }
        if (c == '\\' && at(1) == '\n') {
            pos_ += 2;
            ++line_;
            return;  // explicit line joining
        }
        if (c == '\\') reject("unexpected character after line continuation", line_);
        if (is_ident_start(static_cast<unsigned char>(c))) {
            lex_name_or_prefixed_string();
            return;
        }
        if (is_digit(static_cast<unsigned char>(c)) ||
            (c == '.' && is_digit(static_cast<unsigned char>(at(1))))) {
            lex_number();
            return;
        }
        if (c == '\'' || c == '"') {
            lex_string("");
            return;
        }
        lex_operator();
    }

    void measure_indent() {
        // Consume leading whitespace; skip blank and comment-only lines entirely.
        for (;;) {
            std::size_t col = 0;
            std::size_t scan = pos_;
            while (scan < src_.size()) {
                char c = src_[scan];
                if (c == ' ') {
                    ++col;
                } else if (c == '\t') {
                    col = (col / 8 + 1) * 8;
                } else if (c == '\f') {
                    col = 0;
                } else {
                    break;
                }
                ++scan;
            }
            if (scan >= src_.size()) {
                pos_ = scan;
                return;
            }
            if (src_[scan] == '\n') {
                pos_ = scan + 1;
                ++line_;
                continue;
            }
            if (src_[scan] == '#') {
                pos_ = scan;
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;  // newline handled on next loop
            }
            pos_ = scan;
            apply_indent(col);
            at_line_start_ = false;
            return;
        }
    }

    void apply_indent(std::size_t col) {
        if (col > indents_.back()) {
            indents_.push_back(col);
            emit(Kind::Indent, "");
            return;
        }
        while (col < indents_.back()) {
            indents_.pop_back();
            emit(Kind::Dedent, "");
        }
        if (col != indents_.back()) reject("unindent does not match any outer level", line_);
    }

    void lex_name_or_prefixed_string() {
        std::size_t start = pos_;
        while (!done() && is_ident_cont(static_cast<unsigned char>(cur()))) ++pos_;
        std::string name = src_.substr(start, pos_ - start);
        if ((cur() == '\'' || cur() == '"') && valid_string_prefix(name)) {
            lex_string(name);
            return;
        }
        emit(Kind::Name, std::move(name));
    }

    void lex_string(const std::string& prefix) {
        const int start_line = line_;
        const char q = cur();
        bool triple = at(1) == q && at(2) == q;
        pos_ += triple ? 3 : 1;
        for (;;) {
            if (done()) reject("unterminated string literal", start_line);
            char c = cur();
            if (c == '\\') {
                if (at(1) == '\n') ++line_;
                pos_ += (pos_ + 1 < src_.size()) ? 2 : 1;
                if (pos_ > src_.size()) reject("unterminated string literal", start_line);
                continue;
            }
            if (c == '\n') {
                if (!triple) reject("EOL while scanning string literal", start_line);
                ++line_;
                ++pos_;
                continue;
            }
            if (c == q) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (at(1) == q && at(2) == q) {
                    pos_ += 3;
                    break;
                }
                ++pos_;
                continue;
            }
            ++pos_;
        }
        emit(Kind::String, prefix);
    }

    // digit run with single underscores strictly between digits
    void digits(bool (*pred)(unsigned char), const char* what) {
        if (!pred(static_cast<unsigned char>(cur()))) reject(std::string("invalid ") + what, line_);
        while (pred(static_cast<unsigned char>(cur()))) ++pos_;
        while (cur() == '_') {
            ++pos_;
            if (!pred(static_cast<unsigned char>(cur())))
                reject(std::string("invalid ") + what + " (underscore placement)", line_);
            while (pred(static_cast<unsigned char>(cur()))) ++pos_;
        }
    }

    void lex_number() {
        std::size_t start = pos_;
        bool is_int = true;
        if (cur() == '0' && (at(1) == 'x' || at(1) == 'X')) {
            pos_ += 2;
            if (cur() == '_') ++pos_;  // 0x_dead_beef is legal
            digits(is_hex, "hexadecimal literal");
        } else if (cur() == '0' && (at(1) == 'o' || at(1) == 'O')) {
            pos_ += 2;
            if (cur() == '_') ++pos_;
            digits([](unsigned char c) { return c >= '0' && c <= '7'; }, "octal literal");
        } else if (cur() == '0' && (at(1) == 'b' || at(1) == 'B')) {
            pos_ += 2;
            if (cur() == '_') ++pos_;
            digits([](unsigned char c) { return c == '0' || c == '1'; }, "binary literal");
        } else {
            bool leading_zero = cur() == '0';
            bool nonzero = false;
            if (cur() != '.') {
                digits(is_digit, "decimal literal");
                for (std::size_t i = start; i < pos_; ++i)
                    if (src_[i] >= '1' && src_[i] <= '9') nonzero = true;
            }
            if (cur() == '.') {
                is_int = false;
                ++pos_;
                if (is_digit(static_cast<unsigned char>(cur())))
                    digits(is_digit, "decimal literal");
            }
            if (cur() == 'e' || cur() == 'E') {
                std::size_t save = pos_;
                ++pos_;
                if (cur() == '+' || cur() == '-') ++pos_;
                if (is_digit(static_cast<unsigned char>(cur()))) {
                    is_int = false;
                    digits(is_digit, "decimal literal");
                } else {
                    pos_ = save;  // "1e" is NUMBER NAME-ish; let grammar reject "1 e"
                    reject("invalid decimal literal", line_);
                }
            }
            if (cur() == 'j' || cur() == 'J') {
                is_int = false;
                ++pos_;
            }
            if (is_int && leading_zero && nonzero)
                reject("leading zeros in decimal integer literals are not permitted", line_);
        }
        emit(Kind::Number, src_.substr(start, pos_ - start));
    }

    void lex_operator() {
        static constexpr std::array<std::string_view, 24> kLong = {
            "**=", "//=", ">>=", "<<=", "...", "==", "!=", ">=", "<=", "->", ":=", "+=",
            "-=",  "*=",  "/=",  "%=",  "&=",  "|=", "^=", "@=", "**", "//", "<<", ">>"};
        static constexpr std::string_view kSingle = "+-*/%@&|^~<>=()[]{},:.;";
        for (std::string_view op : kLong) {
            if (src_.compare(pos_, op.size(), op) == 0) {
                track_brackets(op);
                emit(Kind::Op, std::string(op));
                pos_ += op.size();
                return;
            }
        }
        char c = cur();
        if (kSingle.find(c) != std::string_view::npos) {
            std::string op(1, c);
            track_brackets(op);
            emit(Kind::Op, op);
            ++pos_;
            return;
        }
        reject(std::string("invalid character '") + c + "'", line_);
    }

    void track_brackets(std::string_view op) {
        if (op == "(" || op == "[" || op == "{") {
            brackets_.push_back(op[0]);
            ++depth_;
        } else if (op == ")" || op == "]" || op == "}") {
            static const std::string open = "([{", close = ")]}";
            if (brackets_.empty()) reject("unmatched '" + std::string(op) + "'", line_);
            char expected = close[open.find(brackets_.back())];
            if (expected != op[0]) reject("mismatched bracket", line_);
            brackets_.pop_back();
            --depth_;
        }
    }

    void finish() {
        if (depth_ != 0) reject("unexpected end of file inside brackets", line_);
        if (!tokens_.empty() && tokens_.back().kind != Kind::Newline &&
            tokens_.back().kind != Kind::Dedent && !at_line_start_)
            emit(Kind::Newline, "\n");
        while (indents_.size() > 1) {
            indents_.pop_back();
            emit(Kind::Dedent, "");
        }
        emit(Kind::End, "");
    }

    std::string src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int depth_ = 0;
    bool at_line_start_ = true;
    std::vector<std::size_t> indents_;
    std::vector<char> brackets_;
    std::vector<Token> tokens_;
    std::vector<Token> pending_;
};

const std::unordered_set<std::string>& hard_keywords() {
    static const std::unordered_set<std::string> kw = {
        "False", "None",     "True",  "and",    "as",   "assert", "async",  "await",    "break",
        "class", "continue", "def",   "del",    "elif", "else",   "except", "finally",  "for",
        "from",  "global",   "if",    "import", "in",   "is",     "lambda", "nonlocal", "not",
        "or",    "pass",     "raise", "return", "try",  "while",  "with",   "yield"};
    return kw;
}

// Structural facts about a parsed expression, for target checks.
struct ExprInfo {
    bool assignable = false;  // valid assignment/del/for target
    bool simple = false;      // single name/attribute/subscript target
    bool name = false;        // bare NAME atom
};

constexpr ExprInfo kValue{false, false, false};
constexpr ExprInfo kNameAtom{true, true, true};
constexpr ExprInfo kSimpleTarget{true, true, false};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    void run() {
        while (!at(Kind::End)) {
            if (accept(Kind::Newline)) continue;
            parse_statement();
        }
    }

private:
    // --- token plumbing -----------------------------------------------------
    const Token& cur() const { return tokens_[pos_]; }
    int line() const { return cur().line; }
    bool at(Kind k) const { return cur().kind == k; }
    bool at_op(std::string_view s) const { return cur().kind == Kind::Op && cur().text == s; }
    bool at_kw(std::string_view s) const { return cur().kind == Kind::Name && cur().text == s; }
    void advance() {
        if (pos_ + 1 < tokens_.size()) ++pos_;
    }
    bool accept(Kind k) {
        if (at(k)) {
            advance();
            return true;
        }
        return false;
    }
    bool accept_op(std::string_view s) {
        if (at_op(s)) {
            advance();
            return true;
        }
        return false;
    }
    bool accept_kw(std::string_view s) {
        if (at_kw(s)) {
            advance();
            return true;
        }
        return false;
    }
    void expect(Kind k, const char* what) {
        if (!accept(k)) reject(std::string("expected ") + what, line());
    }
    void expect_op(std::string_view s) {
        if (!accept_op(s)) reject("expected '" + std::string(s) + "'", line());
    }
    void expect_kw(std::string_view s) {
        if (!accept_kw(s)) reject("expected '" + std::string(s) + "'", line());
    }
    std::string expect_name() {
        if (at(Kind::Name) && hard_keywords().count(cur().text) == 0) {
            std::string n = cur().text;
            advance();
            return n;
        }
        reject("expected identifier", line());
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > 400) reject("expression nesting too deep", p.line());
        }
        ~DepthGuard() { --p.depth_; }
    };

    bool can_start_expression() const {
        switch (cur().kind) {
            case Kind::Name: {
                const std::string& t = cur().text;
                if (hard_keywords().count(t) == 0) return true;
                return t == "None" || t == "True" || t == "False" || t == "lambda" || t == "not" ||
                       t == "await";
            }
            case Kind::Number:
            case Kind::String:
                return true;
            case Kind::Op:
                return cur().text == "(" || cur().text == "[" || cur().text == "{" ||
                       cur().text == "-" || cur().text == "+" || cur().text == "~" ||
                       cur().text == "*" || cur().text == "...";
            default:
                return false;
        }
    }

    // --- statements ---------------------------------------------------------
    void parse_statement() {
        if (at_kw("if")) return parse_if();
        if (at_kw("while")) return parse_while();
        if (at_kw("for")) return parse_for(false);
        if (at_kw("try")) return parse_try();
        if (at_kw("with")) return parse_with(false);
        if (at_kw("def")) return parse_def(false);
        if (at_kw("class")) return parse_class();
        if (at_kw("async")) return parse_async();
        if (at_op("@")) return parse_decorated();
        parse_simple_stmts();
    }

    void parse_simple_stmts() {
        parse_simple_stmt();
        while (accept_op(";")) {
            if (at(Kind::Newline) || at(Kind::End)) break;
            parse_simple_stmt();
        }
        if (!accept(Kind::Newline) && !at(Kind::End)) reject("expected end of statement", line());
    }

    void parse_simple_stmt() {
        if (accept_kw("pass")) return;
        if (at_kw("break") || at_kw("continue")) {
            advance();
            return;
        }
        if (accept_kw("return")) {
            if (can_start_expression() || at_kw("yield")) parse_testlist_star();
            return;
        }
        if (accept_kw("raise")) {
            if (can_start_expression()) {
                parse_test();
                if (accept_kw("from")) parse_test();
            }
            return;
        }
        if (at_kw("global") || at_kw("nonlocal")) {
            advance();
            expect_name();
            while (accept_op(",")) expect_name();
            return;
        }
        if (accept_kw("del")) {
            ExprInfo info = parse_testlist_star();
            if (!info.assignable) reject("cannot delete this expression", line());
            return;
        }
        if (accept_kw("assert")) {
            parse_test();
            if (accept_op(",")) parse_test();
            return;
        }
        if (accept_kw("import")) return parse_import_names();
        if (accept_kw("from")) return parse_from_import();
        if (at_kw("yield")) {
            parse_yield_expr();
            return;
        }
        parse_expr_stmt();
    }

    void parse_import_names() {
        do {
            parse_dotted_name();
            if (accept_kw("as")) expect_name();
        } while (accept_op(","));
    }

    void parse_dotted_name() {
        expect_name();
        while (accept_op(".")) expect_name();
    }

    void parse_from_import() {
        bool has_dots = false;
        while (accept_op(".") || accept_op("...")) has_dots = true;
        if (at(Kind::Name) && !at_kw("import")) {
            parse_dotted_name();
        } else if (!has_dots) {
            reject("expected module name", line());
        }
        expect_kw("import");
        if (accept_op("*")) return;
        if (accept_op("(")) {
            parse_import_as_names();
            accept_op(",");
            expect_op(")");
            return;
        }
        parse_import_as_names();
    }

    void parse_import_as_names() {
        expect_name();
        if (accept_kw("as")) expect_name();
        while (at_op(",")) {
            // Tolerate the trailing comma only inside parentheses (caller handles).
            std::size_t save = pos_;
            advance();
            if (!at(Kind::Name) || at_kw("as")) {
                pos_ = save;
                return;
            }
            expect_name();
            if (accept_kw("as")) expect_name();
        }
    }

    static bool is_augassign(const Token& t) {
        if (t.kind != Kind::Op) return false;
        static const std::unordered_set<std::string> ops = {
            "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**="};
        return ops.count(t.text) > 0;
    }

    void parse_expr_stmt() {
        ExprInfo first = parse_testlist_star();
        if (accept_op(":")) {  // annotated assignment / declaration
            if (!first.simple) reject("illegal target for annotation", line());
            parse_test();
            if (accept_op("=")) {
                if (at_kw("yield"))
                    parse_yield_expr();
                else
                    parse_testlist_star();
            }
            return;
        }
        if (is_augassign(cur())) {
            if (!first.simple) reject("illegal expression for augmented assignment", line());
            advance();
            if (at_kw("yield"))
                parse_yield_expr();
            else
                parse_testlist_star();
            return;
        }
        ExprInfo target = first;
        while (accept_op("=")) {
            if (!target.assignable) reject("cannot assign to expression", line());
            if (at_kw("yield")) {
                parse_yield_expr();
                target = kValue;
            } else {
                target = parse_testlist_star();
            }
        }
    }

    void parse_if() {
        expect_kw("if");
        parse_namedexpr();
        expect_op(":");
        parse_suite();
        while (accept_kw("elif")) {
            parse_namedexpr();
            expect_op(":");
            parse_suite();
        }
        if (accept_kw("else")) {
            expect_op(":");
            parse_suite();
        }
    }

    void parse_while() {
        expect_kw("while");
        parse_namedexpr();
        expect_op(":");
        parse_suite();
        if (accept_kw("else")) {
            expect_op(":");
            parse_suite();
        }
    }

    void parse_for(bool is_async) {
        (void)is_async;
        expect_kw("for");
        ExprInfo target = parse_testlist_star(/*no_in=*/true);
        if (!target.assignable) reject("cannot assign to for-loop target", line());
        expect_kw("in");
        parse_testlist_star();
        expect_op(":");
        parse_suite();
        if (accept_kw("else")) {
            expect_op(":");
            parse_suite();
        }
    }

    void parse_try() {
        expect_kw("try");
        expect_op(":");
        parse_suite();
        int excepts = 0;
        while (accept_kw("except")) {
            ++excepts;
            if (can_start_expression()) {
                parse_test();
                if (accept_kw("as")) expect_name();
            }
            expect_op(":");
            parse_suite();
        }
        if (at_kw("else")) {
            if (excepts == 0) reject("'else' clause without 'except'", line());
            advance();
            expect_op(":");
            parse_suite();
        }
        bool has_finally = false;
        if (accept_kw("finally")) {
            has_finally = true;
            expect_op(":");
            parse_suite();
        }
        if (excepts == 0 && !has_finally) reject("expected 'except' or 'finally' block", line());
    }

    void parse_with(bool is_async) {
        (void)is_async;
        expect_kw("with");
        parse_with_item();
        while (accept_op(",")) parse_with_item();
        expect_op(":");
        parse_suite();
    }

    void parse_with_item() {
        parse_test();
        if (accept_kw("as")) {
            ExprInfo target = parse_primary_target();
            if (!target.assignable) reject("cannot assign to with-target", line());
        }
    }

    void parse_def(bool is_async) {
        (void)is_async;
        expect_kw("def");
        expect_name();
        expect_op("(");
        parse_params(/*allow_annotations=*/true, ")");
        expect_op(")");
        if (accept_op("->")) parse_test();
        expect_op(":");
        parse_suite();
    }

    void parse_class() {
        expect_kw("class");
        expect_name();
        if (accept_op("(")) {
            if (!at_op(")")) parse_call_args();
            expect_op(")");
        }
        expect_op(":");
        parse_suite();
    }

    void parse_async() {
        expect_kw("async");
        if (at_kw("def")) return parse_def(true);
        if (at_kw("for")) return parse_for(true);
        if (at_kw("with")) return parse_with(true);
        reject("expected 'def', 'for' or 'with' after 'async'", line());
    }

    void parse_decorated() {
        while (accept_op("@")) {
            parse_namedexpr();
            expect(Kind::Newline, "newline after decorator");
            while (accept(Kind::Newline)) {
            }
        }
        if (at_kw("def")) return parse_def(false);
        if (at_kw("class")) return parse_class();
        if (accept_kw("async")) {
            if (at_kw("def")) return parse_def(true);
            reject("expected 'def' after 'async'", line());
        }
        reject("expected function or class after decorators", line());
    }

    void parse_suite() {
        if (accept(Kind::Newline)) {
            expect(Kind::Indent, "an indented block");
            do {
                if (accept(Kind::Newline)) continue;
                parse_statement();
            } while (!at(Kind::Dedent) && !at(Kind::End));
            expect(Kind::Dedent, "dedent");
            return;
        }
        parse_simple_stmts();
    }

    // def/lambda parameter lists; `stop` is ")" or ":".
    void parse_params(bool allow_annotations, std::string_view stop) {
        bool seen_star = false, seen_dstar = false;
        bool first = true;
        while (!at_op(stop)) {
            if (!first) expect_op(",");
            first = false;
            if (at_op(stop)) break;  // trailing comma
            if (accept_op("/")) continue;
            if (accept_op("*")) {
                if (seen_star || seen_dstar) reject("duplicate '*' in parameter list", line());
                seen_star = true;
                if (at(Kind::Name) && !at_op(stop)) {
                    expect_name();
                    if (allow_annotations && accept_op(":")) parse_test();
                }
                continue;
            }
            if (accept_op("**")) {
                if (seen_dstar) reject("duplicate '**' in parameter list", line());
                seen_dstar = true;
                expect_name();
                if (allow_annotations && accept_op(":")) parse_test();
                continue;
            }
            expect_name();
            if (allow_annotations && accept_op(":")) parse_test();
            if (accept_op("=")) parse_test();
        }
    }

    // --- expressions --------------------------------------------------------
    // testlist_star: (test|star) (',' (test|star))* [',']
    ExprInfo parse_testlist_star(bool no_in = false) {
        DepthGuard guard(*this);
        ExprInfo first = parse_star_or_test(no_in);
        if (!at_op(",")) return first;
        bool all_assignable = first.assignable;
        while (accept_op(",")) {
            if (!can_start_expression()) break;  // trailing comma
            ExprInfo e = parse_star_or_test(no_in);
            all_assignable = all_assignable && e.assignable;
        }
        return {all_assignable, false, false};
    }

    ExprInfo parse_star_or_test(bool no_in = false) {
        if (accept_op("*")) {
            ExprInfo inner = parse_or_test(no_in);
            return {inner.assignable, false, false};
        }
        return parse_test(no_in);
    }

    ExprInfo parse_namedexpr() {
        ExprInfo left = parse_test();
        if (accept_op(":=")) {
            if (!left.name) reject("cannot use assignment expression with this target", line());
            parse_test();
            return kValue;
        }
        return left;
    }

    ExprInfo parse_test(bool no_in = false) {
        DepthGuard guard(*this);
        if (accept_kw("lambda")) {
            parse_params(/*allow_annotations=*/false, ":");
            expect_op(":");
            parse_test(no_in);
            return kValue;
        }
        ExprInfo left = parse_or_test(no_in);
        if (at_kw("if")) {
            advance();
            parse_or_test(no_in);
            expect_kw("else");
            parse_test(no_in);
            return kValue;
        }
        return left;
    }

    ExprInfo parse_or_test(bool no_in = false) {
        ExprInfo left = parse_and_test(no_in);
        while (accept_kw("or")) {
            parse_and_test(no_in);
            left = kValue;
        }
        return left;
    }

    ExprInfo parse_and_test(bool no_in = false) {
        ExprInfo left = parse_not_test(no_in);
        while (accept_kw("and")) {
            parse_not_test(no_in);
            left = kValue;
        }
        return left;
    }

    ExprInfo parse_not_test(bool no_in) {
        if (accept_kw("not")) {
            parse_not_test(no_in);
            return kValue;
        }
        return parse_comparison(no_in);
    }

    ExprInfo parse_comparison(bool no_in) {
        ExprInfo left = parse_bitor();
        for (;;) {
            if (at_op("<") || at_op(">") || at_op("==") || at_op("!=") || at_op("<=") ||
                at_op(">=")) {
                advance();
            } else if (at_kw("in") && !no_in) {
                advance();
            } else if (at_kw("not")) {
                advance();
                expect_kw("in");
            } else if (at_kw("is")) {
                advance();
                accept_kw("not");
            } else {
                break;
            }
            parse_bitor();
            left = kValue;
        }
        return left;
    }

    ExprInfo parse_bitor() {
        ExprInfo left = parse_bitxor();
        while (accept_op("|")) {
            parse_bitxor();
            left = kValue;
        }
        return left;
    }

    ExprInfo parse_bitxor() {
        ExprInfo left = parse_bitand();
        while (accept_op("^")) {
            parse_bitand();
            left = kValue;
        }
        return left;
    }

    ExprInfo parse_bitand() {
        ExprInfo left = parse_shift();
        while (accept_op("&")) {
            parse_shift();
            left = kValue;
        }
        return left;
    }

    ExprInfo parse_shift() {
        ExprInfo left = parse_arith();
        while (at_op("<<") || at_op(">>")) {
            advance();
            parse_arith();
            left = kValue;
        }
        return left;
    }

    ExprInfo parse_arith() {
        ExprInfo left = parse_term();
        while (at_op("+") || at_op("-")) {
            advance();
            parse_term();
            left = kValue;
        }
        return left;
    }

    ExprInfo parse_term() {
        ExprInfo left = parse_factor();
        while (at_op("*") || at_op("/") || at_op("//") || at_op("%") || at_op("@")) {
            advance();
            parse_factor();
            left = kValue;
        }
        return left;
    }

    ExprInfo parse_factor() {
        DepthGuard guard(*this);
        if (at_op("+") || at_op("-") || at_op("~")) {
            advance();
            parse_factor();
            return kValue;
        }
        return parse_power();
    }

    ExprInfo parse_power() {
        ExprInfo left = parse_await_primary();
        if (accept_op("**")) {
            parse_factor();
            return kValue;
        }
        return left;
    }

    ExprInfo parse_await_primary() {
        if (accept_kw("await")) {
            parse_await_primary();
            return kValue;
        }
        return parse_primary();
    }

    ExprInfo parse_primary() {
        DepthGuard guard(*this);
        ExprInfo info = parse_atom();
        for (;;) {
            if (accept_op(".")) {
                expect_name();
                info = kSimpleTarget;
            } else if (accept_op("(")) {
                if (!at_op(")")) parse_call_args();
                expect_op(")");
                info = kValue;
            } else if (accept_op("[")) {
                parse_subscript_list();
                expect_op("]");
                info = kSimpleTarget;
            } else {
                return info;
            }
        }
    }

    // `with ... as target` parses a full primary so `d[k]` / `obj.attr` work.
    ExprInfo parse_primary_target() { return parse_star_or_test(); }

    void parse_call_args() {
        bool first = true;
        for (;;) {
            if (at_op(")")) return;
            if (!first) {
                expect_op(",");
                if (at_op(")")) return;  // trailing comma
            }
            first = false;
            if (accept_op("*")) {
                parse_test();
                continue;
            }
            if (accept_op("**")) {
                parse_test();
                continue;
            }
            ExprInfo arg = parse_namedexpr_or_kwarg();
            if (at_kw("for") || at_kw("async")) {
                // Generator expression as sole argument.
                (void)arg;
                parse_comp_clauses();
                if (!at_op(")")) reject("generator expression must be sole argument", line());
                return;
            }
        }
    }

    ExprInfo parse_namedexpr_or_kwarg() {
        ExprInfo e = parse_test();
        if (at_op("=")) {
            if (!e.name) reject("keyword argument requires a name", line());
            advance();
            parse_test();
            return kValue;
        }
        if (accept_op(":=")) {
            if (!e.name) reject("cannot use assignment expression with this target", line());
            parse_test();
            return kValue;
        }
        return e;
    }

    void parse_subscript_list() {
        parse_subscript();
        while (accept_op(",")) {
            if (at_op("]")) return;  // trailing comma
            parse_subscript();
        }
    }

    void parse_subscript() {
        if (at_op(":")) {
            parse_slice_tail();
            return;
        }
        if (accept_op("*")) {
            parse_or_test();
            return;
        }
        parse_namedexpr();  // a[b := 1] is legal
        if (at_op(":")) parse_slice_tail();
    }

    void parse_slice_tail() {
        expect_op(":");
        if (can_start_expression()) parse_test();
        if (accept_op(":")) {
            if (can_start_expression()) parse_test();
        }
    }

    void parse_yield_expr() {
        expect_kw("yield");
        if (accept_kw("from")) {
            parse_test();
            return;
        }
        if (can_start_expression()) parse_testlist_star();
    }

    void parse_comp_clauses() {
        bool first = true;
        for (;;) {
            if (accept_kw("async")) {
                expect_kw("for");
            } else if (at_kw("for")) {
                advance();
            } else if (!first) {
                return;
            } else {
                reject("expected 'for' in comprehension", line());
            }
            first = false;
            ExprInfo target = parse_testlist_star(/*no_in=*/true);
            if (!target.assignable) reject("cannot assign to comprehension target", line());
            expect_kw("in");
            parse_or_test();
            while (at_kw("if")) {
                advance();
                parse_or_test();
            }
            if (!at_kw("for") && !at_kw("async")) return;
        }
    }

    ExprInfo parse_atom() {
        DepthGuard guard(*this);
        if (at(Kind::Name)) {
            const std::string& t = cur().text;
            if (t == "None" || t == "True" || t == "False") {
                advance();
                return kValue;
            }
            if (hard_keywords().count(t) > 0) reject("unexpected keyword '" + t + "'", line());
            advance();
            return kNameAtom;
        }
        if (at(Kind::Number)) {
            advance();
            return kValue;
        }
        if (at(Kind::String)) {
            auto is_bytes = [](const std::string& prefix) {
                return prefix.find('b') != std::string::npos ||
                       prefix.find('B') != std::string::npos;
            };
            const bool bytes = is_bytes(cur().text);
            while (at(Kind::String)) {
                if (is_bytes(cur().text) != bytes)
                    reject("cannot mix bytes and nonbytes literals", line());
                advance();
            }
            return kValue;
        }
        if (accept_op("...")) return kValue;
        if (accept_op("(")) return parse_paren_atom();
        if (accept_op("[")) return parse_list_atom();
        if (accept_op("{")) return parse_brace_atom();
        reject("expected expression", line());
    }

    ExprInfo parse_paren_atom() {
        if (accept_op(")")) return {true, false, false};  // () is a valid target
        if (at_kw("yield")) {
            parse_yield_expr();
            expect_op(")");
            return kValue;
        }
        ExprInfo first = parse_star_or_namedexpr();
        if (at_kw("for") || at_kw("async")) {
            parse_comp_clauses();
            expect_op(")");
            return kValue;
        }
        if (at_op(",")) {
            bool all_assignable = first.assignable;
            while (accept_op(",")) {
                if (at_op(")")) break;
                ExprInfo e = parse_star_or_namedexpr();
                all_assignable = all_assignable && e.assignable;
            }
            expect_op(")");
            return {all_assignable, false, false};
        }
        expect_op(")");
        return {first.assignable, first.simple, false};  // parenthesized single
    }

    ExprInfo parse_star_or_namedexpr() {
        if (accept_op("*")) {
            ExprInfo inner = parse_or_test();
            return {inner.assignable, false, false};
        }
        return parse_namedexpr();
    }

    ExprInfo parse_list_atom() {
        if (accept_op("]")) return {true, false, false};  // [] is a valid target
        ExprInfo first = parse_star_or_namedexpr();
        if (at_kw("for") || at_kw("async")) {
            parse_comp_clauses();
            expect_op("]");
            return kValue;
        }
        bool all_assignable = first.assignable;
        while (accept_op(",")) {
            if (at_op("]")) break;
            ExprInfo e = parse_star_or_namedexpr();
            all_assignable = all_assignable && e.assignable;
        }
        expect_op("]");
        return {all_assignable, false, false};
    }

    ExprInfo parse_brace_atom() {
        if (accept_op("}")) return kValue;  // {}
        if (accept_op("**")) {              // dict with unpacking first
            parse_or_test();
            parse_dict_rest();
            return kValue;
        }
        ExprInfo first = parse_star_or_namedexpr();
        (void)first;
        if (accept_op(":")) {  // dict
            parse_test();
            if (at_kw("for") || at_kw("async")) {
                parse_comp_clauses();
                expect_op("}");
                return kValue;
            }
            parse_dict_rest();
            return kValue;
        }
        if (at_kw("for") || at_kw("async")) {  // set comprehension
            parse_comp_clauses();
            expect_op("}");
            return kValue;
        }
        while (accept_op(",")) {  // set display
            if (at_op("}")) break;
            parse_star_or_namedexpr();
        }
        expect_op("}");
        return kValue;
    }

    void parse_dict_rest() {
        while (accept_op(",")) {
            if (at_op("}")) break;
            if (accept_op("**")) {
                parse_or_test();
                continue;
            }
            parse_test();
            expect_op(":");
            parse_test();
        }
        expect_op("}");
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace

ParseResult check(const std::string& source) {
    try {
        Lexer lexer(source);
        Parser parser(lexer.run());
        parser.run();
        return {true, "", 0};
    } catch (const Reject& r) {
        return {false, r.msg, r.line};
    }
}

bool parses(const std::string& source) { return check(source).ok; }

}  // namespace pysyntax
}  // namespace codesift
