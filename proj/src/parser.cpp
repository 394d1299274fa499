#include "mman/parser.hpp"

#include <cctype>
#include <set>
#include <string>

#include "mman/errors.hpp"

namespace mman {

const char* kind_name(AstKind kind) {
    switch (kind) {
        case AstKind::FunctionDecl: return "FunctionDecl";
        case AstKind::ParmDecl: return "ParmDecl";
        case AstKind::Compound: return "Compound";
        case AstKind::DeclStmt: return "DeclStmt";
        case AstKind::VarDecl: return "VarDecl";
        case AstKind::If: return "If";
        case AstKind::While: return "While";
        case AstKind::For: return "For";
        case AstKind::Return: return "Return";
        case AstKind::Call: return "Call";
        case AstKind::BinaryOperator: return "BinaryOperator";
        case AstKind::UnaryOperator: return "UnaryOperator";
        case AstKind::DeclRef: return "DeclRef";
        case AstKind::Literal: return "Literal";
        case AstKind::MemberExpr: return "MemberExpr";
        case AstKind::ArraySubscript: return "ArraySubscript";
    }
    return "?";
}

namespace {

struct Token {
    enum Type { Ident, Number, String, Char, Punct, End } type = End;
    std::string text;
    int line = 1;
    int col = 1;
};

class Scanner {
public:
    explicit Scanner(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_space_and_comments();
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.type = Token::End;
            tok_.text.clear();
            return;
        }
        const char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                bump();
            }
            tok_.type = Token::Ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
            if (pos_ < src_.size() && src_[pos_] == '.') {
                bump();
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
            }
            if (pos_ < src_.size() && (src_[pos_] == 'f' || src_[pos_] == 'F' || src_[pos_] == 'u' ||
                                       src_[pos_] == 'U' || src_[pos_] == 'l' || src_[pos_] == 'L')) {
                bump();
            }
            tok_.type = Token::Number;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        if (c == '"' || c == '\'') {
            const char quote = c;
            std::size_t start = pos_;
            bump();
            while (pos_ < src_.size() && src_[pos_] != quote) {
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) bump();
                bump();
            }
            if (pos_ >= src_.size()) {
                throw ParseError("unterminated literal", tok_.line, tok_.col);
            }
            bump();
            tok_.type = quote == '"' ? Token::String : Token::Char;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }

        static const char* two_char[] = {"->", "++", "--", "<=", ">=", "==", "!=", "&&", "||",
                                         "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>"};
        for (const char* op : two_char) {
            if (src_.compare(pos_, 2, op) == 0) {
                tok_.type = Token::Punct;
                tok_.text = op;
                bump();
                bump();
                return;
            }
        }
        static const std::string one_char = "+-*/%<>=!&~|^.,;(){}[]";
        if (one_char.find(c) != std::string::npos) {
            tok_.type = Token::Punct;
            tok_.text = std::string(1, c);
            bump();
            return;
        }
        throw ParseError(std::string("stray character '") + c + "'", line_, col_);
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                bump();
            } else if (src_.compare(pos_, 2, "//") == 0) {
                while (pos_ < src_.size() && src_[pos_] != '\n') bump();
            } else if (src_.compare(pos_, 2, "/*") == 0) {
                const int l = line_, co = col_;
                bump();
                bump();
                while (pos_ < src_.size() && src_.compare(pos_, 2, "*/") != 0) bump();
                if (pos_ >= src_.size()) throw ParseError("unterminated comment", l, co);
                bump();
                bump();
            } else {
                break;
            }
        }
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

const std::set<std::string> kTypeWords = {"void", "int",      "char",   "short", "long",
                                          "float", "double",  "bool",   "signed", "unsigned",
                                          "const", "struct"};

class Parser {
public:
    explicit Parser(const std::string& src) : scan_(src) {}

    RawAst run() {
        ast_.root = parse_function();
        if (scan_.peek().type != Token::End) {
            fail("expected end of input");
        }
        return std::move(ast_);
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = scan_.peek();
        const std::string got = t.type == Token::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + ", got " + got, t.line, t.col);
    }

    bool peek_punct(const std::string& p) const {
        return scan_.peek().type == Token::Punct && scan_.peek().text == p;
    }

    bool peek_word(const std::string& w) const {
        return scan_.peek().type == Token::Ident && scan_.peek().text == w;
    }

    bool eat_punct(const std::string& p) {
        if (!peek_punct(p)) return false;
        scan_.take();
        return true;
    }

    void expect_punct(const std::string& p) {
        if (!eat_punct(p)) fail("expected '" + p + "'");
    }

    std::string expect_ident() {
        if (scan_.peek().type != Token::Ident || kTypeWords.count(scan_.peek().text)) {
            fail("expected identifier");
        }
        return scan_.take().text;
    }

    int make(AstKind kind, std::string label = {}, std::string type_text = {},
             std::vector<int> children = {}) {
        const int id = static_cast<int>(ast_.nodes.size());
        ast_.nodes.push_back(RawAstNode{id, kind, std::move(label), std::move(type_text),
                                        std::move(children)});
        return id;
    }

    bool at_type() const {
        return scan_.peek().type == Token::Ident && kTypeWords.count(scan_.peek().text) != 0;
    }

    std::string parse_type() {
        if (!at_type()) fail("expected a type");
        std::string text;
        auto push_word = [&](const std::string& w) {
            if (!text.empty()) text.push_back(' ');
            text += w;
        };
        if (peek_word("const")) push_word(scan_.take().text);
        if (peek_word("struct")) {
            push_word(scan_.take().text);
            push_word(expect_ident());
        } else {
            bool saw_base = false;
            while (scan_.peek().type == Token::Ident && kTypeWords.count(scan_.peek().text) &&
                   scan_.peek().text != "struct" && scan_.peek().text != "const") {
                saw_base = true;
                push_word(scan_.take().text);
            }
            if (!saw_base) fail("expected a type");
        }
        while (peek_punct("*")) {
            scan_.take();
            text.push_back('*');
        }
        return text;
    }

    // optional [N] suffix appended to a declared type
    std::string parse_array_suffix() {
        if (!eat_punct("[")) return {};
        std::string suffix = "[";
        if (scan_.peek().type == Token::Number) suffix += scan_.take().text;
        expect_punct("]");
        suffix += "]";
        return suffix;
    }

    int parse_function() {
        const std::string ret_type = parse_type();
        const std::string name = expect_ident();
        expect_punct("(");
        std::vector<int> children;
        if (!peek_punct(")")) {
            if (peek_word("void")) {
                scan_.take();
                if (!peek_punct(")")) fail("expected ')'");
            } else {
                children.push_back(parse_param());
                while (eat_punct(",")) children.push_back(parse_param());
            }
        }
        expect_punct(")");
        if (!peek_punct("{")) fail("expected '{'");
        children.push_back(parse_compound());
        return make(AstKind::FunctionDecl, name, ret_type, std::move(children));
    }

    int parse_param() {
        std::string type = parse_type();
        const std::string name = expect_ident();
        type += parse_array_suffix();
        return make(AstKind::ParmDecl, name, type);
    }

    int parse_compound() {
        expect_punct("{");
        std::vector<int> children;
        while (!peek_punct("}")) {
            if (scan_.peek().type == Token::End) fail("expected '}'");
            children.push_back(parse_stmt());
        }
        expect_punct("}");
        return make(AstKind::Compound, {}, {}, std::move(children));
    }

    int parse_stmt() {
        if (peek_punct("{")) return parse_compound();
        if (peek_punct(";")) {
            scan_.take();
            return make(AstKind::Compound);  // empty statement
        }
        if (peek_word("if")) return parse_if();
        if (peek_word("while")) return parse_while();
        if (peek_word("for")) return parse_for();
        if (peek_word("return")) return parse_return();
        if (at_type()) {
            const int id = parse_decl();
            expect_punct(";");
            return id;
        }
        const int id = parse_expr();
        expect_punct(";");
        return id;
    }

    int parse_if() {
        scan_.take();
        expect_punct("(");
        const int cond = parse_expr();
        expect_punct(")");
        const int then_branch = parse_stmt();
        std::vector<int> children{cond, then_branch};
        if (peek_word("else")) {
            scan_.take();
            children.push_back(parse_stmt());
        }
        return make(AstKind::If, {}, {}, std::move(children));
    }

    int parse_while() {
        scan_.take();
        expect_punct("(");
        const int cond = parse_expr();
        expect_punct(")");
        const int body = parse_stmt();
        return make(AstKind::While, {}, {}, {cond, body});
    }

    int parse_for() {
        scan_.take();
        expect_punct("(");
        std::string shape;
        std::vector<int> children;
        if (!eat_punct(";")) {
            children.push_back(at_type() ? parse_decl() : parse_expr());
            expect_punct(";");
            shape += 'i';
        }
        if (peek_punct(";")) {
            children.push_back(make(AstKind::Literal, "1"));
        } else {
            children.push_back(parse_expr());
        }
        expect_punct(";");
        if (!peek_punct(")")) {
            children.push_back(parse_expr());
            shape += 'n';
        }
        expect_punct(")");
        children.push_back(parse_stmt());
        return make(AstKind::For, {}, shape, std::move(children));
    }

    int parse_return() {
        scan_.take();
        std::vector<int> children;
        if (!peek_punct(";")) children.push_back(parse_expr());
        expect_punct(";");
        return make(AstKind::Return, {}, {}, std::move(children));
    }

    // one declaration statement; a single declarator stays a bare VarDecl
    int parse_decl() {
        const std::string base = parse_type();
        std::vector<int> decls;
        do {
            const std::string name = expect_ident();
            std::string type = base + parse_array_suffix();
            std::vector<int> init;
            if (eat_punct("=")) init.push_back(parse_assign());
            decls.push_back(make(AstKind::VarDecl, name, type, std::move(init)));
        } while (eat_punct(","));
        if (decls.size() == 1) return decls[0];
        return make(AstKind::DeclStmt, {}, {}, std::move(decls));
    }

    int parse_expr() { return parse_assign(); }

    int parse_assign() {
        const int lhs = parse_binary(2);
        static const std::set<std::string> assign_ops = {"=",  "+=", "-=", "*=", "/=",
                                                         "%=", "&=", "|=", "^="};
        if (scan_.peek().type == Token::Punct && assign_ops.count(scan_.peek().text)) {
            const std::string op = scan_.take().text;
            const int rhs = parse_assign();
            return make(AstKind::BinaryOperator, op, {}, {lhs, rhs});
        }
        return lhs;
    }

    static int binary_prec(const Token& t) {
        if (t.type != Token::Punct) return 0;
        const std::string& p = t.text;
        if (p == "||") return 2;
        if (p == "&&") return 3;
        if (p == "|") return 4;
        if (p == "^") return 5;
        if (p == "&") return 6;
        if (p == "==" || p == "!=") return 7;
        if (p == "<" || p == ">" || p == "<=" || p == ">=") return 8;
        if (p == "<<" || p == ">>") return 9;
        if (p == "+" || p == "-") return 10;
        if (p == "*" || p == "/" || p == "%") return 11;
        return 0;
    }

    int parse_binary(int min_prec) {
        int lhs = parse_unary();
        while (true) {
            const int prec = binary_prec(scan_.peek());
            if (prec < min_prec) return lhs;
            const std::string op = scan_.take().text;
            const int rhs = parse_binary(prec + 1);
            lhs = make(AstKind::BinaryOperator, op, {}, {lhs, rhs});
        }
    }

    int parse_unary() {
        static const std::set<std::string> prefix_ops = {"-", "!", "+", "~", "*", "&", "++", "--"};
        if (scan_.peek().type == Token::Punct && prefix_ops.count(scan_.peek().text)) {
            const std::string op = scan_.take().text;
            const int operand = parse_unary();
            return make(AstKind::UnaryOperator, op, "prefix", {operand});
        }
        return parse_postfix();
    }

    int parse_postfix() {
        int node = parse_primary();
        while (true) {
            if (eat_punct("[")) {
                const int index = parse_expr();
                expect_punct("]");
                node = make(AstKind::ArraySubscript, {}, {}, {node, index});
            } else if (eat_punct(".")) {
                node = make(AstKind::MemberExpr, expect_ident(), ".", {node});
            } else if (eat_punct("->")) {
                node = make(AstKind::MemberExpr, expect_ident(), "->", {node});
            } else if (peek_punct("(")) {
                scan_.take();
                std::vector<int> children{node};
                if (!peek_punct(")")) {
                    children.push_back(parse_assign());
                    while (eat_punct(",")) children.push_back(parse_assign());
                }
                expect_punct(")");
                node = make(AstKind::Call, {}, {}, std::move(children));
            } else if (peek_punct("++") || peek_punct("--")) {
                node = make(AstKind::UnaryOperator, scan_.take().text, "postfix", {node});
            } else {
                return node;
            }
        }
    }

    int parse_primary() {
        const Token& t = scan_.peek();
        if (t.type == Token::Number || t.type == Token::String || t.type == Token::Char) {
            return make(AstKind::Literal, scan_.take().text);
        }
        if (t.type == Token::Ident && !kTypeWords.count(t.text)) {
            return make(AstKind::DeclRef, scan_.take().text);
        }
        if (peek_punct("(")) {
            scan_.take();
            const int inner = parse_expr();
            expect_punct(")");
            return inner;
        }
        fail("expected an expression");
    }

    Scanner scan_;
    RawAst ast_;
};

// ---- printing ----

int print_prec(const RawAst& ast, int id) {
    const RawAstNode& n = ast.node(id);
    switch (n.kind) {
        case AstKind::BinaryOperator: {
            const std::string& p = n.label;
            if (p == "||") return 2;
            if (p == "&&") return 3;
            if (p == "|") return 4;
            if (p == "^") return 5;
            if (p == "&") return 6;
            if (p == "==" || p == "!=") return 7;
            if (p == "<" || p == ">" || p == "<=" || p == ">=") return 8;
            if (p == "<<" || p == ">>") return 9;
            if (p == "+" || p == "-") return 10;
            if (p == "*" || p == "/" || p == "%") return 11;
            return 1;  // assignment family
        }
        case AstKind::UnaryOperator:
            return n.type_text == "prefix" ? 12 : 13;
        case AstKind::Call:
        case AstKind::MemberExpr:
        case AstKind::ArraySubscript:
            return 13;
        default:
            return 14;
    }
}

class Printer {
public:
    explicit Printer(const RawAst& ast) : ast_(ast) {}

    std::string print(int id) const {
        const RawAstNode& n = ast_.node(id);
        switch (n.kind) {
            case AstKind::FunctionDecl: return function_text(n);
            case AstKind::ParmDecl: return declared(n.type_text, n.label);
            case AstKind::Compound: return compound_text(n);
            case AstKind::DeclStmt: return decl_stmt_text(n);
            case AstKind::VarDecl: return var_decl_text(n);
            case AstKind::If: return if_text(n);
            case AstKind::While:
                return "while (" + print(n.children[0]) + ") " + stmt(n.children[1]);
            case AstKind::For: return for_text(n);
            case AstKind::Return:
                return n.children.empty() ? "return" : "return " + print(n.children[0]);
            default:
                return expr(id);
        }
    }

private:
    // splits "int[10]" into "int name[10]"
    static std::string declared(const std::string& type, const std::string& name) {
        const auto bracket = type.find('[');
        if (bracket == std::string::npos) return type + " " + name;
        return type.substr(0, bracket) + " " + name + type.substr(bracket);
    }

    static bool needs_semicolon(AstKind kind) {
        switch (kind) {
            case AstKind::Compound:
            case AstKind::If:
            case AstKind::While:
            case AstKind::For:
                return false;
            default:
                return true;
        }
    }

    std::string stmt(int id) const {
        std::string text = print(id);
        if (needs_semicolon(ast_.node(id).kind)) text += ";";
        return text;
    }

    std::string function_text(const RawAstNode& n) const {
        std::string out = declared(n.type_text, n.label) + "(";
        for (std::size_t i = 0; i + 1 < n.children.size(); ++i) {
            if (i) out += ", ";
            out += print(n.children[i]);
        }
        out += ") " + print(n.children.back());
        return out;
    }

    std::string compound_text(const RawAstNode& n) const {
        std::string out = "{";
        for (int child : n.children) out += " " + stmt(child);
        out += n.children.empty() ? "}" : " }";
        return out;
    }

    std::string var_decl_text(const RawAstNode& n) const {
        std::string out = declared(n.type_text, n.label);
        if (!n.children.empty()) out += " = " + expr(n.children[0]);
        return out;
    }

    std::string decl_stmt_text(const RawAstNode& n) const {
        std::string out;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            const RawAstNode& d = ast_.node(n.children[i]);
            if (i == 0) {
                out = var_decl_text(d);
            } else {
                out += ", ";
                const auto bracket = d.type_text.find('[');
                out += bracket == std::string::npos ? d.label
                                                    : d.label + d.type_text.substr(bracket);
                if (!d.children.empty()) out += " = " + expr(d.children[0]);
            }
        }
        return out;
    }

    std::string if_text(const RawAstNode& n) const {
        std::string out = "if (" + print(n.children[0]) + ") " + stmt(n.children[1]);
        if (n.children.size() == 3) out += " else " + stmt(n.children[2]);
        return out;
    }

    std::string for_text(const RawAstNode& n) const {
        const bool has_init = n.type_text.find('i') != std::string::npos;
        const bool has_inc = n.type_text.find('n') != std::string::npos;
        std::size_t at = 0;
        std::string out = "for (";
        if (has_init) out += print(n.children[at++]);
        out += "; " + print(n.children[at++]) + ";";
        if (has_inc) out += " " + print(n.children[at++]);
        out += ") " + stmt(n.children[at]);
        return out;
    }

    std::string expr(int id) const { return expr_inner(id).first; }

    // text plus this node's precedence, so parents know when to parenthesize
    std::pair<std::string, int> expr_inner(int id) const {
        const RawAstNode& n = ast_.node(id);
        const int my = print_prec(ast_, id);
        auto wrap = [&](int child, bool parens_on_equal) {
            auto [text, prec] = expr_inner(child);
            if (prec < my || (prec == my && parens_on_equal)) return "(" + text + ")";
            return text;
        };
        switch (n.kind) {
            case AstKind::DeclRef:
            case AstKind::Literal:
                return {n.label, my};
            case AstKind::BinaryOperator: {
                const bool assign = my == 1;
                // assignment associates right, everything else left
                std::string lhs = wrap(n.children[0], assign);
                std::string rhs = wrap(n.children[1], !assign);
                return {lhs + " " + n.label + " " + rhs, my};
            }
            case AstKind::UnaryOperator: {
                if (n.type_text == "postfix") {
                    return {wrap(n.children[0], false) + n.label, my};
                }
                const RawAstNode& operand = ast_.node(n.children[0]);
                std::string text = wrap(n.children[0], false);
                // -(-x) must not print as --x
                if (operand.kind == AstKind::UnaryOperator && text[0] != '(') text = "(" + text + ")";
                return {n.label + text, my};
            }
            case AstKind::ArraySubscript:
                return {wrap(n.children[0], false) + "[" + expr(n.children[1]) + "]", my};
            case AstKind::MemberExpr:
                return {wrap(n.children[0], false) + n.type_text + n.label, my};
            case AstKind::Call: {
                std::string out = wrap(n.children[0], false) + "(";
                for (std::size_t i = 1; i < n.children.size(); ++i) {
                    if (i > 1) out += ", ";
                    out += expr(n.children[i]);
                }
                return {out + ")", my};
            }
            default:
                // statements never appear inside expressions
                return {print(id), my};
        }
    }

    const RawAst& ast_;
};

}  // namespace

RawAst parse(const std::string& source_text) { return Parser(source_text).run(); }

std::string print_node(const RawAst& ast, int id) { return Printer(ast).print(id); }

std::string pretty_print(const RawAst& ast) { return print_node(ast, ast.root); }

}  // namespace mman
