#include "dstsr/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>

namespace dstsr {

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::runtime_error("parse error at position " + std::to_string(position) + ": " + message)
    , position_(position)
{
}

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string_view text;
    double number = 0.0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
        }
        const std::size_t start = pos_;
        if (pos_ >= src_.size()) {
            return {Tok::End, start, {}};
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return number(start);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                ++pos_;
            }
            return {Tok::Ident, start, src_.substr(start, pos_ - start)};
        }
        ++pos_;
        switch (c) {
        case '+': return {Tok::Plus, start, src_.substr(start, 1)};
        case '-': return {Tok::Minus, start, src_.substr(start, 1)};
        case '*': return {Tok::Star, start, src_.substr(start, 1)};
        case '/': return {Tok::Slash, start, src_.substr(start, 1)};
        case '^': return {Tok::Caret, start, src_.substr(start, 1)};
        case '(': return {Tok::LParen, start, src_.substr(start, 1)};
        case ')': return {Tok::RParen, start, src_.substr(start, 1)};
        case ',': return {Tok::Comma, start, src_.substr(start, 1)};
        default: throw ParseError(start, std::string("unexpected character '") + c + "'");
        }
    }

private:
    Token number(std::size_t start)
    {
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
            }
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
                ++pos_;
            }
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                digits();
            } else {
                pos_ = save;
            }
        }
        const auto text = src_.substr(start, pos_ - start);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
            throw ParseError(start, "invalid number '" + std::string(text) + "'");
        }
        return {Tok::Number, start, text, value};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

// Grammar:
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' '2')?
//   primary := number | variable | func '(' args ')' | '(' sum ')'
class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src) { advance(); }

    Expr parse_all()
    {
        auto e = sum();
        if (cur_.kind != Tok::End) {
            throw ParseError(cur_.pos, "unexpected '" + std::string(cur_.text) + "'");
        }
        return e;
    }

private:
    struct Parsed {
        Expr expr;
        bool bare_number = false; // an unparenthesized numeric literal
    };

    void advance() { cur_ = lexer_.next(); }

    void expect(Tok kind, const char* what)
    {
        if (cur_.kind != kind) {
            throw ParseError(cur_.pos, std::string("expected ") + what);
        }
        advance();
    }

    Expr sum()
    {
        auto left = product();
        while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
            const auto op = cur_.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            advance();
            left = Expr::binary(op, left, product());
        }
        return left;
    }

    Expr product()
    {
        auto left = unary().expr;
        while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
            const auto op = cur_.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
            advance();
            left = Expr::binary(op, left, unary().expr);
        }
        return left;
    }

    Parsed unary()
    {
        if (cur_.kind != Tok::Minus) {
            return power();
        }
        advance();
        auto operand = unary();
        if (operand.bare_number) {
            // "-0.031" is one signed constant leaf, not neg(0.031).
            return {Expr::constant(-operand.expr.root().value), true};
        }
        return {Expr::unary(UnaryOp::Neg, operand.expr), false};
    }

    Parsed power()
    {
        auto base = primary();
        if (cur_.kind == Tok::Caret) {
            advance();
            if (cur_.kind != Tok::Number || cur_.number != 2.0) {
                throw ParseError(cur_.pos, "only the exponent 2 is supported");
            }
            advance();
            return {Expr::unary(UnaryOp::Square, base.expr), false};
        }
        return base;
    }

    Parsed primary()
    {
        const auto tok = cur_;
        switch (tok.kind) {
        case Tok::Number: advance(); return {Expr::constant(tok.number), true};
        case Tok::LParen: {
            advance();
            auto inner = sum();
            expect(Tok::RParen, "')'");
            return {inner, false};
        }
        case Tok::Ident: advance(); return {identifier(tok), false};
        case Tok::End: throw ParseError(tok.pos, "unexpected end of input");
        default: throw ParseError(tok.pos, "unexpected '" + std::string(tok.text) + "'");
        }
    }

    Expr identifier(const Token& tok)
    {
        for (auto v : kAllVariables) {
            if (tok.text == name(v)) {
                return Expr::variable(v);
            }
        }
        std::optional<UnaryOp> uop;
        std::optional<BinaryOp> bop;
        if (tok.text == "exp") uop = UnaryOp::Exp;
        else if (tok.text == "log") uop = UnaryOp::Log;
        else if (tok.text == "sqrt") uop = UnaryOp::Sqrt;
        else if (tok.text == "square") uop = UnaryOp::Square;
        else if (tok.text == "sign") uop = UnaryOp::Sign;
        else if (tok.text == "max") bop = BinaryOp::Max;
        else if (tok.text == "min") bop = BinaryOp::Min;
        else throw ParseError(tok.pos, "unknown identifier '" + std::string(tok.text) + "'");

        expect(Tok::LParen, "'(' after function name");
        auto first = sum();
        if (uop) {
            expect(Tok::RParen, "')'");
            return Expr::unary(*uop, first);
        }
        expect(Tok::Comma, "','");
        auto second = sum();
        expect(Tok::RParen, "')'");
        return Expr::binary(*bop, first, second);
    }

    Lexer lexer_;
    Token cur_{Tok::End, 0, {}};
};

std::string format_constant(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// 1 = additive, 2 = multiplicative, 3 = prefix minus, 4 = atom
int precedence(const Node& n)
{
    if (n.kind == NodeKind::Binary) {
        switch (n.binary_op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        default: return 4;
        }
    }
    if (n.kind == NodeKind::Unary && n.unary_op() == UnaryOp::Neg) {
        return 3;
    }
    return 4;
}

std::string infix_symbol(BinaryOp op)
{
    switch (op) {
    case BinaryOp::Add: return " + ";
    case BinaryOp::Sub: return " - ";
    case BinaryOp::Mul: return " * ";
    case BinaryOp::Div: return " / ";
    default: return "";
    }
}

struct Printed {
    std::string text;
    int prec;
    bool constant;
};

} // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

double round_significant(double value, int digits)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    double out = value;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), out);
    return out;
}

std::string print(const Expr& expr)
{
    std::vector<Printed> stack;
    for (const auto& n : expr.nodes()) {
        switch (n.kind) {
        case NodeKind::Constant: stack.push_back({format_constant(n.value), 4, true}); break;
        case NodeKind::Variable: stack.push_back({std::string(name(n.variable())), 4, false}); break;
        case NodeKind::Unary: {
            auto child = std::move(stack.back());
            stack.pop_back();
            if (n.unary_op() == UnaryOp::Neg) {
                // A bare literal after '-' would re-parse as a signed constant.
                const bool wrap = child.prec < 4 || child.constant;
                stack.push_back({"-" + (wrap ? "(" + child.text + ")" : child.text), 3, false});
            } else {
                stack.push_back(
                    {std::string(name(n.unary_op())) + "(" + child.text + ")", 4, false});
            }
            break;
        }
        case NodeKind::Binary: {
            auto right = std::move(stack.back());
            stack.pop_back();
            auto left = std::move(stack.back());
            stack.pop_back();
            const auto op = n.binary_op();
            if (op == BinaryOp::Max || op == BinaryOp::Min) {
                stack.push_back({std::string(op == BinaryOp::Max ? "max(" : "min(") + left.text +
                                     ", " + right.text + ")",
                                 4, false});
                break;
            }
            const int p = precedence(n);
            std::string lt = left.prec < p ? "(" + left.text + ")" : left.text;
            std::string rt = right.prec <= p ? "(" + right.text + ")" : right.text;
            stack.push_back({lt + infix_symbol(op) + rt, p, false});
            break;
        }
        }
    }
    return std::move(stack.back().text);
}

} // namespace dstsr
