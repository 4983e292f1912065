#include "bilag/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>

namespace bilag {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Token {
    enum Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
    double number = 0.0;
    std::string text;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::End;
            return;
        }
        char c = src_[pos_];
        switch (c) {
            case '+': tok_.kind = Token::Plus; bump(); return;
            case '-': tok_.kind = Token::Minus; bump(); return;
            case '*': tok_.kind = Token::Star; bump(); return;
            case '/': tok_.kind = Token::Slash; bump(); return;
            case '^': tok_.kind = Token::Caret; bump(); return;
            case '(': tok_.kind = Token::LParen; bump(); return;
            case ')': tok_.kind = Token::RParen; bump(); return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
            if (pos_ < src_.size() && src_[pos_] == '.') {
                bump();
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
            }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                std::size_t mark = pos_;
                bump();
                if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) bump();
                if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
                } else {
                    // not an exponent after all (e.g. "2*exp(x)" tokenised as "2" "*" ...)
                    while (pos_ > mark) { --pos_; --col_; }
                }
            }
            tok_.kind = Token::Number;
            auto res = std::from_chars(src_.data() + start, src_.data() + pos_, tok_.number);
            if (res.ec != std::errc{}) throw ParseError("malformed number literal", tok_.line, tok_.col);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                bump();
            tok_.kind = Token::Ident;
            tok_.text.assign(src_.substr(start, pos_ - start));
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
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

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

const std::map<std::string, Func, std::less<>>& function_table() {
    static const std::map<std::string, Func, std::less<>> t = {
        {"sin", Func::Sin}, {"cos", Func::Cos}, {"tan", Func::Tan}, {"exp", Func::Exp},
        {"log", Func::Log}, {"sqrt", Func::Sqrt}, {"abs", Func::Abs},
    };
    return t;
}

ExprPtr make(ExprKind k, ExprPtr a, ExprPtr b, const Token& t) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(a);
    e->b = std::move(b);
    e->line = t.line;
    e->col = t.col;
    return e;
}

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) {}

    ExprPtr parse_all() {
        ExprPtr e = parse_sum();
        const Token& t = lex_.peek();
        if (t.kind != Token::End) throw ParseError("unexpected trailing input", t.line, t.col);
        return e;
    }

private:
    ExprPtr parse_sum() {
        ExprPtr e = parse_term();
        while (lex_.peek().kind == Token::Plus || lex_.peek().kind == Token::Minus) {
            Token t = lex_.take();
            e = make(t.kind == Token::Plus ? ExprKind::Add : ExprKind::Sub, e, parse_term(), t);
        }
        return e;
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        while (lex_.peek().kind == Token::Star || lex_.peek().kind == Token::Slash) {
            Token t = lex_.take();
            e = make(t.kind == Token::Star ? ExprKind::Mul : ExprKind::Div, e, parse_factor(), t);
        }
        return e;
    }

    // factor handles unary minus; ^ binds tighter and is parsed below it.
    ExprPtr parse_factor() {
        if (lex_.peek().kind == Token::Minus) {
            Token t = lex_.take();
            return make(ExprKind::Neg, parse_factor(), nullptr, t);
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (lex_.peek().kind == Token::Caret) {
            Token t = lex_.take();
            // right-associative; the exponent may start with a unary minus
            return make(ExprKind::Pow, base, parse_factor(), t);
        }
        return base;
    }

    ExprPtr parse_atom() {
        Token t = lex_.take();
        switch (t.kind) {
            case Token::Number: {
                auto e = std::make_shared<Expr>();
                e->kind = ExprKind::Literal;
                e->literal = t.number;
                e->line = t.line;
                e->col = t.col;
                return e;
            }
            case Token::LParen: {
                ExprPtr e = parse_sum();
                const Token& close = lex_.peek();
                if (close.kind != Token::RParen)
                    throw ParseError("expected ')'", close.line, close.col);
                lex_.take();
                return e;
            }
            case Token::Ident: {
                if (t.text == "pi") {
                    auto e = std::make_shared<Expr>();
                    e->kind = ExprKind::Pi;
                    e->line = t.line;
                    e->col = t.col;
                    return e;
                }
                auto fn = function_table().find(t.text);
                if (fn != function_table().end()) {
                    const Token& open = lex_.peek();
                    if (open.kind != Token::LParen)
                        throw ParseError("function '" + t.text + "' requires parentheses", open.line, open.col);
                    lex_.take();
                    ExprPtr arg = parse_sum();
                    const Token& close = lex_.peek();
                    if (close.kind != Token::RParen)
                        throw ParseError("expected ')'", close.line, close.col);
                    lex_.take();
                    auto e = make(ExprKind::Call, std::move(arg), nullptr, t);
                    // make() is for operators; patch the function slot
                    const_cast<Expr*>(e.get())->func = fn->second;
                    return e;
                }
                auto e = std::make_shared<Expr>();
                e->kind = ExprKind::Variable;
                e->name = t.text;
                e->line = t.line;
                e->col = t.col;
                return e;
            }
            default:
                throw ParseError("expected a value", t.line, t.col);
        }
    }

    Lexer lex_;
};

int precedence(const Expr& e) {
    switch (e.kind) {
        case ExprKind::Add:
        case ExprKind::Sub: return 1;
        case ExprKind::Mul:
        case ExprKind::Div: return 2;
        case ExprKind::Neg: return 3;
        case ExprKind::Pow: return 4;
        default: return 5;
    }
}

std::string format_literal(double v) {
    std::array<char, 32> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

const char* func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Tan: return "tan";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
        case Func::Abs: return "abs";
    }
    return "?";
}

void print(const Expr& e, std::string& out) {
    auto child = [&](const Expr& c, bool need_paren) {
        if (need_paren) out.push_back('(');
        print(c, out);
        if (need_paren) out.push_back(')');
    };
    const int p = precedence(e);
    switch (e.kind) {
        case ExprKind::Literal: out += format_literal(e.literal); return;
        case ExprKind::Variable: out += e.name; return;
        case ExprKind::Pi: out += "pi"; return;
        case ExprKind::Neg:
            out.push_back('-');
            child(*e.a, precedence(*e.a) < p);
            return;
        case ExprKind::Call:
            out += func_name(e.func);
            out.push_back('(');
            print(*e.a, out);
            out.push_back(')');
            return;
        case ExprKind::Pow:
            child(*e.a, precedence(*e.a) <= p); // left operand of ^ must be atomic
            out.push_back('^');
            child(*e.b, precedence(*e.b) < p);
            return;
        default: break;
    }
    const char op = e.kind == ExprKind::Add ? '+' : e.kind == ExprKind::Sub ? '-'
                  : e.kind == ExprKind::Mul ? '*' : '/';
    child(*e.a, precedence(*e.a) < p);
    out.push_back(op);
    // right operand of a left-associative operator keeps parens at equal precedence
    child(*e.b, precedence(*e.b) <= p);
}

void collect_vars(const Expr& e, std::vector<std::string>& out) {
    switch (e.kind) {
        case ExprKind::Variable:
            for (const auto& n : out)
                if (n == e.name) return;
            out.push_back(e.name);
            return;
        default:
            if (e.a) collect_vars(*e.a, out);
            if (e.b) collect_vars(*e.b, out);
            return;
    }
}

enum OpCode : std::uint8_t {
    kConst, kVar, kAdd, kSub, kMul, kDiv, kNeg, kPow, kPowConst,
    kSin, kCos, kTan, kExp, kLog, kSqrt, kAbs,
};

bool is_integer(double v) { return std::round(v) == v && std::abs(v) <= 1e15; }

double pow_checked(double base, double expo) {
    if (base > 0.0) return std::pow(base, expo);
    if (base == 0.0) {
        if (expo > 0.0) return 0.0;
        if (expo == 0.0) return 1.0;
        throw DomainError("zero base raised to a negative power");
    }
    if (is_integer(expo)) return std::pow(base, expo);
    throw DomainError("fractional power of a negative base");
}

double apply_pow(double base, double expo) { return pow_checked(base, expo); }
Jet apply_pow(const Jet& base, const Jet& expo) { return pow(base, expo); }
double apply_pow_const(double base, double expo) { return pow_checked(base, expo); }
Jet apply_pow_const(const Jet& base, double expo) { return pow(base, expo); }

double apply_div(double a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    return a / b;
}
Jet apply_div(const Jet& a, const Jet& b) { return a / b; }

double apply_fn(OpCode c, double v) {
    switch (c) {
        case kSin: return std::sin(v);
        case kCos: return std::cos(v);
        case kTan: return std::tan(v);
        case kExp: return std::exp(v);
        case kLog:
            if (!(v > 0.0)) throw DomainError("log of a non-positive value");
            return std::log(v);
        case kSqrt:
            if (v < 0.0) throw DomainError("sqrt of a negative value");
            return std::sqrt(v);
        case kAbs: return std::abs(v);
        default: throw DomainError("bad opcode");
    }
}

Jet apply_fn(OpCode c, const Jet& v) {
    switch (c) {
        case kSin: return sin(v);
        case kCos: return cos(v);
        case kTan: return tan(v);
        case kExp: return exp(v);
        case kLog: return log(v);
        case kSqrt: return sqrt(v);
        case kAbs: return abs(v);
        default: throw DomainError("bad opcode");
    }
}

} // namespace

ExprPtr parse(std::string_view source) {
    Parser p(source);
    return p.parse_all();
}

std::string to_string(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprKind::Literal: return a.literal == b.literal;
        case ExprKind::Variable: return a.name == b.name;
        case ExprKind::Pi: return true;
        case ExprKind::Call:
            return a.func == b.func && equal(*a.a, *b.a);
        case ExprKind::Neg: return equal(*a.a, *b.a);
        default: return equal(*a.a, *b.a) && equal(*a.b, *b.b);
    }
}

std::vector<std::string> variables(const Expr& e) {
    std::vector<std::string> out;
    collect_vars(e, out);
    return out;
}

CompiledExpr::CompiledExpr(ExprPtr ast, std::span<const std::string> vars) : ast_(std::move(ast)) {
    nvars_ = static_cast<int>(vars.size());
    int depth = 0;
    auto note = [&](int delta) {
        depth += delta;
        stack_need_ = std::max(stack_need_, depth);
    };
    auto emit = [&](auto&& self, const Expr& e) -> void {
        switch (e.kind) {
            case ExprKind::Literal: ops_.push_back({kConst, e.literal, 0, &e}); note(1); return;
            case ExprKind::Pi: ops_.push_back({kConst, kPi, 0, &e}); note(1); return;
            case ExprKind::Variable: {
                int slot = -1;
                for (int i = 0; i < nvars_; ++i)
                    if (vars[i] == e.name) { slot = i; break; }
                if (slot < 0) throw BindError("unknown identifier '" + e.name + "'");
                ops_.push_back({kVar, 0.0, slot, &e});
                note(1);
                return;
            }
            case ExprKind::Neg:
                self(self, *e.a);
                ops_.push_back({kNeg, 0.0, 0, &e});
                return;
            case ExprKind::Call: {
                self(self, *e.a);
                OpCode c = kSin;
                switch (e.func) {
                    case Func::Sin: c = kSin; break;
                    case Func::Cos: c = kCos; break;
                    case Func::Tan: c = kTan; break;
                    case Func::Exp: c = kExp; break;
                    case Func::Log: c = kLog; break;
                    case Func::Sqrt: c = kSqrt; break;
                    case Func::Abs: c = kAbs; break;
                }
                ops_.push_back({c, 0.0, 0, &e});
                return;
            }
            case ExprKind::Pow:
                if (e.b->kind == ExprKind::Literal) {
                    self(self, *e.a);
                    ops_.push_back({kPowConst, e.b->literal, 0, &e});
                    return;
                }
                if (e.b->kind == ExprKind::Neg && e.b->a->kind == ExprKind::Literal) {
                    self(self, *e.a);
                    ops_.push_back({kPowConst, -e.b->a->literal, 0, &e});
                    return;
                }
                self(self, *e.a);
                self(self, *e.b);
                ops_.push_back({kPow, 0.0, 0, &e});
                note(-1);
                return;
            default: {
                self(self, *e.a);
                self(self, *e.b);
                OpCode c = e.kind == ExprKind::Add ? kAdd
                         : e.kind == ExprKind::Sub ? kSub
                         : e.kind == ExprKind::Mul ? kMul
                                                   : kDiv;
                ops_.push_back({c, 0.0, 0, &e});
                note(-1);
                return;
            }
        }
    };
    emit(emit, *ast_);
}

template <class T>
T CompiledExpr::run(std::span<const T> x) const {
    std::vector<T> stack(static_cast<std::size_t>(stack_need_));
    int sp = 0;
    std::size_t ip = 0;
    try {
        for (ip = 0; ip < ops_.size(); ++ip) {
            const Op& op = ops_[ip];
            switch (op.code) {
                case kConst:
                    if constexpr (std::is_same_v<T, Jet>)
                        stack[sp++] = Jet::constant(op.imm, x.empty() ? 1 : x[0].dim(),
                                                    x.empty() ? 0 : x[0].order());
                    else
                        stack[sp++] = op.imm;
                    break;
                case kVar: stack[sp++] = x[op.slot]; break;
                case kAdd: stack[sp - 2] = stack[sp - 2] + stack[sp - 1]; --sp; break;
                case kSub: stack[sp - 2] = stack[sp - 2] - stack[sp - 1]; --sp; break;
                case kMul: stack[sp - 2] = stack[sp - 2] * stack[sp - 1]; --sp; break;
                case kDiv: stack[sp - 2] = apply_div(stack[sp - 2], stack[sp - 1]); --sp; break;
                case kNeg: stack[sp - 1] = -stack[sp - 1]; break;
                case kPow: stack[sp - 2] = apply_pow(stack[sp - 2], stack[sp - 1]); --sp; break;
                case kPowConst: stack[sp - 1] = apply_pow_const(stack[sp - 1], op.imm); break;
                default: stack[sp - 1] = apply_fn(static_cast<OpCode>(op.code), stack[sp - 1]); break;
            }
        }
    } catch (const EvalError&) {
        throw;
    } catch (const DomainError& e) {
        throw EvalError(std::string(e.what()) + " in '" + to_string(*ops_[ip].src) + "'");
    }
    return stack[0];
}

double CompiledExpr::operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != nvars_) throw DomainError("point dimension mismatch");
    // same body as run<double>() but on a fixed-size scratch to avoid allocation
    std::array<double, 64> stack;
    if (stack_need_ > 64) return run<double>(x);
    int sp = 0;
    std::size_t ip = 0;
    try {
        for (ip = 0; ip < ops_.size(); ++ip) {
            const Op& op = ops_[ip];
            switch (op.code) {
                case kConst: stack[sp++] = op.imm; break;
                case kVar: stack[sp++] = x[op.slot]; break;
                case kAdd: stack[sp - 2] += stack[sp - 1]; --sp; break;
                case kSub: stack[sp - 2] -= stack[sp - 1]; --sp; break;
                case kMul: stack[sp - 2] *= stack[sp - 1]; --sp; break;
                case kDiv: stack[sp - 2] = apply_div(stack[sp - 2], stack[sp - 1]); --sp; break;
                case kNeg: stack[sp - 1] = -stack[sp - 1]; break;
                case kPow: stack[sp - 2] = apply_pow(stack[sp - 2], stack[sp - 1]); --sp; break;
                case kPowConst: stack[sp - 1] = apply_pow_const(stack[sp - 1], op.imm); break;
                default: stack[sp - 1] = apply_fn(static_cast<OpCode>(op.code), stack[sp - 1]); break;
            }
        }
    } catch (const EvalError&) {
        throw;
    } catch (const DomainError& e) {
        throw EvalError(std::string(e.what()) + " in '" + to_string(*ops_[ip].src) + "'");
    }
    return stack[0];
}

Jet CompiledExpr::jet(std::span<const double> x, int order) const {
    if (static_cast<int>(x.size()) != nvars_) throw DomainError("point dimension mismatch");
    if (order < 0 || order > kMaxJetOrder) throw DomainError("jet order must be in [0, 4]");
    std::vector<Jet> seeds;
    seeds.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        seeds.push_back(Jet::variable(x[i], static_cast<int>(i), static_cast<int>(x.size()), order));
    return run<Jet>(seeds);
}

Jet CompiledExpr::jet(std::span<const Jet> x) const {
    if (static_cast<int>(x.size()) != nvars_) throw DomainError("point dimension mismatch");
    return run<Jet>(x);
}

Jet eval_jet(const Expr& e, std::span<const std::string> vars, std::span<const double> x, int order) {
    CompiledExpr c(std::make_shared<Expr>(e), vars);
    return c.jet(x, order);
}

double eval(const Expr& e, std::span<const std::string> vars, std::span<const double> x) {
    CompiledExpr c(std::make_shared<Expr>(e), vars);
    return c(x);
}

} // namespace bilag
