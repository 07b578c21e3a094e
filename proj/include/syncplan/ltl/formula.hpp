#pragma once

#include <cctype>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "syncplan/core.hpp"
#include "syncplan/error.hpp"

namespace syncplan::ltl {

enum class Op { True, False, Prop, Not, And, Or, Implies, Next, Eventually, Globally, Until, Release };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op;
    std::string name;       // Prop only
    std::size_t prop = 0;   // Prop only: bit index in the owning alphabet
    NodePtr lhs;
    NodePtr rhs;
};

// Immutable LTL syntax tree; copies share structure.
class Formula {
public:
    Formula() : node_(std::make_shared<Node>(Node{Op::True, {}, 0, nullptr, nullptr})) {}
    explicit Formula(NodePtr n) : node_(std::move(n)) {}

    Op op() const { return node_->op; }
    const std::string& name() const { return node_->name; }
    std::size_t prop() const { return node_->prop; }
    Formula lhs() const { return Formula(node_->lhs); }
    Formula rhs() const { return Formula(node_->rhs); }
    const Node* node() const { return node_.get(); }

    static Formula constant(bool v) { return make(v ? Op::True : Op::False); }
    static Formula atom(std::string name, std::size_t index) {
        return Formula(std::make_shared<Node>(Node{Op::Prop, std::move(name), index, nullptr, nullptr}));
    }
    static Formula unary(Op op, const Formula& a) {
        return Formula(std::make_shared<Node>(Node{op, {}, 0, a.node_, nullptr}));
    }
    static Formula binary(Op op, const Formula& a, const Formula& b) {
        return Formula(std::make_shared<Node>(Node{op, {}, 0, a.node_, b.node_}));
    }

    friend bool operator==(const Formula& a, const Formula& b) { return equal(a.node_.get(), b.node_.get()); }

private:
    NodePtr node_;

    static Formula make(Op op) { return Formula(std::make_shared<Node>(Node{op, {}, 0, nullptr, nullptr})); }

    static bool equal(const Node* a, const Node* b) {
        if (a == b) return true;
        if (!a || !b || a->op != b->op) return false;
        if (a->op == Op::Prop) return a->name == b->name;
        return equal(a->lhs.get(), b->lhs.get()) && equal(a->rhs.get(), b->rhs.get());
    }
};

inline bool is_unary(Op op) {
    return op == Op::Not || op == Op::Next || op == Op::Eventually || op == Op::Globally;
}
inline bool is_binary(Op op) {
    return op == Op::And || op == Op::Or || op == Op::Implies || op == Op::Until || op == Op::Release;
}

inline Formula operator!(const Formula& a) { return Formula::unary(Op::Not, a); }
inline Formula operator&&(const Formula& a, const Formula& b) { return Formula::binary(Op::And, a, b); }
inline Formula operator||(const Formula& a, const Formula& b) { return Formula::binary(Op::Or, a, b); }
inline Formula implies(const Formula& a, const Formula& b) { return Formula::binary(Op::Implies, a, b); }
inline Formula next(const Formula& a) { return Formula::unary(Op::Next, a); }
inline Formula eventually(const Formula& a) { return Formula::unary(Op::Eventually, a); }
inline Formula globally(const Formula& a) { return Formula::unary(Op::Globally, a); }
inline Formula until(const Formula& a, const Formula& b) { return Formula::binary(Op::Until, a, b); }
inline Formula release(const Formula& a, const Formula& b) { return Formula::binary(Op::Release, a, b); }

namespace detail {

inline int precedence(Op op) {
    switch (op) {
        case Op::Implies: return 1;
        case Op::Or: return 2;
        case Op::And: return 3;
        case Op::Until:
        case Op::Release: return 4;
        case Op::Not:
        case Op::Next:
        case Op::Eventually:
        case Op::Globally: return 5;
        default: return 6;
    }
}

inline const char* symbol(Op op) {
    switch (op) {
        case Op::Not: return "!";
        case Op::Next: return "X ";
        case Op::Eventually: return "F ";
        case Op::Globally: return "G ";
        case Op::And: return " && ";
        case Op::Or: return " || ";
        case Op::Implies: return " -> ";
        case Op::Until: return " U ";
        case Op::Release: return " R ";
        default: return "";
    }
}

inline void print(const Formula& f, std::string& out) {
    switch (f.op()) {
        case Op::True: out += "true"; return;
        case Op::False: out += "false"; return;
        case Op::Prop: out += f.name(); return;
        default: break;
    }
    const int p = precedence(f.op());
    auto child = [&](const Formula& c, bool right_side) {
        const int cp = precedence(c.op());
        // right-associative binaries (->, U, R) keep same-level right children bare
        bool bare = cp > p || (cp == p && is_unary(c.op()));
        if (cp == p && is_binary(f.op()) && c.op() == f.op()) {
            bool right_assoc = f.op() == Op::Implies || f.op() == Op::Until || f.op() == Op::Release;
            bare = right_assoc ? right_side : !right_side;
        }
        if (!bare) out += "(";
        print(c, out);
        if (!bare) out += ")";
    };
    if (is_unary(f.op())) {
        out += symbol(f.op());
        child(f.lhs(), true);
        return;
    }
    child(f.lhs(), false);
    out += symbol(f.op());
    child(f.rhs(), true);
}

class Parser {
public:
    Parser(std::string_view text, const Alphabet& props) : text_(text), props_(props) {}

    Formula parse() {
        skip_ws();
        if (pos_ >= text_.size()) fail("empty formula");
        Formula f = parse_implies();
        skip_ws();
        if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return f;
    }

private:
    std::string_view text_;
    const Alphabet& props_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("", "LTL syntax error at column " + std::to_string(pos_ + 1) + ": " + what);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(std::string_view tok) {
        skip_ws();
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    }

    // Reads a keyword only when it is a whole word.
    bool eat_word(std::string_view word) {
        skip_ws();
        if (text_.substr(pos_, word.size()) != word) return false;
        std::size_t end = pos_ + word.size();
        if (end < text_.size() && ident_char(text_[end])) return false;
        pos_ = end;
        return true;
    }

    Formula parse_implies() {
        Formula lhs = parse_or();
        if (eat("->") || eat("=>")) return implies(lhs, parse_implies());
        return lhs;
    }

    Formula parse_or() {
        Formula lhs = parse_and();
        while (eat("||") || eat("|")) lhs = lhs || parse_and();
        return lhs;
    }

    Formula parse_and() {
        Formula lhs = parse_until();
        while (eat("&&") || eat("&")) lhs = lhs && parse_until();
        return lhs;
    }

    Formula parse_until() {
        Formula lhs = parse_unary();
        if (eat_word("U")) return until(lhs, parse_until());
        if (eat_word("R")) return release(lhs, parse_until());
        return lhs;
    }

    Formula parse_unary() {
        if (eat("!")) return !parse_unary();
        if (eat_word("X")) return next(parse_unary());
        if (eat_word("F")) return eventually(parse_unary());
        if (eat_word("G")) return globally(parse_unary());
        return parse_primary();
    }

    Formula parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of formula");
        if (eat("(")) {
            Formula f = parse_implies();
            if (!eat(")")) fail("expected ')'");
            return f;
        }
        if (eat_word("true")) return Formula::constant(true);
        if (eat_word("false")) return Formula::constant(false);
        std::size_t start = pos_;
        if (!std::isalpha(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '_') fail("expected a proposition");
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (name == "U" || name == "R") {
            pos_ = start;
            fail("expected an operand before '" + name + "'");
        }
        auto idx = props_.index_of(name);
        if (!idx) {
            pos_ = start;
            fail("unknown proposition '" + name + "'");
        }
        return Formula::atom(name, *idx);
    }
};

}  // namespace detail

inline std::string to_string(const Formula& f) {
    std::string out;
    detail::print(f, out);
    return out;
}

// Grammar, loosest to tightest: ->  ||  &&  U/R  unary (! X F G). `->`, `U` and `R` are right-associative.
inline Formula parse_ltl(std::string_view text, const Alphabet& props) {
    return detail::Parser(text, props).parse();
}

// Negation normal form over {true, false, p, !p, &&, ||, X, U, R}.
inline Formula to_nnf(const Formula& f, bool negated = false) {
    switch (f.op()) {
        case Op::True: return Formula::constant(!negated);
        case Op::False: return Formula::constant(negated);
        case Op::Prop: return negated ? !f : f;
        case Op::Not: return to_nnf(f.lhs(), !negated);
        case Op::And:
            return negated ? to_nnf(f.lhs(), true) || to_nnf(f.rhs(), true)
                           : to_nnf(f.lhs(), false) && to_nnf(f.rhs(), false);
        case Op::Or:
            return negated ? to_nnf(f.lhs(), true) && to_nnf(f.rhs(), true)
                           : to_nnf(f.lhs(), false) || to_nnf(f.rhs(), false);
        case Op::Implies:
            return negated ? to_nnf(f.lhs(), false) && to_nnf(f.rhs(), true)
                           : to_nnf(f.lhs(), true) || to_nnf(f.rhs(), false);
        case Op::Next: return next(to_nnf(f.lhs(), negated));
        case Op::Eventually:
            return negated ? release(Formula::constant(false), to_nnf(f.lhs(), true))
                           : until(Formula::constant(true), to_nnf(f.lhs(), false));
        case Op::Globally:
            return negated ? until(Formula::constant(true), to_nnf(f.lhs(), true))
                           : release(Formula::constant(false), to_nnf(f.lhs(), false));
        case Op::Until:
            return negated ? release(to_nnf(f.lhs(), true), to_nnf(f.rhs(), true))
                           : until(to_nnf(f.lhs(), false), to_nnf(f.rhs(), false));
        case Op::Release:
            return negated ? until(to_nnf(f.lhs(), true), to_nnf(f.rhs(), true))
                           : release(to_nnf(f.lhs(), false), to_nnf(f.rhs(), false));
    }
    return f;
}

inline bool is_nnf(const Formula& f) {
    switch (f.op()) {
        case Op::True:
        case Op::False:
        case Op::Prop: return true;
        case Op::Not: return f.lhs().op() == Op::Prop;
        case Op::And:
        case Op::Or:
        case Op::Until:
        case Op::Release: return is_nnf(f.lhs()) && is_nnf(f.rhs());
        case Op::Next: return is_nnf(f.lhs());
        default: return false;
    }
}

// Ultimately periodic word stem . loop^omega over PropSet letters.
struct LassoWord {
    std::vector<PropSet> stem;
    std::vector<PropSet> loop;

    std::size_t size() const { return stem.size() + loop.size(); }
    PropSet at(std::size_t i) const { return i < stem.size() ? stem[i] : loop[(i - stem.size()) % loop.size()]; }
    friend bool operator==(const LassoWord&, const LassoWord&) = default;
};

namespace detail {

class LassoEvaluator {
public:
    explicit LassoEvaluator(const LassoWord& w) : w_(w), n_(w.size()), loop_start_(w.stem.size()) {
        if (w.loop.empty()) throw ModelError("lasso word needs a nonempty loop");
    }

    std::vector<bool> eval(const Formula& f) const {
        switch (f.op()) {
            case Op::True: return std::vector<bool>(n_, true);
            case Op::False: return std::vector<bool>(n_, false);
            case Op::Prop: {
                std::vector<bool> v(n_);
                for (std::size_t i = 0; i < n_; ++i) v[i] = (w_.at(i) >> f.prop()) & 1U;
                return v;
            }
            case Op::Not: {
                auto v = eval(f.lhs());
                v.flip();
                return v;
            }
            case Op::And:
            case Op::Or:
            case Op::Implies: {
                auto a = eval(f.lhs());
                auto b = eval(f.rhs());
                for (std::size_t i = 0; i < n_; ++i) {
                    if (f.op() == Op::And) a[i] = a[i] && b[i];
                    else if (f.op() == Op::Or) a[i] = a[i] || b[i];
                    else a[i] = !a[i] || b[i];
                }
                return a;
            }
            case Op::Next: {
                auto a = eval(f.lhs());
                std::vector<bool> v(n_);
                for (std::size_t i = 0; i < n_; ++i) v[i] = a[succ(i)];
                return v;
            }
            case Op::Eventually: return fixpoint(std::vector<bool>(n_, true), eval(f.lhs()), false);
            case Op::Globally: return fixpoint(std::vector<bool>(n_, false), eval(f.lhs()), true);
            case Op::Until: return fixpoint(eval(f.lhs()), eval(f.rhs()), false);
            case Op::Release: return fixpoint(eval(f.lhs()), eval(f.rhs()), true);
        }
        return {};
    }

private:
    const LassoWord& w_;
    std::size_t n_;
    std::size_t loop_start_;

    std::size_t succ(std::size_t i) const { return i + 1 < n_ ? i + 1 : loop_start_; }

    // Until:   x = b | (a & X x), least fixpoint (start from false).
    // Release: x = b & (a | X x), greatest fixpoint (start from true).
    // Two backward sweeps over the loop reach the fixpoint; the stem then needs one sweep.
    std::vector<bool> fixpoint(const std::vector<bool>& a, const std::vector<bool>& b, bool greatest) const {
        std::vector<bool> x(n_, greatest);
        auto step = [&](std::size_t i) {
            bool nx = x[succ(i)];
            x[i] = greatest ? (b[i] && (a[i] || nx)) : (b[i] || (a[i] && nx));
        };
        for (int sweep = 0; sweep < 2; ++sweep)
            for (std::size_t i = n_; i-- > loop_start_;) step(i);
        for (std::size_t i = loop_start_; i-- > 0;) step(i);
        return x;
    }
};

}  // namespace detail

// Decides stem . loop^omega |= f directly on the syntax tree.
inline bool eval_lasso(const Formula& f, const LassoWord& w) {
    return detail::LassoEvaluator(w).eval(f).front();
}

inline void collect_props(const Formula& f, std::set<std::string>& out) {
    if (f.op() == Op::Prop) out.insert(f.name());
    if (f.node()->lhs) collect_props(f.lhs(), out);
    if (f.node()->rhs) collect_props(f.rhs(), out);
}

// Top-level conjuncts of f, left to right.
inline void conjuncts(const Formula& f, std::vector<Formula>& out) {
    if (f.op() == Op::And) {
        conjuncts(f.lhs(), out);
        conjuncts(f.rhs(), out);
    } else {
        out.push_back(f);
    }
}

}  // namespace syncplan::ltl

namespace syncplan {

// phi = varphi && G F pi, over the global proposition set.
struct Mission {
    std::string text;
    ltl::Formula formula;
    std::string optimizing;
    Alphabet alphabet;

    PropSet pi_bit() const { return alphabet.bit(optimizing); }
};

inline Mission make_mission(const std::string& text, const std::string& optimizing, const std::set<std::string>& props) {
    std::set<std::string> all = props;
    all.insert(optimizing);
    Mission m{text, {}, optimizing, Alphabet(all)};
    m.formula = ltl::parse_ltl(text, m.alphabet);
    std::vector<ltl::Formula> parts;
    ltl::conjuncts(m.formula, parts);
    bool found = false;
    for (const auto& c : parts) {
        if (c.op() == ltl::Op::Globally && c.lhs().op() == ltl::Op::Eventually &&
            c.lhs().lhs().op() == ltl::Op::Prop && c.lhs().lhs().name() == optimizing)
            found = true;
    }
    if (!found)
        throw ParseError("", "mission must be a conjunction containing 'G F " + optimizing + "'");
    return m;
}

}  // namespace syncplan
