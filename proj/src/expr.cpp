#include "nsgp/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "nsgp/error.hpp"

namespace nsgp {

std::string_view op_name(Op op) noexcept
{
    switch (op) {
    case Op::Variable: return "var";
    case Op::Constant: return "const";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "div_p";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log_p";
    }
    return "?";
}

Tree::Tree(std::vector<Node> prefix)
    : nodes_(std::move(prefix))
{
    if (nodes_.empty()) {
        throw ParseError("empty prefix sequence");
    }
    // `open` counts subtrees still to be read; a complete tree closes exactly
    // at the last node.
    std::size_t open = 1;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (open == 0) {
            throw ParseError("trailing nodes after complete tree at position " + std::to_string(i));
        }
        const Node& n = nodes_[i];
        if (n.op == Op::Constant && !std::isfinite(n.value)) {
            throw ParseError("non-finite constant at position " + std::to_string(i));
        }
        open = open - 1 + static_cast<std::size_t>(arity(n.op));
    }
    if (open != 0) {
        throw ParseError("incomplete prefix sequence: " + std::to_string(open) + " missing operand(s)");
    }
}

std::size_t Tree::subtree_end(std::size_t i) const noexcept
{
    std::size_t open = 1;
    while (open > 0) {
        open = open - 1 + static_cast<std::size_t>(arity(nodes_[i].op));
        ++i;
    }
    return i;
}

std::size_t Tree::depth() const
{
    // Remaining-children counters of the open ancestors; stack height is the depth.
    std::vector<int> pending;
    std::size_t deepest = 0;
    for (const Node& n : nodes_) {
        deepest = std::max(deepest, pending.size());
        if (!pending.empty()) {
            --pending.back();
        }
        if (is_operator(n.op)) {
            pending.push_back(arity(n.op));
        }
        while (!pending.empty() && pending.back() == 0) {
            pending.pop_back();
        }
    }
    return deepest;
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

constexpr double kMaxReal = std::numeric_limits<double>::max();

inline double sign(double x) noexcept { return static_cast<double>((x > 0.0) - (x < 0.0)); }

} // namespace

std::vector<double> eval_tree(const Tree& tree, const Matrix& X, EpsilonConfig eps)
{
    const std::size_t rows = X.rows();
    const double e = eps.epsilon;
    auto nodes = tree.nodes();

    for (const Node& n : nodes) {
        if (n.op == Op::Variable && n.var >= X.cols()) {
            throw VariableIndexError(n.var, X.cols());
        }
    }

    // Reverse prefix walk: children are on the stack before their parent, the
    // first child on top.
    std::vector<std::vector<double>> stack;
    std::vector<std::vector<double>> pool;
    stack.reserve(tree.depth() + 2);
    auto acquire = [&]() {
        if (pool.empty()) {
            return std::vector<double>(rows);
        }
        auto buf = std::move(pool.back());
        pool.pop_back();
        return buf;
    };

    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
        const Node& n = *it;
        switch (n.op) {
        case Op::Variable: {
            auto buf = acquire();
            auto column = X.col(n.var);
            std::copy(column.begin(), column.end(), buf.begin());
            stack.push_back(std::move(buf));
            break;
        }
        case Op::Constant: {
            auto buf = acquire();
            std::fill(buf.begin(), buf.end(), n.value);
            stack.push_back(std::move(buf));
            break;
        }
        case Op::Sin:
            for (double& v : stack.back()) v = std::sin(v);
            break;
        case Op::Cos:
            for (double& v : stack.back()) v = std::cos(v);
            break;
        case Op::Exp:
            for (double& v : stack.back()) v = std::min(std::exp(v), kMaxReal);
            break;
        case Op::Log:
            for (double& v : stack.back()) v = std::log(std::abs(v) + e);
            break;
        default: {
            auto lhs = std::move(stack.back());
            stack.pop_back();
            auto& rhs = stack.back();
            switch (n.op) {
            case Op::Add:
                for (std::size_t i = 0; i < rows; ++i) rhs[i] = lhs[i] + rhs[i];
                break;
            case Op::Sub:
                for (std::size_t i = 0; i < rows; ++i) rhs[i] = lhs[i] - rhs[i];
                break;
            case Op::Mul:
                for (std::size_t i = 0; i < rows; ++i) rhs[i] = lhs[i] * rhs[i];
                break;
            case Op::Div:
                for (std::size_t i = 0; i < rows; ++i) rhs[i] = sign(rhs[i]) * lhs[i] / (std::abs(rhs[i]) + e);
                break;
            default:
                break;
            }
            pool.push_back(std::move(lhs));
            break;
        }
        }
    }
    return std::move(stack.back());
}

// ---------------------------------------------------------------------------
// infix text

namespace {

void append_number(std::string& out, double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

// Returns the end index of the subtree written.
std::size_t write_infix(const Tree& tree, std::size_t i, std::string& out)
{
    const Node& n = tree[i];
    switch (n.op) {
    case Op::Variable:
        out += 'x';
        out += std::to_string(n.var);
        return i + 1;
    case Op::Constant:
        append_number(out, n.value);
        return i + 1;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log: {
        out += op_name(n.op);
        out += "( ";
        std::size_t end = write_infix(tree, i + 1, out);
        out += " )";
        return end;
    }
    case Op::Div: {
        out += "div_p( ";
        std::size_t mid = write_infix(tree, i + 1, out);
        out += ", ";
        std::size_t end = write_infix(tree, mid, out);
        out += " )";
        return end;
    }
    default: {
        out += "( ";
        std::size_t mid = write_infix(tree, i + 1, out);
        out += ' ';
        out += op_name(n.op);
        out += ' ';
        std::size_t end = write_infix(tree, mid, out);
        out += " )";
        return end;
    }
    }
}

class InfixParser {
public:
    explicit InfixParser(std::string_view text)
        : text_(text)
    {
    }

    Tree parse()
    {
        std::vector<Node> out;
        expression(out);
        skip_space();
        if (pos_ != text_.size()) {
            fail("unexpected trailing input");
        }
        return Tree(std::move(out));
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError(what + " at offset " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
    }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c)
    {
        skip_space();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void expect(char c)
    {
        if (!peek(c)) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    std::string_view identifier()
    {
        skip_space();
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
        return text_.substr(start, pos_ - start);
    }

    void expression(std::vector<Node>& out)
    {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            std::size_t op_slot = out.size();
            out.push_back(Node::op_node(Op::Add));
            expression(out);
            skip_space();
            if (pos_ >= text_.size()) {
                fail("expected binary operator");
            }
            switch (text_[pos_]) {
            case '+': out[op_slot].op = Op::Add; break;
            case '-': out[op_slot].op = Op::Sub; break;
            case '*': out[op_slot].op = Op::Mul; break;
            default: fail("expected binary operator");
            }
            ++pos_;
            expression(out);
            expect(')');
            return;
        }
        if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
            number(out);
            return;
        }
        std::string_view id = identifier();
        if (id.empty()) {
            fail("unexpected character");
        }
        if (id.size() > 1 && id[0] == 'x' && std::all_of(id.begin() + 1, id.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            std::uint32_t index = 0;
            auto res = std::from_chars(id.data() + 1, id.data() + id.size(), index);
            if (res.ec != std::errc{}) {
                fail("bad variable index");
            }
            out.push_back(Node::variable(index));
            return;
        }
        Op op{};
        if (id == "sin") op = Op::Sin;
        else if (id == "cos") op = Op::Cos;
        else if (id == "exp") op = Op::Exp;
        else if (id == "log_p") op = Op::Log;
        else if (id == "div_p") op = Op::Div;
        else fail("unknown identifier '" + std::string(id) + "'");

        out.push_back(Node::op_node(op));
        expect('(');
        expression(out);
        if (op == Op::Div) {
            expect(',');
            expression(out);
        }
        expect(')');
    }

    void number(std::vector<Node>& out)
    {
        std::size_t start = pos_;
        if (text_[pos_] == '+') ++start, ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
        while (pos_ < text_.size()) {
            char ch = text_[pos_];
            bool exp_sign = (ch == '-' || ch == '+') && (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E');
            if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == 'e' || ch == 'E' || exp_sign) {
                ++pos_;
            } else {
                break;
            }
        }
        double v = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (res.ec != std::errc{} || res.ptr != text_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        out.push_back(Node::constant(v));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace

std::string to_infix(const Tree& tree)
{
    std::string out;
    write_infix(tree, 0, out);
    return out;
}

Tree parse_infix(std::string_view text) { return InfixParser(text).parse(); }

// ---------------------------------------------------------------------------
// generation and variation

namespace {

Node random_leaf(std::size_t dims, Rng& rng)
{
    // The ephemeral random constant counts as one extra terminal.
    std::uniform_int_distribution<std::size_t> pick(0, dims);
    std::size_t k = pick(rng);
    if (k < dims) {
        return Node::variable(static_cast<std::uint32_t>(k));
    }
    std::uniform_real_distribution<double> erc(kConstantMin, kConstantMax);
    return Node::constant(erc(rng));
}

Op random_operator(Rng& rng)
{
    static constexpr Op kAll[] = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Sin, Op::Cos, Op::Exp, Op::Log};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kAll) - 1);
    return kAll[pick(rng)];
}

void grow_into(std::vector<Node>& out, InitMethod method, int depth, int max_depth, std::size_t dims, Rng& rng)
{
    bool leaf = depth >= max_depth;
    if (!leaf && method == InitMethod::Grow && depth > 0) {
        // Grow picks uniformly from the whole primitive set below the root.
        constexpr std::size_t n_ops = 8;
        std::uniform_int_distribution<std::size_t> pick(0, dims + n_ops);
        leaf = pick(rng) <= dims;
    }
    if (leaf) {
        out.push_back(random_leaf(dims, rng));
        return;
    }
    Op op = random_operator(rng);
    out.push_back(Node::op_node(op));
    for (int k = 0; k < arity(op); ++k) {
        grow_into(out, method, depth + 1, max_depth, dims, rng);
    }
}

} // namespace

Tree random_tree(InitMethod method, int max_depth, std::size_t dims, Rng& rng)
{
    if (max_depth < 0) {
        throw ConfigError("max_depth must be >= 0");
    }
    if (dims == 0) {
        throw ConfigError("random_tree needs at least one variable");
    }
    std::vector<Node> nodes;
    grow_into(nodes, method, 0, max_depth, dims, rng);
    return Tree(std::move(nodes));
}

std::vector<Tree> ramped_half_and_half(std::size_t pop_size, int min_depth, int max_depth, std::size_t dims, Rng& rng)
{
    if (min_depth <= 0 || min_depth > max_depth) {
        throw ConfigError("ramped half-and-half needs 0 < min_depth <= max_depth");
    }
    const auto levels = static_cast<std::size_t>(max_depth - min_depth + 1);
    std::vector<Tree> out;
    out.reserve(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i) {
        const int depth = min_depth + static_cast<int>(i % levels);
        const InitMethod method = (i / levels) % 2 == 0 ? InitMethod::Grow : InitMethod::Full;
        for (;;) {
            Tree t = random_tree(method, depth, dims, rng);
            if (t.size() <= kMaxTreeSize) {
                out.push_back(std::move(t));
                break;
            }
        }
    }
    return out;
}

std::pair<Tree, Tree> subtree_crossover(const Tree& a, const Tree& b, Rng& rng)
{
    std::uniform_int_distribution<std::size_t> pick_a(0, a.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_b(0, b.size() - 1);
    const std::size_t ia = pick_a(rng);
    const std::size_t ib = pick_b(rng);
    const std::size_t ea = a.subtree_end(ia);
    const std::size_t eb = b.subtree_end(ib);
    auto na = a.nodes();
    auto nb = b.nodes();

    auto splice = [](std::span<const Node> host, std::size_t from, std::size_t to, std::span<const Node> donor, std::size_t dfrom, std::size_t dto) {
        std::vector<Node> out;
        out.reserve(host.size() - (to - from) + (dto - dfrom));
        out.insert(out.end(), host.begin(), host.begin() + static_cast<std::ptrdiff_t>(from));
        out.insert(out.end(), donor.begin() + static_cast<std::ptrdiff_t>(dfrom), donor.begin() + static_cast<std::ptrdiff_t>(dto));
        out.insert(out.end(), host.begin() + static_cast<std::ptrdiff_t>(to), host.end());
        return out;
    };

    auto o1 = splice(na, ia, ea, nb, ib, eb);
    auto o2 = splice(nb, ib, eb, na, ia, ea);
    Tree c1 = o1.size() <= kMaxTreeSize ? Tree(std::move(o1)) : a;
    Tree c2 = o2.size() <= kMaxTreeSize ? Tree(std::move(o2)) : b;
    return {std::move(c1), std::move(c2)};
}

Tree one_point_mutation(const Tree& tree, std::size_t dims, Rng& rng, std::size_t* points)
{
    std::vector<Node> nodes(tree.nodes().begin(), tree.nodes().end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick4(0, 3);
    const double rate = 1.0 / static_cast<double>(nodes.size());
    std::size_t changed = 0;
    for (Node& n : nodes) {
        if (unit(rng) >= rate) {
            continue;
        }
        ++changed;
        switch (arity(n.op)) {
        case 0: n = random_leaf(dims, rng); break;
        case 1: n = Node::op_node(kUnaryOps[pick4(rng)]); break;
        default: n = Node::op_node(kBinaryOps[pick4(rng)]); break;
        }
    }
    if (points != nullptr) {
        *points = changed;
    }
    return Tree(std::move(nodes));
}

} // namespace nsgp
