#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nsgp/matrix.hpp"

namespace nsgp {

enum class Op : std::uint8_t {
    Variable,
    Constant,
    Add,
    Sub,
    Mul,
    Div, // protected: sign(b) * a / (|b| + eps)
    Sin,
    Cos,
    Exp,
    Log, // protected: log(|a| + eps)
};

constexpr int arity(Op op) noexcept
{
    switch (op) {
    case Op::Variable:
    case Op::Constant:
        return 0;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Log:
        return 1;
    default:
        return 2;
    }
}

constexpr bool is_operator(Op op) noexcept { return arity(op) > 0; }

// sin, cos, exp and log are the non-arithmetic primitives.
constexpr bool is_non_arithmetic(Op op) noexcept { return arity(op) == 1; }

std::string_view op_name(Op op) noexcept;

inline constexpr Op kUnaryOps[] = {Op::Sin, Op::Cos, Op::Exp, Op::Log};
inline constexpr Op kBinaryOps[] = {Op::Add, Op::Sub, Op::Mul, Op::Div};

// Hard cap on the node count of any tree admitted to a population.
inline constexpr std::size_t kMaxTreeSize = 100;

inline constexpr double kConstantMin = -5.0;
inline constexpr double kConstantMax = 5.0;

struct Node {
    Op op = Op::Constant;
    std::uint32_t var = 0; // Variable only
    double value = 0.0;    // Constant only

    static Node variable(std::uint32_t index) noexcept { return {Op::Variable, index, 0.0}; }
    static Node constant(double v) noexcept { return {Op::Constant, 0, v}; }
    static Node op_node(Op o) noexcept { return {o, 0, 0.0}; }

    friend bool operator==(const Node&, const Node&) = default;
};

// Expression tree in prefix (pre-order) layout. Always holds exactly one
// complete, arity-consistent tree with finite constants.
class Tree {
public:
    // Throws ParseError if the sequence does not encode exactly one tree.
    explicit Tree(std::vector<Node> prefix);

    std::span<const Node> nodes() const noexcept { return nodes_; }
    const Node& operator[](std::size_t i) const noexcept { return nodes_[i]; }
    std::size_t size() const noexcept { return nodes_.size(); }

    // A lone leaf has depth 0.
    std::size_t depth() const;

    // One past the last node of the subtree rooted at `i`.
    std::size_t subtree_end(std::size_t i) const noexcept;

    friend bool operator==(const Tree&, const Tree&) = default;

private:
    std::vector<Node> nodes_;
};

struct EpsilonConfig {
    double epsilon = 1e-6;
};

// Evaluates the tree on every row of X. Throws VariableIndexError when a
// variable leaf refers to a missing column. exp() saturates at the largest
// finite double instead of overflowing.
std::vector<double> eval_tree(const Tree& tree, const Matrix& X, EpsilonConfig eps = {});

inline std::size_t size(const Tree& tree) noexcept { return tree.size(); }

// Infix text, e.g. `( exp( sin( x0 ) ) - 1.234 )`. Constants use the shortest
// representation that round-trips exactly.
std::string to_infix(const Tree& tree);

// Inverse of to_infix. Throws ParseError.
Tree parse_infix(std::string_view text);

enum class InitMethod { Grow, Full };

Tree random_tree(InitMethod method, int max_depth, std::size_t dims, Rng& rng);

std::vector<Tree> ramped_half_and_half(std::size_t pop_size, int min_depth, int max_depth, std::size_t dims, Rng& rng);

// Swaps one uniformly chosen subtree of each parent. An offspring above
// kMaxTreeSize is replaced by a copy of the parent it was built from.
std::pair<Tree, Tree> subtree_crossover(const Tree& a, const Tree& b, Rng& rng);

// Each node is independently resampled with probability 1/size to a random
// primitive of the same arity. `points`, when given, receives the number of
// resampled nodes.
Tree one_point_mutation(const Tree& tree, std::size_t dims, Rng& rng, std::size_t* points = nullptr);

} // namespace nsgp
