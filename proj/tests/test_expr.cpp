#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "nsgp/error.hpp"
#include "nsgp/expr.hpp"
#include "support/oracles.hpp"

using namespace nsgp;

namespace {

Matrix row(std::initializer_list<double> values)
{
    Matrix m(1, values.size());
    std::size_t c = 0;
    for (double v : values) m(0, c++) = v;
    return m;
}

Tree t(std::string_view infix) { return parse_infix(infix); }

} // namespace

TEST_CASE("tree construction rejects malformed prefix sequences")
{
    CHECK_THROWS_AS(Tree({}), ParseError);
    CHECK_THROWS_AS(Tree({Node::op_node(Op::Add), Node::variable(0)}), ParseError);
    CHECK_THROWS_AS(Tree({Node::variable(0), Node::variable(1)}), ParseError);
    CHECK_THROWS_AS(Tree({Node::constant(std::numeric_limits<double>::infinity())}), ParseError);
    CHECK_NOTHROW(Tree({Node::op_node(Op::Sin), Node::variable(0)}));
}

TEST_CASE("eval_tree examples")
{
    EpsilonConfig eps{1e-6};
    CHECK(eval_tree(t("x0"), row({3.5}), eps)[0] == 3.5);
    CHECK(eval_tree(t("div_p( x0, x1 )"), row({1.0, 0.0}), eps)[0] == 0.0);
    // log(|-1| + 1e-6) = log1p(1e-6)
    CHECK(eval_tree(t("log_p( x0 )"), row({-1.0}), eps)[0] == doctest::Approx(9.999995e-7).epsilon(1e-9));
    CHECK(eval_tree(t("log_p( x0 )"), row({-1.0}), eps)[0] == doctest::Approx(std::log1p(1e-6)).epsilon(1e-12));
    CHECK(eval_tree(t("( x0 - x1 )"), row({5.0, 2.0}), eps)[0] == 3.0);
    CHECK(eval_tree(t("div_p( x0, x1 )"), row({1.0, -2.0}), eps)[0] == doctest::Approx(-1.0 / (2.0 + 1e-6)));
}

TEST_CASE("eval_tree reports out-of-range variables")
{
    try {
        eval_tree(t("( x0 + x3 )"), row({1.0, 2.0}));
        FAIL("expected VariableIndexError");
    } catch (const VariableIndexError& e) {
        CHECK(e.index == 3);
    }
}

TEST_CASE("exp overflow saturates")
{
    auto v = eval_tree(t("exp( exp( x0 ) )"), row({10.0}))[0];
    CHECK(v == std::numeric_limits<double>::max());
}

TEST_CASE("protected division tracks plain division away from zero")
{
    // Relative deviation of sign(b) a / (|b| + eps) from a / b is
    // eps / (|b| + eps): under 1e-3 for |b| >= 1e-3, under 1e-9 for |b| >= 1e3.
    Rng rng(7);
    std::uniform_real_distribution<double> log_mag(-3.0, 6.0);
    std::uniform_real_distribution<double> num(-1e3, 1e3);
    std::bernoulli_distribution neg(0.5);
    const Tree div = t("div_p( x0, x1 )");
    for (int i = 0; i < 10000; ++i) {
        const double a = num(rng);
        const double b = (neg(rng) ? -1 : 1) * std::pow(10.0, log_mag(rng));
        const double got = eval_tree(div, row({a, b}))[0];
        const double want = a / b;
        const double rel = std::abs(got - want) / std::abs(want);
        REQUIRE(rel <= 1e-6 / std::abs(b) + 1e-15);
        if (std::abs(b) >= 1e3) REQUIRE(rel <= 1e-9);
    }
}

TEST_CASE("size counts every node")
{
    CHECK(size(t("x0")) == 1);
    CHECK(size(t("( x0 + 1.5 )")) == 3);
    CHECK(size(t("( exp( exp( sin( x0 ) ) ) - x1 )")) == 6);
}

TEST_CASE("infix text")
{
    Tree tree({Node::op_node(Op::Sub), Node::op_node(Op::Exp), Node::op_node(Op::Sin), Node::variable(0), Node::constant(1.234)});
    CHECK(to_infix(tree) == "( exp( sin( x0 ) ) - 1.234 )");
    CHECK(parse_infix("( exp( sin( x0 ) ) - 1.234 )") == tree);
    CHECK(parse_infix("(x0--2.5)") == Tree({Node::op_node(Op::Sub), Node::variable(0), Node::constant(-2.5)}));
    CHECK_THROWS_AS(parse_infix("( x0 + )"), ParseError);
    CHECK_THROWS_AS(parse_infix("tan( x0 )"), ParseError);
    CHECK_THROWS_AS(parse_infix("( x0 + x1 ) x2"), ParseError);
}

TEST_CASE("property: infix round-trip is exact")
{
    Rng rng(11);
    for (int i = 0; i < 5000; ++i) {
        const auto method = i % 2 ? InitMethod::Full : InitMethod::Grow;
        const Tree tree = random_tree(method, 1 + i % 5, 3, rng);
        const Tree back = parse_infix(to_infix(tree));
        REQUIRE(back == tree);
    }
}

TEST_CASE("property: trees without variables are constant over rows")
{
    Rng rng(3);
    Matrix X(50, 2);
    std::uniform_real_distribution<double> u(-3, 3);
    for (std::size_t r = 0; r < 50; ++r) X(r, 0) = u(rng), X(r, 1) = u(rng);
    int checked = 0;
    for (int i = 0; i < 5000 && checked < 200; ++i) {
        Tree tree = random_tree(InitMethod::Grow, 4, 2, rng);
        bool has_var = false;
        for (const auto& n : tree.nodes()) has_var |= n.op == Op::Variable;
        if (has_var) continue;
        ++checked;
        auto out = eval_tree(tree, X);
        for (double v : out) {
            if (std::isnan(out[0])) CHECK(std::isnan(v));
            else CHECK(v == out[0]);
        }
    }
    CHECK(checked > 10);
}

TEST_CASE("random_tree depth contracts")
{
    Rng rng(5);
    SUBCASE("full depth 0 is a single leaf")
    {
        for (int i = 0; i < 100; ++i) CHECK(random_tree(InitMethod::Full, 0, 2, rng).size() == 1);
    }
    SUBCASE("full trees have every leaf at max depth")
    {
        for (int i = 0; i < 500; ++i) {
            const Tree tree = random_tree(InitMethod::Full, 2, 3, rng);
            std::size_t pos = 0;
            auto root = oracle::rebuild(tree.nodes(), pos);
            std::vector<std::size_t> depths;
            oracle::leaf_depths(*root, 0, depths);
            for (auto d : depths) CHECK(d == 2);
            CHECK(tree.depth() == 2);
        }
    }
    SUBCASE("grow trees stay within max depth and vary")
    {
        std::size_t shallower = 0;
        for (int i = 0; i < 10000; ++i) {
            const Tree tree = random_tree(InitMethod::Grow, 6, 2, rng);
            std::size_t pos = 0;
            auto root = oracle::rebuild(tree.nodes(), pos);
            const auto d = oracle::depth_by_walk(*root);
            REQUIRE(d <= 6);
            REQUIRE(tree.depth() == d);
            REQUIRE(is_operator(tree[0].op));
            shallower += d < 6 ? 1 : 0;
        }
        CHECK(shallower >= 1);
    }
    SUBCASE("constants come from U(-5, 5)")
    {
        for (int i = 0; i < 1000; ++i) {
            for (const auto& n : random_tree(InitMethod::Full, 3, 1, rng).nodes()) {
                if (n.op == Op::Constant) CHECK((n.value >= -5.0 && n.value < 5.0));
            }
        }
    }
}

TEST_CASE("ramped half-and-half")
{
    Rng rng(9);
    SUBCASE("depth levels are balanced")
    {
        auto pop = ramped_half_and_half(1000, 1, 6, 2, rng);
        REQUIRE(pop.size() == 1000);
        std::map<std::size_t, int> per_depth;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            // full trees hit their target depth exactly; level is i % 6
            if ((i / 6) % 2 == 1) CHECK(pop[i].depth() == 1 + i % 6);
            else CHECK(pop[i].depth() <= 1 + i % 6);
            per_depth[1 + i % 6]++;
        }
        for (auto [d, count] : per_depth) CHECK(std::abs(count - 1000.0 / 6.0) <= 1.0);
    }
    SUBCASE("two trees at depth 1: one grow, one full")
    {
        auto pop = ramped_half_and_half(2, 1, 1, 3, rng);
        REQUIRE(pop.size() == 2);
        CHECK(pop[0].depth() <= 1);
        CHECK(pop[1].depth() == 1);
    }
    SUBCASE("size cap and operator roots")
    {
        for (int rep = 0; rep < 5; ++rep) {
            for (const auto& tree : ramped_half_and_half(1000, 1, 6, 1, rng)) {
                CHECK(tree.size() <= kMaxTreeSize);
                CHECK(is_operator(tree[0].op));
            }
        }
    }
    CHECK_THROWS_AS(ramped_half_and_half(10, 0, 3, 1, rng), ConfigError);
}

TEST_CASE("subtree crossover")
{
    Rng rng(13);
    SUBCASE("single-node parents swap")
    {
        auto [o1, o2] = subtree_crossover(t("x0"), t("x1"), rng);
        CHECK(o1 == t("x1"));
        CHECK(o2 == t("x0"));
    }
    SUBCASE("nodes are conserved and parents untouched")
    {
        const Tree a = t("( sin( x0 ) + x1 )");
        const Tree b = t("( ( x0 * x1 ) - cos( 2.5 ) )");
        const Tree a_copy = a;
        for (int i = 0; i < 200; ++i) {
            auto [o1, o2] = subtree_crossover(a, b, rng);
            CHECK(o1.size() + o2.size() == a.size() + b.size());
        }
        CHECK(a == a_copy);
    }
    SUBCASE("5 + 7 nodes")
    {
        const Tree b = t("( ( x0 * x1 ) - exp( cos( 2.5 ) ) )");
        const Tree a5 = t("( sin( x0 ) + log_p( x1 ) )");
        REQUIRE(a5.size() == 5);
        REQUIRE(b.size() == 7);
        for (int i = 0; i < 200; ++i) {
            auto [o1, o2] = subtree_crossover(a5, b, rng);
            CHECK(o1.size() + o2.size() == 12);
        }
    }
    SUBCASE("oversized offspring fall back to the parent")
    {
        // a chain of 59 sin nodes over x0 (size 60); b the same over x1.
        std::vector<Node> na(59, Node::op_node(Op::Sin));
        na.push_back(Node::variable(0));
        std::vector<Node> nb(59, Node::op_node(Op::Cos));
        nb.push_back(Node::variable(1));
        const Tree a(na), b(nb);
        int replaced = 0;
        for (int i = 0; i < 2000; ++i) {
            auto [o1, o2] = subtree_crossover(a, b, rng);
            CHECK(o1.size() <= kMaxTreeSize);
            CHECK(o2.size() <= kMaxTreeSize);
            if (o1 == a) ++replaced;
        }
        CHECK(replaced > 0);
    }
}

TEST_CASE("one-point mutation")
{
    Rng rng(17);
    SUBCASE("forced leaf mutation stays a leaf")
    {
        for (int i = 0; i < 200; ++i) {
            std::size_t points = 0;
            Tree out = one_point_mutation(t("x0"), 3, rng, &points);
            CHECK(points == 1); // rate 1/1
            CHECK(out.size() == 1);
            CHECK(arity(out[0].op) == 0);
        }
    }
    SUBCASE("binary nodes stay binary, unary stay unary")
    {
        const Tree tree = t("( sin( x0 ) + x1 )");
        std::set<Op> seen_root;
        for (int i = 0; i < 2000; ++i) {
            Tree out = one_point_mutation(tree, 2, rng);
            REQUIRE(out.size() == tree.size());
            for (std::size_t k = 0; k < out.size(); ++k) CHECK(arity(out[k].op) == arity(tree[k].op));
            seen_root.insert(out[0].op);
        }
        CHECK(seen_root == std::set<Op>{Op::Add, Op::Sub, Op::Mul, Op::Div});
    }
    SUBCASE("about one resampled node per application")
    {
        const Tree ten = t("( ( sin( x0 ) + x1 ) * div_p( x0, exp( cos( 1.5 ) ) ) )");
        REQUIRE(ten.size() == 10);
        double total = 0;
        for (int i = 0; i < 10000; ++i) {
            std::size_t points = 0;
            one_point_mutation(ten, 2, rng, &points);
            total += static_cast<double>(points);
        }
        CHECK(total / 10000.0 == doctest::Approx(1.0).epsilon(0.1));
    }
}

TEST_CASE("property: variation preserves the size cap and arity consistency")
{
    Rng rng(23);
    auto pop = ramped_half_and_half(200, 1, 6, 3, rng);
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    for (int i = 0; i < 100000; ++i) {
        const std::size_t a = pick(rng), b = pick(rng);
        auto [o1, o2] = subtree_crossover(pop[a], pop[b], rng);
        o1 = one_point_mutation(o1, 3, rng);
        REQUIRE(o1.size() <= kMaxTreeSize);
        REQUIRE(o2.size() <= kMaxTreeSize);
        // re-validate through the constructor
        REQUIRE_NOTHROW(Tree(std::vector<Node>(o1.nodes().begin(), o1.nodes().end())));
        pop[a] = std::move(o1);
        pop[b] = std::move(o2);
    }
}
