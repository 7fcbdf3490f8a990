#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "nlcm/tree.hpp"

using namespace nlcm;

namespace {

// root 1 with children 2, 3, 4; 2 -> {5, 6}; 3 -> {7, 8}
const char* kEightNode =
    "id,parent,weight,level\n"
    "1,,1,1\n"
    "2,1,1,2\n"
    "3,1,1,2\n"
    "4,1,1,2\n"
    "5,2,1,2\n"
    "6,2,1,2\n"
    "7,3,1,2\n"
    "8,3,1,2\n";

std::vector<std::string> ids(const RootedWeightedTree& t, const std::vector<std::size_t>& nodes) {
    std::vector<std::string> out;
    for (auto u : nodes) out.push_back(t.id(u));
    return out;
}

TreeErrorKind parse_error_kind(const std::string& doc, std::vector<std::string> order = {}) {
    try {
        parse_tree(doc, std::move(order));
    } catch (const TreeParseError& e) {
        return e.kind();
    }
    FAIL("document parsed without error");
    return TreeErrorKind::Syntax;
}

}  // namespace

TEST_CASE("ancestors walk parent links root first") {
    const auto t = parse_tree(kEightNode);
    CHECK(ids(t, t.ancestors(t.index("2"))) == std::vector<std::string>{"1", "2"});
    CHECK(ids(t, t.ancestors(t.index("5"))) == std::vector<std::string>{"1", "2", "5"});
    CHECK(ids(t, t.ancestors(t.root())) == std::vector<std::string>{"1"});
    CHECK_THROWS_AS(t.index("nope"), LookupError);
    CHECK_THROWS_AS(t.ancestors(99), LookupError);
}

TEST_CASE("descendants include the node itself") {
    const auto t = parse_tree(kEightNode);
    auto d = ids(t, t.descendants(t.index("2")));
    std::sort(d.begin(), d.end());
    CHECK(d == std::vector<std::string>{"2", "5", "6"});
    CHECK(ids(t, t.descendants(t.index("7"))) == std::vector<std::string>{"7"});
    CHECK(t.descendants(t.root()).size() == t.size());
}

TEST_CASE("path distance") {
    const auto t = parse_tree(kEightNode);
    const auto u5 = t.index("5"), u7 = t.index("7"), u6 = t.index("6");
    CHECK(t.path_distance(u5, u5) == 0.0);
    CHECK(t.path_distance(u5, u7) == 4.0);
    CHECK(t.path_distance(u5, u6) == 2.0);
    CHECK(t.path_distance(u7, u5) == t.path_distance(u5, u7));
    CHECK(t.lowest_common_ancestor(u5, u6) == t.index("2"));
    CHECK(t.lowest_common_ancestor(u5, u7) == t.root());

    std::vector<double> w(t.size(), 0.0);
    w[u5] = 0.5;
    w[t.index("2")] = 1.0;
    w[t.index("3")] = 0.25;
    w[u7] = 0.0;
    CHECK(t.path_distance(u5, u7, w) == 1.75);
    CHECK_THROWS(t.path_distance(u5, u7, std::vector<double>(3, 1.0)));

    const auto sib = parse_tree("id,parent,weight,level\nr,,1,1\na,r,1,2\nb,r,1,2\n");
    CHECK(sib.size() == 3);
    CHECK(sib.num_leaves() == 2);
    CHECK(sib.path_distance(sib.index("a"), sib.index("b")) == 2.0);
}

TEST_CASE("weighted path distance uses edge weights") {
    const auto t = parse_tree("id,parent,weight,level\nr,,1,1\nm,r,0.5,2\na,m,2,2\nb,r,3,2\n");
    CHECK(t.path_distance(t.index("a"), t.index("b")) == 5.5);
}

TEST_CASE("indices put parents before children") {
    const auto t = parse_tree(
        "id,parent,weight,level\n5,2,1,2\n1,,1,1\n2,1,1,2\n3,1,1,2\n6,2,1,2\n");
    for (std::size_t u = 1; u < t.size(); ++u) CHECK(*t.parent(u) < u);
    CHECK(t.id(0) == "1");
    CHECK(t.num_leaves() == 3);
}

TEST_CASE("leaf order ranks leaves") {
    const auto t = parse_tree(std::string(kEightNode) + "# leaves: 8,7,6,5,4\n");
    CHECK(t.id(t.leaf(0)) == "8");
    CHECK(t.id(t.leaf(4)) == "4");
    CHECK(*t.leaf_rank(t.index("6")) == 2);
    CHECK_FALSE(t.leaf_rank(t.index("2")).has_value());
    const auto below = t.leaf_ranks_below(t.index("3"));
    CHECK(below == std::vector<std::size_t>{0, 1});
}

TEST_CASE("parse errors are distinct") {
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,a,1,2\n") == TreeErrorKind::Cycle);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,b,1,2\nb,a,1,2\n") == TreeErrorKind::Cycle);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,r,1,2\na,r,1,2\n") == TreeErrorKind::DuplicateNode);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,zz,1,2\n") == TreeErrorKind::UnknownParent);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,r,0,2\n") == TreeErrorKind::NonPositiveWeight);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,r,-1,2\n") == TreeErrorKind::NonPositiveWeight);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\ns,,1,1\n") == TreeErrorKind::MultipleRoots);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,r,1,4\n") == TreeErrorKind::BadLevel);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,r,1,0\n") == TreeErrorKind::BadLevel);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,r,1,2\nb,r,1,2\n", {"a", "r"}) ==
          TreeErrorKind::LeafOrderMismatch);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,r,1,2\nb,r,1,2\n", {"a"}) ==
          TreeErrorKind::LeafOrderMismatch);
    CHECK(parse_error_kind("id,parent,weight,level\nr,,1,1\na,r,abc,2\n") == TreeErrorKind::Syntax);
}

TEST_CASE("serialize round trip") {
    const auto t = parse_tree(std::string(kEightNode) + "# leaves: 4,5,6,7,8\n");
    const auto again = parse_tree(serialize_tree(t));
    CHECK(again == t);
    CHECK(t.num_levels() == 2);
    CHECK(t.nodes_by_level()[0] == std::vector<std::size_t>{0});
    CHECK(t.nodes_by_level()[1].size() == 7);
}

TEST_CASE("defaults for weight and level") {
    const auto t = parse_tree("id,parent,weight,level\nr,,,\na,r,,\nb,r,,\n");
    CHECK(t.level(t.root()) == 1);
    CHECK(t.level(t.index("a")) == 2);
    CHECK(t.weight(t.index("b")) == 1.0);
}

TEST_CASE("multi-level trees") {
    const auto t = parse_tree("id,parent,weight,level\nr,,1,1\nm,r,1,2\na,m,1,3\nb,m,1,3\nc,r,1,2\n");
    CHECK(t.num_levels() == 3);
    CHECK(t.is_ancestor(t.index("m"), t.index("a")));
    CHECK_FALSE(t.is_ancestor(t.index("c"), t.index("a")));
}
