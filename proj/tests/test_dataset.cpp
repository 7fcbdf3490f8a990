#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlcm/dataset.hpp"

using namespace nlcm;

namespace {

RootedWeightedTree domains() {
    return parse_tree("id,parent,weight,level\nr,,1,1\nt,r,1,2\ns1,r,1,2\ns2,r,1,2\n");
}
RootedWeightedTree causes() { return parse_tree("id,parent,weight,level\nr,,1,1\nc1,r,1,2\nc2,r,1,2\nc3,r,1,2\n"); }

}  // namespace

TEST_CASE("fully observed rows") {
    const auto d = load_dataset("id,domain,cause,q1,q2\na,s1,c1,1,0\nb,s2,c2,0,0\n", domains(), causes());
    CHECK(d.num_subjects == 2);
    CHECK(d.num_items == 2);
    CHECK(d.num_domains == 3);
    CHECK(d.num_causes == 3);
    CHECK(d.items_of[0] == std::vector<std::size_t>{0, 1});
    CHECK(d.items_of[1] == std::vector<std::size_t>{0, 1});
    CHECK(d.domain[0] == 1);
    CHECK(*d.cause[1] == 1);
    CHECK(d.value(0, 0) == 1);
    CHECK(d.signed_value(0, 1) == -1.0);
    CHECK(d.num_observed_entries() == 4);
}

TEST_CASE("all-missing subject is kept with an empty item set") {
    const auto d = load_dataset("id,domain,cause,q1,q2\na,t,,NA,NA\nb,s1,c3,1,NA\n", domains(), causes());
    CHECK(d.num_subjects == 2);
    CHECK(d.items_of[0].empty());
    CHECK(d.items_of[1] == std::vector<std::size_t>{0});
    CHECK(d.subjects_of[0] == std::vector<std::size_t>{1});
    CHECK(d.subjects_of[1].empty());
    CHECK(d.cause_missing(0));
    CHECK(d.domain_members[0] == std::vector<std::size_t>{0});
    CHECK(d.domain_members[1] == std::vector<std::size_t>{1});
    CHECK(d.domain_members[2].empty());
}

TEST_CASE("scenario detection") {
    const auto tag = [](const char* doc) { return detect_scenario(load_dataset(doc, domains(), causes())).tag; };
    CHECK(tag("id,domain,cause,q1\na,t,c1,1\nb,s1,c2,0\n") == ScenarioTag::III);
    CHECK(tag("id,domain,cause,q1\na,t,,1\nb,t,,0\nc,s1,c2,0\n") == ScenarioTag::I1);
    CHECK(tag("id,domain,cause,q1\na,t,c1,1\nb,t,,0\nc,s1,c2,0\n") == ScenarioTag::I2);
    CHECK(tag("id,domain,cause,q1\na,t,,1\nb,s1,,0\nc,s2,c2,0\n") == ScenarioTag::II);
    const auto s = detect_scenario(load_dataset("id,domain,cause,q1\na,s1,,1\nb,s2,,0\n", domains(), causes()));
    CHECK(s.domains_with_missing == std::set<std::size_t>{1, 2});
    CHECK(std::string(to_string(ScenarioTag::I1)) == "i-1");
}

TEST_CASE("target rows with a cause are used as observed") {
    const auto d = load_dataset("id,domain,cause,q1\na,t,c2,1\nb,t,,0\n", domains(), causes());
    CHECK(*d.cause[0] == 1);
    CHECK(d.cause_missing(1));
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(load_dataset("", domains(), causes()), DatasetError);
    CHECK_THROWS_AS(load_dataset("id,domain,cause,q1\na,zz,c1,1\n", domains(), causes()), DatasetError);
    CHECK_THROWS_AS(load_dataset("id,domain,cause,q1\na,t,c9,1\n", domains(), causes()), DatasetError);
    CHECK_THROWS_AS(load_dataset("id,domain,cause,q1\na,t,c1,2\n", domains(), causes()), DatasetError);
    CHECK_THROWS_AS(load_dataset("id,domain,cause,q1\na,t,c1,1,1\n", domains(), causes()), DatasetError);
    CHECK_THROWS_AS(load_dataset("id,domain,cause,q1\na,t,c1,1\na,t,c1,0\n", domains(), causes()), DatasetError);
    // internal nodes are not domains
    CHECK_THROWS_AS(load_dataset("id,domain,cause,q1\na,r,c1,1\n", domains(), causes()), DatasetError);
}

TEST_CASE("serialize round trip keeps missing markers") {
    const std::string doc = "id,domain,cause,q1,q2\na,t,,NA,1\nb,s1,c3,1,0\n";
    const auto d = load_dataset(doc, domains(), causes());
    const auto again = load_dataset(serialize_dataset(d), domains(), causes());
    CHECK(again.observed == d.observed);
    CHECK(again.domain == d.domain);
    CHECK(again.cause == d.cause);
    CHECK(again.subject_ids == d.subject_ids);
    for (std::size_t i = 0; i < d.num_subjects; ++i)
        for (std::size_t j = 0; j < d.num_items; ++j)
            if (d.is_observed(i, j)) CHECK(again.value(i, j) == d.value(i, j));
}

TEST_CASE("make_dataset from columns") {
    const auto dt = domains();
    const auto ct = causes();
    const auto d = make_dataset({"x", "y"}, {0, 2}, {std::nullopt, 1}, {1, -1, 0, 1}, 2, dt, ct);
    CHECK(d.items_of[0] == std::vector<std::size_t>{0});
    CHECK(d.subjects_of[1] == std::vector<std::size_t>{1});
    CHECK(d.domain_labels[0] == "t");
    CHECK(d.cause_labels[2] == "c3");
    CHECK_THROWS_AS(make_dataset({"x"}, {0, 1}, {std::nullopt}, {1, 1}, 2, dt, ct), DatasetError);
    CHECK_THROWS_AS(make_dataset({"x"}, {5}, {std::nullopt}, {1, 1}, 2, dt, ct), DatasetError);
}
