#include "doctest.h"

#include "oracles.h"

#include "rsl/strips.h"

#include <algorithm>

using namespace rsl;

namespace {
// p = 0, q = 1, r = 2, g = 3
GroundTask small_task(const std::vector<RawAction> &actions) {
    return GroundTask::build({"p", "q", "r", "g"}, actions, {0}, {3});
}
}

TEST_CASE("apply_action") {
    GroundTask t = small_task({{"a", {0}, {1}, {0}}, {"b", {0}, {0}, {}}, {"c", {1}, {2}, {}}});
    CHECK(apply_action(t.make_state({0}), t.action(0)) == t.make_state({1}));
    CHECK(apply_action(t.make_state({0, 1}), t.action(1)) == t.make_state({0, 1}));
    CHECK_THROWS_AS(apply_action(t.make_state({0}), t.action(2)), PreconditionViolated);
    State s = t.make_state({0});
    State copy = s;
    apply_action(s, t.action(0));
    CHECK(s == copy);
    CHECK(apply_action(s, t.action(0)).atoms.width() == 4);
}

TEST_CASE("applicable_actions") {
    GroundTask t = small_task({{"a1", {0}, {3}, {}}, {"a2", {1}, {3}, {}}});
    CHECK(applicable_actions(t.make_state({0}), t) == std::vector<ActionId>{0});
    CHECK(applicable_actions(t.make_state({}), t).empty());
}

TEST_CASE("applicable actions at the blocksworld-4 initial state") {
    TaskBundle bw4 = testing::load_fixture("blocksworld-4");
    std::vector<std::string> names;
    for (ActionId a : applicable_actions(bw4.task.initial_state(), bw4.task))
        names.push_back(bw4.task.action(a).name);
    // tests/oracles/fixture_oracle.py
    CHECK(names == std::vector<std::string>{"unstack(a,b)", "unstack(d,c)"});
}

TEST_CASE("applicable_actions is monotone") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        TaskBundle b = testing::random_task(rng, 8, 10);
        AtomSet s(8), bigger(8);
        for (AtomId p = 0; p < 8; ++p) {
            bool in = rng.bernoulli(0.4);
            s.assign(p, in);
            bigger.assign(p, in || rng.bernoulli(0.3));
        }
        auto small = applicable_actions(State{s}, b.task);
        auto large = applicable_actions(State{bigger}, b.task);
        CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
    }
}

TEST_CASE("is_goal") {
    GroundTask t = GroundTask::build({"p", "g1", "g2"}, {{"a", {0}, {1}, {}}}, {0}, {1, 2});
    CHECK(is_goal(t.make_state({1, 2}), t));
    CHECK(is_goal(t.make_state({0, 1, 2}), t));
    CHECK_FALSE(is_goal(t.make_state({1}), t));
}

TEST_CASE("regress") {
    // g = 3, p = 0, q = 1
    GroundTask t = small_task({{"a", {0}, {3}, {}}});
    CHECK(regress(t.make_preimage({3}), t.action(0)) == t.make_preimage({0}));
    CHECK(regress(t.make_preimage({1, 3}), t.action(0)) == t.make_preimage({0, 1}));
}

TEST_CASE("regressing the blocksworld-3 goal through stack(a,b)") {
    TaskBundle bw3 = testing::load_fixture("blocksworld-3");
    const GroundTask &t = bw3.task;
    PreImage x1 = regress(PreImage{t.goal()}, t.action(t.find_action("stack(a,b)")));
    std::vector<std::string> names;
    for (AtomId p : x1.assigned.ids())
        names.push_back(t.atom_name(p));
    std::sort(names.begin(), names.end());
    CHECK(names == std::vector<std::string>{"clear(b)", "holding(a)", "on(b,c)"});
}

TEST_CASE("build validates and normalizes") {
    GroundTask::BuildReport report;
    GroundTask t = GroundTask::build({"p", "q"},
                                     {{"noadd", {0}, {}, {1}}, {"both", {0}, {1}, {0, 1}}},
                                     {0}, {1}, &report);
    CHECK(t.num_actions() == 1);
    CHECK(report.dropped_actions == std::vector<std::string>{"noadd"});
    CHECK(t.action(0).del == t.make_state({0}).atoms);
    CHECK_THROWS_AS(GroundTask::build({"p"}, {}, {0}, {}), TaskError);
    CHECK_THROWS_AS(GroundTask::build({"p"}, {}, {3}, {0}), TaskError);
    CHECK_THROWS_AS(GroundTask::build({"p"}, {{"a", {0}, {5}, {}}}, {0}, {0}), TaskError);
}

TEST_CASE("regression soundness on random tasks") {
    Rng rng(5);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        TaskBundle b = testing::random_task(rng, 7, 8);
        AtomSet x(7);
        for (AtomId p = 0; p < 7; ++p)
            x.assign(p, rng.bernoulli(0.3));
        PreImage pre{x};
        for (ActionId a : testing::naive_valid_actions(pre, b)) {
            PreImage before = regress(pre, b.task.action(a));
            AtomSet s = before.assigned;
            for (AtomId p = 0; p < 7; ++p)
                if (rng.bernoulli(0.5))
                    s.set(p);
            REQUIRE(b.task.action(a).pre.is_subset_of(s));
            CHECK(x.is_subset_of(apply_action(State{s}, b.task.action(a)).atoms));
            ++checked;
        }
    }
    CHECK(checked > 100);
}
