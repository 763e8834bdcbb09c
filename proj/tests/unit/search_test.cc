#include "doctest.h"

#include "oracles.h"

#include "rsl/search.h"

#include <unordered_set>

using namespace rsl;

namespace {
SearchBudget expansions(std::uint64_t n) {
    SearchBudget b;
    b.max_expansions = n;
    return b;
}

// Shortest distance as a heuristic; infinity on dead ends.
HeuristicFn perfect(const GroundTask &task) {
    return [&task](const State &s) {
        std::optional<int> d = exact_distance(task, s);
        return d ? static_cast<double>(*d) : infinite_cost;
    };
}

GroundTask two_step_chain() {
    return GroundTask::build({"p", "q", "r"}, {{"pq", {0}, {1}, {0}}, {"qr", {1}, {2}, {1}}},
                             {0}, {2});
}
}

TEST_CASE("budget validation") {
    CHECK_THROWS(SearchBudget{}.validate());
    CHECK_NOTHROW(expansions(0).validate());
    SearchBudget t;
    t.time_limit_sec = 1.0;
    CHECK_NOTHROW(t.validate());
}

TEST_CASE("gbfs") {
    GroundTask chain = two_step_chain();
    SUBCASE("goal start") {
        SearchResult r = gbfs(chain, chain.make_state({2}), perfect(chain), expansions(10));
        CHECK(r.solved());
        CHECK(r.plan->empty());
        CHECK(r.expansions == 0);
    }
    SUBCASE("chain with the exact-distance heuristic") {
        SearchResult r = gbfs(chain, chain.initial_state(), perfect(chain), expansions(10));
        CHECK(r.solved());
        CHECK(r.plan_length() == 2);
        CHECK(r.expansions <= 2);
        CHECK(validate_plan(chain, chain.initial_state(), *r.plan));
    }
    SUBCASE("unsolvable task") {
        GroundTask t = GroundTask::build({"p", "q", "g"}, {{"pq", {0}, {1}, {}}, {"zg", {2}, {2}, {}}},
                                         {0}, {2});
        SearchResult r = gbfs(t, t.initial_state(), [](const State &) {return 1.0;},
                              expansions(100));
        CHECK(r.status == SearchStatus::Exhausted);
        CHECK_FALSE(r.plan);
    }
    SUBCASE("zero expansion budget") {
        SearchResult r = gbfs(chain, chain.initial_state(), perfect(chain), expansions(0));
        CHECK(r.status == SearchStatus::BudgetExceeded);
        CHECK(r.expansions == 0);
        CHECK(r.evaluations == 1);
    }
    SUBCASE("record cap") {
        SearchBudget b;
        b.max_records = 1;
        SearchResult r = gbfs(chain, chain.initial_state(), perfect(chain), b);
        CHECK(r.status == SearchStatus::BudgetExceeded);
    }
    SUBCASE("width mismatch") {
        CHECK_THROWS(gbfs(chain, State{AtomSet(5)}, perfect(chain), expansions(1)));
    }
}

TEST_CASE("ties go to the earlier generated node") {
    // Both first-level successors look equally good; FIFO expands "left"
    // first, and its successor reaches the goal.
    GroundTask t = GroundTask::build({"s", "l", "r", "g"},
                                     {{"left", {0}, {1}, {0}},
                                      {"right", {0}, {2}, {0}},
                                      {"lg", {1}, {3}, {1}},
                                      {"rg", {2}, {3}, {2}}},
                                     {0}, {3});
    SearchResult r = gbfs(t, t.initial_state(), [](const State &) {return 1.0;}, expansions(10));
    REQUIRE(r.solved());
    CHECK(t.action((*r.plan)[0]).name == "left");
    CHECK(r.expansions == 2);
}

TEST_CASE("perfect heuristic yields optimal plans on fixtures") {
    for (const char *name : {"blocksworld-3", "blocksworld-4", "gripper-2", "chain"}) {
        TaskBundle b = testing::load_fixture(name);
        Rng rng(1);
        for (const State &s : random_walk_states(b.task, 10, 30, rng)) {
            std::optional<int> d = exact_distance(b.task, s);
            REQUIRE(d);
            SearchResult r = gbfs(b.task, s, perfect(b.task), expansions(100000));
            REQUIRE(r.solved());
            CHECK(static_cast<int>(r.plan_length()) == *d);
        }
    }
}

TEST_CASE("larger budgets never lose a solution") {
    TaskBundle bw4 = testing::load_fixture("blocksworld-4");
    HeuristicFn h = [&](const State &s) {return goal_count_h(s, bw4.task);};
    Rng rng(5);
    for (const State &s : random_walk_states(bw4.task, 10, 200, rng)) {
        bool solved_before = false;
        for (std::uint64_t limit : {1, 5, 20, 100, 1000, 100000}) {
            SearchResult r = gbfs(bw4.task, s, h, expansions(limit));
            if (solved_before)
                CHECK(r.solved());
            solved_before = r.solved();
            if (r.solved())
                CHECK(validate_plan(bw4.task, s, *r.plan));
        }
        CHECK(solved_before);
    }
}

TEST_CASE("goal count") {
    GroundTask t = GroundTask::build({"a", "b", "c", "d"}, {{"x", {3}, {0}, {}}}, {3}, {0, 1, 2});
    CHECK(goal_count_h(t.make_state({0, 1, 2}), t) == 0.0);
    CHECK(goal_count_h(t.make_state({}), t) == 3.0);
    CHECK(goal_count_h(t.make_state({0}), t) < goal_count_h(t.make_state({}), t));
}

TEST_CASE("h_add") {
    GroundTask chain = two_step_chain();
    ReachableActions all = compute_reachable_actions(chain);
    CHECK(h_add(chain.make_state({2}), chain, all) == 0.0);
    CHECK(h_add(chain.make_state({0}), chain, all) == 2.0);
    GroundTask stuck = GroundTask::build({"p", "g", "z"}, {{"zg", {2}, {1}, {}}}, {0}, {1});
    CHECK(h_add(stuck.initial_state(), stuck, compute_reachable_actions(stuck)) == infinite_cost);

    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        TaskBundle b = testing::random_task(rng, 7, 9);
        AtomSet s(7);
        for (AtomId p = 0; p < 7; ++p)
            s.assign(p, rng.bernoulli(0.4));
        // Reachability is a property of I; count every action here.
        ReachableActions every{AtomSet(b.task.num_actions())};
        every.actions.fill();
        CHECK(h_add(State{s}, b.task, every) == testing::naive_h_add(State{s}, b.task, every));
    }
}

TEST_CASE("h_add never prunes a solvable state") {
    Rng rng(32);
    for (int i = 0; i < 200; ++i) {
        TaskBundle b = testing::random_task(rng, 7, 9);
        for (const State &s : testing::enumerate_states(b.task, b.task.initial_state()))
            if (h_add(s, b.task, b.reachable) == infinite_cost)
                CHECK_FALSE(exact_distance(b.task, s));
    }
}

TEST_CASE("exact distance") {
    TaskBundle bw3 = testing::load_fixture("blocksworld-3");
    CHECK(exact_distance(bw3.task, State{bw3.task.goal()}) == 0);
    // tests/oracles/fixture_oracle.py: four actions (pick-up, stack twice)
    // under the four-operator encoding.
    CHECK(exact_distance(bw3.task, bw3.task.initial_state()) == 4);
    TaskBundle bw4 = testing::load_fixture("blocksworld-4");
    CHECK(exact_distance(bw4.task, bw4.task.initial_state()) == 10);
    GroundTask stuck = GroundTask::build({"p", "g", "z"}, {{"zg", {2}, {1}, {}}}, {0}, {1});
    CHECK_FALSE(exact_distance(stuck, stuck.initial_state()));
    CHECK_THROWS_AS(exact_distance(bw4.task, bw4.task.initial_state(), 5), StateSpaceCapExceeded);
}

TEST_CASE("random walks") {
    TaskBundle bw4 = testing::load_fixture("blocksworld-4");
    Rng rng(3);
    for (const State &s : random_walk_states(bw4.task, 5, 0, rng))
        CHECK(s == bw4.task.initial_state());
    std::vector<RandomWalk> walks = random_walks(bw4.task, 50, 200, rng);
    CHECK(walks.size() == 50);
    for (const RandomWalk &w : walks) {
        CHECK(w.actions.size() == 200);
        State s = bw4.task.initial_state();
        for (ActionId a : w.actions)
            s = apply_action(s, bw4.task.action(a));
        CHECK(s == w.end);
    }
    // A dead end after one step keeps the walk in place.
    GroundTask dead = GroundTask::build({"p", "q"}, {{"pq", {0}, {1}, {0}}}, {0}, {1});
    Rng r2(1);
    std::vector<RandomWalk> stuck = random_walks(dead, 3, 10, r2);
    for (const RandomWalk &w : stuck) {
        CHECK(w.actions.size() == 1);
        CHECK(w.end == dead.make_state({1}));
    }
    Rng a(9), b(9);
    CHECK(random_walk_states(bw4.task, 10, 50, a) == random_walk_states(bw4.task, 10, 50, b));
    CHECK_THROWS(random_walks(bw4.task, 1, -1, rng));
}

TEST_CASE("validate_plan and coverage") {
    GroundTask chain = two_step_chain();
    CHECK(validate_plan(chain, chain.make_state({2}), {}));
    std::vector<ActionId> bad{1};
    CHECK_FALSE(validate_plan(chain, chain.initial_state(), bad));
    std::vector<ActionId> good{0, 1};
    CHECK(validate_plan(chain, chain.initial_state(), good));

    auto results = [](int solved, int total) {
        std::vector<SearchResult> r(static_cast<std::size_t>(total));
        for (int i = 0; i < solved; ++i)
            r[static_cast<std::size_t>(i)].status = SearchStatus::Solved;
        return r;
    };
    CHECK(coverage(results(10, 10)) == 100.0);
    CHECK(coverage(results(0, 5)) == 0.0);
    CHECK(coverage(results(7, 10)) == 70.0);
    CHECK_THROWS(coverage(std::vector<SearchResult>{}));
    CHECK(to_string(SearchStatus::BudgetExceeded) == "budget-exceeded");
}
