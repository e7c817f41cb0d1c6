#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rolegate/hierarchy/nested_set.hpp"
#include "support/tree_oracle.hpp"

using namespace rolegate;
using namespace rolegate::hierarchy;

namespace {

PermissionSet perms(std::initializer_list<Permission> ps) { return PermissionSet(ps); }

bool matches(const Error& e, Errc code) { return e.code() == code; }

std::vector<std::uint64_t> ids_of(const std::vector<const RoleNode*>& nodes) {
    std::vector<std::uint64_t> out;
    for (const RoleNode* n : nodes) out.push_back(n->role_id);
    return out;
}

} // namespace

TEST_CASE("root insert into an empty tree", "[hierarchy]") {
    RoleTree t("acme");
    const RoleNode& admin = t.insert(std::nullopt, "admin", {});
    CHECK(admin.lft == 1);
    CHECK(admin.rgt == 2);
    CHECK(admin.tenant_id == "acme");
    CHECK(admin.sensitive_allowed); // the admin role needs no extra grant
    CHECK_NOTHROW(t.validate());
}

TEST_CASE("chain insert produces the textbook bounds", "[hierarchy]") {
    RoleTree t("acme");
    auto admin = t.insert(std::nullopt, "admin", {}).role_id;
    auto manager = t.insert(admin, "manager", {}).role_id;
    auto clerk = t.insert(manager, "clerk", {}).role_id;

    CHECK(t.node(admin).lft == 1);
    CHECK(t.node(admin).rgt == 6);
    CHECK(t.node(manager).lft == 2);
    CHECK(t.node(manager).rgt == 5);
    CHECK(t.node(clerk).lft == 3);
    CHECK(t.node(clerk).rgt == 4);
    CHECK_NOTHROW(t.validate());
}

TEST_CASE("insert errors", "[hierarchy]") {
    RoleTree t("acme");
    try {
        t.insert(std::uint64_t{42}, "orphan", {});
        FAIL("insert under a parent in an empty tree");
    } catch (const Error& e) {
        CHECK(matches(e, Errc::parent_not_found));
    }

    auto admin = t.insert(std::nullopt, "admin", {}).role_id;
    try {
        t.insert(std::nullopt, "second_root", {});
        FAIL("second root accepted");
    } catch (const Error& e) {
        CHECK(matches(e, Errc::parent_not_found));
    }
    try {
        t.insert(admin, "admin", {});
        FAIL("duplicate name accepted");
    } catch (const Error& e) {
        CHECK(matches(e, Errc::duplicate_role_name));
    }
    try {
        t.insert(std::uint64_t{999}, "lost", {});
        FAIL("missing parent accepted");
    } catch (const Error& e) {
        CHECK(matches(e, Errc::parent_not_found));
    }
}

TEST_CASE("seniors, juniors, siblings", "[hierarchy]") {
    RoleTree t("acme");
    auto admin = t.insert(std::nullopt, "admin", {}).role_id;
    auto manager = t.insert(admin, "manager", {}).role_id;
    auto clerk = t.insert(manager, "clerk", {}).role_id;
    auto auditor = t.insert(admin, "auditor", {}).role_id;

    CHECK(ids_of(t.seniors(clerk)) == std::vector<std::uint64_t>{manager, admin});
    CHECK(t.seniors(admin).empty());
    CHECK(ids_of(t.juniors(admin)) == std::vector<std::uint64_t>{manager, clerk, auditor});
    CHECK(t.juniors(clerk).empty());
    CHECK(ids_of(t.siblings(manager)) == std::vector<std::uint64_t>{auditor});
    CHECK(ids_of(t.siblings(auditor)) == std::vector<std::uint64_t>{manager});
    CHECK(t.siblings(admin).empty());
    CHECK(t.siblings(clerk).empty());

    CHECK(t.is_senior(admin, clerk));
    CHECK(t.is_senior(manager, clerk));
    CHECK(!t.is_senior(clerk, manager));
    CHECK(!t.is_senior(manager, auditor));

    try {
        t.seniors(12345);
        FAIL("query for a missing role");
    } catch (const Error& e) {
        CHECK(matches(e, Errc::role_not_found));
    }
}

TEST_CASE("immediate senior", "[hierarchy]") {
    RoleTree t("acme");
    auto admin = t.insert(std::nullopt, "admin", {}).role_id;
    auto manager = t.insert(admin, "manager", {}).role_id;
    auto clerk = t.insert(manager, "clerk", {}).role_id;

    REQUIRE(t.immediate_senior(clerk) != nullptr);
    CHECK(t.immediate_senior(clerk)->role_id == manager);
    CHECK(t.immediate_senior(admin) == nullptr);

    // Deleting the middle role promotes clerk to admin.
    t.erase(manager);
    REQUIRE(t.immediate_senior(clerk) != nullptr);
    CHECK(t.immediate_senior(clerk)->role_id == admin);
    CHECK(t.node(admin).lft == 1);
    CHECK(t.node(admin).rgt == 4);
    CHECK(t.node(clerk).lft == 2);
    CHECK(t.node(clerk).rgt == 3);
    CHECK_NOTHROW(t.validate());
}

TEST_CASE("delete constraints", "[hierarchy]") {
    RoleTree t("acme");
    auto admin = t.insert(std::nullopt, "admin", {}).role_id;
    auto manager = t.insert(admin, "manager", {}).role_id;

    try {
        t.erase(admin);
        FAIL("deleted root with children");
    } catch (const Error& e) {
        CHECK(matches(e, Errc::cannot_delete_root));
    }

    t.erase(manager);
    t.erase(admin); // now a leaf
    CHECK(t.empty());

    try {
        t.erase(admin);
        FAIL("deleted a missing role");
    } catch (const Error& e) {
        CHECK(matches(e, Errc::role_not_found));
    }
}

TEST_CASE("effective permissions union the junior subtree", "[hierarchy]") {
    RoleTree t("acme");
    Permission clerk_p{Action::select, "employees", {"name", "dept"}, false};
    Permission auditor_p{Action::select, "employees", {"dept", "phone"}, false};
    Permission mgr_p{Action::update, "employees", {"dept"}, false};

    auto admin = t.insert(std::nullopt, "admin", {}).role_id;
    auto manager = t.insert(admin, "manager", perms({mgr_p})).role_id;
    auto clerk = t.insert(manager, "clerk", perms({clerk_p})).role_id;
    auto auditor = t.insert(manager, "auditor", perms({auditor_p})).role_id;

    // Leaf roles confer only their own permissions.
    CHECK(t.effective_permissions(clerk) == perms({clerk_p}));
    CHECK(t.effective_permissions(auditor) == perms({auditor_p}));

    // Manager inherits both leaves; overlapping columns collapse.
    PermissionSet m = t.effective_permissions(manager);
    PermissionSet expect = perms({
        Permission{Action::select, "employees", {"name", "dept", "phone"}, false},
        mgr_p,
    });
    CHECK(m == expect);

    // The admin root confers everything beneath it.
    CHECK(t.effective_permissions(admin) == expect);
}

TEST_CASE("randomized edit sequences agree with the adjacency oracle", "[hierarchy][property]") {
    std::mt19937_64 rng(20240817);

    for (int round = 0; round < 150; ++round) {
        CAPTURE(round);
        RoleTree tree("t");
        oracle::Tree ref;
        int name_counter = 0;

        int steps = 5 + static_cast<int>(rng() % 60);
        for (int step = 0; step < steps; ++step) {
            CAPTURE(step);
            auto ids = ref.ids();
            bool do_insert;
            if (ref.empty()) do_insert = true;
            else if (ref.size() >= 50) do_insert = false;
            else do_insert = (rng() % 10) < 7;

            if (do_insert) {
                std::string name = "r" + std::to_string(name_counter++);
                if (ref.empty()) {
                    auto id = tree.insert(std::nullopt, name, {}).role_id;
                    ref.insert(id, std::nullopt, name);
                } else {
                    std::uint64_t parent = ids[rng() % ids.size()];
                    auto id = tree.insert(parent, name, {}).role_id;
                    ref.insert(id, parent, name);
                }
            } else {
                // Pick a deletable node: non-root, or the root when it is a leaf.
                std::vector<std::uint64_t> candidates;
                for (std::uint64_t id : ids) {
                    if (ref.parent(id) || ref.size() == 1) candidates.push_back(id);
                }
                if (candidates.empty()) continue;
                std::uint64_t victim = candidates[rng() % candidates.size()];
                tree.erase(victim);
                ref.erase(victim);
            }

            REQUIRE_NOTHROW(tree.validate());
            REQUIRE(tree.size() == ref.size());

            auto expect_coords = ref.coords();
            for (std::uint64_t id : ref.ids()) {
                CAPTURE(id);
                const RoleNode& n = tree.node(id);
                REQUIRE(n.lft == expect_coords.at(id).first);
                REQUIRE(n.rgt == expect_coords.at(id).second);
                REQUIRE(ids_of(tree.seniors(id)) == ref.seniors(id));
                REQUIRE(ids_of(tree.juniors(id)) == ref.juniors(id));
                REQUIRE(ids_of(tree.siblings(id)) == ref.siblings(id));
                const RoleNode* imm = tree.immediate_senior(id);
                auto expect_parent = ref.parent(id);
                if (expect_parent) {
                    REQUIRE(imm != nullptr);
                    REQUIRE(imm->role_id == *expect_parent);
                } else {
                    REQUIRE(imm == nullptr);
                }
            }
        }
    }
}

TEST_CASE("restore rebuilds a persisted tree", "[hierarchy]") {
    RoleTree t("acme");
    auto admin = t.insert(std::nullopt, "admin", {}).role_id;
    auto manager = t.insert(admin, "manager", {}).role_id;
    t.insert(manager, "clerk", {});

    RoleTree copy("acme");
    for (const RoleNode* n : t.all()) copy.restore(*n);
    CHECK_NOTHROW(copy.validate());
    CHECK(copy.size() == 3);
    CHECK(copy.named("clerk").lft == t.named("clerk").lft);

    // Restored trees keep allocating fresh ids.
    auto next = copy.insert(copy.named("manager").role_id, "intern", {}).role_id;
    CHECK(next > copy.named("clerk").role_id);
}
