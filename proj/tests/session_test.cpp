#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <chrono>
#include <thread>
#include <vector>

#include "rolegate/catalog/fixture.hpp"
#include "rolegate/session/manager.hpp"

using namespace rolegate;
using namespace std::chrono_literals;

namespace {

std::optional<Errc> code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

struct Rig {
    crypto::Mt19937_64 rng{5150};
    catalog::Catalog cat;
    session::SessionManager mgr{cat, 99};
    std::chrono::steady_clock::time_point t0{std::chrono::steady_clock::time_point{} + 1000s};
    std::chrono::steady_clock::time_point now;

    Rig() : now(t0) {
        catalog::FixtureLoader fx(cat, rng);
        fx.run("tenant acme Acme 64\n"
               "user acme ann pw-ann\n");
        mgr.set_clock([this] { return now; });
    }
};

} // namespace

TEST_CASE("authentication issues fresh single-use keys", "[session]") {
    Rig rig;

    SECTION("valid credentials open an Issued session with a 32-byte key") {
        session::SessionState st = rig.mgr.authenticate("acme", "ann", "pw-ann");
        CHECK(st.phase == session::Phase::issued);
        CHECK(st.session_key.bytes.size() == 32);
        CHECK(st.session_key.issued_to == "ann");
        CHECK(st.session_key.transaction_id == st.session_id);
        CHECK(st.user_id == rig.cat.user("acme", "ann").user_id);
        CHECK(rig.mgr.session(st.session_id).phase == session::Phase::issued);
    }

    SECTION("two logins never share a key") {
        auto a = rig.mgr.authenticate("acme", "ann", "pw-ann");
        auto b = rig.mgr.authenticate("acme", "ann", "pw-ann");
        CHECK(a.session_id != b.session_id);
        CHECK(a.session_key.bytes != b.session_key.bytes);
    }

    SECTION("wrong password and unknown user fail identically") {
        std::string msg_pw, msg_user;
        try {
            rig.mgr.authenticate("acme", "ann", "wrong");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::auth_failure);
            msg_pw = e.what();
        }
        try {
            rig.mgr.authenticate("acme", "nobody", "pw-ann");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::auth_failure);
            msg_user = e.what();
        }
        CHECK(msg_pw == msg_user);
        CHECK(rig.mgr.live_count() == 0);
    }

    SECTION("unknown tenants are reported as such") {
        CHECK(code_of([&] { rig.mgr.authenticate("ghost", "ann", "pw-ann"); }) ==
              Errc::tenant_unknown);
    }
}

TEST_CASE("the session phase machine enforces one transaction per key", "[session]") {
    Rig rig;
    auto st = rig.mgr.authenticate("acme", "ann", "pw-ann");

    SECTION("Issued -> InQuery -> Completed is the only happy path") {
        rig.mgr.begin_transaction(st.session_id);
        CHECK(rig.mgr.session(st.session_id).phase == session::Phase::in_query);
        rig.mgr.complete(st.session_id);
        CHECK(rig.mgr.session(st.session_id).phase == session::Phase::completed);
    }

    SECTION("a second begin on the same session is a replay") {
        rig.mgr.begin_transaction(st.session_id);
        CHECK(code_of([&] { rig.mgr.begin_transaction(st.session_id); }) ==
              Errc::invalid_phase);
        rig.mgr.complete(st.session_id);
        CHECK(code_of([&] { rig.mgr.begin_transaction(st.session_id); }) ==
              Errc::invalid_phase);
    }

    SECTION("complete requires an open transaction") {
        CHECK(code_of([&] { rig.mgr.complete(st.session_id); }) == Errc::invalid_phase);
    }

    SECTION("unknown sessions are not found") {
        CHECK(code_of([&] { rig.mgr.begin_transaction("s999"); }) ==
              Errc::session_not_found);
        CHECK(code_of([&] { (void)rig.mgr.session("s999"); }) ==
              Errc::session_not_found);
    }
}

TEST_CASE("sessions age out after their ttl", "[session]") {
    Rig rig;
    rig.mgr.set_ttl(60s);
    auto old_session = rig.mgr.authenticate("acme", "ann", "pw-ann");
    rig.now += 59s;
    auto young = rig.mgr.authenticate("acme", "ann", "pw-ann");
    rig.now += 1s; // old: 60s (at ttl), young: 1s

    SECTION("the sweep expires exactly the over-age sessions") {
        CHECK(rig.mgr.expire_sweep(rig.now) == 1);
        CHECK(rig.mgr.session(old_session.session_id).phase == session::Phase::expired);
        CHECK(rig.mgr.session(young.session_id).phase == session::Phase::issued);
        CHECK(rig.mgr.expire_sweep(rig.now) == 0); // idempotent
    }

    SECTION("an expired key cannot start a transaction, swept or not") {
        CHECK(code_of([&] { rig.mgr.begin_transaction(old_session.session_id); }) ==
              Errc::invalid_phase);
        CHECK(rig.mgr.session(old_session.session_id).phase == session::Phase::expired);
        rig.mgr.begin_transaction(young.session_id);
    }

    SECTION("a transaction left open past the ttl is swept too") {
        rig.mgr.begin_transaction(young.session_id);
        rig.now += 120s;
        CHECK(rig.mgr.expire_sweep(rig.now) == 2);
        CHECK(code_of([&] { rig.mgr.complete(young.session_id); }) ==
              Errc::invalid_phase);
    }
}

TEST_CASE("concurrent begin attempts elect exactly one winner", "[session]") {
    Rig rig;
    for (int round = 0; round < 20; ++round) {
        auto st = rig.mgr.authenticate("acme", "ann", "pw-ann");
        std::atomic<int> wins{0}, losses{0};
        std::vector<std::thread> tt;
        tt.reserve(8);
        for (int i = 0; i < 8; ++i) {
            tt.emplace_back([&] {
                try {
                    rig.mgr.begin_transaction(st.session_id);
                    wins++;
                } catch (const Error& e) {
                    if (e.code() == Errc::invalid_phase) losses++;
                }
            });
        }
        for (auto& t : tt) t.join();
        CHECK(wins == 1);
        CHECK(losses == 7);
    }
}
