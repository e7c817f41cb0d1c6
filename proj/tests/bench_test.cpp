#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "rolegate/bench/harness.hpp"
#include "rolegate/catalog/fixture.hpp"
#include "rolegate/gateway/server.hpp"
#include "rolegate/rbac/engine.hpp"

using namespace rolegate;

namespace {

struct BenchRig {
    crypto::Mt19937_64 rng{31337};
    catalog::Catalog cat;
    rbac::AccessEngine eng{cat};
    session::SessionManager sessions{cat, 61};
    gateway::GatewayService svc{cat, eng, sessions, 62};
    gateway::Server server{cat, sessions, svc};

    BenchRig() {
        catalog::FixtureLoader fx(cat, rng);
        fx.run(catalog::s4_fixture(64, 12));
        server.start("127.0.0.1", 0);
    }
    ~BenchRig() { server.stop(); }

    bench::Options options(const std::string& mix, int queries) const {
        bench::Options opt;
        opt.port = server.port();
        opt.mix = mix;
        opt.queries = queries;
        opt.clients = 4;
        opt.rows = 12;
        return opt;
    }
};

} // namespace

TEST_CASE("query generation is deterministic under a fixed seed", "[bench]") {
    bench::Options opt;
    opt.rows = 12;
    for (const char* mix : {"nonsensitive", "sensitive", "mixed"}) {
        opt.mix = mix;
        for (int i = 0; i < 20; ++i) {
            CHECK(bench::query_text(opt, i) == bench::query_text(opt, i));
        }
    }
    opt.mix = "sensitive";
    std::string a = bench::query_text(opt, 3);
    opt.seed = 2;
    CHECK(bench::query_text(opt, 3) != a); // seed matters

    opt.mix = "galaxy";
    CHECK_THROWS_AS(bench::query_text(opt, 0), Error);
}

TEST_CASE("bench runs emit one CSV row per query plus a summary", "[bench][net]") {
    BenchRig rig;
    bench::Report report = bench::run(rig.options("nonsensitive", 40));

    CHECK(report.failures == 0);
    REQUIRE(report.samples.size() == 40);
    double sum = 0;
    for (int i = 0; i < 40; ++i) {
        const bench::Sample& s = report.samples[static_cast<std::size_t>(i)];
        CHECK(s.query_index == i);
        CHECK(s.ok);
        CHECK(s.mix == "nonsensitive");
        CHECK(s.access_us >= s.activate_us);
        sum += static_cast<double>(s.access_us);
    }
    CHECK(report.mean_access_us == Catch::Approx(sum / 40));

    std::ostringstream csv;
    bench::write_csv(csv, report);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "query_index,mix,access_us,activate_us,deactivate_us");
    int data = 0;
    std::string last;
    while (std::getline(lines, line)) {
        last = line;
        ++data;
    }
    CHECK(data == 41); // 40 samples + summary
    CHECK(last.starts_with("summary,nonsensitive,"));

    CHECK(rig.eng.quiescent());
    CHECK(rig.sessions.live_count() == 0);
}

TEST_CASE("sensitive and mixed runs succeed with key releases", "[bench][net]") {
    BenchRig rig;
    bench::Report sens = bench::run(rig.options("sensitive", 24));
    CHECK(sens.failures == 0);
    bench::Report mixed = bench::run(rig.options("mixed", 24));
    CHECK(mixed.failures == 0);
    CHECK(rig.eng.quiescent());
}

TEST_CASE("activation cost trends upward with the role-set size", "[bench][net]") {
    BenchRig rig;
    bench::Options base = rig.options("nonsensitive", 0);
    base.clients = 2;
    auto sweep = bench::role_sweep(base, 8, 150);

    REQUIRE(sweep.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(sweep[static_cast<std::size_t>(i)].first == i + 1);

    // Means drift with scheduler noise, so compare averaged extremes rather
    // than demanding strict point-to-point monotonicity.
    double low = (sweep[0].second + sweep[1].second) / 2.0;
    double high = (sweep[6].second + sweep[7].second) / 2.0;
    CHECK(high > low);
}
