#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "rolegate/errors.hpp"
#include "rolegate/gateway/client.hpp"

namespace rolegate::bench {

/// One benchmark run: N client connections replaying M deterministic queries
/// against a seeded gateway, timings harvested from the response trailer.
struct Options {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7433;
    std::string tenant = "s4";
    std::string user = "bench8";
    std::string password = "pw-bench8";
    int clients = 4;
    int queries = 100;
    std::string mix = "mixed"; // sensitive | nonsensitive | mixed
    std::uint64_t seed = 1;
    int rows = 40; // row count of the seeded fixture, bounds literal choice
};

struct Sample {
    int query_index = 0;
    std::string mix;
    std::int64_t access_us = 0;
    std::int64_t activate_us = 0;
    std::int64_t deactivate_us = 0;
    bool ok = false;
};

struct Report {
    std::vector<Sample> samples; // ordered by query_index
    int failures = 0;
    double mean_access_us = 0;
    double mean_activate_us = 0;
    double mean_deactivate_us = 0;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// The statement for (seed, index): stable regardless of which client thread
/// runs it, so runs are reproducible in ordering under a fixed seed.
inline std::string query_text(const Options& opt, int index) {
    std::uint64_t h = detail::mix64(opt.seed ^ (static_cast<std::uint64_t>(index) << 17));
    int k = 1 + static_cast<int>(h % static_cast<std::uint64_t>(opt.rows));
    const char* depts[] = {"eng", "ops", "hr", "fin"};
    const char* dept = depts[(h >> 8) % 4];
    long salary = 50000 + 137L * k;
    long bonus = 13L * k;

    if (opt.mix == "nonsensitive") {
        switch ((h >> 16) % 3) {
        case 0:
            return "SELECT name, dept FROM employees WHERE emp_id = " + std::to_string(k);
        case 1:
            return std::string("SELECT emp_id, phone FROM employees WHERE dept = '") +
                   dept + "'";
        default:
            return "SELECT name FROM employees WHERE emp_id > " + std::to_string(k);
        }
    }
    if (opt.mix == "sensitive") {
        // Sensitive literals force Paillier work on the gateway side.
        switch ((h >> 16) % 2) {
        case 0:
            return "SELECT emp_id, salary FROM employees WHERE salary = " +
                   std::to_string(salary);
        default:
            return "SELECT emp_id, bonus FROM employees WHERE bonus = " +
                   std::to_string(bonus);
        }
    }
    if (opt.mix == "mixed") {
        return std::string("SELECT name, salary FROM employees WHERE dept = '") + dept +
               "' AND salary = " + std::to_string(salary);
    }
    throw Error(Errc::invalid_argument, "unknown mix: " + opt.mix);
}

/// Drives the run. Each worker owns one connection and loops: KEYREQ, seal,
/// QUERY, collect trailer timings. Failed queries are counted, not retried.
inline Report run(const Options& opt) {
    if (opt.clients < 1 || opt.queries < 1) {
        throw Error(Errc::invalid_argument, "clients and queries must be positive");
    }
    Report report;
    report.samples.assign(static_cast<std::size_t>(opt.queries), Sample{});

    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(opt.clients));
    for (int w = 0; w < opt.clients; ++w) {
        workers.emplace_back([&, w] {
            try {
                gateway::Client client(opt.host, opt.port);
                client.login(opt.tenant, opt.user, opt.password);
                for (int i = w; i < opt.queries; i += opt.clients) {
                    Sample& s = report.samples[static_cast<std::size_t>(i)];
                    s.query_index = i;
                    s.mix = opt.mix;
                    try {
                        gateway::Client::SessionKey sk = client.key_request();
                        bool sensitive_mix = opt.mix != "nonsensitive";
                        gateway::QueryOutcome out = client.query(
                            sk, query_text(opt, i), std::nullopt,
                            sensitive_mix ? std::optional<std::string>("sensitive=1")
                                          : std::nullopt);
                        s.access_us = out.timings.access_us;
                        s.activate_us = out.timings.activate_us;
                        s.deactivate_us = out.timings.deactivate_us;
                        s.ok = out.status == gateway::Status::rows ||
                               out.status == gateway::Status::ack;
                    } catch (const Error&) {
                        s.ok = false;
                    }
                }
            } catch (const Error&) {
                // connection-level failure: the unreached samples stay !ok
            }
        });
    }
    for (auto& t : workers) t.join();

    double a = 0, act = 0, d = 0;
    int ok = 0;
    for (const Sample& s : report.samples) {
        if (!s.ok) {
            report.failures++;
            continue;
        }
        a += static_cast<double>(s.access_us);
        act += static_cast<double>(s.activate_us);
        d += static_cast<double>(s.deactivate_us);
        ok++;
    }
    if (ok > 0) {
        report.mean_access_us = a / ok;
        report.mean_activate_us = act / ok;
        report.mean_deactivate_us = d / ok;
    }
    return report;
}

/// CSV schema: query_index,mix,access_us,activate_us,deactivate_us with a
/// final `summary` row carrying the means.
inline void write_csv(std::ostream& out, const Report& report) {
    out << "query_index,mix,access_us,activate_us,deactivate_us\n";
    for (const Sample& s : report.samples) {
        if (!s.ok) continue;
        out << s.query_index << ',' << s.mix << ',' << s.access_us << ','
            << s.activate_us << ',' << s.deactivate_us << '\n';
    }
    const Sample* any = report.samples.empty() ? nullptr : &report.samples.front();
    out << "summary," << (any ? any->mix : "") << ',' << std::fixed
        << std::setprecision(1) << report.mean_access_us << ','
        << report.mean_activate_us << ',' << report.mean_deactivate_us << '\n';
}

/// Mean activation time as the user's role count grows 1..max_size, using
/// the seeded fixture's bench1..benchN users (benchN holds N roles).
inline std::vector<std::pair<int, double>> role_sweep(const Options& base, int max_size,
                                                      int queries_per_size) {
    {
        // Discarded warmup so one-time costs don't land on the first size.
        Options warm = base;
        warm.user = "bench1";
        warm.password = "pw-bench1";
        warm.mix = "nonsensitive";
        warm.queries = std::min(queries_per_size, 25);
        (void)run(warm);
    }
    std::vector<std::pair<int, double>> out;
    for (int size = 1; size <= max_size; ++size) {
        Options opt = base;
        opt.user = "bench" + std::to_string(size);
        opt.password = "pw-bench" + std::to_string(size);
        opt.mix = "nonsensitive";
        opt.queries = queries_per_size;
        Report r = run(opt);
        if (r.failures > 0) {
            throw Error(Errc::execution_error,
                        "sweep size " + std::to_string(size) + ": " +
                            std::to_string(r.failures) + " failures");
        }
        out.emplace_back(size, r.mean_activate_us);
    }
    return out;
}

} // namespace rolegate::bench
