#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rolegate/sql/parser.hpp"
#include "rolegate/sql/regenerate.hpp"
#include "support/query_gen.hpp"

using namespace rolegate;
using namespace rolegate::sql;
namespace pl = rolegate::crypto::paillier;

namespace {

struct Fixture {
    std::mt19937_64 rng{7031};
    pl::KeyPair keys = pl::keygen(64, rng);
    TableSchema schema{"employees",
                       {"id", "name", "dept", "salary", "bonus"},
                       {"salary", "bonus"}};
    ColumnGrant full{"employees",
                     {"id", "name", "dept", "salary", "bonus"},
                     {"salary", "bonus"}};
};

} // namespace

TEST_CASE("non-sensitive statements pass through canonically", "[regen]") {
    Fixture fx;
    ParsedQuery q = parse("SELECT  name FROM employees  WHERE dept='CS'");
    auto out = regenerate(q, fx.full, {}, fx.schema, fx.keys.enc, fx.rng);
    CHECK(out.text == "SELECT name FROM employees WHERE dept = 'CS'");
    CHECK(out.encrypted_positions.empty());
    CHECK(out.applied_filters.empty());
    CHECK(out.parsed == q);
}

TEST_CASE("sensitive literals are replaced by ciphertexts", "[regen]") {
    Fixture fx;
    std::string text = "UPDATE employees SET salary = 100 WHERE id = 7";
    ParsedQuery q = parse(text);
    auto out = regenerate(q, fx.full, {}, fx.schema, fx.keys.enc, fx.rng);

    // The salary literal is gone; the id literal survives untouched.
    CHECK(out.text.find("salary = 100") == std::string::npos);
    CHECK(out.text.find("salary = 'pc1:") != std::string::npos);
    CHECK(out.text.find("id = 7") != std::string::npos);
    REQUIRE(out.encrypted_positions.size() == 1);
    CHECK(out.encrypted_positions[0] == text.find("100") + 1);

    // The inlined ciphertext decrypts back to the assigned value.
    REQUIRE(out.parsed.assignments.size() == 1);
    const Value& v = out.parsed.assignments[0].literal.value;
    REQUIRE(is_cipher_literal(v));
    crypto::PlainValue plain = crypto::decrypt_value(fx.keys.dec, cipher_literal_bytes(v));
    CHECK(std::get<std::int64_t>(plain) == 100);

    // Regenerated text reparses to the substituted statement.
    CHECK(parse(out.text) == out.parsed);
}

TEST_CASE("where predicates on sensitive columns are encrypted", "[regen]") {
    Fixture fx;
    ParsedQuery q = parse("SELECT name FROM employees WHERE salary = 4200 AND dept = 'CS'");
    auto out = regenerate(q, fx.full, {}, fx.schema, fx.keys.enc, fx.rng, true);

    REQUIRE(out.parsed.where.size() == 2);
    REQUIRE(is_cipher_literal(out.parsed.where[0].literal.value));
    CHECK(std::get<std::string>(out.parsed.where[1].literal.value) == "CS");

    // Deterministic mode: the inlined ciphertext equals a fresh encryption
    // of the same value, so stored cells can be matched byte-for-byte.
    Bytes expect = crypto::encrypt_value_deterministic(fx.keys.enc, std::int64_t{4200});
    CHECK(cipher_literal_bytes(out.parsed.where[0].literal.value) == expect);

    // Probabilistic mode: two regenerations disagree on the ciphertext.
    auto out2 = regenerate(q, fx.full, {}, fx.schema, fx.keys.enc, fx.rng);
    auto out3 = regenerate(q, fx.full, {}, fx.schema, fx.keys.enc, fx.rng);
    CHECK(out2.parsed.where[0].literal != out3.parsed.where[0].literal);
}

TEST_CASE("insert values into sensitive columns are encrypted", "[regen]") {
    Fixture fx;
    ParsedQuery q = parse(
        "INSERT INTO employees (name, salary, bonus) VALUES ('Ana', 4200, 300)");
    auto out = regenerate(q, fx.full, {}, fx.schema, fx.keys.enc, fx.rng);

    CHECK(std::get<std::string>(out.parsed.insert_values[0].value) == "Ana");
    REQUIRE(is_cipher_literal(out.parsed.insert_values[1].value));
    REQUIRE(is_cipher_literal(out.parsed.insert_values[2].value));
    CHECK(out.encrypted_positions.size() == 2);

    auto decrypted = crypto::decrypt_value(
        fx.keys.dec, cipher_literal_bytes(out.parsed.insert_values[1].value));
    CHECK(std::get<std::int64_t>(decrypted) == 4200);
}

TEST_CASE("star expansion respects the grant", "[regen]") {
    Fixture fx;
    ParsedQuery q = parse("SELECT * FROM employees");

    SECTION("full grant sees every column in schema order") {
        auto out = regenerate(q, fx.full, {}, fx.schema, fx.keys.enc, fx.rng);
        CHECK(out.parsed.select_columns ==
              std::vector<std::string>{"id", "name", "dept", "salary", "bonus"});
        CHECK(!out.parsed.select_star);
    }
    SECTION("narrow grant trims the list") {
        ColumnGrant narrow{"employees", {"dept", "name"}, {}};
        auto out = regenerate(q, narrow, {}, fx.schema, fx.keys.enc, fx.rng);
        CHECK(out.parsed.select_columns == std::vector<std::string>{"name", "dept"});
        CHECK(out.text == "SELECT name, dept FROM employees");
    }
    SECTION("sensitive columns need the extra grant to appear") {
        ColumnGrant partial{"employees", {"name", "salary", "bonus"}, {"bonus"}};
        auto out = regenerate(q, partial, {}, fx.schema, fx.keys.enc, fx.rng);
        CHECK(out.parsed.select_columns == std::vector<std::string>{"name", "bonus"});
    }
    SECTION("no accessible columns denies the star") {
        ColumnGrant none{"employees", {}, {}};
        try {
            regenerate(q, none, {}, fx.schema, fx.keys.enc, fx.rng);
            FAIL("star expanded with an empty grant");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::column_denied);
        }
    }
}

TEST_CASE("policy row filters are appended as conjuncts", "[regen]") {
    Fixture fx;
    std::vector<RowFilter> filters = {{"dept", Op::eq, Value{std::string("CS")}}};

    SECTION("select grows a where clause") {
        auto out = regenerate(parse("SELECT name FROM employees"), fx.full, filters,
                              fx.schema, fx.keys.enc, fx.rng);
        CHECK(out.text == "SELECT name FROM employees WHERE dept = 'CS'");
        CHECK(out.applied_filters == std::vector<std::string>{"dept = 'CS'"});
    }
    SECTION("existing conjuncts are kept") {
        auto out = regenerate(parse("DELETE FROM employees WHERE id = 3"), fx.full,
                              filters, fx.schema, fx.keys.enc, fx.rng);
        CHECK(out.text == "DELETE FROM employees WHERE id = 3 AND dept = 'CS'");
    }
    SECTION("insert has no where to filter") {
        auto out = regenerate(parse("INSERT INTO employees (name) VALUES ('Bo')"),
                              fx.full, filters, fx.schema, fx.keys.enc, fx.rng);
        CHECK(out.text == "INSERT INTO employees (name) VALUES ('Bo')");
        CHECK(out.applied_filters.empty());
    }
    SECTION("filters on sensitive columns are encrypted but not position-tracked") {
        std::vector<RowFilter> sfilters = {{"salary", Op::eq, Value{std::int64_t{10}}}};
        auto out = regenerate(parse("SELECT name FROM employees"), fx.full, sfilters,
                              fx.schema, fx.keys.enc, fx.rng);
        REQUIRE(out.parsed.where.size() == 1);
        CHECK(is_cipher_literal(out.parsed.where[0].literal.value));
        CHECK(out.encrypted_positions.empty());
    }
}

TEST_CASE("literals beyond the plaintext space overflow", "[regen]") {
    std::mt19937_64 rng(5);
    pl::KeyPair tiny = pl::keygen_from_primes(crypto::BigInt(5), crypto::BigInt(7), rng);
    TableSchema schema{"t", {"v"}, {"v"}};
    ColumnGrant grant{"t", {"v"}, {"v"}};
    ParsedQuery q = parse("UPDATE t SET v = 100");
    try {
        regenerate(q, grant, {}, schema, tiny.enc, rng);
        FAIL("literal 100 fit into Z_35");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::encoding_overflow);
    }
}

TEST_CASE("regeneration never emits columns outside the grant", "[regen][property]") {
    Fixture fx;
    std::mt19937_64 rng(40123);
    const std::vector<std::string> all = fx.schema.columns;

    for (int round = 0; round < 300; ++round) {
        CAPTURE(round);
        // Random subset grant; random subset of its sensitive columns.
        ColumnGrant grant{"employees", {}, {}};
        for (const auto& c : all) {
            if (rng() % 2) grant.columns.insert(c);
        }
        for (const auto& c : grant.columns) {
            if (fx.schema.is_sensitive(c) && rng() % 2) grant.sensitive_columns.insert(c);
        }

        ParsedQuery q = parse("SELECT * FROM employees");
        try {
            auto out = regenerate(q, grant, {}, fx.schema, fx.keys.enc, fx.rng);
            for (const auto& col : out.parsed.select_columns) {
                REQUIRE(grant.columns.contains(col));
                if (fx.schema.is_sensitive(col)) {
                    REQUIRE(grant.sensitive_columns.contains(col));
                }
            }
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::column_denied);
        }
    }
}
