#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rolegate/crypto/mt19937_64.hpp"
#include "rolegate/crypto/session_key.hpp"
#include "rolegate/crypto/sha256.hpp"
#include "rolegate/bytes.hpp"

using namespace rolegate;
using namespace rolegate::crypto;

TEST_CASE("mt19937_64 matches the reference generator", "[prng]") {
    SECTION("default seed") {
        Mt19937_64 ours;
        std::mt19937_64 ref;
        for (int i = 0; i < 2000; ++i) {
            CAPTURE(i);
            REQUIRE(ours() == ref());
        }
    }
    SECTION("explicit seeds") {
        for (uint64_t seed : {0ull, 1ull, 5489ull, 0x123456789abcdefull,
                              0xffffffffffffffffull}) {
            Mt19937_64 ours(seed);
            std::mt19937_64 ref(seed);
            CAPTURE(seed);
            // Cross one reload boundary (312 words per block).
            for (int i = 0; i < 700; ++i) {
                REQUIRE(ours() == ref());
            }
        }
    }
    SECTION("first output for the classic seed") {
        // Pinned so a regression in our init path fails loudly rather than
        // just diverging from the std generator.
        Mt19937_64 ours(5489);
        uint64_t first = ours();
        CHECK(first == 14514284786278117030ull);
        std::mt19937_64 ref(5489);
        CHECK(first == ref());
    }
}

TEST_CASE("bounded word source redraws the all-ones word", "[prng]") {
    // A generator that emits ~0 twice, then small values.
    struct Stub {
        int calls = 0;
        uint64_t operator()() {
            ++calls;
            if (calls <= 2) return ~0ull;
            return static_cast<uint64_t>(calls);
        }
    };
    BoundedWordSource<Stub> src{Stub{}};
    uint64_t first = src();
    CHECK(first == 3);
    CHECK(src.generator().calls == 3);
    CHECK(src() == 4);
}

TEST_CASE("bounded word source stays within [0, 2^64-2]", "[prng]") {
    BoundedWordSource<Mt19937_64> src{Mt19937_64(99)};
    for (int i = 0; i < 10000; ++i) {
        REQUIRE(src() != ~0ull);
    }
}

TEST_CASE("sha256 known answers", "[prng][sha]") {
    CHECK(to_hex(sha256("")) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(to_hex(sha256("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(to_hex(sha256("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("session keys hash four generator words", "[prng][session]") {
    SessionKeyGenerator gen(uint64_t{42});

    // Independent recomputation: same words, hashed by hand.
    Mt19937_64 ref(42);
    Bytes material;
    for (int i = 0; i < 4; ++i) {
        uint64_t w = ref();
        while (w == ~0ull) w = ref();
        append_u64(material, w);
    }
    Digest32 expect = sha256(material);

    SessionKey key = gen.generate("alice", "txn-7");
    CHECK(key.bytes == expect);
    CHECK(key.issued_to == "alice");
    CHECK(key.transaction_id == "txn-7");
}

TEST_CASE("session key streams are deterministic per seed", "[prng][session]") {
    SessionKeyGenerator a(uint64_t{1234});
    SessionKeyGenerator b(uint64_t{1234});
    for (int i = 0; i < 8; ++i) {
        SessionKey ka = a.generate("u", std::to_string(i));
        SessionKey kb = b.generate("u", std::to_string(i));
        REQUIRE(ka.bytes == kb.bytes);
    }
}

TEST_CASE("session keys differ across seeds and across calls", "[prng][session]") {
    SessionKeyGenerator a(uint64_t{1});
    SessionKeyGenerator b(uint64_t{2});
    SessionKey k1 = a.generate("u", "0");
    SessionKey k2 = a.generate("u", "1");
    SessionKey k3 = b.generate("u", "0");
    CHECK(k1.bytes != k2.bytes);
    CHECK(k1.bytes != k3.bytes);
    CHECK(k2.bytes != k3.bytes);
}

TEST_CASE("entropy-seeded generators do not collide", "[prng][session]") {
    SessionKeyGenerator a;
    SessionKeyGenerator b;
    CHECK(a.generate("u", "0").bytes != b.generate("u", "0").bytes);
}
