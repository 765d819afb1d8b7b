#include "cpseq/digest.hpp"
#include "cpseq/rng.hpp"

#include "doctest.h"

#include <map>
#include <string>
#include <vector>

using cpseq::Digest;
using cpseq::FieldReader;
using cpseq::FieldWriter;

TEST_CASE("sha256 known vectors") {
    CHECK(Digest::of("").hex() ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(Digest::of("abc").hex() ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(Digest::of("The quick brown fox jumps over the lazy dog").hex() ==
          "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
}

TEST_CASE("hex round trip and rejection") {
    Digest d = Digest::of("payload");
    auto back = Digest::from_hex(d.hex());
    REQUIRE(back.has_value());
    CHECK(*back == d);

    CHECK_FALSE(Digest::from_hex("abc").has_value());
    CHECK_FALSE(Digest::from_hex(std::string(63, 'a')).has_value());
    CHECK_FALSE(Digest::from_hex(std::string(65, 'a')).has_value());
    std::string bad(64, 'a');
    bad[10] = 'g';
    CHECK_FALSE(Digest::from_hex(bad).has_value());
}

TEST_CASE("zero digest") {
    CHECK(Digest::zero().is_zero());
    CHECK(Digest::zero().hex() == std::string(64, '0'));
    CHECK_FALSE(Digest::of("x").is_zero());
}

TEST_CASE("field encoding is the netstring form") {
    FieldWriter w;
    w.field("ab").field_u64(907).field("");
    CHECK(w.str() == "2:ab;3:907;0:;");
}

TEST_CASE("field encoding is injective over field boundaries") {
    // Concatenating "a","bc" must differ from "ab","c".
    FieldWriter w1, w2;
    w1.field("a").field("bc");
    w2.field("ab").field("c");
    CHECK(w1.str() != w2.str());
    CHECK(w1.digest() != w2.digest());
}

TEST_CASE("reader round trips writer output") {
    Digest d = Digest::of("linked");
    FieldWriter w;
    w.field("mint").field_u64(42).field_digest(d).field("trailing;colons:everywhere");

    FieldReader r(w.str());
    CHECK(r.field() == std::string("mint"));
    CHECK(r.field_u64() == 42);
    CHECK(r.field_digest() == d);
    CHECK(r.field() == std::string("trailing;colons:everywhere"));
    CHECK(r.at_end());
}

TEST_CASE("reader rejects malformed records") {
    FieldReader truncated("5:ab");
    CHECK_FALSE(truncated.field().has_value());

    FieldReader missing_semi("2:abX");
    CHECK_FALSE(missing_semi.field().has_value());

    FieldReader bad_len("x:ab;");
    CHECK_FALSE(bad_len.field().has_value());

    FieldReader not_number("3:abc;");
    CHECK_FALSE(not_number.field_u64().has_value());

    FieldReader bad_digest("4:beef;");
    CHECK_FALSE(bad_digest.field_digest().has_value());
}

TEST_CASE("digest hash adaptor spreads values") {
    cpseq::DigestHash h;
    CHECK(h(Digest::of("a")) != h(Digest::of("b")));
    CHECK(h(Digest::zero()) == 0);
}

TEST_CASE("rng mappings are pinned") {
    cpseq::Rng rng(12345);
    // mt19937_64 output is specified by the standard; spot-check the
    // first draw so seeded runs cannot silently change meaning.
    cpseq::Rng reference(12345);
    CHECK(rng.next_u64() == reference.next_u64());

    cpseq::Rng u(1);
    for (int i = 0; i < 1000; ++i) {
        double x = u.uniform01();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    for (int i = 0; i < 1000; ++i) {
        CHECK(u.below(7) < 7);
    }
}

TEST_CASE("rng normal moments") {
    cpseq::Rng rng(99);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("rng weighted pick follows weights") {
    cpseq::Rng rng(7);
    std::vector<double> weights = {1.0, 0.0, 3.0};
    std::map<std::size_t, int> counts;
    const int n = 40000;
    for (int i = 0; i < n; ++i) counts[rng.pick_weighted(weights)]++;
    CHECK(counts[1] == 0);
    double p0 = static_cast<double>(counts[0]) / n;
    CHECK(p0 == doctest::Approx(0.25).epsilon(0.05));
}
