#include <catch_amalgamated.hpp>

#include "ragdx/text.hpp"

using namespace ragdx;

TEST_CASE("fold_case lowers ASCII and keeps UTF-8 bytes", "[text]") {
    CHECK(text::fold_case("HbA1c Über") == "hba1c \xC3\x9C" "ber");
}

TEST_CASE("tokenize keeps comparison operators", "[text]") {
    CHECK(text::tokenize("age >= 50, BP<140!") == std::vector<std::string>{"age", ">=", "50", "BP", "<", "140"});
    CHECK(text::tokenize("  ...  ").empty());
}

TEST_CASE("split_whitespace keeps spelling", "[text]") {
    CHECK(text::split_whitespace(" a\tB,\n c ") == std::vector<std::string>{"a", "B,", "c"});
}

TEST_CASE("split_sentences guards decimals and abbreviations", "[text]") {
    const auto s = text::split_sentences("Dose is 2.5 mg, e.g. daily. See Dr. Smith! Done?");
    REQUIRE(s.size() == 3);
    CHECK(s[0] == "Dose is 2.5 mg, e.g. daily.");
    CHECK(s[1] == "See Dr. Smith!");
    CHECK(s[2] == "Done?");
    CHECK(text::split_sentences("  ").empty());
}

TEST_CASE("trim", "[text]") {
    CHECK(text::trim("  x y \n") == "x y");
    CHECK(text::trim("").empty());
}

TEST_CASE("sha256 known vectors", "[text]") {
    CHECK(text::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(text::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
