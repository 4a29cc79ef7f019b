#include "ragdx/text.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <memory>

#include "ragdx/errors.hpp"

namespace ragdx::text {

std::string fold_case(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) {
        if (ch >= 'A' && ch <= 'Z') {
            ch = static_cast<char>(ch - 'A' + 'a');
        }
    }
    return out;
}

std::string_view trim(std::string_view s) noexcept {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (is_word_byte(c)) {
            std::size_t j = i;
            while (j < s.size() && is_word_byte(static_cast<unsigned char>(s[j]))) ++j;
            tokens.emplace_back(s.substr(i, j - i));
            i = j;
        } else if (is_comparator_byte(c)) {
            std::size_t j = i;
            while (j < s.size() && is_comparator_byte(static_cast<unsigned char>(s[j]))) ++j;
            tokens.emplace_back(s.substr(i, j - i));
            i = j;
        } else {
            ++i;
        }
    }
    return tokens;
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) tokens.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return tokens;
}

namespace {

constexpr std::array kAbbreviations = {
    "e.g", "i.e", "dr", "mr", "mrs", "ms", "vs", "etc", "no", "fig", "approx", "al", "st", "jr", "sr", "cf", "u.s",
};

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

/// Word immediately preceding position `dot` (exclusive), including inner dots.
std::string_view word_before(std::string_view s, std::size_t dot) {
    std::size_t b = dot;
    while (b > 0) {
        const auto c = static_cast<unsigned char>(s[b - 1]);
        if (is_word_byte(c) || c == '.') {
            --b;
        } else {
            break;
        }
    }
    return s.substr(b, dot - b);
}

bool is_guarded_period(std::string_view s, std::size_t i) {
    // 2.5 mg
    if (i > 0 && i + 1 < s.size() && is_ascii_digit(s[i - 1]) && is_ascii_digit(s[i + 1])) {
        return true;
    }
    const auto word = word_before(s, i);
    if (word.empty()) {
        return false;
    }
    // J. Smith
    if (word.size() == 1 && word[0] >= 'A' && word[0] <= 'Z') {
        return true;
    }
    const auto folded = fold_case(word);
    return std::any_of(kAbbreviations.begin(), kAbbreviations.end(),
                       [&](const char* a) { return folded == a; });
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        const auto piece = trim(s.substr(start, end - start));
        if (!piece.empty()) out.emplace_back(piece);
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '?' || c == '!' || c == ';') {
            flush(i + 1);
            start = i + 1;
        } else if (c == '.') {
            if (is_guarded_period(s, i)) continue;
            // a period inside a token ("e.g.x") is not a boundary
            if (i + 1 < s.size() && !is_space(static_cast<unsigned char>(s[i + 1])) && s[i + 1] != '"' &&
                s[i + 1] != ')') {
                continue;
            }
            flush(i + 1);
            start = i + 1;
        }
    }
    flush(s.size());
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
        throw Error("sha256: OpenSSL digest failure");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0xF]);
    }
    return hex;
}

}  // namespace ragdx::text
