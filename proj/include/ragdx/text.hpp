#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ragdx::text {

/// True for bytes that belong to a word token: ASCII alphanumerics and any
/// byte of a multi-byte UTF-8 sequence.
inline bool is_word_byte(unsigned char c) noexcept {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline bool is_comparator_byte(unsigned char c) noexcept {
    return c == '<' || c == '>' || c == '=';
}

inline bool is_space(unsigned char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// ASCII case fold; UTF-8 continuation bytes pass through untouched.
std::string fold_case(std::string_view s);

std::string_view trim(std::string_view s) noexcept;

/// Word tokens: maximal runs of word bytes, plus runs of comparison
/// operators ("<", ">=") so that age thresholds survive tokenization.
std::vector<std::string> tokenize(std::string_view s);

/// Tokens split on whitespace only, original spelling kept.
std::vector<std::string> split_whitespace(std::string_view s);

/// Sentence segmentation on . ? ! ; with guards for decimals, single-letter
/// initials and a fixed list of common abbreviations ("e.g.", "dr.", "vs.").
/// Empty segments are dropped; each sentence is trimmed.
std::vector<std::string> split_sentences(std::string_view s);

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace ragdx::text
