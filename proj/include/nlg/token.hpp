#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nlg {

/// Length-prefixed concatenation "<len>:<field>..." so that arbitrary tokens
/// (including empty ones) nest without escaping.
std::string pack(const std::vector<std::string>& fields);
/// nullopt on malformed input.
std::optional<std::vector<std::string>> unpack(const std::string& s);

/// "<tag> r1 r2 ..." with decimal residues.
std::string residue_token(const std::string& tag, std::span<const std::uint64_t> values);
/// Space-separated decimal list; nullopt if malformed or any value >= modulus.
std::optional<std::vector<std::uint64_t>> parse_residues(const std::string& s, std::uint64_t modulus);
/// Splits "<tag> rest" and parses rest; nullopt unless the tag matches and the
/// count is exactly `count` (or any count when count < 0).
std::optional<std::vector<std::uint64_t>> parse_tagged(const std::string& s, const std::string& tag,
                                                       std::uint64_t modulus, long count);

/// Bit vectors as '0'/'1' strings.
std::string bits_to_string(const std::vector<std::uint8_t>& bits);
std::optional<std::vector<std::uint8_t>> string_to_bits(const std::string& s);

std::string to_hex(const std::vector<std::uint8_t>& bits);
std::optional<std::vector<std::uint8_t>> from_hex(const std::string& s, std::size_t nbits);

}  // namespace nlg
