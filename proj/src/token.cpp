#include "nlg/token.hpp"

#include <charconv>

namespace nlg {

std::string pack(const std::vector<std::string>& fields) {
  std::string out;
  for (const auto& f : fields) {
    out += std::to_string(f.size());
    out += ':';
    out += f;
  }
  return out;
}

std::optional<std::vector<std::string>> unpack(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t colon = s.find(':', i);
    if (colon == std::string::npos || colon == i) return std::nullopt;
    std::size_t len = 0;
    const auto [p, ec] = std::from_chars(s.data() + i, s.data() + colon, len);
    if (ec != std::errc() || p != s.data() + colon || len > s.size() - colon - 1) return std::nullopt;
    out.push_back(s.substr(colon + 1, len));
    i = colon + 1 + len;
  }
  return out;
}

std::string residue_token(const std::string& tag, std::span<const std::uint64_t> values) {
  std::string out = tag;
  for (auto v : values) {
    out += ' ';
    out += std::to_string(v);
  }
  return out;
}

std::optional<std::vector<std::uint64_t>> parse_residues(const std::string& s, std::uint64_t modulus) {
  std::vector<std::uint64_t> out;
  const char* p = s.data();
  const char* end = p + s.size();
  while (p < end) {
    if (*p == ' ') {
      ++p;
      continue;
    }
    std::uint64_t v = 0;
    const auto [q, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || v >= modulus || (q < end && *q != ' ')) return std::nullopt;
    out.push_back(v);
    p = q;
  }
  return out;
}

std::optional<std::vector<std::uint64_t>> parse_tagged(const std::string& s, const std::string& tag,
                                                       std::uint64_t modulus, long count) {
  if (s.compare(0, tag.size(), tag) != 0) return std::nullopt;
  if (s.size() > tag.size() && s[tag.size()] != ' ') return std::nullopt;
  auto v = parse_residues(s.substr(tag.size()), modulus);
  if (!v || (count >= 0 && long(v->size()) != count)) return std::nullopt;
  return v;
}

std::string bits_to_string(const std::vector<std::uint8_t>& bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s[i] = '1';
  return s;
}

std::optional<std::vector<std::uint8_t>> string_to_bits(const std::string& s) {
  std::vector<std::uint8_t> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') return std::nullopt;
    out[i] = s[i] == '1';
  }
  return out;
}

std::string to_hex(const std::vector<std::uint8_t>& bits) {
  static const char* digits = "0123456789abcdef";
  std::vector<int> nib((bits.size() + 3) / 4, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) nib[i / 4] |= 1 << (i % 4);
  std::string out;
  for (int v : nib) out += digits[v];
  return out;
}

std::optional<std::vector<std::uint8_t>> from_hex(const std::string& s, std::size_t nbits) {
  if (s.size() != (nbits + 3) / 4) return std::nullopt;
  std::vector<std::uint8_t> out(nbits);
  for (std::size_t k = 0; k < s.size(); ++k) {
    int v;
    if (s[k] >= '0' && s[k] <= '9') v = s[k] - '0';
    else if (s[k] >= 'a' && s[k] <= 'f') v = s[k] - 'a' + 10;
    else return std::nullopt;
    for (int b = 0; b < 4; ++b) {
      const std::size_t i = 4 * k + b;
      if (i < nbits) out[i] = (v >> b) & 1;
      else if ((v >> b) & 1) return std::nullopt;
    }
  }
  return out;
}

}  // namespace nlg
