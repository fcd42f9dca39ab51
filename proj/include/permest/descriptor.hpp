#pragma once

#include <algorithm>
#include <charconv>
#include <map>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "permest/errors.hpp"
#include "permest/matrix.hpp"
#include "permest/smallbias_binary.hpp"
#include "permest/smallbias_complex.hpp"

namespace permest {

namespace detail {

[[noreturn]] inline void bad_descriptor(const std::string& what) {
  throw ParseError(ParseError::Kind::bad_descriptor, 1, "space descriptor: " + what);
}

template <class T>
T descriptor_number(const std::map<std::string, std::string, std::less<>>& kv, std::string_view key) {
  const auto it = kv.find(key);
  if (it == kv.end()) bad_descriptor("missing " + std::string(key) + "=");
  T out{};
  std::string_view tok = it->second;
  if constexpr (std::is_integral_v<T>) {
    if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
      const auto res = std::from_chars(tok.data() + 2, tok.data() + tok.size(), out, 16);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) bad_descriptor("bad value for " + std::string(key));
      return out;
    }
  }
  if (!parse_number(tok, out)) bad_descriptor("bad value for " + std::string(key));
  return out;
}

}  // namespace detail

/// Rebuilds a sample space from its descriptor string, e.g.
///   binary n=10 m=7 poly=0x83 eps=0.1
///   binary n=6 exhaustive
///   complex k=2 s=1,2 p=5 c=7 r=10 l=2 eps=0.5 mode=constructed
inline SampleSpace space_from_descriptor(std::string_view text) {
  const auto toks = detail::split_ws(text);
  if (toks.empty()) detail::bad_descriptor("empty");
  std::map<std::string, std::string, std::less<>> kv;
  bool exhaustive_flag = false;
  for (std::size_t i = 1; i < toks.size(); ++i) {
    const auto eq = toks[i].find('=');
    if (eq == std::string_view::npos) {
      if (toks[i] == "exhaustive") {
        exhaustive_flag = true;
        continue;
      }
      detail::bad_descriptor("expected key=value, got '" + std::string(toks[i]) + "'");
    }
    if (!kv.emplace(std::string(toks[i].substr(0, eq)), std::string(toks[i].substr(eq + 1))).second)
      detail::bad_descriptor("duplicate key '" + std::string(toks[i].substr(0, eq)) + "'");
  }

  if (toks[0] == "binary") {
    const auto n = detail::descriptor_number<std::size_t>(kv, "n");
    if (exhaustive_flag) {
      if (kv.size() != 1) detail::bad_descriptor("exhaustive binary space takes only n=");
      return exhaustive_binary_space(n);
    }
    if (kv.size() != 4) detail::bad_descriptor("binary space needs exactly n=, m=, poly=, eps=");
    const auto m = detail::descriptor_number<unsigned>(kv, "m");
    const auto poly = detail::descriptor_number<std::uint32_t>(kv, "poly");
    const auto eps = detail::descriptor_number<double>(kv, "eps");
    if (n == 0) throw DomainError("n must be at least 1");
    return binary_space_from_field(n, GF2m(m, poly), eps);
  }

  if (toks[0] != "complex") detail::bad_descriptor("unknown family '" + std::string(toks[0]) + "'");
  if (exhaustive_flag) detail::bad_descriptor("complex spaces use mode=exhaustive");
  for (const auto& [key, value] : kv) {
    static const char* known[] = {"k", "s", "p", "c", "r", "l", "eps", "mode"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      detail::bad_descriptor("unknown key '" + key + "'");
  }
  const auto k = detail::descriptor_number<std::size_t>(kv, "k");
  const auto s_it = kv.find("s");
  if (s_it == kv.end()) detail::bad_descriptor("missing s=");
  std::vector<std::uint32_t> moduli;
  std::string_view rest = s_it->second;
  while (true) {
    const auto comma = rest.find(',');
    std::uint32_t s = 0;
    if (!detail::parse_number(rest.substr(0, comma), s) || s == 0) detail::bad_descriptor("s= must list positive integers");
    moduli.push_back(s + 1);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (moduli.size() != k) detail::bad_descriptor("s= lists " + std::to_string(moduli.size()) + " values, k=" + std::to_string(k));
  const auto p = detail::descriptor_number<std::uint32_t>(kv, "p");
  const auto c = detail::descriptor_number<unsigned>(kv, "c");
  const auto r = detail::descriptor_number<unsigned>(kv, "r");
  const auto l = detail::descriptor_number<unsigned>(kv, "l");
  const auto eps = detail::descriptor_number<double>(kv, "eps");
  const auto mode_it = kv.find("mode");
  if (mode_it == kv.end()) detail::bad_descriptor("missing mode=");
  if (c != 7) detail::bad_descriptor("only c=7 is supported");

  if (mode_it->second == "exhaustive") return exhaustive_complex_space(std::move(moduli), eps).space;
  if (mode_it->second != "constructed") detail::bad_descriptor("mode must be constructed or exhaustive");
  if (!is_prime(p) || p <= std::max<std::uint64_t>(k, *std::max_element(moduli.begin(), moduli.end())))
    detail::bad_descriptor("p must be a prime above k and every s_i + 1");
  ComplexSampleSpace built = complex_space_with_walk(std::move(moduli), l, eps, p);
  if (built.r != r) detail::bad_descriptor("r=" + std::to_string(r) + " does not match the construction (r=" + std::to_string(built.r) + ")");
  return std::move(built.space);
}

}  // namespace permest
