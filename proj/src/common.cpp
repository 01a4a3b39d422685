#include "offrl/common.hpp"

#include <charconv>
#include <cstdio>

namespace offrl {

namespace {

std::string join_findings(const std::vector<std::string>& findings) {
  std::string msg = "validation failed";
  for (const auto& f : findings) {
    msg += "\n  - ";
    msg += f;
  }
  return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> findings)
    : std::runtime_error(join_findings(findings)), findings_(std::move(findings)) {}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace offrl
