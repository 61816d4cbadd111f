#pragma once

// Text form of a PiecewiseFn used on the command line:
//
//   kind=constant; domain=0,1; breaks=0.5; data=0,1
//   kind=affine;   domain=-1,1; breaks=0; data=-1:1,0:1
//
// Fields are separated by ';' and may appear in any order. `breaks` lists the
// interior breakpoints only (empty for a single cell). `data` holds one entry
// per cell: the value for constant kind, `left_value:slope` for affine kind.
// Numbers are written in shortest round-trip form, so format/parse is exact.

#include <charconv>
#include <map>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sobrev/error.hpp"
#include "sobrev/func1d.hpp"

namespace sobrev {

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline double parse_number(std::string_view s) {
  s = detail::trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("not a number: '" + std::string(s) + "'");
  }
  return x;
}

inline std::vector<double> parse_number_list(std::string_view s) {
  std::vector<double> out;
  if (detail::trim(s).empty()) return out;
  for (auto item : detail::split(s, ',')) out.push_back(parse_number(item));
  return out;
}

inline std::string format_fn(const PiecewiseFn& u) {
  std::string out = u.kind() == FnKind::Constant ? "kind=constant" : "kind=affine";
  out += "; domain=" + format_number(u.domain().a) + "," + format_number(u.domain().b);
  out += "; breaks=";
  const auto br = u.breakpoints();
  for (std::size_t i = 1; i + 1 < br.size(); ++i) {
    if (i > 1) out += ",";
    out += format_number(br[i]);
  }
  out += "; data=";
  for (std::size_t i = 0; i < u.cells(); ++i) {
    if (i > 0) out += ",";
    out += format_number(u.left_value(i));
    if (u.kind() == FnKind::Affine) out += ":" + format_number(u.slope(i));
  }
  return out;
}

inline PiecewiseFn parse_fn(std::string_view text) {
  std::map<std::string, std::string, std::less<>> fields;
  for (auto part : detail::split(text, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value, got '" + std::string(part) + "'");
    const std::string key(detail::trim(part.substr(0, eq)));
    if (fields.count(key)) throw ParseError("duplicate field '" + key + "'");
    fields[key] = std::string(detail::trim(part.substr(eq + 1)));
  }
  for (const char* required : {"kind", "domain", "data"}) {
    if (!fields.count(required)) throw ParseError(std::string("missing field '") + required + "'");
  }
  for (const auto& [key, value] : fields) {
    if (key != "kind" && key != "domain" && key != "breaks" && key != "data") {
      throw ParseError("unknown field '" + key + "'");
    }
  }
  const std::string& kind = fields["kind"];
  if (kind != "constant" && kind != "affine") throw ParseError("kind must be constant or affine");

  const auto dom = parse_number_list(fields["domain"]);
  if (dom.size() != 2) throw ParseError("domain needs exactly two numbers");
  std::vector<double> breaks{dom[0]};
  for (double t : parse_number_list(fields["breaks"])) breaks.push_back(t);
  breaks.push_back(dom[1]);

  std::vector<double> values, slopes;
  for (auto item : detail::split(fields["data"], ',')) {
    if (kind == "constant") {
      values.push_back(parse_number(item));
      continue;
    }
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw ParseError("affine data entries are value:slope");
    values.push_back(parse_number(item.substr(0, colon)));
    slopes.push_back(parse_number(item.substr(colon + 1)));
  }
  try {
    const Interval domain(dom[0], dom[1]);
    if (kind == "constant") return PiecewiseFn::constant(domain, std::move(breaks), std::move(values));
    return PiecewiseFn::affine(domain, std::move(breaks), std::move(values), std::move(slopes));
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

}  // namespace sobrev
