#include "subexp/probes.hpp"

#include <regex>

#include "subexp/errors.hpp"
#include "subexp/gallery.hpp"

namespace subexp {

namespace {

std::string points_example(const std::string& example) {
  if (example == "ex4" || example == "ex5") return "ex2";
  if (example == "ex1" || example == "ex2" || example == "ex3" || example == "ex6") return example;
  throw PreconditionError("example '" + example + "' has no named points");
}

Scaled segment_value(const Segment& s, const Knot& x) {
  Scaled out(Real(0));
  for (const Part& p : s.parts) out += p.value(x);
  return out;
}

bool same_value(const Scaled& a, const Scaled& b) {
  if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
  return abs(ratio(a, b) - 1) < Real(1e-28);
}

bool flat_segment(const Segment& s) {
  for (const Part& p : s.parts)
    if (p.kind() != PartKind::ExpLinear || p.rate() != 0) return false;
  return same_value(segment_value(s, s.left), segment_value(s, s.right));
}

int to_int(const std::string& s) { return std::stoi(s); }

}  // namespace

int special_index(const std::string& example) {
  const std::string ex = points_example(example);
  if (ex == "ex1") return 5;
  if (ex == "ex3") return 2;
  if (ex == "ex6") return 1;
  return 3;
}

ExpReal flat_midpoint(const PiecewiseDensity& f, const ExpReal& x) {
  const auto& segs = f.segments();
  std::size_t i = 0;
  while (i < segs.size() && !(segs[i].left.exact == x)) ++i;
  if (i == segs.size() || !flat_segment(segs[i]))
    throw PreconditionError("no flat segment starts at " + x.str());
  const Scaled level = segment_value(segs[i], segs[i].left);
  std::size_t j = i;
  while (j + 1 < segs.size() && segs[j + 1].left == segs[j].right && flat_segment(segs[j + 1]) &&
         same_value(segment_value(segs[j + 1], segs[j + 1].left), level))
    ++j;
  return (segs[i].left.exact + segs[j].right.exact) * Coeff(Rational(1, 2));
}

std::vector<Probe> parse_probes(const std::string& spec, const std::string& example,
                                const PiecewiseDensity* f) {
  static const std::regex range(R"(([am])(\d+)(?:\.\.[am]?(\d+))?(?::(\d+))?(?:@(\d+))?)");
  static const std::regex special(R"(s(\d+),(\d+))");
  static const std::regex point(R"(a\((\d+),(\d+)\))");
  static const std::regex single(R"(([bm])\((\d+)\))");
  static const std::regex number(R"(-?[0-9][0-9/.eE+-]*)");

  std::vector<Probe> out;
  auto named = [&](int n, int i) {
    return make_probe("a" + std::to_string(n) + (i ? "_" + std::to_string(i) : ""),
                      named_point(points_example(example), n, i));
  };
  auto mid = [&](int n) {
    if (!f) throw PreconditionError("flat-midpoint probes need a density");
    return make_probe("m" + std::to_string(n),
                      flat_midpoint(*f, named_point(points_example(example), n, 0)));
  };
  auto last = [&](int n) {
    const std::string ex = points_example(example);
    const int i = ex == "ex1" ? 6 : (ex == "ex6" ? 1 : points_per_interval(ex) - 1);
    return make_probe("b" + std::to_string(n), named_point(ex, n, i));
  };

  std::size_t pos = 0;
  while (pos < spec.size()) {
    if (spec[pos] == ',' || spec[pos] == ' ') {
      ++pos;
      continue;
    }
    const std::string rest = spec.substr(pos);
    std::smatch m;
    const auto flags = std::regex_constants::match_continuous;
    if (std::regex_search(rest, m, range, flags)) {
      const int lo = to_int(m[2]), hi = m[3].matched ? to_int(m[3]) : lo;
      const int step = m[4].matched ? to_int(m[4]) : 1;
      const int i = m[5].matched ? to_int(m[5]) : 0;
      if (lo > hi || step <= 0 || (m[1] == "m" && i != 0))
        throw ParseError("bad probe range '" + m.str() + "'");
      for (int n = lo; n <= hi; n += step) out.push_back(m[1] == "a" ? named(n, i) : mid(n));
    } else if (std::regex_search(rest, m, special, flags)) {
      const int lo = to_int(m[1]), hi = to_int(m[2]);
      if (lo > hi || lo < 1) throw ParseError("bad subsequence '" + m.str() + "'");
      const int i = special_index(example);
      for (int k = lo; k <= hi; k += 2) {
        out.push_back(points_example(example) == "ex6" ? last(k * k) : named(k * k, i));
      }
    } else if (std::regex_search(rest, m, point, flags)) {
      out.push_back(named(to_int(m[1]), to_int(m[2])));
    } else if (std::regex_search(rest, m, single, flags)) {
      out.push_back(m[1] == "b" ? last(to_int(m[2])) : mid(to_int(m[2])));
    } else if (std::regex_search(rest, m, number, flags)) {
      out.push_back(make_probe(m.str(), ExpReal(parse_rational(m.str()))));
    } else {
      throw ParseError("cannot parse probe spec at '" + rest + "'");
    }
    pos += m.length();
  }
  if (out.empty()) throw ParseError("empty probe spec");
  return out;
}

}  // namespace subexp
