#include "subexp/spec_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "subexp/errors.hpp"

namespace subexp {

using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "subexp-density";
constexpr int kVersion = 1;

std::string real_str(const Real& x) { return format_real(x, 40); }

ordered_json coeff_json(const Coeff& c) {
  if (c.is_rational()) return to_string(c.u());
  return ordered_json{{"u", to_string(c.u())}, {"v", to_string(c.v())}, {"m", c.m()}};
}

Coeff coeff_from(const ordered_json& j) {
  if (j.is_string()) return Coeff(parse_rational(j.get<std::string>()));
  return Coeff(parse_rational(j.at("u").get<std::string>()), parse_rational(j.at("v").get<std::string>()),
               j.at("m").get<std::uint64_t>());
}

ordered_json exp_json(const ExpReal& x) {
  ordered_json terms = ordered_json::array();
  for (const ExpTerm& t : x.terms()) {
    ordered_json jt{{"c", coeff_json(t.coeff())}, {"a", to_string(t.a())}};
    if (t.b() != 0) jt["b"] = to_string(t.b());
    terms.push_back(jt);
  }
  return terms;
}

ExpReal exp_from(const ordered_json& j) {
  if (!j.is_array()) throw ParseError("ExpReal must be a list of terms");
  ExpReal out;
  for (const ordered_json& t : j) {
    const Rational b = t.contains("b") ? parse_rational(t.at("b").get<std::string>()) : Rational(0);
    out += ExpReal::term(coeff_from(t.at("c")), parse_rational(t.at("a").get<std::string>()), b);
  }
  return out;
}

ordered_json scaled_json(const Scaled& s) {
  return {{"mant", real_str(s.mant())}, {"log", real_str(s.log_part())}};
}

Scaled scaled_from(const ordered_json& j) {
  return Scaled(parse_real(j.at("mant").get<std::string>()), parse_real(j.at("log").get<std::string>()));
}

ordered_json part_json(const Part& p) {
  ordered_json j;
  if (p.kind() == PartKind::ExpLinear) {
    j["kind"] = "linear";
    j["anchors"] = {exp_json(p.anchor_left().exact), exp_json(p.anchor_right().exact)};
    j["values"] = {exp_json(p.v0()), exp_json(p.v1())};
  } else {
    j["kind"] = "weibull";
    j["shape"] = to_string(p.shape());
  }
  j["weight"] = scaled_json(p.weight());
  j["rate"] = to_string(p.rate());
  return j;
}

Part part_from(const ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const Scaled w = scaled_from(j.at("weight"));
  const Rational rate = parse_rational(j.at("rate").get<std::string>());
  if (kind == "linear") {
    const auto& a = j.at("anchors");
    const auto& v = j.at("values");
    return Part::linear(exp_from(a.at(0)), exp_from(a.at(1)), exp_from(v.at(0)), exp_from(v.at(1)), w,
                        rate);
  }
  if (kind == "weibull") return Part::weibull(parse_rational(j.at("shape").get<std::string>()), w, rate);
  throw ParseError("unknown part kind '" + kind + "'");
}

}  // namespace

std::string serialize_density(const PiecewiseDensity& f) {
  const DensityInfo& info = f.info();
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["name"] = info.name;
  j["params"] = info.params;
  if (auto it = info.params.find("n_max"); it != info.params.end()) j["n_max"] = std::stoi(it->second);
  j["normalized"] = f.normalized();
  j["scale"] = real_str(info.scale);
  j["mass_deficit"] = real_str(info.mass_deficit);
  j["notes"] = info.notes;
  ordered_json segs = ordered_json::array();
  for (const Segment& s : f.segments()) {
    ordered_json parts = ordered_json::array();
    for (const Part& p : s.parts) parts.push_back(part_json(p));
    segs.push_back({{"left", exp_json(s.left.exact)}, {"right", exp_json(s.right.exact)}, {"parts", parts}});
  }
  j["segments"] = segs;
  return j.dump(1) + "\n";
}

PiecewiseDensity parse_density(const std::string& text) {
  try {
    const ordered_json j = ordered_json::parse(text);
    if (j.value("format", "") != kFormat) throw ParseError("not a density-spec document");
    if (j.value("version", 0) != kVersion) throw ParseError("unsupported density-spec version");
    DensityInfo info;
    info.name = j.at("name").get<std::string>();
    info.params = j.at("params").get<std::map<std::string, std::string>>();
    info.notes = j.at("notes").get<std::map<std::string, std::string>>();
    info.scale = parse_real(j.at("scale").get<std::string>());
    info.mass_deficit = parse_real(j.at("mass_deficit").get<std::string>());
    std::vector<Segment> segs;
    for (const ordered_json& s : j.at("segments")) {
      std::vector<Part> parts;
      for (const ordered_json& p : s.at("parts")) parts.push_back(part_from(p));
      segs.emplace_back(exp_from(s.at("left")), exp_from(s.at("right")), std::move(parts));
    }
    return PiecewiseDensity(std::move(segs), std::move(info), j.at("normalized").get<bool>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("density spec: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("density spec: ") + e.what());
  }
}

void write_density_file(const std::string& path, const PiecewiseDensity& f) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << serialize_density(f);
}

PiecewiseDensity read_density_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_density(ss.str());
}

}  // namespace subexp
