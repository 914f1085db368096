#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "subexp/diagnose.hpp"
#include "subexp/errors.hpp"
#include "subexp/gallery.hpp"
#include "subexp/probes.hpp"
#include "subexp/spec_io.hpp"

using namespace subexp;

namespace {

enum Exit { kOk = 0, kPrecondition = 2, kParse = 3, kNumeric = 4 };

struct Options {
  std::optional<int> n_max;
  std::string epsilon, delta, tilt_gamma, weibull_gamma, negative_mix;
  std::string gamma = "0";
  std::string alpha = "sqrtlog";
  std::string probes, probes_neg;
  std::string shifts = "1";
  std::string p = "1/2";
  std::string x0 = "e4";
  double K = 10;
  int count = 0;
  std::string out;
  std::string format = "table";
  std::vector<std::string> refs;
  std::string kind;
};

GalleryParams gallery_params(const Options& o) {
  GalleryParams p;
  p.n_max = o.n_max;
  if (!o.epsilon.empty()) p.epsilon = parse_rational(o.epsilon);
  if (!o.delta.empty()) p.delta = parse_rational(o.delta);
  if (!o.tilt_gamma.empty()) p.tilt_gamma = parse_rational(o.tilt_gamma);
  if (!o.weibull_gamma.empty()) p.weibull_gamma = parse_rational(o.weibull_gamma);
  if (!o.negative_mix.empty()) p.negative_mix = parse_rational(o.negative_mix);
  return p;
}

// A gallery name, or a path to a density-spec file.
PiecewiseDensity resolve(const std::string& ref, const Options& o) {
  if (std::filesystem::is_regular_file(ref)) return read_density_file(ref);
  if (ref.find('/') != std::string::npos || ref.ends_with(".json"))
    throw ParseError("spec file '" + ref + "' does not exist");
  return gallery_density(ref, gallery_params(o));
}

std::string example_name(const PiecewiseDensity& f) { return example_of(f.info().name); }

std::string default_probes(const std::string& example, const Options& o) {
  if (example == "oracle") return "5,10,15,20,25,30,35";
  if (example == "ex6") return "a2.." + std::to_string(o.n_max.value_or(12));
  return "a10..a" + std::to_string(o.n_max.value_or(40)) + ":5";
}

std::vector<Probe> probes_for(const PiecewiseDensity& f, const std::string& spec, const Options& o) {
  const std::string ex = example_name(f);
  return parse_probes(spec.empty() ? default_probes(ex, o) : spec, ex, &f);
}

// x0 as a rational, or e<q> for e^q.
ExpReal parse_point(const std::string& text) {
  if (!text.empty() && text[0] == 'e') return ExpReal::exp(parse_rational(text.substr(1)));
  return ExpReal(parse_rational(text));
}

std::vector<Rational> parse_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(parse_rational(item));
  return out;
}

std::string render(const DiagnosticReport& r, const std::string& format) {
  if (format == "table") return report_table(r);
  if (format == "json") return report_json(r);
  if (format == "csv") return report_csv(r);
  throw ParseError("unknown format '" + format + "'");
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw ParseError("cannot write '" + out + "'");
  file << text;
}

DiagnosticReport pointwise(const std::string& functional, const std::vector<Probe>& probes,
                           const std::function<Real(const Probe&)>& fn,
                           std::map<std::string, std::string> params) {
  DiagnosticReport r;
  r.functional = functional;
  r.params = std::move(params);
  r.series.push_back(make_series(functional, probes, parallel_map(probes, fn)));
  r.verdict = r.primary().verdict;
  return r;
}

DiagnosticReport witness_report(const PiecewiseDensity& f, int count) {
  const WitnessSequence w = dc_witness_search(f, count);
  std::vector<Probe> probes;
  std::vector<Real> c;
  for (std::size_t i = 0; i < w.items.size(); ++i) {
    probes.push_back(make_probe("w" + std::to_string(i + 1), w.items[i].a));
    c.push_back(w.items[i].c);
  }
  DiagnosticReport r;
  r.functional = "witness";
  r.params = {{"density", f.info().name}, {"count", std::to_string(count)}};
  r.series.push_back(make_series("c", probes, c));
  r.verdict = r.primary().verdict;
  r.findings.push_back("witnesses " + std::to_string(w.items.size()));
  r.findings.push_back("normalization sum 1/sqrt(c) = " + format_real(w.normalization, 17));
  for (std::size_t i = 0; i < w.items.size(); ++i)
    r.findings.push_back("w" + std::to_string(i + 1) + " a = " + w.items[i].a.str() +
                         " b = " + w.items[i].b.str() + " c = " + format_real(w.items[i].c, 17));
  return r;
}

void need_refs(const Options& o, std::size_t lo, std::size_t hi) {
  if (o.refs.size() < lo || o.refs.size() > hi)
    throw ParseError("expected " + std::to_string(lo) +
                     (hi > lo ? ".." + std::to_string(hi) : "") + " density arguments");
}

DiagnosticReport run_diag(const Options& o) {
  need_refs(o, 1, 2);
  const PiecewiseDensity f = resolve(o.refs[0], o);
  const auto probes = probes_for(f, o.probes, o);
  const std::string& k = o.kind;
  if (k == "longtail") return longtail_scan(f, parse_rational(o.gamma), parse_list(o.shifts), probes);
  if (k == "subexp") return subexp_scan(f, parse_rational(o.gamma), probes);
  if (k == "fkz") {
    const PiecewiseDensity g = o.refs.size() > 1 ? resolve(o.refs[1], o) : f;
    return fkz_scan(f, g, AlphaFunction::parse(o.alpha), probes);
  }
  if (k == "jdec") return jdec_scan(f, AlphaFunction::parse(o.alpha), probes);
  if (k == "alpha") return alpha_insensitivity(f, AlphaFunction::parse(o.alpha), probes);
  if (k == "ald") return ald_check(f, parse_point(o.x0), Real(o.K), probes);
  if (k == "ani") return ani_check(f, parse_point(o.x0), probes);
  if (k == "witness") return witness_report(f, o.count);
  throw ParseError("unknown diagnostic '" + k + "'");
}

DiagnosticReport run_verify(const Options& o) {
  const std::string& k = o.kind;
  if (k == "6") {
    need_refs(o, 1, 1);
    const PiecewiseDensity f = resolve(o.refs[0], o);
    return lemma6_verify(f, parse_rational(o.gamma), probes_for(f, o.probes, o));
  }
  need_refs(o, 2, 2);
  const PiecewiseDensity f = resolve(o.refs[0], o);
  const PiecewiseDensity g = resolve(o.refs[1], o);
  const auto probes = probes_for(f, o.probes, o);
  const AlphaFunction alpha = AlphaFunction::parse(o.alpha);
  if (k == "1") return lemma1_verify(f, g, parse_rational(o.p), alpha, probes);
  if (k == "2") return lemma2_verify(f, g, alpha, probes);
  if (k == "4" || k == "5") {
    std::vector<Probe> neg;
    if (!o.probes_neg.empty()) neg = parse_probes(o.probes_neg, example_name(f), &f);
    return lemma45_verify(f, g, parse_rational(o.p), alpha, probes, neg);
  }
  throw ParseError("unknown lemma '" + k + "'");
}

// Canonical diagnostics per example, in a fixed order.
std::vector<std::pair<std::string, DiagnosticReport>> run_report(const Options& base) {
  need_refs(base, 1, 1);
  const std::string ex = base.refs[0];
  std::vector<std::pair<std::string, Options>> jobs;
  auto job = [&](std::string file, std::string mode, std::string kind, std::vector<std::string> refs,
                 auto&& tweak) {
    Options o = base;
    o.kind = kind;
    o.refs = std::move(refs);
    tweak(o);
    jobs.emplace_back(file + "|" + mode, o);
  };
  auto none = [](Options&) {};
  if (ex == "ex1") {
    job("ex1_subexp_h", "diag", "subexp", {"ex1.h"}, none);
    job("ex1_jdec_h", "diag", "jdec", {"ex1.h"}, [](Options& o) {
      o.alpha = "interval:1/2";
      o.probes = "m10..m40:10";
    });
    job("ex1_fkz_f", "diag", "fkz", {"ex1.f"}, [](Options& o) { o.probes = "s4,6"; });
  } else if (ex == "ex2") {
    job("ex2_subexp_g", "diag", "subexp", {"ex2.g"}, none);
    job("ex2_fkz_f", "diag", "fkz", {"ex2.f"}, [](Options& o) { o.probes = "s4,6"; });
  } else if (ex == "ex3") {
    job("ex3_witness_fplus", "diag", "witness", {"ex3.f+"}, none);
    job("ex3_subexp_hplus", "diag", "subexp", {"ex3.h+"}, none);
  } else if (ex == "ex4") {
    job("ex4_lemma2", "verify", "2", {"ex4.f", "ex4.g"}, [](Options& o) {
      o.alpha = "powlog:1/2";
      o.probes = "a20..a40:10";
    });
  } else if (ex == "ex5") {
    job("ex5_subexp_F", "diag", "subexp", {"ex5.F"}, [](Options& o) { o.gamma = "1"; });
  } else if (ex == "ex6") {
    job("ex6_fkz_f", "diag", "fkz", {"ex6.f"}, [](Options& o) {
      o.alpha = "expsqrtlog";
      o.probes = "b(4),b(9)";
    });
  } else if (ex == "oracle") {
    job("oracle_subexp_exp1", "diag", "subexp", {"oracle.exp1"}, none);
  } else {
    throw ParseError("unknown example '" + ex + "'");
  }
  std::vector<std::pair<std::string, DiagnosticReport>> out;
  for (const auto& [key, o] : jobs) {
    const std::string file = key.substr(0, key.find('|'));
    const std::string mode = key.substr(key.find('|') + 1);
    out.emplace_back(file, mode == "diag" ? run_diag(o) : run_verify(o));
  }
  return out;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--n-max", o.n_max, "last interval index of the gallery constructions");
  cmd->add_option("--epsilon", o.epsilon, "gallery epsilon (rational)");
  cmd->add_option("--delta", o.delta, "gallery delta (rational)");
  cmd->add_option("--tilt-gamma", o.tilt_gamma, "tilt of ex5 (rational)");
  cmd->add_option("--weibull-gamma", o.weibull_gamma, "Weibull shape of ex4 (rational)");
  cmd->add_option("--negative-mix", o.negative_mix, "weight of f+ in ex3.f (rational)");
  cmd->add_option("--out", o.out, "output path; stdout when omitted");
  cmd->add_option("--format", o.format, "table, json or csv")
      ->check(CLI::IsMember({"table", "json", "csv"}));
}

void add_scan(CLI::App* cmd, Options& o) {
  cmd->add_option("--gamma", o.gamma, "exponential rate gamma (rational)");
  cmd->add_option("--alpha", o.alpha, "sqrtlog[:c], interval:d, powlog:g, expsqrtlog, fixed:v");
  cmd->add_option("--probes", o.probes, "probe grid, e.g. a10..a40:5,m10..m40,s4,6,a(16,5)");
}

int run(int argc, char** argv) {
  CLI::App app{"Heavy-tail density gallery and subexponentiality diagnostics"};
  app.require_subcommand(1);
  Options o;

  auto* build = app.add_subcommand("build", "write a gallery density as a density-spec file");
  build->add_option("name", o.refs, "gallery name")->required()->expected(1);
  add_common(build, o);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a density at probe points");
  eval_cmd->add_option("density", o.refs, "gallery name or spec file")->required()->expected(1);
  add_common(eval_cmd, o);
  add_scan(eval_cmd, o);

  auto* conv = app.add_subcommand("conv", "evaluate f*g at probe points");
  conv->add_option("densities", o.refs, "f and g")->required()->expected(2);
  add_common(conv, o);
  add_scan(conv, o);

  auto* diag = app.add_subcommand("diag", "run a diagnostic scan");
  diag->add_option("kind", o.kind, "longtail subexp fkz jdec alpha ald ani witness")
      ->required()
      ->check(CLI::IsMember({"longtail", "subexp", "fkz", "jdec", "alpha", "ald", "ani", "witness"}));
  diag->add_option("densities", o.refs, "one density, or f and g for fkz")->required()->expected(1, 2);
  add_common(diag, o);
  add_scan(diag, o);
  diag->add_option("--shifts", o.shifts, "longtail shifts, comma separated rationals");
  diag->add_option("--x0", o.x0, "left end for ald/ani (rational or e<q>)");
  diag->add_option("-K,--K", o.K, "ald violation factor");
  diag->add_option("--count", o.count, "witness count; 0 keeps all");

  auto* verify = app.add_subcommand("verify", "run a lemma verifier");
  verify->add_option("lemma", o.kind, "1 2 4 5 6")->required()->check(CLI::IsMember({"1", "2", "4", "5", "6"}));
  verify->add_option("densities", o.refs, "f and g (one density for 6)")->required()->expected(1, 2);
  add_common(verify, o);
  add_scan(verify, o);
  verify->add_option("--p", o.p, "mixture weight (rational)");
  verify->add_option("--probes-neg", o.probes_neg, "negative probe points for 4/5");

  auto* report = app.add_subcommand("report", "canonical diagnostics of one example");
  report->add_option("example", o.refs, "ex1 .. ex6 or oracle")->required()->expected(1);
  add_common(report, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  if (*build) {
    emit(serialize_density(resolve(o.refs[0], o)), o.out);
  } else if (*eval_cmd || *conv) {
    const PiecewiseDensity f = resolve(o.refs[0], o);
    const auto probes = probes_for(f, o.probes, o);
    if (*eval_cmd) {
      emit(render(pointwise("density", probes, [&](const Probe& p) { return subexp::eval(f, p.x); },
                            {{"density", f.info().name}}),
                  o.format),
           o.out);
    } else {
      const PiecewiseDensity g = resolve(o.refs[1], o);
      emit(render(pointwise("conv", probes, [&](const Probe& p) { return conv_eval(f, g, p.x); },
                            {{"f", f.info().name}, {"g", g.info().name}}),
                  o.format),
           o.out);
    }
  } else if (*diag) {
    emit(render(run_diag(o), o.format), o.out);
  } else if (*verify) {
    const DiagnosticReport r = run_verify(o);
    emit(render(r, o.format), o.out);
    if (!r.ok) return kPrecondition;
  } else if (*report) {
    const auto reports = run_report(o);
    if (o.out.empty()) {
      for (const auto& [name, r] : reports) std::cout << "# " << name << "\n" << render(r, o.format);
    } else {
      std::filesystem::create_directories(o.out);
      const std::map<std::string, std::string> ext = {{"table", ".txt"}, {"json", ".json"}, {"csv", ".csv"}};
      for (const auto& [name, r] : reports)
        for (const auto& [fmt, suffix] : ext) emit(render(r, fmt), o.out + "/" + name + suffix);
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const PreconditionError& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return kPrecondition;
  } catch (const NotFoundError& e) {
    std::cerr << "not found: " << e.what() << "\n";
    return kPrecondition;
  } catch (const ParseError& e) {
    std::cerr << "parse: " << e.what() << "\n";
    return kParse;
  } catch (const NumericError& e) {
    std::cerr << "numeric: " << e.what() << "\n";
    return kNumeric;
  } catch (const NotRepresentable& e) {
    std::cerr << "numeric: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
