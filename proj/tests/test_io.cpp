#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "subexp/errors.hpp"
#include "subexp/gallery.hpp"
#include "subexp/probes.hpp"
#include "subexp/spec_io.hpp"

using namespace subexp;

namespace {

bool same(const PiecewiseDensity& a, const PiecewiseDensity& b) {
  if (a.segments().size() != b.segments().size()) return false;
  for (std::size_t i = 0; i < a.segments().size(); ++i) {
    const Segment &s = a.segments()[i], &t = b.segments()[i];
    if (!(s.left == t.left) || !(s.right == t.right) || s.parts.size() != t.parts.size()) return false;
  }
  return a.normalized() == b.normalized() && a.info().scale == b.info().scale &&
         a.info().name == b.info().name && a.info().params == b.info().params;
}

}  // namespace

TEST(SpecIo, RoundTripGallery) {
  GalleryParams p;
  p.n_max = 10;
  for (const std::string& name : gallery_names()) {
    const PiecewiseDensity f = gallery_density(name, p);
    const std::string text = serialize_density(f);
    const PiecewiseDensity g = parse_density(text);
    EXPECT_TRUE(same(f, g)) << name;
    EXPECT_EQ(serialize_density(g), text) << name;
    for (int k : {1, 5, 9}) {
      const ExpReal x = ExpReal::exp(Rational(k));
      EXPECT_EQ(eval(f, x), eval(g, x)) << name << " " << k;
    }
  }
}

TEST(SpecIo, File) {
  const auto path = std::filesystem::temp_directory_path() / "subexp_io_test.json";
  const PiecewiseDensity f = build_oracle_exp(Rational(2));
  write_density_file(path.string(), f);
  EXPECT_EQ(serialize_density(read_density_file(path.string())), serialize_density(f));
  std::filesystem::remove(path);
  EXPECT_THROW(read_density_file("/nonexistent/spec.json"), ParseError);
}

TEST(SpecIo, MalformedInput) {
  EXPECT_THROW(parse_density("not json"), ParseError);
  EXPECT_THROW(parse_density("{}"), ParseError);
  EXPECT_THROW(parse_density(R"({"format":"other","version":1})"), ParseError);
  std::string text = serialize_density(build_oracle_exp(Rational(1)));
  const auto at = text.find("\"linear\"");
  ASSERT_NE(at, std::string::npos);
  std::string bad = text;
  bad.replace(at, 8, "\"cubic\"");
  EXPECT_THROW(parse_density(bad), ParseError);
}

TEST(Probes, Ranges) {
  const auto p = parse_probes("a10..a20:5", "ex1");
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0].label, "a10");
  EXPECT_EQ(p[2].label, "a20");
  EXPECT_TRUE(p[1].x == named_point("ex1", 15, 0));
  const auto q = parse_probes("a16..36:20@5", "ex1");
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0].label, "a16_5");
  EXPECT_TRUE(q[1].x == named_point("ex1", 36, 5));
  EXPECT_EQ(parse_probes("a7", "ex1").size(), 1u);
}

TEST(Probes, SpecialSubsequence) {
  const auto p = parse_probes("s4,6", "ex1");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_TRUE(p[0].x == named_point("ex1", 16, 5));
  EXPECT_TRUE(p[1].x == named_point("ex1", 36, 5));
  const auto b = parse_probes("s2,3", "ex6");
  ASSERT_EQ(b.size(), 1u);
  EXPECT_TRUE(b[0].x == named_point("ex6", 4, 1));
  EXPECT_EQ(special_index("ex4"), 3);
}

TEST(Probes, PointsAndNumbers) {
  const auto p = parse_probes("a(12,3), b(9), 5/2, 1e2", "ex2");
  ASSERT_EQ(p.size(), 4u);
  EXPECT_TRUE(p[0].x == named_point("ex2", 12, 3));
  EXPECT_TRUE(p[1].x == named_point("ex2", 9, 3));
  EXPECT_TRUE(p[2].x == ExpReal(Rational(5, 2)));
  EXPECT_TRUE(p[3].x == ExpReal(Rational(100)));
  EXPECT_EQ(parse_probes("a8", "ex4")[0].label, "a8");
}

TEST(Probes, FlatMidpoints) {
  const Ex1 e = build_ex1();
  const auto m = parse_probes("m10", "ex1", &e.h);
  EXPECT_NEAR(static_cast<double>(m[0].log_x), 10.3577, 1e-4);
  EXPECT_THROW(parse_probes("m10", "ex1"), PreconditionError);
  const PiecewiseDensity exp1 = build_oracle_exp(Rational(1));
  EXPECT_THROW(parse_probes("m10", "ex1", &exp1), PreconditionError);
}

TEST(Probes, Errors) {
  EXPECT_THROW(parse_probes("", "ex1"), ParseError);
  EXPECT_THROW(parse_probes("a20..a10", "ex1"), ParseError);
  EXPECT_THROW(parse_probes("a10..a20:0", "ex1"), ParseError);
  EXPECT_THROW(parse_probes("zz", "ex1"), ParseError);
  EXPECT_THROW(parse_probes("s5,3", "ex1"), ParseError);
  EXPECT_THROW(parse_probes("a10", "oracle"), PreconditionError);
  EXPECT_THROW(parse_probes("a(10,9)", "ex1"), PreconditionError);
}
