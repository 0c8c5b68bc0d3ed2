#include <gtest/gtest.h>

#include "mixray/config.hpp"

using namespace mixray;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(BlobHash, MatchesGitObjectIds) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Config, DefaultsAndTypedAccess) {
  const auto c = parse_config("");
  EXPECT_EQ(c.text("experiment", "kind"), "T1");
  EXPECT_EQ(c.real("experiment", "F"), 5.0);
  EXPECT_EQ(c.real("cutoff", "width"), 0.3);
  EXPECT_EQ(c.integer("quadrature", "radial"), 8);
  EXPECT_EQ(c.integers("grid", "nodes"), std::vector<long long>{8});
  EXPECT_EQ(c.reals("layers", "levels"), (std::vector<double>{0.2, 0.3}));
  EXPECT_FALSE(c.flag("chart", "concave"));
  EXPECT_EQ(c.line("experiment", "F"), 0);
}

TEST(Config, CommentsSectionsAndLineNumbers) {
  const auto c = parse_config(
      "# header\n"
      "[experiment]\n"
      "kind = L11\n"
      "\n"
      "; full-line comment\n"
      "F=2.5\n"
      "[chart]\n"
      "concave = yes\n");
  EXPECT_EQ(c.real("experiment", "F"), 2.5);
  EXPECT_EQ(c.line("experiment", "F"), 6);
  EXPECT_TRUE(c.flag("chart", "concave"));
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_NE(error_of("[quadrature]\nquadratur_order = 3\n").find("line 2: unknown key 'quadratur_order'"),
            std::string::npos);
  EXPECT_NE(error_of("[nosuch]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("F = 1\n").find("before any section"), std::string::npos);
  EXPECT_NE(error_of("[experiment]\nF = 1\nF = 2\n").find("duplicate key"), std::string::npos);
  EXPECT_NE(error_of("[experiment]\nF = -1\n").find("outside"), std::string::npos);
  EXPECT_NE(error_of("[experiment]\nF = five\n").find("expected a number"), std::string::npos);
  EXPECT_NE(error_of("[experiment]\nkind = L2\n").find("is not one of"), std::string::npos);
  EXPECT_NE(error_of("[experiment\n").find("malformed section"), std::string::npos);
  EXPECT_NE(error_of("[experiment]\nF\n").find("expected key = value"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nlo = 0.1,0.2\n").find("expected 3 values"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nlo = 0,-1,-1\n").find("x must stay positive"), std::string::npos);
  EXPECT_NE(error_of("[layers]\nlevels = 0.3,0.2\n").find("levels must increase"), std::string::npos);
  EXPECT_NE(error_of("[chart]\nkind = grid-sampled\n").find("a file is required"), std::string::npos);
  EXPECT_NE(error_of("[chart]\ndepth = 2\n").find("smaller than the radius"), std::string::npos);
  EXPECT_THROW(load_config("/nonexistent/run.ini"), ConfigError);
}

TEST(Config, HashIgnoresFormattingAndRunLocation) {
  const auto a = parse_config("[experiment]\nF = 5.0\nthreads = 4\noutput = /tmp/a\n");
  const auto b = parse_config("[experiment]\nF=5\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 40u);
  EXPECT_NE(a.canonical(), b.canonical());
  const auto c = parse_config("[experiment]\nF = 4\n");
  EXPECT_NE(a.hash(), c.hash());
}

TEST(Config, CanonicalTextRoundTrips) {
  const auto a = parse_config("[experiment]\nkind = L11\n[grid]\nnodes = 6,7,8\n[field]\nwidth = 0.1\n");
  const auto b = parse_config(a.canonical());
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(a.hash(), b.hash());
}

TEST(Config, OverridesAreValidated) {
  auto c = parse_config("");
  override_key(c, "experiment", "F", "7");
  EXPECT_EQ(c.real("experiment", "F"), 7.0);
  EXPECT_THROW(override_key(c, "experiment", "Fx", "7"), ConfigError);
  EXPECT_THROW(override_key(c, "grid", "nodes", "3"), ConfigError);
}
