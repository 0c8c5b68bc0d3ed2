#include <gtest/gtest.h>

#include <limits>

#include "mixray/io.hpp"

using namespace mixray;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "mixray_test_io";
  fs::create_directories(d);
  return d / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

FieldFile sample() {
  FieldFile f;
  f.config_hash = "0123456789abcdef0123456789abcdef01234567";
  f.dims = {2, 3, 1};
  f.components = 2;
  f.lo = {0.1, -0.3, -0.3};
  f.hi = {0.3, 0.3, 0.3};
  f.data = {1.0, -0.0, 1e-300, -2.5, std::numeric_limits<double>::max(), 3.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  return f;
}

}  // namespace

TEST(FieldFile, BinaryRoundTripIsBitExact) {
  const auto p = scratch("round.mrayf");
  const FieldFile f = sample();
  write_field(p.string(), f);
  const FieldFile g = read_field(p.string());
  EXPECT_EQ(g.version, kVersion);
  EXPECT_EQ(g.config_hash, f.config_hash);
  EXPECT_EQ(g.dims, f.dims);
  EXPECT_EQ(g.n, 3);
  EXPECT_EQ(g.components, 2);
  EXPECT_EQ(g.lo, f.lo);
  EXPECT_EQ(g.hi, f.hi);
  ASSERT_EQ(g.data.size(), f.data.size());
  EXPECT_EQ(std::memcmp(g.data.data(), f.data.data(), 8 * f.data.size()), 0);
}

TEST(FieldFile, HeaderTextAndLittleEndianPayload) {
  const auto p = scratch("layout.mrayf");
  FieldFile f;
  f.dims = {1};
  f.data = {1.0};
  write_field(p.string(), f);
  const std::string s = slurp(p);
  const std::string head = std::string("MRAYF1\nversion ") + kVersion +
                           "\nconfig -\ndims 1\nn 3\ncomponents 1\nlayout row-major\nend\n";
  ASSERT_EQ(s.size(), head.size() + 8);
  EXPECT_EQ(s.substr(0, head.size()), head);
  const unsigned char expect[8] = {0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  EXPECT_EQ(std::memcmp(s.data() + head.size(), expect, 8), 0);
  EXPECT_TRUE(read_field(p.string()).config_hash.empty());
}

TEST(FieldFile, MalformedFilesAreRejected) {
  const auto p = scratch("bad.mrayf");
  write_text(p.string(), "MRAYF2\n");
  EXPECT_THROW(read_field(p.string()), Error);
  write_text(p.string(), "MRAYF1\ndims 2\ncomponents 1\nend\n" + std::string(8, '\0'));
  EXPECT_THROW(read_field(p.string()), Error);
  write_text(p.string(), "MRAYF1\ndims 1\ncomponents 1\nend\n" + std::string(9, '\0'));
  EXPECT_THROW(read_field(p.string()), Error);
  write_text(p.string(), "MRAYF1\ndims 1\ncolour red\nend\n" + std::string(8, '\0'));
  EXPECT_THROW(read_field(p.string()), Error);
  write_text(p.string(), "MRAYF1\ndims 1\nlayout column-major\nend\n" + std::string(8, '\0'));
  EXPECT_THROW(read_field(p.string()), Error);
  write_text(p.string(), "MRAYF1\ndims 1\n");
  EXPECT_THROW(read_field(p.string()), Error);
  FieldFile f = sample();
  f.data.pop_back();
  EXPECT_THROW(write_field(p.string(), f), Error);
  EXPECT_THROW(read_field(scratch("missing.mrayf").string()), Error);
}

TEST(FieldFile, CsvFixture) {
  const FieldFile f = read_field(std::string(MIXRAY_TEST_DATA) + "/field_2x2x1.csv");
  EXPECT_EQ(f.n, 3);
  EXPECT_EQ(f.components, 3);
  EXPECT_EQ(f.dims, (std::vector<long long>{2, 2, 1}));
  ASSERT_EQ(f.data.size(), 12u);
  for (int i = 0; i < 11; ++i) EXPECT_EQ(f.data[i], i + 1.0);
  EXPECT_EQ(f.data[11], 12.5);
}

TEST(FieldFile, CsvGapsAndRaggedRowsAreRejected) {
  const auto p = scratch("gap.csv");
  write_text(p.string(), "i0,c0\n0,1\n2,3\n");
  EXPECT_THROW(read_field(p.string()), Error);
  write_text(p.string(), "i0,c0\n0,1,2\n");
  EXPECT_THROW(read_field(p.string()), Error);
  write_text(p.string(), "c0,c1\n1,2\n");
  EXPECT_THROW(read_field(p.string()), Error);
}

TEST(TextArtifacts, BannerAndJson) {
  EXPECT_EQ(csv_banner("abc"), std::string("# mixray ") + kVersion + " config abc\n");
  EXPECT_EQ(csv_real(0.1), "0.10000000000000001");
  const auto p = scratch("x.json");
  Json j;
  j["b"] = 1;
  j["a"] = {1.5, 2.5};
  write_json(p.string(), j);
  EXPECT_EQ(read_json(p.string()), j);
  EXPECT_EQ(read_json(p.string()).begin().key(), "b");
  write_text(p.string(), "{not json");
  EXPECT_THROW(read_json(p.string()), Error);
}
