#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>

#include "langdist/csv.hpp"
#include "langdist/distance_matrix.hpp"
#include "langdist/error.hpp"
#include "langdist/io.hpp"
#include "langdist/parallel.hpp"
#include "langdist/rng.hpp"

using namespace langdist;
namespace fs = std::filesystem;

TEST(Csv, QuotesAndCrlf) {
  const auto t = parse_csv("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\r\n3,\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x,1");
  EXPECT_EQ(t.rows[0][1], "say \"hi\"");
  EXPECT_EQ(t.rows[1][1], "");
  EXPECT_EQ(*t.column("b"), 1u);
  EXPECT_FALSE(t.column("c").has_value());
  EXPECT_EQ(csv_row({"a,b", "c"}), "\"a,b\",c\n");
}

TEST(Csv, DoubleRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 12345678.9}) {
    EXPECT_EQ(parse_double(format_double(v), "t"), v);
  }
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_THROW(parse_double("abc", "t"), Error);
  EXPECT_EQ(parse_int("42", "t"), 42);
}

TEST(DistanceMatrixCsv, RoundTripWithMissing) {
  DistanceMatrix m;
  m.languages = {"en", "de"};
  m.values.resize(2, 2);
  m.values << 0, 0.25, NAN, 0;
  const auto text = to_csv(m);
  EXPECT_EQ(text, "language,en,de\nen,0,0.25\nde,,0\n");
  const auto back = distance_matrix_from_csv(text);
  EXPECT_EQ(back.languages, m.languages);
  EXPECT_TRUE(std::isnan(back.values(1, 0)));
  EXPECT_EQ(back.at("en", "de"), 0.25);
  EXPECT_THROW(distance_matrix_from_csv("language,en\nde,0\n"), Error);
}

TEST(Io, AtomicWriteAndDigest) {
  const fs::path dir = fs::temp_directory_path() / "langdist_io_test";
  fs::create_directories(dir);
  const std::string path = (dir / "out.txt").string();
  write_file_atomic(path, "abc");
  EXPECT_EQ(read_file(path), "abc");
  EXPECT_EQ(file_sha256(path), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  EXPECT_THROW(read_file((dir / "missing").string()), Error);
  fs::remove_all(dir);
}

TEST(Rng, SubstreamsIndependentAndStable) {
  Rng a = substream(1, "x"), b = substream(1, "x"), c = substream(1, "y"), d = substream(2, "x");
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
  EXPECT_NE(va, d());
  EXPECT_NE(substream(1, "x", 0)(), substream(1, "x", 1)());
}

TEST(Rng, Helpers) {
  Rng rng = substream(3, "h");
  std::vector<int> counts(5, 0);
  double sum = 0, sq = 0;
  for (int i = 0; i < 20000; ++i) {
    ++counts[uniform_index(rng, 5)];
    const double u = uniform_unit(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double z = standard_normal(rng);
    sum += z;
    sq += z * z;
  }
  for (int c : counts) EXPECT_NEAR(c, 4000, 300);
  EXPECT_NEAR(sum / 20000, 0.0, 0.05);
  EXPECT_NEAR(sq / 20000, 1.0, 0.05);
  std::vector<int> v{1, 2, 3, 4, 5};
  shuffle(v, rng);
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<int>{1, 2, 3, 4, 5}));
}

TEST(Parallel, CoversAllAndRethrows) {
  std::vector<int> hit(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 5) throw DataError("boom");
                            }),
               DataError);
  std::atomic<int> n{0};
  parallel_for(0, 0, [&](std::size_t) { ++n; });
  EXPECT_EQ(n.load(), 0);
}
