#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "datos/libsvm.hpp"

namespace datos {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t error_line(const std::string& text) {
  try {
    parse_libsvm(text);
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line " + std::to_string(e.line())), std::string::npos);
    return e.line();
  }
  return 0;
}

TEST(ParseLibsvm, SingleRow) {
  const Dataset data = parse_libsvm("1 3:2.5 7:-1\n");
  ASSERT_EQ(data.rows.size(), 1u);
  EXPECT_EQ(data.rows[0].label, 1.0);
  const std::vector<std::pair<std::size_t, double>> expected = {{2, 2.5}, {6, -1.0}};
  EXPECT_EQ(data.rows[0].features, expected);
  EXPECT_EQ(data.dim, 7u);
}

TEST(ParseLibsvm, EmptyInput) {
  const Dataset data = parse_libsvm("");
  EXPECT_TRUE(data.rows.empty());
  EXPECT_EQ(data.dim, 0u);
}

TEST(ParseLibsvm, SignedLabelsRoundTrip) {
  const Dataset data = parse_libsvm("+1 1:0.5\n-1 2:0.25\n");
  ASSERT_EQ(data.rows.size(), 2u);
  EXPECT_EQ(data.dim, 2u);
  EXPECT_EQ(parse_libsvm(serialize_libsvm(data)), data);
}

TEST(ParseLibsvm, CommentsAndBlankLines) {
  const Dataset data = parse_libsvm("# header\n\n1 1:1 # trailing\n   \n-1\n");
  ASSERT_EQ(data.rows.size(), 2u);
  EXPECT_TRUE(data.rows[1].features.empty());
}

TEST(ParseLibsvm, MalformedLinesAreNamed) {
  EXPECT_EQ(error_line("1 1:1\nabc 2:1\n"), 2u);
  EXPECT_EQ(error_line("1 1:1\n1 2:1\n-1 3\n"), 3u);
  EXPECT_EQ(error_line("1 0:1\n"), 1u);
  EXPECT_EQ(error_line("1 1:1\n\n1 2:x\n"), 3u);
  EXPECT_EQ(error_line("1 1:1 1:2\n"), 1u);
  EXPECT_EQ(error_line("1 -4:1\n"), 1u);
  EXPECT_EQ(error_line("1 a:1\n"), 1u);
}

TEST(ParseLibsvm, FixtureRoundTrip) {
  const std::string text = read_file(std::string(DATOS_TEST_DATA_DIR) + "/fixture100.libsvm");
  const Dataset data = parse_libsvm(text);
  EXPECT_EQ(data.rows.size(), 100u);
  EXPECT_EQ(serialize_libsvm(data), text);
  EXPECT_EQ(parse_libsvm(serialize_libsvm(data)), data);
}

TEST(ParseLibsvm, PropertyRoundTripRandomDatasets) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> count(0, 6);
  std::uniform_int_distribution<int> exponent(-300, 300);
  for (int trial = 0; trial < 30; ++trial) {
    Dataset data;
    for (int r = 0; r < 1 + trial; ++r) {
      SparseRow row;
      row.label = normal(rng);
      std::size_t index = 0;
      for (int k = count(rng); k > 0; --k) {
        index += 1 + static_cast<std::size_t>(count(rng));
        row.features.emplace_back(index, normal(rng) * std::pow(10.0, exponent(rng)));
        data.dim = std::max(data.dim, index + 1);
      }
      data.rows.push_back(row);
    }
    EXPECT_EQ(parse_libsvm(serialize_libsvm(data)), data);
  }
}

Dataset rows(std::size_t n) {
  Dataset data;
  data.dim = 1;
  for (std::size_t i = 0; i < n; ++i) data.rows.push_back(SparseRow{static_cast<double>(i), {{0, 1.0}}});
  return data;
}

TEST(PartitionDataset, EvenSplit) {
  const Partition p = partition_dataset(rows(4), 2);
  ASSERT_EQ(p.shards.size(), 2u);
  EXPECT_EQ(p.shards[0].rows[0].label, 0.0);
  EXPECT_EQ(p.shards[0].rows[1].label, 1.0);
  EXPECT_EQ(p.shards[1].rows[0].label, 2.0);
  EXPECT_EQ(p.shards[1].rows[1].label, 3.0);
  EXPECT_TRUE(p.warning.empty());
}

TEST(PartitionDataset, TruncatesWithWarning) {
  const Partition p = partition_dataset(rows(5), 2);
  EXPECT_EQ(p.shards[0].rows.size(), 2u);
  EXPECT_EQ(p.shards[1].rows.size(), 2u);
  EXPECT_EQ(p.dropped, 1u);
  EXPECT_FALSE(p.warning.empty());
}

TEST(PartitionDataset, TwentyEqualShards) {
  const Partition p = partition_dataset(rows(6000), 20);
  ASSERT_EQ(p.shards.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    ASSERT_EQ(p.shards[i].rows.size(), 300u);
    EXPECT_EQ(p.shards[i].rows.front().label, static_cast<double>(300 * i));
  }
}

TEST(PartitionDataset, TooManyAgents) {
  EXPECT_THROW(partition_dataset(rows(3), 4), ConfigError);
  EXPECT_THROW(partition_dataset(rows(3), 0), ConfigError);
}

}  // namespace
}  // namespace datos
