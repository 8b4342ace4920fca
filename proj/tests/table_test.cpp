#include <gtest/gtest.h>

#include "cardlab/table.hpp"
#include "test_util.hpp"

namespace cardlab {
namespace {

using testing::TempDir;
using testing::write_file;

Schema cat_num_schema() { return {{"c", ColumnKind::kCategorical}, {"n", ColumnKind::kNumeric}}; }

TEST(TableTest, FirstAppearanceDictionaryEncoding) {
  TempDir dir;
  write_file(dir / "t.csv", "c,n\na,1\nb,2\na,3\n");
  const Table t = ingest_csv(dir / "t.csv", cat_num_schema());
  ASSERT_EQ(t.row_count(), 3u);
  EXPECT_EQ(t.dictionary(0), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.column(0), (std::vector<Value>{0, 1, 0}));
  EXPECT_EQ(t.column(1), (std::vector<Value>{1, 2, 3}));
  EXPECT_TRUE(t.dictionary(1).empty());
}

TEST(TableTest, HeaderOnlyFileIsEmptyTable) {
  TempDir dir;
  write_file(dir / "t.csv", "c,n\n");
  const Table t = ingest_csv(dir / "t.csv", cat_num_schema());
  EXPECT_EQ(t.row_count(), 0u);
  EXPECT_EQ(t.column_count(), 2u);
  EXPECT_EQ(t.data_size_bytes(), 0u);
}

TEST(TableTest, IngestErrors) {
  TempDir dir;
  EXPECT_THROW(ingest_csv(dir / "missing.csv", cat_num_schema()), TableError);

  write_file(dir / "hdr.csv", "c,x\na,1\n");
  EXPECT_THROW(ingest_csv(dir / "hdr.csv", cat_num_schema()), TableError);

  write_file(dir / "bad.csv", "c,n\na,1\nb,oops\n");
  try {
    ingest_csv(dir / "bad.csv", cat_num_schema());
    FAIL() << "expected a parse error";
  } catch (const TableError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'n'"), std::string::npos) << msg;
  }
}

TEST(TableTest, QuotedFieldsAndRoundTrip) {
  TempDir dir;
  write_file(dir / "t.csv", "c,n\n\"x, y\",1.5\n\"say \"\"hi\"\"\",-2\n");
  const Table t = ingest_csv(dir / "t.csv", cat_num_schema());
  EXPECT_EQ(t.decode(0, 0), "x, y");
  EXPECT_EQ(t.decode(0, 1), "say \"hi\"");

  write_csv(t, dir / "out.csv");
  write_schema_json(t.schema(), dir / "schema.json");
  const Table back = ingest_csv(dir / "out.csv", read_schema_json(dir / "schema.json"));
  EXPECT_EQ(back.schema(), t.schema());
  EXPECT_EQ(back.column(0), t.column(0));
  EXPECT_EQ(back.column(1), t.column(1));
  EXPECT_EQ(back.dictionary(0), t.dictionary(0));
}

TEST(TableTest, DictionaryRoundTrip) {
  const Table t(cat_num_schema(), {{0, 1, 2, 1}, {5, 6, 7, 8}}, {{"red", "green", "blue"}, {}});
  for (const auto& s : t.dictionary(0)) EXPECT_EQ(t.decode(0, t.encode(0, s)), s);
  EXPECT_THROW(t.encode(0, "purple"), TableError);
}

TEST(TableTest, ConstructorRejectsBrokenInvariants) {
  EXPECT_THROW(Table::numeric({"a", "a"}, {{1}, {2}}), TableError);
  EXPECT_THROW(Table::numeric({"a", "b"}, {{1, 2}, {2}}), TableError);
  EXPECT_THROW(Table(cat_num_schema(), {{0, 3}, {1, 2}}, {{"x", "y"}, {}}), TableError);
  EXPECT_THROW(Table(cat_num_schema(), {{0, 1}, {1, 2}}, {{"x", "x"}, {}}), TableError);
  EXPECT_THROW(Table(cat_num_schema(), {{0, 0.5}, {1, 2}}, {{"x", "y"}, {}}), TableError);
}

TEST(TableTest, DomainStats) {
  const Table t = testing::two_columns({0, 0, 0}, {1, 5, 3});
  const auto a = domain_stats(t, 0);
  EXPECT_EQ(a.min, 0);
  EXPECT_EQ(a.max, 0);
  EXPECT_EQ(a.size, 0);
  EXPECT_EQ(a.distinct, 1u);
  const auto b = domain_stats(t, 1);
  EXPECT_EQ(b.min, 1);
  EXPECT_EQ(b.max, 5);
  EXPECT_EQ(b.size, 4);
  EXPECT_EQ(b.distinct, 3u);
  EXPECT_EQ(t.stats(1).distinct, 3u);

  EXPECT_THROW(domain_stats(Table::numeric({"a"}, {{}}), 0), TableError);
  EXPECT_THROW(domain_stats(t, 2), TableError);
}

TEST(TableTest, DataSizeConvention) {
  const Table t = testing::two_columns({1, 2, 3}, {4, 5, 6});
  EXPECT_EQ(t.data_size_bytes(), 3u * 2u * 4u);
}

TEST(TableTest, SliceSelectAppend) {
  const Table t = testing::two_columns({1, 2, 3, 4}, {5, 6, 7, 8});
  const Table s = t.slice(1, 3);
  EXPECT_EQ(s.column(0), (std::vector<Value>{2, 3}));
  const Table r = t.select_rows({3, 0});
  EXPECT_EQ(r.column(1), (std::vector<Value>{8, 5}));
  const Table both = t.append(r);
  EXPECT_EQ(both.row_count(), 6u);
  EXPECT_EQ(both.column(0).back(), 1);
  EXPECT_EQ(both.stats(0).max, 4);
  EXPECT_THROW(t.append(testing::one_column({1})), TableError);
}

TEST(TableTest, FormatValueShortestRoundTrip) {
  EXPECT_EQ(format_value(3), "3");
  EXPECT_EQ(format_value(0.1), "0.1");
  EXPECT_EQ(std::stod(format_value(1.0 / 3)), 1.0 / 3);
}

}  // namespace
}  // namespace cardlab
