#include <doctest.h>

#include <random>

#include "phytosub/csv.hpp"
#include "phytosub/error.hpp"
#include "support.hpp"

using namespace phytosub;

TEST_CASE("csv parsing handles quotes and line endings") {
  auto rows = csv::parse("a,b,c\r\n\"x,y\",\"he said \"\"hi\"\"\",z\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == csv::Row{"a", "b", "c"});
  CHECK(rows[1] == csv::Row{"x,y", "he said \"hi\"", "z"});

  auto multi = csv::parse("\"line\nbreak\",2\n");
  REQUIRE(multi.size() == 1);
  CHECK(multi[0][0] == "line\nbreak");

  CHECK(csv::parse("").empty());
  CHECK_THROWS_AS(csv::parse("\"unterminated\n"), Error);
}

TEST_CASE("csv write/read round trip") {
  std::mt19937 rng(11);
  const std::string alphabet = "ab,\"\n x";
  std::vector<csv::Row> rows;
  for (int r = 0; r < 25; ++r) {
    csv::Row row;
    for (int c = 0; c < 4; ++c) {
      std::string field;
      std::uniform_int_distribution<std::size_t> length(0, 8);
      std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
      const std::size_t n = length(rng);
      for (std::size_t i = 0; i < n; ++i) field.push_back(alphabet[pick(rng)]);
      row.push_back(field);
    }
    rows.push_back(row);
  }
  auto path = testsupport::temp_path("roundtrip.csv");
  csv::write_file(path, rows);
  CHECK(csv::read_file(path) == rows);
}
