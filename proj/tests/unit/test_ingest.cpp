#include "doctest.h"

#include <filesystem>

#include "panelmi/error.hpp"
#include "panelmi/ingest.hpp"
#include "synthetic.hpp"

using namespace panelmi;

namespace {

constexpr const char* kSchema = R"(# two countries, three years
countries = PAK, VNM
years = 2005-2006, 2008
gdp.label = GDP per capita
gdp.capacity = Financial
cost.capacity = Infrastructure
cost.direction = -1
pop.role = auxiliary
)";

}  // namespace

TEST_CASE("schema text") {
  const SchemaFile s = parse_schema(kSchema);
  REQUIRE(s.variables.size() == 3);
  CHECK(s.variables[0].code == "gdp");
  CHECK(s.variables[0].label == "GDP per capita");
  CHECK(s.variables[1].direction == -1);
  CHECK(s.variables[2].role == Role::Auxiliary);
  CHECK(s.variables[2].capacity == Capacity::Auxiliary);
  CHECK(s.years == std::vector<int>{2005, 2006, 2008});
  CHECK(s.countries == std::vector<std::string>{"PAK", "VNM"});
  CHECK(s.is_missing_token("NA"));
  CHECK(s.is_missing_token(""));
  CHECK_FALSE(s.is_missing_token("0"));

  // format/parse round trip
  const SchemaFile again = parse_schema(format_schema(s));
  CHECK(again.variables.size() == 3);
  CHECK(again.variables[1].direction == -1);
  CHECK(again.years == s.years);

  CHECK_THROWS_AS(parse_schema("x.capacity = Technology\nx.direction = 2\n"), ParseError);
  CHECK_THROWS_AS(parse_schema("x.label = no capacity\n"), ParseError);
  CHECK_THROWS_AS(parse_schema("nonsense\n"), ParseError);
}

TEST_CASE("wide csv with missing tokens and grid padding") {
  const SchemaFile s = parse_schema(kSchema);
  const PanelDataset ds = parse_wide_csv(
      "country,year,gdp,cost,pop\n"
      "PAK,2005,1.5,NA,100\n"
      "VNM,2008,2.5,.,\n"
      "PAK,2006,,3,101\n",
      s);
  CHECK(ds.row_count() == 6);
  CHECK(ds.is_full_grid());
  const std::size_t gdp = ds.variable_index("gdp");
  CHECK(ds.cell(*ds.find_row(1, 2), gdp) == 2.5);
  CHECK_FALSE(ds.cell(*ds.find_row(0, 1), gdp).has_value());
  CHECK(ds.missing_count(ds.variable_index("cost")) == 5);
  // VNM 2005 and 2006 and PAK 2008 have no rows at all
  CHECK(ds.missing_count(ds.variable_index("pop")) == 4);
}

TEST_CASE("parse errors name the row and column") {
  const SchemaFile s = parse_schema(kSchema);
  try {
    parse_wide_csv("country,year,gdp\nPAK,2005,1\nVNM,2006,abc\n", s);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == "gdp");
    CHECK(std::string(e.what()).find("abc") != std::string::npos);
  }
  try {
    parse_wide_csv("country,year,gdp\nPAK,20x5,1\n", s);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == "year");
  }
  CHECK_THROWS_AS(parse_wide_csv("country,year,gdp\nPAK,2005,1\nPAK,2005,2\n", s), ParseError);
  CHECK_THROWS_AS(parse_wide_csv("country,year,gdp\nIND,2005,1\n", s), ParseError);
  CHECK_THROWS_AS(parse_wide_csv("country,year,gdp\nPAK,2007,1\n", s), ParseError);
  CHECK_THROWS_AS(parse_wide_csv("country,year,mystery\nPAK,2005,1\n", s), UnknownCodeError);
  CHECK_THROWS_AS(parse_wide_csv("nation,year,gdp\nPAK,2005,1\n", s), ParseError);
}

TEST_CASE("wide and long layouts agree") {
  testing::FactorSpec spec;
  spec.countries = 7;
  spec.years = 5;
  spec.targets = 6;
  spec.auxiliaries = 2;
  spec.seed = 3;
  const PanelDataset ds = testing::factor_panel(spec);
  const SchemaFile schema = SchemaFile::from_dataset(ds);
  const PanelDataset wide = parse_wide_csv(format_wide_csv(ds), schema);
  const PanelDataset lng = parse_long_csv(format_long_csv(ds), schema);
  CHECK(wide.same_as(ds));
  CHECK(lng.same_as(ds));
}

TEST_CASE("file round trip and fixed decimals") {
  const SchemaFile s = parse_schema(kSchema);
  const PanelDataset ds = parse_wide_csv("country,year,gdp,cost,pop\nPAK,2005,0.1,2.345678,7\n", s);
  const auto dir = std::filesystem::temp_directory_path() / "panelmi_ingest_test";
  std::filesystem::remove_all(dir);
  write_wide_csv(ds, dir / "nested" / "panel.csv");
  write_schema(SchemaFile::from_dataset(ds), dir / "schema.txt");
  const PanelDataset back = read_wide_csv(dir / "nested" / "panel.csv", read_schema(dir / "schema.txt"));
  CHECK(back.same_as(ds));

  const std::string fixed = format_wide_csv(ds, 2);
  CHECK(fixed.find("2.35") != std::string::npos);
  CHECK(fixed.find("0.10") != std::string::npos);
  CHECK_THROWS_AS(read_wide_csv(dir / "absent.csv", s), DataError);
  std::filesystem::remove_all(dir);
}
