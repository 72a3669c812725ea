#include "polyexcess/errors.hpp"
#include "polyexcess/registry.hpp"

#include <doctest.h>

#include <sstream>

using namespace polyexcess;

namespace {

const char* kHeader = "year,month,day,registration_year,sex,age,cause\n";

IngestResult parse(const std::string& body, const IngestConfig& cfg = {}) {
    std::istringstream in(std::string(kHeader) + body);
    return parse_registry(in, cfg, "test.csv");
}

}  // namespace

TEST_SUITE("registry") {

TEST_CASE("a well-formed row maps field by field") {
    const auto r = parse("2022,3,15,2022,male,67,J189\n");
    REQUIRE(r.accepted() == 1);
    const auto& rec = r.records.front();
    CHECK(rec.occurrence == Date{2022, 3, 15});
    CHECK(rec.registration_year == 2022);
    CHECK(rec.sex == Sex::male);
    CHECK(rec.age_years == 67);
    CHECK(rec.cause_code == "J189");
    CHECK(canonicalize(rec, kDefaultNonIllnessPrefixes).week == 11);
}

TEST_CASE("late registration is attributed to the occurrence year") {
    const auto r = parse("2021,12,30,2022,female,80,I219\n");
    REQUIRE(r.accepted() == 1);
    const auto c = canonicalize(r.records.front(), kDefaultNonIllnessPrefixes);
    CHECK(c.occurrence_year == 2021);
    CHECK(c.week == 52);
}

TEST_CASE("malformed rows are logged with reasons and row numbers") {
    const auto r = parse(
        "2021,1,32,2021,male,40,J189\n"
        "2021,2,29,2021,male,40,J189\n"
        "2021,1,5,2020,male,40,J189\n"
        "2021,1,5,x,male,40,J189\n"
        "2021,1,5,2021,robot,40,J189\n"
        "2021,1,5,2021,male,-4,J189\n"
        "2021,1,5,2021,male,40,\n"
        "2021,1,5\n"
        "2021,1,5,2021,unknown,NA,E119\n");
    CHECK(r.rows_read == 9);
    CHECK(r.accepted() == 1);
    REQUIRE(r.rejected() == 8);
    CHECK(r.accepted() + r.rejected() == r.rows_read);
    CHECK(r.rejects[0].reason == "invalid date");
    CHECK(r.rejects[0].row == 1);
    CHECK(r.rejects[0].source == "test.csv");
    CHECK(r.rejects[1].reason == "invalid date");
    CHECK(r.rejects[2].reason == "registered before occurrence");
    CHECK(r.rejects[3].reason == "invalid registration year");
    CHECK(r.rejects[4].reason == "invalid sex");
    CHECK(r.rejects[5].reason == "invalid age");
    CHECK(r.rejects[6].reason == "empty cause code");
    CHECK(r.rejects[7].reason == "short row");
    CHECK(r.rejects[7].row == 8);
    CHECK(r.records.front().sex == Sex::unknown);
    CHECK_FALSE(r.records.front().age_years.has_value());
}

TEST_CASE("a missing mapped column is a configuration error naming it") {
    std::istringstream in("year,month,day,sex,age,cause\n2021,1,1,male,3,A00\n");
    CHECK_THROWS_AS(static_cast<void>(parse_registry(in, IngestConfig{})), ConfigError);
    std::istringstream again("year,month,day,sex,age,cause\n");
    CHECK_THROWS_WITH(static_cast<void>(parse_registry(again, IngestConfig{})),
                      doctest::Contains("registration_year"));
}

TEST_CASE("an unreadable stream is an ingest error") {
    std::istringstream empty("");
    CHECK_THROWS_AS(static_cast<void>(parse_registry(empty, IngestConfig{})), IngestError);
    std::istringstream bad("x");
    bad.setstate(std::ios::badbit);
    CHECK_THROWS_AS(static_cast<void>(parse_registry(bad, IngestConfig{})), IngestError);
}

TEST_CASE("column names, delimiter and codes come from the config") {
    const auto cfg = IngestConfig::from_json({
        {"columns", {{"year", "anio_ocur"}, {"month", "mes_ocurr"}, {"day", "dia_ocurr"},
                     {"registration_year", "anio_regis"}, {"sex", "sexo"}, {"age", "edad"},
                     {"cause", "causa_def"}}},
        {"delimiter", ";"},
        {"age_encoding", "inegi"},
        {"male_codes", {"1"}},
        {"female_codes", {"2"}},
    });
    std::istringstream in(
        "causa_def;sexo;edad;dia_ocurr;mes_ocurr;anio_ocur;anio_regis\n"
        "J189;1;4067;15;3;2022;2022\n"
        "P071;2;2003;1;1;2021;2021\n"
        "X599;2;4998;1;1;2021;2021\n"
        "E119;2;5010;1;1;2021;2021\n");
    const auto r = parse_registry(in, cfg);
    REQUIRE(r.accepted() == 3);
    CHECK(r.records[0].age_years == 67);
    CHECK(r.records[1].age_years == 0);
    CHECK_FALSE(r.records[2].age_years.has_value());
    CHECK(r.rejects.at(0).reason == "invalid age");
    CHECK(IngestConfig::from_json(cfg.to_json()).to_json() == cfg.to_json());
}

TEST_CASE("latin-1 input is read as UTF-8") {
    CHECK(latin1_to_utf8("a\xE9") == "a\xC3\xA9");
    auto cfg = IngestConfig::from_json({{"encoding", "latin-1"}, {"female_codes", {"mujer", "f\xC3\xA9minine"}}});
    std::istringstream in(std::string(kHeader) + "2021,1,1,2021,f\xE9minine,40,A09\n");
    const auto r = parse_registry(in, cfg);
    REQUIRE(r.accepted() == 1);
    CHECK(r.records[0].sex == Sex::female);
    CHECK_THROWS_AS(static_cast<void>(IngestConfig::from_json({{"encoding", "ebcdic"}})), ConfigError);
}

TEST_CASE("cause classification by prefix") {
    CHECK(classify_cause("V892", kDefaultNonIllnessPrefixes) == CauseClass::non_illness);
    CHECK(classify_cause("E119", kDefaultNonIllnessPrefixes) == CauseClass::illness);
    CHECK(classify_cause("Y870", kDefaultNonIllnessPrefixes) == CauseClass::non_illness);
    CHECK(classify_cause("U071", kDefaultNonIllnessPrefixes) == CauseClass::illness);
    const std::vector<std::string> custom{"U07", "X"};
    CHECK(classify_cause("U071", custom) == CauseClass::non_illness);
    CHECK_THROWS_AS(static_cast<void>(classify_cause("", kDefaultNonIllnessPrefixes)), ClassificationError);
}

TEST_CASE("non-illness share per year") {
    std::vector<DeathRecord> records;
    for (int i = 0; i < 100; ++i) {
        records.push_back({{2019, 6, 1}, 2019, Sex::male, 30, i < 11 ? "X700" : "I219"});
    }
    for (int i = 0; i < 10; ++i) records.push_back({{2020, 6, 1}, 2020, Sex::male, 30, "I219"});
    const auto share = non_illness_share_by_year(records, kDefaultNonIllnessPrefixes);
    CHECK(share.at(2019) == doctest::Approx(11.0));
    CHECK(share.at(2020) == 0.0);
    CHECK(share.size() == 2);
    CHECK(non_illness_share_by_year(canonicalize(records, kDefaultNonIllnessPrefixes)) == share);
    CHECK_THROWS_AS(static_cast<void>(non_illness_share_by_year(std::vector<DeathRecord>{}, kDefaultNonIllnessPrefixes)),
                    std::invalid_argument);
}

TEST_CASE("canonical and registry files round trip") {
    std::vector<DeathRecord> records{
        {{2020, 12, 31}, 2021, Sex::female, std::nullopt, "X599"},
        {{2019, 1, 1}, 2019, Sex::unknown, 0, "P071"},
        {{2019, 7, 4}, 2019, Sex::male, 101, "J189"},
    };
    std::stringstream reg;
    write_registry(reg, records);
    const auto back = parse_registry(reg, IngestConfig{});
    REQUIRE(back.accepted() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back.records[i].occurrence == records[i].occurrence);
        CHECK(back.records[i].sex == records[i].sex);
        CHECK(back.records[i].age_years == records[i].age_years);
        CHECK(back.records[i].cause_code == records[i].cause_code);
    }
    const auto canonical = canonicalize(records, kDefaultNonIllnessPrefixes);
    CHECK(canonical[0].week == 53);
    CHECK(canonical[0].cause_class == CauseClass::non_illness);
    std::stringstream io;
    write_canonical(io, canonical);
    CHECK(read_canonical(io) == canonical);
}

TEST_CASE("merging results keeps every row") {
    auto a = parse("2021,1,1,2021,male,1,A00\n2021,1,40,2021,male,1,A00\n");
    auto b = parse("2022,1,1,2022,male,1,A00\n");
    a.merge(std::move(b));
    CHECK(a.accepted() == 2);
    CHECK(a.rejected() == 1);
    CHECK(a.rows_read == 3);
}

}
