#include <doctest.h>

#include <numeric>
#include <sstream>

#include "econet/csv.hpp"
#include "econet/ingest.hpp"
#include "econet/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace econet;
using fixture::write_text;

TEST_CASE("csv reader handles quotes, CRLF and a BOM") {
    csv::Reader r("\xEF\xBB\xBF" "a,b\r\n\"x,1\",\"he said \"\"hi\"\"\"\r\n\"multi\nline\",z\n");
    std::vector<std::string> f;
    REQUIRE(r.next(f));
    CHECK(f == std::vector<std::string>{"a", "b"});
    REQUIRE(r.next(f));
    CHECK(f == std::vector<std::string>{"x,1", "he said \"hi\""});
    CHECK(r.line() == 2);
    REQUIRE(r.next(f));
    CHECK(f == std::vector<std::string>{"multi\nline", "z"});
    CHECK(r.line() == 3);
    CHECK_FALSE(r.next(f));
}

TEST_CASE("csv writer quotes only when needed and round-trips") {
    std::ostringstream os;
    csv::Writer w(os);
    w.field("plain").field("a,b").field("q\"q").field(std::int64_t{-5}).field(0.1).field(std::optional<double>{});
    w.end_row();
    CHECK(os.str() == "plain,\"a,b\",\"q\"\"q\",-5,0.1,\n");
    csv::Reader r(os.str());
    std::vector<std::string> f;
    REQUIRE(r.next(f));
    CHECK(f == std::vector<std::string>{"plain", "a,b", "q\"q", "-5", "0.1", ""});
}

TEST_CASE("number parsing is strict") {
    CHECK(csv::parse_int("42") == 42);
    CHECK(csv::parse_int("+7") == 7);
    CHECK_FALSE(csv::parse_int("4.2"));
    CHECK_FALSE(csv::parse_int(""));
    CHECK_FALSE(csv::parse_int("12abc"));
    CHECK(csv::parse_double("1e3") == 1000.0);
    CHECK_FALSE(csv::parse_double("nan"));
    CHECK_FALSE(csv::parse_double("inf"));
    CHECK(csv::format_double(1.0 / 3.0) == "0.333333333333");
    CHECK(csv::format_double(0.0) == "0");
}

TEST_CASE("dates are validated") {
    CHECK(parse_iso_date("2012-02-29").has_value());
    CHECK_FALSE(parse_iso_date("2011-02-29"));
    CHECK_FALSE(parse_iso_date("2011-13-01"));
    CHECK_FALSE(parse_iso_date("2011-1-01"));
    CHECK(format_iso_date({2009, 3, 7}) == "2009-03-07");
    CHECK(parse_year_range("2003..2014") == YearRange{2003, 2014});
    CHECK(parse_year_range("2010") == YearRange{2010, 2010});
    CHECK_FALSE(parse_year_range("2014..2003"));
}

TEST_CASE("directories load and reject bad references") {
    const auto dir = oracle::fresh_dir("ingest_dirs");
    fixture::write_small_directories(dir);
    const auto cities = load_cities(dir / "cities.csv");
    CHECK(cities.size() == 3);
    CHECK(cities.at(CityId{3}).name == "Gamma, City");
    CHECK(cities.at(CityId{3}).region == Region::South);
    const auto firms = load_firms(dir / "firms.csv", cities);
    CHECK(firms.size() == 5);
    CHECK(firms.at(FirmId{40}).public_admin);
    CHECK_THROWS_AS(firms.at(FirmId{99}), DataError);

    write_text(dir / "bad_firms.csv", std::string(fixture::kFirmsHeader) + "1,99,0\n");
    CHECK_THROWS_AS(load_firms(dir / "bad_firms.csv", cities), DataError);
    write_text(dir / "bad_cities.csv", std::string(fixture::kCitiesHeader) + "1,A,S,Atlantis,0\n");
    CHECK_THROWS_AS(load_cities(dir / "bad_cities.csv"), DataError);
    write_text(dir / "dup_cities.csv", std::string(fixture::kCitiesHeader) + "1,A,S,North,0\n1,B,S,North,0\n");
    CHECK_THROWS_AS(load_cities(dir / "dup_cities.csv"), DataError);
}

TEST_CASE("load_transactions rejects rows individually") {
    const auto dir = oracle::fresh_dir("ingest_tx");
    fixture::write_small_directories(dir);
    const auto firms = load_firms(dir / "firms.csv", load_cities(dir / "cities.csv"));

    SUBCASE("one negative amount among three rows") {
        write_text(dir / "tx.csv", std::string(fixture::kTxHeader) +
                                       "2010-01-05,10,20,500\n"
                                       "2010-02-05,20,30,-3\n"
                                       "2010-03-05,30,10,700\n");
        const auto load = load_transactions(dir / "tx.csv", firms, {2010, 2010});
        CHECK(load.records.size() == 2);
        REQUIRE(load.report.rejected() == 1);
        CHECK(load.report.rejections[0].reason == "non-positive amount");
        CHECK(load.report.rejections[0].line == 3);
        CHECK(load.records[1].amount == 700);
    }
    SUBCASE("empty file with a header") {
        write_text(dir / "tx.csv", fixture::kTxHeader);
        const auto load = load_transactions(dir / "tx.csv", firms, {2010, 2010});
        CHECK(load.records.empty());
        CHECK(load.report.rejected() == 0);
        CHECK(load.report.total_rows == 0);
    }
    SUBCASE("every rejection reason") {
        write_text(dir / "tx.csv", std::string(fixture::kTxHeader) +
                                       "2010-01-05,10,20\n"            // column count
                                       "2010-02-30,10,20,5\n"          // date
                                       "2010-01-05,x,20,5\n"           // firm id
                                       "2010-01-05,10,20,5.5\n"        // amount
                                       "2010-01-05,10,20,0\n"          // non-positive
                                       "2010-01-05,10,10,5\n"          // self transfer
                                       "2010-01-05,10,99,5\n"          // unknown firm
                                       "2009-12-31,10,20,5\n"          // window
                                       "2010-12-31,10,11,9\n");        // ok (same city)
        const auto load = load_transactions(dir / "tx.csv", firms, {2010, 2011});
        CHECK(load.records.size() == 1);
        CHECK(load.report.total_rows == 9);
        CHECK(load.report.accepted + load.report.rejected() == load.report.total_rows);
        for (const char* reason : {reason::kColumnCount, reason::kMalformedDate, reason::kMalformedFirm,
                                   reason::kNonNumericAmount, reason::kNonPositiveAmount, reason::kSelfTransfer,
                                   reason::kUnknownFirm, reason::kOutsideWindow})
            CHECK(load.report.rejected_by_reason.at(reason) == 1);
    }
    SUBCASE("wrong header or missing file is fatal") {
        write_text(dir / "tx.csv", "date,payer,payee,amount\n");
        CHECK_THROWS_AS(load_transactions(dir / "tx.csv", firms, {2010, 2010}), DataError);
        CHECK_THROWS_AS(load_transactions(dir / "nope.csv", firms, {2010, 2010}), DataError);
    }
}

TEST_CASE("ten synthetic transactions sum to the generator ledger") {
    SynthConfig cfg;
    cfg.n_cities = 10;
    cfg.n_firms = 40;
    cfg.years = {2010, 2010};
    auto data = generate(cfg);
    REQUIRE(data.transactions.size() >= 10);
    data.transactions.resize(10);
    const auto dir = oracle::fresh_dir("ingest_ledger");
    write_dataset(data, dir);
    const auto firms = load_firms(dir / "firms.csv", load_cities(dir / "cities.csv"));
    const auto load = load_transactions(dir / "transactions.csv", firms, cfg.years);
    CHECK(load.records.size() == 10);
    CHECK(load.records == data.transactions);
    Cents sum = 0;
    for (const auto& t : load.records) sum += t.amount;
    CHECK(sum == data.ledger_total());
}

TEST_CASE("public administration filter") {
    FirmDirectory firms;
    firms.add(FirmId{1}, {CityId{1}, false});
    firms.add(FirmId{2}, {CityId{1}, true});
    firms.add(FirmId{3}, {CityId{2}, false});
    firms.add(FirmId{4}, {CityId{2}, true});
    auto tx = [](int payer, int payee, Cents a) { return TransactionRecord{{2010, 1, 1}, FirmId{payer}, FirmId{payee}, a}; };

    SUBCASE("mixed six records keep the four private payees in order") {
        const std::vector<TransactionRecord> in = {tx(1, 3, 1), tx(3, 2, 2), tx(2, 1, 3),
                                                   tx(1, 4, 4), tx(4, 3, 5), tx(3, 1, 6)};
        const auto out = filter_public_administration(in, firms);
        const std::vector<TransactionRecord> expected = {tx(1, 3, 1), tx(2, 1, 3), tx(4, 3, 5), tx(3, 1, 6)};
        CHECK(out == expected);
        CHECK(filter_public_administration(out, firms) == out);
    }
    SUBCASE("all public payees") {
        CHECK(filter_public_administration({tx(1, 2, 1), tx(3, 4, 1)}, firms).empty());
    }
    SUBCASE("no public payees") {
        const std::vector<TransactionRecord> in = {tx(1, 3, 1), tx(3, 1, 2)};
        CHECK(filter_public_administration(in, firms) == in);
    }
    SUBCASE("unknown firm is an error") {
        CHECK_THROWS_AS(filter_public_administration({tx(1, 9, 1)}, firms), DataError);
    }
}

TEST_CASE("load_covariates validates ranges and keys") {
    const auto dir = oracle::fresh_dir("ingest_cov");
    fixture::write_small_directories(dir);
    const auto cities = load_cities(dir / "cities.csv");
    const std::string good = "1,2010,1000,0.1,0.5,0.4,0.7,10,100,5,1,2,3,1,2,3,4,5\n";

    SUBCASE("gini above one is rejected with its reason") {
        write_text(dir / "cov.csv", std::string(fixture::kCovHeader) + good +
                                        "2,2010,1000,0.1,0.5,1.2,0.7,10,100,5,1,2,3,1,2,3,4,5\n");
        const auto load = load_covariates(dir / "cov.csv", cities);
        CHECK(load.panel.size() == 1);
        REQUIRE(load.report.rejected() == 1);
        CHECK(load.report.rejections[0].reason == "gini out of [0,1]");
    }
    SUBCASE("missing cells are absent, not zero") {
        write_text(dir / "cov.csv", std::string(fixture::kCovHeader) + "1,2010,,0.1,0.5,0.4,,10,100,5,1,,3,1,2,3,4,5\n");
        const auto load = load_covariates(dir / "cov.csv", cities);
        const auto* row = load.panel.find(CityId{1}, 2010);
        REQUIRE(row);
        CHECK_FALSE(row->gdp.has_value());
        CHECK_FALSE(row->hdi.has_value());
        CHECK_FALSE(row->sector_credit[1].has_value());
        CHECK(row->sector_credit[2] == 3);
    }
    SUBCASE("other per-row rejections") {
        write_text(dir / "cov.csv", std::string(fixture::kCovHeader) +
                                        "9,2010,1000,0.1,0.5,0.4,0.7,10,100,5,1,2,3,1,2,3,4,5\n"
                                        "1,2010,1000,0.1,0.5,0.4,1.5,10,100,5,1,2,3,1,2,3,4,5\n"
                                        "1,2011,1000,-0.1,0.5,0.4,0.7,10,100,5,1,2,3,1,2,3,4,5\n"
                                        "1,2012,1000,0.1,0.5,0.4,0.7,-10,100,5,1,2,3,1,2,3,4,5\n"
                                        "1,2013,abc,0.1,0.5,0.4,0.7,10,100,5,1,2,3,1,2,3,4,5\n");
        const auto load = load_covariates(dir / "cov.csv", cities);
        CHECK(load.panel.size() == 0);
        CHECK(load.report.rejected_by_reason.at("unknown city") == 1);
        CHECK(load.report.rejected_by_reason.at("hdi out of [0,1]") == 1);
        CHECK(load.report.rejected_by_reason.at("exports_over_gdp negative") == 1);
        CHECK(load.report.rejected_by_reason.at("negative count or money") == 1);
        CHECK(load.report.rejected_by_reason.at("non-numeric value") == 1);
    }
    SUBCASE("duplicate key is fatal and names the key") {
        write_text(dir / "cov.csv", std::string(fixture::kCovHeader) + good + good);
        try {
            load_covariates(dir / "cov.csv", cities);
            FAIL("expected a DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("city 1, year 2010") != std::string::npos);
        }
    }
}

TEST_CASE("synthetic covariates give one row per city and year") {
    SynthConfig cfg;
    cfg.n_cities = 20;
    cfg.n_firms = 200;
    cfg.years = {2010, 2013};
    const auto dir = oracle::fresh_dir("ingest_cov_synth");
    write_dataset(generate(cfg), dir);
    const auto cities = load_cities(dir / "cities.csv");
    const auto load = load_covariates(dir / "covariates.csv", cities);
    // Count data lines independently of the CSV reader.
    const auto text = fixture::read_text(dir / "covariates.csv");
    const auto lines = std::count(text.begin(), text.end(), '\n') - 1;
    CHECK(lines == 20 * 4);
    CHECK(load.panel.size() == static_cast<std::size_t>(lines));
    CHECK(load.report.rejected() == 0);
}

TEST_CASE("loading is deterministic") {
    const auto dir = oracle::fresh_dir("ingest_det");
    SynthConfig cfg;
    cfg.n_cities = 10;
    cfg.n_firms = 100;
    cfg.years = {2010, 2011};
    write_dataset(generate(cfg), dir);
    const auto firms = load_firms(dir / "firms.csv", load_cities(dir / "cities.csv"));
    const auto a = load_transactions(dir / "transactions.csv", firms, cfg.years);
    const auto b = load_transactions(dir / "transactions.csv", firms, cfg.years);
    CHECK(a.records == b.records);
    CHECK(a.report.accepted == b.report.accepted);
}
