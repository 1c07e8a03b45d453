#include "fastread/corpus.hpp"
#include "fastread/csv.hpp"

#include "support/synthetic.hpp"

#include <doctest.h>

using namespace fastread;

namespace {

const char* kHeader = "Document Title,Abstract,Year,PDF Link";

CorpusError::Kind kind_of(std::string_view text) {
    try {
        parse_csv(text);
    } catch (const CorpusError& e) {
        return e.kind();
    }
    FAIL("expected a CorpusError");
    return CorpusError::Kind::io;
}

std::string message_of(std::string_view text) {
    try {
        parse_csv(text);
    } catch (const CorpusError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("csv reader handles quoting, CRLF and a BOM") {
    const auto records = csv::parse("\xEF\xBB\xBF" "a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,\"two\nlines\",3\r\n");
    REQUIRE(records.size() == 2);
    CHECK(records[0].fields == csv::Row{"a", "b,c", "say \"hi\""});
    CHECK(records[1].fields == csv::Row{"1", "two\nlines", "3"});
    CHECK(records[1].line == 2);
}

TEST_CASE("csv reader rejects an unterminated quote with its line") {
    try {
        csv::parse("a,b\n\"open,x\n");
        FAIL("no error");
    } catch (const csv::ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("csv writer round-trips awkward fields") {
    const csv::Row row{"plain", "comma,inside", "quote\"inside", "line\nbreak", " edge ", ""};
    const auto back = csv::parse(csv::format_row(row));
    REQUIRE(back.size() == 1);
    CHECK(back[0].fields == row);
}

TEST_CASE("header plus two rows gives ids 0 and 1") {
    const Corpus c = parse_csv(std::string(kHeader) +
                               "\nFirst,Some text,2001,http://a\nSecond,,2002,http://b\n");
    REQUIRE(c.size() == 2);
    CHECK(c[0].id == 0);
    CHECK(c[1].id == 1);
    CHECK(c[0].title == "First");
    CHECK(c[1].abstract.empty());
    CHECK(c[1].year == 2002);
    CHECK(c[0].pdf_link == "http://a");
    CHECK(c[0].code == Code::undetermined);
}

TEST_CASE("header-only file is an empty corpus") {
    CHECK(kind_of(kHeader) == CorpusError::Kind::empty);
    CHECK(kind_of(std::string(kHeader) + "\n") == CorpusError::Kind::empty);
}

TEST_CASE("missing required column is named") {
    CHECK(kind_of("Document Title,Abstract,Year\nx,y,2000\n") == CorpusError::Kind::format);
    CHECK(message_of("Document Title,Abstract,Year\nx,y,2000\n").find("PDF Link") != std::string::npos);
    CHECK(message_of("Title,Abstract,Year,PDF Link\nx,y,2000,z\n").find("Document Title") !=
          std::string::npos);
    CHECK(kind_of("") == CorpusError::Kind::format);
}

TEST_CASE("row with the wrong field count reports its row number") {
    const std::string text = std::string(kHeader) + "\na,b,2000,c\nonly,three,fields\n";
    CHECK(kind_of(text) == CorpusError::Kind::row);
    CHECK(message_of(text).find("row 2") != std::string::npos);
}

TEST_CASE("label column is optional") {
    const Corpus unlabeled = parse_csv(std::string(kHeader) + "\na,b,2000,c\n");
    CHECK_FALSE(unlabeled.simulation_capable());
    CHECK_FALSE(unlabeled[0].oracle_label.has_value());
    CHECK_FALSE(stats(unlabeled).relevant.has_value());
    CHECK(stats(unlabeled).candidates == 1);

    const Corpus labeled = parse_csv(std::string(kHeader) + ",label\na,b,2000,c,yes\nd,e,,f,No\n");
    CHECK(labeled.simulation_capable());
    CHECK(labeled.fully_labeled());
    CHECK(labeled[0].oracle_label == Label::relevant);
    CHECK(labeled[1].oracle_label == Label::irrelevant);
    CHECK_FALSE(labeled[1].year.has_value());
    CHECK(stats(labeled).relevant == 1);
}

TEST_CASE("odd labels and years become absent with a warning") {
    const Corpus c = parse_csv(std::string(kHeader) + ",label\na,b,MMX,c,maybe\nd,e,1999,f,yes\n");
    CHECK_FALSE(c[0].year.has_value());
    CHECK_FALSE(c[0].oracle_label.has_value());
    CHECK(c.warnings.size() == 2);
    CHECK_FALSE(c.fully_labeled());
    CHECK(c.simulation_capable());
}

TEST_CASE("code column parses into reviewer codes") {
    const Corpus c = parse_csv(std::string(kHeader) + ",code\na,b,1,c,yes\nd,e,2,f,no\ng,h,3,i,undetermined\n");
    CHECK(c[0].code == Code::yes);
    CHECK(c[1].code == Code::no);
    CHECK(c[2].code == Code::undetermined);
}

TEST_CASE("export writes a code column") {
    const Corpus c = parse_csv(std::string(kHeader) + "\na,b,1,c\nd,e,2,f\n");
    const auto blank = csv::parse(to_csv(c));
    REQUIRE(blank[0].fields.back() == "code");
    CHECK(blank[1].fields.back() == "undetermined");
    CHECK(blank[2].fields.back() == "undetermined");

    const auto coded = csv::parse(to_csv(c.with_codes({Code::yes, Code::no})));
    CHECK(coded[1].fields.back() == "yes");
    CHECK(coded[2].fields.back() == "no");
}

TEST_CASE("export then load is field-identical, extra columns included") {
    testing::TempDir dir;
    const std::string text = std::string("Document Title,Authors,Abstract,Year,PDF Link,label\n") +
                             "\"A, study\",Smith,\"multi\nline \"\"quoted\"\"\",2001,http://x,yes\n" +
                             "B,Jones,,,http://y,no\n";
    const Corpus original = parse_csv(text, "roundtrip").with_codes({Code::no, Code::yes});
    export_csv(original, dir / "roundtrip.csv");
    const Corpus back = load_csv(dir / "roundtrip.csv");
    CHECK(back.name() == "roundtrip");
    CHECK(back.extra_columns() == std::vector<std::string>{"Authors"});
    CHECK(back.studies() == original.studies());
}

TEST_CASE("round trip holds on a generated corpus") {
    testing::SyntheticSpec spec;
    spec.documents = 200;
    const Corpus c = testing::synthetic_corpus(spec);
    const Corpus back = parse_csv(to_csv(c), c.name());
    CHECK(back.studies() == c.studies());
}

TEST_CASE("io errors") {
    CHECK_THROWS_AS(load_csv("/nonexistent/dir/x.csv"), CorpusError);
    const Corpus c = parse_csv(std::string(kHeader) + "\na,b,1,c\n");
    try {
        export_csv(c, "/nonexistent/dir/out.csv");
        FAIL("no error");
    } catch (const CorpusError& e) {
        CHECK(e.kind() == CorpusError::Kind::io);
    }
}

TEST_CASE("with_codes checks the size") {
    const Corpus c = parse_csv(std::string(kHeader) + "\na,b,1,c\n");
    CHECK_THROWS_AS(c.with_codes({}), std::invalid_argument);
}

TEST_CASE("label parsing") {
    CHECK(parse_label(" YES ") == Label::relevant);
    CHECK(parse_label("no") == Label::irrelevant);
    CHECK_FALSE(parse_label("y").has_value());
    CHECK(parse_code("Yes") == Code::yes);
    CHECK(parse_code("") == Code::undetermined);
    CHECK(to_string(Code::no) == "no");
}
