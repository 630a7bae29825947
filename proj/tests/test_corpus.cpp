#include <catch2/catch_amalgamated.hpp>

#include "brigata/corpus.hpp"
#include "brigata/tei.hpp"
#include "helpers.hpp"

using namespace brigata;

static const char* kMinimalJson = R"({
  "source_note": "test",
  "complete": false,
  "novelle": [
    {"day": 1, "position": 1, "storyteller": "Panfilo",
     "rubric": "Ser Cepparello", "text": "Umana cosa è aver compassione degli afflitti."}
  ],
  "frame_passages": [
    {"label": "proemio", "text": "Quantunque volte, graziosissime donne."}
  ]
})";

TEST_CASE("load_json reads the simplified corpus format") {
    auto corpus = load_json(kMinimalJson);
    CHECK(corpus.source_note == "test");
    CHECK_FALSE(corpus.complete);
    REQUIRE(corpus.novelle.size() == 1);
    const auto& nov = corpus.novelle[0];
    CHECK(nov.day == 1);
    CHECK(nov.position == 1);
    CHECK(nov.storyteller == "Panfilo");
    REQUIRE(nov.rubric.has_value());
    CHECK(*nov.rubric == "Ser Cepparello");
    REQUIRE(corpus.frame_passages.size() == 1);
    CHECK(corpus.frame_passages[0].label == "proemio");
}

TEST_CASE("load_json accepts a null or missing rubric") {
    auto corpus = load_json(R"({"novelle": [
        {"day": 2, "position": 3, "storyteller": "Neifile", "rubric": null, "text": "x"}]})");
    CHECK_FALSE(corpus.novelle[0].rubric.has_value());
    corpus = load_json(R"({"novelle": [
        {"day": 2, "position": 3, "storyteller": "Neifile", "text": "x"}]})");
    CHECK_FALSE(corpus.novelle[0].rubric.has_value());
}

TEST_CASE("load_json canonicalizes storyteller case") {
    auto corpus = load_json(R"({"novelle": [
        {"day": 1, "position": 1, "storyteller": "panfilo", "text": "x"}]})");
    CHECK(corpus.novelle[0].storyteller == "Panfilo");
}

TEST_CASE("load_json schema errors name the offending path") {
    auto path_of = [](const char* text) {
        try {
            load_json(text);
        } catch (const SchemaError& e) {
            return e.path;
        }
        return std::string("no error");
    };
    CHECK(path_of(R"({"novelle": [{"position": 1, "storyteller": "Panfilo", "text": "x"}]})") ==
          "novelle[0].day");
    CHECK(path_of(R"({"novelle": [{"day": "1", "position": 1, "storyteller": "Panfilo",
                                   "text": "x"}]})") == "novelle[0].day");
    CHECK(path_of(R"({"novelle": [{"day": 11, "position": 1, "storyteller": "Panfilo",
                                   "text": "x"}]})") == "novelle[0].day");
    CHECK(path_of(R"({"novelle": [{"day": 1, "position": 0, "storyteller": "Panfilo",
                                   "text": "x"}]})") == "novelle[0].position");
    CHECK(path_of(R"({"novelle": [{"day": 1, "position": 1, "storyteller": "Cipolla",
                                   "text": "x"}]})") == "novelle[0].storyteller");
    CHECK(path_of(R"({"novelle": [{"day": 1, "position": 1, "storyteller": "Panfilo",
                                   "text": "  "}]})") == "novelle[0].text");
    CHECK(path_of(R"([1,2,3])") == "$");
    CHECK(path_of(R"(not json)") == "$");
    CHECK(path_of(R"({"novelle": [{"day": 1, "position": 1, "storyteller": "Panfilo",
                                   "text": "x"}], "frame_passages": [{"label": "l"}]})") ==
          "frame_passages[0].text");
}

TEST_CASE("load_json reports unknown keys as warnings, not errors") {
    std::vector<std::string> warnings;
    load_json(R"({"novelle": [{"day": 1, "position": 1, "storyteller": "Panfilo",
                 "text": "x", "extra": 1}], "bogus": true})",
              &warnings);
    REQUIRE(warnings.size() == 2);
    CHECK(warnings[0].find("bogus") != std::string::npos);
    CHECK(warnings[1].find("extra") != std::string::npos);
}

TEST_CASE("save_json round-trips and is stable") {
    auto corpus = load_json(kMinimalJson);
    std::string emitted = save_json(corpus);
    CHECK(emitted.back() == '\n');
    auto again = load_json(emitted);
    CHECK(again == corpus);
    CHECK(save_json(again) == emitted);
    // fixed key order inside each novella
    auto day_at = emitted.find("\"day\"");
    auto pos_at = emitted.find("\"position\"");
    auto teller_at = emitted.find("\"storyteller\"");
    auto rubric_at = emitted.find("\"rubric\"");
    auto text_at = emitted.find("\"text\"");
    CHECK(day_at < pos_at);
    CHECK(pos_at < teller_at);
    CHECK(teller_at < rubric_at);
    CHECK(rubric_at < text_at);
}

TEST_CASE("save_json writes null for a missing rubric") {
    Corpus corpus;
    corpus.novelle.push_back({1, 1, "Panfilo", std::nullopt, "x"});
    auto emitted = save_json(corpus);
    CHECK(emitted.find("\"rubric\": null") != std::string::npos);
    auto again = load_json(emitted);
    CHECK_FALSE(again.novelle[0].rubric.has_value());
}

TEST_CASE("validate_corpus on a complete corpus") {
    auto corpus = synthetic_corpus(40);
    auto report = validate_corpus(corpus);
    CHECK(report.complete);
    CHECK(report.gaps.empty());
    CHECK(report.duplicates.empty());
    CHECK(report.empty_texts.empty());
    CHECK(report.storyteller_counts.size() == 10);
    for (const auto& [name, n] : report.storyteller_counts) CHECK(n == 10);
    CHECK(report.to_string().find("complete: true") != std::string::npos);
}

TEST_CASE("validate_corpus flags gaps, duplicates, and ragged counts") {
    auto corpus = synthetic_corpus(40);
    SECTION("missing novella") {
        corpus.novelle.erase(corpus.novelle.begin() + 3);  // day 1, position 4
        auto report = validate_corpus(corpus);
        CHECK_FALSE(report.complete);
        REQUIRE(report.gaps.size() == 1);
        CHECK(report.gaps[0] == std::pair<int, int>(1, 4));
        CHECK_FALSE(report.findings.empty());
    }
    SECTION("duplicated novella") {
        corpus.novelle.push_back(corpus.novelle[0]);
        auto report = validate_corpus(corpus);
        REQUIRE(report.duplicates.size() == 1);
        CHECK(report.duplicates[0] == std::pair<int, int>(1, 1));
    }
    SECTION("teller swap unbalances the counts") {
        REQUIRE(corpus.novelle[0].storyteller == "Filomena");  // (1,1) in the fixture
        corpus.novelle[0].storyteller = "Dioneo";
        auto report = validate_corpus(corpus);
        CHECK_FALSE(report.complete);
        CHECK(report.storyteller_counts.at("Dioneo") == 11);
        CHECK(report.storyteller_counts.at("Filomena") == 9);
    }
}

// ---------------------------------------------------------------------------
// TEI ingestion

static const char* kTeiFixture = R"(<?xml version="1.0"?>
<!DOCTYPE TEI.2 SYSTEM "tei.dtd">
<TEI.2>
  <teiHeader><fileDesc>catalog noise</fileDesc></teiHeader>
  <text>
    <body>
      <div type="giornata" n="1">
        <head>Comincia la prima giornata</head>
        <div type="novella" n="1">
          <head>Ser Cepparello inganna un santo frate</head>
          <p>Umana cosa <hi>&egrave;</hi> aver compassione
             <note>editorial aside to be dropped</note>
             degli afflitti.</p>
          <pb n="12"/>
          <p>E come che a ciascuna persona stea bene.</p>
        </div>
        <div type="novella" n="2">
          <head>Abraam giudeo</head>
          <p>Era in Parigi un gran mercatante.</p>
        </div>
      </div>
    </body>
  </text>
</TEI.2>)";

static IngestionRules fixture_rules() {
    IngestionRules rules;
    rules.deny_elements = {"teiHeader", "note", "pb"};
    rules.teller_table[{1, 1}] = "Panfilo";
    rules.teller_table[{1, 2}] = "Neifile";
    return rules;
}

TEST_CASE("parse_tei extracts novelle with rubrics, tellers, denied subtrees removed") {
    auto corpus = parse_tei(kTeiFixture, fixture_rules());
    REQUIRE(corpus.novelle.size() == 2);
    const auto& first = corpus.novelle[0];
    CHECK(first.day == 1);
    CHECK(first.position == 1);
    CHECK(first.storyteller == "Panfilo");
    REQUIRE(first.rubric.has_value());
    CHECK(*first.rubric == "Ser Cepparello inganna un santo frate");
    CHECK(first.text ==
          "Umana cosa è aver compassione degli afflitti. "
          "E come che a ciascuna persona stea bene.");
    CHECK(corpus.novelle[1].storyteller == "Neifile");
    CHECK(corpus.novelle[1].text == "Era in Parigi un gran mercatante.");
    CHECK_FALSE(corpus.complete);
    // day-level prose outside the novelle becomes a frame passage
    REQUIRE(corpus.frame_passages.size() == 1);
    CHECK(corpus.frame_passages[0].label == "giornata 1");
    CHECK(corpus.frame_passages[0].text == "Comincia la prima giornata");
}

TEST_CASE("parse_tei teller attribute on the div overrides the table") {
    std::string doc = R"(<TEI.2><div type="giornata" n="1">
        <div type="novella" n="1" teller="Dioneo"><p>testo della novella</p></div>
        </div></TEI.2>)";
    auto corpus = parse_tei(doc, fixture_rules());
    CHECK(corpus.novelle[0].storyteller == "Dioneo");
}

TEST_CASE("parse_tei falls back to ordinal numbering without n attributes") {
    std::string doc = R"(<TEI.2><div type="giornata">
        <div type="novella"><p>prima</p></div>
        <div type="novella"><p>seconda</p></div>
        </div></TEI.2>)";
    auto corpus = parse_tei(doc, fixture_rules());
    REQUIRE(corpus.novelle.size() == 2);
    CHECK(corpus.novelle[0].position == 1);
    CHECK(corpus.novelle[1].position == 2);
    CHECK(corpus.novelle[1].storyteller == "Neifile");
}

TEST_CASE("parse_tei structure errors") {
    SECTION("missing teller table entry names the novella") {
        IngestionRules rules;  // empty table
        try {
            parse_tei(kTeiFixture, rules);
            FAIL("expected StructureError");
        } catch (const StructureError& e) {
            std::string msg = e.what();
            CHECK(msg.find("no storyteller mapping") != std::string::npos);
            CHECK(msg.find("(1,1)") != std::string::npos);
        }
    }
    SECTION("non-canonical teller name") {
        std::string doc = R"(<TEI.2><div type="giornata" n="1">
            <div type="novella" n="1" teller="Cipolla"><p>testo</p></div></div></TEI.2>)";
        CHECK_THROWS_AS(parse_tei(doc, fixture_rules()), ValidationFailure);
    }
    SECTION("novella with no surviving text") {
        std::string doc = R"(<TEI.2><div type="giornata" n="1">
            <div type="novella" n="1"><note>only a note</note></div></div></TEI.2>)";
        CHECK_THROWS_AS(parse_tei(doc, fixture_rules()), StructureError);
    }
    SECTION("novella outside any day") {
        std::string doc = R"(<TEI.2><div type="novella" n="1"><p>testo</p></div></TEI.2>)";
        CHECK_THROWS_AS(parse_tei(doc, fixture_rules()), StructureError);
    }
    SECTION("malformed xml propagates as ParseError") {
        CHECK_THROWS_AS(parse_tei("<TEI.2><div>", fixture_rules()), xml::ParseError);
    }
}

TEST_CASE("parse_tei orders novelle by day then position") {
    std::string doc = R"(<TEI.2>
        <div type="giornata" n="2"><div type="novella" n="1" teller="Dioneo"><p>b</p></div></div>
        <div type="giornata" n="1"><div type="novella" n="2" teller="Pampinea"><p>c</p></div>
            <div type="novella" n="1" teller="Elissa"><p>a</p></div></div>
        </TEI.2>)";
    auto corpus = parse_tei(doc, fixture_rules());
    REQUIRE(corpus.novelle.size() == 3);
    auto key = [&](size_t i) {
        return std::pair<int, int>(corpus.novelle[i].day, corpus.novelle[i].position);
    };
    CHECK(key(0) == std::pair<int, int>(1, 1));
    CHECK(key(1) == std::pair<int, int>(1, 2));
    CHECK(key(2) == std::pair<int, int>(2, 1));
}

TEST_CASE("rules load from json") {
    auto rules = IngestionRules::from_json(R"({
        "deny_elements": ["note", "pb"],
        "day_div_type": "giornata",
        "novella_div_type": "novella",
        "rubric_element": "head",
        "teller_table": {"1,1": "Panfilo", "10,10": "Dioneo"}
    })");
    CHECK(rules.denied("note"));
    CHECK_FALSE(rules.denied("p"));
    CHECK(rules.teller_table.at({10, 10}) == "Dioneo");
    CHECK_THROWS_AS(IngestionRules::from_json("[]"), SchemaError);
    CHECK_THROWS_AS(IngestionRules::from_json(R"({"teller_table": {"bad": "X"}})"), SchemaError);
}

TEST_CASE("shipped default rules cover the full hundred") {
    auto rules =
        IngestionRules::load_file(std::string(BRIGATA_DATA_DIR) + "/tei_rules_default.json");
    CHECK(rules.teller_table.size() == 100);
    std::map<std::string, int> per_teller;
    for (const auto& [ref, name] : rules.teller_table) ++per_teller[name];
    REQUIRE(per_teller.size() == 10);
    for (const auto& [name, n] : per_teller) CHECK(n == 10);
    // Dioneo's privilege: last word on every day from the second onward
    for (int day = 2; day <= 10; ++day) CHECK(rules.teller_table.at({day, 10}) == "Dioneo");
    CHECK(rules.teller_table.at({1, 1}) == "Panfilo");
    CHECK(rules.denied("teiHeader"));
}
