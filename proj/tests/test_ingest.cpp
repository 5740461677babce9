#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>

#include "codesift/ingest.hpp"
#include "codesift/notebook.hpp"
#include "test_util.hpp"

using namespace codesift;
namespace fs = std::filesystem;

TEST_CASE("scan_source walks a tree in lexicographic relative-path order") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("b.py"), "b");
    testutil::write_file(dir.file("a/z.py"), "z");
    testutil::write_file(dir.file("a/a.py"), "a");
    const auto result = scan_source(dir.str());
    REQUIRE(result.records.size() == 3);
    CHECK(result.records[0].path == "a/a.py");
    CHECK(result.records[1].path == "a/z.py");
    CHECK(result.records[2].path == "b.py");
    CHECK(result.records[0].content == "a");
    CHECK(result.records[0].id == "a/a.py");
    CHECK(result.skipped.empty());
}

TEST_CASE("scan_source records dangling symlinks as unreadable") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("ok.py"), "x = 1");
    std::error_code ec;
    fs::create_symlink(dir.path() / "missing.py", dir.path() / "broken.py", ec);
    if (ec) return;  // filesystem without symlink support: nothing to assert
    const auto result = scan_source(dir.str());
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].path == "ok.py");
    REQUIRE(result.skipped.size() == 1);
    CHECK(result.skipped[0] == SkipEntry{"broken.py", "unreadable"});
}

TEST_CASE("scan_source reads a record dump line by line") {
    testutil::TempDir dir;
    const std::string dump = dir.file("dump.jsonl");
    testutil::write_file(
        dump,
        R"({"id":"r1","path":"a.py","content":"x=1","repo":"o/r","stars":3,"commit_time":9,"source":"github"})"
        "\n"
        "\n"  // blank lines are skipped silently
        R"({"id":"r2","path":"b.py","content":"y=2"})"
        "\n"
        R"({"id":"r3","path":"c.py"})"
        "\n"  // missing content -> bad-record
        "not json\n");
    const auto result = scan_source(dump);
    REQUIRE(result.records.size() == 2);
    CHECK(result.records[0].id == "r1");
    CHECK(result.records[0].stars == 3);
    CHECK(result.records[0].commit_time == 9);
    CHECK(result.records[0].source == SourceKind::github);
    CHECK(result.records[1].stars == 0);  // defaults
    REQUIRE(result.skipped.size() == 2);
    CHECK(result.skipped[0].reason == "bad-record");
    CHECK(result.skipped[0].path == "dump.jsonl:4");
    CHECK(result.skipped[1].path == "dump.jsonl:5");
}

TEST_CASE("scan_source rejects dumps with negative stars or bad source") {
    testutil::TempDir dir;
    const std::string dump = dir.file("dump.jsonl");
    testutil::write_file(dump, R"({"id":"r1","path":"a.py","content":"x","stars":-1})"
                               "\n"
                               R"({"id":"r2","path":"b.py","content":"y","source":"mars"})"
                               "\n");
    const auto result = scan_source(dump);
    CHECK(result.records.empty());
    CHECK(result.skipped.size() == 2);
}

TEST_CASE("scan_source throws on a missing root") {
    CHECK_THROWS_AS(scan_source("/definitely/not/here"), StageError);
}

TEST_CASE("preprocess applies checks in order: size, language, decode") {
    const auto& reg = LanguageRegistry::builtin();

    RawRecord oversize;
    oversize.path = "big.py";
    oversize.byte_length = kMaxContentBytes + 1;
    oversize.content = "tiny";  // the recorded length governs, not the buffer
    CHECK(preprocess(oversize, reg).reason == "oversize");

    RawRecord excluded;
    excluded.path = "data.csv";
    excluded.content = "a,b\n";
    excluded.byte_length = 4;
    CHECK(preprocess(excluded, reg).reason == "excluded-language");

    RawRecord unknown;
    unknown.path = "file.zzznope";
    unknown.content = "hello";
    unknown.byte_length = 5;
    CHECK(preprocess(unknown, reg).reason == "excluded-language");

    RawRecord binary;
    binary.path = "bin.py";
    binary.content = std::string("\xff\xfe junk", 7);
    binary.byte_length = 7;
    CHECK(preprocess(binary, reg).reason == "decode-failure");

    RawRecord ok;
    ok.id = "r9";
    ok.path = "src/mod.py";
    ok.content = "x = 1\n";
    ok.byte_length = 6;
    ok.stars = 7;
    const auto result = preprocess(ok, reg);
    REQUIRE(result.doc.has_value());
    CHECK(result.doc->language == "Python");
    CHECK(result.doc->category == Category::code);
    CHECK(result.doc->stars == 7);
    CHECK(result.doc->id == "r9");
    CHECK(result.doc->content == "x = 1\n");
}

TEST_CASE("preprocess boundary: exactly 8 MB passes the size check") {
    const auto& reg = LanguageRegistry::builtin();
    RawRecord rec;
    rec.path = "edge.py";
    rec.content = "ok";
    rec.byte_length = kMaxContentBytes;  // == limit is allowed
    CHECK(preprocess(rec, reg).doc.has_value());
}

TEST_CASE("is_valid_utf8 accepts well-formed sequences and rejects the rest") {
    CHECK(is_valid_utf8("plain ascii"));
    CHECK(is_valid_utf8("caf\xc3\xa9"));                      // 2-byte
    CHECK(is_valid_utf8("\xe6\x97\xa5\xe6\x9c\xac"));         // 3-byte
    CHECK(is_valid_utf8("\xf0\x9f\x98\x80"));                 // 4-byte emoji
    CHECK(is_valid_utf8("\xf0\x90\x80\x80"));                 // U+10000
    CHECK_FALSE(is_valid_utf8(std::string("nul\0byte", 8)));  // NUL
    CHECK_FALSE(is_valid_utf8("\xc0\x80"));                   // overlong
    CHECK_FALSE(is_valid_utf8("\xe0\x80\x80"));               // overlong
    CHECK_FALSE(is_valid_utf8("\xed\xa0\x80"));               // surrogate
    CHECK_FALSE(is_valid_utf8("\xf4\x90\x80\x80"));           // > U+10FFFF
    CHECK_FALSE(is_valid_utf8("\xc3"));                       // truncated tail
    CHECK_FALSE(is_valid_utf8("\xff"));                       // invalid lead byte
    CHECK_FALSE(is_valid_utf8("\x80"));                       // bare continuation
}

TEST_CASE("notebooks convert to tagged triplets") {
    const std::string nb = R"nb({
      "cells": [
        {"cell_type": "markdown", "source": ["# Title\n", "intro"]},
        {"cell_type": "code", "source": "print(1)",
         "outputs": [{"output_type": "stream", "text": ["1\n"]}]},
        {"cell_type": "raw", "source": "ignored"},
        {"cell_type": "code", "source": "x = 2", "outputs": []}
      ]
    })nb";
    const auto triplets = convert_jupyter(nb);
    REQUIRE(triplets.has_value());
    REQUIRE(triplets->size() == 2);
    CHECK((*triplets)[0].markdown == "# Title\nintro");
    CHECK((*triplets)[0].code == "print(1)");
    CHECK((*triplets)[0].output == "1\n");
    CHECK((*triplets)[1].code == "x = 2");
    CHECK((*triplets)[1].markdown.empty());

    const std::string rendered = render_triplets(*triplets);
    CHECK(rendered.find("<markdown>\n# Title\nintro\n</markdown>") != std::string::npos);
    CHECK(rendered.find("<code>\nprint(1)\n</code>") != std::string::npos);
    CHECK(rendered.find("<output>\n1\n\n</output>") != std::string::npos);
}

TEST_CASE("notebook error outputs keep the exception line") {
    const std::string nb = R"nb({
      "cells": [
        {"cell_type": "code", "source": "boom()",
         "outputs": [{"output_type": "error", "ename": "ValueError", "evalue": "bad"}]}
      ]
    })nb";
    const auto triplets = convert_jupyter(nb);
    REQUIRE(triplets.has_value());
    CHECK((*triplets)[0].output == "ValueError: bad");
}

TEST_CASE("preprocess converts .ipynb and flags broken notebooks") {
    const auto& reg = LanguageRegistry::builtin();

    RawRecord good;
    good.path = "nb.ipynb";
    good.content = R"nb({"cells":[{"cell_type":"code","source":"print(1)"}]})nb";
    good.byte_length = good.content.size();
    const auto ok = preprocess(good, reg);
    REQUIRE(ok.doc.has_value());
    CHECK(ok.doc->language == "Jupyter Notebook");
    CHECK(ok.doc->content.find("<code>\nprint(1)\n</code>") != std::string::npos);

    RawRecord broken;
    broken.path = "nb.ipynb";
    broken.content = R"({"cells": "not an array"})";
    broken.byte_length = broken.content.size();
    CHECK(preprocess(broken, reg).reason == "notebook-parse");

    RawRecord empty;
    empty.path = "nb.ipynb";
    empty.content = R"({"cells": []})";
    empty.byte_length = empty.content.size();
    CHECK(preprocess(empty, reg).reason == "notebook-empty");
}

TEST_CASE("recall_text_file keeps build-relevant names and defers to the scorer") {
    auto text_doc = [](const std::string& path) {
        CodeDocument doc = testutil::make_doc(path, "some text", "Text");
        doc.path = path;
        doc.category = Category::text;
        return doc;
    };
    CHECK(recall_text_file(text_doc("docs/README.md")));
    CHECK(recall_text_file(text_doc("notes.txt")));
    CHECK(recall_text_file(text_doc("TODO.md")));
    CHECK(recall_text_file(text_doc("proj/Description.txt")));
    CHECK(recall_text_file(text_doc("requirements.txt")));
    CHECK(recall_text_file(text_doc("dev-requirements.txt")));  // substring match
    CHECK(recall_text_file(text_doc("CMakeLists.txt")));
    CHECK_FALSE(recall_text_file(text_doc("random_blog_post.md")));

    const auto always_high = [](const std::string&) { return 0.9; };
    const auto always_low = [](const std::string&) { return 0.1; };
    CHECK(recall_text_file(text_doc("random_blog_post.md"), always_high, 0.5));
    CHECK_FALSE(recall_text_file(text_doc("random_blog_post.md"), always_low, 0.5));
}
