#include <doctest.h>

#include <sstream>

#include "polyg/graph/store.hpp"

using namespace polyg;
using namespace polyg::graph;

namespace {

PropertyGraph load_or_fail(const std::string& nodes, const std::string& edges,
                           const std::string& hint = "") {
    std::istringstream n(nodes), e(edges), h(hint);
    auto g = hint.empty() ? load_graph(n, e) : load_graph(n, e, &h);
    REQUIRE_MESSAGE(g.ok(), (g.ok() ? std::string() : g.error().message));
    return std::move(g.value());
}

const std::string kNodes = R"({"id": "p1", "type": "paper", "name": "Graph Retrieval", "attrs": {"year": 2020}}
{"id": "p2", "type": "paper", "name": "Path Ranking", "attrs": {"year": 2018}}
{"id": "a1", "type": "author", "name": "Ada Vale"}
{"id": "v1", "type": "venue", "name": "KDD"}
)";

const std::string kEdges = R"({"src": "p1", "rel": "author", "dst": "a1"}
{"src": "a1", "rel": "paper", "dst": "p1"}
{"src": "p1", "rel": "venue", "dst": "v1"}
{"src": "v1", "rel": "paper", "dst": "p1"}
{"src": "p1", "rel": "reference", "dst": "p2"}
{"src": "p2", "rel": "cited_by", "dst": "p1"}
{"src": "p2", "rel": "author", "dst": "a1"}
{"src": "a1", "rel": "paper", "dst": "p2"}
)";

const std::string kHint =
    R"({"inverse_map": {"author": "paper", "venue": "paper", "reference": "cited_by"}})";

}  // namespace

TEST_CASE("load_graph reads nodes and edges") {
    PropertyGraph g = load_or_fail(kNodes, kEdges);
    CHECK(g.entities().size() == 4);
    CHECK(g.relations().size() == 8);
    CHECK(g.original_relation_count() == 8);

    auto p1 = g.index_of("p1");
    REQUIRE(p1.has_value());
    CHECK(g.entity(*p1).name == "Graph Retrieval");
    CHECK(g.entity(*p1).type == "paper");

    auto year = g.property_of(*p1, "year");
    REQUIRE(year.has_value());
    CHECK(std::get<std::int64_t>(*year) == 2020);

    // Built-in pseudo-attributes.
    CHECK(std::get<std::string>(*g.property_of(*p1, "id")) == "p1");
    CHECK(std::get<std::string>(*g.property_of(*p1, "name")) == "Graph Retrieval");
    CHECK(std::get<std::string>(*g.property_of(*p1, "node_type")) == "paper");
    CHECK(!g.property_of(*p1, "missing").has_value());
}

TEST_CASE("load_graph defaults name to id") {
    PropertyGraph g = load_or_fail(R"({"id": "x", "type": "thing"})" "\n", "");
    CHECK(g.entity(0).name == "x");
}

TEST_CASE("load_graph rejects malformed input with line numbers") {
    {
        std::istringstream n("{\"id\": \"a\", \"type\": \"t\"}\nnot json\n"), e("");
        auto g = load_graph(n, e);
        REQUIRE(!g.ok());
        CHECK(g.error().message == "nodes line 2: malformed record");
    }
    {
        std::istringstream n(
            "{\"id\": \"a\", \"type\": \"t\"}\n{\"id\": \"a\", \"type\": \"t\"}\n"),
            e("");
        auto g = load_graph(n, e);
        REQUIRE(!g.ok());
        CHECK(g.error().message == "nodes line 2: duplicate entity id 'a'");
    }
    {
        std::istringstream n("{\"id\": \"a\", \"type\": \"t\"}\n"),
            e("{\"src\": \"a\", \"rel\": \"r\", \"dst\": \"b\"}\n");
        auto g = load_graph(n, e);
        REQUIRE(!g.ok());
        CHECK(g.error().message == "edges line 1: unknown entity id 'b'");
    }
    {
        std::istringstream n(
            "{\"id\": \"a\", \"type\": \"t\", \"attrs\": {\"k\": {\"nested\": 1}}}\n"),
            e("");
        auto g = load_graph(n, e);
        REQUIRE(!g.ok());
        CHECK(g.error().message ==
              "nodes line 1: attrs.k: attribute values must be strings, integers or floats");
    }
}

TEST_CASE("resolve_entity folds case and whitespace") {
    PropertyGraph g = load_or_fail(kNodes, kEdges);
    CHECK(g.resolve_entity("graph  RETRIEVAL") == std::vector<std::string>{"p1"});
    CHECK(g.resolve_entity("Ada Vale") == std::vector<std::string>{"a1"});
    CHECK(g.resolve_entity("Ada Vale", std::string("paper")).empty());
    CHECK(g.resolve_entity("nobody").empty());
}

TEST_CASE("out_edges are ordered by rel type then neighbor id") {
    PropertyGraph g = load_or_fail(kNodes, kEdges);
    auto p1 = *g.index_of("p1");
    const auto& edges = g.out_edges(p1);
    REQUIRE(edges.size() == 3);
    CHECK(edges[0].rel_type == "author");
    CHECK(edges[1].rel_type == "reference");
    CHECK(edges[2].rel_type == "venue");
}

TEST_CASE("neighbors filters by relation type") {
    PropertyGraph g = load_or_fail(kNodes, kEdges);
    auto all = neighbors(g, "p1");
    REQUIRE(all.ok());
    CHECK(all->size() == 3);

    auto refs = neighbors(g, "p1", std::string("reference"));
    REQUIRE(refs.ok());
    REQUIRE(refs->size() == 1);
    CHECK(g.entity((*refs)[0].entity).id == "p2");

    auto bad = neighbors(g, "zz");
    REQUIRE(!bad.ok());
    CHECK(bad.error().message == "unknown entity id 'zz'");
}

TEST_CASE("materialize_inverses synthesizes missing reverse edges") {
    // One directed edge, no hint: the reverse edge gets the prefixed name.
    PropertyGraph g = load_or_fail(
        R"({"id": "a", "type": "t"})" "\n" R"({"id": "b", "type": "t"})" "\n",
        R"({"src": "a", "rel": "r", "dst": "b"})" "\n");
    PropertyGraph m = materialize_inverses(std::move(g));
    REQUIRE(m.relations().size() == 2);
    CHECK(m.inverses_materialized());
    CHECK(m.original_relation_count() == 1);

    const Relation& inv = m.relations()[1];
    CHECK(m.entity(inv.src).id == "b");
    CHECK(m.entity(inv.dst).id == "a");
    CHECK(inv.rel_type == "inv_r");
    CHECK(inv.synthesized);
    CHECK(!m.relations()[0].synthesized);

    CHECK(m.inverse_map().at("r") == "inv_r");
    CHECK(m.inverse_map().at("inv_r") == "r");

    // Idempotent.
    PropertyGraph again = materialize_inverses(std::move(m));
    CHECK(again.relations().size() == 2);
}

TEST_CASE("materialize_inverses strips the prefix instead of stacking it") {
    PropertyGraph g = load_or_fail(
        R"({"id": "a", "type": "t"})" "\n" R"({"id": "b", "type": "t"})" "\n",
        R"({"src": "a", "rel": "inv_r", "dst": "b"})" "\n");
    PropertyGraph m = materialize_inverses(std::move(g));
    REQUIRE(m.relations().size() == 2);
    CHECK(m.relations()[1].rel_type == "r");
}

TEST_CASE("materialize_inverses uses hint pairs in both directions") {
    // Hint says authored_by pairs with wrote; only one direction is given
    // per edge and both rel names get the partner name, not a prefix.
    PropertyGraph g = load_or_fail(
        R"({"id": "a", "type": "author"})" "\n" R"({"id": "p", "type": "paper"})" "\n"
        R"({"id": "q", "type": "paper"})" "\n",
        R"({"src": "p", "rel": "authored_by", "dst": "a"})" "\n"
        R"({"src": "a", "rel": "wrote", "dst": "q"})" "\n",
        R"({"inverse_map": {"authored_by": "wrote"}})");
    PropertyGraph m = materialize_inverses(std::move(g));
    REQUIRE(m.relations().size() == 4);
    CHECK(m.relations()[2].rel_type == "wrote");
    CHECK(m.entity(m.relations()[2].src).id == "a");
    CHECK(m.relations()[3].rel_type == "authored_by");
    CHECK(m.entity(m.relations()[3].dst).id == "a");
    CHECK(m.inverse_map().at("wrote") == "authored_by");
}

TEST_CASE("materialize_inverses keeps existing reverse edges unduplicated") {
    // Two parallel forward edges, one explicit reverse: exactly one more
    // reverse edge is synthesized so the multiplicities line up.
    PropertyGraph g = load_or_fail(
        R"({"id": "a", "type": "t"})" "\n" R"({"id": "b", "type": "t"})" "\n",
        R"({"src": "a", "rel": "likes", "dst": "b"})" "\n"
        R"({"src": "a", "rel": "likes", "dst": "b"})" "\n"
        R"({"src": "b", "rel": "liked_by", "dst": "a"})" "\n",
        R"({"inverse_map": {"likes": "liked_by"}})");
    PropertyGraph m = materialize_inverses(std::move(g));
    CHECK(m.relations().size() == 4);
    std::size_t liked_by = 0;
    for (const auto& r : m.relations()) {
        if (r.rel_type == "liked_by") ++liked_by;
    }
    CHECK(liked_by == 2);

    PropertyGraph again = materialize_inverses(std::move(m));
    CHECK(again.relations().size() == 4);
}

TEST_CASE("materialize_inverses handles self-inverse relations") {
    PropertyGraph g = load_or_fail(
        R"({"id": "x", "type": "book"})" "\n" R"({"id": "y", "type": "book"})" "\n"
        R"({"id": "z", "type": "book"})" "\n",
        R"({"src": "x", "rel": "similar", "dst": "y"})" "\n"
        R"({"src": "y", "rel": "similar", "dst": "x"})" "\n"
        R"({"src": "y", "rel": "similar", "dst": "z"})" "\n",
        R"({"inverse_map": {"similar": "similar"}})");
    PropertyGraph m = materialize_inverses(std::move(g));
    // The x/y pair already matches; only the y->z edge needs a reverse.
    REQUIRE(m.relations().size() == 4);
    const Relation& inv = m.relations()[3];
    CHECK(inv.rel_type == "similar");
    CHECK(m.entity(inv.src).id == "z");
    CHECK(m.inverse_map().at("similar") == "similar");
}

TEST_CASE("materialize_inverses on a closed graph adds nothing") {
    PropertyGraph g = load_or_fail(kNodes, kEdges, kHint);
    PropertyGraph m = materialize_inverses(std::move(g));
    CHECK(m.relations().size() == 8);
    // "paper" inverts to different names depending on the endpoint, so the
    // ambiguous names stay out of the map; the unambiguous pair stays in.
    CHECK(m.inverse_map().count("paper") == 0);
    CHECK(m.inverse_map().count("author") == 0);
    CHECK(m.inverse_map().count("venue") == 0);
    CHECK(m.inverse_map().at("reference") == "cited_by");
    CHECK(m.inverse_map().at("cited_by") == "reference");
}

TEST_CASE("schema_of lists types, attributes and relation triples") {
    PropertyGraph g = load_or_fail(kNodes, kEdges, kHint);
    PropertyGraph m = materialize_inverses(std::move(g));
    GraphSchema s = schema_of(m);

    REQUIRE(s.entity_types.count("paper"));
    const auto& paper_attrs = s.entity_types.at("paper");
    CHECK(paper_attrs.count("id"));
    CHECK(paper_attrs.count("name"));
    CHECK(paper_attrs.count("node_type"));
    CHECK(paper_attrs.count("year"));
    CHECK(!s.entity_types.at("author").count("year"));

    CHECK(s.relation_types.count({"paper", "author", "author"}));
    CHECK(s.relation_types.count({"author", "paper", "paper"}));
    CHECK(s.relation_types.count({"paper", "reference", "paper"}));
    CHECK(s.inverse_map.at("reference") == "cited_by");
    CHECK(s.inverse_map.count("paper") == 0);
}

TEST_CASE("schema_of is insensitive to input record order") {
    PropertyGraph a = load_or_fail(kNodes, kEdges);
    // Same records, different order.
    PropertyGraph b = load_or_fail(
        R"({"id": "v1", "type": "venue", "name": "KDD"}
{"id": "a1", "type": "author", "name": "Ada Vale"}
{"id": "p2", "type": "paper", "name": "Path Ranking", "attrs": {"year": 2018}}
{"id": "p1", "type": "paper", "name": "Graph Retrieval", "attrs": {"year": 2020}}
)",
        R"({"src": "p2", "rel": "author", "dst": "a1"}
{"src": "a1", "rel": "paper", "dst": "p2"}
{"src": "p1", "rel": "reference", "dst": "p2"}
{"src": "p2", "rel": "cited_by", "dst": "p1"}
{"src": "p1", "rel": "venue", "dst": "v1"}
{"src": "v1", "rel": "paper", "dst": "p1"}
{"src": "p1", "rel": "author", "dst": "a1"}
{"src": "a1", "rel": "paper", "dst": "p1"}
)");
    GraphSchema sa = schema_of(a);
    GraphSchema sb = schema_of(b);
    CHECK(sa.entity_types == sb.entity_types);
    CHECK(sa.relation_types == sb.relation_types);
}

// ---------------------------------------------------------------------------
// Binary snapshots
// ---------------------------------------------------------------------------

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "polyg/graph/snapshot.hpp"

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("snapshots round-trip a graph byte for byte") {
    PropertyGraph g;
    g.add_entity({"p1", "paper", "Graph Retrieval",
                  {{"year", Scalar{std::int64_t{2020}}},
                   {"score", Scalar{0.25}},
                   {"abstract", Scalar{std::string("uses 'quotes' and\nnewlines")}}}});
    g.add_entity({"a1", "author", "Ada Vale", {}});
    g.add_relation({0, 1, "author", {{"position", Scalar{std::int64_t{1}}}}});
    g.set_inverse_hint({{"reference", "cited_by"}});
    g.rebuild_indexes();

    TempFile file("polyg_snapshot_roundtrip.bin");
    auto saved = save_snapshot(g, file.path);
    REQUIRE_MESSAGE(saved.ok(), (saved.ok() ? std::string() : saved.error().message));
    auto loaded = load_snapshot(file.path);
    REQUIRE_MESSAGE(loaded.ok(),
                    (loaded.ok() ? std::string() : loaded.error().message));

    CHECK(loaded->entities().size() == g.entities().size());
    for (std::size_t i = 0; i < g.entities().size(); ++i) {
        CHECK(loaded->entity(i).id == g.entity(i).id);
        CHECK(loaded->entity(i).type == g.entity(i).type);
        CHECK(loaded->entity(i).name == g.entity(i).name);
        CHECK(loaded->entity(i).attrs == g.entity(i).attrs);
    }
    CHECK(loaded->relations().size() == 1);
    CHECK(loaded->relation(0).rel_type == "author");
    CHECK(loaded->relation(0).attrs == g.relation(0).attrs);
    CHECK(loaded->inverse_hint() == g.inverse_hint());
    CHECK_FALSE(loaded->inverses_materialized());
    CHECK(loaded->name_index() == g.name_index());

    // Saving the load gives identical bytes: the format is canonical.
    TempFile again("polyg_snapshot_again.bin");
    REQUIRE(save_snapshot(*loaded, again.path).ok());
    std::ifstream f1(file.path, std::ios::binary), f2(again.path, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)),
                   std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)),
                   std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
}

TEST_CASE("snapshots of materialized graphs re-materialize on load") {
    PropertyGraph g = load_or_fail(kNodes, kEdges, kHint);
    PropertyGraph m = materialize_inverses(std::move(g));

    TempFile file("polyg_snapshot_materialized.bin");
    REQUIRE(save_snapshot(m, file.path).ok());
    auto loaded = load_snapshot(file.path);
    REQUIRE_MESSAGE(loaded.ok(),
                    (loaded.ok() ? std::string() : loaded.error().message));

    CHECK(loaded->inverses_materialized());
    CHECK(loaded->original_relation_count() == m.original_relation_count());
    REQUIRE(loaded->relations().size() == m.relations().size());
    for (std::size_t i = 0; i < m.relations().size(); ++i) {
        CHECK(loaded->relation(i).src == m.relation(i).src);
        CHECK(loaded->relation(i).dst == m.relation(i).dst);
        CHECK(loaded->relation(i).rel_type == m.relation(i).rel_type);
        CHECK(loaded->relation(i).synthesized == m.relation(i).synthesized);
    }
    CHECK(loaded->inverse_map() == m.inverse_map());
}

TEST_CASE("snapshot loading rejects foreign, stale and damaged files") {
    SUBCASE("wrong magic") {
        TempFile file("polyg_snapshot_magic.bin");
        std::ofstream(file.path, std::ios::binary) << "PKZIP nonsense";
        auto r = load_snapshot(file.path);
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("not a graph snapshot") != std::string::npos);
        CHECK(r.error().message.find("re-ingest") != std::string::npos);
    }

    SUBCASE("unsupported version") {
        PropertyGraph g = load_or_fail(kNodes, kEdges);
        TempFile file("polyg_snapshot_version.bin");
        REQUIRE(save_snapshot(g, file.path).ok());
        {
            std::fstream f(file.path,
                           std::ios::binary | std::ios::in | std::ios::out);
            f.seekp(4);
            char v = 99;
            f.write(&v, 1);
        }
        auto r = load_snapshot(file.path);
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("unsupported version 99") != std::string::npos);
    }

    SUBCASE("truncation names the failing offset") {
        PropertyGraph g = load_or_fail(kNodes, kEdges);
        TempFile file("polyg_snapshot_truncated.bin");
        REQUIRE(save_snapshot(g, file.path).ok());
        auto size = std::filesystem::file_size(file.path);
        std::filesystem::resize_file(file.path, size / 2);
        auto r = load_snapshot(file.path);
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("truncated or corrupt at byte") !=
              std::string::npos);
    }

    SUBCASE("missing file") {
        auto r = load_snapshot("/nonexistent/polyg.snapshot");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error().message.find("cannot read") != std::string::npos);
    }
}
