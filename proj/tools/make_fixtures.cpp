// Builds the committed fixture set under fixtures/:
//
//   newton/    three-entity ingestion example (nodes + edges, no hint)
//   science/   small science graph, eight demo questions, and the recorded
//              cassettes that drive replay runs and the correction-bound
//              fixtures
//   academia/  seeded 1,000-entity synthetic scholarly graph for benchmark
//              generation
//
// The science cassettes are recorded against a scripted backend, then
// replayed twice and compared byte for byte before the tool reports
// success, so a broken fixture never lands silently. Run from the
// repository root: build/tools/make_fixtures [out_root]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyg/bench/generate.hpp"
#include "polyg/core/random.hpp"
#include "polyg/core/result.hpp"
#include "polyg/graph/store.hpp"
#include "polyg/llm/gateway.hpp"
#include "polyg/planner/planner.hpp"
#include "polyg/taxonomy/taxonomy.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace polyg;

namespace {

constexpr const char* kModel = "gpt-4o-mini";

int fail(const std::string& message) {
    std::cerr << "make_fixtures: " << message << "\n";
    return 1;
}

bool write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << content;
    return out.good();
}

std::string node_line(const std::string& id, const std::string& type,
                      const std::string& name,
                      const graph::AttrMap& attrs = {}) {
    ordered_json j;
    j["id"] = id;
    j["type"] = type;
    j["name"] = name;
    if (!attrs.empty()) {
        ordered_json a;
        for (const auto& [k, v] : attrs) {
            if (std::holds_alternative<std::int64_t>(v))
                a[k] = std::get<std::int64_t>(v);
            else if (std::holds_alternative<double>(v))
                a[k] = std::get<double>(v);
            else
                a[k] = std::get<std::string>(v);
        }
        j["attrs"] = a;
    }
    return j.dump() + "\n";
}

std::string edge_line(const std::string& src, const std::string& rel,
                      const std::string& dst) {
    ordered_json j;
    j["src"] = src;
    j["rel"] = rel;
    j["dst"] = dst;
    return j.dump() + "\n";
}

Result<graph::PropertyGraph> load_fixture_graph(const fs::path& dir) {
    std::ifstream nodes(dir / "nodes.jsonl");
    std::ifstream edges(dir / "edges.jsonl");
    if (!nodes || !edges)
        return Error{"cannot open graph files under " + dir.string()};
    std::ifstream hint(dir / "hint.json");
    auto loaded = hint ? graph::load_graph(nodes, edges, &hint)
                       : graph::load_graph(nodes, edges);
    if (!loaded) return Error{loaded.error().message};
    return graph::materialize_inverses(std::move(*loaded));
}

// ---------------------------------------------------------------------------
// newton/ — the three-entity ingestion example
// ---------------------------------------------------------------------------

bool write_newton(const fs::path& dir) {
    std::string nodes;
    nodes += node_line("ug", "theory", "Universal Gravitation");
    nodes += node_line("in", "scientist", "Isaac Newton");
    nodes += node_line("y1643", "year", "1643");
    std::string edges;
    edges += edge_line("ug", "developer", "in");
    edges += edge_line("in", "born in", "y1643");
    return write_text(dir / "nodes.jsonl", nodes) &&
           write_text(dir / "edges.jsonl", edges);
}

// ---------------------------------------------------------------------------
// science/ — graph, demo questions, cassettes
// ---------------------------------------------------------------------------

bool write_science_graph(const fs::path& dir) {
    std::string nodes;
    nodes += node_line("in", "scientist", "Isaac Newton");
    nodes += node_line("ae", "scientist", "Albert Einstein");
    nodes += node_line("gg", "scientist", "Galileo");
    nodes += node_line("ug", "theory", "Universal Gravitation");
    nodes += node_line("lm", "theory", "Laws of Motion");
    nodes += node_line("tr", "theory", "Theory of Relativity");
    nodes += node_line("ph", "field", "Physics");
    nodes += node_line("y1643", "year", "1643");
    nodes += node_line("y1879", "year", "1879");

    std::string edges;
    edges += edge_line("ug", "developer", "in");
    edges += edge_line("lm", "developer", "in");
    edges += edge_line("tr", "developer", "ae");
    edges += edge_line("in", "born in", "y1643");
    edges += edge_line("ae", "born in", "y1879");
    edges += edge_line("in", "field", "ph");
    edges += edge_line("ae", "field", "ph");
    edges += edge_line("gg", "influenced", "in");

    ordered_json hint;
    hint["inverse_map"] = {{"developer", "developed"},
                           {"influenced", "influenced_by"}};
    return write_text(dir / "nodes.jsonl", nodes) &&
           write_text(dir / "edges.jsonl", edges) &&
           write_text(dir / "hint.json", hint.dump(2) + "\n");
}

struct DemoQuestion {
    std::string id;
    taxonomy::Pattern pattern;
    std::string text;
    std::vector<std::string> gold;  // normalized names, sorted; empty = none
};

std::vector<DemoQuestion> demo_questions() {
    using taxonomy::Pattern;
    return {
        {"sci-q1", Pattern::sxx, "Who is Isaac Newton?", {}},
        {"sci-q2", Pattern::spx,
         "What theories and principles has Isaac Newton developed?",
         {"laws of motion", "universal gravitation"}},
        {"sci-q3", Pattern::sxo,
         "How are Isaac Newton and Albert Einstein related?", {}},
        {"sci-q4", Pattern::spo,
         "Have Isaac Newton and Albert Einstein both contributed to the same "
         "field of science?",
         {}},
        {"sci-q5", Pattern::nested,
         "Tell me about the scientist who developed universal gravitation.",
         {"isaac newton"}},
        {"sci-q6", Pattern::nested,
         "Who is the developer of universal gravitation and influenced by "
         "Galileo's discoveries?",
         {"isaac newton"}},
        {"sci-q7", Pattern::nested,
         "How are the developers of universal gravitation and the theory of "
         "relativity related to each other?",
         {}},
        {"sci-q8", Pattern::nested,
         "Do the developers of universal gravitation and the theory of "
         "relativity share similar perspectives about gravitation?",
         {}},
    };
}

bool write_science_questions(const fs::path& dir) {
    std::string out;
    for (const auto& q : demo_questions()) {
        bench::BenchmarkQuestion b;
        b.id = q.id;
        b.template_id = "science-demo";
        b.pattern = q.pattern;
        b.question = q.text;
        b.graph_id = "science";
        if (!q.gold.empty()) b.gold_answers = q.gold;
        out += bench::to_json_line(b) + "\n";
    }
    return write_text(dir / "questions.jsonl", out);
}

// Scripted replies for the eight-question demo run. Rule order matters:
// marker needles (which appear only in one prompt kind each) come first,
// bare question texts last, so a question embedded inside a later prompt
// never hijacks the lookup. Responses for one needle are consumed in call
// order.
void add_demo_rules(llm::ScriptedBackend& script) {
    const std::string dev_ug = "MATCH (s {id: 'ug'})-[:developer]->(o) RETURN o";
    const std::string dev_tr = "MATCH (s {id: 'tr'})-[:developer]->(o) RETURN o";

    // instantiate calls, in pipeline order
    script.add("Concrete question:", "Tell me about Isaac Newton.");
    script.add("Concrete question:", "Was Isaac Newton influenced by Galileo?");
    script.add("Concrete question:", "Who developed the Theory of Relativity?");
    script.add("Concrete question:",
               "How are Isaac Newton and Albert Einstein related?");
    script.add("Concrete question:", "Who developed the Theory of Relativity?");
    script.add("Concrete question:",
               "Do Isaac Newton and Albert Einstein share similar perspectives "
               "about gravitation?");

    // generate calls, in pipeline order
    script.add("Cypher query:",
               "MATCH (s {id: 'in'})-[:developed]->(o) RETURN DISTINCT o");
    script.add("Cypher query:",
               "MATCH P = SHORTEST 10 (s {id: 'in'})-[:field|inv_field*]->"
               "(o {id: 'ae'}) RETURN P");
    script.add("Cypher query:", dev_ug);   // q5 step 1
    script.add("Cypher query:", dev_ug);   // q6 step 1
    script.add("Cypher query:",
               "MATCH (s {id: 'in'})-[:influenced_by]->(o) RETURN o");
    script.add("Cypher query:", dev_ug);   // q7 step 1
    script.add("Cypher query:", dev_tr);   // q7 step 2
    script.add("Cypher query:", dev_ug);   // q8 step 1
    script.add("Cypher query:", dev_tr);   // q8 step 2
    script.add("Cypher query:",
               "MATCH P = SHORTEST 10 (s {id: 'in'})-[:developed|developer|"
               "field|inv_field*]->(o {id: 'ae'}) RETURN P");

    // summaries, one per question
    script.add("Answer the original question.",
               "Isaac Newton was a scientist in the field of physics, born in "
               "1643. He developed universal gravitation and the laws of "
               "motion, and was influenced by Galileo.");
    script.add("Answer the original question.",
               "Isaac Newton developed the theory of universal gravitation "
               "and the laws of motion.");
    script.add("Answer the original question.",
               "Isaac Newton and Albert Einstein are connected through "
               "physics: both worked in that field.");
    script.add("Answer the original question.",
               "Yes. Isaac Newton and Albert Einstein both contributed to the "
               "field of physics.");
    script.add("Answer the original question.",
               "The scientist who developed universal gravitation is Isaac "
               "Newton, a physicist born in 1643 who also set down the laws "
               "of motion.");
    script.add("Answer the original question.",
               "Isaac Newton: he developed universal gravitation and was "
               "influenced by Galileo.");
    script.add("Answer the original question.",
               "Isaac Newton developed universal gravitation and Albert "
               "Einstein developed the theory of relativity; the two are "
               "connected through the field of physics.");
    script.add("Answer the original question.",
               "Both worked on gravitation: Isaac Newton through universal "
               "gravitation, Albert Einstein through the theory of "
               "relativity, and both contributed to physics.");

    // categorize (and, for nested questions, decompose) replies keyed by
    // the bare question text
    auto q = demo_questions();
    script.add(q[0].text, "basic s**");
    script.add(q[1].text, "basic sp*");
    script.add(q[2].text, "basic s*o");
    script.add(q[3].text, "basic spo");
    script.add(q[4].text, "nested");
    script.add(q[4].text,
               "step 1: sp* | find the developer of universal gravitation\n"
               "step 2: s** | introduce the scientist found in step 1");
    script.add(q[5].text, "nested");
    script.add(q[5].text,
               "step 1: sp* | find the developer of universal gravitation\n"
               "step 2: sp* | find whether that scientist was influenced by "
               "Galileo");
    script.add(q[6].text, "nested");
    script.add(q[6].text,
               "step 1: sp* | find the developer of universal gravitation\n"
               "step 2: sp* | find the developer of the theory of relativity\n"
               "step 3: s*o | find the relations between the two scientists "
               "identified in the previous two steps");
    script.add(q[7].text, "nested");
    script.add(q[7].text,
               "step 1: sp* | find the developer of universal gravitation\n"
               "step 2: sp* | find the developer of the theory of relativity\n"
               "step 3: spo | check whether the two scientists share similar "
               "perspectives about gravitation");
}

Result<std::string> run_eight(const graph::PropertyGraph& g,
                              llm::Backend& backend) {
    llm::Gateway gateway(backend, kModel);
    planner::Planner planner(g, gateway);
    std::string traces;
    for (const auto& q : demo_questions()) {
        auto rec = planner.answer(q.text);
        if (!rec.ok)
            return Error{q.id + " failed at stage " + rec.failure_stage +
                         ": " + rec.answer};
        traces += planner::trace_to_jsonl(rec.plan);
    }
    return traces;
}

Result<Ok> record_demo_cassette(const graph::PropertyGraph& g,
                                const fs::path& path) {
    llm::ScriptedBackend script;
    add_demo_rules(script);
    auto rec = llm::RecordBackend::open(script, path.string());
    if (!rec) return Error{rec.error().message};
    auto traces = run_eight(g, **rec);
    if (!traces) return Error{traces.error().message};
    if (script.unmatched_calls() != 0)
        return Error{"scripted backend saw unmatched calls while recording"};

    // Replay twice; the traces must be byte-identical to each other.
    auto replay1 = llm::ReplayBackend::open(path.string());
    if (!replay1) return Error{replay1.error().message};
    auto t1 = run_eight(g, **replay1);
    if (!t1) return Error{"first replay: " + t1.error().message};
    auto replay2 = llm::ReplayBackend::open(path.string());
    if (!replay2) return Error{replay2.error().message};
    auto t2 = run_eight(g, **replay2);
    if (!t2) return Error{"second replay: " + t2.error().message};
    if (*t1 != *t2) return Error{"replayed traces differ between runs"};
    return Ok{};
}

// Correction-bound cassettes share one sp* question; the first scripts a
// model that never fixes its broken query, the second one that fixes it on
// the first correction.
Result<Ok> record_correction_cassettes(const graph::PropertyGraph& g,
                                       const fs::path& dir) {
    const std::string question =
        "What theories and principles has Isaac Newton developed?";
    const std::string bad = "MATCH (s {id: 'in'})-[:wrote]->(o) RETURN o";
    const std::string good =
        "MATCH (s {id: 'in'})-[:developed]->(o) RETURN DISTINCT o";

    struct Plan {
        const char* file;
        std::string corrected;
        std::string summary;
        int want_attempts;
        planner::StepStatus want_status;
    };
    const Plan plans[] = {
        {"never_corrects.jsonl", bad,
         "The graph holds no record of written works by Isaac Newton.", 4,
         planner::StepStatus::failed_exhausted},
        {"corrects_on_second.jsonl", good,
         "Isaac Newton developed universal gravitation and the laws of "
         "motion.",
         2, planner::StepStatus::succeeded},
    };

    for (const auto& p : plans) {
        llm::ScriptedBackend script;
        script.add("Cypher query:", bad);
        script.add("Corrected query:", p.corrected);
        script.add("Answer the original question.", p.summary);
        script.add(question, "basic sp*");

        auto rec = llm::RecordBackend::open(script, (dir / p.file).string());
        if (!rec) return Error{rec.error().message};
        llm::Gateway gateway(**rec, kModel);
        planner::Planner planner(g, gateway);
        auto ans = planner.answer(question);
        if (!ans.ok)
            return Error{std::string(p.file) + ": run failed: " + ans.answer};
        const auto& step = ans.plan.steps.at(0);
        if (static_cast<int>(step.attempts.size()) != p.want_attempts)
            return Error{std::string(p.file) + ": expected " +
                         std::to_string(p.want_attempts) + " attempts, got " +
                         std::to_string(step.attempts.size())};
        if (step.status != p.want_status)
            return Error{std::string(p.file) + ": unexpected step status " +
                         std::string(planner::to_string(step.status))};
    }
    return Ok{};
}

// ---------------------------------------------------------------------------
// academia/ — synthetic scholarly graph, 1,000 entities
// ---------------------------------------------------------------------------

void shuffle_indices(std::vector<int>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = bounded_draw(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

bool write_academia(const fs::path& dir) {
    const std::vector<std::string> firsts = {
        "Ada",    "Boris",  "Chen",   "Dara",   "Elio",  "Freya", "Goran",
        "Hana",   "Ivo",    "Jun",    "Kira",   "Lars",  "Mina",  "Noor",
        "Odin",   "Priya",  "Quinn",  "Rosa",   "Sven",  "Tara",  "Umar",
        "Vera",   "Wen",    "Xenia",  "Yusuf",  "Zara",  "Anders", "Bela",
        "Carmen", "Dmitri", "Esther", "Farid",  "Greta", "Hugo",  "Ines",
        "Jonas",  "Katya",  "Liam",   "Marta",  "Nils"};
    const std::vector<std::string> lasts = {
        "Aalto",   "Brandt",  "Castro", "Duarte",  "Eriksen", "Fontaine",
        "Gruber",  "Hoshino", "Ibarra", "Jansen",  "Kovacs",  "Lindqvist",
        "Moreau",  "Novak",   "Okafor", "Petrov",  "Quint",   "Rossi",
        "Sato",    "Tanaka",  "Ueda",   "Vargas",  "Weber",   "Xu",
        "Yilmaz",  "Zhang",   "Abe",    "Bianchi", "Costa",   "Dias"};
    const std::vector<std::string> adjectives = {
        "Adaptive",   "Bounded",     "Compact",   "Distributed", "Efficient",
        "Fast",       "Generalized", "Hybrid",    "Incremental", "Joint",
        "Kernelized", "Latent",      "Modular",   "Neural",      "Optimal",
        "Parallel",   "Quantized",   "Recursive", "Scalable",    "Sparse",
        "Streaming",  "Temporal",    "Unified",   "Variational", "Weighted"};
    const std::vector<std::string> topics = {
        "Graph Embeddings",    "Query Planning",      "Path Enumeration",
        "Index Structures",    "Subgraph Matching",   "Entity Resolution",
        "Knowledge Retrieval", "Schema Inference",    "Traversal Caching",
        "Relation Extraction", "Context Compression", "Answer Ranking",
        "Fact Verification",   "Join Ordering",       "Cost Estimation",
        "Sampling Methods",    "Stream Summaries",    "Vector Search",
        "Cache Coherence",     "Load Balancing"};
    const std::vector<std::string> venue_kinds = {
        "Journal of", "Conference on", "Workshop on", "Symposium on"};
    const std::vector<std::string> venue_fields = {
        "Graph Systems",        "Data Management",      "Knowledge Bases",
        "Query Processing",     "Information Networks", "Semantic Search",
        "Database Theory",      "Scalable Computing",   "Text Analytics",
        "Retrieval Research",   "Applied Reasoning",    "Data Integration",
        "Storage Systems",      "Web Intelligence",     "Language Interfaces",
        "Structured Inference", "Graph Learning",       "Stream Processing",
        "Metadata Quality",     "Benchmark Science",    "Open Data",
        "Digital Archives",     "Network Analysis",     "Answer Engineering",
        "Provenance Studies"};

    const int n_authors = 400;
    const int n_papers = 500;
    const int n_venues = 100;

    std::mt19937_64 rng(7);

    std::vector<int> author_combos(firsts.size() * lasts.size());
    for (std::size_t i = 0; i < author_combos.size(); ++i)
        author_combos[i] = static_cast<int>(i);
    shuffle_indices(author_combos, rng);

    std::vector<int> paper_combos(adjectives.size() * topics.size());
    for (std::size_t i = 0; i < paper_combos.size(); ++i)
        paper_combos[i] = static_cast<int>(i);
    shuffle_indices(paper_combos, rng);

    std::vector<int> venue_combos(venue_kinds.size() * venue_fields.size());
    for (std::size_t i = 0; i < venue_combos.size(); ++i)
        venue_combos[i] = static_cast<int>(i);
    shuffle_indices(venue_combos, rng);

    std::string nodes;
    for (int i = 0; i < n_authors; ++i) {
        int c = author_combos[i];
        std::string name =
            firsts[c / lasts.size()] + " " + lasts[c % lasts.size()];
        nodes += node_line("a" + std::to_string(i + 1), "author", name);
    }
    std::vector<std::int64_t> years(n_papers);
    for (int i = 0; i < n_papers; ++i) {
        int c = paper_combos[i];
        std::string title =
            adjectives[c / topics.size()] + " " + topics[c % topics.size()];
        years[i] = 1985 + static_cast<std::int64_t>(bounded_draw(rng, 40));
        nodes += node_line("p" + std::to_string(i + 1), "paper", title,
                           {{"year", Scalar{years[i]}}});
    }
    for (int i = 0; i < n_venues; ++i) {
        int c = venue_combos[i];
        std::string name = venue_kinds[c / venue_fields.size()] + " " +
                           venue_fields[c % venue_fields.size()];
        nodes += node_line("v" + std::to_string(i + 1), "venue", name);
    }

    // Closed edge set: every edge is written in both directions, so inverse
    // materialization is a no-op and the on-disk file already shows the full
    // adjacency.
    std::string edges;
    auto closed = [&](const std::string& src, const std::string& fwd,
                      const std::string& dst, const std::string& back) {
        edges += edge_line(src, fwd, dst);
        edges += edge_line(dst, back, src);
    };

    for (int p = 0; p < n_papers; ++p) {
        const std::string pid = "p" + std::to_string(p + 1);
        // First authorship is round-robin over the author list so everyone
        // has at least one paper; extra slots go to random co-authors.
        std::vector<int> authors{p % n_authors};
        int extra = static_cast<int>(bounded_draw(rng, 3));  // 0..2
        while (static_cast<int>(authors.size()) < 1 + extra) {
            int a = static_cast<int>(bounded_draw(rng, n_authors));
            if (std::find(authors.begin(), authors.end(), a) == authors.end())
                authors.push_back(a);
        }
        for (int a : authors)
            closed(pid, "author", "a" + std::to_string(a + 1), "paper");

        int v = static_cast<int>(bounded_draw(rng, n_venues));
        closed(pid, "venue", "v" + std::to_string(v + 1), "paper");

        if (p > 0) {
            int refs = static_cast<int>(bounded_draw(rng, 4));  // 0..3
            std::vector<int> chosen;
            for (int r = 0; r < refs; ++r) {
                int j = static_cast<int>(bounded_draw(rng, p));
                if (std::find(chosen.begin(), chosen.end(), j) != chosen.end())
                    continue;
                chosen.push_back(j);
                closed(pid, "reference", "p" + std::to_string(j + 1),
                       "cited_by");
            }
        }
    }

    ordered_json hint;
    hint["inverse_map"] = {
        {"author", "paper"}, {"venue", "paper"}, {"reference", "cited_by"}};

    return write_text(dir / "nodes.jsonl", nodes) &&
           write_text(dir / "edges.jsonl", edges) &&
           write_text(dir / "hint.json", hint.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("fixtures");
    std::error_code ec;
    for (const char* sub : {"newton", "science", "academia"}) {
        fs::create_directories(root / sub, ec);
        if (ec) return fail("cannot create " + (root / sub).string());
    }

    if (!write_newton(root / "newton")) return fail("writing newton fixture");
    auto newton = load_fixture_graph(root / "newton");
    if (!newton) return fail("newton reload: " + newton.error().message);
    std::cout << "newton: " << newton->entities().size() << " entities, "
              << newton->original_relation_count() << " relations ("
              << newton->relations().size() << " after inverses)\n";

    if (!write_science_graph(root / "science"))
        return fail("writing science graph");
    if (!write_science_questions(root / "science"))
        return fail("writing science questions");
    auto science = load_fixture_graph(root / "science");
    if (!science) return fail("science reload: " + science.error().message);
    std::cout << "science: " << science->entities().size() << " entities, "
              << science->relations().size() << " relations after inverses\n";

    auto demo = record_demo_cassette(*science,
                                     root / "science" / "eight_questions.jsonl");
    if (!demo) return fail("demo cassette: " + demo.error().message);
    std::cout << "science: eight_questions.jsonl recorded and replayed\n";

    auto corr = record_correction_cassettes(*science, root / "science");
    if (!corr) return fail("correction cassettes: " + corr.error().message);
    std::cout << "science: correction cassettes recorded\n";

    if (!write_academia(root / "academia"))
        return fail("writing academia fixture");
    auto academia = load_fixture_graph(root / "academia");
    if (!academia) return fail("academia reload: " + academia.error().message);
    if (academia->entities().size() != 1000)
        return fail("academia entity count drifted");
    if (academia->relations().size() !=
        academia->original_relation_count())
        return fail("academia edge set is not closed under inverses");
    std::cout << "academia: " << academia->entities().size() << " entities, "
              << academia->relations().size() << " relations\n";

    std::cout << "fixtures written under " << root.string() << "\n";
    return 0;
}
