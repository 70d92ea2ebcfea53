#include "polyg/context/builder.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "polyg/core/scalar.hpp"

namespace polyg::context {

namespace {

using graph::PropertyGraph;
using graph::Relation;

std::string render_attrs(const graph::AttrMap& attrs) {
    std::string out;
    for (const auto& [k, v] : attrs) {
        if (!out.empty()) out += ", ";
        out += k + "=" + scalar_to_string(v);
    }
    return out;
}

// The natural orientation of a synthesized inverse edge: the relation it
// was generated from, named by undoing the "inv_" prefix rule.
std::string original_rel_name(const std::string& rel_type) {
    if (rel_type.rfind("inv_", 0) == 0) return rel_type.substr(4);
    return "inv_" + rel_type;
}

struct Referenced {
    std::set<std::uint32_t> entities;
    std::set<std::uint32_t> relations;
    std::vector<const exec::PathValue*> paths;
    bool scalars = false;
};

Referenced collect(const exec::ResultTable& result) {
    Referenced ref;
    for (const auto& row : result.rows) {
        for (const auto& cell : row) {
            if (const auto* e = std::get_if<exec::EntityRef>(&cell)) {
                ref.entities.insert(e->index);
            } else if (const auto* r = std::get_if<exec::RelationRef>(&cell)) {
                ref.relations.insert(r->index);
            } else if (const auto* p = std::get_if<exec::PathValue>(&cell)) {
                ref.paths.push_back(p);
                for (auto n : p->nodes) ref.entities.insert(n);
                for (auto r2 : p->rels) ref.relations.insert(r2);
            } else if (!std::holds_alternative<std::monostate>(cell)) {
                ref.scalars = true;
            }
        }
    }
    return ref;
}

std::string render_path(const PropertyGraph& g, const exec::PathValue& p) {
    std::string out = g.entity(p.nodes[0]).name;
    for (std::size_t i = 0; i < p.rels.size(); ++i) {
        const Relation& r = g.relation(p.rels[i]);
        // Forward hop when the edge leaves the current node; otherwise the
        // hop rode a synthesized inverse and reads better reversed.
        if (r.synthesized) {
            out += " <-(" + original_rel_name(r.rel_type) + ")- ";
        } else {
            out += " -(" + r.rel_type + ")-> ";
        }
        out += g.entity(p.nodes[i + 1]).name;
    }
    return out;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    std::string out;
    auto emit = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            line += row[c];
            if (c + 1 < row.size()) {
                line.append(widths[c] - row[c].size() + 2, ' ');
            }
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line;
        out += '\n';
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return out;
}

struct Sections {
    std::vector<std::vector<std::string>> entity_rows;
    std::vector<std::vector<std::string>> relation_rows;
    std::vector<std::string> path_rows;
    std::vector<std::vector<std::string>> value_rows;
    bool paths_section = false;
};

std::string render(const Sections& s, std::size_t dropped) {
    std::string out;
    if (!s.entity_rows.empty()) {
        out += "Entities:\n";
        out += render_table({"id", "type", "name", "attributes"}, s.entity_rows);
    }
    if (!s.relation_rows.empty()) {
        if (!out.empty()) out += '\n';
        out += "Relations:\n";
        out += render_table({"source", "relations", "target", "attributes"},
                            s.relation_rows);
    }
    if (s.paths_section) {
        if (!out.empty()) out += '\n';
        out += "Paths:\n";
        for (const auto& p : s.path_rows) {
            out += p;
            out += '\n';
        }
        if (s.path_rows.empty()) out += "(none)\n";
    }
    if (!s.value_rows.empty()) {
        if (!out.empty()) out += '\n';
        out += "Values:\n";
        out += render_table({"column", "value"}, s.value_rows);
    }
    if (dropped > 0) {
        if (!out.empty()) out += '\n';
        out += "[truncated: " + std::to_string(dropped) +
               " rows dropped to fit budget]\n";
    }
    return out;
}

}  // namespace

ContextBundle build_bundle(const PropertyGraph& g,
                           const exec::ResultTable& result,
                           taxonomy::Pattern pattern, std::size_t budget) {
    ContextBundle bundle;
    bundle.budget = budget;
    bundle.has_paths_section = pattern == taxonomy::Pattern::sxo ||
                               pattern == taxonomy::Pattern::spo;

    if (result.empty()) {
        bundle.text = "no facts retrieved\n";
        return bundle;
    }

    Referenced ref = collect(result);

    // Closure: the relation table names entities, so their rows must exist.
    for (auto idx : ref.relations) {
        const Relation& r = g.relation(idx);
        ref.entities.insert(r.src);
        ref.entities.insert(r.dst);
    }

    for (auto idx : ref.entities) {
        const auto& e = g.entity(idx);
        bundle.entities.push_back({e.id, e.type, e.name, render_attrs(e.attrs)});
    }
    std::sort(bundle.entities.begin(), bundle.entities.end(),
              [](const EntityRow& a, const EntityRow& b) { return a.id < b.id; });

    // Aggregate referenced relations per (source, target) pair, flipping
    // synthesized inverse edges back to their original orientation first.
    struct PairFacts {
        std::set<std::string> rels;
        std::string attrs;
    };
    std::map<std::pair<std::string, std::string>, PairFacts> pairs;
    std::map<std::pair<std::string, std::string>, std::pair<std::string, std::string>>
        pair_names;
    for (auto idx : ref.relations) {
        const Relation& r = g.relation(idx);
        const auto& src = g.entity(r.synthesized ? r.dst : r.src);
        const auto& dst = g.entity(r.synthesized ? r.src : r.dst);
        std::string rel = r.synthesized ? original_rel_name(r.rel_type) : r.rel_type;
        auto key = std::make_pair(src.id, dst.id);
        auto& facts = pairs[key];
        pair_names[key] = {src.name, dst.name};
        if (facts.rels.insert(rel).second && !r.attrs.empty()) {
            std::string rendered = rel + "(" + render_attrs(r.attrs) + ")";
            facts.attrs += facts.attrs.empty() ? rendered : "; " + rendered;
        }
    }
    for (const auto& [key, facts] : pairs) {
        std::string rels;
        for (const auto& rel : facts.rels) {
            rels += rels.empty() ? rel : ", " + rel;
        }
        const auto& names = pair_names[key];
        bundle.relations.push_back({names.first, rels, names.second, facts.attrs});
    }
    std::sort(bundle.relations.begin(), bundle.relations.end(),
              [](const RelationRow& a, const RelationRow& b) {
                  return std::tie(a.src, a.rels, a.dst) <
                         std::tie(b.src, b.rels, b.dst);
              });

    if (bundle.has_paths_section) {
        for (const auto* p : ref.paths) bundle.paths.push_back(render_path(g, *p));
    }

    Sections sections;
    sections.paths_section = bundle.has_paths_section;
    for (const auto& e : bundle.entities) {
        sections.entity_rows.push_back({e.id, e.type, e.name, e.attrs});
    }
    for (const auto& r : bundle.relations) {
        sections.relation_rows.push_back({r.src, r.rels, r.dst, r.attrs});
    }
    sections.path_rows = bundle.paths;

    // Scalar-only results (aggregates and the like) would otherwise render
    // nothing at all.
    if (ref.scalars && sections.entity_rows.empty() &&
        sections.relation_rows.empty() && sections.path_rows.empty()) {
        for (const auto& row : result.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (std::holds_alternative<std::monostate>(row[c])) continue;
                sections.value_rows.push_back(
                    {result.columns[c], exec::value_to_string(g, row[c])});
            }
        }
    }

    std::size_t dropped = 0;
    bundle.text = render(sections, dropped);
    while (bundle.text.size() > budget) {
        if (!sections.path_rows.empty()) {
            sections.path_rows.pop_back();
            bundle.paths.pop_back();
        } else if (!sections.value_rows.empty()) {
            sections.value_rows.pop_back();
        } else if (!sections.relation_rows.empty()) {
            sections.relation_rows.pop_back();
            bundle.relations.pop_back();
        } else if (!sections.entity_rows.empty()) {
            sections.entity_rows.pop_back();
            bundle.entities.pop_back();
        } else {
            break;
        }
        ++dropped;
        bundle.text = render(sections, dropped);
    }
    bundle.truncated_rows = dropped;
    return bundle;
}

std::vector<llm::Message> render_summary_prompt(
    const std::string& question, const std::vector<StepRecord>& steps,
    const std::optional<std::string>& facts) {
    std::ostringstream user;
    user << "Original question: " << question << "\n\n";
    for (std::size_t i = 0; i < steps.size(); ++i) {
        user << "Sub-question " << (i + 1) << ": " << steps[i].sub_question
             << "\n";
        user << "Answer " << (i + 1) << ": "
             << (steps[i].answer.empty() ? "no answer found" : steps[i].answer)
             << "\n\n";
    }
    if (facts) {
        user << "Retrieved facts:\n" << *facts;
        if (facts->empty() || facts->back() != '\n') user << '\n';
        user << '\n';
    }
    user << "Answer the original question.";

    return {
        {"system",
         "You answer questions about a knowledge graph. Use only the "
         "sub-question answers and retrieved facts provided; do not invent "
         "entities or relations. If the facts are insufficient, say so."},
        {"user", user.str()},
    };
}

}  // namespace polyg::context
