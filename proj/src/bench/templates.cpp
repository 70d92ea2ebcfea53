#include "polyg/bench/templates.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "polyg/core/text.hpp"
#include "polyg/cypher/parser.hpp"
#include "polyg/cypher/render.hpp"
#include "polyg/cypher/validate.hpp"

namespace polyg::bench {

using nlohmann::json;

std::vector<std::string> extract_slots(const std::string& text) {
    std::vector<std::string> slots;
    std::set<std::string> seen;
    std::size_t pos = 0;
    while ((pos = text.find('[', pos)) != std::string::npos) {
        auto close = text.find(']', pos + 1);
        if (close == std::string::npos) break;
        std::string name = text.substr(pos + 1, close - pos - 1);
        if (!name.empty() && name.find('[') == std::string::npos) {
            if (seen.insert(name).second) slots.push_back(name);
        }
        pos = close + 1;
    }
    return slots;
}

std::string substitute_slots(const std::string& text,
                             const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto open = text.find('[', pos);
        if (open == std::string::npos) {
            out += text.substr(pos);
            break;
        }
        auto close = text.find(']', open + 1);
        if (close == std::string::npos) {
            out += text.substr(pos);
            break;
        }
        out += text.substr(pos, open - pos);
        std::string name = text.substr(open + 1, close - open - 1);
        auto it = values.find(name);
        if (it != values.end()) {
            out += it->second;
        } else {
            out += text.substr(open, close - open + 1);
        }
        pos = close + 1;
    }
    return out;
}

namespace {

// Mirrors the executor's result column naming: alias, else rendered
// projection.
std::vector<std::string> result_columns(const cypher::CypherQuery& q) {
    std::vector<std::string> out;
    for (const auto& p : q.ret.projections) {
        if (p.alias) {
            out.push_back(*p.alias);
        } else {
            out.push_back(cypher::render(p));
        }
    }
    return out;
}

Result<graph::GraphSchema> parse_schema(const json& j) {
    graph::GraphSchema schema;
    if (!j.is_object() || !j.contains("entities") || !j.contains("relations"))
        return Error{"schema needs \"entities\" and \"relations\""};
    for (const auto& [type, props] : j.at("entities").items()) {
        auto& set = schema.entity_types[type];
        set.insert("id");
        set.insert("name");
        set.insert("node_type");
        if (!props.is_array()) return Error{"entity properties must be an array"};
        for (const auto& p : props) set.insert(p.get<std::string>());
    }
    for (const auto& triple : j.at("relations")) {
        if (!triple.is_array() || triple.size() != 3)
            return Error{"relations must be [src, rel, dst] triples"};
        schema.relation_types.insert({triple[0].get<std::string>(),
                                      triple[1].get<std::string>(),
                                      triple[2].get<std::string>()});
    }
    return schema;
}

Result<cypher::CypherQuery> checked_query(const std::string& text,
                                          const graph::GraphSchema& schema,
                                          const std::string& what) {
    auto parsed = cypher::parse(text);
    if (!parsed) return Error{what + ": " + parsed.error().to_string()};
    auto violations = cypher::validate(*parsed, schema);
    if (!violations.empty()) {
        std::vector<std::string> parts;
        for (const auto& v : violations) parts.push_back(v.message);
        return Error{what + ": " + join(parts, "; ")};
    }
    return std::move(*parsed);
}

}  // namespace

Result<TemplateFile> load_templates(std::istream& in, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        return Error{origin + ": " + e.what()};
    }
    if (!doc.is_object() || !doc.contains("domain") || !doc.contains("schema") ||
        !doc.contains("templates")) {
        return Error{origin + ": needs \"domain\", \"schema\" and \"templates\""};
    }

    TemplateFile file;
    file.domain = doc.at("domain").get<std::string>();
    auto schema = parse_schema(doc.at("schema"));
    if (!schema) return Error{origin + ": " + schema.error().message};
    file.schema = std::move(*schema);

    std::set<std::string> ids;
    for (const auto& t : doc.at("templates")) {
        QuestionTemplate out;
        if (!t.is_object() || !t.contains("id") || !t.contains("pattern") ||
            !t.contains("text") || !t.contains("selection")) {
            return Error{origin + ": template needs id, pattern, text and "
                         "selection"};
        }
        out.id = t.at("id").get<std::string>();
        const std::string where = origin + ", template " + out.id;
        if (out.id.empty() || !ids.insert(out.id).second)
            return Error{where + ": empty or duplicate id"};

        auto pattern = taxonomy::pattern_from_string(
            t.at("pattern").get<std::string>());
        if (!pattern)
            return Error{where + ": unknown pattern \"" +
                         t.at("pattern").get<std::string>() + "\""};
        out.pattern = *pattern;

        out.text = t.at("text").get<std::string>();
        out.slots = extract_slots(out.text);
        if (out.slots.empty())
            return Error{where + ": text has no [slot] placeholder"};

        out.selection_text = t.at("selection").get<std::string>();
        auto selection =
            checked_query(out.selection_text, file.schema, where + ", selection");
        if (!selection) return Error{selection.error().message};
        out.selection = std::move(*selection);

        auto columns = result_columns(out.selection);
        for (const auto& slot : out.slots) {
            bool bound = false;
            for (const auto& c : columns) bound = bound || c == slot;
            if (!bound)
                return Error{where + ": slot [" + slot +
                             "] is not a selection column"};
        }

        if (t.contains("answer") && !t.at("answer").is_null()) {
            if (out.pattern != taxonomy::Pattern::spx &&
                out.pattern != taxonomy::Pattern::nested) {
                return Error{where + ": answer queries are only supported on "
                             "sp* and nested templates"};
            }
            out.answer_text = t.at("answer").get<std::string>();
            auto answer =
                checked_query(*out.answer_text, file.schema, where + ", answer");
            if (!answer) return Error{answer.error().message};
        }
        file.templates.push_back(std::move(out));
    }
    return file;
}

Result<TemplateFile> load_templates_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return Error{"cannot read template file " + path};
    return load_templates(in, path);
}

}  // namespace polyg::bench
