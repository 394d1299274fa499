#include "mman/dataset.hpp"

#include <fstream>

#include "json.hpp"
#include "mman/description.hpp"
#include "mman/errors.hpp"
#include "mman/lexer.hpp"

namespace mman {

namespace {

using nlohmann::json;

json ast_to_json(const BinaryAst& ast, int id) {
    const BinaryAstNode& n = ast.node(id);
    json left = n.left >= 0 ? ast_to_json(ast, n.left) : json(nullptr);
    json right = n.right >= 0 ? ast_to_json(ast, n.right) : json(nullptr);
    return json::array({n.label, std::move(left), std::move(right)});
}

// ids are assigned in visit order, which matches the pre-order numbering the
// binarizer produces
int ast_from_json(const json& j, BinaryAst& ast) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_string()) {
        throw Error("malformed tree node in dataset record");
    }
    int id = static_cast<int>(ast.nodes.size());
    ast.nodes.push_back(BinaryAstNode{id, j[0].get<std::string>(), -1, -1});
    if (!j[1].is_null()) ast.nodes[static_cast<std::size_t>(id)].left = ast_from_json(j[1], ast);
    if (!j[2].is_null()) ast.nodes[static_cast<std::size_t>(id)].right = ast_from_json(j[2], ast);
    return id;
}

json cfg_to_json(const Cfg& cfg) {
    json vertices = json::array();
    for (const auto& v : cfg.vertices) {
        vertices.push_back({{"id", v.id}, {"kind", v.kind}, {"text", v.text}});
    }
    json edges = json::array();
    for (const auto& e : cfg.edges) {
        edges.push_back(json::array({e.src, e.dst, edge_type_name(e.type)}));
    }
    return {{"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

Cfg cfg_from_json(const json& j) {
    Cfg cfg;
    cfg.entry = -1;
    cfg.exit = -1;
    for (const auto& v : j.at("vertices")) {
        CfgVertex vertex;
        vertex.id = v.at("id").get<int>();
        vertex.kind = v.at("kind").get<std::string>();
        vertex.text = v.at("text").get<std::string>();
        if (vertex.id != static_cast<int>(cfg.vertices.size())) {
            throw Error("graph vertex ids must be contiguous from 0");
        }
        if (vertex.kind == "entry") cfg.entry = vertex.id;
        if (vertex.kind == "exit") cfg.exit = vertex.id;
        cfg.vertices.push_back(std::move(vertex));
    }
    if (cfg.entry < 0 || cfg.exit < 0) throw Error("graph lacks entry or exit vertex");
    const int n = static_cast<int>(cfg.vertices.size());
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3) throw Error("malformed graph edge");
        CfgEdge edge;
        edge.src = e[0].get<int>();
        edge.dst = e[1].get<int>();
        edge.type = edge_type_from_name(e[2].get<std::string>());
        if (edge.src < 0 || edge.src >= n || edge.dst < 0 || edge.dst >= n) {
            throw Error("graph edge endpoint out of range");
        }
        cfg.edges.push_back(edge);
    }
    return cfg;
}

std::vector<std::string> string_list(const json& j, const char* field) {
    std::vector<std::string> out;
    for (const auto& item : j.at(field)) {
        if (!item.is_string()) throw Error(std::string("field ") + field + " must hold strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

json parse_line(const std::string& line, const std::filesystem::path& path, std::size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error("malformed record at " + path.string() + ":" + std::to_string(line_no));
    }
    return j;
}

}  // namespace

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open corpus file: " + path.string());
    std::vector<CorpusRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        CorpusRecord r;
        r.id = j.at("id").get<std::string>();
        r.code = j.at("code").get<std::string>();
        r.description = j.at("description").get<std::string>();
        records.push_back(std::move(r));
    }
    return records;
}

void save_corpus(const std::vector<CorpusRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open corpus file for writing: " + path.string());
    for (const auto& r : records) {
        json j = {{"id", r.id}, {"code", r.code}, {"description", r.description}};
        out << j.dump() << '\n';
    }
    if (!out) throw Error("failed writing corpus file: " + path.string());
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open dataset file: " + path.string());
    std::vector<DatasetRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, path, line_no);
        DatasetRecord r;
        r.id = j.at("id").get<std::string>();
        r.name_tokens = string_list(j, "name_tokens");
        r.body_tokens = string_list(j, "body_tokens");
        r.description_tokens = string_list(j, "description_tokens");
        r.ast.root = ast_from_json(j.at("ast"), r.ast);
        r.cfg = cfg_from_json(j.at("cfg"));
        records.push_back(std::move(r));
    }
    return records;
}

void save_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open dataset file for writing: " + path.string());
    for (const auto& r : records) {
        json j = {
            {"id", r.id},
            {"name_tokens", r.name_tokens},
            {"body_tokens", r.body_tokens},
            {"description_tokens", r.description_tokens},
            {"ast", ast_to_json(r.ast, r.ast.root)},
            {"cfg", cfg_to_json(r.cfg)},
        };
        out << j.dump() << '\n';
    }
    if (!out) throw Error("failed writing dataset file: " + path.string());
}

DatasetRecord extract_record(const CorpusRecord& record, int desc_cap) {
    RawAst raw = parse(record.code);
    DatasetRecord r;
    r.id = record.id;
    r.name_tokens = split_identifier(raw.node(raw.root).label);
    r.body_tokens = lex(record.code).tokens;
    r.description_tokens = extract_description(record.description, static_cast<std::size_t>(desc_cap));
    r.ast = binarize(raw);
    r.cfg = simplify_cfg(build_cfg(raw));
    return r;
}

std::vector<DatasetRecord> extract_corpus(const std::vector<CorpusRecord>& corpus, int desc_cap,
                                          ExtractionStats& stats) {
    std::vector<DatasetRecord> out;
    for (const auto& record : corpus) {
        try {
            out.push_back(extract_record(record, desc_cap));
            ++stats.written;
        } catch (const ParseError&) {
            ++stats.parse_failures;
        } catch (const UnsupportedConstruct&) {
            ++stats.unsupported;
        } catch (const NoDescription&) {
            ++stats.no_description;
        } catch (const TooLarge&) {
            ++stats.graph_too_large;
        }
    }
    return out;
}

}  // namespace mman
