#include "mcreg/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace mcreg {

using nlohmann::json;

CovariateSchema parse_schema(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("schema is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("variables") || !doc["variables"].is_array())
        throw SchemaError("schema must be an object with a 'variables' array");
    std::vector<Variable> vars;
    for (const auto& jv : doc["variables"]) {
        if (!jv.is_object() || !jv.contains("name") || !jv.contains("kind"))
            throw SchemaError("each variable needs 'name' and 'kind'");
        Variable v;
        try {
            v.name = jv.at("name").get<std::string>();
            v.kind = variable_kind_from_string(jv.at("kind").get<std::string>());
            if (jv.contains("levels")) v.levels = jv.at("levels").get<std::vector<std::string>>();
            if (jv.contains("range")) {
                auto r = jv.at("range").get<std::vector<double>>();
                if (r.size() != 2) throw SchemaError("range of '" + v.name + "' must have two entries");
                v.lower = r[0];
                v.upper = r[1];
            }
        } catch (const json::exception& e) {
            throw SchemaError(std::string("malformed variable entry: ") + e.what());
        }
        vars.push_back(std::move(v));
    }
    return CovariateSchema(std::move(vars));
}

std::string schema_to_json(const CovariateSchema& schema) {
    json vars = json::array();
    for (const auto& v : schema.variables()) {
        json jv = {{"name", v.name}, {"kind", std::string(to_string(v.kind))}, {"levels", v.levels}};
        if (!v.categorical()) jv["range"] = {v.lower, v.upper};
        vars.push_back(jv);
    }
    return json{{"variables", vars}}.dump(2) + "\n";
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

CovariateSchema load_schema(const std::filesystem::path& path) { return parse_schema(read_text(path)); }

namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t lineno) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw IngestError("line " + std::to_string(lineno) + ": unterminated quote");
    out.push_back(std::move(cur));
    return out;
}

std::string quote_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

RawTable parse_csv(const std::string& text) {
    RawTable t;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!have_header) {
            if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
            t.header = split_line(line, lineno);
            have_header = true;
            continue;
        }
        auto cells = split_line(line, lineno);
        if (cells.size() != t.header.size())
            throw IngestError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                              " fields, found " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    if (!have_header) throw IngestError("CSV input has no header row");
    return t;
}

RawTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

std::string format_csv(const RawTable& table) {
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += quote_cell(cells[i]);
        }
        out += '\n';
    };
    emit(table.header);
    for (const auto& r : table.rows) emit(r);
    return out;
}

Dataset make_dataset(const RawTable& table, const CovariateSchema& schema, double tau) {
    int yc = table.column("y");
    if (yc < 0) throw IngestError("data has no 'y' column");
    Eigen::VectorXd y(static_cast<Eigen::Index>(table.rows.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::string& s = table.rows[i][static_cast<std::size_t>(yc)];
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || s.empty())
            throw IngestError("row " + std::to_string(i + 1) + ": cannot parse response '" + s + "'");
        if (!(v > 0.0)) throw IngestError("row " + std::to_string(i + 1) + ": response must be positive");
        y(static_cast<Eigen::Index>(i)) = v;
    }
    return Dataset(std::move(y), encode_design(schema, table), tau);
}

Dataset load_dataset(const std::filesystem::path& data, const CovariateSchema& schema, double tau) {
    return make_dataset(read_csv(data), schema, tau);
}

}  // namespace mcreg
