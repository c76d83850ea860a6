#include "cmt/document.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cmt {

namespace {

using nlohmann::json;

CMatrix parse_matrix(const json& j, Index rows, Index cols, const std::string& name) {
    if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
        throw ParseError(name + ": expected " + std::to_string(rows) + " rows");
    }
    CMatrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw ParseError(name + ": row " + std::to_string(r) + " must have " +
                             std::to_string(cols) + " entries");
        }
        for (Index c = 0; c < cols; ++c) {
            const json& e = row[static_cast<size_t>(c)];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                throw ParseError(name + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") must be a [re, im] pair");
            }
            m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

json must_get(const json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("missing required field '") + key + "'");
    return j.at(key);
}

}  // namespace

ComplexDocument parse_document(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("document root must be an object");

    ComplexDocument doc;
    doc.schema_version = must_get(j, "schema_version").get<std::string>();
    if (doc.schema_version != "cmt/1") {
        throw ParseError("unrecognized schema_version '" + doc.schema_version + "'");
    }
    const json dims = must_get(j, "dims");
    if (!dims.is_array() || dims.size() != 2) throw ParseError("dims must be [n0, n1]");
    const Index n0 = dims[0].get<Index>();
    const Index n1 = dims[1].get<Index>();
    if (n0 < 0 || n1 < 0) throw ParseError("dims must be nonnegative");
    doc.complex.n0 = n0;
    doc.complex.n1 = n1;
    doc.complex.d_eo = parse_matrix(must_get(j, "d_eo"), n1, n0, "d_eo");
    doc.complex.d_oe = parse_matrix(must_get(j, "d_oe"), n0, n1, "d_oe");
    doc.complex.ds_eo = parse_matrix(must_get(j, "ds_eo"), n1, n0, "ds_eo");
    doc.complex.ds_oe = parse_matrix(must_get(j, "ds_oe"), n0, n1, "ds_oe");
    ensure_finite(doc.complex.d_eo, "d_eo");
    ensure_finite(doc.complex.d_oe, "d_oe");
    ensure_finite(doc.complex.ds_eo, "ds_eo");
    ensure_finite(doc.complex.ds_oe, "ds_oe");

    if (j.contains("labels")) {
        const json& labels = j.at("labels");
        if (!labels.is_object()) throw ParseError("labels must be an object of strings");
        for (auto it = labels.begin(); it != labels.end(); ++it) {
            if (!it.value().is_string()) throw ParseError("label values must be strings");
            doc.labels[it.key()] = it.value().get<std::string>();
        }
    }
    if (j.contains("bases")) {
        const json& bases = j.at("bases");
        if (!bases.is_object()) throw ParseError("bases must be an object");
        for (auto it = bases.begin(); it != bases.end(); ++it) {
            const json& b = it.value();
            CohBases cb;
            cb.coh_id = it.key();
            cb.hom_id = it.key();
            auto grab = [&](const char* key, Index rows) {
                const json m = must_get(b, key);
                if (!m.is_array()) throw ParseError(std::string(key) + " must be an array");
                const Index cols =
                    (m.empty() || !m[0].is_array()) ? 0 : static_cast<Index>(m[0].size());
                return parse_matrix(m, rows, cols, key);
            };
            // Representative matrices always carry n_k rows (possibly 0 columns).
            cb.coh[0] = grab("coh0", n0);
            cb.coh[1] = grab("coh1", n1);
            cb.hom[0] = grab("hom0", n0);
            cb.hom[1] = grab("hom1", n1);
            doc.bases[it.key()] = std::move(cb);
        }
    }
    return doc;
}

ComplexDocument read_document(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_document(buf.str());
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_complex(const Complex& z) {
    return "[" + fmt_double(z.real()) + "," + fmt_double(z.imag()) + "]";
}

std::string fmt_matrix(const CMatrix& m) {
    std::string out = "[";
    for (Index r = 0; r < m.rows(); ++r) {
        if (r) out += ",";
        out += "[";
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) out += ",";
            out += fmt_complex(m(r, c));
        }
        out += "]";
    }
    out += "]";
    return out;
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace

std::string write_document(const ComplexDocument& doc) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"schema_version\": \"" << json_escape(doc.schema_version) << "\",\n";
    os << "  \"dims\": [" << doc.complex.n0 << "," << doc.complex.n1 << "],\n";
    os << "  \"d_eo\": " << fmt_matrix(doc.complex.d_eo) << ",\n";
    os << "  \"d_oe\": " << fmt_matrix(doc.complex.d_oe) << ",\n";
    os << "  \"ds_eo\": " << fmt_matrix(doc.complex.ds_eo) << ",\n";
    os << "  \"ds_oe\": " << fmt_matrix(doc.complex.ds_oe);
    if (!doc.labels.empty()) {
        os << ",\n  \"labels\": {";
        bool first = true;
        for (const auto& [k, v] : doc.labels) {
            if (!first) os << ",";
            os << "\"" << json_escape(k) << "\":\"" << json_escape(v) << "\"";
            first = false;
        }
        os << "}";
    }
    if (!doc.bases.empty()) {
        os << ",\n  \"bases\": {";
        bool first = true;
        for (const auto& [name, cb] : doc.bases) {
            if (!first) os << ",";
            os << "\"" << json_escape(name) << "\":{";
            os << "\"coh0\":" << fmt_matrix(cb.coh[0]) << ",";
            os << "\"coh1\":" << fmt_matrix(cb.coh[1]) << ",";
            os << "\"hom0\":" << fmt_matrix(cb.hom[0]) << ",";
            os << "\"hom1\":" << fmt_matrix(cb.hom[1]) << "}";
            first = false;
        }
        os << "}";
    }
    os << "\n}\n";
    return os.str();
}

void write_document_file(const ComplexDocument& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << write_document(doc);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid config JSON: ") + e.what());
    }
    RunConfig cfg;
    if (j.contains("rank_tol")) cfg.tols.rank_tol = j["rank_tol"].get<double>();
    if (j.contains("cluster_tol")) cfg.tols.cluster_tol = j["cluster_tol"].get<double>();
    if (j.contains("validation_tol")) cfg.tols.validation_tol = j["validation_tol"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("lambda")) cfg.lambdas = j["lambda"].get<std::vector<double>>();
    if (j.contains("eps")) cfg.eps_list = j["eps"].get<std::vector<double>>();
    if (j.contains("theta")) cfg.theta = j["theta"].get<double>();
    if (j.contains("format")) cfg.format = j["format"].get<std::string>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (cfg.tols.rank_tol <= 0 || cfg.tols.cluster_tol <= 0 || cfg.tols.validation_tol <= 0) {
        throw ParseError("config: tolerances must be positive");
    }
    if (!(cfg.theta > 0 && cfg.theta < 2 * 3.14159265358979323846)) {
        throw ParseError("config: theta must lie in (0, 2pi)");
    }
    return cfg;
}

}  // namespace cmt
