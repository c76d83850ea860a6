#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmt/torsion.hpp"

namespace cmt {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// On-disk form of a bi-complex: a versioned JSON document with the four
/// operator blocks as nested arrays of [re, im] pairs, optional provenance
/// labels and an optional registry of named (co)homology bases.
struct ComplexDocument {
    std::string schema_version = "cmt/1";
    BiComplex complex;
    std::map<std::string, std::string> labels;
    std::map<std::string, CohBases> bases;
};

/// Parses a document; throws ParseError with diagnostics on malformed input.
ComplexDocument parse_document(const std::string& text);
ComplexDocument read_document(const std::string& path);

/// Deterministic serialization: fixed key order, 17 significant digits
/// (exact binary64 round-trip), newline-terminated.
std::string write_document(const ComplexDocument& doc);
void write_document_file(const ComplexDocument& doc, const std::string& path);

struct RunConfig {
    Tolerances tols;
    std::uint64_t seed = 20250807;
    std::vector<double> lambdas;
    std::vector<double> eps_list;
    double theta = 3.14159265358979323846;  // Agmon angle, in (0, 2pi)
    std::string format = "table";           // "table" | "json"
    int threads = 1;
};

/// Reads a config file (JSON, same keys as the CLI flags); missing keys keep
/// their defaults.  CLI flags override file values.
RunConfig load_config(const std::string& path);

// Deterministic number formatting shared by every machine-readable artifact.
std::string fmt_double(double v);
std::string fmt_complex(const Complex& z);  // [re, im]
std::string fmt_matrix(const CMatrix& m);   // rows of [re, im] pairs

}  // namespace cmt
