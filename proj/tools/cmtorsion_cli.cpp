// Command-line front end: validate documents, compute torsions, generate
// models, run deformation sweeps and the property selftest.
//
// Exit codes: 0 ok, 1 math/policy failure, 2 parse/usage, 3 spectral cut
// collision, 4 infeasible generator request.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "cmt/deform.hpp"
#include "cmt/document.hpp"
#include "cmt/models.hpp"
#include "cmt/selftest.hpp"
#include "cmt/torsion.hpp"

namespace {

using namespace cmt;

constexpr int kExitOk = 0;
constexpr int kExitMath = 1;
constexpr int kExitParse = 2;
constexpr int kExitCut = 3;
constexpr int kExitInfeasible = 4;

struct GlobalOptions {
    std::string config_path;
    RunConfig cfg;
    bool rank_tol_set = false, cluster_tol_set = false, validation_tol_set = false;
    bool theta_set = false, seed_set = false, format_set = false, threads_set = false;
    double rank_tol = 1e-9, cluster_tol = 1e-7, validation_tol = 1e-10;
    double theta = 3.14159265358979323846;
    std::uint64_t seed = 20250807;
    std::string format = "table";
    int threads = 1;

    void resolve() {
        if (!config_path.empty()) cfg = load_config(config_path);
        if (rank_tol_set) cfg.tols.rank_tol = rank_tol;
        if (cluster_tol_set) cfg.tols.cluster_tol = cluster_tol;
        if (validation_tol_set) cfg.tols.validation_tol = validation_tol;
        if (theta_set) cfg.theta = theta;
        if (seed_set) cfg.seed = seed;
        if (format_set) cfg.format = format;
        if (threads_set) cfg.threads = threads;
        if (cfg.tols.rank_tol <= 0 || cfg.tols.cluster_tol <= 0 || cfg.tols.validation_tol <= 0) {
            throw ParseError("tolerances must be positive");
        }
        if (!(cfg.theta > 0 && cfg.theta < 2 * 3.14159265358979323846)) {
            throw ParseError("theta must lie in (0, 2pi)");
        }
    }
};

std::uint32_t parse_index_mask(const std::string& digits) {
    std::uint32_t mask = 0;
    for (char ch : digits) {
        if (ch < '1' || ch > '9') throw ParseError("flux index digits must be 1..9: " + digits);
        const int bit = ch - '1';
        if (mask & (1u << bit)) throw ParseError("repeated index in component: " + digits);
        mask |= 1u << bit;
    }
    return mask;
}

// "123:2.0" or "123:2.0:-0.5" components, comma separated.
std::vector<FormComponent> parse_form_spec(const std::string& spec) {
    std::vector<FormComponent> comps;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const size_t c1 = item.find(':');
        if (c1 == std::string::npos) throw ParseError("form component needs 'indices:coeff': " + item);
        const std::string digits = item.substr(0, c1);
        std::string rest = item.substr(c1 + 1);
        double re = 0, im = 0;
        const size_t c2 = rest.find(':');
        try {
            if (c2 == std::string::npos) {
                re = std::stod(rest);
            } else {
                re = std::stod(rest.substr(0, c2));
                im = std::stod(rest.substr(c2 + 1));
            }
        } catch (const std::exception&) {
            throw ParseError("bad coefficient in form component: " + item);
        }
        comps.push_back({parse_index_mask(digits), Complex(re, im)});
    }
    if (comps.empty()) throw ParseError("empty form specification");
    return comps;
}

Eigen::MatrixXd parse_metric_spec(int m, const std::string& spec) {
    if (spec.empty() || spec == "I") return Eigen::MatrixXd::Identity(m, m);
    if (spec.rfind("diag:", 0) == 0) {
        std::stringstream ss(spec.substr(5));
        std::string item;
        std::vector<double> vals;
        while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
        if (static_cast<int>(vals.size()) != m) throw ParseError("diag metric needs m entries");
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) g(i, i) = vals[static_cast<size_t>(i)];
        return g;
    }
    if (spec.rfind("exp:", 0) == 0) {
        const std::uint64_t s = std::stoull(spec.substr(4));
        SeededRng rng(s);
        const Eigen::MatrixXd sym = rng.sym_real(m, 1.0);
        return (0.35 * sym).exp();
    }
    throw ParseError("metric spec must be I, diag:..., or exp:<seed>");
}

// Metric path specs: "stretch:<i>" g(u) = I + u E_ii, or "exp:<seed>"
// g(u) = expm(u S) for a random symmetric S.
std::function<Eigen::MatrixXd(double)> parse_metric_path(int m, const std::string& spec) {
    if (spec.rfind("stretch:", 0) == 0) {
        const int i = std::stoi(spec.substr(8));
        if (i < 1 || i > m) throw ParseError("stretch index out of range");
        return [m, i](double u) {
            Eigen::MatrixXd g = Eigen::MatrixXd::Identity(m, m);
            g(i - 1, i - 1) = 1.0 + u;
            return g;
        };
    }
    if (spec.rfind("exp:", 0) == 0) {
        const std::uint64_t s = std::stoull(spec.substr(4));
        SeededRng rng(s);
        const Eigen::MatrixXd sym = rng.sym_real(m, 1.0);
        return [sym](double u) { return Eigen::MatrixXd((u * sym).exp()); };
    }
    throw ParseError("metric path spec must be stretch:<i> or exp:<seed>");
}

std::vector<double> parse_grid(const std::string& spec) {
    // "a:b:n" inclusive linspace
    std::stringstream ss(spec);
    std::string sa, sb, sn;
    if (!std::getline(ss, sa, ':') || !std::getline(ss, sb, ':') || !std::getline(ss, sn, ':')) {
        throw ParseError("param grid must be a:b:n");
    }
    const double a = std::stod(sa), b = std::stod(sb);
    const int n = std::stoi(sn);
    if (n < 1) throw ParseError("param grid needs at least one point");
    std::vector<double> grid;
    for (int i = 0; i < n; ++i) {
        grid.push_back(n == 1 ? a : a + (b - a) * double(i) / double(n - 1));
    }
    return grid;
}

std::string report_header(const std::string& command, const RunConfig& cfg) {
    std::ostringstream os;
    os << "{\n  \"tool\": \"cmtorsion\",\n  \"command\": \"" << command << "\",\n"
       << "  \"seed\": " << cfg.seed << ",\n  \"rank_tol\": " << fmt_double(cfg.tols.rank_tol)
       << ",\n  \"cluster_tol\": " << fmt_double(cfg.tols.cluster_tol) << ",\n";
    return os.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) return;
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ParseError("cannot write '" + out_path + "'");
    f << text;
}

// ---------------------------------------------------------------------------

int cmd_validate(const GlobalOptions& g, const std::string& path) {
    const ComplexDocument doc = read_document(path);
    const ValidationReport report = validate(doc.complex, g.cfg.tols.validation_tol);
    std::cout << report.to_string() << "\n";
    return report.pass ? kExitOk : kExitMath;
}

int cmd_torsion(const GlobalOptions& g, const std::string& path, double lambda, bool lambda_set,
                const std::string& basis_name, const std::string& out_path) {
    const ComplexDocument doc = read_document(path);
    const ValidationReport vr = validate(doc.complex, g.cfg.tols.validation_tol);
    if (!vr.pass) {
        std::cerr << "input fails validation:\n" << vr.to_string() << "\n";
        return kExitMath;
    }
    TorsionOptions opts;
    opts.tols = g.cfg.tols;
    if (!basis_name.empty()) {
        const auto it = doc.bases.find(basis_name);
        if (it == doc.bases.end()) throw ParseError("no basis named '" + basis_name + "' in document");
        opts.bases = it->second;
    }

    std::ostringstream js;
    js << report_header("torsion", g.cfg);
    js << "  \"input\": \"" << path << "\",\n";
    js << "  \"theta\": " << fmt_double(g.cfg.theta) << ",\n";

    TorsionValue value;
    if (lambda_set) {
        const TruncatedTorsion tt = torsion_truncated(doc.complex, lambda, opts);
        value = tt.value;
        std::cout << "torsion (lambda = " << lambda << ")\n";
        std::cout << "  coordinate: " << value.coord << "\n";
        std::cout << "  log|tau| = " << value.log_magnitude() << ", phase = " << value.phase()
                  << "\n";
        std::cout << "  bases: coh='" << value.coh_basis_id << "' hom='" << value.hom_basis_id
                  << "'\n";
        std::cout << "  tail graded determinant: " << tt.tail_factor << "\n";
        std::cout << "    det(d*d | C+^even_(lambda,inf)) = " << tt.tail_dets[0] << "\n";
        std::cout << "    det(d*d | C+^odd_(lambda,inf))  = " << tt.tail_dets[1] << "\n";
        const Complex ld0 = agmon_log_det(tt.tail_ops[0], g.cfg.theta, g.cfg.tols.rank_tol);
        const Complex ld1 = agmon_log_det(tt.tail_ops[1], g.cfg.theta, g.cfg.tols.rank_tol);
        std::cout << "    agmon log-dets at theta: " << ld0 << ", " << ld1 << "\n";
        std::cout << "  [0,lambda] factor: " << tt.low_coord << "\n";
        js << "  \"lambda\": " << fmt_double(lambda) << ",\n";
        js << "  \"tail_factor\": " << fmt_complex(tt.tail_factor) << ",\n";
        js << "  \"tail_dets\": [" << fmt_complex(tt.tail_dets[0]) << ","
           << fmt_complex(tt.tail_dets[1]) << "],\n";
        js << "  \"tail_agmon_log_dets\": [" << fmt_complex(ld0) << "," << fmt_complex(ld1)
           << "],\n";
        js << "  \"low_part\": " << fmt_complex(tt.low_coord) << ",\n";
    } else {
        value = torsion_definition(doc.complex, opts);
        std::cout << "torsion (definitional path)\n";
        std::cout << "  coordinate: " << value.coord << "\n";
        std::cout << "  log|tau| = " << value.log_magnitude() << ", phase = " << value.phase()
                  << "\n";
        std::cout << "  bases: coh='" << value.coh_basis_id << "' hom='" << value.hom_basis_id
                  << "'\n";
        js << "  \"lambda\": null,\n";
    }
    js << "  \"coord\": " << fmt_complex(value.coord) << ",\n";
    js << "  \"log_magnitude\": " << fmt_double(value.log_magnitude()) << ",\n";
    js << "  \"phase\": " << fmt_double(value.phase()) << ",\n";
    js << "  \"coh_basis\": \"" << value.coh_basis_id << "\",\n";
    js << "  \"hom_basis\": \"" << value.hom_basis_id << "\"\n}\n";
    if (g.cfg.format == "json") std::cout << js.str();
    emit(js.str(), out_path);
    return kExitOk;
}

struct GenerateArgs {
    std::string model;
    int m = 3;
    std::string flux_spec;
    std::string metric_spec = "I";
    int orientation = +1;
    std::string dims_spec = "4,4";
    std::string betti_spec = "0,0";
    std::string profile = "unit";
    std::string from_path;
    int p = 0;
    std::string out_path;
};

int cmd_generate(const GlobalOptions& g, const GenerateArgs& a) {
    ComplexDocument doc;
    if (a.model == "torus") {
        const std::vector<FormComponent> comps = parse_form_spec(a.flux_spec);
        const CVector flux = make_form(a.m, comps);
        const Eigen::MatrixXd metric = parse_metric_spec(a.m, a.metric_spec);
        const TorusModel tm = torus_model(a.m, metric, flux, a.orientation);
        doc.complex = tm.complex;
        doc.labels["model"] = "torus";
        doc.labels["m"] = std::to_string(a.m);
        doc.labels["flux"] = a.flux_spec;
        doc.labels["metric"] = a.metric_spec;
        doc.labels["orientation"] = std::to_string(a.orientation);
    } else if (a.model == "random") {
        long n0 = 0, n1 = 0, b0 = 0, b1 = 0;
        if (std::sscanf(a.dims_spec.c_str(), "%ld,%ld", &n0, &n1) != 2) {
            throw ParseError("--dims must be n0,n1");
        }
        if (std::sscanf(a.betti_spec.c_str(), "%ld,%ld", &b0, &b1) != 2) {
            throw ParseError("--betti must be b0,b1");
        }
        doc.complex = random_bicomplex(static_cast<Index>(n0), static_cast<Index>(n1),
                                       static_cast<Index>(b0), static_cast<Index>(b1),
                                       parse_profile(a.profile), g.cfg.seed);
        doc.labels["model"] = "random";
        doc.labels["dims"] = a.dims_spec;
        doc.labels["betti"] = a.betti_spec;
        doc.labels["profile"] = a.profile;
        doc.labels["seed"] = std::to_string(g.cfg.seed);
    } else if (a.model == "dolbeault-wrap") {
        if (a.from_path.empty()) throw ParseError("dolbeault-wrap needs --from <document>");
        const ComplexDocument src = read_document(a.from_path);
        const DolbeaultComplex dc =
            dolbeault_wrap(a.p, src.complex.d_eo, src.complex.d_oe, src.complex.ds_eo,
                           src.complex.ds_oe, g.cfg.tols.validation_tol);
        doc.complex = dc.complex;
        doc.labels = src.labels;
        doc.labels["model"] = "dolbeault-wrap";
        doc.labels["p"] = std::to_string(a.p);
    } else {
        throw ParseError("unknown model '" + a.model + "' (torus | random | dolbeault-wrap)");
    }
    const std::string text = write_document(doc);
    if (a.out_path.empty()) {
        std::cout << text;
    } else {
        emit(text, a.out_path);
        std::cout << "wrote " << a.out_path << " (dims " << doc.complex.n0 << ","
                  << doc.complex.n1 << ")\n";
    }
    return kExitOk;
}

struct SweepArgs {
    std::string input;  // document path or "torus"
    std::string family = "metric";
    std::string param = "0:0.5:6";
    double fd_eps = 1e-3;
    double lambda = 0;
    bool lambda_set = false;
    std::string alpha_spec = "random:1";
    std::string beta_spec = "random:1";
    // torus model description
    int m = 3;
    std::string flux_spec = "123:2.0";
    std::string metric_path_spec = "exp:1";
    std::string beta_form_spec;
    double policy_scale = 10.0;
    double constancy_tol = 0;
    bool constancy_set = false;
    std::string out_path;
};

std::pair<CMatrix, CMatrix> random_even_blocks(Index n0, Index n1, const std::string& spec,
                                               double amplitude) {
    if (spec.rfind("random:", 0) != 0) {
        throw ParseError("generator spec must be random:<seed>");
    }
    SeededRng rng(std::stoull(spec.substr(7)));
    return {amplitude * rng.matrix(n0, n0), amplitude * rng.matrix(n1, n1)};
}

int cmd_sweep(const GlobalOptions& g, const SweepArgs& a) {
    DeformFamily family;
    if (a.input == "torus") {
        const CVector flux = make_form(a.m, parse_form_spec(a.flux_spec));
        if (a.family == "metric") {
            family = torus_metric_family(a.m, flux, parse_metric_path(a.m, a.metric_path_spec));
        } else if (a.family == "flux") {
            const TorusModel tm = torus_model(a.m, Eigen::MatrixXd::Identity(a.m, a.m), flux);
            CVector b_form;
            if (a.beta_form_spec.empty()) {
                b_form = make_form(a.m, {{0u, Complex(0.1, 0)}, {0b11u, Complex(0.4, 0.2)}});
            } else {
                b_form = make_form(a.m, parse_form_spec(a.beta_form_spec));
            }
            const CMatrix w = tm.wedge.wedge_operator(b_form);
            const std::vector<Index> even = tm.wedge.parity_indices(0);
            const std::vector<Index> odd = tm.wedge.parity_indices(1);
            CMatrix b0(static_cast<Index>(even.size()), static_cast<Index>(even.size()));
            CMatrix b1(static_cast<Index>(odd.size()), static_cast<Index>(odd.size()));
            for (size_t i = 0; i < even.size(); ++i) {
                for (size_t j = 0; j < even.size(); ++j) {
                    b0(static_cast<Index>(i), static_cast<Index>(j)) = w(even[i], even[j]);
                }
            }
            for (size_t i = 0; i < odd.size(); ++i) {
                for (size_t j = 0; j < odd.size(); ++j) {
                    b1(static_cast<Index>(i), static_cast<Index>(j)) = w(odd[i], odd[j]);
                }
            }
            family = flux_family(tm.complex, b0, b1);
        } else {
            throw ParseError("--family must be metric or flux");
        }
    } else {
        const ComplexDocument doc = read_document(a.input);
        if (!validate(doc.complex, g.cfg.tols.validation_tol).pass) {
            std::cerr << "input fails validation\n";
            return kExitMath;
        }
        if (a.family == "metric") {
            auto [a0, a1] = random_even_blocks(doc.complex.n0, doc.complex.n1, a.alpha_spec, 0.3);
            family = metric_family(doc.complex, a0, a1);
        } else if (a.family == "flux") {
            auto [b0, b1] = random_even_blocks(doc.complex.n0, doc.complex.n1, a.beta_spec, 0.3);
            family = flux_family(doc.complex, b0, b1);
        } else {
            throw ParseError("--family must be metric or flux");
        }
    }

    double lambda = a.lambda;
    if (!a.lambda_set) {
        auto [de, dod] = laplacian(family.base);
        lambda = 4.0 * std::max(scale_of(de), scale_of(dod));
    }
    const std::vector<double> grid = parse_grid(a.param);
    const CohBases bases = default_bases(make_split(family.base, g.cfg.tols.rank_tol));
    VariationPolicy policy;
    policy.mismatch_scale = a.policy_scale;
    if (a.constancy_set) policy.full_rate_bound = a.constancy_tol;
    const VariationReport report = variation_report(family, grid, lambda, a.fd_eps, bases, policy,
                                                    g.cfg.tols, g.cfg.threads);

    std::cout << report.to_table();

    std::ostringstream js;
    js << report_header("sweep", g.cfg);
    js << "  \"family\": \"" << a.family << "\",\n";
    js << "  \"lambda\": " << fmt_double(lambda) << ",\n";
    js << "  \"fd_eps\": " << fmt_double(a.fd_eps) << ",\n";
    js << "  \"transport\": \"" << report.transport << "\",\n";
    js << "  \"rows\": [";
    for (size_t i = 0; i < report.rows.size(); ++i) {
        const VariationRow& r = report.rows[i];
        if (i) js << ",";
        js << "\n    {\"t\": " << fmt_double(r.t);
        if (!r.error.empty()) {
            js << ", \"error\": \"" << r.error << "\"}";
            continue;
        }
        js << ", \"predicted\": " << fmt_complex(r.predicted)
           << ", \"fd_truncated\": " << fmt_complex(r.fd_truncated)
           << ", \"fd_full\": " << fmt_complex(r.fd_full)
           << ", \"local_residual\": " << fmt_complex(r.local_residual)
           << ", \"tau_full\": " << fmt_complex(r.tau_full)
           << ", \"abs_mismatch\": " << fmt_double(r.abs_mismatch)
           << ", \"rel_mismatch\": " << fmt_double(r.rel_mismatch)
           << ", \"ok\": " << (r.ok ? "true" : "false") << "}";
    }
    js << "\n  ],\n  \"all_ok\": " << (report.all_ok ? "true" : "false") << "\n}\n";
    if (g.cfg.format == "json") std::cout << js.str();
    emit(js.str(), a.out_path);
    return report.all_ok ? kExitOk : kExitMath;
}

int cmd_selftest(const GlobalOptions& g, const std::string& suite) {
    SelftestOptions opts;
    opts.suite = suite;
    opts.seed = g.cfg.seed;
    opts.tols = g.cfg.tols;
    const std::vector<SuiteResult> results = run_selftest(opts);
    if (results.empty()) {
        std::cerr << "no such suite: " << suite << "\n";
        return kExitParse;
    }
    bool ok = true;
    for (const SuiteResult& r : results) {
        std::cout << "suite " << r.name << ": " << r.checks << " checks, " << r.failures
                  << " failures\n";
        for (const std::string& msg : r.messages) std::cout << "  FAIL: " << msg << "\n";
        if (r.failures > 0) ok = false;
    }
    return ok ? kExitOk : kExitMath;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cappell-Miller torsion toolkit for Z2-graded bi-graded complexes"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON config file (flags take precedence)");
    app.add_option("--rank-tol", g.rank_tol)->each([&](const std::string&) { g.rank_tol_set = true; });
    app.add_option("--cluster-tol", g.cluster_tol)->each([&](const std::string&) {
        g.cluster_tol_set = true;
    });
    app.add_option("--validation-tol", g.validation_tol)->each([&](const std::string&) {
        g.validation_tol_set = true;
    });
    app.add_option("--theta", g.theta, "Agmon angle in (0,2pi)")->each([&](const std::string&) {
        g.theta_set = true;
    });
    app.add_option("--seed", g.seed)->each([&](const std::string&) { g.seed_set = true; });
    app.add_option("--format", g.format, "table | json")->each([&](const std::string&) {
        g.format_set = true;
    });
    app.add_option("--threads", g.threads)->each([&](const std::string&) { g.threads_set = true; });

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "check the square-zero identities");
    std::string validate_path;
    validate_cmd->add_option("path", validate_path)->required();

    // torsion
    auto* torsion_cmd = app.add_subcommand("torsion", "compute the Cappell-Miller torsion");
    std::string torsion_path, torsion_basis, torsion_out;
    double torsion_lambda = 0;
    torsion_cmd->add_option("path", torsion_path)->required();
    auto* lambda_opt = torsion_cmd->add_option("--lambda", torsion_lambda, "spectral cut");
    torsion_cmd->add_option("--basis", torsion_basis, "named basis from the document registry");
    torsion_cmd->add_option("--out", torsion_out, "write a JSON report");

    // generate
    auto* generate_cmd = app.add_subcommand("generate", "generate model documents");
    GenerateArgs gen;
    generate_cmd->add_option("model", gen.model, "torus | random | dolbeault-wrap")->required();
    generate_cmd->add_option("--m", gen.m);
    generate_cmd->add_option("--flux", gen.flux_spec, "e.g. 123:2.0,145:0.5");
    generate_cmd->add_option("--metric", gen.metric_spec, "I | diag:... | exp:<seed>");
    generate_cmd->add_option("--orientation", gen.orientation);
    generate_cmd->add_option("--dims", gen.dims_spec);
    generate_cmd->add_option("--betti", gen.betti_spec);
    generate_cmd->add_option("--profile", gen.profile, "unit | spread | clustered");
    generate_cmd->add_option("--from", gen.from_path);
    generate_cmd->add_option("--p", gen.p);
    generate_cmd->add_option("--out", gen.out_path);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "deformation sweep with FD verification");
    SweepArgs sweep;
    sweep_cmd->add_option("input", sweep.input, "document path or 'torus'")->required();
    sweep_cmd->add_option("--family", sweep.family, "metric | flux");
    sweep_cmd->add_option("--param", sweep.param, "a:b:n grid");
    auto* fd_eps_opt = sweep_cmd->add_option("--fd-eps", sweep.fd_eps);
    auto* sweep_lambda_opt = sweep_cmd->add_option("--lambda", sweep.lambda);
    sweep_cmd->add_option("--alpha", sweep.alpha_spec, "random:<seed>");
    sweep_cmd->add_option("--beta", sweep.beta_spec, "random:<seed>");
    sweep_cmd->add_option("--m", sweep.m);
    sweep_cmd->add_option("--flux", sweep.flux_spec);
    sweep_cmd->add_option("--metric-path", sweep.metric_path_spec, "stretch:<i> | exp:<seed>");
    sweep_cmd->add_option("--beta-form", sweep.beta_form_spec, "even form for torus flux sweeps");
    sweep_cmd->add_option("--policy-scale", sweep.policy_scale);
    auto* constancy_opt = sweep_cmd->add_option("--constancy-tol", sweep.constancy_tol,
                                                "also require |fd_full| below this bound");
    sweep_cmd->add_option("--out", sweep.out_path);

    // selftest
    auto* selftest_cmd = app.add_subcommand("selftest", "run the property suites");
    std::string selftest_suite;
    selftest_cmd->add_option("--suite", selftest_suite,
                             "numkit | detline | bicomplex | torsion | models | deform");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        g.resolve();
        if (validate_cmd->parsed()) return cmd_validate(g, validate_path);
        if (torsion_cmd->parsed()) {
            bool lambda_set = lambda_opt->count() > 0;
            if (!lambda_set && !g.cfg.lambdas.empty()) {
                torsion_lambda = g.cfg.lambdas.front();
                lambda_set = true;
            }
            return cmd_torsion(g, torsion_path, torsion_lambda, lambda_set, torsion_basis,
                               torsion_out);
        }
        if (generate_cmd->parsed()) return cmd_generate(g, gen);
        if (sweep_cmd->parsed()) {
            sweep.lambda_set = sweep_lambda_opt->count() > 0;
            if (!sweep.lambda_set && !g.cfg.lambdas.empty()) {
                sweep.lambda = g.cfg.lambdas.front();
                sweep.lambda_set = true;
            }
            if (fd_eps_opt->count() == 0 && !g.cfg.eps_list.empty()) {
                sweep.fd_eps = g.cfg.eps_list.front();
            }
            sweep.constancy_set = constancy_opt->count() > 0;
            return cmd_sweep(g, sweep);
        }
        if (selftest_cmd->parsed()) return cmd_selftest(g, selftest_suite);
        std::cerr << "no subcommand\n";
        return kExitParse;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const CutCollisionError& e) {
        std::cerr << "spectral cut error: " << e.what() << "\n";
        return kExitCut;
    } catch (const FeasibilityError& e) {
        std::cerr << "infeasible request: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const FluxDegreeError& e) {
        std::cerr << "infeasible request: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMath;
    }
}
