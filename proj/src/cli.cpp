#include "symortho/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>

#include "symortho/io.hpp"
#include "symortho/manifold.hpp"

namespace symortho::cli {

namespace {

/// Exit codes besides success.
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

struct Shared {
    std::string input = "-";
    std::string out;
    std::string format = "json";
    int starts = 64;
    int max_iters = 2000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct ProblemFlags {
    std::string notion = "con";
    std::vector<std::size_t> modes;
    std::size_t rank = 1;
    bool symmetric = false;
    bool structured = false;
    double tol = 1e-9;
};

std::string read_all(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_input(const std::string& path, std::istream& in) {
    if (path == "-") {
        return read_all(in);
    }
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw ParseError("cannot read input file '" + path + "'");
    }
    return read_all(file);
}

void check_shape(const AnyTensor& tensor) {
    const auto& dims = std::visit([](const auto& t) -> const std::vector<std::size_t>& { return t.dims(); },
                                  tensor);
    if (dims.size() > kMaxOrder) {
        throw ArgumentError("order " + std::to_string(dims.size()) + " exceeds the limit of " +
                            std::to_string(kMaxOrder));
    }
    for (std::size_t j = 0; j < dims.size(); ++j) {
        if (dims[j] > kMaxDimension) {
            throw ArgumentError("dimension " + std::to_string(dims[j]) + " of mode " + std::to_string(j + 1) +
                                " exceeds the limit of " + std::to_string(kMaxDimension));
        }
    }
}

AnyTensor load_tensor(const Shared& shared, std::istream& in) {
    AnyTensor tensor = parse_tensor(read_input(shared.input, in));
    check_shape(tensor);
    return tensor;
}

SolverConfig solver_config(const Shared& shared) {
    SolverConfig config;
    config.starts = shared.starts;
    config.max_iters = shared.max_iters;
    config.seed = shared.seed;
    config.threads = shared.threads;
    config.validate();
    return config;
}

Notion notion_from(const ProblemFlags& flags) {
    std::vector<std::size_t> modes;
    for (auto m : flags.modes) {
        if (m == 0) {
            throw ArgumentError("--modes are 1-based");
        }
        modes.push_back(m - 1);
    }
    return parse_notion(flags.notion, modes);
}

bool is_cross(const ProblemFlags& flags) { return flags.notion == "cross"; }

ApproxProblem make_problem(const Tensor& tensor, const ProblemFlags& flags, const SolverConfig& config) {
    ApproxProblem problem;
    problem.tensor = tensor;
    if (!is_cross(flags)) {
        problem.notion = notion_from(flags);
    }
    problem.rank = flags.rank;
    problem.symmetric_constraint = flags.symmetric;
    problem.structured = flags.structured;
    problem.config = config;
    return problem;
}

Json input_summary(const AnyTensor& tensor) {
    return std::visit(
        [](const auto& t) {
            const auto& dims = t.dims();
            const bool cubical = std::adjacent_find(dims.begin(), dims.end(), std::not_equal_to<>()) == dims.end();
            return Json{{"field", std::string(to_string(t.field()))},
                        {"dims", t.dims()},
                        {"frobenius", frobenius_norm(t)},
                        {"symmetric", cubical && is_symmetric(t)}};
        },
        tensor);
}

std::string csv_cell(const Json& value) {
    std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    if (text.find_first_of(",\"\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char c : text) {
            quoted += c;
            if (c == '"') {
                quoted += '"';
            }
        }
        return quoted + "\"";
    }
    return text;
}

std::string markdown_cell(const Json& value) {
    if (value.is_string()) {
        return value.get<std::string>();
    }
    if (value.is_number_float()) {
        char buffer[32];
        std::snprintf(buffer, sizeof buffer, "%.6g", value.get<double>());
        return buffer;
    }
    return value.dump();
}

/// Renders flat records as CSV or a Markdown table; all rows share the keys of the first.
std::string render_table(const std::vector<Json>& rows, const std::string& format) {
    std::ostringstream os;
    if (rows.empty()) {
        return "";
    }
    std::vector<std::string> keys;
    for (const auto& item : rows.front().items()) {
        keys.push_back(item.key());
    }
    auto cell = [&](const Json& row, const std::string& key) {
        const Json value = row.contains(key) ? row.at(key) : Json(nullptr);
        return format == "csv" ? csv_cell(value) : markdown_cell(value);
    };
    if (format == "csv") {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            os << (i ? "," : "") << keys[i];
        }
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < keys.size(); ++i) {
                os << (i ? "," : "") << cell(row, keys[i]);
            }
            os << '\n';
        }
        return os.str();
    }
    os << '|';
    for (const auto& k : keys) {
        os << ' ' << k << " |";
    }
    os << "\n|";
    for (std::size_t i = 0; i < keys.size(); ++i) {
        os << "---|";
    }
    os << '\n';
    for (const auto& row : rows) {
        os << '|';
        for (const auto& k : keys) {
            os << ' ' << cell(row, k) << " |";
        }
        os << '\n';
    }
    return os.str();
}

void emit(const Shared& shared, const Json& full, const std::vector<Json>& rows, std::ostream& out) {
    std::string text;
    if (shared.format == "json") {
        text = full.dump(2) + "\n";
    } else {
        text = render_table(rows, shared.format);
    }
    if (shared.out.empty()) {
        out << text;
        return;
    }
    std::ofstream file(shared.out, std::ios::binary);
    if (!file) {
        throw ArgumentError("cannot write output file '" + shared.out + "'");
    }
    file << text;
}

void add_shared(CLI::App* app, Shared& shared, bool with_solver) {
    app->add_option("--input", shared.input, "Input JSON file, '-' for stdin")->capture_default_str();
    app->add_option("--out", shared.out, "Write the report to this file instead of stdout");
    app->add_option("--format", shared.format, "Report format")
        ->check(CLI::IsMember({"json", "csv", "markdown"}))
        ->capture_default_str();
    app->add_option("--seed", shared.seed, "Seed for all random starts")->capture_default_str();
    if (with_solver) {
        app->add_option("--starts", shared.starts, "Random starts per search")->capture_default_str();
        app->add_option("--max-iters", shared.max_iters, "Ascent iterations per start")->capture_default_str();
        app->add_option("--threads", shared.threads, "Worker threads, 0 for all cores; SYMORTHO_THREADS caps it")
            ->capture_default_str();
    }
}

void add_problem(CLI::App* app, ProblemFlags& flags, bool allow_cross) {
    std::vector<std::string> notions{"on", "son", "con", "pcon"};
    if (allow_cross) {
        notions.push_back("cross");
    }
    app->add_option("--notion", flags.notion, "Orthogonality notion")
        ->check(CLI::IsMember(notions, CLI::ignore_case))
        ->transform([](std::string s) {
            for (auto& c : s) {
                c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            }
            return s;
        })
        ->capture_default_str();
    app->add_option("--modes", flags.modes, "Orthogonal modes for pcon, 1-based, comma separated")
        ->delimiter(',');
    app->add_option("--rank", flags.rank, "Number of rank-one terms")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_flag("--symmetric", flags.symmetric, "Restrict to symmetric terms v (x) ... (x) v");
    app->add_flag("--structured", flags.structured, "pcon: one factor on the orthogonal modes, one on the rest");
}

std::vector<Json> certificate_rows(const DecompositionCertificate& certificate) {
    std::vector<Json> rows;
    for (const auto& p : certificate.pairs) {
        rows.push_back(Json{{"first", p.first + 1},
                            {"second", p.second + 1},
                            {"on", p.on},
                            {"son", p.son},
                            {"con", p.con},
                            {"holds", p.holds}});
    }
    if (rows.empty()) {
        rows.push_back(Json{{"valid", certificate.valid}});
    }
    return rows;
}

int cmd_approx(const Shared& shared, const ProblemFlags& flags, std::istream& in, std::ostream& out) {
    const AnyTensor any = load_tensor(shared, in);
    SolverConfig config = solver_config(shared);
    config.grad_tol = flags.tol;
    config.validate();
    const ApproxProblem problem = make_problem(require_real(any), flags, config);
    const ApproxResult result = is_cross(flags) ? solve_cross(problem) : solve(problem);
    Json full{{"command", "approx"}, {"input", input_summary(any)}, {"result", result_to_json(result)}};
    Json row{{"notion", is_cross(flags) ? std::string("cross") : to_string(result.notion)},
             {"rank", flags.rank},
             {"objective", result.objective},
             {"residual", result.residual},
             {"relative_residual", result.relative_residual},
             {"phase", result.phase},
             {"certificate", result.certificate.valid ? "valid" : "invalid"}};
    emit(shared, full, {row}, out);
    const bool cross_ok = !result.cross_orthogonal || *result.cross_orthogonal;
    return result.certificate.valid && cross_ok ? 0 : kVerifyFailed;
}

int cmd_oracle(const Shared& shared, const ProblemFlags& flags, std::size_t grid_budget, std::istream& in,
               std::ostream& out) {
    if (is_cross(flags)) {
        throw UnsupportedError("the oracle does not handle cross-orthogonal problems");
    }
    const AnyTensor any = load_tensor(shared, in);
    const ApproxProblem problem = make_problem(require_real(any), flags, solver_config(shared));
    OracleOptions options;
    options.certification_tol = flags.tol;
    options.grid_budget = grid_budget;
    const OracleReport report = grid_oracle(problem, options);
    Json full{{"command", "oracle"},
              {"input", input_summary(any)},
              {"notion", to_string(problem.notion)},
              {"rank", flags.rank},
              {"oracle", oracle_to_json(report)}};
    Json row{{"notion", to_string(problem.notion)},
             {"rank", flags.rank},
             {"lo", report.lo},
             {"hi", report.hi},
             {"certified", report.certified},
             {"best_space", report.best_space}};
    emit(shared, full, {row}, out);
    return report.certified ? 0 : kVerifyFailed;
}

int cmd_norms(const Shared& shared, std::size_t max_rank, bool certify, double slack, std::istream& in,
              std::ostream& out) {
    const AnyTensor any = load_tensor(shared, in);
    NormOptions options;
    options.certify = certify;
    const ChainReport report = chain_check(require_real(any), max_rank, solver_config(shared), options, slack);
    Json full{{"command", "norms"}, {"input", input_summary(any)}, {"norms", chain_to_json(report)}};
    std::vector<Json> rows;
    rows.push_back(Json{{"norm", "frobenius"}, {"value", report.norms.frobenius}, {"status", "exact"}});
    rows.push_back(Json{{"norm", "spectral"},
                        {"value", report.norms.spectral.value},
                        {"status", report.norms.spectral.certified ? "oracle-certified" : "lower-bound"}});
    for (const auto& e : report.norms.entries) {
        rows.push_back(Json{{"norm", to_string(e.notion) + "_" + std::to_string(e.rank)},
                            {"value", e.value},
                            {"status", e.certified ? "oracle-certified" : "lower-bound"}});
    }
    emit(shared, full, rows, out);
    return report.holds ? 0 : kVerifyFailed;
}

int cmd_deflate(const Shared& shared, const ProblemFlags& flags, bool constrained, bool gap, std::istream& in,
                std::ostream& out) {
    const AnyTensor any = load_tensor(shared, in);
    const Tensor& tensor = require_real(any);
    const SolverConfig config = solver_config(shared);
    Json full{{"command", "deflate"}, {"input", input_summary(any)}};
    std::vector<Json> rows;
    if (gap) {
        const DeflationGap g = deflation_gap(tensor, flags.rank, notion_from(flags), config);
        full["deflation"] = deflation_to_json(g.deflation);
        full["gap"] = gap_to_json(g);
        rows.push_back(Json{{"notion", to_string(g.notion)},
                            {"rank", g.rank},
                            {"deflation_objective", g.deflation_objective},
                            {"direct_objective", g.direct_objective},
                            {"gap", g.gap}});
    } else {
        const DeflationResult result = deflate(tensor, flags.rank, constrained, config);
        full["deflation"] = deflation_to_json(result);
        for (std::size_t k = 0; k < result.trace.steps.size(); ++k) {
            const auto& s = result.trace.steps[k];
            rows.push_back(Json{{"step", k + 1},
                                {"sigma", s.term.sigma},
                                {"residual_norm", s.residual_norm},
                                {"zero", s.zero}});
        }
    }
    emit(shared, full, rows, out);
    return 0;
}

int cmd_check(const Shared& shared, const ProblemFlags& flags, std::istream& in, std::ostream& out) {
    const Json json = parse_json(read_input(shared.input, in));
    // Accept a bare decomposition or any report that carries one.
    const Json* node = &json;
    if (json.is_object() && json.contains("result") && json["result"].contains("decomposition")) {
        node = &json["result"]["decomposition"];
    } else if (json.is_object() && json.contains("decomposition")) {
        node = &json["decomposition"];
    }
    const Decomposition decomposition = decomposition_from_json(*node);
    Json full{{"command", "check"}};
    bool ok = true;
    if (is_cross(flags)) {
        ok = cross_orthogonality_check(decomposition, flags.tol);
        full["cross_orthogonal"] = ok;
        emit(shared, full, {Json{{"cross_orthogonal", ok}}}, out);
    } else {
        const DecompositionCertificate certificate = decomposition_check(decomposition, notion_from(flags), flags.tol);
        ok = certificate.valid;
        full["certificate"] = certificate_to_json(certificate);
        emit(shared, full, certificate_rows(certificate), out);
    }
    return ok ? 0 : kVerifyFailed;
}

std::vector<Json> case_rows(const CaseReport& report) {
    std::vector<Json> rows;
    for (const auto& c : report.checks) {
        rows.push_back(Json{{"case", report.id},
                            {"check", c.name},
                            {"relation", c.relation},
                            {"expected", c.target},
                            {"measured", c.measured},
                            {"tolerance", c.tolerance},
                            {"source", to_string(c.source)},
                            {"pass", c.pass ? "pass" : "FAIL"}});
    }
    return rows;
}

int cmd_paper_verify(const Shared& shared, const std::string& id, bool all, const SuiteOptions& options,
                     std::ostream& out) {
    if (all == !id.empty()) {
        throw ArgumentError("give exactly one of --case or --all");
    }
    const SolverConfig config = solver_config(shared);
    std::vector<std::string> ids = all ? case_ids() : std::vector<std::string>{id};
    Json cases = Json::array();
    std::vector<Json> rows;
    bool pass = true;
    for (const auto& c : ids) {
        const CaseReport report = verify_case(c, config, options);
        pass = pass && report.pass;
        cases.push_back(case_to_json(report));
        for (auto& row : case_rows(report)) {
            rows.push_back(std::move(row));
        }
    }
    Json full = all ? Json{{"command", "paper verify"}, {"pass", pass}, {"cases", cases}} : cases[0];
    emit(shared, full, rows, out);
    return pass ? 0 : kVerifyFailed;
}

int cmd_gen(const Shared& shared, const std::string& id, std::size_t index, const std::vector<std::size_t>& dims,
            bool symmetric, bool complex, std::ostream& out) {
    if (shared.format != "json") {
        throw ArgumentError("gen writes JSON only");
    }
    if (id.empty() == dims.empty()) {
        throw ArgumentError("give exactly one of --case or --dims");
    }
    AnyTensor tensor;
    if (!id.empty()) {
        if (complex || symmetric) {
            throw ArgumentError("--symmetric and --complex apply to random tensors only");
        }
        NamedCase c = build_case(id, shared.seed);
        if (index >= c.tensors.size()) {
            throw ArgumentError("case '" + id + "' has " + std::to_string(c.tensors.size()) + " tensor(s)");
        }
        tensor = std::move(c.tensors[index].tensor);
    } else {
        if (symmetric && std::adjacent_find(dims.begin(), dims.end(), std::not_equal_to<>()) != dims.end()) {
            throw ShapeError("--symmetric needs equal dimensions");
        }
        for (auto n : dims) {
            if (n == 0) {
                throw ArgumentError("dimensions must be positive");
            }
        }
        if (dims.size() > kMaxOrder) {
            throw ArgumentError("order " + std::to_string(dims.size()) + " exceeds the limit of " +
                                std::to_string(kMaxOrder));
        }
        for (auto n : dims) {
            if (n > kMaxDimension) {
                throw ArgumentError("dimension " + std::to_string(n) + " exceeds the limit of " +
                                    std::to_string(kMaxDimension));
            }
        }
        auto rng = start_rng(shared.seed, 950, 0);
        std::normal_distribution<double> normal;
        if (complex) {
            ComplexTensor t(dims);
            for (auto& x : t.data()) {
                const double re = normal(rng);
                x = {re, normal(rng)};
            }
            tensor = symmetric ? symmetrize(t) : t;
        } else {
            Tensor t(dims);
            for (auto& x : t.data()) {
                x = normal(rng);
            }
            tensor = symmetric ? symmetrize(t) : t;
        }
    }
    emit(shared, tensor_to_json(tensor), {}, out);
    return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Orthogonal low-rank tensor approximation"};
    app.name("symortho");
    app.require_subcommand(1);
    app.fallthrough();

    Shared shared;
    ProblemFlags flags;

    CLI::App* approx = app.add_subcommand("approx", "Best orthogonal rank-r approximation");
    add_shared(approx, shared, true);
    add_problem(approx, flags, true);
    approx->add_option("--tol", flags.tol, "Riemannian gradient tolerance")->capture_default_str();

    std::size_t grid_budget = OracleOptions{}.grid_budget;
    CLI::App* oracle = app.add_subcommand("oracle", "Certified bracket on the global optimum (small shapes)");
    add_shared(oracle, shared, true);
    add_problem(oracle, flags, false);
    oracle->add_option("--tol", flags.tol, "Required bracket width relative to the squared norm")
        ->capture_default_str();
    oracle->add_option("--grid-budget", grid_budget, "Maximum coarse grid points per search space")
        ->capture_default_str();

    std::size_t max_rank = 2;
    bool no_certify = false;
    double slack = 1e-6;
    CLI::App* norms = app.add_subcommand("norms", "Norm chain for ranks 1..--rank");
    add_shared(norms, shared, true);
    norms->add_option("--rank", max_rank, "Largest rank")->check(CLI::PositiveNumber)->capture_default_str();
    norms->add_flag("--no-certify", no_certify, "Skip the grid oracle");
    norms->add_option("--tol", slack, "Slack on each inequality, relative to max(1, norm)")->capture_default_str();

    bool constrained = false;
    bool gap = false;
    CLI::App* deflate_cmd = app.add_subcommand("deflate", "Greedy rank-one deflation");
    add_shared(deflate_cmd, shared, true);
    add_problem(deflate_cmd, flags, false);
    deflate_cmd->add_flag("--constrained", constrained, "Keep every new term orthogonal to the previous ones");
    deflate_cmd->add_flag("--gap", gap, "Compare constrained deflation with the direct --notion solve");

    CLI::App* check = app.add_subcommand("check", "Validate a decomposition against a notion");
    add_shared(check, shared, false);
    add_problem(check, flags, true);
    check->add_option("--tol", flags.tol, "Orthogonality tolerance")->capture_default_str();

    std::string case_id;
    bool all_cases = false;
    SuiteOptions suite;
    CLI::App* paper = app.add_subcommand("paper", "Reference cases");
    paper->require_subcommand(1);
    CLI::App* verify = paper->add_subcommand("verify", "Run reference cases and compare with expected values");
    add_shared(verify, shared, true);
    verify->add_option("--case", case_id, "Case id")->check(CLI::IsMember(case_ids()));
    verify->add_flag("--all", all_cases, "Run every case");
    verify->add_option("--samples", suite.samples, "Random tensors per property case")->capture_default_str();
    verify->add_option("--block-samples", suite.block_samples, "Random tensors for the block case")
        ->capture_default_str();

    std::size_t gen_index = 0;
    std::vector<std::size_t> gen_dims;
    bool gen_symmetric = false;
    bool gen_complex = false;
    CLI::App* gen = app.add_subcommand("gen", "Write a named or random tensor as JSON");
    add_shared(gen, shared, false);
    gen->add_option("--case", case_id, "Case id")->check(CLI::IsMember(case_ids()));
    gen->add_option("--index", gen_index, "Which tensor of the case")->capture_default_str();
    gen->add_option("--dims", gen_dims, "Random Gaussian tensor with these dimensions")->delimiter(',');
    gen->add_flag("--symmetric", gen_symmetric, "Symmetrize the random tensor");
    gen->add_flag("--complex", gen_complex, "Complex Gaussian entries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (approx->parsed()) {
            return cmd_approx(shared, flags, in, out);
        }
        if (oracle->parsed()) {
            return cmd_oracle(shared, flags, grid_budget, in, out);
        }
        if (norms->parsed()) {
            return cmd_norms(shared, max_rank, !no_certify, slack, in, out);
        }
        if (deflate_cmd->parsed()) {
            return cmd_deflate(shared, flags, constrained, gap, in, out);
        }
        if (check->parsed()) {
            return cmd_check(shared, flags, in, out);
        }
        if (verify->parsed()) {
            return cmd_paper_verify(shared, case_id, all_cases, suite, out);
        }
        if (gen->parsed()) {
            return cmd_gen(shared, case_id, gen_index, gen_dims, gen_symmetric, gen_complex, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

} // namespace symortho::cli
