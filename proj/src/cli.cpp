#include "fhm/cli.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fhm/dirichlet_solver.hpp"
#include "fhm/factorization.hpp"
#include "fhm/io.hpp"
#include "fhm/operators.hpp"
#include "fhm/verification.hpp"

namespace fhm {

using Report = nlohmann::ordered_json;

namespace {

double parse_real(const std::string& s, const std::string& what)
{
    double x = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, x);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(x))
        throw InputError(what + ": \"" + s + "\" is not a number");
    return x;
}

int parse_count(const std::string& s, const std::string& what)
{
    int x = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, x);
    if (res.ec != std::errc() || res.ptr != end)
        throw InputError(what + ": \"" + s + "\" is not an integer");
    return x;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        out.push_back(cur);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

Report domain_report(const DomainSpec& d)
{
    Report r;
    r["kind"] = d.kind == DomainKind::annulus ? "annulus" : "disc";
    if (d.r_inner)
        r["r_inner"] = *d.r_inner;
    r["r_outer"] = d.r_outer;
    return r;
}

Report grid_report(const Grid& g)
{
    return {{"domain", domain_report(g.domain())}, {"n_rad", g.n_rad()}, {"n_ang", g.n_ang()}};
}

Report matrix_report(const Mat& m)
{
    Report rows = Report::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Report row = Report::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

RVec hermitian_spectrum(const Mat& a)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

Report vector_report(const RVec& v)
{
    Report out = Report::array();
    for (Eigen::Index k = 0; k < v.size(); ++k)
        out.push_back(v(k));
    return out;
}

Grid grid_for_boundary(const BoundaryData& f, const std::string& grid_text, const std::string& domain_text)
{
    if (!domain_text.empty() && !(parse_domain(domain_text) == f.domain))
        throw InputError("--domain does not match the domain of the boundary file");
    const auto [nr, na] = parse_grid_size(grid_text);
    if (na != f.n_ang)
        throw InputError("--grid angular count " + std::to_string(na) + " differs from the boundary sample count " +
                         std::to_string(f.n_ang));
    return Grid(f.domain, nr, na);
}

/// Everything a command needs besides its own options.
struct Context {
    std::ostream& out;
    Report report;
};

struct SolveArgs {
    std::string boundary, grid, out, domain;
    double tol = SolveOptions{}.tol_newton;
    double tol_lin = LinearSolveOptions{}.tol_lin;
    double t_step = SolveOptions{}.t_step_init;
    double t_step_min = SolveOptions{}.t_step_min;
    int max_newton = SolveOptions{}.max_newton;
};

void run_solve(const SolveArgs& a, Context& ctx)
{
    const BoundaryData f = deserialize_boundary(read_text_file(a.boundary));
    const Grid grid = grid_for_boundary(f, a.grid, a.domain);
    SolveOptions opts;
    opts.tol_newton = a.tol;
    opts.t_step_init = a.t_step;
    opts.t_step_min = std::min(a.t_step_min, a.t_step);
    opts.max_newton = a.max_newton;
    opts.linear.tol_lin = a.tol_lin;
    ctx.report["grid"] = grid_report(grid);
    ctx.report["dim"] = f.dim;
    ctx.report["options"] = {{"tol_newton", opts.tol_newton},
                             {"tol_lin", opts.linear.tol_lin},
                             {"t_step", opts.t_step_init},
                             {"t_step_min", opts.t_step_min},
                             {"max_newton", opts.max_newton}};

    const SolveResult res = solve(f, grid, opts);
    Report stages = Report::array();
    for (const NewtonStage& s : res.report.stages)
        stages.push_back({{"t", s.t},
                          {"converged", s.converged},
                          {"residual_history", s.residual_history},
                          {"damping", s.damping_factors},
                          {"linear_iterations", s.linear_iterations}});
    ctx.report["stages"] = stages;
    ctx.report["newton_iterations"] = res.report.newton_iterations;
    ctx.report["flatness_residual"] = res.report.flatness_residual;
    ctx.report["boundary_mismatch"] = res.report.boundary_mismatch;
    ctx.report["min_eigenvalue"] = min_eigenvalue(res.metric);
    ctx.report["wall_time_s"] = res.report.wall_time_s;
    write_text_file(a.out, serialize_field(res.metric, FieldKind::metric));
    ctx.out << "solve: " << res.report.stages.size() << " stages, " << res.report.newton_iterations
            << " Newton iterations, flatness residual " << res.report.flatness_residual << ", wrote " << a.out
            << "\n";
}

struct FactorArgs {
    std::string metric, out;
    double base_theta = 0.0;
    int base_ring = -1;
    double tol_unitary = kTolUnitary;
    double tol_fact = kTolFact;
};

void run_factor(const FactorArgs& a, Context& ctx)
{
    const MetricField p = deserialize_metric(read_text_file(a.metric));
    const Grid& g = p.grid();
    if (g.kind() != DomainKind::annulus)
        throw InputError("factor: the metric must live on an annulus");
    if (a.base_ring >= g.n_rad())
        throw InputError("factor: --base-ring out of range");
    FactorOptions opts;
    opts.tol_unitary = a.tol_unitary;
    opts.base_ring = a.base_ring;
    opts.base_ang = g.wrap_ang(static_cast<int>(std::lround(a.base_theta / g.d_ang())));
    ctx.report["grid"] = grid_report(g);
    ctx.report["dim"] = p.dim();
    ctx.report["options"] = {{"tol_unitary", opts.tol_unitary},
                             {"tol_fact", a.tol_fact},
                             {"base_ring", opts.base_ring < 0 ? g.n_rad() / 2 : opts.base_ring},
                             {"base_ang", opts.base_ang}};

    std::optional<FactorizationResult> result;
    try {
        result = factorize_annulus(p, opts);
    } catch (const MonodromyError& e) {
        ctx.report["monodromy_unitarity_defect"] = e.defect();
        throw;
    }
    const FactorizationResult& fact = *result;
    const MetricField rec = reconstruct(fact, g);
    const double recon = sup_norm(rec - p) / sup_norm(p);
    ctx.report["monodromy_unitarity_defect"] = fact.monodromy_unitarity_defect;
    ctx.report["periodicity_defect"] = fact.periodicity_defect;
    ctx.report["frame_defect"] = fact.frame_defect;
    ctx.report["reconstruction_error"] = recon;
    ctx.report["flatness_measure"] = fact.flatness_measure;
    ctx.report["base_node"] = fact.base_node;
    ctx.report["a"] = matrix_report(fact.a);
    ctx.report["a_spectrum"] = vector_report(hermitian_spectrum(fact.a));
    if (!(fact.periodicity_defect <= a.tol_fact))
        throw VerificationError("factor: K periodicity defect exceeds tol_fact", fact.periodicity_defect);
    if (!(recon <= a.tol_fact))
        throw VerificationError("factor: reconstruction error exceeds tol_fact", recon);
    write_text_file(a.out, serialize_factorization(fact));
    ctx.out << "factor: monodromy defect " << fact.monodromy_unitarity_defect << ", periodicity defect "
            << fact.periodicity_defect << ", reconstruction error " << recon << ", wrote " << a.out << "\n";
}

struct ReconstructArgs {
    std::string factorization, out, grid;
};

void run_reconstruct(const ReconstructArgs& a, Context& ctx)
{
    const FactorizationResult fact = deserialize_factorization(read_text_file(a.factorization));
    const Grid& g = fact.k.grid();
    if (!a.grid.empty()) {
        const auto [nr, na] = parse_grid_size(a.grid);
        if (nr != g.n_rad() || na != g.n_ang())
            throw InputError("reconstruct: --grid differs from the factorization grid");
    }
    const MetricField p = reconstruct(fact, g);
    ctx.report["grid"] = grid_report(g);
    ctx.report["dim"] = p.dim();
    ctx.report["min_eigenvalue"] = min_eigenvalue(p);
    ctx.report["sup_norm"] = sup_norm(p);
    write_text_file(a.out, serialize_field(p, FieldKind::metric));
    ctx.out << "reconstruct: wrote " << a.out << "\n";
}

inline constexpr double kTolVerify = 1e-6;

struct VerifyArgs {
    std::string metric, boundary;
    double tol = kTolVerify;
};

void run_verify(const VerifyArgs& a, Context& ctx)
{
    const MetricField p = deserialize_metric(read_text_file(a.metric));
    const Grid& g = p.grid();
    const HermitianField r = curvature_residual(p);
    const double flat = interior_sup_norm(r);
    double rel = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!g.is_boundary(k))
            rel = std::max(rel, op_norm(Mat(p.at(k)).llt().solve(Mat(r.at(k)))));
    ctx.report["grid"] = grid_report(g);
    ctx.report["dim"] = p.dim();
    ctx.report["tol"] = a.tol;
    ctx.report["flatness_residual"] = flat;
    ctx.report["relative_flatness"] = rel;
    ctx.report["holomorphy_defect"] = holomorphy_defect(connection(p));
    ctx.report["min_eigenvalue"] = min_eigenvalue(p);
    double mismatch = 0.0;
    if (!a.boundary.empty()) {
        const BoundaryData f = deserialize_boundary(read_text_file(a.boundary));
        f.require_grid(g);
        if (f.dim != p.dim())
            throw InputError("verify: boundary and metric dimensions differ");
        for (auto [circle, ring] : g.boundary_rings())
            for (int j = 0; j < g.n_ang(); ++j)
                mismatch = std::max(mismatch, op_norm(Mat(p.at(g.index(ring, j))) - Mat(f.sample(circle, j))));
        ctx.report["boundary_mismatch"] = mismatch;
    }
    ctx.out << "verify: flatness residual " << flat << " (tol " << a.tol << ")";
    if (!a.boundary.empty())
        ctx.out << ", boundary mismatch " << mismatch;
    ctx.out << "\n";
    if (!(flat <= a.tol))
        throw VerificationError("verify: flatness residual exceeds tolerance", flat);
    if (!(mismatch <= a.tol))
        throw VerificationError("verify: boundary mismatch exceeds tolerance", mismatch);
}

struct GenerateArgs {
    std::string domain = "annulus:0.5:1", grid = "64x128", out, boundary_out, a_diag;
    int dim = 2;
    int degree = 1;
    double scale = SyntheticSpec{}.scale;
    std::uint64_t seed = 0;
};

void run_generate(const GenerateArgs& a, Context& ctx)
{
    const DomainSpec domain = parse_domain(a.domain);
    const auto [nr, na] = parse_grid_size(a.grid);
    const Grid grid(domain, nr, na);
    SyntheticSpec spec;
    spec.dim = a.dim;
    spec.degree = a.degree;
    spec.scale = a.scale;
    spec.seed = a.seed;
    if (spec.dim < 1 || spec.dim > kMaxDim)
        throw InputError("generate: --dim out of range");
    spec.a_true = Mat::Zero(a.dim, a.dim);
    if (!a.a_diag.empty()) {
        const auto parts = split(a.a_diag, ',');
        if (static_cast<int>(parts.size()) != a.dim)
            throw InputError("generate: --a needs exactly dim comma-separated values");
        for (int k = 0; k < a.dim; ++k)
            spec.a_true(k, k) = parse_real(parts[static_cast<std::size_t>(k)], "--a");
    }
    const SyntheticFlat syn = synthetic_flat(spec, grid);
    ctx.report["grid"] = grid_report(grid);
    ctx.report["dim"] = a.dim;
    ctx.report["degree"] = a.degree;
    ctx.report["scale"] = a.scale;
    ctx.report["seed"] = a.seed;
    ctx.report["draws"] = syn.truth.draws;
    ctx.report["a_true"] = matrix_report(syn.truth.a_true);
    Report coeffs = Report::array();
    for (const Mat& c : syn.truth.coefficients)
        coeffs.push_back(matrix_report(c));
    ctx.report["coefficients"] = coeffs;
    ctx.report["flatness_residual"] = interior_sup_norm(curvature_residual(syn.metric));
    write_text_file(a.out, serialize_field(syn.metric, FieldKind::metric));
    if (!a.boundary_out.empty())
        write_text_file(a.boundary_out, serialize_boundary(syn.boundary));
    ctx.out << "generate: " << syn.truth.draws << " generator draw(s), wrote " << a.out;
    if (!a.boundary_out.empty())
        ctx.out << " and " << a.boundary_out;
    ctx.out << "\n";
}

struct OracleArgs {
    std::string boundary, grid, out, domain;
};

void run_oracle(const OracleArgs& a, Context& ctx)
{
    const BoundaryData f = deserialize_boundary(read_text_file(a.boundary));
    const Grid grid = grid_for_boundary(f, a.grid, a.domain);
    const MetricField p = scalar_oracle(f, grid);
    ctx.report["grid"] = grid_report(grid);
    ctx.report["dim"] = 1;
    ctx.report["min_eigenvalue"] = min_eigenvalue(p);
    write_text_file(a.out, serialize_field(p, FieldKind::metric));
    ctx.out << "oracle-scalar: wrote " << a.out << "\n";
}

}  // namespace

DomainSpec parse_domain(const std::string& text)
{
    const auto parts = split(text, ':');
    DomainSpec d;
    if (parts.size() == 3 && parts[0] == "annulus")
        d = DomainSpec::annulus(parse_real(parts[1], "--domain"), parse_real(parts[2], "--domain"));
    else if (parts.size() == 2 && parts[0] == "disc")
        d = DomainSpec::disc(parse_real(parts[1], "--domain"));
    else
        throw InputError("--domain must be annulus:R1:R2 or disc:R, got \"" + text + "\"");
    return d;
}

std::pair<int, int> parse_grid_size(const std::string& text)
{
    const auto parts = split(text, 'x');
    if (parts.size() != 2)
        throw InputError("--grid must look like 64x128, got \"" + text + "\"");
    return {parse_count(parts[0], "--grid"), parse_count(parts[1], "--grid")};
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Flat hermitian metrics on the disc and annulus"};
    app.require_subcommand(1);
    std::string report_path;
    std::string default_report;
    std::function<void(Context&)> action;

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "Dirichlet problem for a flat metric with given boundary values");
    solve_cmd->add_option("--boundary", solve_args.boundary, "boundary document")->required();
    solve_cmd->add_option("--grid", solve_args.grid, "RxA grid size")->required();
    solve_cmd->add_option("--out", solve_args.out, "metric output")->required();
    solve_cmd->add_option("--domain", solve_args.domain, "expected domain, annulus:R1:R2 or disc:R");
    solve_cmd->add_option("--tol", solve_args.tol, "Newton tolerance on the curvature residual");
    solve_cmd->add_option("--tol-lin", solve_args.tol_lin, "linear solver tolerance");
    solve_cmd->add_option("--t-step", solve_args.t_step, "initial continuation step");
    solve_cmd->add_option("--t-step-min", solve_args.t_step_min, "smallest continuation step");
    solve_cmd->add_option("--max-newton", solve_args.max_newton, "Newton iterations per stage");
    solve_cmd->add_option("--report", report_path, "JSON report path");
    solve_cmd->callback([&] {
        default_report = solve_args.out + ".report.json";
        action = [&](Context& c) { run_solve(solve_args, c); };
    });

    FactorArgs factor_args;
    auto* factor_cmd = app.add_subcommand("factor", "P = K^* exp(a log|w|^2) K on the annulus");
    factor_cmd->add_option("--metric", factor_args.metric, "metric document")->required();
    factor_cmd->add_option("--out", factor_args.out, "factorization output")->required();
    factor_cmd->add_option("--base-theta", factor_args.base_theta, "base angle in radians (nearest node)");
    factor_cmd->add_option("--base-ring", factor_args.base_ring, "base ring index (default: middle ring)");
    factor_cmd->add_option("--tol-unitary", factor_args.tol_unitary, "monodromy unitarity tolerance");
    factor_cmd->add_option("--tol-fact", factor_args.tol_fact, "periodicity and reconstruction tolerance");
    factor_cmd->add_option("--report", report_path, "JSON report path");
    factor_cmd->callback([&] {
        default_report = factor_args.out + ".report.json";
        action = [&](Context& c) { run_factor(factor_args, c); };
    });

    ReconstructArgs rec_args;
    auto* rec_cmd = app.add_subcommand("reconstruct", "metric from a factorization");
    rec_cmd->add_option("--factorization", rec_args.factorization, "factorization document")->required();
    rec_cmd->add_option("--out", rec_args.out, "metric output")->required();
    rec_cmd->add_option("--grid", rec_args.grid, "expected RxA grid size");
    rec_cmd->add_option("--report", report_path, "JSON report path");
    rec_cmd->callback([&] {
        default_report = rec_args.out + ".report.json";
        action = [&](Context& c) { run_reconstruct(rec_args, c); };
    });

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "flatness and boundary checks of a metric");
    verify_cmd->add_option("--metric", verify_args.metric, "metric document")->required();
    verify_cmd->add_option("--boundary", verify_args.boundary, "boundary document to compare against");
    verify_cmd->add_option("--tol", verify_args.tol, "tolerance on the curvature residual and boundary mismatch");
    verify_cmd->add_option("--report", report_path, "JSON report path");
    verify_cmd->callback([&] {
        default_report = verify_args.metric + ".verify.json";
        action = [&](Context& c) { run_verify(verify_args, c); };
    });

    GenerateArgs gen_args;
    auto* gen_cmd = app.add_subcommand("generate", "synthetic flat metric G^* exp(a log|w|^2) G");
    gen_cmd->add_option("--domain", gen_args.domain, "annulus:R1:R2");
    gen_cmd->add_option("--grid", gen_args.grid, "RxA grid size");
    gen_cmd->add_option("--dim", gen_args.dim, "fiber dimension");
    gen_cmd->add_option("--degree", gen_args.degree, "Laurent degree of G");
    gen_cmd->add_option("--scale", gen_args.scale, "coefficient scale");
    gen_cmd->add_option("--seed", gen_args.seed, "random seed");
    gen_cmd->add_option("--a", gen_args.a_diag, "comma-separated diagonal of a, each in (-1/2, 1/2)");
    gen_cmd->add_option("--out", gen_args.out, "metric output")->required();
    gen_cmd->add_option("--boundary-out", gen_args.boundary_out, "boundary output");
    gen_cmd->add_option("--report", report_path, "JSON report path");
    gen_cmd->callback([&] {
        default_report = gen_args.out + ".report.json";
        action = [&](Context& c) { run_generate(gen_args, c); };
    });

    OracleArgs oracle_args;
    auto* oracle_cmd = app.add_subcommand("oracle-scalar", "scalar reference solution exp(harmonic extension of log F)");
    oracle_cmd->add_option("--boundary", oracle_args.boundary, "scalar boundary document")->required();
    oracle_cmd->add_option("--grid", oracle_args.grid, "RxA grid size")->required();
    oracle_cmd->add_option("--out", oracle_args.out, "metric output")->required();
    oracle_cmd->add_option("--domain", oracle_args.domain, "expected domain");
    oracle_cmd->add_option("--report", report_path, "JSON report path");
    oracle_cmd->callback([&] {
        default_report = oracle_args.out + ".report.json";
        action = [&](Context& c) { run_oracle(oracle_args, c); };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "fhm: " << e.what() << "\n";
        return kExitInput;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    Context ctx{out, Report::object()};
    ctx.report["command"] = command;
    int code = kExitOk;
    std::string message;
    try {
        action(ctx);
    } catch (const InputError& e) {
        code = kExitInput;
        message = e.what();
    } catch (const NonConvergenceError& e) {
        code = kExitNonConvergence;
        message = e.what();
        ctx.report["residual_history"] = e.history();
    } catch (const BranchAmbiguityError& e) {
        code = kExitVerification;
        message = e.what();
        ctx.report["error_kind"] = "branch_ambiguity";
        ctx.report["branch_distance"] = e.defect();
    } catch (const MonodromyError& e) {
        code = kExitVerification;
        message = e.what();
        ctx.report["error_kind"] = "monodromy";
        ctx.report["defect"] = e.defect();
    } catch (const VerificationError& e) {
        code = kExitVerification;
        message = e.what();
        ctx.report["error_kind"] = "verification";
        ctx.report["defect"] = e.defect();
    } catch (const std::exception& e) {
        code = kExitInternal;
        message = std::string("internal error: ") + e.what();
    }

    const Report status{{"status", code == kExitOk ? "ok" : "error"}, {"exit_code", code}};
    Report full = status;
    if (!message.empty())
        full["message"] = message;
    full.update(ctx.report);
    const std::string path = report_path.empty() ? default_report : report_path;
    try {
        write_text_file(path, full.dump(2) + "\n");
    } catch (const InputError& e) {
        err << "fhm: " << e.what() << "\n";
        if (code == kExitOk)
            code = kExitInput;
    }
    if (!message.empty())
        err << "fhm " << command << ": " << message << "\n";
    return code;
}

int run_cli(int argc, const char* const* argv)
{
    return run_cli(argc, argv, std::cout, std::cerr);
}

}  // namespace fhm
