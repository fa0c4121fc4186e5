#include "boundwalk/io.hpp"
#include "boundwalk/protocols.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace boundwalk;

namespace {

std::vector<SchemeDescriptor> without_scheme(const std::vector<SchemeDescriptor>& schemes,
                                             SchemeKind kind) {
    std::vector<SchemeDescriptor> out;
    for (const auto& s : schemes)
        if (s.kind != kind) out.push_back(s);
    return out;
}

std::vector<std::string> cmd_transfer(const RunConfig& rc, const fs::path& out) {
    const TransferReport rep = run_transfer(rc.experiment);
    CsvFile csv(out / "transfer.csv", {"t", "t_over_tstar", "P_first", "P_last"});
    for (const auto& s : rep.series)
        csv.row({s.t, rep.t_star > 0 ? s.t / rep.t_star : 0.0, s.p_first, s.p_last});
    CsvFile summary(out / "transfer_summary.csv", {"t_star", "P_first", "P_last"});
    summary.row({rep.t_star, rep.p_first, rep.p_last});
    return {"transfer.csv", "transfer_summary.csv"};
}

std::vector<std::string> cmd_unlock_opt(const RunConfig& rc, const fs::path& out) {
    ExperimentConfig cfg = rc.experiment;
    cfg.schemes = without_scheme(cfg.schemes, SchemeKind::EdgeUnlocked);
    const EdgeFieldResult res = optimize_edge_field(cfg);
    const double closed = edge_unlock_field(cfg.M, cfg.J, cfg.U);
    CsvFile csv(out / "unlock_opt.csv", {"beta_prime", "P_target", "closed_form", "degenerate"});
    csv.row({res.beta_prime, res.p_target, closed, res.degenerate ? 1.0 : 0.0});
    return {"unlock_opt.csv"};
}

std::vector<std::string> cmd_noon(const RunConfig& rc, const fs::path& out) {
    const SplitReport rep = run_noon(rc.experiment);
    std::vector<std::string> header = {"t"};
    header.insert(header.end(), rep.labels.begin(), rep.labels.end());
    CsvFile csv(out / "noon_series.csv", header);
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        std::vector<double> row = {rep.times[i]};
        row.insert(row.end(), rep.series[i].begin(), rep.series[i].end());
        csv.row(row);
    }
    std::vector<std::string> sum_header = {"beta", "t_star", "P_first", "P_last",
                                           "balance_residual"};
    std::vector<double> sum_row = {rep.beta, rep.t_star, rep.p_first, rep.p_last,
                                   rep.balance_residual};
    for (const auto& [label, p] : rep.mixed) {
        sum_header.push_back(label);
        sum_row.push_back(p);
    }
    CsvFile summary(out / "noon_summary.csv", sum_header);
    summary.row(sum_row);
    return {"noon_series.csv", "noon_summary.csv"};
}

std::vector<std::string> cmd_split_opt(const RunConfig& rc, const fs::path& out) {
    ExperimentConfig base = rc.experiment;
    base.schemes = without_scheme(base.schemes, SchemeKind::SplitImpurity);
    if (rc.u_list.empty()) {
        const SplitFieldResult res = optimize_split_field(base);
        CsvFile csv(out / "split_opt.csv",
                    {"beta", "balance_residual", "t_star", "asymptotic"});
        csv.row({res.beta, res.balance_residual, res.t_star,
                 splitting_field_asymptotic(base.M, base.J, base.U)});
        return {"split_opt.csv"};
    }
    CsvFile csv(out / "split_opt.csv", {"U_over_J", "beta", "balance_residual", "t_star"});
    double num = 0.0;
    double den = 0.0;
    for (double u : rc.u_list) {
        ExperimentConfig cfg = base;
        cfg.U = u * base.J;
        cfg.schemes = {SchemeDescriptor::edge_unlocked(edge_unlock_field(cfg.M, cfg.J, cfg.U))};
        const SplitFieldResult res = optimize_split_field(cfg);
        csv.row({u, res.beta, res.balance_residual, res.t_star});
        const double x = std::pow(cfg.J, cfg.M) / std::pow(cfg.U, cfg.M - 1);
        num += res.beta * x;
        den += x * x;
    }
    CsvFile fit(out / "split_fit.csv", {"alpha"});
    fit.row({num / den});
    return {"split_opt.csv", "split_fit.csv"};
}

std::vector<std::string> cmd_fringes(const RunConfig& rc, const fs::path& out) {
    const FringeScan scan = mach_zehnder_fringes(rc.experiment, rc.phi_grid);
    CsvFile csv(out / "fringes.csv", {"phi", "P_first", "ideal"});
    for (std::size_t i = 0; i < scan.phi.size(); ++i)
        csv.row({scan.phi[i], scan.probability[i], scan.ideal[i]});
    return {"fringes.csv"};
}

std::vector<std::string> cmd_quench_fringes(const RunConfig& rc, const fs::path& out) {
    const FringeScan scan = quench_detection(rc.experiment, rc.phi_grid);
    CsvFile csv(out / "quench_fringes.csv", {"phi", "P_1L", "ideal"});
    for (std::size_t i = 0; i < scan.phi.size(); ++i)
        csv.row({scan.phi[i], scan.probability[i], scan.ideal[i]});
    return {"quench_fringes.csv"};
}

std::vector<std::string> cmd_fisher(const RunConfig& rc, const fs::path& out) {
    CsvFile csv(out / "fisher.csv",
                {"U_over_J", "F_Q", "delta_phi", "classical_bound", "quantum_bound"});
    if (rc.u_list.empty()) {
        const FisherReport rep = fisher_information(rc.experiment, rc.fisher_phi);
        csv.row({rc.experiment.U / rc.experiment.J, rep.f_q, rep.delta_phi, rep.classical_bound,
                 rep.quantum_bound});
    } else {
        for (double u : rc.u_list) {
            ExperimentConfig cfg = rc.experiment;
            cfg.U = u * cfg.J;
            cfg.schemes = noon_schemes(cfg.M, cfg.J, cfg.U);
            const FisherReport rep = fisher_information(cfg, rc.fisher_phi);
            csv.row({u, rep.f_q, rep.delta_phi, rep.classical_bound, rep.quantum_bound});
        }
    }
    return {"fisher.csv"};
}

std::vector<std::string> cmd_dephasing_sweep(const RunConfig& rc, const fs::path& out) {
    if (rc.gamma_list.empty())
        throw ConfigError("dephasing-sweep: key 'gamma_list' is required");
    const auto points = run_dephasing_sweep(rc.experiment, rc.gamma_list);
    CsvFile csv(out / "dephasing.csv", {"gamma_over_Jeff", "P_target", "relative_variation"});
    for (const auto& p : points) csv.row({p.gamma, p.p_target, p.relative_variation});
    return {"dephasing.csv"};
}

std::vector<std::string> cmd_effective_dump(const RunConfig& rc, const fs::path& out) {
    const ExperimentConfig& cfg = rc.experiment;
    if (cfg.M < 2) throw ConfigError("effective-dump: requires M in {2,3}");
    FockBasis basis(cfg.L, cfg.M);
    const LatticeParams params = apply_scheme(LatticeParams::uniform(cfg.L, cfg.J, cfg.U),
                                              cfg.schemes);
    const SectorOperator H = build_hamiltonian(basis, params, cfg.convention);
    const BlockSplit blocks = split_blocks(H, basis);
    const int order = rc.dyson_order >= 0 ? rc.dyson_order : cfg.M - 1;
    const DysonSolution sol = solve_sylvester_dyson(blocks, cfg.U, order);
    const EffectiveChain chain = effective_hamiltonian(blocks, sol).chain;
    CsvFile csv(out / "effective.csv", {"j", "B_eff_j", "J_eff_j"});
    for (int j = 0; j < chain.sites(); ++j)
        csv.row({static_cast<double>(j + 1), chain.onsite(j),
                 j < chain.sites() - 1 ? chain.hopping(j)
                                       : std::numeric_limits<double>::quiet_NaN()});
    return {"effective.csv"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bound-boson chain dynamics: transfer, splitting, interferometry"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string preset;
    std::string out_dir = ".";
    int threads = 0;
    long seed = 0;
    app.add_option("--config", config_path, "path to a key = value config file");
    app.add_option("--preset", preset, "named built-in parameter set");
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--threads", threads, "worker threads (0 = auto)");
    app.add_option("--seed", seed, "reserved; all protocols are deterministic");

    for (const char* name :
         {"transfer", "unlock-opt", "noon", "split-opt", "fringes", "quench-fringes", "fisher",
          "dephasing-sweep", "effective-dump"})
        app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (threads > 0) Eigen::setNbThreads(threads);
        if (config_path.empty() == preset.empty())
            throw ConfigError("exactly one of --config or --preset is required");
        const RunConfig rc = preset.empty() ? parse_config(config_path) : load_preset(preset);

        const fs::path out(out_dir);
        fs::create_directories(out);
        const std::string kind = app.get_subcommands().front()->get_name();

        RunManifest manifest;
        manifest.kind = kind;
        manifest.config_echo = rc.echo;
        if (kind == "transfer") manifest.outputs = cmd_transfer(rc, out);
        else if (kind == "unlock-opt") manifest.outputs = cmd_unlock_opt(rc, out);
        else if (kind == "noon") manifest.outputs = cmd_noon(rc, out);
        else if (kind == "split-opt") manifest.outputs = cmd_split_opt(rc, out);
        else if (kind == "fringes") manifest.outputs = cmd_fringes(rc, out);
        else if (kind == "quench-fringes") manifest.outputs = cmd_quench_fringes(rc, out);
        else if (kind == "fisher") manifest.outputs = cmd_fisher(rc, out);
        else if (kind == "dephasing-sweep") manifest.outputs = cmd_dephasing_sweep(rc, out);
        else if (kind == "effective-dump") manifest.outputs = cmd_effective_dump(rc, out);
        write_manifest(out, manifest);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
