// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/eval/clustering.hpp"
#include "dibpnmf/eval/compare.hpp"
#include "dibpnmf/eval/recsys.hpp"
#include "dibpnmf/factorization/gibbs.hpp"
#include "dibpnmf/factorization/snmf.hpp"
#include "dibpnmf/io/csv.hpp"
#include "dibpnmf/io/snapshot.hpp"
#include "dibpnmf/io/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dibpnmf::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using factorization::ModelKind;

enum ExitCode : int { Ok = 0, DataFailure = 1, UsageFailure = 2, NumericalAbort = 3 };

/// Flag combination the parser accepts but the command cannot honor.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// fit / eval-recsys model selection and its tuning flags.
struct ModelOptions {
    std::string model;
    std::size_t k_trunc = 30;
    std::size_t iters = 1000;
    std::optional<std::size_t> burn_in;
    std::size_t thin = 1;
    std::uint64_t seed = 0;
    double epsilon = 0.01;
    double tau1 = 1.0;
    double tau2 = 1.0;
    double a0 = 1.0, b0 = 1.0;
    double rho0 = 0.0, alpha1 = 1.0, alpha2 = 1.0;
    double sigma = 1.0, eta = 1.0, hs = 1.0;
    std::size_t k = 10;
    double lambda = 1.0;

    // Flags that only some models accept.
    std::vector<CLI::Option*> dibp_only, bb_only, copula_only, gp_only, snmf_only;
};

inline void add_model_options(CLI::App* cmd, ModelOptions& o, bool model_required) {
    auto* m = cmd->add_option("--model", o.model, "bb, copula, gp or snmf")
                  ->check(CLI::IsMember({"bb", "copula", "gp", "snmf"}));
    if (model_required)
        m->required();
    cmd->add_option("--iters", o.iters, "Sweeps (SNMF: multiplicative updates)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "Master seed");
    o.dibp_only = {
        cmd->add_option("--k-trunc", o.k_trunc, "Truncation level K")
            ->check(CLI::PositiveNumber),
        cmd->add_option("--burn-in", o.burn_in, "Burn-in sweeps (default min(200, iters/5))"),
        cmd->add_option("--thin", o.thin, "Keep every thin-th sweep after burn-in")
            ->check(CLI::PositiveNumber),
        cmd->add_option("--epsilon", o.epsilon, "Likelihood floor"),
        cmd->add_option("--tau1", o.tau1, "Gamma rate of V1"),
        cmd->add_option("--tau2", o.tau2, "Gamma rate of V2"),
    };
    o.bb_only = {cmd->add_option("--a0", o.a0, "Initial bivariate-beta a"),
                 cmd->add_option("--b0", o.b0, "Initial bivariate-beta b")};
    o.copula_only = {cmd->add_option("--rho0", o.rho0, "Initial FGM rho"),
                     cmd->add_option("--alpha1", o.alpha1, "Initial margin shape 1"),
                     cmd->add_option("--alpha2", o.alpha2, "Initial margin shape 2")};
    o.gp_only = {cmd->add_option("--sigma", o.sigma, "Kernel amplitude"),
                 cmd->add_option("--eta", o.eta, "Noise scale"),
                 cmd->add_option("--hs", o.hs, "Gamma shape of the length-scale prior")};
    o.snmf_only = {cmd->add_option("--k", o.k, "SNMF factor count")
                       ->check(CLI::PositiveNumber),
                   cmd->add_option("--lambda", o.lambda, "SNMF l1 weight")};
}

namespace detail {

inline void reject_flags(const std::vector<CLI::Option*>& opts, const std::string& model) {
    for (const CLI::Option* o : opts)
        if (o->count() > 0)
            throw UsageError(o->get_name() + " does not apply to --model " + model);
}

inline std::string join(const std::vector<std::string>& v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0)
            out += sep;
        out += v[i];
    }
    return out;
}

/// SOURCE_DATE_EPOCH when set, so manifests stay reproducible.
inline json creation_time() {
    const char* env = std::getenv("SOURCE_DATE_EPOCH");
    if (env == nullptr || *env == '\0')
        return nullptr;
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (*end != '\0')
        throw UsageError("SOURCE_DATE_EPOCH is not an integer");
    return v;
}

} // namespace detail

inline void check_model_flags(const ModelOptions& o) {
    const std::string& m = o.model;
    if (m == "snmf") {
        detail::reject_flags(o.dibp_only, m);
    } else {
        detail::reject_flags(o.snmf_only, m);
    }
    if (m != "bb")
        detail::reject_flags(o.bb_only, m);
    if (m != "copula")
        detail::reject_flags(o.copula_only, m);
    if (m != "gp")
        detail::reject_flags(o.gp_only, m);
}

/// Resolved sampler configuration; invalid combinations are usage errors.
inline factorization::ModelConfig make_config(const ModelOptions& o) {
    factorization::ModelConfig c;
    c.model = factorization::parse_model_kind(o.model);
    c.K = o.k_trunc;
    c.max_iter = o.iters;
    c.burn_in = o.burn_in ? *o.burn_in : std::min<std::size_t>(200, o.iters / 5);
    c.thin = o.thin;
    c.seed = o.seed;
    c.epsilon = o.epsilon;
    c.tau1 = o.tau1;
    c.tau2 = o.tau2;
    c.bb = {o.a0, o.b0, 1.0};
    c.copula = {o.rho0, o.alpha1, o.alpha2};
    c.kernel.sigma = o.sigma;
    c.kernel.eta = o.eta;
    c.hs = o.hs;
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    return c;
}

inline json manifest(const std::string& command, const std::vector<std::string>& args,
                     json config, json inputs, std::uint64_t seed, const fs::path& out) {
    return json{{"format", "dibpnmf-manifest"},
                {"version", 1},
                {"command", command},
                {"argv", args},
                {"config", std::move(config)},
                {"inputs", std::move(inputs)},
                {"seed", seed},
                {"output_dir", out.string()},
                {"timestamps", {{"created", detail::creation_time()}}}};
}

inline void write_json(const fs::path& path, const json& j) {
    io::write_file_atomic(path, j.dump(1) + "\n");
}

/// One row per thinning cadence; burn-in rows are flagged, not dropped.
inline std::string format_trace(const factorization::Trace& t,
                                const factorization::ModelConfig& cfg) {
    std::vector<std::string> head{"iteration", "burn_in",   "loglik",
                                  "effective_k", "acc_sticks", "acc_v",
                                  "acc_theta"};
    if (cfg.model == ModelKind::Copula)
        head.push_back("acc_rho");
    for (const auto& n : factorization::theta_names(cfg.model))
        head.push_back(n);
    std::string out = detail::join(head, ',') + "\n";
    for (const auto& r : t.records) {
        const bool burn = r.iteration < cfg.burn_in;
        if (burn ? r.iteration % cfg.thin != 0 : !r.retained)
            continue;
        std::vector<std::string> row{std::to_string(r.iteration), burn ? "1" : "0",
                                     io::format_double(r.loglik),
                                     std::to_string(r.effective_k),
                                     io::format_double(r.acc_sticks),
                                     io::format_double(r.acc_v),
                                     io::format_double(r.acc_theta)};
        if (cfg.model == ModelKind::Copula)
            row.push_back(io::format_double(r.acc_rho));
        for (double v : r.theta)
            row.push_back(io::format_double(v));
        out += detail::join(row, ',') + "\n";
    }
    return out;
}

struct FitOutcome {
    Matrix A;
    Matrix X;
    std::optional<factorization::GibbsResult> gibbs;
    std::optional<factorization::SnmfResult> snmf;
    Matrix reconstruction() const { return A * X.transpose(); }
};

inline FitOutcome fit_model(const factorization::DataMatrix& y, const ModelOptions& o,
                            std::uint64_t seed) {
    FitOutcome out;
    if (o.model == "snmf") {
        auto r = factorization::snmf_fit(y, o.k, o.lambda, o.iters, seed);
        out.A = r.A;
        out.X = r.X;
        out.snmf = std::move(r);
        return out;
    }
    factorization::ModelConfig cfg = make_config(o);
    cfg.seed = seed;
    auto r = factorization::run_gibbs(y, cfg);
    out.A = r.best.A();
    out.X = r.best.X();
    out.gibbs = std::move(r);
    return out;
}

inline json options_json(const ModelOptions& o) {
    if (o.model == "snmf")
        return json{{"model", "snmf"}, {"k", o.k},       {"lambda", o.lambda},
                    {"iters", o.iters}, {"seed", o.seed}};
    return io::detail::config_to_json(make_config(o));
}

inline factorization::DataMatrix load_input(const std::string& input,
                                            const std::string& mask, bool header) {
    Matrix values = io::load_dense_csv(input, header).values;
    if (mask.empty())
        return factorization::DataMatrix(std::move(values));
    BinaryMatrix m = io::load_mask_csv(mask, header);
    if (m.rows() != values.rows() || m.cols() != values.cols())
        throw ParseError(mask + ": mask is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " but the data is " +
                         std::to_string(values.rows()) + "x" +
                         std::to_string(values.cols()));
    return factorization::DataMatrix(std::move(values), std::move(m));
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    ModelOptions model;
    std::string input, mask, out;
    bool header = false;
};

inline int cmd_fit(const FitArgs& a, const std::vector<std::string>& argv,
                   std::ostream& out) {
    check_model_flags(a.model);
    const json config = options_json(a.model);
    const auto y = load_input(a.input, a.mask, a.header);
    const fs::path dir(a.out);
    fs::create_directories(dir);
    json inputs{{"input", a.input}};
    if (!a.mask.empty())
        inputs["mask"] = a.mask;
    write_json(dir / "manifest.json",
               manifest("fit", argv, config, inputs, a.model.seed, dir));

    const FitOutcome r = fit_model(y, a.model, a.model.seed);
    const Matrix recon = r.reconstruction();
    if (r.snmf) {
        std::string t = "iteration,objective\n";
        for (std::size_t i = 0; i < r.snmf->objective.size(); ++i)
            t += std::to_string(i) + "," + io::format_double(r.snmf->objective[i]) + "\n";
        io::write_file_atomic(dir / "trace.csv", t);
    } else {
        const auto cfg = make_config(a.model);
        io::write_file_atomic(dir / "trace.csv", format_trace(r.gibbs->trace, cfg));
        io::save_best_state({*r.gibbs->trace.best_iteration, r.gibbs->trace.best_loglik,
                             r.gibbs->best},
                            dir / "best_state.json");
    }
    io::write_csv(dir / "A.csv", r.A);
    io::write_csv(dir / "X.csv", r.X);
    io::write_csv(dir / "reconstruction.csv", recon);

    const double err = factorization::recon_error_l1(y.values, recon, y.mask ? &*y.mask : nullptr);
    out << "model " << a.model.model << ", " << y.rows() << "x" << y.cols() << "\n";
    if (r.gibbs)
        out << "best iteration " << *r.gibbs->trace.best_iteration << ", loglik "
            << io::format_double(r.gibbs->trace.best_loglik) << ", effective K "
            << dibp::effective_k(r.gibbs->best.Z1, r.gibbs->best.Z2) << "\n";
    else
        out << "final objective " << io::format_double(r.snmf->objective.back()) << "\n";
    out << "l1 reconstruction error " << io::format_double(err) << "\n";
    out << "wrote " << dir.string() << "\n";
    return Ok;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string mode;
    Eigen::Index rows = 20, cols = 30;
    double density = 0.5;
    Eigen::Index k_true = 5;
    double sparsity = 0.5;
    double epsilon = 0.01;
    std::uint64_t seed = 0;
    std::string out;
    CLI::Option* density_opt = nullptr;
    std::vector<CLI::Option*> planted_only;
};

inline int cmd_synth(const SynthArgs& a, const std::vector<std::string>& argv,
                     std::ostream& out) {
    if (a.rows < 1 || a.cols < 1)
        throw UsageError("--rows and --cols must be positive");
    if (a.mode == "binary") {
        detail::reject_flags(a.planted_only, a.mode);
        if (!(a.density > 0.0 && a.density < 1.0))
            throw UsageError("--density must lie in (0, 1)");
    } else {
        if (a.density_opt->count() > 0)
            throw UsageError("--density does not apply to planted data");
        if (a.k_true < 1)
            throw UsageError("--k-true must be at least 1");
        if (!(a.sparsity > 0.0 && a.sparsity <= 1.0))
            throw UsageError("--sparsity must lie in (0, 1]");
        if (!(a.epsilon > 0.0))
            throw UsageError("--epsilon must be positive");
    }
    const fs::path dir(a.out);
    fs::create_directories(dir);
    json cfg{{"mode", a.mode}, {"rows", a.rows}, {"cols", a.cols}};
    if (a.mode == "binary") {
        cfg["density"] = a.density;
    } else {
        cfg["k_true"] = a.k_true;
        cfg["sparsity"] = a.sparsity;
        cfg["epsilon"] = a.epsilon;
    }
    write_json(dir / "manifest.json", manifest("synth", argv, cfg, json::object(), a.seed, dir));
    if (a.mode == "binary") {
        io::write_csv(dir / "Y.csv", io::synth_binary(a.rows, a.cols, a.density, a.seed).values);
        out << "wrote " << (dir / "Y.csv").string() << "\n";
    } else {
        const auto p =
            io::synth_planted(a.rows, a.cols, a.k_true, a.sparsity, a.seed, a.epsilon);
        io::write_csv(dir / "Y.csv", p.y.values);
        io::write_csv(dir / "A.csv", p.A);
        io::write_csv(dir / "X.csv", p.X);
        out << "wrote Y.csv, A.csv, X.csv to " << dir.string() << "\n";
    }
    return Ok;
}

// ---------------------------------------------------------------- eval-clustering

struct ClusteringArgs {
    std::string factors, labels, out;
    std::size_t clusters = 2;
    std::size_t restarts = 10;
    std::uint64_t seed = 0;
    bool header = false;
};

inline std::string metric_text(const std::optional<double>& v) {
    return v ? io::format_double(*v) : std::string{};
}

inline int cmd_eval_clustering(const ClusteringArgs& a, const std::vector<std::string>& argv,
                               std::ostream& out, std::ostream& err) {
    const Matrix x = io::load_dense_csv(a.factors, a.header).values;
    const std::vector<int> truth = io::load_labels(a.labels, a.header);
    if (truth.size() != static_cast<std::size_t>(x.rows()))
        throw ParseError(a.labels + ": " + std::to_string(truth.size()) +
                         " labels for " + std::to_string(x.rows()) + " factor rows");
    if (a.clusters > static_cast<std::size_t>(x.rows()))
        throw UsageError("--clusters exceeds the number of rows");
    const auto km = eval::kmeans_assign(x, a.clusters, a.seed, a.restarts);
    const auto m = eval::cluster_metrics(eval::pair_counts(km.labels, truth));
    const std::string table = "jc,fm,f1\n" + metric_text(m.jc) + "," + metric_text(m.fm) +
                              "," + metric_text(m.f1) + "\n";
    out << table;
    auto show = [](const std::optional<double>& v) {
        return v ? io::format_double(*v) : std::string("undefined");
    };
    err << "JC " << show(m.jc) << "  FM " << show(m.fm) << "  F1 " << show(m.f1) << " ("
        << x.rows() << " rows, " << a.clusters << " clusters)\n";
    if (!a.out.empty()) {
        const fs::path dir(a.out);
        fs::create_directories(dir);
        write_json(dir / "manifest.json",
                   manifest("eval-clustering", argv,
                            {{"clusters", a.clusters}, {"restarts", a.restarts}},
                            {{"factors", a.factors}, {"labels", a.labels}}, a.seed, dir));
        io::write_file_atomic(dir / "metrics.csv", table);
        std::string assign = "row,cluster\n";
        for (std::size_t i = 0; i < km.labels.size(); ++i)
            assign += std::to_string(i + 1) + "," + std::to_string(km.labels[i]) + "\n";
        io::write_file_atomic(dir / "assignments.csv", assign);
    }
    return Ok;
}

// ---------------------------------------------------------------- eval-recsys

struct RecsysArgs {
    ModelOptions model;
    std::string input, reconstruction, out;
    Eigen::Index rows = 0, cols = 0;
    std::size_t folds = 5;
};

inline int cmd_eval_recsys(const RecsysArgs& a, const std::vector<std::string>& argv,
                           std::ostream& out) {
    if (a.reconstruction.empty() == a.model.model.empty())
        throw UsageError("give exactly one of --model and --reconstruction");
    if (!a.model.model.empty())
        check_model_flags(a.model);
    if (a.folds < 2)
        throw UsageError("--folds must be at least 2");
    const json config = a.model.model.empty()
                            ? json{{"reconstruction", a.reconstruction}}
                            : options_json(a.model);
    const RatingTriplets t = io::load_triplets(a.input, a.rows, a.cols);
    if (t.ratings.size() < a.folds)
        throw ParseError(a.input + ": " + std::to_string(t.ratings.size()) +
                         " ratings cannot fill " + std::to_string(a.folds) + " folds");
    std::optional<Matrix> oracle;
    if (!a.reconstruction.empty()) {
        oracle = io::load_dense_csv(a.reconstruction).values;
        if (oracle->rows() != a.rows || oracle->cols() != a.cols)
            throw ParseError(a.reconstruction + ": reconstruction shape does not match "
                                                "--rows/--cols");
    }
    fs::path dir;
    if (!a.out.empty()) {
        dir = a.out;
        fs::create_directories(dir);
        json inputs{{"input", a.input}};
        if (oracle)
            inputs["reconstruction"] = a.reconstruction;
        write_json(dir / "manifest.json",
                   manifest("eval-recsys", argv,
                            {{"model", config}, {"folds", a.folds}, {"rows", a.rows},
                             {"cols", a.cols}},
                            inputs, a.model.seed, dir));
    }

    const Matrix values = t.dense().first;
    const auto folds = eval::cv_split(t, a.folds, a.model.seed);
    std::string table = "fold,n_test,mae\n";
    std::vector<double> maes;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& fold = folds[f];
        Matrix rec;
        if (oracle) {
            rec = *oracle;
        } else {
            // Held-out values are zeroed as well as masked.
            Matrix train = values.cwiseProduct(to_real(fold.train_mask));
            const factorization::DataMatrix y(std::move(train), fold.train_mask);
            rec = fit_model(y, a.model, derive_seed(a.model.seed, f)).reconstruction();
        }
        const double e = eval::mae(rec, values, fold.test_mask);
        maes.push_back(e);
        table += std::to_string(f + 1) + "," + std::to_string(fold.test.size()) + "," +
                 io::format_double(e) + "\n";
    }
    double mean = 0.0;
    for (double e : maes)
        mean += e;
    mean /= static_cast<double>(maes.size());
    double ss = 0.0;
    for (double e : maes)
        ss += (e - mean) * (e - mean);
    const double sd = std::sqrt(ss / static_cast<double>(maes.size() - 1));
    const std::string summary =
        "mean,sd\n" + io::format_double(mean) + "," + io::format_double(sd) + "\n";
    out << table << summary;
    if (!a.out.empty()) {
        io::write_file_atomic(dir / "folds.csv", table);
        io::write_file_atomic(dir / "summary.csv", summary);
    }
    return Ok;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
    std::size_t trials = 10;
    std::uint64_t seed = 0;
    Eigen::Index rows = 20, cols = 30;
    double density = 0.5;
    std::size_t iters = 1000;
    std::size_t k_trunc = 30;
    std::optional<std::size_t> burn_in;
    std::string out;
};

inline int cmd_compare(const CompareArgs& a, const std::vector<std::string>& argv,
                       std::ostream& out) {
    if (a.rows < 1 || a.cols < 1)
        throw UsageError("--rows and --cols must be positive");
    if (!(a.density > 0.0 && a.density < 1.0))
        throw UsageError("--density must lie in (0, 1)");
    factorization::ModelConfig base;
    base.K = a.k_trunc;
    base.max_iter = a.iters;
    base.burn_in = a.burn_in ? *a.burn_in : std::min<std::size_t>(200, a.iters / 5);
    try {
        base.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    fs::path dir;
    if (!a.out.empty()) {
        dir = a.out;
        fs::create_directories(dir);
        json cfg = io::detail::config_to_json(base);
        cfg.erase("model");
        cfg.erase("seed");
        write_json(dir / "manifest.json",
                   manifest("compare", argv,
                            {{"trials", a.trials}, {"rows", a.rows}, {"cols", a.cols},
                             {"density", a.density}, {"sampler", cfg}},
                            json::object(), a.seed, dir));
    }
    const auto rows = eval::run_comparison(a.trials, a.seed, a.rows, a.cols, a.density, base);
    std::string table = "trial,model,recon_error,effective_k,flexibility,best_loglik,"
                        "iterations_to_converge\n";
    for (const auto& r : rows)
        table += std::to_string(r.trial + 1) + "," +
                 std::string(factorization::to_string(r.model)) + "," +
                 io::format_double(r.recon_error) + "," + std::to_string(r.effective_k) +
                 "," + io::format_double(r.flexibility) + "," +
                 io::format_double(r.best_loglik) + "," +
                 std::to_string(r.iterations_to_converge) + "\n";
    out << table;
    if (!a.out.empty())
        io::write_file_atomic(dir / "comparison.csv", table);
    return Ok;
}

// ---------------------------------------------------------------- entry point

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nonparametric NMF with dependent Indian buffet process priors"};
    app.name("dibpnmf");
    app.require_subcommand(1);
    app.set_version_flag("--version", "dibpnmf 1.0.0");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Factorize a dense CSV matrix");
    add_model_options(c_fit, fit.model, true);
    c_fit->add_option("--input", fit.input, "Dense CSV data")->required();
    c_fit->add_option("--mask", fit.mask, "0/1 CSV of observed entries");
    c_fit->add_option("--out", fit.out, "Run directory")->required();
    c_fit->add_flag("--header", fit.header, "CSV files start with a header line");

    SynthArgs syn;
    auto* c_syn = app.add_subcommand("synth", "Generate synthetic data");
    c_syn->add_option("mode", syn.mode, "binary or planted")
        ->required()
        ->check(CLI::IsMember({"binary", "planted"}));
    c_syn->add_option("--rows", syn.rows, "Rows");
    c_syn->add_option("--cols", syn.cols, "Columns");
    c_syn->add_option("--seed", syn.seed, "Seed");
    c_syn->add_option("--out", syn.out, "Output directory")->required();
    syn.density_opt = c_syn->add_option("--density", syn.density, "Fraction of ones (binary)");
    syn.planted_only = {
        c_syn->add_option("--k-true", syn.k_true, "Planted factor count"),
        c_syn->add_option("--sparsity", syn.sparsity, "Loading inclusion probability"),
        c_syn->add_option("--epsilon", syn.epsilon, "Likelihood floor")};

    ClusteringArgs cl;
    auto* c_cl = app.add_subcommand("eval-clustering", "Cluster factor rows and score them");
    c_cl->add_option("--factors", cl.factors, "Dense CSV, one row per item")->required();
    c_cl->add_option("--labels", cl.labels, "One integer label per line")->required();
    c_cl->add_option("--clusters", cl.clusters, "Number of clusters")
        ->required()
        ->check(CLI::PositiveNumber);
    c_cl->add_option("--seed", cl.seed, "k-means seed");
    c_cl->add_option("--restarts", cl.restarts, "k-means restarts")->check(CLI::PositiveNumber);
    c_cl->add_option("--out", cl.out, "Optional output directory");
    c_cl->add_flag("--header", cl.header, "Input files start with a header line");

    RecsysArgs rs;
    auto* c_rs = app.add_subcommand("eval-recsys", "Cross-validated MAE on rating triplets");
    add_model_options(c_rs, rs.model, false);
    c_rs->add_option("--input", rs.input, "Rating triplets (1-based)")->required();
    c_rs->add_option("--rows", rs.rows, "Matrix rows")->required();
    c_rs->add_option("--cols", rs.cols, "Matrix columns")->required();
    c_rs->add_option("--folds", rs.folds, "Number of folds");
    c_rs->add_option("--reconstruction", rs.reconstruction,
                     "Score this dense CSV instead of fitting a model");
    c_rs->add_option("--out", rs.out, "Optional output directory");

    CompareArgs cmp;
    auto* c_cmp = app.add_subcommand("compare", "Flexibility comparison of the dIBP models");
    c_cmp->add_option("--trials", cmp.trials, "Random matrices")->check(CLI::PositiveNumber);
    c_cmp->add_option("--seed", cmp.seed, "Master seed");
    c_cmp->add_option("--rows", cmp.rows, "Rows");
    c_cmp->add_option("--cols", cmp.cols, "Columns");
    c_cmp->add_option("--density", cmp.density, "Fraction of ones");
    c_cmp->add_option("--iters", cmp.iters, "Sweeps per model")->check(CLI::PositiveNumber);
    c_cmp->add_option("--k-trunc", cmp.k_trunc, "Truncation level K")
        ->check(CLI::PositiveNumber);
    c_cmp->add_option("--burn-in", cmp.burn_in, "Burn-in sweeps");
    c_cmp->add_option("--out", cmp.out, "Optional output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : UsageFailure;
    }
    std::vector<std::string> args(argv + 1, argv + argc);

    try {
        if (c_fit->parsed())
            return cmd_fit(fit, args, out);
        if (c_syn->parsed())
            return cmd_synth(syn, args, out);
        if (c_cl->parsed())
            return cmd_eval_clustering(cl, args, out, err);
        if (c_rs->parsed())
            return cmd_eval_recsys(rs, args, out);
        return cmd_compare(cmp, args, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return UsageFailure;
    } catch (const SamplerAbort& e) {
        err << "sampler aborted: " << e.what() << "\n";
        return NumericalAbort;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return NumericalAbort;
    } catch (const ParseError& e) {
        err << "data error: " << e.what() << "\n";
        return DataFailure;
    } catch (const VersionError& e) {
        err << "data error: " << e.what() << "\n";
        return DataFailure;
    } catch (const DomainError& e) {
        err << "data error: " << e.what() << "\n";
        return DataFailure;
    } catch (const ContractViolation& e) {
        err << "data error: " << e.what() << "\n";
        return DataFailure;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return DataFailure;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << "\n";
        return DataFailure;
    }
}

} // namespace dibpnmf::cli
