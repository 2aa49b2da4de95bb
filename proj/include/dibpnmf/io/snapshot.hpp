// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/dibp/gp.hpp"
#include "dibpnmf/dibp/paired.hpp"
#include "dibpnmf/errors.hpp"
#include "dibpnmf/factorization/gibbs.hpp"
#include "dibpnmf/io/csv.hpp"
#include "dibpnmf/matrix.hpp"
#include "dibpnmf/random.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace dibpnmf::io {

using json = nlohmann::json;

inline constexpr const char* snapshot_format = "dibpnmf-snapshot";
inline constexpr int snapshot_version = 1;

/// Everything needed to continue a run bit-identically.
struct StateSnapshot {
    factorization::ModelConfig config;
    factorization::SamplerState state;
    std::string rng_state;
    std::optional<factorization::Trace> trace;

    friend bool operator==(const StateSnapshot&, const StateSnapshot&) = default;
};

namespace detail {

template <typename Derived> json matrix_to_json(const Eigen::MatrixBase<Derived>& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

template <typename M> M matrix_from_json(const json& j) {
    const auto r = j.at("rows").get<Eigen::Index>();
    const auto c = j.at("cols").get<Eigen::Index>();
    const json& data = j.at("data");
    if (r < 0 || c < 0 || data.size() != static_cast<std::size_t>(r))
        throw ParseError("snapshot: matrix row count does not match its data");
    M m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const json& row = data.at(static_cast<std::size_t>(i));
        if (row.size() != static_cast<std::size_t>(c))
            throw ParseError("snapshot: matrix column count does not match its "
                             "data");
        for (Eigen::Index k = 0; k < c; ++k)
            m(i, k) = row.at(static_cast<std::size_t>(k)).get<typename M::Scalar>();
    }
    return m;
}

inline json factors_to_json(const factorization::FactorState& f) {
    return json{{"V1", matrix_to_json(f.V1)},
                {"V2", matrix_to_json(f.V2)},
                {"Z1", matrix_to_json(f.Z1.cast<int>())},
                {"Z2", matrix_to_json(f.Z2.cast<int>())}};
}

inline BinaryMatrix binary_from_json(const json& j) {
    const Eigen::MatrixXi m = matrix_from_json<Eigen::MatrixXi>(j);
    if (((m.array() != 0) && (m.array() != 1)).any())
        throw ParseError("snapshot: mask entries must be 0 or 1");
    return m.cast<std::uint8_t>();
}

inline factorization::FactorState factors_from_json(const json& j) {
    factorization::FactorState f;
    f.V1 = matrix_from_json<Matrix>(j.at("V1"));
    f.V2 = matrix_from_json<Matrix>(j.at("V2"));
    f.Z1 = binary_from_json(j.at("Z1"));
    f.Z2 = binary_from_json(j.at("Z2"));
    factorization::check_shapes(f);
    return f;
}

inline json kernel_to_json(const stats::GaussKernelParams& k) {
    return json{{"sigma", k.sigma}, {"s", k.s}, {"eta", k.eta}, {"t1", k.t1},
                {"t2", k.t2}};
}

inline stats::GaussKernelParams kernel_from_json(const json& j) {
    return {j.at("sigma").get<double>(), j.at("s").get<double>(),
            j.at("eta").get<double>(), j.at("t1").get<double>(),
            j.at("t2").get<double>()};
}

inline json config_to_json(const factorization::ModelConfig& c) {
    return json{
        {"model", std::string(factorization::to_string(c.model))},
        {"K", c.K},
        {"epsilon", c.epsilon},
        {"tau1", c.tau1},
        {"tau2", c.tau2},
        {"hp", {{"shape", c.hp.shape}, {"rate", c.hp.rate}}},
        {"max_iter", c.max_iter},
        {"burn_in", c.burn_in},
        {"thin", c.thin},
        {"seed", c.seed},
        {"step", c.step},
        {"bb", {{"a", c.bb.a}, {"b", c.bb.b}, {"c", c.bb.c}}},
        {"copula",
         {{"rho", c.copula.rho}, {"alpha1", c.copula.alpha1}, {"alpha2", c.copula.alpha2}}},
        {"kernel", kernel_to_json(c.kernel)},
        {"gp_alpha", c.gp_alpha},
        {"hs", c.hs},
        {"keep_samples", c.keep_samples},
    };
}

inline factorization::ModelConfig config_from_json(const json& j) {
    factorization::ModelConfig c;
    c.model = factorization::parse_model_kind(j.at("model").get<std::string>());
    c.K = j.at("K").get<std::size_t>();
    c.epsilon = j.at("epsilon").get<double>();
    c.tau1 = j.at("tau1").get<double>();
    c.tau2 = j.at("tau2").get<double>();
    c.hp = {j.at("hp").at("shape").get<double>(), j.at("hp").at("rate").get<double>()};
    c.max_iter = j.at("max_iter").get<std::size_t>();
    c.burn_in = j.at("burn_in").get<std::size_t>();
    c.thin = j.at("thin").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.step = j.at("step").get<double>();
    const json& bb = j.at("bb");
    c.bb = {bb.at("a").get<double>(), bb.at("b").get<double>(), bb.at("c").get<double>()};
    const json& cp = j.at("copula");
    c.copula = {cp.at("rho").get<double>(), cp.at("alpha1").get<double>(),
                cp.at("alpha2").get<double>()};
    c.kernel = kernel_from_json(j.at("kernel"));
    c.gp_alpha = j.at("gp_alpha").get<double>();
    c.hs = j.at("hs").get<double>();
    c.keep_samples = j.at("keep_samples").get<bool>();
    return c;
}

inline json sticks_to_json(const factorization::StickVariant& v) {
    if (const auto* p = std::get_if<dibp::PairedStickState>(&v)) {
        json coupling;
        if (const auto* bb = std::get_if<stats::BivariateBetaParams>(&p->coupling))
            coupling = {{"type", "bb"}, {"a", bb->a}, {"b", bb->b}, {"c", bb->c}};
        else {
            const auto& f = std::get<stats::FgmParams>(p->coupling);
            coupling = {{"type", "copula"},
                        {"rho", f.rho},
                        {"alpha1", f.alpha1},
                        {"alpha2", f.alpha2}};
        }
        return json{{"kind", "paired"}, {"mu1", p->mu1}, {"mu2", p->mu2},
                    {"coupling", coupling}};
    }
    const auto& g = std::get<dibp::GpStickState>(v);
    json gs = json::array();
    for (const auto& gk : g.g)
        gs.push_back({gk[0], gk[1]});
    return json{{"kind", "gp"},
                {"mu", g.mu},
                {"g", gs},
                {"h1", matrix_to_json(g.h1)},
                {"h2", matrix_to_json(g.h2)},
                {"kernel", kernel_to_json(g.kernel)},
                {"alpha", g.alpha},
                {"hs", g.hs}};
}

inline factorization::StickVariant sticks_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "paired") {
        dibp::PairedStickState p;
        p.mu1 = j.at("mu1").get<std::vector<double>>();
        p.mu2 = j.at("mu2").get<std::vector<double>>();
        const json& c = j.at("coupling");
        const std::string type = c.at("type").get<std::string>();
        if (type == "bb")
            p.coupling = stats::BivariateBetaParams{c.at("a").get<double>(),
                                                    c.at("b").get<double>(),
                                                    c.at("c").get<double>()};
        else if (type == "copula")
            p.coupling = stats::FgmParams{c.at("rho").get<double>(),
                                          c.at("alpha1").get<double>(),
                                          c.at("alpha2").get<double>()};
        else
            throw ParseError("snapshot: unknown coupling '" + type + "'");
        if (p.mu1.size() != p.mu2.size())
            throw ParseError("snapshot: stick chains differ in length");
        return p;
    }
    if (kind == "gp") {
        dibp::GpStickState g;
        g.mu = j.at("mu").get<std::vector<double>>();
        for (const json& gk : j.at("g"))
            g.g.push_back({gk.at(0).get<double>(), gk.at(1).get<double>()});
        g.h1 = matrix_from_json<Matrix>(j.at("h1"));
        g.h2 = matrix_from_json<Matrix>(j.at("h2"));
        g.kernel = kernel_from_json(j.at("kernel"));
        g.alpha = j.at("alpha").get<double>();
        g.hs = j.at("hs").get<double>();
        if (g.g.size() != g.mu.size())
            throw ParseError("snapshot: g and mu differ in length");
        return g;
    }
    throw ParseError("snapshot: unknown stick kind '" + kind + "'");
}

inline json record_to_json(const factorization::IterationRecord& r) {
    return json{{"iteration", r.iteration},   {"loglik", r.loglik},
                {"effective_k", r.effective_k}, {"acc_sticks", r.acc_sticks},
                {"acc_v", r.acc_v},           {"acc_theta", r.acc_theta},
                {"acc_rho", r.acc_rho},       {"theta", r.theta},
                {"mu1", r.mu1},               {"mu2", r.mu2},
                {"retained", r.retained}};
}

inline factorization::IterationRecord record_from_json(const json& j) {
    factorization::IterationRecord r;
    r.iteration = j.at("iteration").get<std::size_t>();
    r.loglik = j.at("loglik").get<double>();
    r.effective_k = j.at("effective_k").get<std::size_t>();
    r.acc_sticks = j.at("acc_sticks").get<double>();
    r.acc_v = j.at("acc_v").get<double>();
    r.acc_theta = j.at("acc_theta").get<double>();
    r.acc_rho = j.at("acc_rho").get<double>();
    r.theta = j.at("theta").get<std::vector<double>>();
    r.mu1 = j.at("mu1").get<std::vector<double>>();
    r.mu2 = j.at("mu2").get<std::vector<double>>();
    r.retained = j.at("retained").get<bool>();
    return r;
}

inline json trace_to_json(const factorization::Trace& t) {
    json records = json::array();
    for (const auto& r : t.records)
        records.push_back(record_to_json(r));
    json samples = json::array();
    for (const auto& s : t.samples)
        samples.push_back(factors_to_json(s));
    json out{{"records", records}, {"samples", samples}};
    if (t.best_iteration) {
        out["best_iteration"] = *t.best_iteration;
        out["best_loglik"] = t.best_loglik;
        out["best_state"] = factors_to_json(t.best_state);
    }
    return out;
}

inline factorization::Trace trace_from_json(const json& j) {
    factorization::Trace t;
    for (const json& r : j.at("records"))
        t.records.push_back(record_from_json(r));
    for (const json& s : j.at("samples"))
        t.samples.push_back(factors_from_json(s));
    if (j.contains("best_iteration")) {
        t.best_iteration = j.at("best_iteration").get<std::size_t>();
        t.best_loglik = j.at("best_loglik").get<double>();
        t.best_state = factors_from_json(j.at("best_state"));
    }
    return t;
}

} // namespace detail

inline json snapshot_to_json(const StateSnapshot& s) {
    json j{{"format", snapshot_format},
           {"version", snapshot_version},
           {"config", detail::config_to_json(s.config)},
           {"iteration", s.state.iteration},
           {"rng", s.rng_state},
           {"factors", detail::factors_to_json(s.state.factors)},
           {"sticks", detail::sticks_to_json(s.state.sticks)}};
    if (s.trace)
        j["trace"] = detail::trace_to_json(*s.trace);
    return j;
}

/// Rejects foreign documents (ParseError) and other format versions
/// (VersionError).
inline StateSnapshot snapshot_from_json(const json& j) {
    try {
        if (!j.is_object() || j.value("format", std::string{}) != snapshot_format)
            throw ParseError("snapshot: not a snapshot document");
        const int version = j.at("version").get<int>();
        if (version != snapshot_version)
            throw VersionError("snapshot: format version " + std::to_string(version) +
                               " is not supported (expected " +
                               std::to_string(snapshot_version) + ")");
        StateSnapshot s;
        s.config = detail::config_from_json(j.at("config"));
        s.state.iteration = j.at("iteration").get<std::size_t>();
        s.rng_state = j.at("rng").get<std::string>();
        s.state.factors = detail::factors_from_json(j.at("factors"));
        s.state.sticks = detail::sticks_from_json(j.at("sticks"));
        if (j.contains("trace"))
            s.trace = detail::trace_from_json(j.at("trace"));
        Rng probe;
        probe.restore(s.rng_state);
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("snapshot: corrupt document: ") + e.what());
    } catch (const DomainError& e) {
        throw ParseError(std::string("snapshot: invalid value: ") + e.what());
    } catch (const ContractViolation& e) {
        throw ParseError(std::string("snapshot: inconsistent state: ") + e.what());
    }
}

inline void save_snapshot(const StateSnapshot& s, const std::filesystem::path& path) {
    write_file_atomic(path, snapshot_to_json(s).dump(1) + "\n");
}

inline StateSnapshot load_snapshot(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": snapshot: corrupt document: " + e.what());
    }
    try {
        return snapshot_from_json(j);
    } catch (const ParseError& e) {
        throw e.with_context(path.string());
    }
}

inline constexpr const char* best_state_format = "dibpnmf-best-state";

/// Max-likelihood retained sample of a finished run.
struct BestState {
    std::size_t iteration = 0;
    double loglik = 0.0;
    factorization::FactorState factors;

    friend bool operator==(const BestState&, const BestState&) = default;
};

inline void save_best_state(const BestState& b, const std::filesystem::path& path) {
    const json j{{"format", best_state_format},
                 {"version", snapshot_version},
                 {"iteration", b.iteration},
                 {"loglik", b.loglik},
                 {"factors", detail::factors_to_json(b.factors)}};
    write_file_atomic(path, j.dump(1) + "\n");
}

inline BestState load_best_state(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        const json j = json::parse(text);
        if (!j.is_object() || j.value("format", std::string{}) != best_state_format)
            throw ParseError("best state: not a best-state document");
        if (j.at("version").get<int>() != snapshot_version)
            throw VersionError(path.string() + ": best state: unsupported version");
        return {j.at("iteration").get<std::size_t>(), j.at("loglik").get<double>(),
                detail::factors_from_json(j.at("factors"))};
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": best state: corrupt document: " + e.what());
    } catch (const ContractViolation& e) {
        throw ParseError(path.string() + ": best state: inconsistent factors: " +
                         e.what());
    } catch (const ParseError& e) {
        throw e.with_context(path.string());
    }
}

inline StateSnapshot snapshot_of(const factorization::GibbsSampler& s,
                                 bool with_trace = true) {
    StateSnapshot out{s.config(), s.state(), s.rng().state(), std::nullopt};
    if (with_trace)
        out.trace = s.trace();
    return out;
}

/// Sampler positioned exactly where the snapshot was taken. Needs the trace.
inline factorization::GibbsSampler resume(const StateSnapshot& s,
                                          factorization::DataMatrix y) {
    if (!s.trace)
        throw ContractViolation("resume: snapshot carries no trace");
    Rng rng;
    rng.restore(s.rng_state);
    return factorization::GibbsSampler(std::move(y), s.config, s.state, rng, *s.trace);
}

} // namespace dibpnmf::io
