// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/dibp/gp.hpp"
#include "dibpnmf/dibp/paired.hpp"
#include "dibpnmf/errors.hpp"
#include "dibpnmf/factorization/model.hpp"
#include "dibpnmf/factorization/updates.hpp"
#include "dibpnmf/matrix.hpp"
#include "dibpnmf/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace dibpnmf::factorization {

enum class ModelKind { BivariateBeta, Copula, Gp };

inline std::string_view to_string(ModelKind m) {
    switch (m) {
    case ModelKind::BivariateBeta:
        return "bb";
    case ModelKind::Copula:
        return "copula";
    case ModelKind::Gp:
        return "gp";
    }
    return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "bb")
        return ModelKind::BivariateBeta;
    if (s == "copula")
        return ModelKind::Copula;
    if (s == "gp")
        return ModelKind::Gp;
    throw DomainError("unknown model '" + std::string(s) + "'");
}

struct ModelConfig {
    ModelKind model = ModelKind::BivariateBeta;
    std::size_t K = 30;
    double epsilon = 0.01;
    double tau1 = 1.0;
    double tau2 = 1.0;
    GammaPrior hp;
    std::size_t max_iter = 1000;
    std::size_t burn_in = 200;
    std::size_t thin = 1;
    std::uint64_t seed = 0;
    double step = 0.1; ///< log-space random-walk step for theta and s

    /// Starting coupling parameters; c of the bivariate beta stays at 1.
    stats::BivariateBetaParams bb{1.0, 1.0, 1.0};
    stats::FgmParams copula{0.0, 1.0, 1.0};
    stats::GaussKernelParams kernel;
    double gp_alpha = 1.0;
    double hs = 1.0;

    bool keep_samples = false;

    void validate() const {
        if (K < 1)
            throw DomainError("config: K must be at least 1");
        if (!(epsilon > 0.0))
            throw DomainError("config: epsilon must be positive");
        if (!(tau1 > 0.0 && tau2 > 0.0))
            throw DomainError("config: tau1 and tau2 must be positive");
        if (!(hp.shape > 0.0 && hp.rate > 0.0))
            throw DomainError("config: hyper-prior shape and rate must be "
                              "positive");
        if (max_iter < 1)
            throw DomainError("config: max_iter must be at least 1");
        if (burn_in >= max_iter)
            throw DomainError("config: burn_in must be below max_iter");
        if (thin < 1)
            throw DomainError("config: thin must be at least 1");
        if (!(step > 0.0))
            throw DomainError("config: step must be positive");
        if (bb.c != 1.0)
            throw DomainError("config: c of the bivariate beta is fixed at 1");
        stats::validate(bb);
        stats::validate(copula);
        stats::validate(kernel);
        if (!(gp_alpha > 0.0 && hs > 0.0))
            throw DomainError("config: gp alpha and hs must be positive");
    }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Names of the coupling parameters recorded per iteration.
inline std::vector<std::string> theta_names(ModelKind m) {
    switch (m) {
    case ModelKind::BivariateBeta:
        return {"a", "b"};
    case ModelKind::Copula:
        return {"alpha1", "alpha2", "rho"};
    case ModelKind::Gp:
        return {"s"};
    }
    return {};
}

struct IterationRecord {
    std::size_t iteration = 0;
    double loglik = 0.0;
    std::size_t effective_k = 0;
    double acc_sticks = 0.0;
    double acc_v = 0.0;
    double acc_theta = 0.0; ///< (a, b), (alpha1, alpha2) or s
    double acc_rho = 0.0;   ///< copula only
    std::vector<double> theta;
    std::vector<double> mu1;
    std::vector<double> mu2; ///< equals mu1 for the GP coupling
    bool retained = false;

    friend bool operator==(const IterationRecord&,
                           const IterationRecord&) = default;
};

struct Trace {
    std::vector<IterationRecord> records;
    std::vector<FactorState> samples; ///< retained states, if kept
    std::optional<std::size_t> best_iteration;
    double best_loglik = -std::numeric_limits<double>::infinity();
    FactorState best_state;

    std::vector<double> logliks() const {
        std::vector<double> out;
        out.reserve(records.size());
        for (const auto& r : records)
            out.push_back(r.loglik);
        return out;
    }

    friend bool operator==(const Trace&, const Trace&) = default;
};

using StickVariant = std::variant<dibp::PairedStickState, dibp::GpStickState>;

struct SamplerState {
    FactorState factors;
    StickVariant sticks;
    std::size_t iteration = 0; ///< next iteration to run

    friend bool operator==(const SamplerState&, const SamplerState&) = default;
};

/// Initial state drawn from the priors: V ~ gamma(1, tau), sticks from the
/// coupling, Z ~ Bernoulli(mu) (or the GP thresholds).
inline SamplerState initial_state(const DataMatrix& y, const ModelConfig& cfg,
                                  Rng& rng) {
    const Eigen::Index M = y.rows();
    const Eigen::Index N = y.cols();
    const auto K = static_cast<Eigen::Index>(cfg.K);
    SamplerState st;
    FactorState& f = st.factors;
    f.V1.resize(M, K);
    f.V2.resize(N, K);
    for (Eigen::Index k = 0; k < K; ++k) {
        for (Eigen::Index m = 0; m < M; ++m)
            f.V1(m, k) = rng.exponential(cfg.tau1);
        for (Eigen::Index n = 0; n < N; ++n)
            f.V2(n, k) = rng.exponential(cfg.tau2);
    }
    if (cfg.model == ModelKind::Gp) {
        auto gp = dibp::init_gp(cfg.K, M, N, cfg.kernel, cfg.gp_alpha, cfg.hs, rng);
        auto [z1, z2] = dibp::gp_masks(gp);
        f.Z1 = std::move(z1);
        f.Z2 = std::move(z2);
        st.sticks = std::move(gp);
        return st;
    }
    const dibp::Coupling c = cfg.model == ModelKind::BivariateBeta
                                 ? dibp::Coupling{cfg.bb}
                                 : dibp::Coupling{cfg.copula};
    auto sticks = dibp::init_chains(c, cfg.K, rng);
    f.Z1.resize(M, K);
    f.Z2.resize(N, K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        for (Eigen::Index m = 0; m < M; ++m)
            f.Z1(m, k) = rng.bernoulli(sticks.mu1[kk]);
        for (Eigen::Index n = 0; n < N; ++n)
            f.Z2(n, k) = rng.bernoulli(sticks.mu2[kk]);
    }
    st.sticks = std::move(sticks);
    return st;
}

/**
 * Resumable Metropolis-within-Gibbs sampler for the three couplings.
 *
 * Each step() runs one sweep in the order
 *   bb:     sticks, Z, (a, b), V
 *   copula: sticks, Z, (alpha1, alpha2), rho, V
 *   gp:     mu, Z, g, h, s, V
 * and records the log-likelihood of the resulting state. Iterations i with
 * i >= burn_in and (i - burn_in) % thin == 0 are retained; the best state is
 * the retained one with the largest log-likelihood.
 */
class GibbsSampler {
  public:
    GibbsSampler(DataMatrix y, ModelConfig cfg)
        : y_(std::move(y)), cfg_(std::move(cfg)), rng_(cfg_.seed) {
        cfg_.validate();
        y_.validate();
        state_ = initial_state(y_, cfg_, rng_);
    }

    /// Resume from a saved position.
    GibbsSampler(DataMatrix y, ModelConfig cfg, SamplerState state, Rng rng,
                 Trace trace)
        : y_(std::move(y)), cfg_(std::move(cfg)), rng_(std::move(rng)),
          state_(std::move(state)), trace_(std::move(trace)) {
        cfg_.validate();
        y_.validate();
        check_shapes(state_.factors);
        DIBPNMF_REQUIRE(state_.factors.V1.rows() == y_.rows() &&
                            state_.factors.V2.rows() == y_.cols(),
                        "GibbsSampler: state does not match data shape");
        DIBPNMF_REQUIRE(trace_.records.size() == state_.iteration,
                        "GibbsSampler: trace length differs from iteration");
    }

    bool done() const { return state_.iteration >= cfg_.max_iter; }

    const IterationRecord& step() {
        DIBPNMF_REQUIRE(!done(), "GibbsSampler: already finished");
        IterationRecord rec;
        rec.iteration = state_.iteration;
        if (cfg_.model == ModelKind::Gp)
            sweep_gp(rec);
        else
            sweep_paired(rec);

        const double ll = log_likelihood(y_, state_.factors, cfg_.epsilon);
        if (!std::isfinite(ll))
            throw SamplerAbort(rec.iteration, "V");
        rec.loglik = ll;
        rec.effective_k = dibp::effective_k(state_.factors.Z1, state_.factors.Z2);
        rec.retained = rec.iteration >= cfg_.burn_in &&
                       (rec.iteration - cfg_.burn_in) % cfg_.thin == 0;
        if (rec.retained) {
            if (cfg_.keep_samples)
                trace_.samples.push_back(state_.factors);
            if (!trace_.best_iteration || ll > trace_.best_loglik) {
                trace_.best_iteration = rec.iteration;
                trace_.best_loglik = ll;
                trace_.best_state = state_.factors;
            }
        }
        trace_.records.push_back(std::move(rec));
        ++state_.iteration;
        return trace_.records.back();
    }

    void run() {
        while (!done())
            step();
    }

    const DataMatrix& data() const noexcept { return y_; }
    const ModelConfig& config() const noexcept { return cfg_; }
    const SamplerState& state() const noexcept { return state_; }
    const Rng& rng() const noexcept { return rng_; }
    const Trace& trace() const noexcept { return trace_; }

  private:
    void check_finite(const Matrix& m, std::size_t it, const char* family) const {
        if (!m.allFinite())
            throw SamplerAbort(it, family);
    }

    static void check_finite(const std::vector<double>& v, std::size_t it,
                             const char* family) {
        for (double x : v)
            if (!std::isfinite(x))
                throw SamplerAbort(it, family);
    }

    void update_v(IterationRecord& rec) {
        FactorState& f = state_.factors;
        MoveStats vs = update_V(Side::First, f, y_, cfg_.tau1, cfg_.epsilon, rng_);
        const MoveStats v2 =
            update_V(Side::Second, f, y_, cfg_.tau2, cfg_.epsilon, rng_);
        vs.proposed += v2.proposed;
        vs.accepted += v2.accepted;
        rec.acc_v = vs.rate();
        check_finite(f.V1, rec.iteration, "V");
        check_finite(f.V2, rec.iteration, "V");
    }

    void sweep_paired(IterationRecord& rec) {
        auto& sticks = std::get<dibp::PairedStickState>(state_.sticks);
        FactorState& f = state_.factors;
        const std::size_t it = rec.iteration;

        const std::size_t acc = dibp::mh_sweep_sticks(sticks, f.Z1, f.Z2, rng_);
        rec.acc_sticks = static_cast<double>(acc) / static_cast<double>(sticks.size());
        check_finite(sticks.mu1, it, "sticks");
        check_finite(sticks.mu2, it, "sticks");

        update_Z(Side::First, f, y_, sticks.mu1, cfg_.epsilon, rng_);
        update_Z(Side::Second, f, y_, sticks.mu2, cfg_.epsilon, rng_);

        if (cfg_.model == ModelKind::BivariateBeta) {
            rec.acc_theta = update_theta_bb(sticks, cfg_.hp, cfg_.step, rng_);
            const auto& p = std::get<stats::BivariateBetaParams>(sticks.coupling);
            rec.theta = {p.a, p.b};
        } else {
            const CopulaMoves mv =
                update_theta_copula(sticks, cfg_.hp, cfg_.step, rng_);
            rec.acc_theta = mv.alpha;
            rec.acc_rho = mv.rho;
            const auto& p = std::get<stats::FgmParams>(sticks.coupling);
            rec.theta = {p.alpha1, p.alpha2, p.rho};
        }
        check_finite(rec.theta, it, "theta");

        update_v(rec);
        rec.mu1 = sticks.mu1;
        rec.mu2 = sticks.mu2;
    }

    void sweep_gp(IterationRecord& rec) {
        auto& gp = std::get<dibp::GpStickState>(state_.sticks);
        FactorState& f = state_.factors;
        const std::size_t it = rec.iteration;

        const dibp::ColumnCounts counts = dibp::column_counts(f.Z1, f.Z2);
        std::size_t acc = 0;
        for (std::size_t k = 0; k < gp.size(); ++k)
            acc += dibp::gp_update_mu(k, gp, counts, rng_);
        rec.acc_sticks = static_cast<double>(acc) / static_cast<double>(gp.size());
        check_finite(gp.mu, it, "mu");

        std::vector<double> g1(gp.size());
        std::vector<double> g2(gp.size());
        for (std::size_t k = 0; k < gp.size(); ++k) {
            g1[k] = dibp::gp_gamma(k, 0, gp);
            g2[k] = dibp::gp_gamma(k, 1, gp);
        }
        update_Z(Side::First, f, y_, g1, cfg_.epsilon, rng_);
        update_Z(Side::Second, f, y_, g2, cfg_.epsilon, rng_);

        for (std::size_t k = 0; k < gp.size(); ++k)
            dibp::gp_update_g(k, gp, rng_);
        for (const auto& gk : gp.g)
            if (!std::isfinite(gk[0]) || !std::isfinite(gk[1]))
                throw SamplerAbort(it, "g");

        dibp::gp_sweep_h(gp, f.Z1, f.Z2, rng_);
        check_finite(gp.h1, it, "h");
        check_finite(gp.h2, it, "h");

        rec.acc_theta = dibp::gp_update_s(gp, cfg_.step, rng_);
        rec.theta = {gp.kernel.s};
        check_finite(rec.theta, it, "s");

        update_v(rec);
        rec.mu1 = gp.mu;
        rec.mu2 = gp.mu;
    }

    DataMatrix y_;
    ModelConfig cfg_;
    Rng rng_;
    SamplerState state_;
    Trace trace_;
};

struct GibbsResult {
    FactorState best;
    Trace trace;
};

inline GibbsResult run_gibbs(const DataMatrix& y, const ModelConfig& cfg) {
    GibbsSampler s(y, cfg);
    s.run();
    return {s.trace().best_state, s.trace()};
}

/**
 * First iteration whose log-likelihood is within rel_tol of the final
 * level, the mean over the last tail_fraction of the chain. Measures how
 * fast a chain reaches its stationary level.
 */
inline std::size_t iterations_to_converge(const std::vector<double>& loglik,
                                          double rel_tol = 0.05,
                                          double tail_fraction = 0.1) {
    DIBPNMF_REQUIRE(!loglik.empty(), "iterations_to_converge: empty trace");
    const std::size_t n = loglik.size();
    const std::size_t tail = std::max<std::size_t>(
        1, static_cast<std::size_t>(tail_fraction * static_cast<double>(n)));
    double final_level = 0.0;
    for (std::size_t i = n - tail; i < n; ++i)
        final_level += loglik[i];
    final_level /= static_cast<double>(tail);
    const double band = rel_tol * std::fabs(final_level);
    for (std::size_t i = 0; i < n; ++i)
        if (std::fabs(loglik[i] - final_level) <= band)
            return i;
    return n;
}

} // namespace dibpnmf::factorization
