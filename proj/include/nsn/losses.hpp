#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "nsn/embedding.hpp"
#include "nsn/error.hpp"

namespace nsn {

enum class LossVariant { nce_in, nce_out, byol };

struct LossConfig {
    double temperature = 0.2;  // tau
    double alpha = 0.0;
    LossVariant variant = LossVariant::nce_in;

    void validate() const {
        require(temperature > 0.0, Errc::invalid_argument, "temperature must be > 0");
        require(alpha >= 0.0, Errc::invalid_argument, "alpha must be >= 0");
    }
};

// One query with its positive view, optional non-semantic negative, standard
// negatives, and optional weighted extra negatives for the BYOL variants.
struct ContrastiveBatch {
    Embedding z_i;
    Embedding z_p;
    std::optional<Embedding> z_ns;
    std::vector<Embedding> negatives;
    std::vector<std::pair<Embedding, double>> extra_byol_negatives;

    void validate() const {
        const std::size_t d = z_i.dim();
        require(z_p.dim() == d, Errc::dim_mismatch, "z_p dim differs from z_i");
        if (z_ns) require(z_ns->dim() == d, Errc::dim_mismatch, "z_ns dim differs from z_i");
        for (const auto& n : negatives)
            require(n.dim() == d, Errc::dim_mismatch, "negative dim differs from z_i");
        for (const auto& [e, w] : extra_byol_negatives)
            require(e.dim() == d, Errc::dim_mismatch, "extra negative dim differs from z_i");
    }
};

// Per-role analytic gradients of one loss evaluation. d_z_ns is empty when the
// batch has no non-semantic negative.
struct BatchGradients {
    std::vector<double> d_z_i;
    std::vector<double> d_z_p;
    std::vector<double> d_z_ns;
    std::vector<std::vector<double>> d_negatives;
    std::vector<std::vector<double>> d_extra;
};

namespace detail {

inline void check_ns(const ContrastiveBatch& batch, const LossConfig& cfg) {
    require(batch.z_ns.has_value() || cfg.alpha == 0.0, Errc::missing_non_semantic,
            "alpha > 0 requires a non-semantic negative in the batch");
}

// Shared NCE evaluation over a raw (not necessarily unit-norm) query vector
// q. The two variants differ only in where alpha enters:
//   in-exponent:   exp(alpha * q.z_ns / tau) with coefficient 1
//   out-of-exponent: coefficient alpha on exp(q.z_ns / tau)
// Both are evaluated through one max-subtracted log-sum-exp. `grads`, when
// non-null, receives the per-role analytic gradients.
inline double nce_eval(const std::vector<double>& q, const ContrastiveBatch& batch,
                       const LossConfig& cfg, bool alpha_in_exponent, BatchGradients* grads) {
    cfg.validate();
    batch.validate();
    check_ns(batch, cfg);
    require(q.size() == batch.z_p.dim(), Errc::dim_mismatch, "query dim differs from batch");
    const double tau = cfg.temperature;
    const double alpha = cfg.alpha;
    const std::size_t dim = q.size();

    const double logit_p = dot(q, batch.z_p.values()) / tau;
    // has_ns: the non-semantic term participates in the denominator. For the
    // in-exponent variant its exponential is exp(alpha*s/tau) even at alpha=0
    // (value 1); for the out-of-exponent variant alpha=0 removes the term.
    const bool has_ns = batch.z_ns.has_value() && (alpha_in_exponent || alpha > 0.0);
    double s_ns = 0.0, logit_ns = 0.0, coeff_ns = 0.0;
    if (has_ns) {
        s_ns = dot(q, batch.z_ns->values()) / tau;
        logit_ns = alpha_in_exponent ? alpha * s_ns : s_ns;
        coeff_ns = alpha_in_exponent ? 1.0 : alpha;
    }
    std::vector<double> logit_n(batch.negatives.size());
    for (std::size_t n = 0; n < batch.negatives.size(); ++n)
        logit_n[n] = dot(q, batch.negatives[n].values()) / tau;

    double m = logit_p;
    if (has_ns) m = std::max(m, logit_ns);
    for (double l : logit_n) m = std::max(m, l);

    const double e_p = std::exp(logit_p - m);
    const double e_ns = has_ns ? std::exp(logit_ns - m) : 0.0;
    double denom = e_p + coeff_ns * e_ns;
    std::vector<double> e_n(logit_n.size());
    for (std::size_t n = 0; n < logit_n.size(); ++n) {
        e_n[n] = std::exp(logit_n[n] - m);
        denom += e_n[n];
    }
    const double loss = -logit_p + m + std::log(denom);

    if (grads) {
        // Softmax responsibilities; in both variants the z_ns-sourced query
        // gradient carries an extra factor alpha from the chain rule.
        const double p_p = e_p / denom;
        const double c_ns = alpha * e_ns / denom;  // 0 when ns absent or alpha=0
        grads->d_z_i.assign(dim, 0.0);
        grads->d_z_p.assign(dim, 0.0);
        grads->d_z_ns.clear();
        if (batch.z_ns) grads->d_z_ns.assign(dim, 0.0);
        grads->d_negatives.assign(batch.negatives.size(), std::vector<double>(dim, 0.0));
        grads->d_extra.clear();
        for (std::size_t k = 0; k < dim; ++k) {
            double g = (p_p - 1.0) * batch.z_p[k];
            if (has_ns) g += c_ns * (*batch.z_ns)[k];
            for (std::size_t n = 0; n < batch.negatives.size(); ++n)
                g += (e_n[n] / denom) * batch.negatives[n][k];
            grads->d_z_i[k] = g / tau;
            grads->d_z_p[k] = (p_p - 1.0) * q[k] / tau;
            if (batch.z_ns) grads->d_z_ns[k] = c_ns * q[k] / tau;
            for (std::size_t n = 0; n < batch.negatives.size(); ++n)
                grads->d_negatives[n][k] = (e_n[n] / denom) * q[k] / tau;
        }
    }
    return loss;
}

inline double byol_eval(const std::vector<double>& q, const ContrastiveBatch& batch,
                        const LossConfig& cfg, BatchGradients* grads) {
    cfg.validate();
    batch.validate();
    check_ns(batch, cfg);
    require(q.size() == batch.z_p.dim(), Errc::dim_mismatch, "query dim differs from batch");
    const double alpha = cfg.alpha;
    const std::size_t dim = q.size();

    double loss = 2.0 - 2.0 * alpha - 2.0 * dot(q, batch.z_p.values());
    if (batch.z_ns && alpha > 0.0) loss += 2.0 * alpha * dot(q, batch.z_ns->values());
    for (const auto& [e, w] : batch.extra_byol_negatives)
        loss += w * (2.0 * dot(q, e.values()) - 2.0);

    if (grads) {
        grads->d_z_i.assign(dim, 0.0);
        grads->d_z_p.assign(dim, 0.0);
        grads->d_z_ns.clear();
        if (batch.z_ns) grads->d_z_ns.assign(dim, 0.0);
        // The objective does not involve standard negatives; keep the shape
        // contract d_negatives[n].size() == dim with zero gradients.
        grads->d_negatives.assign(batch.negatives.size(), std::vector<double>(dim, 0.0));
        grads->d_extra.assign(batch.extra_byol_negatives.size(), std::vector<double>(dim, 0.0));
        for (std::size_t k = 0; k < dim; ++k) {
            double g = -2.0 * batch.z_p[k];
            if (batch.z_ns) g += 2.0 * alpha * (*batch.z_ns)[k];
            for (const auto& [e, w] : batch.extra_byol_negatives) g += 2.0 * w * e[k];
            grads->d_z_i[k] = g;
            grads->d_z_p[k] = -2.0 * q[k];
            if (batch.z_ns) grads->d_z_ns[k] = 2.0 * alpha * q[k];
            for (std::size_t x = 0; x < batch.extra_byol_negatives.size(); ++x)
                grads->d_extra[x][k] = 2.0 * batch.extra_byol_negatives[x].second * q[k];
        }
    }
    return loss;
}

inline double loss_eval_raw(const std::vector<double>& q, const ContrastiveBatch& batch,
                            const LossConfig& cfg, BatchGradients* grads) {
    switch (cfg.variant) {
        case LossVariant::nce_in:
            return nce_eval(q, batch, cfg, /*alpha_in_exponent=*/true, grads);
        case LossVariant::nce_out:
            return nce_eval(q, batch, cfg, /*alpha_in_exponent=*/false, grads);
        case LossVariant::byol:
            return byol_eval(q, batch, cfg, grads);
    }
    raise(Errc::invalid_argument, "unknown loss variant");
}

}  // namespace detail

// -log[ e^{zi.zp/tau} / (e^{zi.zp/tau} + e^{alpha zi.zns/tau} + sum_n e^{zi.zn/tau}) ]
inline double nce_in_loss(const ContrastiveBatch& batch, const LossConfig& cfg) {
    return detail::nce_eval(batch.z_i.values(), batch, cfg, true, nullptr);
}

// Same denominator but with alpha multiplying the non-semantic exponential:
// alpha * e^{zi.zns/tau}.
inline double nce_out_loss(const ContrastiveBatch& batch, const LossConfig& cfg) {
    return detail::nce_eval(batch.z_i.values(), batch, cfg, false, nullptr);
}

// Closed squared-distance form: 2 - 2 alpha - 2 zi.zp + 2 alpha zi.zns, plus
// w*(2 zi.ze - 2) per weighted extra negative.
inline double byol_ns_loss(const ContrastiveBatch& batch, const LossConfig& cfg) {
    return detail::byol_eval(batch.z_i.values(), batch, cfg, nullptr);
}

inline double loss_value(const ContrastiveBatch& batch, const LossConfig& cfg) {
    return detail::loss_eval_raw(batch.z_i.values(), batch, cfg, nullptr);
}

// Analytic dL/dz_i for the configured variant, treating z_i as a free vector
// (no unit-sphere projection — that belongs to the optimizer).
inline std::vector<double> grad_wrt_query(const ContrastiveBatch& batch, const LossConfig& cfg) {
    BatchGradients g;
    detail::loss_eval_raw(batch.z_i.values(), batch, cfg, &g);
    return std::move(g.d_z_i);
}

// Analytic gradients with respect to every embedding in the batch; used to
// backpropagate through an encoder that produced all of them.
inline BatchGradients grad_wrt_batch(const ContrastiveBatch& batch, const LossConfig& cfg) {
    BatchGradients g;
    detail::loss_eval_raw(batch.z_i.values(), batch, cfg, &g);
    return g;
}

// Central differences (L(z_i + h e_k) - L(z_i - h e_k)) / 2h per coordinate.
// The perturbed query is NOT renormalized, matching grad_wrt_query's
// free-vector convention.
inline std::vector<double> finite_diff_grad(const ContrastiveBatch& batch, const LossConfig& cfg,
                                            double h) {
    require(h > 0.0, Errc::invalid_argument, "finite-difference step must be > 0");
    std::vector<double> q = batch.z_i.values();
    std::vector<double> grad(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double saved = q[k];
        q[k] = saved + h;
        const double up = detail::loss_eval_raw(q, batch, cfg, nullptr);
        q[k] = saved - h;
        const double down = detail::loss_eval_raw(q, batch, cfg, nullptr);
        q[k] = saved;
        grad[k] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace nsn
