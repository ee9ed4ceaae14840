#include "beamloc/evidence_fusion.hpp"

#include "beamloc/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

namespace beamloc {

namespace {

std::atomic<std::uint64_t> g_combinations{0};
std::atomic<double> g_max_mass_error{0.0};

void record_combination(double mass_error) {
    g_combinations.fetch_add(1, std::memory_order_relaxed);
    double seen = g_max_mass_error.load(std::memory_order_relaxed);
    while (mass_error > seen &&
           !g_max_mass_error.compare_exchange_weak(seen, mass_error, std::memory_order_relaxed)) {
    }
}

void require_nonnegative(const Eigen::VectorXd& d, const char* what) {
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!(d[i] >= 0.0) || !std::isfinite(d[i])) {
            throw InvalidInputError(fmt::format("{}[{}] must be finite and nonnegative, got {}", what, i, d[i]));
        }
    }
}

void validate_bpa(const Bpa& m, const char* name) {
    require_nonnegative(m.singletons, name);
    if (!(m.theta >= 0.0) || std::abs(m.total() - 1.0) > 1e-9) {
        throw InvalidInputError(fmt::format("{} is not a mass function (total {}, m(Theta) {})", name, m.total(),
                                            m.theta));
    }
}

}  // namespace

void IgnoranceWeights::validate() const {
    for (double w : {distribution, relative, rank, confidence}) {
        if (!(w > 0.0 && w < 1.0)) {
            throw InvalidInputError(fmt::format("ignorance weight {} outside (0, 1)", w));
        }
    }
    const double sum = distribution + relative + rank + confidence;
    if (std::abs(sum - 1.0) > 1e-12) {
        throw InvalidInputError(fmt::format("ignorance weights sum to {}, expected 1", sum));
    }
}

NormalizedIndices normalize_indices(const Eigen::VectorXd& d) {
    require_nonnegative(d, "D");
    NormalizedIndices out;
    if (d.size() == 0) return out;
    out.norm = d / (d.sum() + kIndexEpsilon);
    out.relative = d / (d.maxCoeff() + kIndexEpsilon);
    return out;
}

Concentration concentration(const Eigen::VectorXd& d_norm) {
    const auto n = d_norm.size();
    if (n < 2) throw InvalidInputError("entropy needs at least two elements");
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) acc += d_norm[k] * std::log(d_norm[k] + kIndexEpsilon);
    Concentration out;
    out.entropy = -acc / std::log(static_cast<double>(n));
    out.concentration = 1.0 - out.entropy;
    return out;
}

std::vector<int> damage_ranks(const Eigen::VectorXd& d) {
    std::vector<int> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] > d[b]; });
    std::vector<int> ranks(d.size());
    for (int r = 0; r < static_cast<int>(order.size()); ++r) ranks[order[r]] = r;
    return ranks;
}

IgnoranceComponents ignorance_components(const Eigen::VectorXd& d, const std::vector<int>& ranks,
                                         double lambda_f) {
    const auto n = d.size();
    if (n < 2) throw InvalidInputError("ignorance model needs at least two elements");
    if (static_cast<Eigen::Index>(ranks.size()) != n) throw InvalidInputError("one rank per element required");
    if (!(lambda_f > 0.0)) throw InvalidInputError("feature sensitivity lambda_f must be positive");

    const NormalizedIndices idx = normalize_indices(d);
    const Concentration conc = concentration(idx.norm);

    IgnoranceComponents out;
    out.distribution = Eigen::VectorXd::Constant(n, 1.0 - conc.concentration);
    out.relative_weakness = Eigen::VectorXd::Ones(n) - idx.relative;
    out.rank.resize(n);
    out.confidence.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (ranks[i] < 0 || ranks[i] >= n) throw InvalidInputError(fmt::format("rank {} out of range", ranks[i]));
        out.rank[i] = static_cast<double>(ranks[i]) / static_cast<double>(n - 1);
        const double sigma = 1.0 / (1.0 + std::exp(-lambda_f * d[i]));
        out.confidence[i] = 1.0 - sigma;
    }
    return out;
}

Eigen::VectorXd synthesize_alpha(const IgnoranceComponents& c, const IgnoranceWeights& w) {
    w.validate();
    const Eigen::VectorXd raw = w.distribution * c.distribution + w.relative * c.relative_weakness +
                                w.rank * c.rank + w.confidence * c.confidence;
    return raw.cwiseMax(kAlphaMin).cwiseMin(1.0);
}

Bpa Bpa::vacuous(int n) {
    return Bpa{Eigen::VectorXd::Zero(n), 1.0};
}

FeatureBpa build_bpa(const FeatureVector& feature, const IgnoranceWeights& weights, double lambda_f) {
    require_nonnegative(feature.values, "feature");
    const double peak = feature.values.size() > 0 ? feature.values.maxCoeff() : 0.0;
    const Eigen::VectorXd scaled = peak > 0.0 ? Eigen::VectorXd(feature.values / peak) : feature.values;

    FeatureBpa out;
    out.kind = feature.kind;
    out.sensitivity = lambda_f;
    const NormalizedIndices idx = normalize_indices(scaled);
    out.concentration = concentration(idx.norm);
    out.components = ignorance_components(scaled, damage_ranks(scaled), lambda_f);
    out.alpha = synthesize_alpha(out.components, weights);
    out.beta = Eigen::VectorXd::Ones(out.alpha.size()) - out.alpha;
    out.singleton_masses = out.beta.cwiseProduct(idx.norm);

    const double committed = out.singleton_masses.sum();
    if (committed > 1.0 + kMassTolerance) {
        throw NumericError(fmt::format("BPA commits {} > 1 to singletons", committed));
    }
    out.theta_mass = 1.0 - committed;
    return out;
}

int FusedEvidence::argmax() const {
    Eigen::Index idx = 0;
    belief.maxCoeff(&idx);
    return static_cast<int>(idx);
}

FusedEvidence dempster_combine(const Bpa& a, const Bpa& b) {
    if (a.size() != b.size()) {
        throw InvalidInputError(fmt::format("BPAs over different frames ({} vs {})", a.size(), b.size()));
    }
    validate_bpa(a, "first BPA");
    validate_bpa(b, "second BPA");

    // Singletons {i}, {j} conflict iff i != j; Theta never conflicts.
    const double agree = a.singletons.dot(b.singletons);
    const double conflict = a.singletons.sum() * b.singletons.sum() - agree;
    if (conflict >= 1.0 - kMassTolerance) {
        throw TotalConflictError(fmt::format("total conflict between sources (K = {})", conflict));
    }
    const double norm = 1.0 - conflict;

    FusedEvidence out;
    out.conflict = std::max(conflict, 0.0);
    out.singleton_masses = (a.singletons.cwiseProduct(b.singletons) + a.singletons * b.theta +
                            b.singletons * a.theta) / norm;
    out.theta_mass = a.theta * b.theta / norm;
    out.belief = out.singleton_masses;
    out.plausibility = out.singleton_masses.array() + out.theta_mass;

    const double error = std::abs(out.singleton_masses.sum() + out.theta_mass - 1.0);
    record_combination(error);
    if (error > kMassTolerance) {
        throw NumericError(fmt::format("Dempster combination lost mass conservation (error {})", error));
    }
    return out;
}

FusedEvidence fuse_features(const std::vector<FeatureBpa>& bpas) {
    if (bpas.size() < 2) throw InvalidInputError("fusion needs at least two feature BPAs");
    FusedEvidence acc = dempster_combine(bpas[0].bpa(), bpas[1].bpa());
    double retained = 1.0 - acc.conflict;
    for (std::size_t s = 2; s < bpas.size(); ++s) {
        acc = dempster_combine(acc.bpa(), bpas[s].bpa());
        retained *= 1.0 - acc.conflict;
    }
    acc.conflict = 1.0 - retained;
    return acc;
}

std::vector<int> filter_candidates(const FusedEvidence& fused, double tau_fraction, int fallback_top_n) {
    if (!(tau_fraction > 0.0 && tau_fraction <= 1.0)) {
        throw InvalidInputError(fmt::format("tau fraction {} outside (0, 1]", tau_fraction));
    }
    const int n = fused.size();
    if (n == 0) return {};
    const int top = fused.argmax();
    const double threshold = tau_fraction * fused.belief[top];

    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
        if (fused.belief[i] >= threshold || i == top) out.push_back(i);
    }
    if (out.size() == 1 && fallback_top_n > 1) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return fused.belief[a] > fused.belief[b]; });
        order.resize(std::min(fallback_top_n, n));
        std::sort(order.begin(), order.end());
        return order;
    }
    return out;
}

FusionAudit fusion_audit() {
    return FusionAudit{g_combinations.load(), g_max_mass_error.load()};
}

}  // namespace beamloc
