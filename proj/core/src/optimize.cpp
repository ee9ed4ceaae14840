#include "beamloc/optimize.hpp"

#include "beamloc/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>

namespace beamloc {

std::string_view to_string(Method method) {
    return method == Method::LBFGS ? "lbfgs" : "trust_region";
}

std::string_view to_string(Termination termination) {
    switch (termination) {
        case Termination::GradTol: return "grad_tol";
        case Termination::StepTol: return "step_tol";
        case Termination::MaxIter: return "max_iter";
        case Termination::Stalled: return "stalled";
        case Termination::Error: return "error";
    }
    return "unknown";
}

Method method_from_string(std::string_view name) {
    if (name == "lbfgs") return Method::LBFGS;
    if (name == "trust_region") return Method::TrustRegion;
    throw InvalidInputError(fmt::format("unknown optimizer method '{}' (expected lbfgs or trust_region)", name));
}

Eigen::VectorXd OptimizerConfig::lower_for(Eigen::Index n) const {
    return lower_bounds.size() > 0 ? lower_bounds : Eigen::VectorXd::Constant(n, lower);
}

Eigen::VectorXd OptimizerConfig::upper_for(Eigen::Index n) const {
    return upper_bounds.size() > 0 ? upper_bounds : Eigen::VectorXd::Constant(n, upper);
}

void OptimizerConfig::validate(Eigen::Index n) const {
    if (memory < 1) throw InvalidInputError("L-BFGS memory must be >= 1");
    if (max_iterations < 0) throw InvalidInputError("max_iterations must be >= 0");
    if (!(grad_tolerance > 0.0) || !(step_tolerance > 0.0)) throw InvalidInputError("tolerances must be positive");
    if (lower_bounds.size() > 0 && lower_bounds.size() != n) throw InvalidInputError("lower bounds size mismatch");
    if (upper_bounds.size() > 0 && upper_bounds.size() != n) throw InvalidInputError("upper bounds size mismatch");
    const Eigen::VectorXd lo = lower_for(n), hi = upper_for(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(lo[i] < hi[i])) throw InvalidInputError(fmt::format("bound {} is empty: [{}, {}]", i, lo[i], hi[i]));
    }
    if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
        throw InvalidInputError("Wolfe constants must satisfy 0 < c1 < c2 < 1");
    }
    if (!(trust_region.initial_radius > 0.0 && trust_region.initial_radius <= trust_region.max_radius)) {
        throw InvalidInputError("trust region radii must satisfy 0 < initial <= max");
    }
}

int RunTrace::iterations() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [](const IterationRecord& r) { return r.iteration > 0; }));
}

namespace detail {

Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const std::vector<CurvaturePair>& pairs) {
    Eigen::VectorXd q = g;
    const auto k = pairs.size();
    std::vector<double> alpha(k), rho(k);
    for (std::size_t i = k; i-- > 0;) {
        rho[i] = 1.0 / pairs[i].y.dot(pairs[i].s);
        alpha[i] = rho[i] * pairs[i].s.dot(q);
        q -= alpha[i] * pairs[i].y;
    }
    if (k > 0) q *= pairs.back().s.dot(pairs.back().y) / pairs.back().y.squaredNorm();
    for (std::size_t i = 0; i < k; ++i) {
        const double beta = rho[i] * pairs[i].y.dot(q);
        q += (alpha[i] - beta) * pairs[i].s;
    }
    return -q;
}

Eigen::MatrixXd lbfgs_matrix(const std::vector<CurvaturePair>& pairs, Eigen::Index n, double fallback_scale) {
    if (pairs.empty()) return fallback_scale * Eigen::MatrixXd::Identity(n, n);
    const auto& last = pairs.back();
    Eigen::MatrixXd b = (last.y.squaredNorm() / last.s.dot(last.y)) * Eigen::MatrixXd::Identity(n, n);
    for (const auto& p : pairs) {
        const Eigen::VectorXd bs = b * p.s;
        b -= bs * bs.transpose() / p.s.dot(bs);
        b += p.y * p.y.transpose() / p.y.dot(p.s);
    }
    return b;
}

Eigen::VectorXd dogleg_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& b, double radius) {
    const double gnorm = g.norm();
    if (gnorm == 0.0) return Eigen::VectorXd::Zero(g.size());
    const double gbg = g.dot(b * g);
    if (!(gbg > 0.0)) return -(radius / gnorm) * g;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(b);
    Eigen::VectorXd newton = -ldlt.solve(g);
    if (ldlt.info() == Eigen::Success && newton.allFinite() && newton.dot(g) < 0.0 && newton.norm() <= radius) {
        return newton;
    }
    const Eigen::VectorXd cauchy = -(g.squaredNorm() / gbg) * g;
    const double cnorm = cauchy.norm();
    if (cnorm >= radius || ldlt.info() != Eigen::Success || !newton.allFinite() || newton.dot(g) >= 0.0) {
        return -(radius / gnorm) * g;
    }
    // ||cauchy + t (newton - cauchy)|| = radius, t in [0, 1].
    const Eigen::VectorXd d = newton - cauchy;
    const double a = d.squaredNorm();
    const double bq = 2.0 * cauchy.dot(d);
    const double c = cnorm * cnorm - radius * radius;
    const double t = (-bq + std::sqrt(bq * bq - 4.0 * a * c)) / (2.0 * a);
    return cauchy + t * d;
}

}  // namespace detail

namespace {

using detail::CurvaturePair;

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi) {
    if (x.size() == 0) return 0.0;
    return (project(x - g, lo, hi) - x).cwiseAbs().maxCoeff();
}

// 1 for free variables, 0 for variables held at a bound by the gradient.
Eigen::VectorXd free_mask(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if ((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)) mask[i] = 0.0;
    }
    return mask;
}

class Evaluator {
public:
    explicit Evaluator(const ObjectiveFunction& f) : f_(f) {}

    // Returns false (and fills `error`) on exceptions or non-finite output.
    bool operator()(const Eigen::VectorXd& x, double& value, Eigen::VectorXd& grad, std::string& error) {
        ++count;
        grad.resize(x.size());
        try {
            value = f_(x, grad);
        } catch (const NumericError& e) {
            error = fmt::format("objective evaluation failed: {}", e.what());
            return false;
        }
        if (!std::isfinite(value) || !grad.allFinite()) {
            error = "objective returned a non-finite value or gradient";
            return false;
        }
        return true;
    }

    int count = 0;

private:
    const ObjectiveFunction& f_;
};

struct LineSearchResult {
    enum class Status { Ok, Failed, Error } status = Status::Failed;
    double alpha = 0.0;
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd grad;
    std::string error;
};

class ProjectedLineSearch {
public:
    ProjectedLineSearch(Evaluator& eval, const OptimizerConfig& cfg, const Eigen::VectorXd& x, double f0,
                        const Eigen::VectorXd& g0, const Eigen::VectorXd& d, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi)
        : eval_(eval), cfg_(cfg), x_(x), f0_(f0), g0_(g0), d_(d), lo_(lo), hi_(hi) {
        dphi0_ = g0.dot(d);
        alpha_max_ = 0.0;
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            if (d[i] > 0.0) alpha_max_ = std::max(alpha_max_, (hi[i] - x[i]) / d[i]);
            if (d[i] < 0.0) alpha_max_ = std::max(alpha_max_, (lo[i] - x[i]) / d[i]);
        }
    }

    LineSearchResult run(double alpha) {
        LineSearchResult best;
        Point prev;
        prev.value = f0_;
        prev.dphi = dphi0_;
        for (int i = 0; i < cfg_.max_line_search; ++i) {
            alpha = std::min(alpha, alpha_max_);
            Point cur;
            if (!probe(alpha, cur)) return error_result();
            if (!armijo(cur) || (i > 0 && cur.value >= prev.value)) return zoom(prev, cur, cfg_.max_line_search - i - 1);
            if (std::abs(cur.dphi) <= -cfg_.wolfe_c2 * dphi0_) return accept(cur);
            if (cur.dphi >= 0.0) return zoom(cur, prev, cfg_.max_line_search - i - 1);
            if (alpha >= alpha_max_) return accept(cur);  // every variable has hit its bound
            prev = cur;
            alpha *= 2.0;
        }
        return accept_best_or_fail();
    }

private:
    struct Point {
        double alpha = 0.0;
        double value = 0.0;
        double dphi = 0.0;
        Eigen::VectorXd x;
        Eigen::VectorXd grad;
    };

    bool probe(double alpha, Point& p) {
        p.alpha = alpha;
        p.x = project(x_ + alpha * d_, lo_, hi_);
        if (!eval_(p.x, p.value, p.grad, error_)) return false;
        Eigen::VectorXd dir = d_;
        for (Eigen::Index i = 0; i < dir.size(); ++i) {
            if ((d_[i] > 0.0 && p.x[i] >= hi_[i]) || (d_[i] < 0.0 && p.x[i] <= lo_[i])) dir[i] = 0.0;
        }
        p.dphi = p.grad.dot(dir);
        if (armijo(p) && (!have_best_ || p.value < best_.value)) {
            best_ = p;
            have_best_ = true;
        }
        return true;
    }

    bool armijo(const Point& p) const {
        return p.value <= f0_ + cfg_.wolfe_c1 * g0_.dot(p.x - x_) && p.value <= f0_;
    }

    LineSearchResult zoom(Point lo, Point hi, int budget) {
        for (int i = 0; i < budget; ++i) {
            const double width = hi.alpha - lo.alpha;
            // Quadratic interpolation from (lo.value, lo.dphi, hi.value), safeguarded.
            double alpha = lo.alpha;
            const double denom = 2.0 * (hi.value - lo.value - lo.dphi * width);
            if (denom != 0.0 && std::isfinite(denom)) alpha = lo.alpha - lo.dphi * width * width / denom;
            const double a = std::min(lo.alpha, hi.alpha), b = std::max(lo.alpha, hi.alpha);
            const double margin = 0.1 * (b - a);
            if (!(alpha > a + margin && alpha < b - margin)) alpha = 0.5 * (a + b);
            if (b - a < 1e-16 * std::max(1.0, b)) break;

            Point cur;
            if (!probe(alpha, cur)) return error_result();
            if (!armijo(cur) || cur.value >= lo.value) {
                hi = cur;
            } else {
                if (std::abs(cur.dphi) <= -cfg_.wolfe_c2 * dphi0_) return accept(cur);
                if (cur.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = cur;
            }
        }
        return accept_best_or_fail();
    }

    LineSearchResult accept(const Point& p) const {
        LineSearchResult r;
        r.status = LineSearchResult::Status::Ok;
        r.alpha = p.alpha;
        r.x = p.x;
        r.value = p.value;
        r.grad = p.grad;
        return r;
    }

    LineSearchResult accept_best_or_fail() const {
        if (have_best_ && best_.value < f0_) return accept(best_);
        return LineSearchResult{};
    }

    LineSearchResult error_result() const {
        LineSearchResult r;
        r.status = LineSearchResult::Status::Error;
        r.error = error_;
        return r;
    }

    Evaluator& eval_;
    const OptimizerConfig& cfg_;
    const Eigen::VectorXd& x_;
    double f0_;
    const Eigen::VectorXd& g0_;
    const Eigen::VectorXd& d_;
    const Eigen::VectorXd& lo_;
    const Eigen::VectorXd& hi_;
    double dphi0_ = 0.0;
    double alpha_max_ = 0.0;
    Point best_;
    bool have_best_ = false;
    std::string error_;
};

void push_pair(std::deque<CurvaturePair>& pairs, const Eigen::VectorXd& s, const Eigen::VectorXd& y, int memory) {
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) return;
    pairs.push_back({s, y});
    while (static_cast<int>(pairs.size()) > memory) pairs.pop_front();
}

std::vector<CurvaturePair> masked(const std::deque<CurvaturePair>& pairs, const Eigen::VectorXd& mask) {
    std::vector<CurvaturePair> out;
    for (const auto& p : pairs) {
        CurvaturePair q{p.s.cwiseProduct(mask), p.y.cwiseProduct(mask)};
        if (q.s.dot(q.y) > 1e-12 * q.s.norm() * q.y.norm()) out.push_back(std::move(q));
    }
    return out;
}

class Runner {
public:
    Runner(const ObjectiveFunction& f, const OptimizerConfig& cfg, Eigen::Index n)
        : eval_(f), cfg_(cfg), lo_(cfg.lower_for(n)), hi_(cfg.upper_for(n)) {}

    MinimizeResult run(const Eigen::VectorXd& x0) {
        x_ = project(x0, lo_, hi_);
        std::string error;
        if (!eval_(x_, f_, g_, error)) {
            out_.x = x_;
            out_.value = f_;
            out_.trace.termination = Termination::Error;
            out_.trace.message = error;
            out_.trace.evaluations = eval_.count;
            return out_;
        }
        record(0, 0.0, 0.0, true);
        if (cfg_.method == Method::LBFGS) {
            run_lbfgs();
        } else {
            run_trust_region();
        }
        out_.x = x_;
        out_.value = f_;
        out_.trace.evaluations = eval_.count;
        return out_;
    }

private:
    void record(int iteration, double step_norm, double step_length, bool accepted) {
        IterationRecord r;
        r.iteration = iteration;
        r.evaluation = eval_.count;
        r.x = x_;
        r.value = f_;
        r.grad_norm = projected_gradient_norm(x_, g_, lo_, hi_);
        r.step_norm = step_norm;
        r.step_length = step_length;
        r.accepted = accepted;
        out_.trace.records.push_back(std::move(r));
    }

    void finish(Termination t, std::string message) {
        out_.trace.termination = t;
        out_.trace.message = std::move(message);
    }

    bool converged() {
        const double pg = projected_gradient_norm(x_, g_, lo_, hi_);
        if (pg < cfg_.grad_tolerance) {
            finish(Termination::GradTol, fmt::format("projected gradient {:.3e} below tolerance", pg));
            return true;
        }
        return false;
    }

    // Returns true when the run should stop.
    bool after_accepted_step(double step_norm, double delta_f) {
        if (step_norm < cfg_.step_tolerance) {
            finish(Termination::StepTol, fmt::format("step {:.3e} below tolerance", step_norm));
            return true;
        }
        small_changes_ = std::abs(delta_f) < cfg_.stall_delta ? small_changes_ + 1 : 0;
        if (small_changes_ >= cfg_.stall_window) {
            finish(Termination::Stalled, fmt::format("objective change below {:.1e} for {} iterations",
                                                     cfg_.stall_delta, cfg_.stall_window));
            return true;
        }
        return false;
    }

    void run_lbfgs() {
        std::deque<CurvaturePair> pairs;
        int iteration = 0;
        int failures = 0;
        while (true) {
            if (converged()) return;
            if (iteration >= cfg_.max_iterations) {
                finish(Termination::MaxIter, fmt::format("reached {} iterations", cfg_.max_iterations));
                return;
            }
            const Eigen::VectorXd mask = free_mask(x_, g_, lo_, hi_);
            const Eigen::VectorXd gf = g_.cwiseProduct(mask);
            const auto active_pairs = masked(pairs, mask);
            Eigen::VectorXd d = detail::lbfgs_direction(gf, active_pairs).cwiseProduct(mask);
            bool fresh = active_pairs.empty();
            if (!(d.dot(g_) < 0.0)) {
                d = -gf;
                pairs.clear();
                fresh = true;
            }
            const double dmax = d.cwiseAbs().maxCoeff();
            const double alpha0 = fresh ? cfg_.initial_step / dmax : 1.0;

            ProjectedLineSearch search(eval_, cfg_, x_, f_, g_, d, lo_, hi_);
            const LineSearchResult ls = search.run(alpha0);
            if (ls.status == LineSearchResult::Status::Error) {
                finish(Termination::Error, ls.error);
                return;
            }
            if (ls.status == LineSearchResult::Status::Failed) {
                pairs.clear();
                if (++failures >= 2) {
                    finish(Termination::Stalled, "line search failed twice in a row");
                    return;
                }
                continue;
            }
            failures = 0;
            const Eigen::VectorXd s = ls.x - x_;
            push_pair(pairs, s, ls.grad - g_, cfg_.memory);
            const double delta_f = f_ - ls.value;
            x_ = ls.x;
            f_ = ls.value;
            g_ = ls.grad;
            const double step_norm = s.cwiseAbs().maxCoeff();
            record(++iteration, step_norm, ls.alpha, true);
            if (after_accepted_step(step_norm, delta_f)) return;
        }
    }

    void run_trust_region() {
        const auto& tr = cfg_.trust_region;
        std::deque<CurvaturePair> pairs;
        double radius = tr.initial_radius;
        int iteration = 0;
        while (true) {
            if (converged()) return;
            if (iteration >= cfg_.max_iterations) {
                finish(Termination::MaxIter, fmt::format("reached {} iterations", cfg_.max_iterations));
                return;
            }
            if (radius < 1e-14) {
                finish(Termination::Stalled, "trust radius collapsed");
                return;
            }
            const Eigen::VectorXd mask = free_mask(x_, g_, lo_, hi_);
            std::vector<Eigen::Index> free;
            for (Eigen::Index i = 0; i < mask.size(); ++i) {
                if (mask[i] > 0.0) free.push_back(i);
            }
            const auto nf = static_cast<Eigen::Index>(free.size());
            const Eigen::MatrixXd b_full =
                detail::lbfgs_matrix(std::vector<CurvaturePair>(pairs.begin(), pairs.end()), x_.size(),
                                     g_.cwiseProduct(mask).norm() / radius);
            Eigen::VectorXd gf(nf);
            Eigen::MatrixXd bf(nf, nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                gf[a] = g_[free[a]];
                for (Eigen::Index c = 0; c < nf; ++c) bf(a, c) = b_full(free[a], free[c]);
            }
            const Eigen::VectorXd pf = detail::dogleg_step(gf, bf, radius);
            Eigen::VectorXd p = Eigen::VectorXd::Zero(x_.size());
            for (Eigen::Index a = 0; a < nf; ++a) p[free[a]] = pf[a];

            const Eigen::VectorXd trial = project(x_ + p, lo_, hi_);
            const Eigen::VectorXd s = trial - x_;
            const double predicted = -(g_.dot(s) + 0.5 * s.dot(b_full * s));

            double ft = 0.0;
            Eigen::VectorXd gt;
            std::string error;
            if (!eval_(trial, ft, gt, error)) {
                finish(Termination::Error, error);
                return;
            }
            const double actual = f_ - ft;
            const double ratio = predicted > 0.0 ? actual / predicted : -1.0;

            const double snorm = s.norm();
            if (ratio < tr.shrink_below) {
                radius = tr.shrink_factor * std::min(radius, std::max(snorm, 1e-16));
            } else if (ratio > tr.expand_above && snorm >= 0.99 * radius) {
                radius = std::min(tr.expand_factor * radius, tr.max_radius);
            }

            ++iteration;
            if (ratio > tr.accept_ratio && ft < f_) {
                push_pair(pairs, s, gt - g_, cfg_.memory);
                const double delta_f = f_ - ft;
                x_ = trial;
                f_ = ft;
                g_ = gt;
                const double step_norm = s.cwiseAbs().maxCoeff();
                record(iteration, step_norm, radius, true);
                if (after_accepted_step(step_norm, delta_f)) return;
            } else {
                record(iteration, 0.0, radius, false);
            }
        }
    }

    Evaluator eval_;
    const OptimizerConfig& cfg_;
    Eigen::VectorXd lo_, hi_;
    Eigen::VectorXd x_, g_;
    double f_ = 0.0;
    int small_changes_ = 0;
    MinimizeResult out_;
};

}  // namespace

MinimizeResult minimize(const ObjectiveFunction& objective, const Eigen::VectorXd& x0, const OptimizerConfig& config) {
    config.validate(x0.size());
    const Eigen::VectorXd lo = config.lower_for(x0.size()), hi = config.upper_for(x0.size());
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
        if (x0[i] < lo[i] || x0[i] > hi[i]) {
            throw InvalidInputError(fmt::format("x0[{}] = {} outside [{}, {}]", i, x0[i], lo[i], hi[i]));
        }
    }
    Runner runner(objective, config, x0.size());
    return runner.run(x0);
}

}  // namespace beamloc
