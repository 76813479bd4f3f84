#include "fpplab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fpplab/bp.hpp"

namespace fpplab::theory {

namespace {

double solve_extinction(double lambda) {
    // The iteration p <- exp(-lambda(1-p)) from 0 climbs monotonically to the
    // smallest fixed point; polish with Newton afterwards.
    double p = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double next = std::exp(-lambda * (1.0 - p));
        if (std::fabs(next - p) < 1e-15) {
            p = next;
            break;
        }
        p = next;
    }
    for (int i = 0; i < 8; ++i) {
        const double e = std::exp(-lambda * (1.0 - p));
        const double g = p - e;
        const double dg = 1.0 - lambda * e;
        if (dg == 0.0) break;
        p -= g / dg;
    }
    return p;
}

double solve_conjugate(double lambda) {
    // mu e^{-mu} = lambda e^{-lambda} on (0,1); x e^{-x} is increasing there.
    const double target = lambda * std::exp(-lambda);
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid * std::exp(-mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    double mu = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        const double e = std::exp(-mu);
        const double g = mu * e - target;
        const double dg = e * (1.0 - mu);
        if (dg == 0.0) break;
        mu -= g / dg;
    }
    return mu;
}

double solve_theta(double lambda) {
    // Positive root of g(theta) = theta - lambda + lambda e^{-theta}; g dips
    // negative off 0 (g'(0) = 1 - lambda < 0) and recovers by 2*lambda.
    double lo = 1e-9, hi = 2.0 * lambda;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double g = mid - lambda + lambda * std::exp(-mid);
        if (g < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double th = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        const double e = std::exp(-th);
        const double g = th - lambda + lambda * e;
        const double dg = 1.0 - lambda * e;
        if (dg == 0.0) break;
        th -= g / dg;
    }
    return th;
}

}  // namespace

LimitConstants constants(double lambda) {
    if (!(lambda > 1.0)) throw std::domain_error("constants: lambda must be > 1");
    LimitConstants c;
    c.lambda = lambda;
    c.beta = lambda / (lambda - 1.0);
    c.gamma = 1.0 / (lambda - 1.0);
    c.p_lambda = solve_extinction(lambda);
    c.mu_lambda = solve_conjugate(lambda);
    c.theta_star = solve_theta(lambda);
    c.c_lambda = c.gamma + 2.0 / std::fabs(std::log(c.mu_lambda));
    c.d_lambda = c.c_lambda + 1.0;
    return c;
}

double PhiGrid::eval(double x) const {
    if (x <= 0.0) return 1.0;
    const double t1 = t[1];
    if (x <= t1) return 1.0 - implied_mean * x;
    if (x >= t.back()) return phi.back();
    const std::size_t g = t.size() - 1;
    const double h = (std::log(t.back()) - std::log(t1)) / static_cast<double>(g - 1);
    const double slot = (std::log(x) - std::log(t1)) / h + 1.0;
    const auto k = static_cast<std::size_t>(std::floor(slot));
    const std::size_t k2 = std::min(k + 1, g);
    const double frac = slot - static_cast<double>(k);
    return phi[k] * (1.0 - frac) + phi[k2] * frac;
}

PhiGrid solve_phi(double lambda, int grid_points, double t_max,
                  int max_iterations, double tol) {
    if (!(lambda > 1.0)) throw std::domain_error("solve_phi: lambda must be > 1");
    if (grid_points < 8 || !(t_max > 1.0))
        throw std::domain_error("solve_phi: grid too small");
    const double gamma = 1.0 / (lambda - 1.0);
    const double p = solve_extinction(lambda);
    const double t_min = 1e-4;
    const auto g = static_cast<std::size_t>(grid_points);
    const double h = (std::log(t_max) - std::log(t_min)) / static_cast<double>(g - 1);

    PhiGrid out;
    out.lambda = lambda;
    out.gamma = gamma;
    out.t.resize(g + 1);
    out.t[0] = 0.0;
    for (std::size_t k = 1; k <= g; ++k)
        out.t[k] = std::exp(std::log(t_min) + static_cast<double>(k - 1) * h);
    out.t[g] = t_max;

    std::vector<double> phi(g + 1);
    phi[0] = 1.0;
    for (std::size_t k = 1; k <= g; ++k) phi[k] = p + (1.0 - p) * std::exp(-out.t[k]);

    // Powers of the nodes used by the closed-form quadrature of
    // integral of (a + b u) u^{gamma-1} over each cell.
    std::vector<double> tg(g + 1), tg1(g + 1);
    for (std::size_t k = 0; k <= g; ++k) {
        tg[k] = k == 0 ? 0.0 : std::pow(out.t[k], gamma);
        tg1[k] = k == 0 ? 0.0 : std::pow(out.t[k], gamma + 1.0);
    }

    std::vector<double> mapped(g + 1), pinned(g + 1);
    auto apply_map = [&](const std::vector<double>& f, std::vector<double>& to) {
        to[0] = 1.0;
        double integral = 0.0;
        for (std::size_t k = 1; k <= g; ++k) {
            const double psi_k = 1.0 - f[k];
            if (k == 1) {
                // Linear through the origin on the first cell.
                integral += psi_k * tg[1] * out.t[1] / ((gamma + 1.0) * out.t[1]);
            } else {
                const double psi_km = 1.0 - f[k - 1];
                const double b = (psi_k - psi_km) / (out.t[k] - out.t[k - 1]);
                const double a = psi_km - b * out.t[k - 1];
                integral += a * (tg[k] - tg[k - 1]) / gamma +
                            b * (tg1[k] - tg1[k - 1]) / (gamma + 1.0);
            }
            to[k] = std::exp(-lambda * gamma * integral / tg[k]);
        }
    };
    auto pin_mean = [&](const std::vector<double>& f, std::vector<double>& to) {
        const double mean_hat = (1.0 - f[1]) / out.t[1];
        const double scale = lambda / mean_hat;  // evaluate f at scale * t
        const double shift = std::log(scale) / h;
        to[0] = 1.0;
        for (std::size_t k = 1; k <= g; ++k) {
            const double slot = static_cast<double>(k) + shift;
            if (slot <= 1.0) {
                to[k] = 1.0 - mean_hat * scale * out.t[k];
            } else if (slot >= static_cast<double>(g)) {
                to[k] = f[g];
            } else {
                const auto j = static_cast<std::size_t>(std::floor(slot));
                const double frac = slot - static_cast<double>(j);
                to[k] = f[j] * (1.0 - frac) + f[j + 1] * frac;
            }
        }
    };

    double step = 0.0;
    int used = 0;
    bool converged = false;
    for (int it = 1; it <= max_iterations; ++it) {
        apply_map(phi, mapped);
        pin_mean(mapped, pinned);
        step = 0.0;
        for (std::size_t k = 0; k <= g; ++k)
            step = std::max(step, std::fabs(pinned[k] - phi[k]));
        phi = pinned;
        used = it;
        if (step < tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "solve_phi: no convergence in " << max_iterations
            << " iterations; last step " << step;
        throw std::runtime_error(msg.str());
    }
    out.phi = phi;
    out.pinned_residual = step;
    out.iterations = used;
    out.implied_mean = (1.0 - phi[1]) / out.t[1];
    apply_map(phi, mapped);
    double raw = 0.0;
    for (std::size_t k = 0; k <= g; ++k)
        raw = std::max(raw, std::fabs(mapped[k] - phi[k]));
    out.raw_map_residual = raw;
    return out;
}

std::vector<double> recursion_resample(const std::vector<double>& population,
                                       double lambda, int rounds,
                                       rng::RngStream& stream) {
    if (population.empty())
        throw std::domain_error("recursion_resample: empty population");
    if (!(lambda > 1.0))
        throw std::domain_error("recursion_resample: lambda must be > 1");
    std::vector<double> cur = population;
    std::vector<double> next(cur.size());
    const double alpha = lambda - 1.0;
    for (int r = 0; r < rounds; ++r) {
        for (double& value : next) {
            const std::int64_t k = stream.poisson(lambda);
            double acc = 0.0;
            for (std::int64_t j = 0; j < k; ++j) {
                const double x = stream.exponential(1.0);
                const std::size_t pick = static_cast<std::size_t>(
                    stream.uniform_below(cur.size()));
                acc += std::exp(-alpha * x) * cur[pick];
            }
            value = acc;
        }
        std::swap(cur, next);
    }
    return cur;
}

double sample_limit_X(double lambda, std::int64_t m, rng::RngStream& stream) {
    if (!(lambda > 1.0)) throw std::domain_error("sample_limit_X: lambda must be > 1");
    const double gamma = 1.0 / (lambda - 1.0);
    const double w1 = bp::sample_W_lambda(lambda, m, stream);
    const double w2 = bp::sample_W_lambda(lambda, m, stream);
    const double e = stream.exponential(1.0);
    return gamma * (std::log(e) - std::log(gamma * w1) - std::log(gamma * w2));
}

double sample_dense_limit(rng::RngStream& stream) {
    return stream.gumbel() + stream.gumbel() - stream.gumbel();
}

DenseCenteringReport dense_centering_report(std::int64_t n, double lambda_n) {
    if (n < 2) throw std::domain_error("dense_centering_report: n must be >= 2");
    if (!(lambda_n > 1.0))
        throw std::domain_error("dense_centering_report: lambda_n must be > 1");
    DenseCenteringReport r;
    r.lambda_n = lambda_n;
    r.beta_n = lambda_n / (lambda_n - 1.0);
    r.discriminant = (r.beta_n - 1.0) * std::sqrt(std::log(static_cast<double>(n)));
    r.centering_replaceable = r.discriminant < 0.1;
    return r;
}

}  // namespace fpplab::theory
