#include "silab/signals.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace silab {

namespace {

constexpr double kCertTolerance = 1.02;

// ==== polynomial helpers for the bump shapes ==============================

double poly_eval(const std::vector<double>& c, double u) {
    double acc = 0.0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * u + c[i];
    return acc;
}

std::vector<double> poly_derive(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * double(i);
    return d;
}

// coefficients of (1 - 4 u^2)^k
std::vector<double> bump_poly(int k) {
    std::vector<double> c{1.0};
    for (int rep = 0; rep < k; ++rep) {
        std::vector<double> next(c.size() + 2, 0.0);
        for (size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 2] -= 4.0 * c[i];
        }
        c = std::move(next);
    }
    return c;
}

// max |p| over [-1/2, 1/2]; the polynomials here are even or odd, so the
// scan runs over [0, 1/2] with a golden-section polish around the best cell
double poly_max_abs(const std::vector<double>& c) {
    const int n = 4000;
    double best = 0.0, bu = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = 0.5 * i / n;
        const double v = std::fabs(poly_eval(c, u));
        if (v > best) {
            best = v;
            bu = u;
        }
    }
    double a = std::max(0.0, bu - 0.5 / n);
    double b = std::min(0.5, bu + 0.5 / n);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = std::fabs(poly_eval(c, x1)), f2 = std::fabs(poly_eval(c, x2));
    for (int it = 0; it < 120; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = std::fabs(poly_eval(c, x2));
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = std::fabs(poly_eval(c, x1));
        }
    }
    return std::max(best, std::max(f1, f2));
}

// Hoelder constant of a shape from its derivative maxima D[0..m+1]:
//   C = max(D_0, ..., D_m, (2 D_m)^(1-g) D_{m+1}^g),  g = beta - m,
// using min(2 D_m, D_{m+1} h) <= (2 D_m)^(1-g) (D_{m+1})^g h^g.
double ladder_constant(const std::vector<double>& D, double beta) {
    const int m = hoelder_order(beta);
    const double g = beta - double(m);
    double c = 0.0;
    for (int j = 0; j <= m; ++j) c = std::max(c, D[size_t(j)]);
    const double semi = (g == 1.0) ? D[size_t(m + 1)]
                                   : std::pow(2.0 * D[size_t(m)], 1.0 - g) *
                                         std::pow(D[size_t(m + 1)], g);
    return std::max(c, semi);
}

// ==== finite-difference machinery =========================================

long binom(int n, int k) {
    long v = 1;
    for (int j = 1; j <= k; ++j) v = v * (n - j + 1) / j;
    return v;
}

// order-k forward difference at lag h
double forward_diff(const Link& f, int k, double t, double h) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
        const double c = double(binom(k, j)) * (((k - j) % 2 == 0) ? 1.0 : -1.0);
        acc += c * f(t + double(j) * h);
    }
    return acc;
}

// central-difference estimate of f^(j) at t, j = 1..3
double central_deriv(const Link& f, int j, double t, double d) {
    switch (j) {
        case 1:
            return (f(t + d) - f(t - d)) / (2.0 * d);
        case 2:
            return (f(t + d) - 2.0 * f(t) + f(t - d)) / (d * d);
        case 3:
            return (f(t + 2.0 * d) - 2.0 * f(t + d) + 2.0 * f(t - d) - f(t - 2.0 * d)) /
                   (2.0 * d * d * d);
        default:
            throw guard_error("smoothness certification supports beta <= 4");
    }
}

std::vector<double> lag_ladder(double lo, double hi, int grid_n) {
    const double step = (hi - lo) / double(grid_n);
    std::vector<double> lags;
    for (double h = (hi - lo) / 8.0; h >= 8.0 * step * (1.0 - 1e-12); h *= 0.5)
        lags.push_back(h);
    return lags;
}

void check_cert_args(double beta, double L, double lo, double hi, int grid_n) {
    require(beta > 0.0, "certification requires beta > 0");
    require(beta <= 4.0, "smoothness certification supports beta <= 4");
    require(L >= 0.0, "certification requires L >= 0");
    require(hi > lo, "certification range is empty");
    require(grid_n >= 64, "certification grid too coarse");
}

}  // namespace

int hoelder_order(double beta) {
    require(beta > 0.0, "smoothness index must be positive");
    return int(std::ceil(beta)) - 1;
}

void NikolskiiSpec::validate() const {
    require(beta > 0.0 && L > 0.0, "nikolskii class requires beta > 0 and L > 0");
    require(p > 1.0, "nikolskii class requires p > 1");
    require(beta * p > 1.0, "nikolskii class requires beta * p > 1");
}

CertificationReport verify_hoelder(const Link& f, double beta, double L, double lo,
                                   double hi, int grid_n) {
    check_cert_args(beta, L, lo, hi, grid_n);
    require(static_cast<bool>(f), "cannot certify an empty link");
    const int m = hoelder_order(beta);
    const double step = (hi - lo) / double(grid_n);
    const double d = (hi - lo) * 1e-4;

    double measured = 0.0;
    // derivative-size conditions: sup |f^(j)| <= L for j = 0..m
    for (int i = 0; i <= grid_n; ++i) {
        const double t = lo + double(i) * step;
        measured = std::max(measured, std::fabs(f(t)));
        for (int j = 1; j <= m; ++j)
            measured = std::max(measured, std::fabs(central_deriv(f, j, t, d)));
    }
    // seminorm: sup |D^(m+1)_h f| / h^beta over the lag ladder
    for (const double h : lag_ladder(lo, hi, grid_n)) {
        const double scale = std::pow(h, beta);
        for (int i = 0; i <= grid_n; ++i) {
            const double t = lo + double(i) * step;
            measured = std::max(measured, std::fabs(forward_diff(f, m + 1, t, h)) / scale);
        }
    }
    CertificationReport rep;
    rep.measured = measured;
    rep.bound = kCertTolerance * L;
    rep.ok = measured <= rep.bound;
    return rep;
}

CertificationReport verify_nikolskii(const Link& f, double beta, double L, double p,
                                     double lo, double hi, int grid_n) {
    check_cert_args(beta, L, lo, hi, grid_n);
    require(static_cast<bool>(f), "cannot certify an empty link");
    require(p >= 1.0, "integrability index must satisfy p >= 1");
    const int m = hoelder_order(beta);
    const double step = (hi - lo) / double(grid_n);
    const double d = (hi - lo) * 1e-4;

    double measured = 0.0;
    // |f^(j)|_p <= L for j = 1..m, midpoint rule
    for (int j = 1; j <= m; ++j) {
        double acc = 0.0;
        for (int i = 0; i < grid_n; ++i) {
            const double t = lo + (double(i) + 0.5) * step;
            acc += std::pow(std::fabs(central_deriv(f, j, t, d)), p);
        }
        measured = std::max(measured, std::pow(step * acc, 1.0 / p));
    }
    // seminorm: |D^(m+1)_h f|_p / h^beta over the lag ladder
    for (const double h : lag_ladder(lo, hi, grid_n)) {
        double acc = 0.0;
        for (int i = 0; i < grid_n; ++i) {
            const double t = lo + (double(i) + 0.5) * step;
            acc += std::pow(std::fabs(forward_diff(f, m + 1, t, h)), p);
        }
        measured = std::max(measured, std::pow(step * acc, 1.0 / p) / std::pow(h, beta));
    }
    CertificationReport rep;
    rep.measured = measured;
    rep.bound = kCertTolerance * L;
    rep.ok = measured <= rep.bound;
    return rep;
}

CertificationReport verify_nikolskii(const Link& f, const NikolskiiSpec& spec, double lo,
                                     double hi, int grid_n) {
    spec.validate();
    return verify_nikolskii(f, spec.beta, spec.L, spec.p, lo, hi, grid_n);
}

// ==== link generators =====================================================

Link make_hoelder(const HoelderSpec& spec) {
    require(spec.beta > 0.0, "link spec requires beta > 0");
    require(spec.beta <= 4.0, "link generation supports beta <= 4");
    require(spec.L >= 0.0, "link spec requires L >= 0");
    if (spec.L == 0.0) return [](double) { return 0.0; };

    const double beta = spec.beta, L = spec.L, c = spec.center;
    Link f;
    switch (spec.shape) {
        case LinkShape::cusp: {
            require(beta <= 1.0, "cusp shape requires beta <= 1");
            // |t|^beta has constant 1; the Gaussian taper adds at most
            // max_t 2 t^(beta+1) e^(-t^2) < 1, so the constant stays below L
            f = [beta, L, c](double u) {
                const double t = u - c;
                return 0.5 * L * std::pow(std::fabs(t), beta) * std::exp(-t * t);
            };
            break;
        }
        case LinkShape::sine: {
            // |f^(j)| = (L/2) w^(j-beta) <= L/2 and the order-(m+1)
            // difference of sin picks up at most 2 (w h)^(beta-m) w^m
            const double w = 3.0;
            const double amp = 0.5 * L * std::pow(w, -beta);
            f = [w, amp, c](double u) { return amp * std::sin(w * (u - c)); };
            break;
        }
        case LinkShape::bump: {
            const int k = hoelder_order(beta) + 2;
            std::vector<std::vector<double>> derivs{bump_poly(k)};
            for (int j = 0; j <= hoelder_order(beta); ++j)
                derivs.push_back(poly_derive(derivs.back()));
            std::vector<double> D;
            D.reserve(derivs.size());
            for (const auto& poly : derivs) D.push_back(poly_max_abs(poly));
            const double scale = 0.95 * L / ladder_constant(D, beta);
            auto poly = derivs.front();
            f = [scale, poly, c](double u) {
                const double v = u - c;
                if (std::fabs(v) >= 0.5) return 0.0;
                return scale * poly_eval(poly, v);
            };
            break;
        }
    }
    const auto rep = verify_hoelder(f, beta, L, c - 2.0, c + 2.0);
    if (!rep.ok)
        throw guard_error("link certification failure: measured constant " +
                          std::to_string(rep.measured) + " exceeds " +
                          std::to_string(rep.bound));
    return f;
}

Link make_inhomogeneous(double flat_scale, const HoelderSpec& bump, double width) {
    require(bump.beta > 0.0 && bump.beta <= 1.0,
            "inhomogeneous peak requires beta in (0, 1]");
    require(bump.L >= 0.0, "link spec requires L >= 0");
    require(width > 0.0, "peak width must be positive");
    const double beta = bump.beta, L = bump.L, c = bump.center, w = width;

    Link f = [flat_scale, beta, L, c, w](double u) {
        const double t = std::fabs(u - c) / w;
        if (t >= 1.0) return flat_scale;
        const double q = 1.0 - t * t;
        return flat_scale + 0.5 * L * std::pow(w, beta) * (1.0 - std::pow(t, beta)) * q * q;
    };
    if (L == 0.0) return f;

    // the certification grid must resolve the peak
    const int grid_n = std::max(4096, std::min(1 << 18, int(std::ceil(1024.0 / w))));
    const auto rep = verify_hoelder(f, beta, L, c - 2.0, c + 2.0, grid_n);
    if (!rep.ok)
        throw guard_error("link certification failure: measured constant " +
                          std::to_string(rep.measured) + " exceeds " +
                          std::to_string(rep.bound));
    return f;
}

// ==== single-index fields =================================================

SingleIndexSignal single_index_field(Link link, Vec2 theta0) {
    require(static_cast<bool>(link), "single-index field needs a link");
    require(std::fabs(theta0.norm() - 1.0) < 1e-9, "direction must be unit length");
    // sup of |link| over the widest projection range any lab grid produces
    double m = 0.0;
    const int n = 8192;
    for (int i = 0; i <= n; ++i) {
        const double u = -2.0 + 4.0 * double(i) / n;
        m = std::max(m, std::fabs(link(u)));
    }
    return SingleIndexSignal{std::move(link), theta0, m};
}

namespace {

double parse_number(const std::string& key, const std::string& val) {
    size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(val, &pos);
    } catch (...) {
        pos = 0;
    }
    if (pos != val.size() || val.empty())
        throw guard_error("signal preset: bad numeric value for '" + key + "': '" + val + "'");
    return x;
}

}  // namespace

SingleIndexSignal parse_signal_preset(const std::string& text) {
    std::string shape = text, rest;
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        shape = text.substr(0, colon);
        rest = text.substr(colon + 1);
    }
    std::vector<std::pair<std::string, std::string>> kv;
    size_t pos = 0;
    while (pos < rest.size()) {
        const auto comma = rest.find(',', pos);
        const std::string item =
            rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        pos = comma == std::string::npos ? rest.size() : comma + 1;
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw guard_error("signal preset: expected key=value, got '" + item + "'");
        kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    auto take = [&kv](const std::string& key, double def, bool* found = nullptr) {
        for (auto it = kv.begin(); it != kv.end(); ++it) {
            if (it->first == key) {
                const double v = parse_number(key, it->second);
                kv.erase(it);
                if (found) *found = true;
                return v;
            }
        }
        if (found) *found = false;
        return def;
    };

    double theta = 0.0;
    for (auto it = kv.begin(); it != kv.end(); ++it) {
        if (it->first == "theta") {
            std::string v = it->second;
            double scale = 1.0;
            if (v.size() > 3 && v.compare(v.size() - 3, 3, "deg") == 0) {
                scale = std::acos(-1.0) / 180.0;
                v = v.substr(0, v.size() - 3);
            }
            theta = parse_number("theta", v) * scale;
            kv.erase(it);
            break;
        }
    }

    Link link;
    if (shape == "zero") {
        link = [](double) { return 0.0; };
    } else if (shape == "const") {
        bool got = false;
        const double v = take("value", 0.0, &got);
        require(got, "signal preset: const needs value=...");
        link = [v](double) { return v; };
    } else if (shape == "cusp" || shape == "bump" || shape == "sine") {
        HoelderSpec spec;
        spec.beta = take("beta", 1.0);
        spec.L = take("L", 1.0);
        spec.center = take("center", 0.0);
        spec.shape = shape == "cusp"   ? LinkShape::cusp
                     : shape == "bump" ? LinkShape::bump
                                       : LinkShape::sine;
        link = make_hoelder(spec);
    } else if (shape == "inhomog") {
        HoelderSpec spec;
        spec.beta = take("beta", 0.5);
        spec.L = take("L", 1.0);
        spec.center = take("center", 0.5);
        spec.shape = LinkShape::cusp;
        const double w = take("w", 0.25);
        const double flat = take("flat", 0.0);
        link = make_inhomogeneous(flat, spec, w);
    } else {
        throw guard_error("signal preset: unknown shape '" + shape +
                          "' (cusp|bump|sine|inhomog|const|zero)");
    }
    if (!kv.empty())
        throw guard_error("signal preset: unknown parameter '" + kv.front().first + "'");
    return single_index_field(std::move(link), Vec2{std::cos(theta), std::sin(theta)});
}

// ==== lower-bound hypothesis family =======================================

FamilyBump default_family_bump(double beta) {
    require(beta > 0.0 && beta <= 2.0, "default family bump covers beta in (0, 2]");
    // shape (1 - 4v^2)^2: D0 = 1, D1 = 16/(3 sqrt 3) at v = 1/(2 sqrt 3),
    // D2 = 32 at v = 1/2; closed forms keep the scale and norms exact
    const double D0 = 1.0;
    const double D1 = 16.0 / (3.0 * std::sqrt(3.0));
    const double D2 = 32.0;
    const double kappa = 1.0 / ladder_constant({D0, D1, D2}, beta);
    Link f = [kappa](double v) {
        if (std::fabs(v) >= 0.5) return 0.0;
        const double q = 1.0 - 4.0 * v * v;
        return kappa * q * q;
    };
    // unscaled |.|_2^2 = 128/315
    return FamilyBump{std::move(f), kappa, kappa * kappa * 128.0 / 315.0};
}

double HypothesisFamily::field(int i, Vec2 t) const {
    require(i >= 0 && i <= N, "hypothesis index out of range");
    if (i == 0) return 0.0;
    const Vec2 th = directions[size_t(i - 1)];
    return L * std::pow(h, beta) * g.f(th.dot(t - x) / h);
}

HypothesisFamily hypothesis_family(double beta, double L, double epsilon, double b,
                                   Vec2 x, const FamilyBump& g, int d) {
    require(beta > 0.0 && L > 0.0, "family requires beta > 0 and L > 0");
    require(epsilon > 0.0 && epsilon <= std::exp(-1.0),
            "family requires epsilon in (0, 1/e]");
    require(b > 0.0 && b < 2.0 / (2.0 * beta + 1.0),
            "family exponent must satisfy 0 < b < 2/(2 beta + 1)");
    require(d >= 2, "family dimension must be at least 2");
    require(static_cast<bool>(g.f), "family bump is empty");
    require(g.at_zero != 0.0, "family bump must not vanish at the origin");
    require(g.l2_sq > 0.0, "family bump needs a positive squared norm");
    require(g.f(0.75) == 0.0 && g.f(-0.75) == 0.0,
            "family bump must vanish outside (-1/2, 1/2)");
    const auto cert = verify_hoelder(g.f, beta, 1.0, -1.0, 1.0, 8192);
    if (!cert.ok)
        throw guard_error("family bump fails certification at (beta, 1): measured " +
                          std::to_string(cert.measured));

    HypothesisFamily fam;
    fam.beta = beta;
    fam.L = L;
    fam.epsilon = epsilon;
    fam.b = b;
    fam.x = x;
    fam.g = g;
    fam.dim = d;
    fam.a_frak = std::sqrt(std::pow(3.0, -d) * b / g.l2_sq);
    const double lg = std::log(1.0 / epsilon);
    fam.h = std::pow(fam.a_frak / L * epsilon * std::sqrt(lg), 2.0 / (2.0 * beta + 1.0));
    // ceil with a guard against roundoff on exact powers
    fam.N = int(std::ceil(std::pow(epsilon, -b) - 1e-9));
    fam.lambda = L * std::pow(fam.h, beta) * std::fabs(g.at_zero);
    fam.directions.reserve(size_t(fam.N));
    for (int i = 1; i <= fam.N; ++i) {
        const double ang = double(i) / double(fam.N);
        fam.directions.push_back(Vec2{std::cos(ang), std::sin(ang)});
    }
    return fam;
}

HypothesisFamily hypothesis_family(double beta, double L, double epsilon, double b,
                                   Vec2 x, int d) {
    return hypothesis_family(beta, L, epsilon, b, x, default_family_bump(beta), d);
}

}  // namespace silab
