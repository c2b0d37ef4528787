#include "phi4/stochastic.hpp"

#include <cmath>
#include <numbers>

namespace phi4 {

namespace {

struct Stats {
    double mean = 0.0, std_error = 0.0;
};

// fixed-order reductions so results do not depend on the thread count
Stats stats(const std::vector<double>& z) {
    const std::size_t M = z.size();
    Stats s;
    s.mean = pairwise_sum(z.data(), M) / static_cast<double>(M);
    std::vector<double> d(M);
    for (std::size_t i = 0; i < M; ++i) d[i] = (z[i] - s.mean) * (z[i] - s.mean);
    const double var = pairwise_sum(d.data(), M) / static_cast<double>(M - 1);
    s.std_error = std::sqrt(var / static_cast<double>(M));
    return s;
}

MomentEstimate estimate(const std::vector<double>& z, double target) {
    const Stats s = stats(z);
    MomentEstimate e{s.mean, s.std_error, target, 0.0};
    e.sigma_distance = s.std_error > 0 ? std::abs(s.mean - target) / s.std_error : (s.mean == target ? 0.0 : INFINITY);
    return e;
}

double phase(const LatticeSpec& lat, const ModeTable& modes, std::size_t m, const std::array<int, 3>& di) {
    double ph = 0.0;
    for (int a = 0; a < lat.dim; ++a) ph += 2 * std::numbers::pi * modes.n[m][a] * di[a] / lat.N;
    return ph;
}

// values[s][p] = xi_s(points[p])
std::vector<std::vector<double>> point_values(const LatticeSpec& lat, const std::vector<StochasticSample>& samples,
                                              const std::vector<SpacetimePoint>& points) {
    ModeTable modes(lat);
    std::vector<std::vector<double>> v(samples.size(), std::vector<double>(points.size()));
    const long M = static_cast<long>(samples.size());
#pragma omp parallel for schedule(static)
    for (long s = 0; s < M; ++s)
        for (std::size_t p = 0; p < points.size(); ++p) v[s][p] = xi_value(lat, modes, samples[s], points[p]);
    return v;
}

}  // namespace

void StochasticConfig::validate() const {
    if (!(beta > 0)) throw ConfigError("stochastic: beta must be positive");
    if (samples < 2) throw ConfigError("stochastic: need at least two samples");
}

std::vector<double> mode_variance(const LatticeSpec& lat, double beta) {
    ModeTable modes(lat);
    std::vector<double> v(modes.size, 0.0);
    for (std::size_t m = 0; m < modes.size; ++m)
        if (modes.retained[m]) v[m] = 1.0 / (2 * std::numbers::pi * beta * modes.omega[m] * lat.volume());
    return v;
}

StochasticSample sample_xi(const StochasticConfig& cfg, const LatticeSpec& lat, std::uint64_t sample_index) {
    cfg.validate();
    ModeTable modes(lat);
    const auto var = mode_variance(lat, cfg.beta);
    StochasticSample s{{std::vector<cplx>(modes.size, 0.0), std::vector<cplx>(modes.size, 0.0)}};
    for (std::size_t m = 0; m < modes.size; ++m) {
        if (!modes.retained[m]) continue;
        const std::size_t p = modes.partner[m];
        const double w = modes.omega[m];
        if (p == m) {
            // self-conjugate: real, full variance in one component
            const auto g = philox_normals(cfg.seed, cfg.stream, sample_index, m);
            const double sd = std::sqrt(var[m]);
            s.xi.phi[m] = sd * g[0];
            s.xi.pi[m] = w * sd * g[1];
        } else if (m < p) {
            const auto g = philox_normals(cfg.seed, cfg.stream, sample_index, m);
            const double sd = std::sqrt(0.5 * var[m]);
            s.xi.phi[m] = sd * cplx(g[0], g[1]);
            s.xi.pi[m] = w * sd * cplx(g[2], g[3]);
            s.xi.phi[p] = std::conj(s.xi.phi[m]);
            s.xi.pi[p] = std::conj(s.xi.pi[m]);
        }
    }
    return s;
}

std::vector<StochasticSample> sample_ensemble(const StochasticConfig& cfg, const LatticeSpec& lat, Exec ex) {
    cfg.validate();
    std::vector<StochasticSample> out(cfg.samples);
#pragma omp parallel for schedule(static) if (ex == Exec::Parallel)
    for (int s = 0; s < cfg.samples; ++s) out[s] = sample_xi(cfg, lat, static_cast<std::uint64_t>(s));
    return out;
}

FieldState xi_state(const LatticeSpec& lat, const StochasticSample& s, double t) {
    ModeTable modes(lat);
    SpectralField sp{std::vector<cplx>(modes.size, 0.0), std::vector<cplx>(modes.size, 0.0)};
    for (std::size_t m = 0; m < modes.size; ++m) {
        if (!modes.retained[m]) continue;
        const double w = modes.omega[m], c = std::cos(w * t), sn = std::sin(w * t);
        sp.phi[m] = c * s.xi.phi[m] + sn / w * s.xi.pi[m];
        sp.pi[m] = -w * sn * s.xi.phi[m] + c * s.xi.pi[m];
    }
    return from_spectral(lat, sp);
}

double xi_value(const LatticeSpec& lat, const ModeTable& modes, const StochasticSample& s, const SpacetimePoint& x) {
    double acc = 0.0;
    for (std::size_t m = 0; m < modes.size; ++m) {
        if (!modes.retained[m]) continue;
        const double w = modes.omega[m];
        const cplx a = std::cos(w * x.t) * s.xi.phi[m] + std::sin(w * x.t) / w * s.xi.pi[m];
        acc += (a * std::polar(1.0, phase(lat, modes, m, x.i))).real();
    }
    return acc;
}

double covariance_target(const LatticeSpec& lat, double beta, const SpacetimePoint& x, const SpacetimePoint& y) {
    ModeTable modes(lat);
    const auto var = mode_variance(lat, beta);
    std::vector<double> terms(modes.size, 0.0);
    const std::array<int, 3> di{x.i[0] - y.i[0], x.i[1] - y.i[1], x.i[2] - y.i[2]};
    for (std::size_t m = 0; m < modes.size; ++m)
        if (modes.retained[m])
            terms[m] = var[m] * std::cos(modes.omega[m] * (x.t - y.t)) * std::cos(phase(lat, modes, m, di));
    return pairwise_sum(terms.data(), terms.size());
}

std::vector<MomentEstimate> covariance_mc(const LatticeSpec& lat, double beta,
                                          const std::vector<StochasticSample>& samples,
                                          const std::vector<std::array<SpacetimePoint, 2>>& pairs) {
    if (samples.size() < 64) throw ConfigError("covariance_mc: need at least 64 samples");
    std::vector<SpacetimePoint> pts;
    for (const auto& p : pairs) pts.insert(pts.end(), p.begin(), p.end());
    const auto v = point_values(lat, samples, pts);
    std::vector<MomentEstimate> out;
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        std::vector<double> z(samples.size());
        for (std::size_t s = 0; s < samples.size(); ++s) z[s] = v[s][2 * q] * v[s][2 * q + 1];
        out.push_back(estimate(z, covariance_target(lat, beta, pairs[q][0], pairs[q][1])));
    }
    return out;
}

std::vector<MomentEstimate> mean_mc(const LatticeSpec& lat, const std::vector<StochasticSample>& samples,
                                    const std::vector<SpacetimePoint>& points) {
    const auto v = point_values(lat, samples, points);
    std::vector<MomentEstimate> out;
    for (std::size_t p = 0; p < points.size(); ++p) {
        std::vector<double> z(samples.size());
        for (std::size_t s = 0; s < samples.size(); ++s) z[s] = v[s][p];
        out.push_back(estimate(z, 0.0));
    }
    return out;
}

std::vector<MomentEstimate> third_moment_mc(const LatticeSpec& lat, const std::vector<StochasticSample>& samples,
                                            const std::vector<std::array<SpacetimePoint, 3>>& triples) {
    std::vector<SpacetimePoint> pts;
    for (const auto& t : triples) pts.insert(pts.end(), t.begin(), t.end());
    const auto v = point_values(lat, samples, pts);
    std::vector<MomentEstimate> out;
    for (std::size_t q = 0; q < triples.size(); ++q) {
        std::vector<double> z(samples.size());
        for (std::size_t s = 0; s < samples.size(); ++s) z[s] = v[s][3 * q] * v[s][3 * q + 1] * v[s][3 * q + 2];
        out.push_back(estimate(z, 0.0));
    }
    return out;
}

MomentEstimate fourth_moment_mc(const LatticeSpec& lat, double beta, const std::vector<StochasticSample>& samples,
                                const std::array<SpacetimePoint, 4>& pts) {
    const auto v = point_values(lat, samples, {pts.begin(), pts.end()});
    std::vector<double> z(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) z[s] = v[s][0] * v[s][1] * v[s][2] * v[s][3];
    auto C = [&](int a, int b) { return covariance_target(lat, beta, pts[a], pts[b]); };
    return estimate(z, C(0, 1) * C(2, 3) + C(0, 2) * C(1, 3) + C(0, 3) * C(1, 2));
}

std::vector<ModeEnergy> zero_point_energy(const LatticeSpec& lat, double beta,
                                          const std::vector<StochasticSample>& samples) {
    if (samples.size() < 256) throw ConfigError("zero_point_energy: need at least 256 samples");
    ModeTable modes(lat);
    std::vector<ModeEnergy> out;
    for (std::size_t m = 0; m < modes.size; ++m) {
        if (!modes.retained[m]) continue;
        const double w = modes.omega[m];
        std::vector<double> z(samples.size());
        for (std::size_t s = 0; s < samples.size(); ++s)
            z[s] = 0.5 * lat.volume() * (std::norm(samples[s].xi.pi[m]) + w * w * std::norm(samples[s].xi.phi[m]));
        const Stats st = stats(z);
        out.push_back({m, w, st.mean, st.std_error, zero_point_constant * w / (2 * std::numbers::pi * beta)});
    }
    return out;
}

DeltaEMc delta_E_mc(const MeasurementSetup& s, const StochasticConfig& cfg, double lambda, Exec ex) {
    cfg.validate();
    const LatticeSpec& lat = s.lat;
    ModeTable modes(lat);
    const FreeFields f = phi0_from_sources(s, ex);
    const std::size_t nt = lat.nt(), np = lat.points(), nm = modes.size;
    std::vector<std::size_t> rows;
    std::vector<double> wrow;
    for (std::size_t j = 0; j < nt; ++j)
        if (lat.in_window(j)) {
            rows.push_back(j);
            wrow.push_back((j == 0 || j + 1 == nt) ? 0.5 : 1.0);
        }
    const double vol = lat.dt * lat.cell();
    SpacetimeField phic(rows.size(), np), dout(rows.size(), np);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t i = 0; i < np; ++i) {
            phic.at(r, i) = f.phi_in.at(rows[r], i) + f.phi_out.at(rows[r], i);
            dout.at(r, i) = f.dphi_out.at(rows[r], i);
        }
    // -(lambda/12) int chi g(phi) d/dt phi_out
    auto window_integral = [&](auto&& g) {
        std::vector<double> per(rows.size());
        std::vector<double> buf(np);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t i = 0; i < np; ++i) buf[i] = g(r, i) * dout.at(r, i);
            per[r] = wrow[r] * pairwise_sum(buf.data(), np);
        }
        return vol * pairwise_sum(per.data(), per.size());
    };

    DeltaEMc res;
    res.samples = cfg.samples;
    const auto var = mode_variance(lat, cfg.beta);
    res.coincident_covariance = pairwise_sum(var.data(), var.size());
    res.tree = -lambda / 12.0 * window_integral([&](std::size_t r, std::size_t i) {
        const double p = phic.at(r, i);
        return p * p * p;
    });
    res.tadpole = -lambda / 4.0 * res.coincident_covariance *
                  window_integral([&](std::size_t r, std::size_t i) { return phic.at(r, i); });
    res.prediction = res.tree + res.tadpole;
    {
        MeasurementSetup s2 = s;
        s2.order = 2;
        auto g = global_expand(s2, lambda, ex);
        res.order2_tree = -0.5 * lambda * lambda * spacetime_dot(lat, g.rho[2].values, f.dphi_out);
    }

    // cos/sin of omega t on the window rows
    std::vector<double> cw(rows.size() * nm), sw(rows.size() * nm);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t m = 0; m < nm; ++m) {
            const double w = modes.omega[m], t = lat.time(rows[r]);
            cw[r * nm + m] = modes.retained[m] ? std::cos(w * t) : 0.0;
            sw[r * nm + m] = modes.retained[m] ? std::sin(w * t) / w : 0.0;
        }

    std::vector<double> per_sample(cfg.samples);
#pragma omp parallel if (ex == Exec::Parallel)
    {
        std::vector<cplx> spec(nm);
        std::vector<double> xi(np), buf(np), per(rows.size());
#pragma omp for schedule(static)
        for (int smp = 0; smp < cfg.samples; ++smp) {
            const auto sample = sample_xi(cfg, lat, static_cast<std::uint64_t>(smp));
            for (std::size_t r = 0; r < rows.size(); ++r) {
                for (std::size_t m = 0; m < nm; ++m)
                    spec[m] = cw[r * nm + m] * sample.xi.phi[m] + sw[r * nm + m] * sample.xi.pi[m];
                inverse_real(lat, spec.data(), xi.data());
                for (std::size_t i = 0; i < np; ++i) {
                    const double p = phic.at(r, i) + xi[i];
                    buf[i] = p * p * p * dout.at(r, i);
                }
                per[r] = wrow[r] * pairwise_sum(buf.data(), np);
            }
            per_sample[smp] = -lambda / 12.0 * vol * pairwise_sum(per.data(), per.size());
        }
    }
    const Stats st = stats(per_sample);
    res.mean = st.mean;
    res.std_error = st.std_error;
    auto dist = [&](double target) {
        const double d = std::abs(res.mean - target);
        return res.std_error > 0 ? d / res.std_error : (d == 0 ? 0.0 : INFINITY);
    };
    res.sigma_distance = dist(res.prediction);
    res.tree_only_sigma = dist(res.tree);
    res.flagged = res.sigma_distance > 5.0;
    return res;
}

}  // namespace phi4
