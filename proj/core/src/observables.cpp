#include "qbme/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qbme {

void TimeAverager::touch(uint32_t site, double t, const OccupationState& st) {
    integral_[site] += double(st.occupation(site)) * (t - last_[site]);
    last_[site] = t;
}

void TimeAverager::observe(double t, double dwell, const OccupationState& st,
                           const CollisionVector& cv) {
    if (t <= t_start_) return;
    if (!started_) {
        started_ = true;
        t0_ = std::max(t - dwell, t_start_);
        integral_.assign(st.site_count(), 0.0);
        last_.assign(st.site_count(), t0_);
    }
    uint32_t sites[4] = {cv.a, cv.b, cv.c, cv.d};
    for (size_t i = 0; i < 4; ++i) {
        bool dup = false;
        for (size_t k = 0; k < i; ++k) dup |= (sites[k] == sites[i]);
        if (!dup) touch(sites[i], t, st);
    }
}

void TimeAverager::finish(const OccupationState& st, double t_end) {
    if (finished_) throw std::logic_error("time averager already finished");
    finished_ = true;
    if (!started_) {
        started_ = true;
        t0_ = t_start_;
        integral_.assign(st.site_count(), 0.0);
        last_.assign(st.site_count(), t0_);
    }
    duration_ = t_end - t0_;
    if (duration_ <= 0) {  // trajectory ended before the window opened
        duration_ = 0;
        mean_.clear();
        return;
    }
    mean_.resize(integral_.size());
    for (uint32_t s = 0; s < integral_.size(); ++s) {
        integral_[s] += double(st.occupation(s)) * (t_end - last_[s]);
        mean_[s] = integral_[s] / duration_;
    }
}

std::vector<double> block_means(const ModeCatalog& catalog, bool ergodic,
                                const std::vector<double>& site_mean) {
    if (ergodic) {
        std::vector<double> out(site_mean);
        out.resize(catalog.block_count(), 0.0);
        return out;
    }
    std::vector<double> out(catalog.block_count(), 0.0);
    for (size_t b = 0; b < catalog.block_count(); ++b) {
        const auto& blk = catalog.block(b);
        for (int64_t i = 0; i < blk.degeneracy; ++i) {
            size_t s = blk.first_mode + size_t(i);
            if (s < site_mean.size()) out[b] += site_mean[s];
        }
    }
    return out;
}

void OccupationHistogram::observe(double t, double dwell, const OccupationState& st,
                                  const CollisionVector&) {
    if (t <= t_start_) return;
    double lo = std::max(t - dwell, t_start_);
    int64_t j = st.occupation(site_);
    if (weight_.size() <= size_t(j)) weight_.resize(size_t(j) + 1, 0.0);
    weight_[size_t(j)] += t - lo;
    last_ = t;
    started_ = true;
}

void OccupationHistogram::finish(const OccupationState& st, double t_end) {
    double lo = started_ ? last_ : t_start_;
    if (t_end <= lo) return;
    int64_t j = st.occupation(site_);
    if (weight_.size() <= size_t(j)) weight_.resize(size_t(j) + 1, 0.0);
    weight_[size_t(j)] += t_end - lo;
}

void OccupationHistogram::add_count(int64_t j) {
    if (j < 0) throw std::domain_error("negative occupation count");
    if (weight_.size() <= size_t(j)) weight_.resize(size_t(j) + 1, 0.0);
    weight_[size_t(j)] += 1.0;
}

std::vector<double> OccupationHistogram::normalized() const {
    double sum = 0;
    for (double w : weight_) sum += w;
    if (sum <= 0) throw std::domain_error("empty histogram");
    std::vector<double> out(weight_.size());
    for (size_t i = 0; i < weight_.size(); ++i) out[i] = weight_[i] / sum;
    return out;
}

SigmaResult condensate_sigma(const std::vector<double>& pmf) {
    SigmaResult r;
    double m1 = 0, m2 = 0;
    for (size_t j = 0; j < pmf.size(); ++j) {
        m1 += pmf[j] * double(j);
        m2 += pmf[j] * double(j) * double(j);
    }
    r.mean = m1;
    double var = std::max(m2 - m1 * m1, 0.0);
    r.sigma = std::sqrt(var);
    // Error bar: spread of the squared deviation, scaled by the mean count.
    double v2 = 0;
    for (size_t j = 0; j < pmf.size(); ++j) {
        double x = (double(j) - m1) * (double(j) - m1);
        v2 += pmf[j] * (x - var) * (x - var);
    }
    r.error = m1 > 0 ? std::sqrt(std::sqrt(v2) / m1) : 0.0;
    return r;
}

CollisionTimeStats collision_time(double t_span, uint64_t events, double n_particles) {
    CollisionTimeStats s;
    s.events = events;
    if (events == 0 || t_span <= 0) {
        s.t_coll = std::numeric_limits<double>::infinity();
        return s;
    }
    s.mean_dt = t_span / double(events);
    s.t_coll = 0.5 * n_particles * s.mean_dt;
    return s;
}

double box_classical_collision_time(const ModeCatalog& catalog,
                                    const std::vector<double>& block_mean) {
    double s = 0;
    for (size_t b = 0; b < block_mean.size() && b < catalog.block_count(); ++b)
        s += std::sqrt(double(catalog.block(b).energy)) * block_mean[b];
    return s > 0 ? 2.0 / s : std::numeric_limits<double>::infinity();
}

double osc_classical_collision_time(const ModeCatalog& catalog,
                                    const std::vector<double>& block_mean) {
    double n = 0, s12 = 0, s32 = 0;
    for (size_t b = 0; b < block_mean.size() && b < catalog.block_count(); ++b) {
        double e = double(catalog.block(b).energy) + 1.5;  // physical level energy
        n += block_mean[b];
        s12 += std::sqrt(e) * block_mean[b];
        s32 += e * std::sqrt(e) * block_mean[b];
    }
    if (n <= 0 || s12 <= 0) return std::numeric_limits<double>::infinity();
    double e12 = (s12 / n) * (s12 / n);          // E_{1/2}
    double e32 = std::pow(s32 / n, 2.0 / 3.0);   // E_{3/2}
    return 16.0 / (3.0 * std::numbers::pi * n) * e32 * std::sqrt(e32) / std::sqrt(e12);
}

namespace {

double growth_rss(const std::vector<double>& t, const std::vector<double>& y, double a,
                  double tau) {
    double rss = 0;
    for (size_t i = 0; i < t.size(); ++i) {
        double r = a * -std::expm1(-t[i] / tau) - y[i];
        rss += r * r;
    }
    return rss;
}

}  // namespace

GrowthFit growth_fit(const std::vector<double>& t, const std::vector<double>& nc) {
    if (t.size() != nc.size() || t.size() < 3)
        throw std::invalid_argument("growth fit needs >= 3 aligned samples");
    double t_max = *std::max_element(t.begin(), t.end());
    if (t_max <= 0) throw std::invalid_argument("growth fit needs positive times");

    // Coarse pass: amplitude is linear given tau.
    double best_a = 0, best_tau = t_max, best_rss = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 80; ++k) {
        double tau = t_max * std::pow(10.0, -4.0 + 5.0 * k / 80.0);
        double su = 0, suy = 0;
        for (size_t i = 0; i < t.size(); ++i) {
            double u = -std::expm1(-t[i] / tau);
            su += u * u;
            suy += u * nc[i];
        }
        if (su <= 0) continue;
        double a = suy / su;
        double rss = growth_rss(t, nc, a, tau);
        if (rss < best_rss) {
            best_rss = rss;
            best_a = a;
            best_tau = tau;
        }
    }

    // Gauss-Newton refinement.
    double a = best_a, tau = best_tau;
    for (int it = 0; it < 60; ++it) {
        double jaa = 0, jat = 0, jtt = 0, ga = 0, gt = 0;
        for (size_t i = 0; i < t.size(); ++i) {
            double ex = std::exp(-t[i] / tau);
            double u = 1.0 - ex;
            double r = a * u - nc[i];
            double dtau = -a * t[i] / (tau * tau) * ex;
            jaa += u * u;
            jat += u * dtau;
            jtt += dtau * dtau;
            ga += u * r;
            gt += dtau * r;
        }
        double det = jaa * jtt - jat * jat;
        if (!(std::abs(det) > 1e-30)) break;
        double da = (-ga * jtt + gt * jat) / det;
        double dt = (-gt * jaa + ga * jat) / det;
        double a2 = a + da, tau2 = tau + dt;
        if (!(tau2 > 0) || !std::isfinite(a2) || !std::isfinite(tau2)) break;
        if (growth_rss(t, nc, a2, tau2) > growth_rss(t, nc, a, tau) * (1 + 1e-15)) break;
        a = a2;
        tau = tau2;
        if (std::abs(da) < 1e-12 * std::max(1.0, std::abs(a)) &&
            std::abs(dt) < 1e-12 * tau)
            break;
    }

    GrowthFit fit;
    fit.n_eq = a;
    fit.tau = tau;
    fit.residual = std::sqrt(growth_rss(t, nc, a, tau) / double(t.size()));
    fit.degenerate = !(a > 0) || tau < t_max * 1e-5 || tau > t_max * 20;
    return fit;
}

int64_t ergodization_distort(OccupationState& st) {
    if (st.ergodic()) throw std::invalid_argument("distortion needs mode-resolved state");
    const ModeCatalog& c = st.catalog();
    if (c.geometry() != Geometry::Box) throw std::invalid_argument("box states only");
    auto idx = [&](int x, int y, int z) {
        int64_t i = c.mode_index(BoxMode{{x, y, z}});
        if (i < 0) throw std::logic_error("first shell missing from catalog");
        return uint32_t(i);
    };
    uint32_t xp = idx(1, 0, 0), xm = idx(-1, 0, 0);
    int64_t moved = 0;
    const int pairs[2][2][3] = {{{0, 1, 0}, {0, -1, 0}}, {{0, 0, 1}, {0, 0, -1}}};
    for (const auto& pr : pairs) {
        uint32_t p = idx(pr[0][0], pr[0][1], pr[0][2]);
        uint32_t m = idx(pr[1][0], pr[1][1], pr[1][2]);
        int64_t k = std::min(st.occupation(p), st.occupation(m));
        if (k <= 0) continue;
        st.add_particles(p, -k);
        st.add_particles(m, -k);
        st.add_particles(xp, k);
        st.add_particles(xm, k);
        moved += 2 * k;
    }
    return moved;
}

int64_t collision_distort(OccupationState& st, const CollisionKernel& kernel,
                          int64_t target_moved) {
    if (st.ergodic() || st.catalog().geometry() != Geometry::Box)
        throw std::invalid_argument("collision distortion needs mode-resolved box states");
    const ModeCatalog& c = st.catalog();
    int64_t xp = c.mode_index(BoxMode{{1, 0, 0}});
    int64_t xm = c.mode_index(BoxMode{{-1, 0, 0}});
    if (xp < 0 || xm < 0) throw std::logic_error("first shell missing from catalog");
    auto in_pair = [&](uint32_t s) {
        return int(s == uint32_t(xp)) + int(s == uint32_t(xm));
    };
    int64_t moved = 0;
    while (moved < target_moved) {
        auto channels = kernel.enumerate_channels(st);
        const CollisionVector* best = nullptr;
        int best_gain = 0;
        for (const auto& ch : channels) {
            int gain = in_pair(ch.cv.c) + in_pair(ch.cv.d) - in_pair(ch.cv.a) -
                       in_pair(ch.cv.b);
            if (gain > best_gain) {
                best_gain = gain;
                best = &ch.cv;
            }
        }
        if (!best) break;
        st.apply(*best);
        moved += best_gain;
    }
    return moved;
}

double profile_distance(const std::vector<double>& sim, const std::vector<double>& ref) {
    size_t n = std::max(sim.size(), ref.size());
    double d = 0, total = 0;
    for (size_t i = 0; i < n; ++i) {
        double a = i < sim.size() ? sim[i] : 0.0;
        double b = i < ref.size() ? ref[i] : 0.0;
        double diff = a - b;
        d += diff * diff / std::max(b, 0.5);
        total += b;
    }
    return total > 0 ? d / total : d;
}

}  // namespace qbme
