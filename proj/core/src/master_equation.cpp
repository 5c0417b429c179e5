#include "qbme/master_equation.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qbme {

namespace {

OccupationState state_from_occ(const ModeCatalog& catalog, bool ergodic,
                               const std::vector<int64_t>& occ) {
    OccupationState st(catalog, ergodic);
    for (uint32_t s = 0; s < occ.size(); ++s)
        if (occ[s] > 0) st.add_particles(s, occ[s]);
    return st;
}

double multiset_log(int64_t b, int64_t g) {
    // log C(b + g - 1, b)
    return std::lgamma(double(b + g)) - std::lgamma(double(b + 1)) - std::lgamma(double(g));
}

}  // namespace

MasterEquationResult exact_master_equation(const CollisionKernel& kernel,
                                           const OccupationState& initial,
                                           size_t max_states) {
    const ModeCatalog& catalog = kernel.catalog();
    const bool ergodic = initial.ergodic();

    MasterEquationResult res;
    std::map<std::vector<int64_t>, uint32_t> index;
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> out_rate;

    std::vector<int64_t> occ0(initial.site_count());
    for (uint32_t s = 0; s < occ0.size(); ++s) occ0[s] = initial.occupation(s);
    index[occ0] = 0;
    res.states.push_back(occ0);

    for (uint32_t i = 0; i < res.states.size(); ++i) {
        OccupationState st = state_from_occ(catalog, ergodic, res.states[i]);
        double total = 0;
        for (const auto& ch : kernel.enumerate_channels(st)) {
            std::vector<int64_t> occ = res.states[i];
            occ[ch.cv.a] -= 1;
            occ[ch.cv.b] -= 1;
            occ[ch.cv.c] += 1;
            occ[ch.cv.d] += 1;
            auto [it, fresh] = index.try_emplace(occ, uint32_t(res.states.size()));
            if (fresh) {
                if (res.states.size() >= max_states)
                    throw std::length_error("reachable class exceeds the state bound");
                res.states.push_back(std::move(occ));
            }
            trips.emplace_back(int(it->second), int(i), ch.rate);
            total += ch.rate;
        }
        out_rate.push_back(total);
    }

    const int n = int(res.states.size());
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, -out_rate[size_t(i)]);

    // Solve Q x = 0, sum(x) = 1: replace the last balance row (redundant for
    // an irreducible generator) with the normalization.
    std::vector<Eigen::Triplet<double>> sys;
    sys.reserve(trips.size() + size_t(n));
    for (const auto& t : trips)
        if (t.row() != n - 1) sys.push_back(t);
    for (int j = 0; j < n; ++j) sys.emplace_back(n - 1, j, 1.0);

    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(sys.begin(), sys.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("stationary solve failed (reducible class?)");
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[n - 1] = 1.0;
    Eigen::VectorXd x = lu.solve(b);

    res.stationary.assign(x.data(), x.data() + n);
    res.multiplicity_log.resize(size_t(n), 0.0);
    if (ergodic) {
        for (int i = 0; i < n; ++i) {
            double lm = 0;
            const auto& occ = res.states[size_t(i)];
            for (uint32_t s = 0; s < occ.size(); ++s)
                if (occ[s] > 0) lm += multiset_log(occ[s], catalog.block(s).degeneracy);
            res.multiplicity_log[size_t(i)] = lm;
        }
    }
    return res;
}

}  // namespace qbme
