#include "cfgrid/admittance.hpp"

#include <string>

#include "cfgrid/error.hpp"

namespace cfgrid {

SparseY assemble_admittance(std::size_t n_bus, const std::vector<Element>& elements,
                            const BranchStates& branch_states, const std::vector<char>* in_service) {
    if (branch_states.size() != elements.size())
        fail(ErrorKind::DimensionMismatch, "expected " + std::to_string(elements.size()) + " branch states, got " +
                                               std::to_string(branch_states.size()));
    if (in_service && in_service->size() != elements.size())
        fail(ErrorKind::DimensionMismatch, "in-service mask size does not match the element count");
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(4 * elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (in_service && !(*in_service)[i]) continue;
        const auto& e = elements[i];
        const auto& b = branch_states[i];
        if (e.from >= n_bus || (e.to != kGround && e.to >= n_bus))
            fail(ErrorKind::DimensionMismatch, "element '" + e.id + "' refers to a bus outside the matrix");
        triplets.emplace_back(e.from, e.from, b(0, 0));
        if (e.to == kGround) continue;
        triplets.emplace_back(e.from, e.to, b(0, 1));
        triplets.emplace_back(e.to, e.from, b(1, 0));
        triplets.emplace_back(e.to, e.to, b(1, 1));
    }
    SparseY y(static_cast<Eigen::Index>(n_bus), static_cast<Eigen::Index>(n_bus));
    y.setFromTriplets(triplets.begin(), triplets.end());
    return y;
}

SparseY assemble_admittance(const NetworkCase& c, const BranchStates& branch_states) {
    return assemble_admittance(c.buses.size(), expand_elements(c), branch_states);
}

Block2 steady_block(const Element& e, double omega_nom, const std::vector<Complex>& v, const TapSetting& tap,
                    double eps_sing) {
    const double w = e.ac ? omega_nom : 0.0;
    switch (e.kind) {
        case ElementKind::ConstantY:
            return series_block(e.y);
        case ElementKind::SeriesRL:
            return series_block(rl_admittance(ComplexFrequency{0.0, w}, e.r, e.l, eps_sing));
        case ElementKind::ShuntGC:
            return series_block(gc_admittance(ComplexFrequency{0.0, w}, e.g, e.c));
        case ElementKind::Transformer:
            return transformer_admittance_block({tap.m, tap.alpha, 0.0, 0.0, e.y});
        case ElementKind::Converter: {
            ConverterState cs;
            cs.m = tap.m;
            cs.alpha = tap.alpha;
            cs.theta_ac = std::arg(v[e.from]);
            cs.v_ac = std::abs(v[e.from]);
            cs.v_dc = v[e.to].real();
            return converter_admittance_block(cs, e.y);
        }
    }
    return Block2::Zero();
}

BranchStates steady_branch_states(const NetworkCase& c, const std::vector<Element>& elements,
                                  const std::vector<Complex>& v, const std::vector<TapSetting>& taps,
                                  double eps_sing) {
    if (taps.size() != elements.size()) fail(ErrorKind::DimensionMismatch, "one tap setting per element expected");
    BranchStates out;
    out.reserve(elements.size());
    const double w0 = c.omega_nom();
    for (std::size_t i = 0; i < elements.size(); ++i) out.push_back(steady_block(elements[i], w0, v, taps[i], eps_sing));
    return out;
}

std::pair<Complex, Complex> element_currents(const Element& e, const Block2& block, const std::vector<Complex>& v) {
    const Complex vf = v[e.from];
    const Complex vt = e.to == kGround ? Complex(0.0, 0.0) : v[e.to];
    return {block(0, 0) * vf + block(0, 1) * vt, block(1, 0) * vf + block(1, 1) * vt};
}

}  // namespace cfgrid
