#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "cfgrid/branches.hpp"
#include "cfgrid/network.hpp"

namespace cfgrid {

/// Bus admittance matrix with the CF-analysis sign convention:
/// off-diagonal (h,k) = Y_hk, diagonal = -sum_k Y_hk - shunts.
/// This is the negative of the textbook diagonal; the current drawn from
/// bus h by the network is -sum_k Ybus(h,k) v_k.
using SparseY = Eigen::SparseMatrix<Complex>;

/// One block per element of expand_elements(case), in the same order.
/// Two-terminal elements use series_block(y); shunts only use (0,0).
using BranchStates = std::vector<Block2>;

struct TapSetting {
    double m = 1.0;
    double alpha = 0.0;
};

SparseY assemble_admittance(const NetworkCase& c, const BranchStates& branch_states);

SparseY assemble_admittance(std::size_t n_bus, const std::vector<Element>& elements,
                            const BranchStates& branch_states, const std::vector<char>* in_service = nullptr);

/// Sinusoidal (AC) or constant (DC) steady-state blocks. `taps` holds one
/// entry per element; only transformers and converters read it. Converter
/// blocks depend on the terminal voltages in `v`.
BranchStates steady_branch_states(const NetworkCase& c, const std::vector<Element>& elements,
                                  const std::vector<Complex>& v, const std::vector<TapSetting>& taps,
                                  double eps_sing = kDefaultEpsSing);

/// Block of a single element in steady state.
Block2 steady_block(const Element& e, double omega_nom, const std::vector<Complex>& v, const TapSetting& tap,
                    double eps_sing = kDefaultEpsSing);

/// Currents injected into (from, to) by the element for the given block.
std::pair<Complex, Complex> element_currents(const Element& e, const Block2& block, const std::vector<Complex>& v);

}  // namespace cfgrid
