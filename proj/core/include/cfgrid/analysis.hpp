#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfgrid/admittance.hpp"
#include "cfgrid/network.hpp"
#include "cfgrid/powerflow.hpp"
#include "cfgrid/trajectory.hpp"

namespace cfgrid {

/// Which part of an element a chi term belongs to. Symmetric elements give a
/// single Branch term weighted by the branch flow; transformers and
/// converters give a Diagonal and an OffDiagonal term because their two
/// entries vary differently.
enum class ChiEntry { Branch, Diagonal, OffDiagonal };

struct ChiTerm {
    std::string element;      // element id, "ground" for the lumped shunts
    std::string counterpart;  // neighbour bus id or "ground"
    ChiEntry entry = ChiEntry::Branch;
    Complex coefficient{0.0, 0.0};
    ComplexFrequency chi;       // may be flagged while the product stays valid
    Complex product{0.0, 0.0};  // coefficient * chi
};

struct EtaTerm {
    std::string element;
    std::string neighbor;
    Complex coefficient{0.0, 0.0};
    ComplexFrequency eta;
};

struct CfDecomposition {
    std::string bus;
    double time = 0.0;
    Complex y_hh{0.0, 0.0};
    std::vector<ChiTerm> c_chi;
    std::vector<EtaTerm> c_eta;
    Complex c_xi{0.0, 0.0};
    ComplexFrequency xi;
    Complex xi_product{0.0, 0.0};  // c_xi * xi, finite even at transit buses
    /// i_{h->k}/(v_h Y_hh) per element, the branch-level view of c_chi.
    std::vector<std::pair<std::string, Complex>> c_chi_branch;
    ComplexFrequency chi_hh;
    ComplexFrequency eta_reconstructed;
    ComplexFrequency eta_direct;
    bool flagged = false;
    std::string flag_reason;

    /// c_eta summed per neighbour bus (parallel elements merged).
    std::map<std::string, Complex> c_eta_by_neighbor() const;
    /// |sum c_eta + c_xi - 1|
    double property1_residual() const;
    /// |sum c_chi + c_xi|
    double property2_residual() const;
    /// |sum c_chi - c_xi|
    double property2_unsigned_residual() const;
};

struct AnalysisOptions {
    double eps_mag = kDefaultEpsMag;
    double eps_sing = kDefaultEpsSing;
    double recon_tol = 1e-3;
};

// ======================================================================
// Single operating point
// ======================================================================

/// Coefficients of one bus from voltages, element blocks and net device
/// injections. Elements that are out of service may be masked. SingularBus
/// when |v_h| <= eps_mag or |Y_hh| <= eps_sing.
CfDecomposition compute_coefficients(const NetworkCase& c, std::size_t h, const std::vector<Complex>& v,
                                     const std::vector<Element>& elements, const BranchStates& blocks,
                                     const std::vector<Complex>& injections,
                                     const std::vector<char>* in_service = nullptr,
                                     const AnalysisOptions& options = {});

/// All buses at a power-flow solution, CFs left at zero.
std::vector<CfDecomposition> steady_state_coefficients(const NetworkCase& c, const PowerFlowSolution& pf,
                                                       const AnalysisOptions& options = {});

/// Weighted sum of all terms.
ComplexFrequency reconstruct_eta(const CfDecomposition& d);

/// -sum Y_hk chi_hk / Y_hh with Y_hh = -sum Y_hk. SingularBus when |Y_hh| <= eps_sing.
ComplexFrequency compute_chi_hh(const std::vector<Complex>& y_hk, const std::vector<ComplexFrequency>& chi_hk,
                                double eps_sing = kDefaultEpsSing);

struct CouplingMetric {
    std::string neighbor;
    double self = 0.0;   // |Re c_eta|
    double cross = 0.0;  // |Im c_eta|
    double ratio = 0.0;  // self / cross, +inf when cross = 0
};

std::vector<CouplingMetric> coupling_metrics(const CfDecomposition& d);

// ======================================================================
// Trajectories
// ======================================================================

struct BusAudit {
    std::string bus;
    std::size_t samples = 0;
    std::size_t flagged = 0;
    std::map<std::string, std::size_t> flag_counts;
    std::vector<std::size_t> req_sign_change_samples;
    double max_property1 = 0.0;
    double max_property2 = 0.0;
    double max_property2_unsigned = 0.0;
    double max_recon_error = 0.0;
    double max_recon_time = 0.0;
    std::size_t recon_checked = 0;
    std::size_t recon_within_tol = 0;
};

struct AuditReport {
    double dt = 0.0;
    double recon_tol = 0.0;
    std::vector<BusAudit> buses;

    std::size_t total_checked() const;
    std::size_t total_within_tol() const;
    std::size_t total_flagged() const;
    double max_property1() const;
    double max_property2() const;
    std::string to_text() const;
};

/// Per-sample decomposition over a recorded trajectory.
class TrajectoryAnalyzer {
public:
    TrajectoryAnalyzer(const NetworkCase& c, const Trajectory& tr, const AnalysisOptions& options = {});

    std::size_t samples() const;
    CfDecomposition at(std::size_t bus, std::size_t sample) const;

    /// Elements that are in service at a sample.
    const std::vector<char>& in_service(std::size_t sample) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Properties 1 and 2 and reconstruction fidelity at every bus-sample.
/// Never throws on numerical trouble; bad samples are flagged.
AuditReport audit_trajectory(const Trajectory& tr, const NetworkCase& c, const AnalysisOptions& options = {});

/// Streams decompositions of the selected buses (all when empty).
void for_each_decomposition(const Trajectory& tr, const NetworkCase& c, const std::vector<std::string>& buses,
                            std::size_t stride, const std::function<void(const CfDecomposition&)>& sink,
                            const AnalysisOptions& options = {});

std::string to_string(ChiEntry e);

}  // namespace cfgrid
