#pragma once

#include <span>
#include <string>
#include <vector>

#include "helmdd/grid.hpp"
#include "helmdd/linalg.hpp"
#include "helmdd/pml.hpp"

namespace helmdd {

/// Requested overlap: a fixed width, or a multiple of the mesh size.
struct OverlapRule {
    enum class Kind { Fixed, Layers };
    Kind kind = Kind::Layers;
    double value = 1.0;

    static OverlapRule fixed(double delta) { return {Kind::Fixed, delta}; }
    static OverlapRule layers(double m) { return {Kind::Layers, m}; }

    double resolve(double h) const { return kind == Kind::Fixed ? value : value * h; }
    /// "1/80"-style echo for fixed widths is the caller's business; this prints "0.0125" or "2h".
    std::string describe() const;
};

struct Subdomain {
    int ix = 0;  // position in the N1 x N2 arrangement
    int iy = 0;
    ElementBlock interior;  // Omega_int,j
    ElementBlock extended;  // Omega_j = Omega_int,j + PML collar, clipped to Omega
    Rect interior_box;
    Rect extended_box;
    /// V_{h,j}: global free dofs strictly inside Omega_j, block-lexicographic.
    std::vector<int> dofs;
};

/// N1 x N2 overlapping decomposition of Omega_int, subdomain index j = ix + N1 * iy.
///
/// Cell boundaries are the nearest element lines to an equal split. Each internal boundary is
/// widened into an overlap of m = ceil(delta / h) element layers: the lower cell reaches ceil(m/2)
/// layers past the cut and the upper cell floor(m/2), so the pairwise overlap is at least delta.
struct SubdomainLayout {
    int n1 = 1;
    int n2 = 1;
    double delta = 0.0;           // requested overlap width
    int overlap_layers_x = 0;     // element layers in each x-overlap
    int overlap_layers_y = 0;
    double kappa_interior = 0.0;  // PML width on internal subdomain sides (snapped)
    /// Per axis: cell boundaries and box edges, in elements relative to the start of Omega_int.
    std::vector<int> cuts_x, cuts_y;
    std::vector<int> lo_x, hi_x, lo_y, hi_y;
    std::vector<Subdomain> subdomains;

    int size() const { return static_cast<int>(subdomains.size()); }
    int index(int ix, int iy) const { return ix + n1 * iy; }
    bool is_strip() const { return n1 == 1 || n2 == 1; }
};

SubdomainLayout build_layout(const Grid& grid, int n1, int n2, const OverlapRule& delta, double kappa_interior);

/// Layout summary (boxes, dof counts, overlap layers) as a JSON document.
std::string layout_report(const Grid& grid, const SubdomainLayout& layout);

/// Nodal partition of unity built from normalised products of 1D trapezoids.
struct PartitionOfUnity {
    /// chi[j] over all nodes of subdomain j's extended block (block-lexicographic, boundary included).
    std::vector<std::vector<double>> chi;
    std::vector<ElementBlock> blocks;
    int order = 1;

    /// chi_j at a global node; zero outside the subdomain's block.
    double value(const Grid& grid, int j, int node) const;
    /// chi_j on the dofs of V_{h,j}.
    std::vector<double> on_dofs(int j) const;
};

PartitionOfUnity build_pou(const Grid& grid, const SubdomainLayout& layout);

/// Unnormalised 1D profile of cell i at element coordinate t (relative to the start of Omega_int).
double trapezoid_profile(const std::vector<int>& lo, const std::vector<int>& hi, int i, double t);

/// Restriction R_j and weighted extension R~_j^T for every subdomain.
struct TransferOps {
    int global_size = 0;
    std::vector<std::vector<int>> dofs;
    std::vector<std::vector<double>> weights;

    int size() const { return static_cast<int>(dofs.size()); }
    CVector restrict_to(int j, std::span<const cplx> v) const;
    /// Extension by zero of chi_j * w.
    CVector extend_weighted(int j, std::span<const cplx> w) const;
    /// out += chi_j * w (scattered).
    void add_weighted(int j, std::span<const cplx> w, std::span<cplx> out) const;
    /// Plain extension by zero (R_j^T).
    CVector extend_zero(int j, std::span<const cplx> w) const;
};

TransferOps build_transfer(const Grid& grid, const SubdomainLayout& layout, const PartitionOfUnity& pou);

/// Largest |gamma_local - gamma_global| over dofs where chi_j > 0, all subdomains and both axes.
/// Zero means every chi_j is supported where the local and global stretchings coincide.
double pou_agreement_defect(const Grid& grid, const SubdomainLayout& layout, const PartitionOfUnity& pou,
                            const CoefficientField& global_field);

}  // namespace helmdd
