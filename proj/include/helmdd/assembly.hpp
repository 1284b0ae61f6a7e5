#pragma once

#include <functional>
#include <span>
#include <vector>

#include "helmdd/grid.hpp"
#include "helmdd/linalg.hpp"
#include "helmdd/pml.hpp"

namespace helmdd {

struct SubdomainLayout;

enum class Execution { Parallel, Serial };

/// Discrete form
///   a(u,v) = int k^-2 ((D grad u).grad conj(v) - (beta.grad u) conj(v)) - c^-2 u conj(v)
/// over an element block, with homogeneous Dirichlet conditions on the block boundary.
struct SesquilinearSpec {
    ElementBlock elements;
    CoefficientField field;
    /// Gauss points per axis; 0 selects p + 2.
    int quad_order = 0;
};

using SourceFunction = std::function<cplx(Point)>;

struct LoadSpec {
    SourceFunction source;
    /// The source is taken to vanish outside this box (Omega_int).
    Rect support;
    int quad_order = 0;
};

/// Matrix over the dofs strictly inside spec.elements, numbered as block_free_dofs().
/// Element matrices are computed in parallel over element rows of alternating colour, so the
/// result is bit-identical for every thread count.
CsrMatrix assemble_matrix(const Grid& grid, const SesquilinearSpec& spec, Execution exec = Execution::Parallel);

/// Load vector <f, phi_i> over the global free dofs.
CVector assemble_load(const Grid& grid, const LoadSpec& spec);

struct LocalMatrix {
    CsrMatrix matrix;
    /// Local dof -> global free dof.
    std::vector<int> to_global;
};

/// Subdomain matrix A_j over V_{h,j}, assembled with the subdomain's own PML stretching.
LocalMatrix assemble_local(const Grid& grid, const SubdomainLayout& layout, int j, const CoefficientField& global_field,
                           int quad_order = 0, Execution exec = Execution::Parallel);

/// Weighted Sobolev norm sum_{|alpha|<=s} ||(k^-1 d)^alpha v||_{L2} of a nodal FE function, s in {0, 1}.
double hk_norm(const Grid& grid, std::span<const cplx> nodal, int s, double k, int quad_order = 0);

/// ||v_h - u||_{L2(Omega)} for a nodal FE function against a pointwise function.
double l2_error(const Grid& grid, std::span<const cplx> nodal, const SourceFunction& exact, int quad_order = 0);

/// Nodal interpolant over all grid nodes.
CVector interpolate(const Grid& grid, const SourceFunction& u);

}  // namespace helmdd
