#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace helmdd {

/// Raised for invalid inputs and failed numerical preconditions across the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned open rectangle (x_lo, x_hi) x (y_lo, y_hi).
struct Rect {
    double x_lo = 0.0;
    double x_hi = 1.0;
    double y_lo = 0.0;
    double y_hi = 1.0;

    double width() const { return x_hi - x_lo; }
    double height() const { return y_hi - y_lo; }
    bool contains_closed(Point p, double tol = 0.0) const {
        return p.x >= x_lo - tol && p.x <= x_hi + tol && p.y >= y_lo - tol && p.y <= y_hi + tol;
    }
    void validate() const;
};

enum class RegionTag { Interior, PmlWest, PmlEast, PmlSouth, PmlNorth, PmlCorner };

std::string to_string(RegionTag tag);

/// Half-open block of elements [ex0, ex1) x [ey0, ey1) in element coordinates.
struct ElementBlock {
    int ex0 = 0;
    int ex1 = 0;
    int ey0 = 0;
    int ey1 = 0;

    int nx() const { return ex1 - ex0; }
    int ny() const { return ey1 - ey0; }
    int size() const { return nx() * ny(); }
    bool operator==(const ElementBlock&) const = default;
};

/// Mesh-size rule: either a fixed target element size or h = C * k^{-1.25}.
struct MeshRule {
    enum class Kind { Target, Pollution };
    Kind kind = Kind::Pollution;
    double value = 1.0;

    static MeshRule target(double h) { return {Kind::Target, h}; }
    static MeshRule pollution(double constant) { return {Kind::Pollution, constant}; }

    double resolve(double k) const;
};

/// Structured tensor-product mesh of order-p Lagrange elements over Omega.
///
/// Nodes are numbered lexicographically, x fastest. "Free" dofs are the nodes not on the
/// outer boundary of Omega; they are numbered lexicographically as well. The interior box
/// (Omega_int) is always resolved by element boundaries.
class Grid {
public:
    Grid(Rect interior, int nx_interior, int ny_interior, int pml_x, int pml_y, int p);

    /// Grid with no absorbing collar: Omega = Omega_int.
    static Grid uniform(Rect domain, int nx, int ny, int p) { return Grid(domain, nx, ny, 0, 0, p); }

    const Rect& domain() const { return domain_; }
    const Rect& interior() const { return interior_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int order() const { return p_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    /// Largest element side length.
    double h() const { return hx_ > hy_ ? hx_ : hy_; }
    /// PML collar width in elements per axis.
    int pml_elements_x() const { return pml_x_; }
    int pml_elements_y() const { return pml_y_; }
    double kappa_x() const { return pml_x_ * hx_; }
    double kappa_y() const { return pml_y_ * hy_; }
    ElementBlock all_elements() const { return {0, nx_, 0, ny_}; }
    ElementBlock interior_elements() const { return {pml_x_, nx_ - pml_x_, pml_y_, ny_ - pml_y_}; }

    int nodes_x() const { return nx_ * p_ + 1; }
    int nodes_y() const { return ny_ * p_ + 1; }
    int num_nodes() const { return nodes_x() * nodes_y(); }
    int num_free() const { return (nodes_x() - 2) * (nodes_y() - 2); }
    int num_elements() const { return nx_ * ny_; }

    int node_index(int ix, int iy) const { return iy * nodes_x() + ix; }
    double node_x(int ix) const;
    double node_y(int iy) const;
    Point node(int index) const;
    /// Free-dof index of a node, or -1 for nodes on the outer boundary.
    int free_index(int ix, int iy) const;
    int free_to_node(int free) const;
    std::vector<int> boundary_nodes() const;
    /// Nearest node to a point in the closure of Omega.
    int nearest_node(Point x) const;

    /// Physical rectangle of an element block.
    Rect block_rect(const ElementBlock& b) const;

    /// Expands a free-dof vector to all nodes with zeros on the outer boundary.
    template <class T>
    std::vector<T> expand_free(const std::vector<T>& free) const;
    template <class T>
    std::vector<T> restrict_free(const std::vector<T>& nodal) const;

private:
    Rect interior_;
    Rect domain_;
    int nx_;
    int ny_;
    int pml_x_;
    int pml_y_;
    int p_;
    double hx_;
    double hy_;
};

/// Builds the grid over Omega_int inflated by kappa, with kappa rounded up to a whole
/// number of elements and Omega_int resolved exactly.
Grid build_grid(const Rect& omega_int, double kappa, double k, const MeshRule& rule, int p,
                std::size_t max_dofs = 4'000'000);

RegionTag classify_point(const Grid& grid, Point x);

/// Elements whose closure lies in the closure of a mesh-aligned box.
ElementBlock element_block(const Grid& grid, const Rect& box);
std::vector<int> elements_in(const Grid& grid, const Rect& box);

/// Global free-dof indices of the nodes strictly inside a block, in block-lexicographic order.
/// This is the injection V_h(block) -> V_h used by all subdomain operators.
std::vector<int> block_free_dofs(const Grid& grid, const ElementBlock& block);

template <class T>
std::vector<T> Grid::expand_free(const std::vector<T>& free) const {
    if (static_cast<int>(free.size()) != num_free()) throw Error("expand_free: size mismatch");
    std::vector<T> out(num_nodes(), T{});
    const int mx = nodes_x() - 2;
    for (int f = 0; f < num_free(); ++f) out[node_index(f % mx + 1, f / mx + 1)] = free[f];
    return out;
}

template <class T>
std::vector<T> Grid::restrict_free(const std::vector<T>& nodal) const {
    if (static_cast<int>(nodal.size()) != num_nodes()) throw Error("restrict_free: size mismatch");
    std::vector<T> out(num_free());
    const int mx = nodes_x() - 2;
    for (int f = 0; f < num_free(); ++f) out[f] = nodal[node_index(f % mx + 1, f / mx + 1)];
    return out;
}

}  // namespace helmdd
